#include "hew/mini_ir.hpp"

#include <array>
#include <nlohmann/json.hpp>

namespace hew {

using json = nlohmann::json;

const char* error_code_name(ErrorCode c) {
  switch (c) {
  case ErrorCode::DeclarationHasNoBody: return "DeclarationHasNoBody";
  case ErrorCode::IllegalInline: return "IllegalInline";
  case ErrorCode::PolicyEvaluationFailure: return "PolicyEvaluationFailure";
  case ErrorCode::SlotMissing: return "SlotMissing";
  case ErrorCode::SlotOutOfBounds: return "SlotOutOfBounds";
  case ErrorCode::MalformedTemplate: return "MalformedTemplate";
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::InvalidExtraction: return "InvalidExtraction";
  case ErrorCode::NoValidExtraction: return "NoValidExtraction";
  case ErrorCode::TooLarge: return "TooLarge";
  case ErrorCode::Infeasible: return "Infeasible";
  case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
  case ErrorCode::EmptySpace: return "EmptySpace";
  case ErrorCode::ProposerTimeout: return "ProposerTimeout";
  case ErrorCode::ProposerProtocolError: return "ProposerProtocolError";
  case ErrorCode::BadInput: return "BadInput";
  case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

TypeTag TypeTag::vector(TypeKind elem, int elem_bits, int lanes) {
  TypeTag t{TypeKind::Vector, 0, lanes, elem, elem_bits};
  t.check();
  return t;
}

void TypeTag::check() const {
  auto fail = [](const char* m) { throw Error(ErrorCode::BadInput, m); };
  switch (kind) {
  case TypeKind::Int:
  case TypeKind::Float:
    if (width <= 0) fail("Int/Float width must be positive");
    break;
  case TypeKind::Vector:
    if (lanes <= 0) fail("Vector lanes must be positive");
    if (elem_kind == TypeKind::Vector || elem_kind == TypeKind::Void)
      fail("Vector element may not be Vector or Void");
    if ((elem_kind == TypeKind::Int || elem_kind == TypeKind::Float) && elem_width <= 0)
      fail("Vector element width must be positive");
    break;
  default:
    break;
  }
}

namespace {
constexpr std::array<std::pair<Opcode, const char*>, 38> kOpcodeNames{{
    {Opcode::Call, "call"},
    {Opcode::Invoke, "invoke"},
    {Opcode::Ret, "ret"},
    {Opcode::Br, "br"},
    {Opcode::Switch, "switch"},
    {Opcode::IndirectBr, "indirectbr"},
    {Opcode::Load, "load"},
    {Opcode::Store, "store"},
    {Opcode::Alloca, "alloca"},
    {Opcode::Gep, "gep"},
    {Opcode::AtomicRMW, "atomicrmw"},
    {Opcode::CmpXchg, "cmpxchg"},
    {Opcode::Fence, "fence"},
    {Opcode::FAdd, "fadd"},
    {Opcode::FSub, "fsub"},
    {Opcode::FMul, "fmul"},
    {Opcode::FDiv, "fdiv"},
    {Opcode::FRem, "frem"},
    {Opcode::FNeg, "fneg"},
    {Opcode::FCmp, "fcmp"},
    {Opcode::SDiv, "sdiv"},
    {Opcode::UDiv, "udiv"},
    {Opcode::SRem, "srem"},
    {Opcode::URem, "urem"},
    {Opcode::InsertElement, "insertelement"},
    {Opcode::ExtractElement, "extractelement"},
    {Opcode::ShuffleVector, "shufflevector"},
    {Opcode::InsertValue, "insertvalue"},
    {Opcode::ExtractValue, "extractvalue"},
    {Opcode::Phi, "phi"},
    {Opcode::BitCast, "bitcast"},
    {Opcode::PtrToInt, "ptrtoint"},
    {Opcode::IntToPtr, "inttoptr"},
    {Opcode::Add, "add"},
    {Opcode::Sub, "sub"},
    {Opcode::Mul, "mul"},
    {Opcode::ICmp, "icmp"},
    {Opcode::Select, "select"},
}};
} // namespace

const char* opcode_name(Opcode op) {
  for (auto& [o, n] : kOpcodeNames)
    if (o == op) return n;
  return "other";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  for (auto& [o, n] : kOpcodeNames)
    if (name == n) return o;
  if (name == "other") return Opcode::Other;
  return std::nullopt;
}

int size_weight(Opcode op) {
  switch (op) {
  case Opcode::Call:
  case Opcode::Invoke:
  case Opcode::Ret:
  case Opcode::Br:
  case Opcode::Switch:
  case Opcode::IndirectBr:
    return 3;
  case Opcode::Load:
  case Opcode::Store:
  case Opcode::Alloca:
  case Opcode::Gep:
  case Opcode::CmpXchg:
  case Opcode::AtomicRMW:
  case Opcode::Fence:
  case Opcode::FNeg:
  case Opcode::FAdd:
  case Opcode::FSub:
  case Opcode::FMul:
  case Opcode::FDiv:
  case Opcode::FRem:
  case Opcode::FCmp:
  case Opcode::SDiv:
  case Opcode::UDiv:
  case Opcode::SRem:
  case Opcode::URem:
  case Opcode::InsertElement:
  case Opcode::ExtractElement:
  case Opcode::ShuffleVector:
  case Opcode::ExtractValue:
  case Opcode::InsertValue:
    return 2;
  default:
    return 1;
  }
}

bool perf_zero_cost(Opcode op) {
  switch (op) {
  case Opcode::Alloca:
  case Opcode::Phi:
  case Opcode::BitCast:
  case Opcode::PtrToInt:
  case Opcode::IntToPtr:
    return true;
  default:
    return false;
  }
}

const Function& Program::function(const std::string& id) const {
  auto it = functions.find(id);
  if (it == functions.end())
    throw Error(ErrorCode::BadInput, "unknown function " + id);
  return it->second;
}

const CallSite& Program::callsite(const std::string& id) const {
  auto it = callsites.find(id);
  if (it == callsites.end())
    throw Error(ErrorCode::BadInput, "unknown callsite " + id);
  return it->second;
}

void Program::check() const {
  for (auto& [id, f] : functions) {
    if (f.id != id)
      throw Error(ErrorCode::BadInput, "function key/id mismatch for " + id);
    if (f.attrs.no_inline && f.attrs.always_inline)
      throw Error(ErrorCode::BadInput, "no_inline && always_inline on " + id);
    if (f.attrs.is_declaration && !f.blocks.empty())
      throw Error(ErrorCode::BadInput, "declaration with body: " + id);
    if (!f.attrs.is_declaration && f.blocks.empty())
      throw Error(ErrorCode::BadInput, "defined function without blocks: " + id);
    if (f.entry_frequency < 1)
      throw Error(ErrorCode::BadInput, "entry_frequency < 1 on " + id);
    for (auto& t : f.params) t.check();
    for (auto& bb : f.blocks) {
      if (bb.loop_depth < 0 || bb.frequency < 0)
        throw Error(ErrorCode::BadInput, "negative block attribute in " + id);
      // Inlining splices callee blocks with their rets stripped, so blocks are
      // only required to be non-empty, not terminator-ended.
      if (bb.instructions.empty())
        throw Error(ErrorCode::BadInput, "empty block in " + id);
      for (auto& ins : bb.instructions) {
        ins.result_type.check();
        if (ins.callsite_id.has_value() != is_call(ins.opcode))
          throw Error(ErrorCode::BadInput,
                      "callsite_id present iff opcode is call/invoke, in " + id);
        if (ins.callsite_id) {
          auto cit = callsites.find(*ins.callsite_id);
          if (cit == callsites.end())
            throw Error(ErrorCode::BadInput, "dangling callsite_id in " + id);
          if (ins.indirect != cit->second.is_indirect())
            throw Error(ErrorCode::BadInput,
                        "indirect flag disagrees with callsite " + *ins.callsite_id);
        }
      }
    }
  }
  for (auto& [id, cs] : callsites) {
    if (cs.id != id)
      throw Error(ErrorCode::BadInput, "callsite key/id mismatch for " + id);
    const Function& caller = function(cs.caller);
    if (cs.block < 0 || cs.block >= static_cast<int>(caller.blocks.size()))
      throw Error(ErrorCode::BadInput, "callsite block out of range: " + id);
    if (cs.callee) function(*cs.callee);
    for (auto& a : cs.args) a.type_tag.check();
    bool found = false;
    for (auto& ins : caller.blocks[cs.block].instructions)
      if (ins.callsite_id == cs.id) found = true;
    if (!found)
      throw Error(ErrorCode::BadInput, "callsite not anchored to an instruction: " + id);
  }
  for (auto& r : roots) function(r);
}

int64_t instruction_count(const Function& f) {
  if (f.attrs.is_declaration || f.blocks.empty())
    throw Error(ErrorCode::DeclarationHasNoBody, f.id);
  int64_t n = 0;
  for (auto& bb : f.blocks) n += static_cast<int64_t>(bb.instructions.size());
  return n;
}

int64_t weighted_size_cost(const Function& f) {
  if (f.attrs.is_declaration || f.blocks.empty())
    throw Error(ErrorCode::DeclarationHasNoBody, f.id);
  int64_t n = 0;
  for (auto& bb : f.blocks)
    for (auto& ins : bb.instructions) n += size_weight(ins.opcode);
  return n;
}

PerfCost perf_cost(const Function& f, int64_t call_penalty) {
  if (f.attrs.is_declaration || f.blocks.empty())
    throw Error(ErrorCode::DeclarationHasNoBody, f.id);
  PerfCost out;
  for (auto& bb : f.blocks) {
    for (auto& ins : bb.instructions) {
      if (perf_zero_cost(ins.opcode)) continue;
      if (is_call(ins.opcode)) {
        out.cost += call_penalty;
        // An indirect call pays the penalty twice.
        if (ins.indirect) out.cost += call_penalty;
      } else {
        out.cost += 1;
      }
      if (!out.has_vector && ins.result_type.kind == TypeKind::Vector)
        out.has_vector = true;
    }
  }
  return out;
}

int64_t user_count(const Program& p, const Function& f) {
  int64_t n = 0;
  for (auto& [id, cs] : p.callsites)
    if (cs.callee && *cs.callee == f.id) ++n;
  return n;
}

CastClass cast_class(const TypeTag& arg, const TypeTag& param) {
  if (arg == param) return CastClass::Exact;
  auto is_int = [](const TypeTag& t) { return t.kind == TypeKind::Int; };
  auto is_float = [](const TypeTag& t) { return t.kind == TypeKind::Float; };
  auto is_ptr = [](const TypeTag& t) { return t.kind == TypeKind::Pointer; };
  if ((is_ptr(arg) && is_int(param)) || (is_int(arg) && is_ptr(param))) {
    const TypeTag& i = is_int(arg) ? arg : param;
    return i.width == kPointerBits ? CastClass::NoopPtrIntCast
                                   : CastClass::NontrivialCast;
  }
  if (is_int(arg) && is_int(param)) return CastClass::NontrivialCast;   // widths differ
  if (is_float(arg) && is_float(param)) return CastClass::NontrivialCast;
  if ((is_int(arg) && is_float(param)) || (is_float(arg) && is_int(param)))
    return CastClass::NontrivialCast;
  return CastClass::OtherMismatchNoop;
}

// --- JSON ---------------------------------------------------------------

namespace {

json type_to_json(const TypeTag& t) {
  switch (t.kind) {
  case TypeKind::Int: return json{{"kind", "int"}, {"width", t.width}};
  case TypeKind::Float: return json{{"kind", "float"}, {"width", t.width}};
  case TypeKind::Pointer: return json{{"kind", "pointer"}};
  case TypeKind::Void: return json{{"kind", "void"}};
  case TypeKind::Vector:
    return json{{"kind", "vector"},
                {"lanes", t.lanes},
                {"elem", json{{"kind", t.elem_kind == TypeKind::Int     ? "int"
                                       : t.elem_kind == TypeKind::Float ? "float"
                                                                        : "pointer"},
                              {"width", t.elem_width}}}};
  }
  return json{{"kind", "void"}};
}

TypeTag type_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  TypeTag t;
  if (kind == "int") t = TypeTag::make_int(j.at("width").get<int>());
  else if (kind == "float") t = TypeTag::make_float(j.at("width").get<int>());
  else if (kind == "pointer") t = TypeTag::pointer();
  else if (kind == "void") t = TypeTag::voidty();
  else if (kind == "vector") {
    const json& e = j.at("elem");
    std::string ek = e.at("kind").get<std::string>();
    TypeKind k = ek == "int" ? TypeKind::Int
                 : ek == "float" ? TypeKind::Float
                                 : TypeKind::Pointer;
    t = TypeTag::vector(k, e.value("width", 0), j.at("lanes").get<int>());
  } else {
    throw Error(ErrorCode::BadInput, "unknown type kind " + kind);
  }
  t.check();
  return t;
}

} // namespace

std::string program_to_json(const Program& p) {
  json funcs = json::array();
  for (auto& [id, f] : p.functions) {
    json blocks = json::array();
    for (auto& bb : f.blocks) {
      json insts = json::array();
      for (auto& ins : bb.instructions) {
        json ji{{"opcode", opcode_name(ins.opcode)},
                {"type", type_to_json(ins.result_type)}};
        if (ins.callsite_id) ji["callsite"] = *ins.callsite_id;
        if (ins.indirect) ji["indirect"] = true;
        insts.push_back(std::move(ji));
      }
      blocks.push_back(json{{"instructions", std::move(insts)},
                            {"loop_depth", bb.loop_depth},
                            {"frequency", bb.frequency}});
    }
    json params = json::array();
    for (auto& t : f.params) params.push_back(type_to_json(t));
    json attrs{{"no_inline", f.attrs.no_inline},
               {"always_inline", f.attrs.always_inline},
               {"optimize_for_size", f.attrs.optimize_for_size},
               {"min_size", f.attrs.min_size},
               {"hot", f.attrs.hot},
               {"is_declaration", f.attrs.is_declaration},
               {"is_optimized_libfunc", f.attrs.is_optimized_libfunc},
               {"externally_visible", f.attrs.externally_visible}};
    json jf{{"id", id},
            {"params", std::move(params)},
            {"attrs", std::move(attrs)},
            {"mem", f.mem == MemoryEffect::None       ? "none"
                    : f.mem == MemoryEffect::ReadOnly ? "readonly"
                                                      : "readwrite"},
            {"blocks", std::move(blocks)},
            {"entry_frequency", f.entry_frequency}};
    if (f.inlined_constant_args != 0)
      jf["inlined_constant_args"] = f.inlined_constant_args;
    funcs.push_back(std::move(jf));
  }
  json sites = json::array();
  for (auto& [id, cs] : p.callsites) {
    json args = json::array();
    for (auto& a : cs.args)
      args.push_back(json{{"kind", a.kind == ArgKind::Constant ? "constant"
                                   : a.kind == ArgKind::Undef  ? "undef"
                                                               : "runtime"},
                          {"type", type_to_json(a.type_tag)}});
    json jc{{"id", id},
            {"caller", cs.caller},
            {"args", std::move(args)},
            {"block", cs.block}};
    if (cs.callee) jc["callee"] = *cs.callee;
    sites.push_back(std::move(jc));
  }
  json out{{"functions", std::move(funcs)},
           {"callsites", std::move(sites)},
           {"roots", json(p.roots)}};
  return out.dump(2);
}

Program program_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("program JSON parse: ") + e.what());
  }
  Program p;
  try {
    for (auto& jf : j.at("functions")) {
      Function f;
      f.id = jf.at("id").get<std::string>();
      for (auto& jt : jf.at("params")) f.params.push_back(type_from_json(jt));
      const json& a = jf.at("attrs");
      f.attrs.no_inline = a.value("no_inline", false);
      f.attrs.always_inline = a.value("always_inline", false);
      f.attrs.optimize_for_size = a.value("optimize_for_size", false);
      f.attrs.min_size = a.value("min_size", false);
      f.attrs.hot = a.value("hot", false);
      f.attrs.is_declaration = a.value("is_declaration", false);
      f.attrs.is_optimized_libfunc = a.value("is_optimized_libfunc", false);
      f.attrs.externally_visible = a.value("externally_visible", false);
      std::string mem = jf.value("mem", "readwrite");
      f.mem = mem == "none"       ? MemoryEffect::None
              : mem == "readonly" ? MemoryEffect::ReadOnly
                                  : MemoryEffect::ReadWrite;
      for (auto& jb : jf.at("blocks")) {
        BasicBlock bb;
        bb.loop_depth = jb.value("loop_depth", 0);
        bb.frequency = jb.value("frequency", 0);
        for (auto& ji : jb.at("instructions")) {
          Instruction ins;
          auto op = opcode_from_name(ji.at("opcode").get<std::string>());
          if (!op) throw Error(ErrorCode::BadInput, "unknown opcode");
          ins.opcode = *op;
          if (ji.contains("type")) ins.result_type = type_from_json(ji.at("type"));
          if (ji.contains("callsite"))
            ins.callsite_id = ji.at("callsite").get<std::string>();
          ins.indirect = ji.value("indirect", false);
          bb.instructions.push_back(std::move(ins));
        }
        f.blocks.push_back(std::move(bb));
      }
      f.entry_frequency = jf.value("entry_frequency", int64_t{1});
      f.inlined_constant_args = jf.value("inlined_constant_args", int64_t{0});
      p.functions.emplace(f.id, std::move(f));
    }
    for (auto& jc : j.at("callsites")) {
      CallSite cs;
      cs.id = jc.at("id").get<std::string>();
      cs.caller = jc.at("caller").get<std::string>();
      if (jc.contains("callee")) cs.callee = jc.at("callee").get<std::string>();
      cs.block = jc.value("block", 0);
      for (auto& ja : jc.at("args")) {
        ArgValue a;
        std::string k = ja.at("kind").get<std::string>();
        a.kind = k == "constant" ? ArgKind::Constant
                 : k == "undef"  ? ArgKind::Undef
                                 : ArgKind::Runtime;
        a.type_tag = type_from_json(ja.at("type"));
        cs.args.push_back(a);
      }
      p.callsites.emplace(cs.id, std::move(cs));
    }
    for (auto& r : j.at("roots")) p.roots.insert(r.get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadInput, std::string("program JSON shape: ") + e.what());
  }
  p.check();
  return p;
}

} // namespace hew
