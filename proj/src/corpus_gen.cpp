#include "hew/mini_ir.hpp"

#include <algorithm>
#include <random>

namespace hew {

namespace {

// Non-terminator opcode pool for random bodies. Weighted towards the common
// arithmetic/memory mix; calls are inserted separately.
const Opcode kBodyOps[] = {
    Opcode::Load,   Opcode::Store, Opcode::Alloca, Opcode::Gep,
    Opcode::Add,    Opcode::Sub,   Opcode::Mul,    Opcode::ICmp,
    Opcode::Select, Opcode::Phi,   Opcode::BitCast, Opcode::PtrToInt,
    Opcode::IntToPtr, Opcode::FAdd, Opcode::FMul,  Opcode::FCmp,
    Opcode::SDiv,   Opcode::URem,  Opcode::InsertElement,
    Opcode::ExtractElement, Opcode::ShuffleVector, Opcode::Other,
};

TypeTag random_type(std::mt19937_64& rng, bool allow_void) {
  switch (rng() % (allow_void ? 6 : 5)) {
  case 0: return TypeTag::make_int(32);
  case 1: return TypeTag::make_int(64);
  case 2: return TypeTag::pointer();
  case 3: return TypeTag::make_float(rng() % 2 ? 32 : 64);
  case 4: return TypeTag::vector(TypeKind::Int, 32, 4);
  default: return TypeTag::voidty();
  }
}

TypeTag result_type_for(Opcode op, std::mt19937_64& rng) {
  switch (op) {
  case Opcode::Store:
  case Opcode::Fence:
    return TypeTag::voidty();
  case Opcode::Alloca:
  case Opcode::Gep:
  case Opcode::IntToPtr:
    return TypeTag::pointer();
  case Opcode::ICmp:
  case Opcode::FCmp:
    return TypeTag::make_int(1);
  case Opcode::InsertElement:
  case Opcode::ShuffleVector:
    return TypeTag::vector(TypeKind::Int, 32, 4);
  case Opcode::FAdd:
  case Opcode::FMul:
    return TypeTag::make_float(64);
  default:
    return rng() % 4 == 0 ? random_type(rng, false) : TypeTag::make_int(64);
  }
}

std::string fname(int i) { return "f" + std::to_string(i); }

} // namespace

Program generate_program(uint64_t seed, const CorpusGenConfig& cfg) {
  std::mt19937_64 rng(mix_seed(seed, 0));
  Program p;
  int n = std::max(1, cfg.functions);

  struct PendingCall {
    std::string caller;
    int block;
    int inst;      // index within block
    int callee;    // function index, -1 = indirect
  };
  std::vector<PendingCall> pending;

  for (int i = 0; i < n; ++i) {
    Function f;
    f.id = fname(i);
    bool decl = rng() % 10 == 0 && i > 1;
    f.attrs.is_declaration = decl;
    int nparams = static_cast<int>(rng() % (cfg.max_args + 1));
    for (int a = 0; a < nparams; ++a) f.params.push_back(random_type(rng, false));
    if (!decl) {
      switch (rng() % 16) {
      case 0: f.attrs.no_inline = true; break;
      case 1: f.attrs.always_inline = true; break;
      case 2: f.attrs.optimize_for_size = true; break;
      case 3: f.attrs.min_size = true; break;
      case 4: f.attrs.hot = true; break;
      case 5: f.attrs.optimize_for_size = f.attrs.min_size = true; break;
      default: break;
      }
      if (rng() % 12 == 0) f.attrs.is_optimized_libfunc = true;
      if (rng() % 5 == 0) f.attrs.externally_visible = true;
    }
    switch (rng() % 6) {
    case 0: f.mem = MemoryEffect::None; break;
    case 1: f.mem = MemoryEffect::ReadOnly; break;
    default: f.mem = MemoryEffect::ReadWrite; break;
    }
    f.entry_frequency = 1 + static_cast<int64_t>(rng() % 1024);

    if (!decl) {
      int nblocks = 1 + static_cast<int>(rng() % cfg.max_blocks);
      for (int b = 0; b < nblocks; ++b) {
        BasicBlock bb;
        bb.loop_depth = static_cast<int>(rng() % 4);
        bb.frequency = b == 0 ? f.entry_frequency
                              : 1 + static_cast<int64_t>(rng() % (4 * f.entry_frequency));
        int ninst = 1 + static_cast<int>(rng() % cfg.max_instructions);
        for (int k = 0; k < ninst; ++k) {
          Instruction ins;
          if (rng() % 7 == 0) {
            // Call; target fixed up after all functions exist. Bias towards
            // later functions so most of the call graph is forward (a DAG),
            // with occasional self/backward edges for recursion coverage.
            int callee;
            uint64_t r = rng() % 20;
            if (r == 0) callee = -1;                       // indirect
            else if (r == 1) callee = i;                   // recursive
            else if (r <= 3) callee = static_cast<int>(rng() % n);
            else callee = i + 1 + static_cast<int>(rng() % std::max(1, n - i - 1));
            if (callee >= n) callee = -1;
            ins.opcode = rng() % 8 == 0 ? Opcode::Invoke : Opcode::Call;
            ins.result_type = random_type(rng, true);
            pending.push_back({f.id, b, static_cast<int>(bb.instructions.size()), callee});
          } else {
            ins.opcode = kBodyOps[rng() % std::size(kBodyOps)];
            ins.result_type = result_type_for(ins.opcode, rng);
          }
          bb.instructions.push_back(std::move(ins));
        }
        Instruction term;
        if (b == nblocks - 1) {
          term.opcode = Opcode::Ret;
        } else {
          switch (rng() % 8) {
          case 0: term.opcode = Opcode::Ret; break;
          case 1: term.opcode = Opcode::Switch; break;
          default: term.opcode = Opcode::Br; break;
          }
        }
        bb.instructions.push_back(term);
        f.blocks.push_back(std::move(bb));
      }
    }
    p.functions.emplace(f.id, std::move(f));
  }

  int cs_counter = 0;
  for (auto& pc : pending) {
    CallSite cs;
    cs.id = "cs" + std::to_string(cs_counter++);
    cs.caller = pc.caller;
    cs.block = pc.block;
    if (pc.callee >= 0) cs.callee = fname(pc.callee);
    const Function* callee_fn =
        cs.callee ? &p.functions.at(*cs.callee) : nullptr;
    int nargs;
    if (callee_fn && rng() % 4 != 0) {
      nargs = static_cast<int>(callee_fn->params.size());
    } else {
      nargs = static_cast<int>(rng() % (cfg.max_args + 2)); // may exceed params
    }
    for (int a = 0; a < nargs; ++a) {
      ArgValue av;
      uint64_t r = rng() % 10;
      av.kind = r < 3 ? ArgKind::Constant : r < 4 ? ArgKind::Undef : ArgKind::Runtime;
      if (callee_fn && a < static_cast<int>(callee_fn->params.size()) && rng() % 2) {
        av.type_tag = callee_fn->params[a]; // exact match
      } else {
        av.type_tag = random_type(rng, false);
      }
      cs.args.push_back(av);
    }
    Instruction& call_ins =
        p.functions.at(pc.caller).blocks[pc.block].instructions[pc.inst];
    call_ins.callsite_id = cs.id;
    call_ins.indirect = !cs.callee.has_value();
    p.callsites.emplace(cs.id, std::move(cs));
  }

  // Roots: the first two functions (or all, for tiny programs).
  p.roots.insert(fname(0));
  if (n > 1) p.roots.insert(fname(1));
  p.check();
  return p;
}

} // namespace hew
