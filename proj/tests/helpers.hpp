#pragma once

#include "hew/mini_ir.hpp"

namespace hewtest {

using namespace hew;

// Single-block function: the given opcodes followed by a Ret.
inline Function make_fn(const std::string& id, std::vector<Opcode> ops,
                        FunctionAttrs attrs = {},
                        MemoryEffect mem = MemoryEffect::ReadWrite) {
  Function f;
  f.id = id;
  f.attrs = attrs;
  f.mem = mem;
  if (attrs.is_declaration) return f;
  BasicBlock bb;
  for (Opcode op : ops)
    bb.instructions.push_back({op, TypeTag::make_int(32), {}, false});
  bb.instructions.push_back({Opcode::Ret, TypeTag::voidty(), {}, false});
  bb.frequency = 1;
  f.blocks.push_back(std::move(bb));
  return f;
}

// Function whose body is `others` weight-1 instructions plus the final Ret.
inline Function make_fn_n(const std::string& id, int others,
                          FunctionAttrs attrs = {},
                          MemoryEffect mem = MemoryEffect::ReadWrite) {
  return make_fn(id, std::vector<Opcode>(others, Opcode::Other), attrs, mem);
}

// Inserts a call instruction before the terminator of `block` and registers
// the matching callsite.
inline CallSite& add_call(Program& p, const std::string& id,
                          const std::string& caller,
                          std::optional<std::string> callee,
                          std::vector<ArgValue> args = {}, int block = 0) {
  Function& cf = p.functions.at(caller);
  Instruction ins;
  ins.opcode = Opcode::Call;
  ins.result_type = TypeTag::voidty();
  ins.callsite_id = id;
  ins.indirect = !callee.has_value();
  auto& instrs = cf.blocks.at(block).instructions;
  instrs.insert(instrs.end() - 1, ins);
  CallSite cs;
  cs.id = id;
  cs.caller = caller;
  cs.callee = std::move(callee);
  cs.args = std::move(args);
  cs.block = block;
  return p.callsites.emplace(id, std::move(cs)).first->second;
}

inline Program two_fn_program(Function caller, Function callee) {
  Program p;
  p.roots.insert(caller.id);
  p.functions.emplace(caller.id, std::move(caller));
  p.functions.emplace(callee.id, std::move(callee));
  return p;
}

} // namespace hewtest
