#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hew/common.hpp"

namespace hew {

// ---------------------------------------------------------------------------
// Miniature IR: just enough structure to drive the predicates read by the
// reference inlining policies. No dataflow, no SSA, no executable semantics.
// ---------------------------------------------------------------------------

enum class TypeKind { Int, Float, Pointer, Vector, Void };

/// Pointers are modeled with a single fixed 64-bit layout.
constexpr int kPointerBits = 64;

struct TypeTag {
  TypeKind kind = TypeKind::Void;
  int width = 0;     // Int/Float bit width
  int lanes = 0;     // Vector lane count
  TypeKind elem_kind = TypeKind::Void; // Vector element kind
  int elem_width = 0;                  // Vector element width

  static TypeTag make_int(int bits) { return {TypeKind::Int, bits, 0, TypeKind::Void, 0}; }
  static TypeTag make_float(int bits) { return {TypeKind::Float, bits, 0, TypeKind::Void, 0}; }
  static TypeTag pointer() { return {TypeKind::Pointer, 0, 0, TypeKind::Void, 0}; }
  static TypeTag voidty() { return {TypeKind::Void, 0, 0, TypeKind::Void, 0}; }
  static TypeTag vector(TypeKind elem, int elem_bits, int lanes);

  bool operator==(const TypeTag&) const = default;
  void check() const; // throws BadInput on invariant violation
};

enum class Opcode {
  Call, Invoke, Ret, Br, Switch, IndirectBr,
  Load, Store, Alloca, Gep, AtomicRMW, CmpXchg, Fence,
  FAdd, FSub, FMul, FDiv, FRem, FNeg, FCmp,
  SDiv, UDiv, SRem, URem,
  InsertElement, ExtractElement, ShuffleVector,
  InsertValue, ExtractValue,
  Phi, BitCast, PtrToInt, IntToPtr,
  Add, Sub, Mul, ICmp, Select, Other,
};

const char* opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(const std::string& name);

inline bool is_call(Opcode op) { return op == Opcode::Call || op == Opcode::Invoke; }
inline bool is_terminator(Opcode op) {
  return op == Opcode::Ret || op == Opcode::Br || op == Opcode::Switch ||
         op == Opcode::IndirectBr;
}

/// Size-scheme weight (3 for control/call, 2 for memory/arith, 1 otherwise).
int size_weight(Opcode op);

/// True iff the perf cost scheme skips the opcode entirely
/// (alloca, phi, bitcast, ptrtoint, inttoptr).
bool perf_zero_cost(Opcode op);

struct Instruction {
  Opcode opcode = Opcode::Other;
  TypeTag result_type = TypeTag::voidty();
  std::optional<std::string> callsite_id; // present iff opcode is call/invoke
  bool indirect = false; // mirrors the callsite's missing callee; checked
};

struct BasicBlock {
  std::vector<Instruction> instructions;
  int loop_depth = 0;
  int64_t frequency = 0;
};

struct FunctionAttrs {
  bool no_inline = false;
  bool always_inline = false;
  bool optimize_for_size = false;
  bool min_size = false;
  bool hot = false;
  bool is_declaration = false;
  bool is_optimized_libfunc = false;
  bool externally_visible = false;
};

enum class MemoryEffect { None, ReadOnly, ReadWrite };

/// "Only reads memory": holds for None (reads nothing) and ReadOnly.
inline bool only_reads_memory(MemoryEffect e) { return e != MemoryEffect::ReadWrite; }

struct Function {
  std::string id;
  std::vector<TypeTag> params;
  FunctionAttrs attrs;
  MemoryEffect mem = MemoryEffect::ReadWrite;
  std::vector<BasicBlock> blocks;
  int64_t entry_frequency = 1;
  // Transform bookkeeping: constant-kind arguments of callsites inlined into
  // this function so far; feeds the size model's simplification credit.
  int64_t inlined_constant_args = 0;
};

enum class ArgKind { Constant, Undef, Runtime };

struct ArgValue {
  ArgKind kind = ArgKind::Runtime;
  TypeTag type_tag;
};

struct CallSite {
  std::string id;
  std::string caller;
  std::optional<std::string> callee; // nullopt = indirect call
  std::vector<ArgValue> args;
  int block = 0; // index into caller's blocks

  bool is_indirect() const { return !callee.has_value(); }
};

struct Program {
  std::map<std::string, Function> functions;
  std::map<std::string, CallSite> callsites;
  std::set<std::string> roots;

  const Function& function(const std::string& id) const;
  const CallSite& callsite(const std::string& id) const;

  /// Structural validation of every cross-reference and type invariant.
  /// Throws BadInput on the first violation found.
  void check() const;
};

// --- Operations -------------------------------------------------------------

int64_t instruction_count(const Function& f); // throws DeclarationHasNoBody
int64_t weighted_size_cost(const Function& f); // throws DeclarationHasNoBody

struct PerfCost {
  int64_t cost = 0;
  bool has_vector = false;
};
PerfCost perf_cost(const Function& f, int64_t call_penalty); // throws DeclarationHasNoBody

/// Number of direct callsites in `p` targeting `f`, recounted from scratch.
int64_t user_count(const Program& p, const Function& f);

enum class CastClass { Exact, NoopPtrIntCast, NontrivialCast, OtherMismatchNoop };
CastClass cast_class(const TypeTag& arg, const TypeTag& param);

// --- Corpus I/O and generation ----------------------------------------------

std::string program_to_json(const Program& p);
Program program_from_json(const std::string& text); // throws BadInput

struct CorpusGenConfig {
  int functions = 40;          // functions per program
  int max_blocks = 6;
  int max_instructions = 14;   // per block
  int max_args = 4;
};

/// Deterministic random program, seeded by a 64-bit integer.
Program generate_program(uint64_t seed, const CorpusGenConfig& cfg = {});

} // namespace hew
