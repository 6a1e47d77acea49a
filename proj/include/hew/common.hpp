#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hew {

enum class ErrorCode {
  DeclarationHasNoBody,
  IllegalInline,
  PolicyEvaluationFailure,
  SlotMissing,
  SlotOutOfBounds,
  MalformedTemplate,
  SyntaxError,
  InvalidExtraction,
  NoValidExtraction,
  TooLarge,
  Infeasible,
  IncompleteAssignment,
  EmptySpace,
  ProposerTimeout,
  ProposerProtocolError,
  BadInput,
  Internal,
};

const char* error_code_name(ErrorCode c);

/// Exception type used across the library. Errors that represent a bad
/// candidate (rather than a programming mistake) are caught at the harness
/// boundary and mapped to an Invalid score.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg),
        code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// 64-bit saturating arithmetic for DSL evaluation.
inline int64_t sat_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    return b > 0 ? std::numeric_limits<int64_t>::max()
                 : std::numeric_limits<int64_t>::min();
  return r;
}

inline int64_t sat_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    return ((a > 0) == (b > 0)) ? std::numeric_limits<int64_t>::max()
                                : std::numeric_limits<int64_t>::min();
  return r;
}

inline int64_t sat_neg(int64_t a) {
  return a == std::numeric_limits<int64_t>::min()
             ? std::numeric_limits<int64_t>::max()
             : -a;
}

/// Threshold-style subtraction: clamps at zero, never negative.
inline int64_t sub_floor0(int64_t a, int64_t b) {
  int64_t r = sat_add(a, sat_neg(b));
  return r < 0 ? 0 : r;
}

/// FNV-1a, used for corpus hashes in run manifests.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

/// Derive an independent stream seed from a base seed and a stream index
/// (splitmix64 finalizer).
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

} // namespace hew
