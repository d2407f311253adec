#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tropic/ast.hpp"
#include "tropic/eval.hpp"
#include "tropic/tropics.hpp"

namespace tropic {

struct TierEnv {
  std::map<std::string, TierSignature> sigs;
  // Output length of the Offset for the active computation input.
  long long offset_len = 0;

  const TierSignature* find(const std::string& name) const {
    auto it = sigs.find(name);
    return it == sigs.end() ? nullptr : &it->second;
  }
};

struct Untierable {
  std::string scheme;     // which rule family rejected, e.g. "recursion on notations"
  std::string condition;  // the side condition that failed, e.g. "case 1 requires T_2(g0) <= 0"
  std::string detail;     // witness, e.g. "T_2(g0) = 2"
  int witness_arg = 0;    // 1-based argument position of the witness
};

using TierVerdict = std::variant<TierSignature, Untierable>;

TierSignature basic_signature(const BasicFn& fn, long long offset_len);

// Infer the signature of one definition; env must already cover everything it
// references. Mutual blocks are inferred jointly via infer_block.
TierVerdict infer(const Program& prog, const FunctionDef& def, const TierEnv& env);
std::vector<TierVerdict> infer_block(const Program& prog,
                                     const std::vector<int>& members,
                                     const TierEnv& env);

struct ProgramTiers {
  TierEnv env;
  // Definition name -> verdict, in definition order.
  std::vector<std::pair<std::string, TierVerdict>> verdicts;

  const TierSignature* tiered(const std::string& name) const { return env.find(name); }
  bool all_tiered() const;
};

ProgramTiers infer_program(const Program& prog, long long offset_len);

// The tropical polynomial max_t{T_t + len_t, c, 0}.
long long bound_of(const TierSignature& sig, const std::vector<long long>& arg_lengths);

struct BoundViolation {
  std::vector<Word> args;
  long long got = 0;
  long long bound = 0;
};

struct BoundReport {
  bool ok = false;
  std::uint64_t checked = 0;
  std::uint64_t diverged = 0;
  std::uint64_t guarded = 0;
  // Per-argument length actually swept (may be below the request for high
  // arities; see max_tuples).
  int used_max_len = 0;
  int requested_max_len = 0;
  std::vector<BoundViolation> violations;
};

// Exhaustively evaluates fname on all argument tuples with lengths <=
// max_arg_len and checks the tropical interpretation bound. When the tuple
// count would exceed max_tuples the per-argument length is lowered to the
// largest value that fits. `override_sig` substitutes a hand-given signature
// (for deliberately mis-tiered checks).
BoundReport verify_bound(const Program& prog, const std::string& fname,
                         const ComputationInput& input, int max_arg_len,
                         std::uint64_t fuel, const TierEnv& env,
                         const TierSignature* override_sig = nullptr,
                         std::uint64_t max_tuples = 2'000'000);

std::string tier_line(const std::string& name, const TierVerdict& v);
std::string violation_line(const std::string& name, const BoundViolation& v);

}  // namespace tropic
