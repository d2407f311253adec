#pragma once

#include <map>
#include <string>
#include <vector>

#include "tropic/machines.hpp"
#include "tropic/surface.hpp"
#include "tropic/word.hpp"

namespace tropic {

enum class CompileTarget { L, LP, P, NC };

const char* target_name(CompileTarget t);
std::optional<CompileTarget> target_by_name(const std::string& s);

// A machine configuration as 2k+3 binary words: state code, pointer tape,
// pointer head mask, k work tapes, k work head masks.
struct ConfigEncoding {
  std::vector<Word> words;
};

std::size_t state_code_width(const Machine& m);
Word state_code(const Machine& m, int state);
ConfigEncoding encode_config(const Machine& m, const Configuration& c, std::size_t n);
Configuration decode_config(const Machine& m, const ConfigEncoding& enc, std::size_t n);

struct CompiledProgram {
  std::string text;                            // surface program, reparseable
  std::map<std::string, std::string> manifest; // role -> definition name
  CompileTarget target = CompileTarget::L;
};

std::string manifest_text(const CompiledProgram& cp);

// The helper definitions every compiled program ships (booleans, if-then-else,
// scan-until-1 with prefix, substring extraction by prefix, one-bit
// replacement, mask shifts). All pass the scheme checker and tier inference
// and none uses recursion on values.
std::string stdlib_text();
std::vector<std::string> stdlib_def_names();

// Deterministic machine -> tropical program iterating Next n^k times
// (target L) or ceil(log2(n+1))^k times (target LP), k = work tape count.
CompiledProgram compile_ratm(const Machine& m, CompileTarget target = CompileTarget::L);
inline CompiledProgram compile_ratm_lp(const Machine& m) {
  return compile_ratm(m, CompileTarget::LP);
}

// Alternating machine -> substitution-recursion program evaluating the
// alternation tree to depth n (target P) or ceil(log2(n+1)) (target NC).
CompiledProgram compile_alternating(const Machine& m, CompileTarget target = CompileTarget::P);

// The Next-application budget of the emitted deterministic program on an
// input of length n, and the alternation depth of the emitted alternating one.
std::uint64_t deterministic_budget(const Machine& m, CompileTarget target, std::size_t n);
std::uint64_t alternation_depth(CompileTarget target, std::size_t n);

// Static nesting depth of recursion schemes along the call graph.
int recursion_nesting_depth(const SurfaceProgram& sp);

struct EquivReport {
  bool ok = false;
  std::uint64_t checked = 0;
  std::uint64_t mismatches = 0;
  std::vector<std::string> failures;  // first few, human-readable
};

// Cross-check the compiled program against the simulator on every input of
// length <= max_len at the matched step/depth budget.
EquivReport check_equivalence(const Machine& m, CompileTarget target, int max_len,
                              std::uint64_t fuel = 200'000'000);

}  // namespace tropic
