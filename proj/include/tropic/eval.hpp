#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tropic/ast.hpp"
#include "tropic/word.hpp"

namespace tropic {

// The computation input w̄; functions reach it only through Read and Offset.
struct ComputationInput {
  Word word;
  std::size_t n() const { return word.size(); }
};

struct EvalMetrics {
  std::uint64_t scheme_steps = 0;
  std::uint64_t basic_calls = 0;
  std::uint64_t max_word_len = 0;
  std::uint64_t next_applications = 0;
};

enum class OutcomeKind { Value, Diverged, Error };

struct EvalOutcome {
  OutcomeKind kind = OutcomeKind::Error;
  Word value;
  std::string error;

  bool ok() const { return kind == OutcomeKind::Value; }
};

struct EvalOptions {
  std::uint64_t fuel = 50'000'000;
  std::size_t max_word_len = 1 << 16;
  // When nonempty, next_applications counts applications of this definition.
  std::string count_name;
};

std::size_t default_word_guard();  // honors TROPIC_MAX_WORD_LEN

// Defining equations of the basic functions. Throws std::invalid_argument on
// an arity mismatch; otherwise total.
Word eval_basic(const BasicFn& fn, std::span<const Word> args,
                const ComputationInput& input, std::size_t max_word_len = 1 << 16);

// fname may name a definition or a basic function.
EvalOutcome eval(const Program& prog, const std::string& fname,
                 std::vector<Word> args, const ComputationInput& input,
                 std::uint64_t fuel);

std::pair<EvalOutcome, EvalMetrics> eval_with_metrics(
    const Program& prog, const std::string& fname, std::vector<Word> args,
    const ComputationInput& input, const EvalOptions& options);

}  // namespace tropic
