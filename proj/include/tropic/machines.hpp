#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tropic/eval.hpp"
#include "tropic/word.hpp"

namespace tropic {

enum class Move { L, R, S };
enum class StateKind { Deterministic, Universal, Existential };

// Key: symbols under the heads, pointer tape first then the k work tapes.
using ReadSymbols = std::string;  // chars '0'/'1', length k+1

struct TransitionTarget {
  int next_state = 0;
  std::string writes;  // length k+1, pointer tape first
  std::vector<Move> moves;
};

struct Transition {
  // branch[0] used by deterministic states; both by nondeterministic ones.
  std::optional<TransitionTarget> branch[2];
};

// A random-access Turing machine: no input head; a log-size pointer tape
// (index stored least-significant-bit at cell 0); k work tapes; a Read state
// that fetches input symbol decode(pointer) onto the first work tape's head
// cell before its ordinary transition fires. Out-of-range fetches write 0
// there and set cell 0 of the last work tape to 1.
struct Machine {
  std::vector<std::string> state_names;
  int init_state = 0;
  int accept_state = 0;
  int reject_state = 0;
  int read_state = -1;  // -1: none
  int tapes = 1;
  std::vector<StateKind> kinds;
  std::map<std::pair<int, ReadSymbols>, Transition> trans;

  bool alternating = false;  // any universal/existential state

  int state_count() const { return static_cast<int>(state_names.size()); }
  bool is_halting(int q) const { return q == accept_state || q == reject_state; }
  int find_state(const std::string& name) const;
};

struct MachineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Machine parse_machine(const std::string& text);
std::string serialize_machine(const Machine& m);

// All tapes have exactly pointer_budget(n) cells; blanks are 0.
struct Configuration {
  int state = 0;
  std::vector<std::string> tape;  // [0] = pointer tape, then work tapes
  std::vector<std::size_t> head;  // per tape

  bool operator==(const Configuration&) const = default;
};

// Pointer tape = encode(1) LSB-first, work tapes blank, heads at cell 0.
Configuration initial_configuration(const Machine& m, std::size_t n);

// Numeric value of the pointer tape (LSB at cell 0).
std::uint64_t pointer_value(const Configuration& c);

// One transition. Pre: non-halting configuration. Throws MachineError on an
// undefined transition or a space-budget violation (R at the last cell).
Configuration step(const Machine& m, const Configuration& c,
                   const ComputationInput& input, int branch = 0);

enum class HaltStatus { Accept, Reject, OutOfFuel };

struct RunResult {
  HaltStatus status = HaltStatus::OutOfFuel;
  Word output;  // first work tape, cells 0..head inclusive
  std::uint64_t steps = 0;
  std::size_t max_space = 0;  // total tape cells (fixed-length model)
  Configuration final_config;
};

Word config_output(const Configuration& c);

RunResult run(const Machine& m, const ComputationInput& input, std::uint64_t max_steps);

// Alternation-tree evaluation: at depth 0 a configuration is accepted iff it
// is final and accepting; universal nodes need both branches, existential
// either; deterministic states follow branch 0. Accept/reject states are
// absorbing at any depth.
bool run_alternating(const Machine& m, const ComputationInput& input, std::uint64_t depth);
bool run_alternating_from(const Machine& m, const Configuration& c,
                          const ComputationInput& input, std::uint64_t depth);

}  // namespace tropic
