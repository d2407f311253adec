#include "tropic/machines.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace tropic {

namespace {

char move_char(Move m) { return m == Move::L ? 'L' : m == Move::R ? 'R' : 'S'; }

Move move_of(char c) {
  if (c == 'L') return Move::L;
  if (c == 'R') return Move::R;
  if (c == 'S') return Move::S;
  throw MachineError(std::string("bad move '") + c + "'");
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int Machine::find_state(const std::string& name) const {
  for (std::size_t i = 0; i < state_names.size(); ++i)
    if (state_names[i] == name) return static_cast<int>(i);
  return -1;
}

Machine parse_machine(const std::string& text) {
  Machine m;
  m.read_state = -1;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_states = false, have_init = false, have_accept = false, have_reject = false,
       have_tapes = false;

  struct PendingTrans {
    std::string from;
    std::string reads, to, writes, moves;
    int branch = 0;
    int line = 0;
  };
  std::vector<PendingTrans> pending;
  std::vector<std::pair<std::string, std::string>> pending_kinds;

  auto fail = [&](const std::string& msg) {
    throw MachineError("machine line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    if (key == "states:") {
      have_states = true;
      for (std::size_t i = 1; i < toks.size(); ++i) m.state_names.push_back(toks[i]);
    } else if (key == "init:" || key == "accept:" || key == "reject:" || key == "read_state:") {
      if (toks.size() != 2) fail("expected one state name");
      int id = m.find_state(toks[1]);
      if (id < 0) fail("unknown state '" + toks[1] + "'");
      if (key == "init:") { m.init_state = id; have_init = true; }
      else if (key == "accept:") { m.accept_state = id; have_accept = true; }
      else if (key == "reject:") { m.reject_state = id; have_reject = true; }
      else m.read_state = id;
    } else if (key == "tapes:") {
      if (toks.size() != 2) fail("expected tape count");
      m.tapes = std::stoi(toks[1]);
      if (m.tapes < 1) fail("tapes must be >= 1");
      have_tapes = true;
    } else if (key == "kind") {
      if (toks.size() != 3) fail("expected 'kind STATE universal|existential'");
      pending_kinds.emplace_back(toks[1], toks[2]);
    } else if (key == "trans") {
      // trans STATE reads -> STATE writes moves [branch B]
      if (toks.size() < 6 || toks[3] != "->") fail("expected 'trans STATE reads -> STATE writes moves'");
      PendingTrans t;
      t.from = toks[1];
      t.reads = toks[2];
      t.to = toks[4];
      t.writes = toks[5];
      if (toks.size() < 7) fail("missing moves");
      t.moves = toks[6];
      t.line = lineno;
      if (toks.size() == 9 && toks[7] == "branch") {
        t.branch = std::stoi(toks[8]);
        if (t.branch != 0 && t.branch != 1) fail("branch must be 0 or 1");
      } else if (toks.size() != 7) {
        fail("trailing tokens after transition");
      }
      pending.push_back(std::move(t));
    } else {
      fail("unknown directive '" + key + "'");
    }
  }

  lineno = 0;
  if (!have_states || m.state_names.empty()) throw MachineError("missing states: line");
  {
    std::set<std::string> uniq(m.state_names.begin(), m.state_names.end());
    if (uniq.size() != m.state_names.size()) throw MachineError("duplicate state names");
  }
  if (!have_init || !have_accept || !have_reject) throw MachineError("missing init/accept/reject");
  if (!have_tapes) throw MachineError("missing tapes: line");
  if (m.accept_state == m.reject_state) throw MachineError("accept and reject must differ");

  m.kinds.assign(m.state_names.size(), StateKind::Deterministic);
  for (const auto& [st, kind] : pending_kinds) {
    int id = m.find_state(st);
    if (id < 0) throw MachineError("kind for unknown state '" + st + "'");
    if (kind == "universal") m.kinds[id] = StateKind::Universal;
    else if (kind == "existential") m.kinds[id] = StateKind::Existential;
    else throw MachineError("kind must be universal or existential");
    m.alternating = true;
  }
  if (m.read_state >= 0 && m.kinds[m.read_state] != StateKind::Deterministic)
    throw MachineError("the read state must be deterministic");

  int symbols = m.tapes + 1;
  auto expand = [&](const std::string& pattern) {
    auto parts = split_commas(pattern);
    if (static_cast<int>(parts.size()) != symbols)
      throw MachineError("expected " + std::to_string(symbols) + " symbols in '" + pattern + "'");
    std::vector<std::string> combos{""};
    for (const auto& p : parts) {
      if (p != "0" && p != "1" && p != "*")
        throw MachineError("symbols must be 0, 1 or * in '" + pattern + "'");
      std::vector<std::string> next;
      for (const auto& c : combos) {
        if (p == "*") {
          next.push_back(c + "0");
          next.push_back(c + "1");
        } else {
          next.push_back(c + p);
        }
      }
      combos = std::move(next);
    }
    return combos;
  };

  for (const auto& t : pending) {
    int from = m.find_state(t.from);
    int to = m.find_state(t.to);
    if (from < 0) throw MachineError("transition from unknown state '" + t.from + "'");
    if (to < 0) throw MachineError("transition to unknown state '" + t.to + "'");
    if (m.is_halting(from)) throw MachineError("transition from halting state '" + t.from + "'");
    if (t.branch == 1 && m.kinds[from] == StateKind::Deterministic)
      throw MachineError("branch 1 on deterministic state '" + t.from + "'");

    TransitionTarget target;
    target.next_state = to;
    auto writes = split_commas(t.writes);
    if (static_cast<int>(writes.size()) != symbols)
      throw MachineError("expected " + std::to_string(symbols) + " write symbols");
    for (const auto& w : writes) {
      if (w != "0" && w != "1") throw MachineError("write symbols must be 0 or 1");
      target.writes += w;
    }
    auto moves = split_commas(t.moves);
    if (static_cast<int>(moves.size()) != symbols)
      throw MachineError("expected " + std::to_string(symbols) + " moves");
    for (const auto& mv : moves) {
      if (mv.size() != 1) throw MachineError("moves must be L, R or S");
      target.moves.push_back(move_of(mv[0]));
    }

    for (const auto& reads : expand(t.reads)) {
      auto& slot = m.trans[{from, reads}];
      if (slot.branch[t.branch])
        throw MachineError("duplicate transition for state '" + t.from + "' on " + reads);
      slot.branch[t.branch] = target;
    }
  }

  // Totality on non-halting states.
  for (int q = 0; q < m.state_count(); ++q) {
    if (m.is_halting(q)) continue;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << symbols); ++v) {
      std::string reads;
      for (int j = 0; j < symbols; ++j)
        reads += ((v >> j) & 1) ? '1' : '0';
      auto it = m.trans.find({q, reads});
      if (it == m.trans.end() || !it->second.branch[0])
        throw MachineError("state '" + m.state_names[q] + "' has no transition on " + reads);
      bool nondet = m.kinds[q] != StateKind::Deterministic;
      if (nondet && !it->second.branch[1])
        throw MachineError("nondeterministic state '" + m.state_names[q] +
                           "' needs branch 1 on " + reads);
      if (!nondet && it->second.branch[1])
        throw MachineError("deterministic state '" + m.state_names[q] + "' has a branch 1");
    }
  }
  return m;
}

std::string serialize_machine(const Machine& m) {
  std::ostringstream os;
  os << "states:";
  for (const auto& s : m.state_names) os << " " << s;
  os << "\n";
  os << "init: " << m.state_names[m.init_state] << "\n";
  os << "accept: " << m.state_names[m.accept_state] << "\n";
  os << "reject: " << m.state_names[m.reject_state] << "\n";
  if (m.read_state >= 0) os << "read_state: " << m.state_names[m.read_state] << "\n";
  os << "tapes: " << m.tapes << "\n";
  for (int q = 0; q < m.state_count(); ++q) {
    if (m.kinds[q] == StateKind::Universal) os << "kind " << m.state_names[q] << " universal\n";
    if (m.kinds[q] == StateKind::Existential)
      os << "kind " << m.state_names[q] << " existential\n";
  }
  for (const auto& [key, tr] : m.trans) {
    for (int b = 0; b < 2; ++b) {
      if (!tr.branch[b]) continue;
      const auto& t = *tr.branch[b];
      os << "trans " << m.state_names[key.first] << " ";
      for (std::size_t j = 0; j < key.second.size(); ++j) {
        if (j) os << ",";
        os << key.second[j];
      }
      os << " -> " << m.state_names[t.next_state] << " ";
      for (std::size_t j = 0; j < t.writes.size(); ++j) {
        if (j) os << ",";
        os << t.writes[j];
      }
      os << " ";
      for (std::size_t j = 0; j < t.moves.size(); ++j) {
        if (j) os << ",";
        os << move_char(t.moves[j]);
      }
      if (m.kinds[key.first] != StateKind::Deterministic) os << " branch " << b;
      os << "\n";
    }
  }
  return os.str();
}

Configuration initial_configuration(const Machine& m, std::size_t n) {
  Configuration c;
  c.state = m.init_state;
  std::size_t len = pointer_budget(n);
  c.tape.assign(static_cast<std::size_t>(m.tapes) + 1, std::string(len, '0'));
  c.head.assign(static_cast<std::size_t>(m.tapes) + 1, 0);
  c.tape[0][0] = '1';  // pointer = encode(1), least-significant bit at cell 0
  return c;
}

std::uint64_t pointer_value(const Configuration& c) {
  std::uint64_t v = 0;
  const std::string& t = c.tape[0];
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] == '1') {
      if (j > 62) return kDecodeSaturation;
      v |= (std::uint64_t{1} << j);
    }
  }
  return v;
}

Configuration step(const Machine& m, const Configuration& c, const ComputationInput& input,
                   int branch) {
  if (m.is_halting(c.state)) throw MachineError("step on a halting configuration");
  Configuration next = c;

  if (c.state == m.read_state) {
    std::uint64_t i = pointer_value(c);
    if (i >= 1 && i <= input.n()) {
      next.tape[1][next.head[1]] = input.word.symbol_at(static_cast<std::size_t>(i - 1));
    } else {
      next.tape[1][next.head[1]] = '0';
      next.tape[static_cast<std::size_t>(m.tapes)][0] = '1';
    }
  }

  std::string reads;
  for (std::size_t j = 0; j < next.tape.size(); ++j) reads += next.tape[j][next.head[j]];
  auto it = m.trans.find({c.state, reads});
  if (it == m.trans.end()) throw MachineError("undefined transition");
  int b = m.kinds[c.state] == StateKind::Deterministic ? 0 : branch;
  if (!it->second.branch[b]) throw MachineError("undefined transition branch");
  const TransitionTarget& t = *it->second.branch[b];

  next.state = t.next_state;
  for (std::size_t j = 0; j < next.tape.size(); ++j) {
    next.tape[j][next.head[j]] = t.writes[j];
    switch (t.moves[j]) {
      case Move::L:
        if (next.head[j] > 0) --next.head[j];
        break;
      case Move::R:
        if (next.head[j] + 1 >= next.tape[j].size())
          throw MachineError("space budget exceeded on tape " + std::to_string(j));
        ++next.head[j];
        break;
      case Move::S: break;
    }
  }
  return next;
}

Word config_output(const Configuration& c) {
  return Word::from_bits(c.tape[1].substr(0, c.head[1] + 1));
}

RunResult run(const Machine& m, const ComputationInput& input, std::uint64_t max_steps) {
  Configuration c = initial_configuration(m, input.n());
  RunResult r;
  r.max_space = c.tape.size() * c.tape[0].size();
  while (r.steps < max_steps && !m.is_halting(c.state)) {
    if (m.kinds[c.state] != StateKind::Deterministic)
      throw MachineError("nondeterministic state in a deterministic run");
    c = step(m, c, input);
    ++r.steps;
  }
  r.status = c.state == m.accept_state  ? HaltStatus::Accept
             : c.state == m.reject_state ? HaltStatus::Reject
                                         : HaltStatus::OutOfFuel;
  r.output = config_output(c);
  r.final_config = c;
  return r;
}

bool run_alternating_from(const Machine& m, const Configuration& c,
                          const ComputationInput& input, std::uint64_t depth) {
  if (c.state == m.accept_state) return true;
  if (c.state == m.reject_state) return false;
  if (depth == 0) return false;
  switch (m.kinds[c.state]) {
    case StateKind::Deterministic:
      return run_alternating_from(m, step(m, c, input, 0), input, depth - 1);
    case StateKind::Universal:
      return run_alternating_from(m, step(m, c, input, 0), input, depth - 1) &&
             run_alternating_from(m, step(m, c, input, 1), input, depth - 1);
    case StateKind::Existential:
      return run_alternating_from(m, step(m, c, input, 0), input, depth - 1) ||
             run_alternating_from(m, step(m, c, input, 1), input, depth - 1);
  }
  return false;
}

bool run_alternating(const Machine& m, const ComputationInput& input, std::uint64_t depth) {
  return run_alternating_from(m, initial_configuration(m, input.n()), input, depth);
}

}  // namespace tropic
