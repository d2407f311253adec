#include "tropic/eval.hpp"

#include <cstdlib>
#include <map>
#include <stdexcept>

namespace tropic {

namespace {

struct DivergedEx {};
struct GuardEx {
  std::string msg;
};
struct HardEx {
  std::string msg;
};

constexpr int kMaxSubstDepth = 10'000;

}  // namespace

std::size_t default_word_guard() {
  if (const char* env = std::getenv("TROPIC_MAX_WORD_LEN")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{1} << 16;
}

Word eval_basic(const BasicFn& fn, std::span<const Word> args,
                const ComputationInput& input, std::size_t max_word_len) {
  if (static_cast<int>(args.size()) != fn.arity())
    throw std::invalid_argument("basic function arity mismatch for " + basic_name(fn));
  auto guard = [&](Word w) {
    if (w.size() > max_word_len) throw std::length_error("word length guard exceeded");
    return w;
  };
  switch (fn.kind) {
    case BasicKind::Hd: return head(args[0]);
    case BasicKind::Tl: return tail(args[0]);
    case BasicKind::S0: return guard(prepend('0', args[0]));
    case BasicKind::S1: return guard(prepend('1', args[0]));
    case BasicKind::Succ: return guard(numeric_succ(args[0]));
    case BasicKind::Proj: return args[fn.proj_index - 1];
    case BasicKind::Read: {
      std::uint64_t i = decode(args[0]);
      if (i >= 1 && i <= input.n()) return Word::raw(std::string(1, input.word.symbol_at(i - 1)));
      return Word();
    }
    case BasicKind::Offset: return encode(input.n());
    case BasicKind::Eps: return Word();
  }
  throw std::invalid_argument("unknown basic function");
}

namespace {

class Evaluator {
 public:
  Evaluator(const Program& prog, const ComputationInput& input, const EvalOptions& opt)
      : prog_(prog), input_(input), opt_(opt), fuel_(opt.fuel) {}

  EvalMetrics metrics;

  Word apply_name(const std::string& fname, std::vector<Word> args) {
    int id = prog_.find(fname);
    if (id >= 0) return apply_def(id, std::move(args));
    if (auto b = basic_by_name(fname)) return apply_basic(*b, args);
    throw HardEx{"unresolved name '" + fname + "'"};
  }

 private:
  const Program& prog_;
  const ComputationInput& input_;
  const EvalOptions& opt_;
  std::uint64_t fuel_;
  int subst_depth_ = 0;
  std::map<std::pair<int, std::vector<Word>>, std::vector<Word>> block_memo_;

  void tick() {
    if (fuel_ == 0) throw DivergedEx{};
    --fuel_;
    ++metrics.scheme_steps;
  }

  void note(const Word& w) {
    if (w.size() > metrics.max_word_len) metrics.max_word_len = w.size();
    if (w.size() > opt_.max_word_len) throw GuardEx{"word length guard exceeded"};
  }

  Word apply_basic(const BasicFn& fn, std::span<const Word> args) {
    ++metrics.basic_calls;
    Word r;
    try {
      r = eval_basic(fn, args, input_, opt_.max_word_len);
    } catch (const std::length_error&) {
      throw GuardEx{"word length guard exceeded"};
    }
    note(r);
    return r;
  }

  Word apply_ref(const FuncRef& fn, std::vector<Word> args) {
    if (fn.is_basic) return apply_basic(fn.basic, args);
    int id = fn.def_id >= 0 ? fn.def_id : prog_.find(fn.name);
    if (id < 0) throw HardEx{"unresolved name '" + fn.name + "'"};
    return apply_def(id, std::move(args));
  }

  Word apply_def(int id, std::vector<Word> args) {
    const FunctionDef& d = prog_.defs[id];
    if (static_cast<int>(args.size()) != d.arity)
      throw HardEx{"arity mismatch calling '" + d.name + "'"};
    if (!opt_.count_name.empty() && d.name == opt_.count_name) ++metrics.next_applications;

    if (const auto* b = std::get_if<BasicBody>(&d.body)) {
      return apply_basic(b->fn, args);
    }
    if (const auto* b = std::get_if<ComposeBody>(&d.body)) {
      return eval_compose(*b, args);
    }
    if (const auto* b = std::get_if<MinimizeBody>(&d.body)) {
      return eval_minimize(*b, args);
    }
    // Recursion schemes evaluate whole blocks in lockstep.
    std::vector<int> single{id};
    const std::vector<int>& members =
        d.block_id >= 0 ? prog_.blocks[d.block_id].members : single;
    std::vector<Word> tuple = eval_block(members, std::move(args));
    Word r = tuple[d.member_index];
    return r;
  }

  std::vector<Word> routed_outer(const ComposeBody& b, const std::vector<Word>& params,
                                 const std::vector<Word>& inner_vals) {
    std::vector<Word> out;
    out.reserve(b.outer_args.size());
    for (const auto& r : b.outer_args)
      out.push_back(r.kind == Route::Param ? params[r.index] : inner_vals[r.index]);
    return out;
  }

  Word eval_compose(const ComposeBody& b, const std::vector<Word>& params) {
    tick();
    std::vector<Word> inner_vals;
    inner_vals.reserve(b.inner.size());
    for (const auto& call : b.inner) {
      std::vector<Word> cargs;
      cargs.reserve(call.args.size());
      for (const auto& r : call.args)
        cargs.push_back(r.kind == Route::Param ? params[r.index] : inner_vals[r.index]);
      inner_vals.push_back(apply_ref(call.fn, std::move(cargs)));
    }
    return apply_ref(b.outer, routed_outer(b, params, inner_vals));
  }

  Word eval_minimize(const MinimizeBody& b, const std::vector<Word>& params) {
    for (std::uint64_t t = 0;; ++t) {
      tick();
      Word probe = Word::zeros(static_cast<std::size_t>(t));
      note(probe);
      std::vector<Word> hargs;
      hargs.reserve(params.size() + 1);
      hargs.push_back(probe);
      for (const auto& p : params) hargs.push_back(p);
      Word v = apply_def(b.h_id, std::move(hargs));
      if (head(v) == Word::raw("1")) return probe;
    }
  }

  struct BlockShape {
    bool on_values = false;
    bool subst = false;
    const std::vector<CompArg>* h_args = nullptr;
    const std::vector<CompArg>* g_args = nullptr;
    std::vector<int> h_ids;            // per member
    std::vector<int> g0_ids, g1_ids;   // g0==g1 for values
    std::vector<int> k1_ids, k2_ids;   // subst only
  };

  BlockShape block_shape(const std::vector<int>& members) {
    BlockShape s;
    for (int id : members) {
      const FunctionDef& d = prog_.defs[id];
      if (const auto* b = std::get_if<RecNotBody>(&d.body)) {
        s.h_args = &b->h_args;
        s.g_args = &b->g_args;
        s.h_ids.push_back(b->h_id);
        s.g0_ids.push_back(b->g0_id);
        s.g1_ids.push_back(b->g1_id);
      } else if (const auto* b = std::get_if<RecValBody>(&d.body)) {
        s.on_values = true;
        s.h_args = &b->h_args;
        s.g_args = &b->g_args;
        s.h_ids.push_back(b->h_id);
        s.g0_ids.push_back(b->g_id);
        s.g1_ids.push_back(b->g_id);
      } else if (const auto* b = std::get_if<RecNotSubstBody>(&d.body)) {
        s.subst = true;
        s.h_args = &b->h_args;
        s.g_args = &b->g_args;
        s.h_ids.push_back(b->h_id);
        s.g0_ids.push_back(b->g0_id);
        s.g1_ids.push_back(b->g1_id);
        s.k1_ids = b->k1_ids;
        s.k2_ids = b->k2_ids;
      } else if (const auto* b = std::get_if<RecValSubstBody>(&d.body)) {
        s.on_values = true;
        s.subst = true;
        s.h_args = &b->h_args;
        s.g_args = &b->g_args;
        s.h_ids.push_back(b->h_id);
        s.g0_ids.push_back(b->g_id);
        s.g1_ids.push_back(b->g_id);
        s.k1_ids = b->k1_ids;
        s.k2_ids = b->k2_ids;
      } else {
        throw HardEx{"mutual block member is not a recursion definition"};
      }
    }
    return s;
  }

  std::vector<Word> routed_comp(const std::vector<CompArg>& spec,
                                const std::vector<Word>& params, const Word& peeled,
                                const std::vector<Word>* rec, const std::vector<Word>* a1,
                                const std::vector<Word>* a2) {
    std::vector<Word> out;
    out.reserve(spec.size());
    for (const auto& a : spec) {
      switch (a.kind) {
        case CompArg::PeeledRec: out.push_back(peeled); break;
        case CompArg::RecResult: out.push_back((*rec)[a.index]); break;
        case CompArg::SubstResult1: out.push_back((*a1)[a.index]); break;
        case CompArg::SubstResult2: out.push_back((*a2)[a.index]); break;
        case CompArg::FParam: out.push_back(params[a.index]); break;
      }
    }
    return out;
  }

  std::vector<Word> eval_block(const std::vector<int>& members, std::vector<Word> args) {
    const FunctionDef& d0 = prog_.defs[members.front()];
    BlockShape s = block_shape(members);

    if (s.on_values) {
      Word canon = canonical(args[d0.rec_pos]);
      args[d0.rec_pos] = canon;
    }

    auto key = std::make_pair(members.front(), args);
    if (auto it = block_memo_.find(key); it != block_memo_.end()) return it->second;

    std::vector<Word> result =
        s.subst ? eval_block_subst(members, s, args) : eval_block_plain(members, s, args);
    block_memo_.emplace(std::move(key), result);
    return result;
  }

  std::vector<Word> base_tuple(const std::vector<int>& members, const BlockShape& s,
                               const std::vector<Word>& args) {
    tick();
    std::vector<Word> tuple;
    tuple.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      tuple.push_back(
          apply_def(s.h_ids[i], routed_comp(*s.h_args, args, Word(), nullptr, nullptr, nullptr)));
    }
    return tuple;
  }

  // Notation and value recursion unfold iteratively from the base upward.
  std::vector<Word> eval_block_plain(const std::vector<int>& members, const BlockShape& s,
                                     const std::vector<Word>& args) {
    const FunctionDef& d0 = prog_.defs[members.front()];
    const Word x = args[d0.rec_pos];
    std::vector<Word> tuple = base_tuple(members, s, args);

    if (!s.on_values) {
      const std::string& bits = x.bits();
      for (int j = static_cast<int>(bits.size()) - 1; j >= 0; --j) {
        tick();
        Word peeled = Word::raw(bits.substr(static_cast<std::size_t>(j) + 1));
        const auto& gs = bits[static_cast<std::size_t>(j)] == '1' ? s.g1_ids : s.g0_ids;
        std::vector<Word> next;
        next.reserve(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
          next.push_back(
              apply_def(gs[i], routed_comp(*s.g_args, args, peeled, &tuple, nullptr, nullptr)));
        }
        tuple = std::move(next);
      }
    } else {
      Word cur;  // encode(m) while computing f(m+1)
      while (cur != x) {
        tick();
        note(cur);
        std::vector<Word> next;
        next.reserve(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
          next.push_back(
              apply_def(s.g0_ids[i], routed_comp(*s.g_args, args, cur, &tuple, nullptr, nullptr)));
        }
        tuple = std::move(next);
        cur = numeric_succ(cur);
      }
    }
    return tuple;
  }

  std::vector<Word> eval_block_subst(const std::vector<int>& members, const BlockShape& s,
                                     const std::vector<Word>& args) {
    const FunctionDef& d0 = prog_.defs[members.front()];
    const Word& x = args[d0.rec_pos];
    tick();

    bool base = s.on_values ? is_numeric_zero(x) : x.empty();
    if (base) {
      std::vector<Word> tuple;
      tuple.reserve(members.size());
      for (std::size_t i = 0; i < members.size(); ++i) {
        tuple.push_back(apply_def(
            s.h_ids[i], routed_comp(*s.h_args, args, Word(), nullptr, nullptr, nullptr)));
      }
      return tuple;
    }

    if (++subst_depth_ > kMaxSubstDepth) {
      --subst_depth_;
      throw GuardEx{"substitution recursion depth guard exceeded"};
    }

    Word peeled = s.on_values ? numeric_pred_canonical(x) : tail(x);
    bool bit1 = !s.on_values && x.symbol_at(0) == '1';
    const auto& gs = bit1 ? s.g1_ids : s.g0_ids;

    const int wu = d0.subst_width;
    std::vector<Word> us(args.begin() + d0.rec_pos + 1, args.begin() + d0.rec_pos + 1 + wu);

    auto substituted = [&](const std::vector<int>& k_ids) {
      std::vector<Word> nu;
      nu.reserve(static_cast<std::size_t>(wu));
      for (int j = 0; j < wu; ++j) nu.push_back(apply_def(k_ids[j], us));
      std::vector<Word> nargs = args;
      nargs[d0.rec_pos] = peeled;
      for (int j = 0; j < wu; ++j) nargs[d0.rec_pos + 1 + j] = nu[j];
      return nargs;
    };

    std::vector<Word> a1 = eval_block(members, substituted(s.k1_ids));
    std::vector<Word> a2 = eval_block(members, substituted(s.k2_ids));

    std::vector<Word> tuple;
    tuple.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      tuple.push_back(apply_def(gs[i], routed_comp(*s.g_args, args, peeled, nullptr, &a1, &a2)));
    }
    --subst_depth_;
    return tuple;
  }
};

}  // namespace

std::pair<EvalOutcome, EvalMetrics> eval_with_metrics(const Program& prog,
                                                      const std::string& fname,
                                                      std::vector<Word> args,
                                                      const ComputationInput& input,
                                                      const EvalOptions& options) {
  EvalOutcome out;
  Evaluator ev(prog, input, options);
  for (const auto& a : args) {
    if (a.size() > ev.metrics.max_word_len) ev.metrics.max_word_len = a.size();
  }
  if (options.fuel == 0) {
    out.kind = OutcomeKind::Error;
    out.error = "fuel must be positive";
    return {out, ev.metrics};
  }
  try {
    out.value = ev.apply_name(fname, std::move(args));
    out.kind = OutcomeKind::Value;
  } catch (const DivergedEx&) {
    out.kind = OutcomeKind::Diverged;
    out.error = "fuel exhausted";
  } catch (const GuardEx& g) {
    out.kind = OutcomeKind::Error;
    out.error = g.msg;
  } catch (const HardEx& h) {
    out.kind = OutcomeKind::Error;
    out.error = h.msg;
  } catch (const std::invalid_argument& e) {
    out.kind = OutcomeKind::Error;
    out.error = e.what();
  }
  return {out, ev.metrics};
}

EvalOutcome eval(const Program& prog, const std::string& fname, std::vector<Word> args,
                 const ComputationInput& input, std::uint64_t fuel) {
  EvalOptions opt;
  opt.fuel = fuel;
  opt.max_word_len = default_word_guard();
  return eval_with_metrics(prog, fname, std::move(args), input, opt).first;
}

}  // namespace tropic
