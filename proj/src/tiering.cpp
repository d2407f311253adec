#include "tropic/tiering.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace tropic {

TierSignature basic_signature(const BasicFn& fn, long long offset_len) {
  TierSignature sig;
  switch (fn.kind) {
    case BasicKind::Hd:
      sig.args = {Tropic::neg_inf()};
      sig.raw_constant = Tropic::of(1);
      break;
    case BasicKind::Tl:
      sig.args = {Tropic::of(-1)};
      sig.raw_constant = Tropic::of(0);
      break;
    case BasicKind::S0:
    case BasicKind::S1:
      sig.args = {Tropic::of(1)};
      sig.raw_constant = Tropic::neg_inf();
      break;
    case BasicKind::Succ:
      sig.args = {Tropic::of(1)};
      sig.raw_constant = Tropic::of(1);
      break;
    case BasicKind::Proj:
      sig.args.assign(static_cast<std::size_t>(fn.proj_arity), Tropic::neg_inf());
      sig.args[static_cast<std::size_t>(fn.proj_index - 1)] = Tropic::of(0);
      sig.raw_constant = Tropic::neg_inf();
      break;
    case BasicKind::Read:
      sig.args = {Tropic::neg_inf()};
      sig.raw_constant = Tropic::of(1);
      break;
    case BasicKind::Offset:
      sig.raw_constant = Tropic::of(offset_len);
      break;
    case BasicKind::Eps:
      sig.raw_constant = Tropic::of(0);
      break;
  }
  return sig;
}

namespace {

struct MissingDep {
  std::string name;
};

// A tropical linear form over the enclosing definition's parameter lengths.
using Poly = TierSignature;

Poly param_poly(int arity, int p) {
  Poly poly;
  poly.args.assign(static_cast<std::size_t>(arity), Tropic::neg_inf());
  poly.args[static_cast<std::size_t>(p)] = Tropic::of(0);
  poly.raw_constant = Tropic::neg_inf();
  return poly;
}

Poly compose_poly(const TierSignature& base, const std::vector<Poly>& args, int arity) {
  Poly out;
  out.args.assign(static_cast<std::size_t>(arity), Tropic::neg_inf());
  out.raw_constant = base.raw_constant;
  for (std::size_t i = 0; i < base.args.size(); ++i) {
    for (int t = 0; t < arity; ++t) {
      out.args[t] = trop_max(out.args[t],
                             trop_add(base.args[i], args[i].args[static_cast<std::size_t>(t)]));
    }
    out.raw_constant =
        trop_max(out.raw_constant, trop_add(base.args[i], args[i].raw_constant));
  }
  return out;
}

struct Inferencer {
  const Program& prog;
  const TierEnv& env;

  TierSignature sig_of_ref(const FuncRef& fn) const {
    if (fn.is_basic) return basic_signature(fn.basic, env.offset_len);
    const TierSignature* s = env.find(fn.name);
    if (!s) throw MissingDep{fn.name};
    return *s;
  }

  TierSignature sig_of_name(const std::string& name) const {
    if (auto b = basic_by_name(name)) return basic_signature(*b, env.offset_len);
    const TierSignature* s = env.find(name);
    if (!s) throw MissingDep{name};
    return *s;
  }

  TierSignature infer_compose(const FunctionDef& def, const ComposeBody& b) const {
    std::vector<Poly> inner;
    inner.reserve(b.inner.size());
    auto route_poly = [&](const Route& r) {
      return r.kind == Route::Param ? param_poly(def.arity, r.index) : inner[r.index];
    };
    for (const auto& call : b.inner) {
      std::vector<Poly> argp;
      argp.reserve(call.args.size());
      for (const auto& r : call.args) argp.push_back(route_poly(r));
      inner.push_back(compose_poly(sig_of_ref(call.fn), argp, def.arity));
    }
    std::vector<Poly> outer_argp;
    outer_argp.reserve(b.outer_args.size());
    for (const auto& r : b.outer_args) outer_argp.push_back(route_poly(r));
    return compose_poly(sig_of_ref(b.outer), outer_argp, def.arity);
  }
};

// Positions of one recursion component, recovered from its routing vector.
struct CompView {
  TierSignature sig;
  Tropic peeled = Tropic::neg_inf();          // tropic at the r̄ position
  Tropic rec_max = Tropic::neg_inf();         // max over recursive-result slots
  std::vector<Tropic> at_param;               // per flat f-parameter, max over positions
  bool all_params_neg_inf = true;             // every FParam position is −∞
  Tropic param_finite_witness = Tropic::neg_inf();
  int param_witness_pos = 0;

  CompView(const TierSignature& s, const std::vector<CompArg>& routing, int f_arity)
      : sig(s) {
    at_param.assign(static_cast<std::size_t>(f_arity), Tropic::neg_inf());
    for (std::size_t i = 0; i < routing.size(); ++i) {
      Tropic t = i < s.args.size() ? s.args[i] : Tropic::neg_inf();
      switch (routing[i].kind) {
        case CompArg::PeeledRec: peeled = trop_max(peeled, t); break;
        case CompArg::RecResult:
        case CompArg::SubstResult1:
        case CompArg::SubstResult2: rec_max = trop_max(rec_max, t); break;
        case CompArg::FParam: {
          auto p = static_cast<std::size_t>(routing[i].index);
          at_param[p] = trop_max(at_param[p], t);
          if (t.finite) {
            all_params_neg_inf = false;
            param_finite_witness = t;
            param_witness_pos = static_cast<int>(i) + 1;
          }
          break;
        }
      }
    }
  }
};

std::string fmt_cond(const std::string& lhs, Tropic got, const std::string& bound) {
  return lhs + " = " + to_string(got) + " > " + bound;
}

struct BlockInfer {
  const Program& prog;
  const TierEnv& env;
  const std::vector<int>& members;
  Inferencer inf;

  BlockInfer(const Program& p, const TierEnv& e, const std::vector<int>& m)
      : prog(p), env(e), members(m), inf{p, e} {}

  std::vector<TierVerdict> run() {
    const FunctionDef& d0 = prog.defs[members.front()];
    if (std::holds_alternative<RecNotBody>(d0.body)) return infer_rec_not();
    if (std::holds_alternative<RecValBody>(d0.body)) return infer_rec_val();
    return infer_subst();
  }

  std::vector<TierVerdict> all(Untierable u) {
    return std::vector<TierVerdict>(members.size(), TierVerdict{std::move(u)});
  }

  std::vector<TierVerdict> infer_rec_not() {
    const FunctionDef& d0 = prog.defs[members.front()];
    std::vector<CompView> g0s, g1s, hs;
    for (int id : members) {
      const auto& b = std::get<RecNotBody>(prog.defs[id].body);
      hs.emplace_back(inf.sig_of_name(b.h), b.h_args, d0.arity);
      g0s.emplace_back(inf.sig_of_name(b.g0), b.g_args, d0.arity);
      g1s.emplace_back(inf.sig_of_name(b.g1), b.g_args, d0.arity);
    }

    // Case 1: every recursive-result slot carries tropic <= 0.
    std::string case1_fail;
    for (std::size_t i = 0; i < members.size() && case1_fail.empty(); ++i) {
      if (!trop_le_int(g0s[i].rec_max, 0))
        case1_fail = fmt_cond("case 1 requires T_2(g0) <= 0: T_2(g0)", g0s[i].rec_max, "0");
      else if (!trop_le_int(g1s[i].rec_max, 0))
        case1_fail = fmt_cond("case 1 requires T_2(g1) <= 0: T_2(g1)", g1s[i].rec_max, "0");
    }
    if (case1_fail.empty()) {
      std::vector<TierVerdict> out;
      for (std::size_t i = 0; i < members.size(); ++i) {
        TierSignature sig;
        sig.args.assign(static_cast<std::size_t>(d0.arity), Tropic::neg_inf());
        Tropic recs = trop_max(g0s[i].rec_max, g1s[i].rec_max);
        sig.args[d0.rec_pos] =
            trop_max(trop_max(g0s[i].peeled, g1s[i].peeled), recs);
        for (int p = 0; p < d0.arity; ++p) {
          if (p == d0.rec_pos) continue;
          Tropic t = trop_max(g0s[i].at_param[p], g1s[i].at_param[p]);
          t = trop_max(t, hs[i].at_param[p]);
          t = trop_max(t, recs);
          sig.args[static_cast<std::size_t>(p)] = t;
        }
        sig.raw_constant = trop_max(hs[i].sig.raw_constant,
                                    trop_max(g0s[i].sig.raw_constant, g1s[i].sig.raw_constant));
        out.emplace_back(sig);
      }
      return out;
    }

    // Case 2 (linear scanning).
    std::string case2_fail;
    for (std::size_t i = 0; i < members.size() && case2_fail.empty(); ++i) {
      for (const CompView* g : {&g0s[i], &g1s[i]}) {
        const char* gn = (g == &g0s[i]) ? "g0" : "g1";
        if (!trop_le_int(g->rec_max, 1)) {
          case2_fail = fmt_cond(std::string("case 2 requires T_2(") + gn + ") <= 1: T_2(" + gn + ")",
                                g->rec_max, "1");
          break;
        }
        if (!trop_le_int(g->peeled, 0)) {
          case2_fail = fmt_cond(std::string("case 2 requires T_1(") + gn + ") <= 0: T_1(" + gn + ")",
                                g->peeled, "0");
          break;
        }
        if (!g->all_params_neg_inf) {
          case2_fail = std::string("case 2 requires T_t(") + gn + ") = -inf for t >= 3: found " +
                       to_string(g->param_finite_witness) + " at position " +
                       std::to_string(g->param_witness_pos);
          break;
        }
      }
      if (case2_fail.empty() && !hs[i].all_params_neg_inf) {
        case2_fail = "case 2 requires T_t(h) = -inf for all t: found " +
                     to_string(hs[i].param_finite_witness) + " at position " +
                     std::to_string(hs[i].param_witness_pos);
      }
    }
    if (!case2_fail.empty()) {
      return all(Untierable{"recursion on notations", case1_fail + "; " + case2_fail, "",
                            d0.rec_pos + 1});
    }
    std::vector<TierVerdict> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
      TierSignature sig;
      sig.args.assign(static_cast<std::size_t>(d0.arity), Tropic::neg_inf());
      Tropic t = trop_max(g0s[i].peeled, g1s[i].peeled);
      t = trop_max(t, trop_add(trop_max(g0s[i].rec_max, g1s[i].rec_max), Tropic::of(-1)));
      t = trop_max(t, hs[i].sig.raw_constant);
      sig.args[d0.rec_pos] = t;
      sig.raw_constant = trop_max(hs[i].sig.raw_constant,
                                  trop_max(g0s[i].sig.raw_constant, g1s[i].sig.raw_constant));
      out.emplace_back(sig);
    }
    return out;
  }

  std::vector<TierVerdict> infer_rec_val() {
    const FunctionDef& d0 = prog.defs[members.front()];
    std::vector<CompView> gs, hs;
    for (int id : members) {
      const auto& b = std::get<RecValBody>(prog.defs[id].body);
      hs.emplace_back(inf.sig_of_name(b.h), b.h_args, d0.arity);
      gs.emplace_back(inf.sig_of_name(b.g), b.g_args, d0.arity);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (!trop_le_int(gs[i].rec_max, 0)) {
        return all(Untierable{"recursion on values",
                              fmt_cond("the only case requires T_2(g) <= 0: T_2(g)",
                                       gs[i].rec_max, "0"),
                              "linear scanning is not available on values", d0.rec_pos + 1});
      }
    }
    std::vector<TierVerdict> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
      TierSignature sig;
      sig.args.assign(static_cast<std::size_t>(d0.arity), Tropic::neg_inf());
      sig.args[d0.rec_pos] = trop_max(gs[i].peeled, gs[i].rec_max);
      for (int p = 0; p < d0.arity; ++p) {
        if (p == d0.rec_pos) continue;
        Tropic t = trop_max(gs[i].at_param[p], hs[i].at_param[p]);
        t = trop_max(t, gs[i].rec_max);
        sig.args[static_cast<std::size_t>(p)] = t;
      }
      sig.raw_constant = trop_max(hs[i].sig.raw_constant, gs[i].sig.raw_constant);
      out.emplace_back(sig);
    }
    return out;
  }

  std::vector<TierVerdict> infer_subst() {
    const FunctionDef& d0 = prog.defs[members.front()];
    bool on_values = std::holds_alternative<RecValSubstBody>(d0.body);
    const char* scheme =
        on_values ? "recursion with substitutions on values" : "recursion with substitutions on notations";
    std::vector<CompView> g0s, g1s, hs;
    std::vector<TierSignature> k_sigs;
    std::vector<std::string> k_names;
    for (int id : members) {
      const FunctionDef& d = prog.defs[id];
      if (on_values) {
        const auto& b = std::get<RecValSubstBody>(d.body);
        hs.emplace_back(inf.sig_of_name(b.h), b.h_args, d0.arity);
        g0s.emplace_back(inf.sig_of_name(b.g), b.g_args, d0.arity);
        g1s.emplace_back(inf.sig_of_name(b.g), b.g_args, d0.arity);
        for (const auto& k : b.k1) { k_sigs.push_back(inf.sig_of_name(k)); k_names.push_back(k); }
        for (const auto& k : b.k2) { k_sigs.push_back(inf.sig_of_name(k)); k_names.push_back(k); }
      } else {
        const auto& b = std::get<RecNotSubstBody>(d.body);
        hs.emplace_back(inf.sig_of_name(b.h), b.h_args, d0.arity);
        g0s.emplace_back(inf.sig_of_name(b.g0), b.g_args, d0.arity);
        g1s.emplace_back(inf.sig_of_name(b.g1), b.g_args, d0.arity);
        for (const auto& k : b.k1) { k_sigs.push_back(inf.sig_of_name(k)); k_names.push_back(k); }
        for (const auto& k : b.k2) { k_sigs.push_back(inf.sig_of_name(k)); k_names.push_back(k); }
      }
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      Tropic recs = trop_max(g0s[i].rec_max, g1s[i].rec_max);
      if (!trop_le_int(recs, 0)) {
        return all(Untierable{scheme,
                              fmt_cond("requires T(g) <= 0 at every recursive-result slot: got",
                                       recs, "0"),
                              "", d0.rec_pos + 1});
      }
    }
    for (std::size_t j = 0; j < k_sigs.size(); ++j) {
      for (std::size_t t = 0; t < k_sigs[j].args.size(); ++t) {
        if (!trop_le_int(k_sigs[j].args[t], 0)) {
          return all(Untierable{scheme,
                                fmt_cond("requires T_" + std::to_string(t + 1) + "(" +
                                             k_names[j] + ") <= 0: got",
                                         k_sigs[j].args[t], "0"),
                                "substituted arguments must not grow",
                                static_cast<int>(t + 1)});
        }
      }
    }

    int wu = d0.subst_width;
    std::vector<TierVerdict> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
      Tropic recs = trop_max(g0s[i].rec_max, g1s[i].rec_max);
      TierSignature sig;
      sig.args.assign(static_cast<std::size_t>(d0.arity), Tropic::neg_inf());
      sig.args[d0.rec_pos] = trop_max(trop_max(g0s[i].peeled, g1s[i].peeled), recs);

      Tropic u = Tropic::neg_inf();
      for (int p = d0.rec_pos + 1; p <= d0.rec_pos + wu; ++p) {
        u = trop_max(u, trop_max(g0s[i].at_param[p], g1s[i].at_param[p]));
        u = trop_max(u, hs[i].at_param[p]);
      }
      u = trop_max(u, recs);
      for (int p = d0.rec_pos + 1; p <= d0.rec_pos + wu; ++p)
        sig.args[static_cast<std::size_t>(p)] = u;

      for (int p = 0; p < d0.arity; ++p) {
        if (p == d0.rec_pos || (p > d0.rec_pos && p <= d0.rec_pos + wu)) continue;
        Tropic t = trop_max(g0s[i].at_param[p], g1s[i].at_param[p]);
        t = trop_max(t, hs[i].at_param[p]);
        t = trop_max(t, recs);
        sig.args[static_cast<std::size_t>(p)] = t;
      }
      Tropic c = trop_max(hs[i].sig.raw_constant,
                          trop_max(g0s[i].sig.raw_constant, g1s[i].sig.raw_constant));
      for (const auto& ks : k_sigs) {
        c = trop_max(c, ks.raw_constant);
        if (u.finite && u.v > 0) c = trop_max(c, trop_add(u, ks.raw_constant));
      }
      sig.raw_constant = c;
      out.emplace_back(sig);
    }
    return out;
  }
};

}  // namespace

std::vector<TierVerdict> infer_block(const Program& prog, const std::vector<int>& members,
                                     const TierEnv& env) {
  try {
    return BlockInfer(prog, env, members).run();
  } catch (const MissingDep& m) {
    Untierable u{"dependency", "component '" + m.name + "' has no tier signature", "", 0};
    return std::vector<TierVerdict>(members.size(), TierVerdict{u});
  }
}

TierVerdict infer(const Program& prog, const FunctionDef& def, const TierEnv& env) {
  try {
    if (const auto* b = std::get_if<BasicBody>(&def.body))
      return basic_signature(b->fn, env.offset_len);
    if (const auto* b = std::get_if<ComposeBody>(&def.body))
      return Inferencer{prog, env}.infer_compose(def, *b);
    if (is_minimize_body(def.body)) {
      return Untierable{"minimization", "minimization does not admit tropical tiering",
                        "the recursive closure is deliberately untiered", 0};
    }
  } catch (const MissingDep& m) {
    return Untierable{"dependency", "component '" + m.name + "' has no tier signature", "", 0};
  }
  // Recursion schemes: infer jointly over the whole block.
  std::vector<int> single{prog.find(def.name)};
  const std::vector<int>& members =
      def.block_id >= 0 ? prog.blocks[def.block_id].members : single;
  return infer_block(prog, members, env)[def.member_index];
}

bool ProgramTiers::all_tiered() const {
  for (const auto& [name, v] : verdicts) {
    if (std::holds_alternative<Untierable>(v)) return false;
  }
  return true;
}

ProgramTiers infer_program(const Program& prog, long long offset_len) {
  ProgramTiers out;
  out.env.offset_len = offset_len;
  std::vector<bool> done(prog.defs.size(), false);
  for (std::size_t i = 0; i < prog.defs.size(); ++i) {
    if (done[i]) continue;
    const FunctionDef& d = prog.defs[i];
    if (d.block_id >= 0) {
      const auto& members = prog.blocks[d.block_id].members;
      auto verdicts = infer_block(prog, members, out.env);
      for (std::size_t mi = 0; mi < members.size(); ++mi) {
        const auto& md = prog.defs[members[mi]];
        done[static_cast<std::size_t>(members[mi])] = true;
        out.verdicts.emplace_back(md.name, verdicts[mi]);
        if (auto* sig = std::get_if<TierSignature>(&verdicts[mi]))
          out.env.sigs[md.name] = *sig;
      }
    } else {
      TierVerdict v = infer(prog, d, out.env);
      done[i] = true;
      out.verdicts.emplace_back(d.name, v);
      if (auto* sig = std::get_if<TierSignature>(&v)) out.env.sigs[d.name] = *sig;
    }
  }
  return out;
}

long long bound_of(const TierSignature& sig, const std::vector<long long>& arg_lengths) {
  long long best = 0;
  if (sig.raw_constant.finite && sig.raw_constant.v > best) best = sig.raw_constant.v;
  for (std::size_t i = 0; i < sig.args.size() && i < arg_lengths.size(); ++i) {
    if (!sig.args[i].finite) continue;
    long long v = sig.args[i].v + arg_lengths[i];
    if (v > best) best = v;
  }
  return best;
}

BoundReport verify_bound(const Program& prog, const std::string& fname,
                         const ComputationInput& input, int max_arg_len,
                         std::uint64_t fuel, const TierEnv& env,
                         const TierSignature* override_sig, std::uint64_t max_tuples) {
  const TierSignature* sig = override_sig;
  TierSignature basic_sig;
  int arity = -1;
  if (int id = prog.find(fname); id >= 0) {
    arity = prog.defs[static_cast<std::size_t>(id)].arity;
    if (!sig) sig = env.find(fname);
  } else if (auto b = basic_by_name(fname)) {
    arity = b->arity();
    if (!sig) {
      basic_sig = basic_signature(*b, env.offset_len);
      sig = &basic_sig;
    }
  } else {
    throw std::invalid_argument("unknown function '" + fname + "'");
  }
  if (!sig) throw std::invalid_argument("function '" + fname + "' is not tiered");

  BoundReport report;
  report.requested_max_len = max_arg_len;

  auto words_up_to = [](int len) {
    std::vector<Word> ws;
    ws.emplace_back();
    for (int l = 1; l <= len; ++l) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v) {
        std::string b(static_cast<std::size_t>(l), '0');
        for (int j = 0; j < l; ++j)
          if (v & (std::uint64_t{1} << (l - 1 - j))) b[static_cast<std::size_t>(j)] = '1';
        ws.push_back(Word::raw(std::move(b)));
      }
    }
    return ws;
  };

  int used = max_arg_len;
  if (arity > 0) {
    auto fits = [&](int len) {
      long double count = 1;
      long double per = static_cast<long double>((std::uint64_t{2} << len) - 1);
      for (int i = 0; i < arity; ++i) count *= per;
      return count <= static_cast<long double>(max_tuples);
    };
    while (used > 0 && !fits(used)) --used;
  }
  report.used_max_len = used;

  std::vector<Word> ws = words_up_to(used);
  std::vector<std::size_t> idx(static_cast<std::size_t>(std::max(arity, 0)), 0);
  bool more = true;
  while (more) {
    std::vector<Word> args;
    std::vector<long long> lens;
    args.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      args.push_back(ws[idx[i]]);
      lens.push_back(static_cast<long long>(ws[idx[i]].size()));
    }
    EvalOutcome out = eval(prog, fname, args, input, fuel);
    ++report.checked;
    if (out.kind == OutcomeKind::Diverged) {
      ++report.diverged;
    } else if (out.kind == OutcomeKind::Error) {
      ++report.guarded;
    } else {
      long long got = static_cast<long long>(out.value.size());
      long long bound = bound_of(*sig, lens);
      if (got > bound) report.violations.push_back({args, got, bound});
    }
    if (idx.empty()) break;
    std::size_t k = idx.size();
    while (k > 0) {
      --k;
      if (++idx[k] < ws.size()) break;
      idx[k] = 0;
      if (k == 0) more = false;
    }
  }
  report.ok = report.violations.empty();
  return report;
}

std::string tier_line(const std::string& name, const TierVerdict& v) {
  if (const auto* sig = std::get_if<TierSignature>(&v)) {
    return name + ": " + to_string(*sig);
  }
  const auto& u = std::get<Untierable>(v);
  std::string s = name + ": UNTIERABLE [" + u.scheme + "] " + u.condition;
  if (!u.detail.empty()) s += " (" + u.detail + ")";
  if (u.witness_arg > 0) s += " at argument " + std::to_string(u.witness_arg);
  return s;
}

std::string violation_line(const std::string& name, const BoundViolation& v) {
  std::ostringstream os;
  os << "VIOLATION " << name << " args=";
  for (std::size_t i = 0; i < v.args.size(); ++i) {
    if (i) os << ",";
    os << (v.args[i].empty() ? "eps" : v.args[i].bits());
  }
  os << " got=" << v.got << " bound=" << v.bound;
  return os.str();
}

}  // namespace tropic
