#include "tropic/ast.hpp"

#include <cstdio>
#include <sstream>

namespace tropic {

std::optional<BasicFn> basic_by_name(const std::string& name) {
  if (name == "hd") return BasicFn{BasicKind::Hd};
  if (name == "tl") return BasicFn{BasicKind::Tl};
  if (name == "s0") return BasicFn{BasicKind::S0};
  if (name == "s1") return BasicFn{BasicKind::S1};
  if (name == "succ") return BasicFn{BasicKind::Succ};
  if (name == "read") return BasicFn{BasicKind::Read};
  if (name == "offset") return BasicFn{BasicKind::Offset};
  if (name == "eps") return BasicFn{BasicKind::Eps};
  if (name.rfind("pr_", 0) == 0) {
    int i = 0, n = 0;
    if (std::sscanf(name.c_str(), "pr_%d_%d", &i, &n) == 2 && i >= 1 && n >= i) {
      return BasicFn{BasicKind::Proj, i, n};
    }
  }
  return std::nullopt;
}

std::string basic_name(const BasicFn& fn) {
  switch (fn.kind) {
    case BasicKind::Hd: return "hd";
    case BasicKind::Tl: return "tl";
    case BasicKind::S0: return "s0";
    case BasicKind::S1: return "s1";
    case BasicKind::Succ: return "succ";
    case BasicKind::Read: return "read";
    case BasicKind::Offset: return "offset";
    case BasicKind::Eps: return "eps";
    case BasicKind::Proj: {
      std::ostringstream os;
      os << "pr_" << fn.proj_index << "_" << fn.proj_arity;
      return os.str();
    }
  }
  return "?";
}

bool is_recursion_body(const Body& b) {
  return std::holds_alternative<RecNotBody>(b) || std::holds_alternative<RecValBody>(b) ||
         std::holds_alternative<RecNotSubstBody>(b) ||
         std::holds_alternative<RecValSubstBody>(b);
}

bool is_minimize_body(const Body& b) { return std::holds_alternative<MinimizeBody>(b); }

namespace {

bool is_subst_body(const Body& b) {
  return std::holds_alternative<RecNotSubstBody>(b) ||
         std::holds_alternative<RecValSubstBody>(b);
}

std::vector<CompArg> default_h_args(const FunctionDef& def) {
  std::vector<CompArg> out;
  for (int p = 0; p < def.arity; ++p) {
    if (p == def.rec_pos) continue;
    out.push_back({CompArg::FParam, p});
  }
  return out;
}

std::vector<CompArg> default_g_args(const FunctionDef& def, int width, bool subst) {
  std::vector<CompArg> out;
  for (int p = 0; p < def.arity; ++p) {
    if (p == def.rec_pos) {
      out.push_back({CompArg::PeeledRec, 0});
      if (subst) {
        for (int i = 0; i < width; ++i) out.push_back({CompArg::SubstResult1, i});
        for (int i = 0; i < width; ++i) out.push_back({CompArg::SubstResult2, i});
      } else {
        for (int i = 0; i < width; ++i) out.push_back({CompArg::RecResult, i});
      }
      continue;
    }
    out.push_back({CompArg::FParam, p});
  }
  return out;
}

}  // namespace

void fill_default_routing(FunctionDef& def, int block_width) {
  if (auto* b = std::get_if<RecNotBody>(&def.body)) {
    b->h_args = default_h_args(def);
    b->g_args = default_g_args(def, block_width, false);
  } else if (auto* b = std::get_if<RecValBody>(&def.body)) {
    b->h_args = default_h_args(def);
    b->g_args = default_g_args(def, block_width, false);
  } else if (auto* b = std::get_if<RecNotSubstBody>(&def.body)) {
    b->h_args = default_h_args(def);
    b->g_args = default_g_args(def, block_width, true);
  } else if (auto* b = std::get_if<RecValSubstBody>(&def.body)) {
    b->h_args = default_h_args(def);
    b->g_args = default_g_args(def, block_width, true);
  }
}

namespace {

struct Validator {
  Program& prog;
  std::vector<std::string> errors;

  void err(const std::string& d, const std::string& msg) {
    errors.push_back("definition '" + d + "': " + msg);
  }

  // Rank used for the no-forward-reference rule: a block member ranks at the
  // block's first definition.
  int rank(int def_id) const {
    const auto& d = prog.defs[def_id];
    if (d.block_id >= 0) return prog.blocks[d.block_id].members.front();
    return def_id;
  }

  int resolve_name(const FunctionDef& d, int self_id, const std::string& name,
                   int expect_arity) {
    int id = prog.find(name);
    if (id < 0) {
      err(d.name, "unresolved name '" + name + "'");
      return -1;
    }
    if (rank(id) >= rank(self_id)) {
      err(d.name, "reference to '" + name + "' is not to an earlier definition");
      return -1;
    }
    if (expect_arity >= 0 && prog.defs[id].arity != expect_arity) {
      err(d.name, "component '" + name + "' has arity " +
                      std::to_string(prog.defs[id].arity) + ", expected " +
                      std::to_string(expect_arity));
    }
    return id;
  }

  void check_routes(const FunctionDef& d, const std::vector<CompArg>& args, int width,
                    bool subst, const char* what) {
    for (const auto& a : args) {
      switch (a.kind) {
        case CompArg::PeeledRec:
          break;
        case CompArg::RecResult:
          if (subst || a.index < 0 || a.index >= width)
            err(d.name, std::string(what) + ": bad recursive-result index");
          break;
        case CompArg::SubstResult1:
        case CompArg::SubstResult2:
          if (!subst || a.index < 0 || a.index >= width)
            err(d.name, std::string(what) + ": bad substitution-result index");
          break;
        case CompArg::FParam:
          if (a.index < 0 || a.index >= d.arity || a.index == d.rec_pos)
            err(d.name, std::string(what) + ": bad parameter route");
          break;
      }
    }
  }

  void validate_def(int self_id) {
    FunctionDef& d = prog.defs[self_id];
    int width = 1;
    if (d.block_id >= 0) width = static_cast<int>(prog.blocks[d.block_id].members.size());

    if (is_recursion_body(d.body)) {
      if (d.rec_pos < 0 || d.rec_pos >= d.arity) {
        err(d.name, "recursion argument position out of range");
        return;
      }
    } else if (d.block_id >= 0) {
      err(d.name, "mutual block members must be recursion definitions");
      return;
    }

    if (auto* b = std::get_if<BasicBody>(&d.body)) {
      if (d.arity != b->fn.arity()) err(d.name, "basic body arity mismatch");
    } else if (auto* b = std::get_if<ComposeBody>(&d.body)) {
      auto callee_arity = [&](const FuncRef& fn) -> int {
        if (fn.is_basic) return fn.basic.arity();
        int id = resolve_name(d, self_id, fn.name, -1);
        return id < 0 ? -1 : prog.defs[id].arity;
      };
      for (std::size_t i = 0; i < b->inner.size(); ++i) {
        auto& call = b->inner[i];
        if (!call.fn.is_basic) call.fn.def_id = prog.find(call.fn.name);
        int ar = callee_arity(call.fn);
        if (ar >= 0 && static_cast<int>(call.args.size()) != ar)
          err(d.name, "inner call argument count mismatch");
        for (const auto& r : call.args) {
          if (r.kind == Route::Param && (r.index < 0 || r.index >= d.arity))
            err(d.name, "inner route parameter out of range");
          if (r.kind == Route::Inner && (r.index < 0 || r.index >= static_cast<int>(i)))
            err(d.name, "inner route must reference an earlier inner call");
        }
      }
      if (!b->outer.is_basic) b->outer.def_id = prog.find(b->outer.name);
      int ar = callee_arity(b->outer);
      if (ar >= 0 && static_cast<int>(b->outer_args.size()) != ar)
        err(d.name, "outer argument count mismatch");
      for (const auto& r : b->outer_args) {
        if (r.kind == Route::Param && (r.index < 0 || r.index >= d.arity))
          err(d.name, "outer route parameter out of range");
        if (r.kind == Route::Inner && (r.index < 0 || r.index >= static_cast<int>(b->inner.size())))
          err(d.name, "outer route inner index out of range");
      }
    } else if (auto* b = std::get_if<RecNotBody>(&d.body)) {
      b->h_id = resolve_name(d, self_id, b->h, d.arity - 1);
      b->g0_id = resolve_name(d, self_id, b->g0, d.arity + width);
      b->g1_id = resolve_name(d, self_id, b->g1, d.arity + width);
      if (b->h_args.empty() && b->g_args.empty()) fill_default_routing(d, width);
      check_routes(d, b->h_args, width, false, "h routing");
      check_routes(d, b->g_args, width, false, "g routing");
      if (static_cast<int>(b->h_args.size()) != d.arity - 1) err(d.name, "h routing arity");
      if (static_cast<int>(b->g_args.size()) != d.arity + width) err(d.name, "g routing arity");
    } else if (auto* b = std::get_if<RecValBody>(&d.body)) {
      b->h_id = resolve_name(d, self_id, b->h, d.arity - 1);
      b->g_id = resolve_name(d, self_id, b->g, d.arity + width);
      if (b->h_args.empty() && b->g_args.empty()) fill_default_routing(d, width);
      check_routes(d, b->h_args, width, false, "h routing");
      check_routes(d, b->g_args, width, false, "g routing");
      if (static_cast<int>(b->h_args.size()) != d.arity - 1) err(d.name, "h routing arity");
      if (static_cast<int>(b->g_args.size()) != d.arity + width) err(d.name, "g routing arity");
    } else if (is_subst_body(d.body)) {
      auto* bn = std::get_if<RecNotSubstBody>(&d.body);
      auto* bv = std::get_if<RecValSubstBody>(&d.body);
      auto& k1 = bn ? bn->k1 : bv->k1;
      auto& k2 = bn ? bn->k2 : bv->k2;
      if (k1.empty() || k1.size() != k2.size())
        err(d.name, "k1/k2 must be nonempty lists of equal width");
      int wu = static_cast<int>(k1.size());
      if (d.subst_width != wu) err(d.name, "substitution width mismatch");
      if (d.rec_pos + wu >= d.arity + 1 && d.arity - 1 - wu < 0)
        err(d.name, "substituted group exceeds arity");
      if (d.rec_pos + 1 + wu > d.arity)
        err(d.name, "substituted parameters must follow the recursion argument");
      auto resolve_k = [&](std::vector<std::string>& ks, std::vector<int>& ids) {
        ids.clear();
        for (auto& k : ks) ids.push_back(resolve_name(d, self_id, k, wu));
      };
      if (bn) {
        bn->h_id = resolve_name(d, self_id, bn->h, d.arity - 1);
        bn->g0_id = resolve_name(d, self_id, bn->g0, d.arity + 2 * width);
        bn->g1_id = resolve_name(d, self_id, bn->g1, d.arity + 2 * width);
        resolve_k(bn->k1, bn->k1_ids);
        resolve_k(bn->k2, bn->k2_ids);
        if (bn->h_args.empty() && bn->g_args.empty()) fill_default_routing(d, width);
        check_routes(d, bn->h_args, width, true, "h routing");
        check_routes(d, bn->g_args, width, true, "g routing");
        if (static_cast<int>(bn->h_args.size()) != d.arity - 1) err(d.name, "h routing arity");
        if (static_cast<int>(bn->g_args.size()) != d.arity + 2 * width)
          err(d.name, "g routing arity");
      } else {
        bv->h_id = resolve_name(d, self_id, bv->h, d.arity - 1);
        bv->g_id = resolve_name(d, self_id, bv->g, d.arity + 2 * width);
        resolve_k(bv->k1, bv->k1_ids);
        resolve_k(bv->k2, bv->k2_ids);
        if (bv->h_args.empty() && bv->g_args.empty()) fill_default_routing(d, width);
        check_routes(d, bv->h_args, width, true, "h routing");
        check_routes(d, bv->g_args, width, true, "g routing");
        if (static_cast<int>(bv->h_args.size()) != d.arity - 1) err(d.name, "h routing arity");
        if (static_cast<int>(bv->g_args.size()) != d.arity + 2 * width)
          err(d.name, "g routing arity");
      }
    } else if (auto* b = std::get_if<MinimizeBody>(&d.body)) {
      b->h_id = resolve_name(d, self_id, b->h, d.arity + 1);
    }
  }

  void validate_blocks() {
    for (std::size_t bi = 0; bi < prog.blocks.size(); ++bi) {
      const auto& members = prog.blocks[bi].members;
      if (members.empty()) {
        errors.push_back("mutual block " + std::to_string(bi) + " is empty");
        continue;
      }
      const FunctionDef& first = prog.defs[members.front()];
      for (std::size_t mi = 0; mi < members.size(); ++mi) {
        const FunctionDef& d = prog.defs[members[mi]];
        if (d.block_id != static_cast<int>(bi) || d.member_index != static_cast<int>(mi))
          errors.push_back("mutual block bookkeeping broken at '" + d.name + "'");
        if (d.body.index() != first.body.index() || d.arity != first.arity ||
            d.rec_pos != first.rec_pos || d.subst_width != first.subst_width)
          errors.push_back("mutual block members must share the recursion shape ('" +
                           d.name + "')");
      }
    }
  }
};

}  // namespace

std::vector<std::string> Program::resolve_and_validate() {
  index.clear();
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (basic_by_name(defs[i].name)) {
      errors.push_back("definition '" + defs[i].name + "' shadows a basic function");
    }
    if (!index.emplace(defs[i].name, static_cast<int>(i)).second) {
      errors.push_back("duplicate definition name '" + defs[i].name + "'");
    }
  }
  if (!errors.empty()) return errors;

  Validator v{*this};
  v.validate_blocks();
  for (std::size_t i = 0; i < defs.size(); ++i) v.validate_def(static_cast<int>(i));

  if (!entry.empty() && find(entry) < 0 && !basic_by_name(entry)) {
    v.errors.push_back("entry '" + entry + "' does not resolve");
  }
  return v.errors;
}

}  // namespace tropic
