#include "tropic/surface.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <set>
#include <sstream>

#include "tropic/tropics.hpp"

namespace tropic {

std::vector<std::string> SurfaceDef::flat_params() const {
  std::vector<std::string> out;
  for (const auto& g : params) out.insert(out.end(), g.begin(), g.end());
  return out;
}

int SurfaceDef::rec_flat_pos() const { return static_cast<int>(params[0].size()); }

const SurfaceDef* SurfaceProgram::find(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

std::string SurfaceProgram::entry_or_default() const {
  if (!entry.empty()) return entry;
  return defs.empty() ? std::string() : defs.back().name;
}

namespace {

const std::set<std::string> kReserved = {"def",          "mutual",       "entry",
                                         "class",        "rec_not",      "rec_val",
                                         "rec_not_subst", "rec_val_subst", "minimize",
                                         "eps"};

struct Token {
  enum Kind { Name, LParen, RParen, LBrace, RBrace, LBracket, RBracket, Bar, Eq, Comma,
              Prefix0, Prefix1, End } kind = End;
  std::string text;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos < src.size(); ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void skip_ws() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  Token next() {
    skip_ws();
    Token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) return t;
    char c = src[pos];
    // The wreath separator (U+2240) is an alias for '|'.
    if (static_cast<unsigned char>(c) == 0xE2 && pos + 2 < src.size() &&
        static_cast<unsigned char>(src[pos + 1]) == 0x89 &&
        static_cast<unsigned char>(src[pos + 2]) == 0x80) {
      advance(3);
      t.kind = Token::Bar;
      return t;
    }
    auto single = [&](Token::Kind k) {
      advance();
      t.kind = k;
      return t;
    };
    switch (c) {
      case '(': return single(Token::LParen);
      case ')': return single(Token::RParen);
      case '{': return single(Token::LBrace);
      case '}': return single(Token::RBrace);
      case '[': return single(Token::LBracket);
      case ']': return single(Token::RBracket);
      case '|': return single(Token::Bar);
      case '=': return single(Token::Eq);
      case ',': return single(Token::Comma);
      default: break;
    }
    if ((c == '0' || c == '1') && pos + 1 < src.size() && src[pos + 1] == '.') {
      t.kind = c == '0' ? Token::Prefix0 : Token::Prefix1;
      advance(2);
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                                  src[pos] == '_'))
        advance();
      t.kind = Token::Name;
      t.text = src.substr(start, pos - start);
      return t;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
  }
};

struct GroupShape {
  std::array<int, 4> sizes{0, 0, 0, 0};
  bool operator==(const GroupShape&) const = default;
};

std::string shape_str(const GroupShape& s) {
  std::ostringstream os;
  os << "(" << s.sizes[0] << "|" << s.sizes[1] << "|" << s.sizes[2] << "|" << s.sizes[3] << ")";
  return os.str();
}

GroupShape shape_of(const SurfaceDef& d) {
  GroupShape s;
  for (int i = 0; i < 4; ++i) s.sizes[i] = static_cast<int>(d.params[i].size());
  return s;
}

std::optional<GroupShape> basic_shape(const std::string& name) {
  auto b = basic_by_name(name);
  if (!b) return std::nullopt;
  GroupShape s;
  switch (b->kind) {
    case BasicKind::Hd:
    case BasicKind::Read: s.sizes[3] = 1; break;
    case BasicKind::Tl: s.sizes[2] = 1; break;
    case BasicKind::S0:
    case BasicKind::S1:
    case BasicKind::Succ: s.sizes[0] = 1; break;
    case BasicKind::Proj:
      s.sizes[1] = 1;
      s.sizes[3] = b->proj_arity - 1;
      break;
    case BasicKind::Offset:
    case BasicKind::Eps: break;
  }
  return s;
}

struct Parser {
  Lexer lex;
  Token tok;
  SurfaceProgram out;
  std::map<std::string, GroupShape> known;  // defs seen so far

  explicit Parser(const std::string& text) : lex(text) { tok = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, tok.line, tok.col); }

  void eat(Token::Kind k, const char* what) {
    if (tok.kind != k) fail(std::string("expected ") + what);
    tok = lex.next();
  }

  std::string eat_name(const char* what) {
    if (tok.kind != Token::Name) fail(std::string("expected ") + what);
    std::string s = tok.text;
    tok = lex.next();
    return s;
  }

  SurfaceProgram run() {
    while (tok.kind != Token::End) {
      if (tok.kind != Token::Name) fail("expected a declaration");
      if (tok.text == "def") {
        tok = lex.next();
        parse_def(-1);
      } else if (tok.text == "mutual") {
        tok = lex.next();
        eat(Token::LBrace, "'{'");
        int bid = static_cast<int>(out.blocks.size());
        out.blocks.emplace_back();
        while (tok.kind == Token::Name && tok.text == "def") {
          tok = lex.next();
          parse_def(bid);
        }
        eat(Token::RBrace, "'}'");
        if (out.blocks[bid].empty()) fail("empty mutual block");
      } else if (tok.text == "entry") {
        tok = lex.next();
        out.entry = eat_name("entry name");
      } else if (tok.text == "class") {
        tok = lex.next();
        out.declared_class = eat_name("class label");
      } else {
        fail("expected 'def', 'mutual', 'entry' or 'class'");
      }
    }
    if (!out.entry.empty() && !out.find(out.entry) && !basic_by_name(out.entry))
      throw ParseError("entry '" + out.entry + "' is not defined", 1, 1);
    return std::move(out);
  }

  void parse_def(int block_id) {
    SurfaceDef d;
    d.line = tok.line;
    d.block_id = block_id;
    d.name = eat_name("definition name");
    if (kReserved.count(d.name)) fail("'" + d.name + "' is reserved");
    if (basic_by_name(d.name)) fail("'" + d.name + "' names a basic function");
    if (known.count(d.name)) fail("duplicate name '" + d.name + "'");

    eat(Token::LParen, "'('");
    int group = 0;
    std::set<std::string> seen;
    while (tok.kind != Token::RParen) {
      if (tok.kind == Token::Bar) {
        tok = lex.next();
        if (++group > 3) fail("at most four argument groups");
        continue;
      }
      std::string p = eat_name("parameter name");
      if (kReserved.count(p) || basic_by_name(p)) fail("parameter '" + p + "' is reserved");
      if (!seen.insert(p).second) fail("duplicate parameter '" + p + "'");
      d.params[group].push_back(p);
      if (tok.kind == Token::Comma) tok = lex.next();
    }
    eat(Token::RParen, "')'");
    eat(Token::Eq, "'='");

    if (tok.kind == Token::Name &&
        (tok.text == "rec_not" || tok.text == "rec_val" || tok.text == "rec_not_subst" ||
         tok.text == "rec_val_subst" || tok.text == "minimize")) {
      std::string kw = tok.text;
      tok = lex.next();
      d.scheme = kw == "rec_not"         ? SurfaceDef::RecNot
                 : kw == "rec_val"       ? SurfaceDef::RecVal
                 : kw == "rec_not_subst" ? SurfaceDef::RecNotSubst
                 : kw == "rec_val_subst" ? SurfaceDef::RecValSubst
                                         : SurfaceDef::Min;
      parse_rec_header(d);
      if (d.scheme != SurfaceDef::Min && d.params[1].empty())
        fail("a recursion definition needs its recursion argument in the tier-0 group");
    } else {
      d.scheme = SurfaceDef::Expr;
      d.rhs = parse_expr(d);
    }
    known[d.name] = shape_of(d);
    if (block_id >= 0) out.blocks[block_id].push_back(static_cast<int>(out.defs.size()));
    out.defs.push_back(std::move(d));
  }

  void parse_rec_header(SurfaceDef& d) {
    std::set<std::string> given;
    while (tok.kind == Token::Name &&
           (tok.text == "h" || tok.text == "g0" || tok.text == "g1" || tok.text == "g" ||
            tok.text == "k1" || tok.text == "k2")) {
      std::string key = tok.text;
      tok = lex.next();
      eat(Token::Eq, "'='");
      if (!given.insert(key).second) fail("duplicate '" + key + "' in recursion header");
      if (key == "k1" || key == "k2") {
        std::vector<std::string> names;
        if (tok.kind == Token::LBracket) {
          tok = lex.next();
          while (tok.kind != Token::RBracket) {
            names.push_back(eat_name("function name"));
            if (tok.kind == Token::Comma) tok = lex.next();
          }
          eat(Token::RBracket, "']'");
        } else {
          names.push_back(eat_name("function name"));
        }
        if (names.empty()) fail("'" + key + "' needs at least one function");
        (key == "k1" ? d.k1 : d.k2) = std::move(names);
      } else {
        std::string v = eat_name("function name");
        if (key == "h") d.h = v;
        else if (key == "g0") d.g0 = v;
        else if (key == "g1") d.g1 = v;
        else d.g = v;
      }
    }
    auto need = [&](bool cond, const char* what) {
      if (!cond) fail(std::string("recursion header needs ") + what);
    };
    switch (d.scheme) {
      case SurfaceDef::RecNot:
        need(!d.g0.empty() && !d.g1.empty(), "g0 and g1");
        break;
      case SurfaceDef::RecVal:
        need(!d.h.empty() && !d.g.empty(), "h and g");
        break;
      case SurfaceDef::RecNotSubst:
        need(!d.h.empty() && !d.g0.empty() && !d.g1.empty() && !d.k1.empty() && !d.k2.empty(),
             "h, g0, g1, k1 and k2");
        break;
      case SurfaceDef::RecValSubst:
        need(!d.h.empty() && !d.g.empty() && !d.k1.empty() && !d.k2.empty(),
             "h, g, k1 and k2");
        break;
      case SurfaceDef::Min:
        need(!d.h.empty(), "h");
        break;
      default: break;
    }
    if (!d.k1.empty() && d.k1.size() != d.k2.size()) fail("k1 and k2 must have equal width");
    for (const std::string& n : {d.h, d.g0, d.g1, d.g}) {
      if (!n.empty() && !known.count(n) && !basic_by_name(n))
        fail("unknown identifier '" + n + "'");
    }
    for (const auto& ks : {d.k1, d.k2})
      for (const auto& n : ks)
        if (!known.count(n) && !basic_by_name(n)) fail("unknown identifier '" + n + "'");
  }

  SExprPtr parse_expr(const SurfaceDef& d) {
    auto e = std::make_unique<SExpr>();
    e->line = tok.line;
    e->col = tok.col;
    if (tok.kind == Token::Prefix0 || tok.kind == Token::Prefix1) {
      e->kind = tok.kind == Token::Prefix0 ? SExpr::Prefix0 : SExpr::Prefix1;
      tok = lex.next();
      e->child = parse_expr(d);
      return e;
    }
    if (tok.kind != Token::Name) fail("expected an expression");
    std::string name = tok.text;
    tok = lex.next();
    if (name == "eps") {
      e->kind = SExpr::Eps;
      return e;
    }
    if (tok.kind == Token::LParen) {
      tok = lex.next();
      e->kind = SExpr::Call;
      e->name = name;
      auto shape = known.count(name) ? std::optional<GroupShape>(known[name]) : basic_shape(name);
      if (!shape) fail("unknown identifier '" + name + "'");
      int group = 0;
      while (tok.kind != Token::RParen) {
        if (tok.kind == Token::Bar) {
          tok = lex.next();
          if (++group > 3) fail("at most four argument groups");
          continue;
        }
        e->groups[group].push_back(parse_expr(d));
        if (tok.kind == Token::Comma) tok = lex.next();
      }
      eat(Token::RParen, "')'");
      for (int gi = 0; gi < 4; ++gi) {
        if (static_cast<int>(e->groups[gi].size()) != shape->sizes[gi])
          fail("call to '" + name + "' expects argument groups " + shape_str(*shape));
      }
      return e;
    }
    // A bare name must be a parameter of the enclosing definition.
    for (const auto& g : d.params)
      for (const auto& p : g)
        if (p == name) {
          e->kind = SExpr::Var;
          e->name = name;
          return e;
        }
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

SurfaceProgram parse(const std::string& text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Lowering

namespace {

struct DefLowering {
  const SurfaceProgram& sp;
  Program& core;
  std::map<std::string, std::vector<TierSlot>>& slots;

  std::map<std::string, int> flat_index;  // params of the def being lowered
  std::vector<InnerCall> inner;
  std::map<std::string, int> cse;

  const SurfaceDef* surface_def(const std::string& name) const { return sp.find(name); }

  static std::vector<TierSlot> slot_vector(const SurfaceDef& d) {
    std::vector<TierSlot> out;
    for (int g = 0; g < 4; ++g)
      for (std::size_t i = 0; i < d.params[g].size(); ++i)
        out.push_back(static_cast<TierSlot>(g));
    return out;
  }

  // Flatten call arguments in group order; projections are reordered into
  // the basic function's natural argument order.
  std::vector<const SExpr*> call_args_in_callee_order(const SExpr& call) const {
    std::vector<const SExpr*> flat;
    for (int g = 0; g < 4; ++g)
      for (const auto& a : call.groups[g]) flat.push_back(a.get());
    if (auto b = basic_by_name(call.name); b && b->kind == BasicKind::Proj) {
      std::vector<const SExpr*> ordered(flat.size());
      int sel = b->proj_index - 1;
      ordered[sel] = flat[0];
      int src = 1;
      for (int i = 0; i < static_cast<int>(flat.size()); ++i) {
        if (i == sel) continue;
        ordered[i] = flat[src++];
      }
      return ordered;
    }
    return flat;
  }

  std::string route_key(const Route& r) {
    return (r.kind == Route::Param ? "P" : "I") + std::to_string(r.index);
  }

  Route add_inner(FuncRef fn, std::vector<Route> args, const std::string& key) {
    auto it = cse.find(key);
    if (it != cse.end()) return Route{Route::Inner, it->second};
    inner.push_back(InnerCall{std::move(fn), std::move(args)});
    int idx = static_cast<int>(inner.size()) - 1;
    cse[key] = idx;
    return Route{Route::Inner, idx};
  }

  std::pair<Route, std::string> lower_expr(const SExpr& e) {
    switch (e.kind) {
      case SExpr::Var: {
        Route r{Route::Param, flat_index.at(e.name)};
        return {r, route_key(r)};
      }
      case SExpr::Eps: {
        Route r = add_inner(FuncRef::of_basic(BasicFn{BasicKind::Eps}), {}, "eps");
        return {r, route_key(r)};
      }
      case SExpr::Prefix0:
      case SExpr::Prefix1: {
        auto [cr, ck] = lower_expr(*e.child);
        BasicKind k = e.kind == SExpr::Prefix0 ? BasicKind::S0 : BasicKind::S1;
        std::string key = (k == BasicKind::S0 ? "s0(" : "s1(") + ck + ")";
        Route r = add_inner(FuncRef::of_basic(BasicFn{k}), {Route{cr}}, key);
        return {r, route_key(r)};
      }
      case SExpr::Call: {
        std::vector<Route> args;
        std::string key = e.name + "(";
        for (const SExpr* a : call_args_in_callee_order(e)) {
          auto [r, k] = lower_expr(*a);
          args.push_back(r);
          key += k + ",";
        }
        key += ")";
        FuncRef fn = basic_by_name(e.name) ? FuncRef::of_basic(*basic_by_name(e.name))
                                           : FuncRef::of_name(e.name);
        Route r = add_inner(std::move(fn), std::move(args), key);
        return {r, route_key(r)};
      }
    }
    throw std::logic_error("unreachable");
  }

  ComposeBody lower_body(const SExpr& rhs) {
    ComposeBody body;
    // Lower the whole tree, then promote the final inner call to the outer
    // position (or project a bare parameter).
    auto [r, key] = lower_expr(rhs);
    (void)key;
    if (r.kind == Route::Param) {
      body.inner = std::move(inner);
      body.outer = FuncRef::of_basic(BasicFn{BasicKind::Proj, 1, 1});
      body.outer_args = {r};
      return body;
    }
    InnerCall top = std::move(inner[static_cast<std::size_t>(r.index)]);
    // Keep earlier inner calls; the top call becomes the outer application.
    // (It is safe to leave a hole only if nothing references it: the top call
    // is the last one created unless CSE returned an earlier call. In that
    // case keep everything and call through a unit projection.)
    if (r.index == static_cast<int>(inner.size()) - 1) {
      inner.pop_back();
      body.inner = std::move(inner);
      body.outer = top.fn;
      body.outer_args = top.args;
    } else {
      inner[static_cast<std::size_t>(r.index)] = std::move(top);
      body.inner = std::move(inner);
      body.outer = FuncRef::of_basic(BasicFn{BasicKind::Proj, 1, 1});
      body.outer_args = {r};
    }
    return body;
  }
};

// Expected component shapes for a recursion definition.
struct TemplateShapes {
  GroupShape h;
  GroupShape g_case1, g_case2, g_safe;
  bool subst = false;
};

TemplateShapes expected_shapes(const SurfaceDef& f, int width) {
  TemplateShapes t;
  GroupShape fs = shape_of(f);
  t.subst = f.scheme == SurfaceDef::RecNotSubst || f.scheme == SurfaceDef::RecValSubst;
  t.h = fs;
  t.h.sizes[1] -= 1;
  int extra = t.subst ? 2 * width : width;
  t.g_case1 = fs;
  t.g_case1.sizes[1] += extra;
  t.g_case2 = fs;
  t.g_case2.sizes[0] += extra;
  t.g_safe = fs;
  t.g_safe.sizes[3] += extra;
  return t;
}

enum class GShape { Case1, Case2, Safe };

std::optional<GShape> detect_g_shape(const GroupShape& g, const TemplateShapes& t) {
  if (g == t.g_case1) return GShape::Case1;
  if (g == t.g_case2) return GShape::Case2;
  if (g == t.g_safe) return GShape::Safe;
  return std::nullopt;
}

// g argument routing for each of the three shapes, in the component's own
// flat parameter order.
std::vector<CompArg> g_routing(const SurfaceDef& f, GShape shape, int width, bool subst) {
  std::vector<CompArg> out;
  int rec_flat = f.rec_flat_pos();
  auto fparams_of_group = [&](int g, bool skip_rec) {
    int base = 0;
    for (int i = 0; i < g; ++i) base += static_cast<int>(f.params[i].size());
    std::vector<CompArg> v;
    for (int i = 0; i < static_cast<int>(f.params[g].size()); ++i) {
      int flat = base + i;
      if (skip_rec && g == 1 && i == 0) continue;
      v.push_back({CompArg::FParam, flat});
    }
    (void)rec_flat;
    return v;
  };
  auto push_results = [&](std::vector<CompArg>& v) {
    if (subst) {
      for (int i = 0; i < width; ++i) v.push_back({CompArg::SubstResult1, i});
      for (int i = 0; i < width; ++i) v.push_back({CompArg::SubstResult2, i});
    } else {
      for (int i = 0; i < width; ++i) v.push_back({CompArg::RecResult, i});
    }
  };

  std::array<std::vector<CompArg>, 4> groups;
  groups[0] = fparams_of_group(0, false);
  groups[2] = fparams_of_group(2, false);
  groups[3] = fparams_of_group(3, false);
  std::vector<CompArg> g1;
  g1.push_back({CompArg::PeeledRec, 0});
  if (shape == GShape::Case1) push_results(g1);
  auto rest = fparams_of_group(1, true);
  g1.insert(g1.end(), rest.begin(), rest.end());
  groups[1] = std::move(g1);
  if (shape == GShape::Case2) {
    std::vector<CompArg> g0;
    push_results(g0);
    g0.insert(g0.end(), groups[0].begin(), groups[0].end());
    groups[0] = std::move(g0);
  } else if (shape == GShape::Safe) {
    std::vector<CompArg> g3;
    push_results(g3);
    g3.insert(g3.end(), groups[3].begin(), groups[3].end());
    groups[3] = std::move(g3);
  }
  for (auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

std::vector<CompArg> h_routing(const SurfaceDef& f) {
  std::vector<CompArg> out;
  int flat = 0;
  for (int g = 0; g < 4; ++g) {
    for (int i = 0; i < static_cast<int>(f.params[g].size()); ++i, ++flat) {
      if (g == 1 && i == 0) continue;  // the recursion argument
      out.push_back({CompArg::FParam, flat});
    }
  }
  return out;
}

struct LowerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

Lowered lower(const SurfaceProgram& sp) {
  Lowered out;
  out.program.entry = sp.entry_or_default();
  out.program.declared_class = sp.declared_class;
  out.program.blocks.resize(sp.blocks.size());

  auto block_width = [&](const SurfaceDef& d) {
    return d.block_id >= 0 ? static_cast<int>(sp.blocks[d.block_id].size()) : 1;
  };

  // Synthetic constant-ε bases for linear-scanning definitions come first so
  // block members never reference a later definition.
  std::map<std::string, std::string> scan_base;
  for (const SurfaceDef& d : sp.defs) {
    if (d.scheme != SurfaceDef::RecNot || !d.h.empty()) continue;
    std::string h_name = d.name + "_base";
    int suffix = 0;
    while (sp.find(h_name) || out.program.find(h_name) >= 0 || scan_base.count(h_name))
      h_name = d.name + "_base" + std::to_string(++suffix);
    scan_base[d.name] = h_name;
    FunctionDef hb;
    hb.name = h_name;
    hb.arity = d.arity() - 1;
    ComposeBody cb;
    cb.outer = FuncRef::of_basic(BasicFn{BasicKind::Eps});
    hb.body = std::move(cb);
    TemplateShapes shapes = expected_shapes(d, block_width(d));
    auto& hs = out.slots[h_name];
    for (int g = 0; g < 4; ++g)
      for (int i = 0; i < shapes.h.sizes[g]; ++i) hs.push_back(static_cast<TierSlot>(g));
    out.program.index[h_name] = static_cast<int>(out.program.defs.size());
    out.program.defs.push_back(std::move(hb));
  }

  for (std::size_t si = 0; si < sp.defs.size(); ++si) {
    const SurfaceDef& d = sp.defs[si];
    FunctionDef fd;
    fd.name = d.name;
    fd.arity = d.arity();
    out.slots[d.name] = DefLowering::slot_vector(d);

    if (d.scheme == SurfaceDef::Expr) {
      DefLowering dl{sp, out.program, out.slots};
      auto flat = d.flat_params();
      for (std::size_t i = 0; i < flat.size(); ++i)
        dl.flat_index[flat[i]] = static_cast<int>(i);
      fd.body = dl.lower_body(*d.rhs);
    } else if (d.scheme == SurfaceDef::Min) {
      fd.body = MinimizeBody{d.h};
    } else {
      int width = block_width(d);
      bool subst = d.scheme == SurfaceDef::RecNotSubst || d.scheme == SurfaceDef::RecValSubst;
      fd.rec_pos = d.rec_flat_pos();
      fd.subst_width = static_cast<int>(d.k1.size());
      if (subst &&
          static_cast<int>(d.params[1].size()) < 1 + fd.subst_width)
        throw LowerError("definition '" + d.name +
                         "': the substituted parameters must follow the recursion argument in "
                         "the tier-0 group");

      TemplateShapes shapes = expected_shapes(d, width);
      std::string h_name = d.h;
      if (d.scheme == SurfaceDef::RecNot && d.h.empty()) {
        h_name = scan_base.at(d.name);
      } else {
        const SurfaceDef* hd = sp.find(h_name);
        if (!hd) throw LowerError("definition '" + d.name + "': unknown component '" + h_name + "'");
        if (shape_of(*hd) != shapes.h)
          throw LowerError("definition '" + d.name + "': component '" + h_name +
                           "' has groups " + shape_str(shape_of(*hd)) + ", expected " +
                           shape_str(shapes.h));
      }

      auto resolve_g = [&](const std::string& gname) -> GShape {
        const SurfaceDef* gd = sp.find(gname);
        if (!gd) throw LowerError("definition '" + d.name + "': unknown component '" + gname + "'");
        auto gs = detect_g_shape(shape_of(*gd), shapes);
        if (!gs)
          throw LowerError("definition '" + d.name + "': component '" + gname +
                           "' has groups " + shape_str(shape_of(*gd)) +
                           ", matching no recursion shape");
        return *gs;
      };

      GShape gshape;
      if (d.scheme == SurfaceDef::RecNot || d.scheme == SurfaceDef::RecNotSubst) {
        GShape s0 = resolve_g(d.g0);
        GShape s1 = resolve_g(d.g1);
        if (s0 != s1)
          throw LowerError("definition '" + d.name + "': g0 and g1 disagree on the scheme shape");
        gshape = s0;
      } else {
        gshape = resolve_g(d.g);
      }
      if (subst && gshape != GShape::Case1)
        throw LowerError("definition '" + d.name +
                         "': substitutions are only defined for the case-1 shape");
      if (d.scheme == SurfaceDef::RecNot && d.h.empty() && gshape != GShape::Case2)
        throw LowerError("definition '" + d.name +
                         "': a literal-ε base requires the linear-scanning shape");

      auto g_args = g_routing(d, gshape, width, subst);
      auto h_args = h_routing(d);
      if (d.scheme == SurfaceDef::RecNot) {
        fd.body = RecNotBody{h_name, d.g0, d.g1, -1, -1, -1, h_args, g_args};
      } else if (d.scheme == SurfaceDef::RecVal) {
        fd.body = RecValBody{h_name, d.g, -1, -1, h_args, g_args};
      } else if (d.scheme == SurfaceDef::RecNotSubst) {
        RecNotSubstBody b;
        b.h = h_name; b.g0 = d.g0; b.g1 = d.g1; b.k1 = d.k1; b.k2 = d.k2;
        b.h_args = h_args; b.g_args = g_args;
        fd.body = std::move(b);
      } else {
        RecValSubstBody b;
        b.h = h_name; b.g = d.g; b.k1 = d.k1; b.k2 = d.k2;
        b.h_args = h_args; b.g_args = g_args;
        fd.body = std::move(b);
      }
    }

    if (d.block_id >= 0) {
      fd.block_id = d.block_id;
      fd.member_index = static_cast<int>(out.program.blocks[d.block_id].members.size());
      out.program.blocks[d.block_id].members.push_back(
          static_cast<int>(out.program.defs.size()));
    }
    out.program.defs.push_back(std::move(fd));
  }

  auto errors = out.program.resolve_and_validate();
  if (!errors.empty()) {
    std::string msg = "lowering produced an invalid program:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw LowerError(msg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scheme checking

namespace {

Tropic slot_value(TierSlot s) {
  switch (s) {
    case TierSlot::S1: return Tropic::of(1);
    case TierSlot::S0: return Tropic::of(0);
    case TierSlot::SM1: return Tropic::of(-1);
    default: return Tropic::neg_inf();
  }
}

std::array<TierSlot, 4> kSlots = {TierSlot::S1, TierSlot::S0, TierSlot::SM1, TierSlot::SMInf};

enum class LabelFamily { Tropical, Safe, Plain };

LabelFamily family(SchemeLabel l) {
  switch (l) {
    case SchemeLabel::SafeComp:
    case SchemeLabel::SafeRec: return LabelFamily::Safe;
    case SchemeLabel::PlainComp:
    case SchemeLabel::PlainRecNot:
    case SchemeLabel::PlainRecVal:
    case SchemeLabel::Minimize: return LabelFamily::Plain;
    default: return LabelFamily::Tropical;
  }
}

struct Checker {
  const SurfaceProgram& sp;
  std::map<std::string, SchemeLabel> labeled;

  std::map<std::string, TierSlot> param_slots(const SurfaceDef& d) const {
    std::map<std::string, TierSlot> m;
    for (int g = 0; g < 4; ++g)
      for (const auto& p : d.params[g]) m[p] = static_cast<TierSlot>(g);
    return m;
  }

  // Component functions already carry a label; a recursion definition is only
  // as disciplined as its components.
  bool components_are(const SurfaceDef& d, LabelFamily fam, bool allow_tropical = false) const {
    std::vector<std::string> names;
    for (const std::string& n : {d.h, d.g0, d.g1, d.g})
      if (!n.empty()) names.push_back(n);
    for (const auto& ks : {d.k1, d.k2}) names.insert(names.end(), ks.begin(), ks.end());
    for (const auto& n : names) {
      auto it = labeled.find(n);
      if (it == labeled.end()) return false;
      LabelFamily f = family(it->second);
      if (f != fam && !(allow_tropical && f == LabelFamily::Tropical)) return false;
    }
    return true;
  }

  // Tropical composition: path-sum of slot values must stay <= the declared
  // slot of each variable occurrence.
  bool check_tropical_expr(const SExpr& e, Tropic lam,
                           const std::map<std::string, TierSlot>& env,
                           std::string* why) const {
    switch (e.kind) {
      case SExpr::Eps: return true;
      case SExpr::Var: {
        Tropic sigma = slot_value(env.at(e.name));
        if (!trop_le(lam, sigma)) {
          if (why)
            *why = "variable '" + e.name + "' (slot " + to_string(sigma) +
                   ") used at tier position " + to_string(lam);
          return false;
        }
        return true;
      }
      case SExpr::Prefix0:
      case SExpr::Prefix1:
        return check_tropical_expr(*e.child, trop_add(lam, Tropic::of(1)), env, why);
      case SExpr::Call: {
        for (int g = 0; g < 4; ++g) {
          Tropic lam2 = trop_add(lam, slot_value(kSlots[static_cast<std::size_t>(g)]));
          for (const auto& a : e.groups[g])
            if (!check_tropical_expr(*a, lam2, env, why)) return false;
        }
        return true;
      }
    }
    return false;
  }

  // Two-tier safe composition: safe variables may only appear while the
  // context has never passed through a normal argument position.
  bool check_safe_expr(const SExpr& e, bool safe_ctx,
                       const std::map<std::string, TierSlot>& env, std::string* why) const {
    switch (e.kind) {
      case SExpr::Eps: return true;
      case SExpr::Var: {
        TierSlot s = env.at(e.name);
        if (s == TierSlot::SMInf && !safe_ctx) {
          if (why) *why = "safe variable '" + e.name + "' used in normal position";
          return false;
        }
        if (s == TierSlot::S1 || s == TierSlot::SM1) {
          if (why) *why = "safe programs use only the normal and safe groups";
          return false;
        }
        return true;
      }
      case SExpr::Prefix0:
      case SExpr::Prefix1:
        // Basic functions take all their arguments as safe.
        return check_safe_expr(*e.child, safe_ctx, env, why);
      case SExpr::Call: {
        if (basic_by_name(e.name)) {
          for (int g = 0; g < 4; ++g)
            for (const auto& a : e.groups[g])
              if (!check_safe_expr(*a, safe_ctx, env, why)) return false;
          return true;
        }
        const SurfaceDef* callee = sp.find(e.name);
        if (!callee) return false;
        if (!callee->params[0].empty() || !callee->params[2].empty()) {
          if (why) *why = "call to '" + e.name + "' which is not a two-tier definition";
          return false;
        }
        for (int g = 0; g < 4; ++g) {
          bool ctx2 = g == 3 ? safe_ctx : false;
          for (const auto& a : e.groups[g])
            if (!check_safe_expr(*a, ctx2, env, why)) return false;
        }
        return true;
      }
    }
    return false;
  }

  bool all_params_slot0(const SurfaceDef& d) const {
    return d.params[0].empty() && d.params[2].empty() && d.params[3].empty();
  }

  bool two_tier(const SurfaceDef& d) const {
    return d.params[0].empty() && d.params[2].empty();
  }

  std::optional<SchemeLabel> label_expr_def(const SurfaceDef& d, std::string* why) {
    auto env = param_slots(d);
    std::string w1, w2;
    if (check_tropical_expr(*d.rhs, Tropic::of(0), env, &w1)) return SchemeLabel::TropComp;
    if (two_tier(d) && check_safe_expr(*d.rhs, true, env, &w2)) return SchemeLabel::SafeComp;
    if (all_params_slot0(d)) return SchemeLabel::PlainComp;
    if (why) *why = w1 + (w2.empty() ? "" : "; as a safe definition: " + w2);
    return std::nullopt;
  }

  std::optional<SchemeLabel> label_rec_def(const SurfaceDef& d, std::string* why) {
    int width = d.block_id >= 0 ? static_cast<int>(sp.blocks[d.block_id].size()) : 1;
    TemplateShapes shapes = expected_shapes(d, width);
    auto gshape_of = [&](const std::string& n) -> std::optional<GShape> {
      const SurfaceDef* gd = sp.find(n);
      if (!gd) return std::nullopt;
      return detect_g_shape(shape_of(*gd), shapes);
    };

    std::optional<GShape> gs;
    if (d.scheme == SurfaceDef::RecNot || d.scheme == SurfaceDef::RecNotSubst) {
      auto s0 = gshape_of(d.g0), s1 = gshape_of(d.g1);
      if (!s0 || !s1 || *s0 != *s1) {
        if (why) *why = "g components do not fit a single recursion shape";
        return std::nullopt;
      }
      gs = s0;
    } else {
      gs = gshape_of(d.g);
      if (!gs) {
        if (why) *why = "g component does not fit a recursion shape";
        return std::nullopt;
      }
    }

    bool case2 = *gs == GShape::Case2;
    bool safe = *gs == GShape::Safe;

    bool tropical_comps = components_are(d, LabelFamily::Tropical);

    switch (d.scheme) {
      case SurfaceDef::RecNot: {
        if (case2) {
          // Linear scanning: recursion argument alone in slot 0, no other
          // finite-tier parameters, literal-ε base.
          if (!d.h.empty()) {
            if (why) *why = "linear scanning requires the literal-ε base";
            return std::nullopt;
          }
          if (!(d.params[0].empty() && d.params[1].size() == 1 && d.params[2].empty())) {
            if (why)
              *why = "linear scanning requires the recursion argument alone among the "
                     "finite-tier groups";
            return std::nullopt;
          }
          if (!tropical_comps) {
            if (why) *why = "linear scanning requires tropically disciplined components";
            return std::nullopt;
          }
          return SchemeLabel::RecNotCase2;
        }
        if (safe) {
          if (!two_tier(d) || !components_are(d, LabelFamily::Safe, true)) {
            if (why) *why = "safe recursion needs two-tier groups and safe components";
            return std::nullopt;
          }
          return SchemeLabel::SafeRec;
        }
        if (d.h.empty()) {
          if (why) *why = "the case-1 shape requires an explicit base component";
          return std::nullopt;
        }
        if (tropical_comps) return SchemeLabel::RecNotCase1;
        if (all_params_slot0(d)) return SchemeLabel::PlainRecNot;
        if (why) *why = "components are undisciplined but the definition is not plain";
        return std::nullopt;
      }
      case SurfaceDef::RecVal:
        if (case2 || safe) {
          if (why) *why = "recursion on values admits only the case-1 shape";
          return std::nullopt;
        }
        if (tropical_comps) return SchemeLabel::RecVal;
        if (all_params_slot0(d)) return SchemeLabel::PlainRecVal;
        if (why) *why = "components are undisciplined but the definition is not plain";
        return std::nullopt;
      case SurfaceDef::RecNotSubst:
      case SurfaceDef::RecValSubst: {
        if (case2 || safe) {
          if (why) *why = "substitutions are only defined for the case-1 shape";
          return std::nullopt;
        }
        // k components take the substituted group alone, in slot 0.
        for (const auto& ks : {d.k1, d.k2}) {
          for (const auto& kn : ks) {
            const SurfaceDef* kd = sp.find(kn);
            GroupShape want;
            want.sizes[1] = static_cast<int>(d.k1.size());
            if (!kd || shape_of(*kd) != want) {
              if (why)
                *why = "substitution component '" + kn + "' must take the substituted group " +
                       "alone in the tier-0 slot";
              return std::nullopt;
            }
          }
        }
        if (!tropical_comps) {
          if (why) *why = "substitution recursion requires tropically disciplined components";
          return std::nullopt;
        }
        return d.scheme == SurfaceDef::RecNotSubst ? SchemeLabel::RecNotSubst
                                                   : SchemeLabel::RecValSubst;
      }
      default: break;
    }
    return std::nullopt;
  }

  CheckResult run() {
    CheckResult res;
    std::map<int, SchemeLabel> block_label;
    for (const auto& d : sp.defs) {
      std::string why;
      std::optional<SchemeLabel> label;
      if (d.scheme == SurfaceDef::Min) {
        label = SchemeLabel::Minimize;
      } else if (d.scheme == SurfaceDef::Expr) {
        label = label_expr_def(d, &why);
      } else {
        label = label_rec_def(d, &why);
      }
      if (!label) {
        res.errors.push_back("definition '" + d.name + "' matches no scheme template: " + why);
        continue;
      }
      if (d.block_id >= 0) {
        auto it = block_label.find(d.block_id);
        if (it == block_label.end()) {
          block_label[d.block_id] = *label;
        } else if (it->second != *label) {
          res.errors.push_back("mutual block of '" + d.name +
                               "' mixes scheme templates (" + label_name(it->second) + " vs " +
                               label_name(*label) + ")");
        }
      }
      labeled[d.name] = *label;
      res.labels.emplace_back(d.name, *label);
    }
    res.ok = res.errors.empty();
    return res;
  }
};

}  // namespace

const char* label_name(SchemeLabel l) {
  switch (l) {
    case SchemeLabel::TropComp: return "TropComp";
    case SchemeLabel::RecNotCase1: return "RecNotCase1";
    case SchemeLabel::RecNotCase2: return "RecNotCase2";
    case SchemeLabel::RecVal: return "RecVal";
    case SchemeLabel::RecNotSubst: return "RecNotSubst";
    case SchemeLabel::RecValSubst: return "RecValSubst";
    case SchemeLabel::SafeComp: return "SafeComp";
    case SchemeLabel::SafeRec: return "SafeRec";
    case SchemeLabel::PlainComp: return "PlainComp";
    case SchemeLabel::PlainRecNot: return "PlainRecNot";
    case SchemeLabel::PlainRecVal: return "PlainRecVal";
    case SchemeLabel::Minimize: return "Minimize";
  }
  return "?";
}

std::optional<SchemeLabel> CheckResult::label_of(const std::string& name) const {
  for (const auto& [n, l] : labels)
    if (n == name) return l;
  return std::nullopt;
}

CheckResult check_schemes(const SurfaceProgram& sp) { return Checker{sp}.run(); }

const char* class_name(AlgebraClass c) {
  switch (c) {
    case AlgebraClass::PRPointer: return "PRPointer";
    case AlgebraClass::RECPointer: return "RECPointer";
    case AlgebraClass::SRPointer: return "SRPointer";
    case AlgebraClass::LTropical: return "LTropical";
    case AlgebraClass::LPTropical: return "LPTropical";
    case AlgebraClass::PTropical: return "PTropical";
    case AlgebraClass::NCTropical: return "NCTropical";
  }
  return "?";
}

std::optional<AlgebraClass> class_by_name(const std::string& s) {
  for (AlgebraClass c : {AlgebraClass::PRPointer, AlgebraClass::RECPointer,
                         AlgebraClass::SRPointer, AlgebraClass::LTropical,
                         AlgebraClass::LPTropical, AlgebraClass::PTropical,
                         AlgebraClass::NCTropical}) {
    if (s == class_name(c)) return c;
  }
  return std::nullopt;
}

AlgebraClass classify(const CheckResult& check) {
  bool minimize = false, plain = false, safe = false;
  bool vals = false, subst_not = false, subst_val = false;
  for (const auto& [name, l] : check.labels) {
    switch (l) {
      case SchemeLabel::Minimize: minimize = true; break;
      case SchemeLabel::PlainComp:
      case SchemeLabel::PlainRecNot:
      case SchemeLabel::PlainRecVal: plain = true; break;
      case SchemeLabel::SafeComp:
      case SchemeLabel::SafeRec: safe = true; break;
      case SchemeLabel::RecVal: vals = true; break;
      case SchemeLabel::RecNotSubst: subst_not = true; break;
      case SchemeLabel::RecValSubst: subst_val = true; break;
      default: break;
    }
  }
  if (minimize) return AlgebraClass::RECPointer;
  if (plain) return AlgebraClass::PRPointer;
  if (safe) return AlgebraClass::SRPointer;
  if (subst_val || (subst_not && vals)) return AlgebraClass::PTropical;
  if (subst_not) return AlgebraClass::NCTropical;
  if (vals) return AlgebraClass::LTropical;
  return AlgebraClass::LPTropical;
}

}  // namespace tropic
