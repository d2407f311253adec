#include "tropic/compiler.hpp"

#include <cctype>
#include <functional>
#include <sstream>

#include "tropic/eval.hpp"

namespace tropic {

const char* target_name(CompileTarget t) {
  switch (t) {
    case CompileTarget::L: return "l";
    case CompileTarget::LP: return "lp";
    case CompileTarget::P: return "p";
    case CompileTarget::NC: return "nc";
  }
  return "?";
}

std::optional<CompileTarget> target_by_name(const std::string& s) {
  if (s == "l") return CompileTarget::L;
  if (s == "lp") return CompileTarget::LP;
  if (s == "p") return CompileTarget::P;
  if (s == "nc") return CompileTarget::NC;
  return std::nullopt;
}

std::size_t state_code_width(const Machine& m) {
  std::size_t w = 1;
  while ((std::size_t{1} << w) < m.state_names.size()) ++w;
  return w;
}

Word state_code(const Machine& m, int state) {
  std::size_t w = state_code_width(m);
  std::string bits(w, '0');
  for (std::size_t j = 0; j < w; ++j) {
    if (state & (1 << (w - 1 - j))) bits[j] = '1';
  }
  return Word::raw(std::move(bits));
}

ConfigEncoding encode_config(const Machine& m, const Configuration& c, std::size_t n) {
  std::size_t len = pointer_budget(n);
  ConfigEncoding enc;
  enc.words.push_back(state_code(m, c.state));
  auto mask = [&](std::size_t pos) {
    std::string b(len, '0');
    b[pos] = '1';
    return Word::raw(std::move(b));
  };
  enc.words.push_back(Word::from_bits(c.tape[0]));
  enc.words.push_back(mask(c.head[0]));
  for (int i = 1; i <= m.tapes; ++i) enc.words.push_back(Word::from_bits(c.tape[i]));
  for (int i = 1; i <= m.tapes; ++i) enc.words.push_back(mask(c.head[i]));
  return enc;
}

Configuration decode_config(const Machine& m, const ConfigEncoding& enc, std::size_t n) {
  std::size_t len = pointer_budget(n);
  if (enc.words.size() != static_cast<std::size_t>(2 * m.tapes + 3))
    throw MachineError("configuration encoding needs 2k+3 words");
  Configuration c;
  const std::string& code = enc.words[0].bits();
  c.state = -1;
  for (int q = 0; q < m.state_count(); ++q) {
    if (state_code(m, q).bits() == code) c.state = q;
  }
  if (c.state < 0) throw MachineError("unknown state code");
  auto head_of = [&](const Word& mask) -> std::size_t {
    std::size_t pos = len;
    int ones = 0;
    for (std::size_t j = 0; j < mask.size(); ++j) {
      if (mask.symbol_at(j) == '1') {
        pos = j;
        ++ones;
      }
    }
    if (ones != 1 || mask.size() != len) throw MachineError("malformed head mask");
    return pos;
  };
  c.tape.push_back(enc.words[1].bits());
  c.head.push_back(head_of(enc.words[2]));
  for (int i = 0; i < m.tapes; ++i) {
    c.tape.push_back(enc.words[static_cast<std::size_t>(3 + i)].bits());
    c.head.push_back(head_of(enc.words[static_cast<std::size_t>(3 + m.tapes + i)]));
  }
  for (const auto& t : c.tape)
    if (t.size() != len) throw MachineError("malformed tape word");
  return c;
}

std::string manifest_text(const CompiledProgram& cp) {
  std::ostringstream os;
  os << "target=" << target_name(cp.target) << "\n";
  for (const auto& [role, name] : cp.manifest) os << role << "=" << name << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// The stdlib of L-tropical helpers (no recursion on values anywhere).

std::string stdlib_text() {
  return R"(# boolean words: true = 1, false = 0; the empty word tests false
def btrue() = 1. eps
def bfalse() = 0. eps
def ite_h(| u, v) = v
def ite_g0(| r, res, u, v) = v
def ite_g1(| r, res, u, v) = u
def ite(| b, u, v) = rec_not h=ite_h g0=ite_g0 g1=ite_g1
def bnot_h() = 1. eps
def bnot_g0(| r, res) = 1. eps
def bnot_g1(| r, res) = 0. eps
def bnot(| b) = rec_not h=bnot_h g0=bnot_g0 g1=bnot_g1
def band_h(| b) = 0. eps
def band_g0(| r, res, b) = 0. eps
def band_g1(| r, res, b) = b
def band(| a, b) = rec_not h=band_h g0=band_g0 g1=band_g1
def bor_h(| b) = b
def bor_g0(| r, res, b) = b
def bor_g1(| r, res, b) = 1. eps
def bor(| a, b) = rec_not h=bor_h g0=bor_g0 g1=bor_g1
def notempty_h() = 0. eps
def notempty_g(| r, res) = 1. eps
def notempty(| b) = rec_not h=notempty_h g0=notempty_g g1=notempty_g
def isempty(| b) = bnot(| notempty(| b))
# prefix of the scan up to (excluding) the first 1
def su1_g0(res | r) = 0. res
def su1_g1(res | r) = eps
def scanuntil1(| m) = rec_not g0=su1_g0 g1=su1_g1
# drop |p| symbols from the front of t
def rx_h(| t) = t
def rx_g(| r, res, t) = tl(| | res |)
def rx(| p, t) = rec_not h=rx_h g0=rx_g g1=rx_g
# the symbol of t under the single 1 of mask m
def bitat(| m, t) = hd(| | | rx(| scanuntil1(| m), t))
# reversal: the source word rides along in the free group
def rev_g(res | r | | w) = ite(| hd(| | | rx(| r, w)), 1. res, 0. res)
def revcore(| m | | w) = rec_not g0=rev_g g1=rev_g
def rev(| w) = revcore(| w | | w)
def dl_g0(res | r) = ite(| notempty(| r), 0. res, eps)
def dl_g1(res | r) = ite(| notempty(| r), 1. res, eps)
def droplast(| w) = rec_not g0=dl_g0 g1=dl_g1
def zeros_g(res | r) = 0. res
def zeros(| w) = rec_not g0=zeros_g g1=zeros_g
def onefront(| w) = 1. zeros(| tl(| | w |))
def ob_g(res | r) = ite(| notempty(| r), 0. res, 1. res)
def oneback(| w) = rec_not g0=ob_g g1=ob_g
# head mask shifts; shifting keeps the mask length
def sl_g(res | r) = ite(| hd(| | | r), 1. res, 0. res)
def shiftl(| m) = rec_not g0=sl_g g1=sl_g
def shiftr(| m) = rev(| shiftl(| rev(| m)))
# drop |cnt| symbols from the back of t
def dropk_h(| t) = t
def dropk_g(| r, res, t) = droplast(| res)
def dropk(| cnt, t) = rec_not h=dropk_h g0=dropk_g g1=dropk_g
# the prefix of t up to and including the mask position
def upto(| m, t) = dropk(| tl(| | rx(| scanuntil1(| m), t) |), t)
# replace the bit under the mask: the tape rides along in the free group
def brcopy_g(res | r | | t2) = ite(| hd(| | | rx(| rx(| 0. r, t2), t2)), 1. res, 0. res)
def brz_g1(res | r | | t2) = 0. res
def brw_g1(res | r | | t2) = 1. res
def brzcore(| m | | t2) = rec_not g0=brcopy_g g1=brz_g1
def brwcore(| m | | t2) = rec_not g0=brcopy_g g1=brw_g1
def bitreplace0(| m, t) = brzcore(| m | | t)
def bitreplace1(| m, t) = brwcore(| m | | t)
# pad the empty word to one blank cell
def pad1(| x) = ite(| notempty(| x), x, 0. eps)
)";
}

std::vector<std::string> stdlib_def_names() {
  return {"btrue",    "bfalse",   "ite",      "bnot",   "band",       "bor",
          "notempty", "isempty",  "scanuntil1", "rx",   "bitat",      "rev",
          "droplast", "zeros",    "onefront", "oneback", "shiftl",    "shiftr",
          "dropk",    "upto",     "bitreplace0", "bitreplace1", "pad1"};
}

// ---------------------------------------------------------------------------
// Machine compilation

namespace {

struct Emit {
  const Machine& m;
  CompileTarget target;
  std::ostringstream os;
  CompiledProgram out;

  int k;        // work tapes
  int words;    // 2k+3
  std::size_t code_width;

  explicit Emit(const Machine& mach, CompileTarget t) : m(mach), target(t) {
    k = m.tapes;
    words = 2 * k + 3;
    code_width = state_code_width(m);
    out.target = t;
  }

  // Config word index: 0 state, 1 ptr, 2 ptr mask, 3..2+k work, 3+k..2+2k masks.
  int w_state() const { return 0; }
  int w_ptr() const { return 1; }
  int w_pmask() const { return 2; }
  int w_work(int i) const { return 2 + i; }          // i in 1..k
  int w_wmask(int i) const { return 2 + k + i; }     // i in 1..k

  std::string cname(int w) const { return "c" + std::to_string(w); }

  std::string params() const {
    std::string s = "sz";
    for (int w = 0; w < words; ++w) s += ", " + cname(w);
    return s;
  }

  std::string args_c(const std::string& first) const {
    std::string s = first;
    for (int w = 0; w < words; ++w) s += ", " + cname(w);
    return s;
  }

  std::string code_const(int state) const {
    std::string b = state_code(m, state).bits();
    std::string e = "eps";
    for (auto it = b.rbegin(); it != b.rend(); ++it) e = std::string(1, *it) + ". " + e;
    return e;
  }

  std::string sanitized(const std::string& s) const {
    std::string o;
    for (char c : s) o += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return o;
  }

  void emit_state_tests() {
    for (std::size_t j = 0; j < code_width; ++j) {
      std::string chain = "st";
      for (std::size_t t = 0; t < j; ++t) chain = "tl(| | " + chain + " |)";
      os << "def stbit" << j << "(| st) = hd(| | | " << chain << ")\n";
    }
    for (int q = 0; q < m.state_count(); ++q) {
      Word code = state_code(m, q);
      std::string expr;
      for (std::size_t j = 0; j < code_width; ++j) {
        std::string bit = "stbit" + std::to_string(j) + "(| st)";
        std::string term = code.symbol_at(j) == '1' ? bit : "bnot(| " + bit + ")";
        expr = expr.empty() ? term : "band(| " + expr + ", " + term + ")";
      }
      os << "def is_" << sanitized(m.state_names[q]) << "(| st) = " << expr << "\n";
    }
  }

  std::string is_state(int q, const std::string& arg) const {
    return "is_" + sanitized(m.state_names[q]) + "(| " + arg + ")";
  }

  // Effective work tape i after the Read-state fetch and the out-of-range flag.
  std::string eff_tape(int i) const {
    std::string w = cname(w_work(i));
    if (m.read_state < 0) return w;
    std::string fetched = "read(| | | rev(| " + cname(w_ptr()) + "))";
    std::string isread = is_state(m.read_state, cname(w_state()));
    if (i == 1) {
      std::string written = "ite(| " + fetched + ", bitreplace1(| " + cname(w_wmask(1)) +
                            ", " + w + "), bitreplace0(| " + cname(w_wmask(1)) + ", " + w + "))";
      w = "ite(| " + isread + ", " + written + ", " + w + ")";
    }
    if (i == k) {
      std::string oob = "band(| " + isread + ", isempty(| " + fetched + "))";
      w = "ite(| " + oob + ", bitreplace1(| onefront(| " + w + "), " + w + "), " + w + ")";
    }
    return w;
  }

  std::string moved_mask(Move mv, const std::string& mask) const {
    switch (mv) {
      case Move::L: return "ite(| hd(| | | " + mask + "), " + mask + ", shiftl(| " + mask + "))";
      case Move::R: return "shiftr(| " + mask + ")";
      case Move::S: return mask;
    }
    return mask;
  }

  // The component expression of config word w after one transition of target t.
  std::string leaf(int w, const TransitionTarget& t,
                   const std::vector<std::string>& eff) const {
    if (w == w_state()) return code_const(t.next_state);
    if (w == w_ptr()) {
      const char* br = t.writes[0] == '1' ? "bitreplace1" : "bitreplace0";
      return std::string(br) + "(| " + cname(w_pmask()) + ", " + cname(w_ptr()) + ")";
    }
    if (w == w_pmask()) return moved_mask(t.moves[0], cname(w_pmask()));
    for (int i = 1; i <= k; ++i) {
      if (w == w_work(i)) {
        const char* br = t.writes[i] == '1' ? "bitreplace1" : "bitreplace0";
        return std::string(br) + "(| " + cname(w_wmask(i)) + ", " + eff[i] + ")";
      }
      if (w == w_wmask(i)) return moved_mask(t.moves[static_cast<std::size_t>(i)], cname(w_wmask(i)));
    }
    return cname(w);
  }

  // Identity component for halting (absorbing) states; work tapes still carry
  // the fetch effect so the word stays well-defined.
  std::string identity_leaf(int w) const {
    return cname(w);
  }

  std::string symbol_dispatch(int q, int w, int branch,
                              const std::vector<std::string>& eff,
                              const std::vector<std::string>& bits) const {
    // Nested if-then-else over the k+1 symbols under the heads.
    std::function<std::string(int, std::string&)> rec = [&](int j, std::string& reads) -> std::string {
      if (j == k + 1) {
        auto it = m.trans.find({q, reads});
        int b = (branch >= 1 && it->second.branch[1]) ? 1 : 0;
        const TransitionTarget& t = *it->second.branch[b];
        return leaf(w, t, eff);
      }
      std::string r1 = reads + "1";
      std::string r0 = reads + "0";
      std::string on1 = rec(j + 1, r1);
      std::string on0 = rec(j + 1, r0);
      if (on1 == on0) return on1;
      return "ite(| " + bits[static_cast<std::size_t>(j)] + ", " + on1 + ", " + on0 + ")";
    };
    std::string reads;
    return rec(0, reads);
  }

  // One Next family member: the w-th config word after one step.
  void emit_next_member(const std::string& prefix, int w, int branch) {
    std::vector<std::string> eff(static_cast<std::size_t>(k) + 1);
    for (int i = 1; i <= k; ++i) eff[static_cast<std::size_t>(i)] = eff_tape(i);
    std::vector<std::string> bits;
    bits.push_back("bitat(| " + cname(w_pmask()) + ", " + cname(w_ptr()) + ")");
    for (int i = 1; i <= k; ++i)
      bits.push_back("bitat(| " + cname(w_wmask(i)) + ", " + eff[static_cast<std::size_t>(i)] + ")");

    std::string expr = identity_leaf(w);
    // Halting states keep the configuration; others dispatch on the symbols.
    for (int q = m.state_count() - 1; q >= 0; --q) {
      std::string body;
      if (m.is_halting(q)) {
        // The fetch never happens in halting states; plain identity.
        body = identity_leaf(w);
      } else {
        body = symbol_dispatch(q, w, branch, eff, bits);
      }
      expr = "ite(| " + is_state(q, cname(w_state())) + ", " + body + ", " + expr + ")";
    }
    os << "def " << prefix << w << "(| " << params() << ") = " << expr << "\n";
    out.manifest[prefix + std::to_string(w)] = prefix + std::to_string(w);
  }

  void emit_next(const std::string& prefix, int branch) {
    for (int w = 0; w < words; ++w) emit_next_member(prefix, w, branch);
  }

  void emit_projections() {
    for (int w = 0; w < words; ++w) {
      os << "def proj_" << w << "(| " << params() << ") = " << cname(w) << "\n";
    }
  }

  // The Step nest: layer 1 applies Next once per unit; layer j applies layer
  // j-1 a full budget per unit.
  void emit_step_nest(bool on_values) {
    for (int layer = 1; layer <= k; ++layer) {
      for (int w = 0; w < words; ++w) {
        os << "def gstep" << layer << "_" << w << "(| r";
        for (int i = 0; i < words; ++i) os << ", R" << i;
        os << ", " << params() << ") = ";
        if (layer == 1) {
          os << "next_" << w << "(| sz";
          for (int i = 0; i < words; ++i) os << ", R" << i;
          os << ")\n";
        } else {
          os << "step" << (layer - 1) << "_" << w << "(| sz, sz";
          for (int i = 0; i < words; ++i) os << ", R" << i;
          os << ")\n";
        }
      }
      os << "mutual {\n";
      for (int w = 0; w < words; ++w) {
        os << "  def step" << layer << "_" << w << "(| t, " << params() << ") = "
           << (on_values ? "rec_val h=proj_" : "rec_not h=proj_") << w
           << (on_values ? " g=gstep" : " g0=gstep") << layer << "_" << w;
        if (!on_values) os << " g1=gstep" << layer << "_" << w;
        os << "\n";
        out.manifest["step_" + std::to_string(layer) + "_" + std::to_string(w)] =
            "step" + std::to_string(layer) + "_" + std::to_string(w);
      }
      os << "}\n";
    }
  }

  std::string init_arg(int w) const {
    if (w == w_state()) return code_const(m.init_state);
    if (w == w_ptr() || w == w_pmask()) return "onefront(| pad1(| x))";
    for (int i = 1; i <= k; ++i) {
      if (w == w_work(i)) return "zeros(| pad1(| x))";
      if (w == w_wmask(i)) return "onefront(| pad1(| x))";
    }
    return "eps";
  }

  std::string step_call(int w) const {
    std::string s = "step" + std::to_string(k) + "_" + std::to_string(w) + "(| x, x";
    for (int i = 0; i < words; ++i) s += ", " + init_arg(i);
    s += ")";
    return s;
  }

  void finish_deterministic() {
    emit_step_nest(target == CompileTarget::L);
    os << "def main(| x) = upto(| " << step_call(w_wmask(1)) << ", " << step_call(w_work(1))
       << ")\n";
    os << "def mainacc(| x) = is_" << sanitized(m.state_names[m.accept_state]) << "(| "
       << step_call(w_state()) << ")\n";
    os << "entry main\n";
    os << "class " << (target == CompileTarget::L ? "LTropical" : "LPTropical") << "\n";
    out.manifest["entry"] = "main";
    out.manifest["accept"] = "mainacc";
    out.manifest["readout"] = "upto";
    out.manifest["init"] = "pad1";
  }

  void emit_alternation() {
    // IsUniversal / isPositive over (sz, c...).
    std::string univ = "bfalse()";
    for (int q = m.state_count() - 1; q >= 0; --q) {
      if (m.kinds[q] == StateKind::Universal)
        univ = "ite(| " + is_state(q, cname(w_state())) + ", btrue(), " + univ + ")";
    }
    os << "def isuniv(| " << params() << ") = " << univ << "\n";
    os << "def ispos(| " << params() << ") = "
       << is_state(m.accept_state, cname(w_state())) << "\n";
    os << "def keepsz(| " << params() << ") = sz\n";
    out.manifest["is_universal"] = "isuniv";
    out.manifest["is_positive"] = "ispos";

    os << "def acc_g(| r, a1, a2, " << params() << ") = ite(| isuniv(| " << args_c("sz")
       << "), band(| a1, a2), bor(| a1, a2))\n";
    auto klist = [&](const std::string& prefix) {
      std::string s = "[keepsz";
      for (int w = 0; w < words; ++w) s += ", " + prefix + std::to_string(w);
      s += "]";
      return s;
    };
    bool on_values = target == CompileTarget::P;
    os << "def accept(| t, " << params() << ") = "
       << (on_values ? "rec_val_subst h=ispos g=acc_g" : "rec_not_subst h=ispos g0=acc_g g1=acc_g")
       << " k1=" << klist("next0_") << " k2=" << klist("next1_") << "\n";
    out.manifest["accept_scheme"] = "accept";

    std::string inits;
    for (int w = 0; w < words; ++w) inits += ", " + init_arg(w);
    os << "def main(| x) = accept(| x, x" << inits << ")\n";
    os << "entry main\n";
    os << "class " << (target == CompileTarget::P ? "PTropical" : "NCTropical") << "\n";
    out.manifest["entry"] = "main";
    out.manifest["accept"] = "main";
  }
};

}  // namespace

CompiledProgram compile_ratm(const Machine& m, CompileTarget target) {
  if (m.alternating) throw MachineError("compile_ratm needs a deterministic machine");
  if (target != CompileTarget::L && target != CompileTarget::LP)
    throw MachineError("deterministic machines compile to the l or lp target");
  Emit e(m, target);
  e.os << stdlib_text();
  e.emit_state_tests();
  e.emit_next("next_", -1);
  e.emit_projections();
  e.finish_deterministic();
  e.out.text = e.os.str();
  return std::move(e.out);
}

CompiledProgram compile_alternating(const Machine& m, CompileTarget target) {
  if (target != CompileTarget::P && target != CompileTarget::NC)
    throw MachineError("alternating machines compile to the p or nc target");
  Emit e(m, target);
  e.os << stdlib_text();
  e.emit_state_tests();
  e.emit_next("next0_", 0);
  e.emit_next("next1_", 1);
  e.emit_alternation();
  e.out.text = e.os.str();
  return std::move(e.out);
}

std::uint64_t deterministic_budget(const Machine& m, CompileTarget target, std::size_t n) {
  std::uint64_t unit = target == CompileTarget::L
                           ? static_cast<std::uint64_t>(n)
                           : static_cast<std::uint64_t>(encode(n).size());
  std::uint64_t total = 1;
  for (int i = 0; i < m.tapes; ++i) total *= unit;
  return unit == 0 ? 0 : total;
}

std::uint64_t alternation_depth(CompileTarget target, std::size_t n) {
  return target == CompileTarget::P ? static_cast<std::uint64_t>(n)
                                    : static_cast<std::uint64_t>(encode(n).size());
}

int recursion_nesting_depth(const SurfaceProgram& sp) {
  std::map<std::string, int> depth;
  std::function<int(const SExpr&)> expr_depth = [&](const SExpr& e) -> int {
    int d = 0;
    if (e.kind == SExpr::Call) {
      auto it = depth.find(e.name);
      if (it != depth.end()) d = it->second;
      for (const auto& g : e.groups)
        for (const auto& a : g) d = std::max(d, expr_depth(*a));
    } else if (e.child) {
      d = expr_depth(*e.child);
    }
    return d;
  };
  int best = 0;
  for (const auto& d : sp.defs) {
    int v = 0;
    if (d.scheme == SurfaceDef::Expr) {
      v = expr_depth(*d.rhs);
    } else {
      for (const std::string& n : {d.h, d.g0, d.g1, d.g}) {
        if (n.empty()) continue;
        auto it = depth.find(n);
        if (it != depth.end()) v = std::max(v, it->second);
      }
      for (const auto& ks : {d.k1, d.k2})
        for (const auto& n : ks) {
          auto it = depth.find(n);
          if (it != depth.end()) v = std::max(v, it->second);
        }
      v += 1;
    }
    depth[d.name] = v;
    best = std::max(best, v);
  }
  return best;
}

EquivReport check_equivalence(const Machine& m, CompileTarget target, int max_len,
                              std::uint64_t fuel) {
  CompiledProgram cp = m.alternating || target == CompileTarget::P || target == CompileTarget::NC
                           ? compile_alternating(m, target)
                           : compile_ratm(m, target);
  SurfaceProgram sp = parse(cp.text);
  Lowered low = lower(sp);

  EquivReport rep;
  bool alternating = target == CompileTarget::P || target == CompileTarget::NC;
  for (int len = 0; len <= max_len; ++len) {
    std::uint64_t count = std::uint64_t{1} << len;
    for (std::uint64_t v = 0; v < count; ++v) {
      std::string bits(static_cast<std::size_t>(len), '0');
      for (int j = 0; j < len; ++j)
        if (v & (std::uint64_t{1} << (len - 1 - j))) bits[static_cast<std::size_t>(j)] = '1';
      ComputationInput input{Word::raw(bits)};
      Word offset = encode(input.n());
      ++rep.checked;

      std::string failure;
      if (alternating) {
        bool sim = run_alternating(m, input, alternation_depth(target, input.n()));
        EvalOutcome got = eval(low.program, cp.manifest.at("entry"), {offset}, input, fuel);
        if (!got.ok()) {
          failure = "compiled evaluation failed: " + got.error;
        } else if ((got.value == Word::raw("1")) != sim) {
          failure = "acceptance mismatch: simulator " + std::string(sim ? "accepts" : "rejects") +
                    ", compiled returns " + (got.value.empty() ? "eps" : got.value.bits());
        }
      } else {
        RunResult sim = run(m, input, deterministic_budget(m, target, input.n()));
        EvalOutcome out = eval(low.program, cp.manifest.at("entry"), {offset}, input, fuel);
        EvalOutcome acc = eval(low.program, cp.manifest.at("accept"), {offset}, input, fuel);
        if (!out.ok() || !acc.ok()) {
          failure = "compiled evaluation failed: " + (out.ok() ? acc.error : out.error);
        } else if (out.value != sim.output) {
          failure = "output mismatch: simulator " + sim.output.bits() + ", compiled " +
                    out.value.bits();
        } else {
          bool sim_acc = sim.status == HaltStatus::Accept;
          if ((acc.value == Word::raw("1")) != sim_acc)
            failure = "acceptance mismatch at budget";
        }
      }
      if (!failure.empty()) {
        ++rep.mismatches;
        if (rep.failures.size() < 5)
          rep.failures.push_back("input " + (bits.empty() ? "eps" : bits) + ": " + failure);
      }
    }
  }
  rep.ok = rep.mismatches == 0;
  return rep;
}

}  // namespace tropic
