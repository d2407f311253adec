#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tropic/ast.hpp"

namespace tropic {

// The four tier slots of the surface language, highest first.
enum class TierSlot { S1 = 0, S0 = 1, SM1 = 2, SMInf = 3 };

inline const char* slot_name(TierSlot s) {
  switch (s) {
    case TierSlot::S1: return "1";
    case TierSlot::S0: return "0";
    case TierSlot::SM1: return "-1";
    default: return "-inf";
  }
}

struct SExpr;
using SExprPtr = std::unique_ptr<SExpr>;

struct SExpr {
  enum Kind { Var, Eps, Prefix0, Prefix1, Call } kind = Var;
  std::string name;                       // Var: parameter name; Call: callee
  SExprPtr child;                         // Prefix0/Prefix1
  std::array<std::vector<SExprPtr>, 4> groups;  // Call arguments per slot
  int line = 0, col = 0;
};

struct SurfaceDef {
  enum Scheme { Expr, RecNot, RecVal, RecNotSubst, RecValSubst, Min } scheme = Expr;
  std::string name;
  std::array<std::vector<std::string>, 4> params;  // names per slot
  SExprPtr rhs;                                    // Expr only
  // Recursion headers (names of component functions); h empty for the
  // literal-ε base of linear scanning.
  std::string h, g0, g1, g;
  std::vector<std::string> k1, k2;
  int line = 0;
  int block_id = -1;

  int arity() const {
    int a = 0;
    for (auto& g_ : params) a += static_cast<int>(g_.size());
    return a;
  }
  std::vector<std::string> flat_params() const;
  // Flat index of the first slot-0 parameter (the recursion argument).
  int rec_flat_pos() const;
};

struct SurfaceProgram {
  std::vector<SurfaceDef> defs;
  std::vector<std::vector<int>> blocks;  // mutual blocks, def indices
  std::string entry;                     // empty: last definition
  std::string declared_class;

  const SurfaceDef* find(const std::string& name) const;
  std::string entry_or_default() const;
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(std::string msg, int l, int c)
      : std::runtime_error(std::move(msg)), line(l), col(c) {}
};

SurfaceProgram parse(const std::string& text);

// Lowering: slot annotations are erased into the core AST; the slot table
// keeps the declared slot of every parameter for the checker and reports.
struct Lowered {
  Program program;
  std::map<std::string, std::vector<TierSlot>> slots;  // per def, flat order
};

Lowered lower(const SurfaceProgram& sp);

enum class SchemeLabel {
  TropComp,
  RecNotCase1,
  RecNotCase2,
  RecVal,
  RecNotSubst,
  RecValSubst,
  SafeComp,
  SafeRec,
  PlainComp,
  PlainRecNot,
  PlainRecVal,
  Minimize,
};

const char* label_name(SchemeLabel l);

struct CheckResult {
  bool ok = false;
  std::vector<std::pair<std::string, SchemeLabel>> labels;  // definition order
  std::vector<std::string> errors;

  std::optional<SchemeLabel> label_of(const std::string& name) const;
};

CheckResult check_schemes(const SurfaceProgram& sp);

enum class AlgebraClass {
  PRPointer,
  RECPointer,
  SRPointer,
  LTropical,
  LPTropical,
  PTropical,
  NCTropical,
};

const char* class_name(AlgebraClass c);
std::optional<AlgebraClass> class_by_name(const std::string& s);

// Pre: check_schemes succeeded.
AlgebraClass classify(const CheckResult& check);

}  // namespace tropic
