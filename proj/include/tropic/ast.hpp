#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tropic {

enum class BasicKind { Hd, Tl, S0, S1, Succ, Proj, Read, Offset, Eps };

struct BasicFn {
  BasicKind kind = BasicKind::Hd;
  // Proj only: 1-based selected index and total arity.
  int proj_index = 0;
  int proj_arity = 0;

  int arity() const {
    switch (kind) {
      case BasicKind::Proj: return proj_arity;
      case BasicKind::Offset:
      case BasicKind::Eps: return 0;
      default: return 1;
    }
  }
  bool operator==(const BasicFn&) const = default;
};

// Surface spelling of a basic function, or nullopt if the name is not basic.
std::optional<BasicFn> basic_by_name(const std::string& name);
std::string basic_name(const BasicFn& fn);

// A callee: either a basic function or a named definition.
struct FuncRef {
  bool is_basic = false;
  BasicFn basic;
  std::string name;
  int def_id = -1;  // filled by Program::resolve for named refs

  static FuncRef of_basic(BasicFn b) { return FuncRef{true, b, "", -1}; }
  static FuncRef of_name(std::string n) { return FuncRef{false, {}, std::move(n), -1}; }
};

// Where a composition argument comes from: a parameter of the enclosing
// definition or the result of an earlier inner call.
struct Route {
  enum Kind { Param, Inner } kind = Param;
  int index = 0;
};

struct InnerCall {
  FuncRef fn;
  std::vector<Route> args;
};

// f(params) = outer(...) with nested calls flattened into `inner`
// (let-semantics: each inner call is evaluated once).
struct ComposeBody {
  FuncRef outer;
  std::vector<InnerCall> inner;
  std::vector<Route> outer_args;
};

struct BasicBody {
  BasicFn fn;
};

// Source of one argument in the h/g component calls of a recursion scheme.
struct CompArg {
  enum Kind {
    PeeledRec,   // r̄, the predecessor of the recursion argument
    RecResult,   // recursive result of block member `index`
    SubstResult1,// recursive result under k1 substitution, member `index`
    SubstResult2,
    FParam,      // parameter `index` (0-based flat position) of f
  } kind = FParam;
  int index = 0;
};

struct RecNotBody {
  std::string h, g0, g1;
  int h_id = -1, g0_id = -1, g1_id = -1;
  std::vector<CompArg> h_args;
  std::vector<CompArg> g_args;
};

struct RecValBody {
  std::string h, g;
  int h_id = -1, g_id = -1;
  std::vector<CompArg> h_args;
  std::vector<CompArg> g_args;
};

struct RecNotSubstBody {
  std::string h, g0, g1;
  std::vector<std::string> k1, k2;
  int h_id = -1, g0_id = -1, g1_id = -1;
  std::vector<int> k1_ids, k2_ids;
  std::vector<CompArg> h_args;
  std::vector<CompArg> g_args;
};

struct RecValSubstBody {
  std::string h, g;
  std::vector<std::string> k1, k2;
  int h_id = -1, g_id = -1;
  std::vector<int> k1_ids, k2_ids;
  std::vector<CompArg> h_args;
  std::vector<CompArg> g_args;
};

struct MinimizeBody {
  std::string h;
  int h_id = -1;
};

using Body = std::variant<BasicBody, ComposeBody, RecNotBody, RecValBody,
                          RecNotSubstBody, RecValSubstBody, MinimizeBody>;

struct FunctionDef {
  std::string name;
  int arity = 0;
  Body body;
  // Recursion schemes only: 0-based flat position of the recursion argument
  // and the width of the substituted group.
  int rec_pos = 0;
  int subst_width = 0;
  // Mutual recursion: block id (-1 when not in a block) and member index.
  int block_id = -1;
  int member_index = 0;
};

struct MutualBlockInfo {
  std::vector<int> members;  // def indices, in member order
};

struct Program {
  std::vector<FunctionDef> defs;
  std::vector<MutualBlockInfo> blocks;
  std::string entry;
  std::string declared_class;

  std::map<std::string, int> index;

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }

  // Build the name index, fill resolved ids, and check every scheme shape.
  // Returns human-readable errors; empty means the program is valid.
  std::vector<std::string> resolve_and_validate();
};

bool is_recursion_body(const Body& b);
bool is_minimize_body(const Body& b);

// Canonical component routing for a recursion definition whose surface groups
// are unknown (programmatically built programs): h gets f's parameters minus
// the recursion argument; g gets them with the recursion argument expanded to
// (r̄, recursive results [, k1-results, k2-results]).
void fill_default_routing(FunctionDef& def, int block_width);

}  // namespace tropic
