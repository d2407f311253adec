#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace tropic {

// An element of Z ∪ {−∞} under (max, +).
struct Tropic {
  bool finite = false;
  long long v = 0;

  static constexpr Tropic neg_inf() { return Tropic{}; }
  static constexpr Tropic of(long long x) { return Tropic{true, x}; }

  bool operator==(const Tropic&) const = default;
};

inline Tropic trop_add(Tropic a, Tropic b) {
  if (!a.finite || !b.finite) return Tropic::neg_inf();
  return Tropic::of(a.v + b.v);
}

inline Tropic trop_max(Tropic a, Tropic b) {
  if (!a.finite) return b;
  if (!b.finite) return a;
  return Tropic::of(std::max(a.v, b.v));
}

// a <= b in the order with −∞ least.
inline bool trop_le(Tropic a, Tropic b) {
  if (!a.finite) return true;
  if (!b.finite) return false;
  return a.v <= b.v;
}

inline bool trop_le_int(Tropic a, long long b) { return trop_le(a, Tropic::of(b)); }

std::string to_string(Tropic t);

// Per-argument tropics and the additive constant of one function.
struct TierSignature {
  std::vector<Tropic> args;
  // Internal constant may be −∞ (no constant term needed); the reported
  // constant clamps at 0.
  Tropic raw_constant = Tropic::neg_inf();

  long long constant() const {
    if (!raw_constant.finite || raw_constant.v < 0) return 0;
    return raw_constant.v;
  }

  bool operator==(const TierSignature&) const = default;
};

std::string to_string(const TierSignature& sig);

}  // namespace tropic
