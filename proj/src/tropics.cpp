#include "tropic/tropics.hpp"

#include <sstream>

namespace tropic {

std::string to_string(Tropic t) {
  if (!t.finite) return "-inf";
  return std::to_string(t.v);
}

std::string to_string(const TierSignature& sig) {
  std::ostringstream os;
  os << "T=[";
  for (std::size_t i = 0; i < sig.args.size(); ++i) {
    if (i) os << ",";
    os << to_string(sig.args[i]);
  }
  os << "], c=" << sig.constant();
  return os.str();
}

}  // namespace tropic
