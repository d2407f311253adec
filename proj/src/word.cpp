#include "tropic/word.hpp"

#include <algorithm>

namespace tropic {

Word numeric_succ(const Word& w) {
  std::string b = w.bits();
  int i = static_cast<int>(b.size()) - 1;
  while (i >= 0 && b[i] == '1') {
    b[i] = '0';
    --i;
  }
  if (i < 0) {
    b.insert(b.begin(), '1');
  } else {
    b[i] = '1';
  }
  return Word::raw(std::move(b));
}

Word canonical(const Word& w) {
  const std::string& b = w.bits();
  std::size_t i = 0;
  while (i < b.size() && b[i] == '0') ++i;
  return Word::raw(b.substr(i));
}

Word numeric_pred_canonical(const Word& w) {
  // Pre: canonical and nonzero.
  std::string b = w.bits();
  int i = static_cast<int>(b.size()) - 1;
  while (i >= 0 && b[i] == '0') {
    b[i] = '1';
    --i;
  }
  b[i] = '0';
  if (!b.empty() && b.front() == '0') b.erase(b.begin());
  return Word::raw(std::move(b));
}

Word encode(std::uint64_t n) {
  if (n == 0) return Word();
  std::string b;
  while (n > 0) {
    b.push_back(static_cast<char>('0' + (n & 1)));
    n >>= 1;
  }
  std::reverse(b.begin(), b.end());
  return Word::raw(std::move(b));
}

std::uint64_t decode(const Word& w) {
  std::uint64_t v = 0;
  std::size_t significant = 0;
  for (char c : w.bits()) {
    if (significant > 0 || c == '1') ++significant;
    if (significant > 62) return kDecodeSaturation;
    v = (v << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::size_t pointer_budget(std::size_t n) {
  std::size_t len = encode(n).size();
  return len == 0 ? 1 : len;
}

}  // namespace tropic
