#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tropic {

// A finite word over {0,1}. Index 0 is the front symbol (the one hd sees);
// numeric decoding reads the word most-significant-bit first.
class Word {
 public:
  Word() = default;

  static Word from_bits(std::string_view bits) {
    for (char c : bits) {
      if (c != '0' && c != '1') throw std::invalid_argument("word symbol must be 0 or 1");
    }
    return Word(std::string(bits));
  }

  static Word zeros(std::size_t n) { return Word(std::string(n, '0')); }

  // Unchecked construction for callers that already hold valid bits.
  static Word raw(std::string bits) { return Word(std::move(bits)); }

  const std::string& bits() const { return bits_; }
  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  char symbol_at(std::size_t i) const { return bits_[i]; }

  bool operator==(const Word&) const = default;
  auto operator<=>(const Word&) const = default;

 private:
  explicit Word(std::string b) : bits_(std::move(b)) {}
  std::string bits_;
};

inline Word head(const Word& w) {
  if (w.empty()) return Word();
  return Word::raw(std::string(1, w.bits().front()));
}

inline Word tail(const Word& w) {
  if (w.empty()) return Word();
  return Word::raw(w.bits().substr(1));
}

inline Word prepend(char bit, const Word& w) {
  std::string b;
  b.reserve(w.size() + 1);
  b.push_back(bit);
  b += w.bits();
  return Word::raw(std::move(b));
}

// Exact numeric successor on the binary reading of the word (carry walk from
// the least-significant end). Leading zeros are preserved: |succ(w)| <= |w|+1.
Word numeric_succ(const Word& w);

// Strip leading zeros; the empty word encodes 0.
Word canonical(const Word& w);

inline bool is_numeric_zero(const Word& w) {
  for (char c : w.bits())
    if (c == '1') return false;
  return true;
}

// Exact predecessor of a canonical, nonzero word.
Word numeric_pred_canonical(const Word& w);

Word encode(std::uint64_t n);

// Total; saturates at 2^62 for words with more than 62 significant bits.
std::uint64_t decode(const Word& w);

constexpr std::uint64_t kDecodeSaturation = (std::uint64_t{1} << 62);

// Tape length of the log-size model for input length n: max(1, |encode(n)|).
std::size_t pointer_budget(std::size_t n);

}  // namespace tropic
