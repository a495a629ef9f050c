#include "tdcstate/raw_state.hpp"

#include <bit>

#include "tdcstate/error.hpp"

namespace tdcstate {

RawState::RawState(std::size_t n_taps, bool inverted)
    : words_((n_taps + 63) / 64, 0), n_taps_(n_taps), inverted_(inverted) {}

void RawState::set(std::size_t tap, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (tap % 64);
  if (value)
    words_[tap / 64] |= mask;
  else
    words_[tap / 64] &= ~mask;
}

std::size_t RawState::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::string RawState::to_hex() const {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  const std::size_t n_digits = (n_taps_ + 3) / 4;
  std::string out(n_digits, '0');
  for (std::size_t d = 0; d < n_digits; ++d) {
    const std::size_t base = d * 4;
    unsigned nibble = 0;
    for (std::size_t b = 0; b < 4 && base + b < n_taps_; ++b)
      nibble |= static_cast<unsigned>(test(base + b)) << b;
    out[n_digits - 1 - d] = kDigits[nibble];
  }
  return out;
}

RawState RawState::from_hex(std::string_view hex, std::size_t n_taps, bool inverted) {
  if (hex.size() != (n_taps + 3) / 4)
    throw InputError("state hex '" + std::string(hex) + "' does not match " +
                     std::to_string(n_taps) + " taps");
  RawState s(n_taps, inverted);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[hex.size() - 1 - d];
    unsigned nibble;
    if (c >= '0' && c <= '9')
      nibble = static_cast<unsigned>(c - '0');
    else if (c >= 'A' && c <= 'F')
      nibble = static_cast<unsigned>(c - 'A' + 10);
    else if (c >= 'a' && c <= 'f')
      nibble = static_cast<unsigned>(c - 'a' + 10);
    else
      throw InputError("state hex '" + std::string(hex) + "' has a non-hex digit");
    for (std::size_t b = 0; b < 4; ++b) {
      if (!((nibble >> b) & 1U)) continue;
      if (d * 4 + b >= n_taps)
        throw InputError("state hex '" + std::string(hex) + "' sets a bit beyond the last tap");
      s.set(d * 4 + b);
    }
  }
  return s;
}

std::string RawState::to_bits() const {
  std::string out;
  out.reserve(n_taps_);
  for (std::size_t i = n_taps_; i-- > 0;) out.push_back(test(i) ? '1' : '0');
  return out;
}

std::strong_ordering RawState::compare_bits(const RawState& a, const RawState& b) {
  if (auto c = a.n_taps_ <=> b.n_taps_; c != 0) return c;
  for (std::size_t w = a.words_.size(); w-- > 0;) {
    if (a.words_[w] != b.words_[w]) return a.words_[w] <=> b.words_[w];
  }
  return a.inverted_ <=> b.inverted_;
}

std::size_t RawStateHash::operator()(const RawState& s) const noexcept {
  // splitmix64 finalizer over the words
  std::uint64_t h = 0x9E3779B97F4A7C15ULL ^ s.size() ^ (s.inverted() ? 0xA5A5A5A5ULL : 0);
  for (auto w : s.words()) {
    std::uint64_t z = h + w + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    h = z ^ (z >> 31);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace tdcstate
