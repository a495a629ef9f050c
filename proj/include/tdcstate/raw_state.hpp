#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tdcstate {

// Bit pattern latched by the tap samplers for one event. Bit i is tap i.
//
// Phases in the second half of the Start cycle see a falling edge travelling
// down the line; those patterns are stored after the XOR with the edge
// polarity so both halves look like thermometer codes, and `inverted()`
// records which edge was in flight.
class RawState {
 public:
  RawState() = default;
  explicit RawState(std::size_t n_taps, bool inverted = false);

  std::size_t size() const { return n_taps_; }
  bool inverted() const { return inverted_; }

  bool test(std::size_t tap) const { return (words_[tap / 64] >> (tap % 64)) & 1U; }
  void set(std::size_t tap, bool value = true);

  std::size_t popcount() const;

  // Uppercase hex, most-significant tap first, ceil(n/4) digits.
  std::string to_hex() const;
  static RawState from_hex(std::string_view hex, std::size_t n_taps, bool inverted);

  // Bit string "D0 D1 ..." is awkward to read; this prints tap n-1 first.
  std::string to_bits() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const RawState&) const = default;

  // Lexicographic over taps, most-significant tap first; polarity last.
  static std::strong_ordering compare_bits(const RawState& a, const RawState& b);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t n_taps_ = 0;
  bool inverted_ = false;
};

struct RawStateHash {
  std::size_t operator()(const RawState& s) const noexcept;
};

}  // namespace tdcstate
