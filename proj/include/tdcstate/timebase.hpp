#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tdcstate {

// Signed femtosecond count. Every stored time in the toolkit is one of these;
// floating point only shows up in derived statistics.
struct TimeFs {
  std::int64_t value = 0;

  constexpr TimeFs() = default;
  constexpr explicit TimeFs(std::int64_t fs) : value(fs) {}

  constexpr auto operator<=>(const TimeFs&) const = default;

  constexpr TimeFs& operator+=(TimeFs o) {
    value += o.value;
    return *this;
  }
  constexpr TimeFs& operator-=(TimeFs o) {
    value -= o.value;
    return *this;
  }
  friend constexpr TimeFs operator+(TimeFs a, TimeFs b) { return TimeFs{a.value + b.value}; }
  friend constexpr TimeFs operator-(TimeFs a, TimeFs b) { return TimeFs{a.value - b.value}; }
  friend constexpr TimeFs operator-(TimeFs a) { return TimeFs{-a.value}; }
  friend constexpr TimeFs operator*(TimeFs a, std::int64_t k) { return TimeFs{a.value * k}; }
  friend constexpr TimeFs operator*(std::int64_t k, TimeFs a) { return TimeFs{a.value * k}; }
};

namespace literals {
constexpr TimeFs operator""_fs(unsigned long long v) { return TimeFs{static_cast<std::int64_t>(v)}; }
constexpr TimeFs operator""_ps(unsigned long long v) { return TimeFs{static_cast<std::int64_t>(v) * 1000}; }
}  // namespace literals

// Integer division rounded to nearest, ties to even. den must be > 0.
std::int64_t div_round_half_even(std::int64_t num, std::int64_t den);

// Parses a decimal picosecond value ("833.5", "-14.800", "0") into exact
// femtoseconds. Throws InputError on malformed text or more than three
// fractional digits.
TimeFs ps_to_fs(std::string_view ps);

// Exact decimal picoseconds with exactly three fractional digits ("833.500").
std::string format_ps(TimeFs t);

// Whole picoseconds, round-half-even.
std::int64_t to_ps_rounded(TimeFs t);

inline double to_ps(TimeFs t) { return static_cast<double>(t.value) / 1000.0; }

// Clock parameters of the converter. The Start clock period is the fine-code
// range; the delay line only has to span half of it.
struct ClockConfig {
  TimeFs start_period{1'667'000};
  TimeFs half_period{833'500};
  TimeFs stop_period{10'000'000};
  TimeFs ifps_step{14'800};

  // Throws ConfigError unless all fields are positive and
  // half_period * 2 == start_period.
  void validate() const;
};

}  // namespace tdcstate
