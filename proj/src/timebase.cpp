#include "tdcstate/timebase.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>

#include "tdcstate/error.hpp"

namespace tdcstate {

std::int64_t div_round_half_even(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw ContractViolation("div_round_half_even: denominator must be positive");
  std::int64_t q = num / den;
  std::int64_t r = num % den;
  if (r < 0) {  // floor semantics
    r += den;
    q -= 1;
  }
  const std::int64_t twice = 2 * r;
  if (twice > den || (twice == den && (q % 2 != 0))) ++q;
  return q;
}

TimeFs ps_to_fs(std::string_view ps) {
  const std::string text(ps);
  auto fail = [&](const char* why) {
    return InputError("invalid picosecond value '" + text + "': " + why);
  };
  if (ps.empty()) throw fail("empty");

  bool negative = false;
  if (ps.front() == '-' || ps.front() == '+') {
    negative = ps.front() == '-';
    ps.remove_prefix(1);
  }
  const auto dot = ps.find('.');
  std::string_view whole = ps.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : ps.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail("no digits");
  if (frac.size() > 3) throw fail("more than 3 fractional digits would lose precision");

  auto all_digits = [](std::string_view s) {
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (!all_digits(whole) || !all_digits(frac)) throw fail("not a decimal number");

  std::int64_t w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size()) throw fail("out of range");
  }
  if (w > (std::numeric_limits<std::int64_t>::max() - 999) / 1000) throw fail("out of range");
  std::int64_t f = 0;
  for (std::size_t i = 0; i < 3; ++i) f = f * 10 + (i < frac.size() ? frac[i] - '0' : 0);

  const std::int64_t fs = w * 1000 + f;
  return TimeFs{negative ? -fs : fs};
}

std::string format_ps(TimeFs t) {
  const bool negative = t.value < 0;
  const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(t.value + 1)) + 1
                                     : static_cast<std::uint64_t>(t.value);
  std::string frac = std::to_string(mag % 1000);
  frac.insert(0, 3 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(mag / 1000) + "." + frac;
}

std::int64_t to_ps_rounded(TimeFs t) { return div_round_half_even(t.value, 1000); }

void ClockConfig::validate() const {
  if (start_period.value <= 0 || half_period.value <= 0 || stop_period.value <= 0 ||
      ifps_step.value <= 0)
    throw ConfigError("clock: all periods and steps must be strictly positive");
  if (half_period * 2 != start_period)
    throw ConfigError("clock: half_period * 2 must equal start_period (" +
                      format_ps(half_period) + " ps * 2 != " + format_ps(start_period) + " ps)");
}

}  // namespace tdcstate
