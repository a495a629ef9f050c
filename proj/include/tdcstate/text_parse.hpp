#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <type_traits>

#include "tdcstate/error.hpp"

namespace tdcstate {

// Whole-string integer parse for the file readers. Throws InputError naming
// `what` on anything but a complete in-range number.
template <typename T>
T parse_integer(std::string_view text, std::string_view what) {
  static_assert(std::is_integral_v<T>);
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  T value{};
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || p != end)
    throw InputError(std::string(what) + ": '" + std::string(text) + "' is not a valid integer");
  return value;
}

}  // namespace tdcstate
