#include "tdcstate/bin_config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/text_parse.hpp"

namespace tdcstate {

namespace {

std::int64_t span_sum(std::span<const TimeFs> widths, std::size_t begin, std::size_t end) {
  std::int64_t s = 0;
  for (std::size_t i = begin; i < end; ++i) s += widths[i].value;
  return s;
}

void require_widths(std::span<const TimeFs> widths) {
  if (widths.empty()) throw ContractViolation("bin configuration needs at least one state width");
  for (const auto& w : widths)
    if (w.value <= 0) throw ContractViolation("state widths must be positive");
}

}  // namespace

std::size_t BinConfiguration::group_of(std::size_t index) const {
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), index);
  return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

void validate_boundaries(std::span<const std::size_t> boundaries, std::size_t n_states) {
  if (boundaries.size() < 2) throw InputError("configuration needs at least one group");
  if (boundaries.front() != 0 || boundaries.back() != n_states)
    throw InputError("configuration boundaries must run from 0 to " + std::to_string(n_states));
  for (std::size_t g = 0; g + 1 < boundaries.size(); ++g)
    if (boundaries[g] >= boundaries[g + 1])
      throw InputError("configuration group " + std::to_string(g) + " is empty or out of order");
}

std::vector<std::size_t> first_pass(std::span<const TimeFs> widths, TimeFs ref) {
  require_widths(widths);
  if (ref.value <= 0) throw ContractViolation("first_pass: ref must be positive");

  std::vector<std::size_t> boundaries{0};
  const std::int64_t target = ref.value;
  std::size_t m = 0;
  std::int64_t sum = widths[0].value;  // sum of s[m..n]
  for (std::size_t n = 0; n + 1 < widths.size(); ++n) {
    const std::int64_t extended = sum + widths[n + 1].value;
    const std::int64_t fp = std::llabs(target - extended) - std::llabs(target - sum);
    if (fp > 0) {
      m = n + 1;
      boundaries.push_back(m);
      sum = widths[m].value;
    } else {
      sum = extended;
    }
  }
  boundaries.push_back(widths.size());
  return boundaries;
}

std::vector<std::size_t> second_pass(std::span<const TimeFs> widths,
                                     std::span<const std::size_t> boundaries, bool fixed_point,
                                     SecondPassStats* stats) {
  require_widths(widths);
  validate_boundaries(boundaries, widths.size());
  std::vector<std::size_t> b(boundaries.begin(), boundaries.end());
  SecondPassStats local;

  bool moved = true;
  while (moved) {
    moved = false;
    ++local.sweeps;
    for (std::size_t g = 1; g + 1 < b.size(); ++g) {
      // left = s[m..n], right = s[n+1 .. n+k]
      const std::size_t first_right = b[g];
      const std::size_t end_right = b[g + 1];
      if (end_right - first_right < 2) continue;  // would empty the right group
      const std::int64_t left = span_sum(widths, b[g - 1], first_right);
      const std::int64_t right = span_sum(widths, first_right, end_right);
      const std::int64_t shifted = widths[first_right].value;
      const std::int64_t sp =
          std::llabs(left - right) - std::llabs((left + shifted) - (right - shifted));
      if (sp > 0) {
        ++b[g];
        ++local.moves;
        moved = true;
      }
    }
    if (!fixed_point) break;
  }
  if (stats) *stats = local;
  return b;
}

double rse(std::span<const TimeFs> group_widths) {
  const std::size_t n = group_widths.size();
  if (n < 2) throw ContractViolation("rse needs at least two groups");
  __int128 sum = 0;
  __int128 sum_sq = 0;
  for (const auto& w : group_widths) {
    sum += w.value;
    sum_sq += static_cast<__int128>(w.value) * w.value;
  }
  if (sum <= 0) throw ContractViolation("rse: group widths must have a positive mean");
  // sum of squared deviations = (n*sum_sq - sum^2) / n, exact in integers
  const __int128 scaled = static_cast<__int128>(n) * sum_sq - sum * sum;
  const long double var = static_cast<long double>(scaled) / (static_cast<long double>(n) * (n - 1));
  const long double mean = static_cast<long double>(sum) / n;
  return static_cast<double>(std::sqrt(var) / mean);
}

std::vector<TimeFs> group_widths(std::span<const TimeFs> widths,
                                 std::span<const std::size_t> boundaries) {
  validate_boundaries(boundaries, widths.size());
  std::vector<TimeFs> out;
  out.reserve(boundaries.size() - 1);
  for (std::size_t g = 0; g + 1 < boundaries.size(); ++g)
    out.push_back(TimeFs{span_sum(widths, boundaries[g], boundaries[g + 1])});
  return out;
}

BinConfiguration make_configuration(std::span<const TimeFs> widths,
                                    std::vector<std::size_t> boundaries, TimeFs ref) {
  BinConfiguration c;
  c.group_widths = group_widths(widths, boundaries);
  c.boundaries = std::move(boundaries);
  c.covered_range = TimeFs{span_sum(widths, 0, widths.size())};
  c.lsb = TimeFs{div_round_half_even(c.covered_range.value,
                                     static_cast<std::int64_t>(c.group_widths.size()))};
  c.rse = c.group_widths.size() < 2 ? 0.0 : rse(c.group_widths);
  c.ref_used = ref;
  return c;
}

BinConfiguration configure(std::span<const TimeFs> widths, TimeFs ref,
                           const ConfigureOptions& options) {
  auto coarse = first_pass(widths, ref);
  auto fine = second_pass(widths, coarse, options.second_pass_fixed_point);
  return make_configuration(widths, std::move(fine), ref);
}

SweepResult sweep(std::span<const TimeFs> widths, TimeFs ref_min, TimeFs ref_max, TimeFs ref_step,
                  const ConfigureOptions& options) {
  if (ref_min.value <= 0 || ref_step.value <= 0 || ref_max < ref_min)
    throw ConfigError("sweep: need 0 < ref_min <= ref_max and ref_step > 0");

  SweepResult result;
  std::map<std::vector<std::size_t>, std::size_t> seen;
  for (TimeFs ref = ref_min; ref <= ref_max; ref += ref_step) {
    auto coarse = first_pass(widths, ref);
    auto fine = second_pass(widths, coarse, options.second_pass_fixed_point);
    auto [it, inserted] = seen.try_emplace(fine, result.configs.size());
    if (inserted) result.configs.push_back(make_configuration(widths, std::move(fine), ref));
    result.points.push_back({ref, it->second});
  }
  for (std::size_t i = 0; i < result.configs.size(); ++i) {
    const auto n = result.configs[i].n_groups();
    auto [it, inserted] = result.best_by_n.try_emplace(n, i);
    if (!inserted && result.configs[i].rse < result.configs[it->second].rse) it->second = i;
  }
  return result;
}

const BinConfiguration& select_for_lsb(const SweepResult& result, TimeFs target) {
  if (result.best_by_n.empty()) throw InputError("sweep produced no configurations");
  const BinConfiguration* best = nullptr;
  std::int64_t best_distance = 0;
  for (const auto& [n, idx] : result.best_by_n) {
    const auto& c = result.configs[idx];
    const std::int64_t d = std::llabs(c.lsb.value - target.value);
    if (!best || d < best_distance || (d == best_distance && c.lsb < best->lsb)) {
      best = &c;
      best_distance = d;
    }
  }
  return *best;
}

std::map<std::size_t, double> optimal_rse_by_n(std::span<const TimeFs> widths) {
  require_widths(widths);
  const std::size_t n = widths.size();
  std::vector<std::int64_t> prefix(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + widths[i].value;
  const std::int64_t total = prefix[n];

  constexpr __int128 kInf = static_cast<__int128>(1) << 120;
  // best[j] = least sum of squared group widths splitting states [0, j) into
  // the current number of groups
  std::vector<__int128> best(n + 1, kInf), next(n + 1, kInf);
  for (std::size_t j = 1; j <= n; ++j) {
    const __int128 w = prefix[j];
    best[j] = w * w;
  }
  std::map<std::size_t, double> out;
  out[1] = 0.0;
  for (std::size_t groups = 2; groups <= n; ++groups) {
    std::fill(next.begin(), next.end(), kInf);
    for (std::size_t j = groups; j <= n; ++j)
      for (std::size_t i = groups - 1; i < j; ++i) {
        if (best[i] == kInf) continue;
        const __int128 w = prefix[j] - prefix[i];
        next[j] = std::min(next[j], best[i] + w * w);
      }
    std::swap(best, next);
    const auto g = static_cast<__int128>(groups);
    const __int128 scaled = g * best[n] - static_cast<__int128>(total) * total;
    const long double var = static_cast<long double>(scaled) / (static_cast<long double>(groups) * (groups - 1));
    out[groups] = static_cast<double>(std::sqrt(var) / (static_cast<long double>(total) / groups));
  }
  return out;
}

PredictedLinearity predict_linearity(const BinConfiguration& config) {
  const auto n = static_cast<std::int64_t>(config.n_groups());
  if (n == 0) throw ContractViolation("predict_linearity: empty configuration");
  std::int64_t total = 0;
  for (const auto& w : config.group_widths) total += w.value;
  if (total <= 0) throw ContractViolation("predict_linearity: zero total width");

  PredictedLinearity out;
  out.dnl.reserve(config.n_groups());
  out.inl.reserve(config.n_groups());
  const auto denom = static_cast<double>(total);
  std::int64_t prefix = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t w = config.group_widths[static_cast<std::size_t>(i)].value;
    prefix += w;
    out.dnl.push_back(static_cast<double>(n * w - total) / denom);
    out.inl.push_back(static_cast<double>(n * prefix - (i + 1) * total) / denom);
  }
  return out;
}

void write_configurations(std::ostream& out,
                          const std::vector<std::pair<std::string, const BinConfiguration*>>& rows,
                          const std::vector<std::string>& provenance) {
  out << "# bin configurations\n";
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "label,ref_fs,n,lsb_fs,rse,boundaries,group_widths_fs\n";
  for (const auto& [label, c] : rows) {
    out << label << ',' << c->ref_used.value << ',' << c->n_groups() << ',' << c->lsb.value << ','
        << std::setprecision(10) << c->rse << ',';
    for (std::size_t i = 0; i < c->boundaries.size(); ++i)
      out << (i ? " " : "") << c->boundaries[i];
    out << ',';
    for (std::size_t i = 0; i < c->group_widths.size(); ++i)
      out << (i ? " " : "") << c->group_widths[i].value;
    out << '\n';
  }
}

std::vector<std::pair<std::string, BinConfiguration>> read_configurations(std::istream& in) {
  std::vector<std::pair<std::string, BinConfiguration>> rows;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "label,ref_fs,n,lsb_fs,rse,boundaries,group_widths_fs")
        throw InputError("configuration line " + std::to_string(line_no) + ": expected header");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string label, ref, n, lsb, rse_text, bounds, widths;
    if (!std::getline(fields, label, ',') || !std::getline(fields, ref, ',') ||
        !std::getline(fields, n, ',') || !std::getline(fields, lsb, ',') ||
        !std::getline(fields, rse_text, ',') || !std::getline(fields, bounds, ',') ||
        !std::getline(fields, widths))
      throw InputError("configuration line " + std::to_string(line_no) + ": malformed row");
    BinConfiguration c;
    c.ref_used = TimeFs{parse_integer<std::int64_t>(ref, "configuration ref_fs")};
    c.lsb = TimeFs{parse_integer<std::int64_t>(lsb, "configuration lsb_fs")};
    char* end = nullptr;
    c.rse = std::strtod(rse_text.c_str(), &end);
    if (rse_text.empty() || end != rse_text.c_str() + rse_text.size())
      throw InputError("configuration line " + std::to_string(line_no) + ": bad rse");
    std::istringstream bs(bounds);
    for (std::size_t v; bs >> v;) c.boundaries.push_back(v);
    std::istringstream ws(widths);
    for (long long v; ws >> v;) c.group_widths.push_back(TimeFs{v});
    if (c.boundaries.size() != c.group_widths.size() + 1 ||
        c.group_widths.size() != parse_integer<std::size_t>(n, "configuration n"))
      throw InputError("configuration line " + std::to_string(line_no) + ": inconsistent sizes");
    validate_boundaries(c.boundaries, c.boundaries.back());
    for (const auto& w : c.group_widths) c.covered_range += w;
    rows.emplace_back(std::move(label), std::move(c));
  }
  if (!header_seen) throw InputError("configuration file has no header");
  return rows;
}

}  // namespace tdcstate
