#include "tdcstate/cli/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/seeding.hpp"

namespace tdcstate::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': expected an unsigned integer, got '" +
                      std::string(v) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true or false, got '" +
                    std::string(v) + "'");
}

TimeFs parse_time(std::string_view key, std::string_view v) {
  try {
    return ps_to_fs(v);
  } catch (const InputError& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field u64_field(const char* key, T RunConfig::*member) {
  return {key,
          [=](RunConfig& c, std::string_view v) { c.*member = static_cast<T>(parse_u64(key, v)); },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field time_field(const char* key, TimeFs RunConfig::*member) {
  return {key, [=](RunConfig& c, std::string_view v) { c.*member = parse_time(key, v); },
          [=](const RunConfig& c) { return format_ps(c.*member); }};
}

Field bool_field(const char* key, bool RunConfig::*member) {
  return {key, [=](RunConfig& c, std::string_view v) { c.*member = parse_bool(key, v); },
          [=](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

Field clock_field(const char* key, TimeFs ClockConfig::*member) {
  return {key, [=](RunConfig& c, std::string_view v) { c.clock.*member = parse_time(key, v); },
          [=](const RunConfig& c) { return format_ps(c.clock.*member); }};
}

Field model_time_field(const char* key, TimeFs ModelSpec::*member) {
  return {key, [=](RunConfig& c, std::string_view v) { c.model.*member = parse_time(key, v); },
          [=](const RunConfig& c) { return format_ps(c.model.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      u64_field("seed", &RunConfig::master_seed),
      clock_field("clock.start_period_ps", &ClockConfig::start_period),
      clock_field("clock.half_period_ps", &ClockConfig::half_period),
      clock_field("clock.stop_period_ps", &ClockConfig::stop_period),
      clock_field("clock.ifps_step_ps", &ClockConfig::ifps_step),
      {"model.tap_file", [](RunConfig& c, std::string_view v) { c.model.tap_file = v; },
       [](const RunConfig& c) { return c.model.tap_file; }},
      {"model.n_clb",
       [](RunConfig& c, std::string_view v) { c.model.n_clb = parse_u64("model.n_clb", v); },
       [](const RunConfig& c) { return std::to_string(c.model.n_clb); }},
      model_time_field("model.nominal_tap_ps", &ModelSpec::nominal_tap),
      model_time_field("model.mismatch_sigma_ps", &ModelSpec::mismatch_sigma),
      model_time_field("model.skew_sigma_ps", &ModelSpec::skew_sigma),
      {"model.seed",
       [](RunConfig& c, std::string_view v) { c.model.seed = parse_u64("model.seed", v); },
       [](const RunConfig& c) { return std::to_string(c.model.seed); }},
      u64_field("collect.events", &RunConfig::collect_events),
      u64_field("collect.discovery_block", &RunConfig::discovery_block),
      time_field("configure.ref_min_ps", &RunConfig::ref_min),
      time_field("configure.ref_max_ps", &RunConfig::ref_max),
      time_field("configure.ref_step_ps", &RunConfig::ref_step),
      bool_field("configure.second_pass_fixed_point", &RunConfig::second_pass_fixed_point),
      u64_field("configure.oracle_max_states", &RunConfig::oracle_max_states),
      {"lsb_targets_ps",
       [](RunConfig& c, std::string_view v) {
         try {
           c.lsb_targets = parse_lsb_list(v);
         } catch (const InputError& e) {
           throw ConfigError(std::string("config key 'lsb_targets_ps': ") + e.what());
         }
       },
       [](const RunConfig& c) {
         std::string out;
         for (const auto& t : c.lsb_targets) out += (out.empty() ? "" : ",") + format_ps(t);
         return out;
       }},
      u64_field("density.events", &RunConfig::density_events),
      u64_field("density.events_per_window", &RunConfig::events_per_window),
      time_field("density.event_interval_ps", &RunConfig::density_event_interval),
      time_field("density.short_range_ps", &RunConfig::short_range),
      time_field("density.long_range_ps", &RunConfig::long_range),
      time_field("density.long_range_fallback_ps", &RunConfig::long_range_fallback),
      time_field("interval.step_ps", &RunConfig::interval_step),
      time_field("interval.range_ps", &RunConfig::interval_range),
      u64_field("interval.events_per_step", &RunConfig::interval_events_per_step),
      time_field("interval.jitter_sigma_ps", &RunConfig::interval_jitter),
      time_field("interval.event_interval_ps", &RunConfig::interval_event_interval),
      bool_field("encode.nearest_seq_fallback", &RunConfig::nearest_seq_fallback),
      {"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
       nullptr},
  };
  return table;
}

}  // namespace

std::filesystem::path RunConfig::tap_file_path() const {
  std::filesystem::path p(model.tap_file);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

void RunConfig::validate() const {
  clock.validate();
  if (model.tap_file.empty() && model.n_clb == 0) throw ConfigError("model.n_clb must be >= 1");
  if (ref_min.value <= 0 || ref_step.value <= 0 || ref_max < ref_min)
    throw ConfigError("configure: need 0 < ref_min_ps <= ref_max_ps and ref_step_ps > 0");
  if (lsb_targets.empty()) throw ConfigError("lsb_targets_ps must name at least one target");
  for (const auto& t : lsb_targets)
    if (t.value <= 0) throw ConfigError("lsb targets must be positive");
  if (discovery_block == 0) throw ConfigError("collect.discovery_block must be >= 1");
  if (events_per_window == 0) throw ConfigError("density.events_per_window must be >= 1");
  if (density_event_interval.value <= 0 || interval_event_interval.value <= 0)
    throw ConfigError("event intervals must be positive");
  if (short_range.value <= 0 || long_range.value <= 0 || long_range_fallback.value <= 0)
    throw ConfigError("density ranges must be positive");
  if (interval_step.value <= 0 || interval_range.value <= 0)
    throw ConfigError("interval step and range must be positive");
  if (interval_jitter.value < 0) throw ConfigError("interval.jitter_sigma_ps must be >= 0");
  if (model.mismatch_sigma.value < 0 || model.skew_sigma.value < 0)
    throw ConfigError("model sigmas must be >= 0");
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig config;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    const Field* field = nullptr;
    for (const auto& f : fields())
      if (key == f.key) field = &f;
    if (!field)
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                        "' given twice");
    field->set(config, value);
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  RunConfig config = parse_run_config(in);
  config.base_dir = path.parent_path();
  return config;
}

std::string canonical_text(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& f : fields())
    if (f.get) out << f.key << " = " << f.get(config) << '\n';
  return out.str();
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(canonical_text(config)); }

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

std::vector<TimeFs> parse_lsb_list(std::string_view text) {
  std::vector<TimeFs> out;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (item.empty()) throw InputError("empty entry in lsb list");
    out.push_back(ps_to_fs(item));
    if (out.back().value <= 0) throw InputError("lsb targets must be positive");
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string target_label(TimeFs target) { return "lsb_" + format_ps(target); }

}  // namespace tdcstate::cli
