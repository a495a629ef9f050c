#include "tdcstate/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdcstate/analysis.hpp"
#include "tdcstate/error.hpp"
#include "tdcstate/seeding.hpp"
#include "tdcstate/text_parse.hpp"

namespace tdcstate::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string fmt(double v, int precision = 9) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

fs::path out_path(const RunConfig& c, const std::string& name) { return c.output_dir / name; }

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed for " + path.string());
}

std::ifstream open_input(const fs::path& path, const char* stage_hint) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("missing " + path.filename().string() + " in " +
                     path.parent_path().string() + " (run '" + stage_hint + "' first)");
  return in;
}

std::uint64_t collect_seed(const RunConfig& c) { return derive_seed(c.master_seed, "collect"); }
std::uint64_t density_seed(const RunConfig& c, std::size_t target, bool long_range) {
  return derive_seed(c.master_seed, "density", 2 * target + (long_range ? 1 : 0));
}
std::uint64_t interval_seed(const RunConfig& c, std::size_t target) {
  return derive_seed(c.master_seed, "interval", target);
}

// Provenance lines for text outputs; write_* helpers prefix them with "# ".
std::vector<std::string> provenance(const RunConfig& c, const std::string& stage,
                                    std::optional<std::uint64_t> stream_seed = std::nullopt) {
  std::vector<std::string> lines{
      "tdcstate " + std::string(kToolVersion) + " stage=" + stage,
      "config_hash=" + hex64(config_hash(c)) + " master_seed=" + std::to_string(c.master_seed) +
          " model_seed=" + std::to_string(c.model.seed)};
  if (stream_seed) lines.back() += " stream_seed=" + std::to_string(*stream_seed);
  return lines;
}

std::string provenance_block(const RunConfig& c, const std::string& stage,
                             std::optional<std::uint64_t> stream_seed = std::nullopt) {
  std::string out;
  for (const auto& line : provenance(c, stage, stream_seed)) out += "# " + line + "\n";
  return out;
}

Json provenance_json(const RunConfig& c, const std::string& stage) {
  return Json{{"tool_version", kToolVersion},
              {"stage", stage},
              {"config_hash", hex64(config_hash(c))},
              {"master_seed", c.master_seed},
              {"model_seed", c.model.seed}};
}

DelayLineModel make_model(const RunConfig& c) {
  if (c.model.tap_file.empty())
    return build_model(c.model.n_clb, c.model.nominal_tap, c.model.mismatch_sigma,
                       c.model.skew_sigma, c.model.seed, c.clock);
  std::ifstream in(c.tap_file_path(), std::ios::binary);
  if (!in) throw InputError("model file unreadable: " + c.tap_file_path().string());
  return read_tap_file(in, c.clock);
}

DelayLineModel load_model(const RunConfig& c) {
  auto in = open_input(out_path(c, files::model), "collect");
  return read_tap_file(in, c.clock);
}

StateCatalog load_catalog(const RunConfig& c) {
  auto in = open_input(out_path(c, files::catalog), "collect");
  return read_catalog(in);
}

std::map<std::string, BinConfiguration> load_selected(const RunConfig& c) {
  auto in = open_input(out_path(c, files::selected), "configure");
  std::map<std::string, BinConfiguration> out;
  for (auto& [label, config] : read_configurations(in)) out.emplace(label, std::move(config));
  return out;
}

std::string encoder_file(const std::string& label) { return "encoder_" + label + ".txt"; }
std::string density_file(const std::string& label, bool long_range) {
  return "density_" + label + (long_range ? "_long.csv" : "_short.csv");
}
std::string interval_file(const std::string& label) { return "interval_" + label + ".csv"; }

// One target's inputs for the measurement stages, with the cross checks that
// catch files from different runs.
struct TargetSetup {
  std::string label;
  BinConfiguration config;
  StateEncoder encoder;
};

std::vector<TargetSetup> load_targets(const RunConfig& c, const DelayLineModel& model,
                                      const StateCatalog& catalog) {
  const auto selected = load_selected(c);
  std::vector<TargetSetup> out;
  for (const auto& target : c.lsb_targets) {
    TargetSetup t;
    t.label = target_label(target);
    auto it = selected.find(t.label);
    if (it == selected.end())
      throw InputError("no selected configuration for " + t.label + " (rerun 'configure')");
    t.config = it->second;
    auto in = open_input(out_path(c, encoder_file(t.label)), "configure");
    t.encoder = read_encoder(in);
    if (t.encoder.n_taps() != model.n_taps() || t.encoder.size() != catalog.size() ||
        t.encoder.n_groups() != t.config.n_groups())
      throw InputError("encoder/catalog mismatch for " + t.label + ": encoder has " +
                       std::to_string(t.encoder.size()) + " states over " +
                       std::to_string(t.encoder.n_taps()) + " taps in " +
                       std::to_string(t.encoder.n_groups()) + " groups; catalog has " +
                       std::to_string(catalog.size()) + " states, model " +
                       std::to_string(model.n_taps()) + " taps, configuration " +
                       std::to_string(t.config.n_groups()) + " groups");
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<double, double> min_max(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

// --- small CSV reader for the report stage --------------------------------

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name, const fs::path& path) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(path.filename().string() + ": no column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_table(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (t.header.empty())
      t.header = split_csv(line);
    else
      t.rows.push_back(split_csv(line));
  }
  return t;
}

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_collect(const RunConfig& config, std::ostream& log) {
  config.validate();
  const DelayLineModel model = make_model(config);
  const std::uint64_t seed = collect_seed(config);
  const CollectionResult result =
      collect_states(model, config.collect_events, seed, config.discovery_block);
  const StateCatalog& catalog = result.catalog;

  std::ostringstream model_text, catalog_text;
  write_tap_file(model_text, model, provenance(config, "collect"));
  write_catalog(catalog_text, catalog, provenance(config, "collect", seed));
  write_text(out_path(config, files::model), model_text.str());
  write_text(out_path(config, files::catalog), catalog_text.str());

  std::string discovery = provenance_block(config, "collect", seed);
  discovery += "block,events,new_states,distinct_states\n";
  std::uint64_t distinct = 0;
  std::size_t last_new = 0;
  for (std::size_t b = 0; b < result.discovery_curve.size(); ++b) {
    distinct += result.discovery_curve[b];
    if (result.discovery_curve[b] > 0) last_new = b;
    const std::uint64_t events =
        std::min<std::uint64_t>((b + 1) * config.discovery_block, config.collect_events);
    discovery += std::to_string(b) + "," + std::to_string(events) + "," +
                 std::to_string(result.discovery_curve[b]) + "," + std::to_string(distinct) + "\n";
  }
  write_text(out_path(config, files::discovery), discovery);

  log << "collect: " << model.n_taps() << " taps, total delay " << format_ps(model.total_delay())
      << " ps, " << config.collect_events << " events\n";
  log << "collect: " << catalog.size() << " states (" << catalog.tie_count()
      << " sharing a seq), last new state in block " << last_new << " of "
      << result.discovery_curve.size() << "\n";
  log << "discovery (block: new / distinct):";
  std::uint64_t running = 0;
  for (std::size_t b = 0; b < result.discovery_curve.size(); ++b) {
    running += result.discovery_curve[b];
    if (result.discovery_curve[b] > 0) log << ' ' << b << ':' << result.discovery_curve[b] << '/' << running;
  }
  log << '\n';
}

void cmd_configure(const RunConfig& config, std::ostream& log) {
  config.validate();
  const StateCatalog catalog = load_catalog(config);
  if (!catalog.has_widths()) throw InputError("catalog missing widths");
  const auto widths = catalog.widths();
  ConfigureOptions options;
  options.second_pass_fixed_point = config.second_pass_fixed_point;
  const SweepResult result =
      sweep(widths, config.ref_min, config.ref_max, config.ref_step, options);

  std::vector<std::string> labels;
  std::vector<std::pair<std::string, const BinConfiguration*>> all_rows;
  for (std::size_t i = 0; i < result.configs.size(); ++i)
    labels.push_back("c" + std::to_string(i));
  for (std::size_t i = 0; i < result.configs.size(); ++i)
    all_rows.emplace_back(labels[i], &result.configs[i]);
  std::ostringstream configs_text;
  write_configurations(configs_text, all_rows, provenance(config, "configure"));
  write_text(out_path(config, files::configurations), configs_text.str());

  std::string sweep_text = provenance_block(config, "configure");
  sweep_text += "ref_fs,config,n,lsb_fs,rse\n";
  for (const auto& p : result.points) {
    const auto& c = result.configs[p.config];
    sweep_text += std::to_string(p.ref.value) + "," + labels[p.config] + "," +
                  std::to_string(c.n_groups()) + "," + std::to_string(c.lsb.value) + "," +
                  fmt(c.rse, 10) + "\n";
  }
  write_text(out_path(config, files::rse_sweep), sweep_text);

  std::optional<std::map<std::size_t, double>> optimum;
  if (catalog.size() <= config.oracle_max_states) optimum = optimal_rse_by_n(widths);
  std::string per_n = provenance_block(config, "configure");
  per_n += "n,lsb_fs,rse,config,ref_fs,optimal_rse,oracle_gap\n";
  for (const auto& [n, idx] : result.best_by_n) {
    const auto& c = result.configs[idx];
    per_n += std::to_string(n) + "," + std::to_string(c.lsb.value) + "," + fmt(c.rse, 10) + "," +
             labels[idx] + "," + std::to_string(c.ref_used.value) + ",";
    if (optimum) {
      const double best = optimum->at(n);
      per_n += fmt(best, 10) + "," + fmt(c.rse - best, 10);
    } else {
      per_n += ",";
    }
    per_n += "\n";
  }
  write_text(out_path(config, files::rse_per_n), per_n);

  std::vector<std::pair<std::string, const BinConfiguration*>> chosen;
  for (const auto& target : config.lsb_targets) {
    const auto& c = select_for_lsb(result, target);
    const std::string label = target_label(target);
    chosen.emplace_back(label, &c);
    const StateEncoder encoder = build_encoder(catalog, c);
    std::ostringstream enc_text;
    write_encoder(enc_text, encoder, provenance(config, "configure"));
    write_text(out_path(config, encoder_file(label)), enc_text.str());
    log << "configure: target " << format_ps(target) << " ps -> N=" << c.n_groups()
        << " lsb " << format_ps(c.lsb) << " ps rse " << fmt(c.rse, 4) << "\n";
  }
  std::ostringstream selected_text;
  write_configurations(selected_text, chosen, provenance(config, "configure"));
  write_text(out_path(config, files::selected), selected_text.str());
  log << "configure: " << result.points.size() << " reference widths, " << result.configs.size()
      << " distinct configurations, N from " << result.best_by_n.begin()->first << " to "
      << result.best_by_n.rbegin()->first << "\n";
}

namespace {

Json linearity_json(const LinearityReport& rep, const DensityRun& run, TimeFs range,
                    std::uint64_t seed) {
  const auto [dnl_lo, dnl_hi] = min_max(rep.dnl);
  const auto [inl_lo, inl_hi] = min_max(rep.inl);
  double dnl_sum = 0.0;
  for (double d : rep.dnl) dnl_sum += d;
  return Json{{"seed", seed},
              {"range_fs", range.value},
              {"n_bins", rep.counts.size()},
              {"events", rep.n_events},
              {"accepted", run.accepted},
              {"saturated", run.saturated},
              {"out_of_range", run.out_of_range},
              {"missing_codes", run.stats.missing_codes},
              {"substituted", run.stats.substituted},
              {"windows", run.snapshots.size()},
              {"empty_bin_fraction", rep.empty_bin_fraction},
              {"dnl_min", dnl_lo},
              {"dnl_max", dnl_hi},
              {"inl_min", inl_lo},
              {"inl_max", inl_hi},
              {"dnl_sum", dnl_sum},
              {"inl_last", rep.inl.empty() ? 0.0 : rep.inl.back()},
              {"warnings", rep.warnings}};
}

std::string linearity_csv(const RunConfig& c, const LinearityReport& rep, std::uint64_t seed) {
  std::string out = provenance_block(c, "density", seed);
  out += "bin,count,dnl,inl\n";
  for (std::size_t i = 0; i < rep.counts.size(); ++i)
    out += std::to_string(i) + "," + std::to_string(rep.counts[i]) + "," + fmt(rep.dnl[i]) + "," +
           fmt(rep.inl[i]) + "\n";
  return out;
}

}  // namespace

void cmd_density(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.density_events == 0) throw InputError("empty input: density.events is 0");
  const DelayLineModel model = load_model(config);
  const StateCatalog catalog = load_catalog(config);
  const auto targets = load_targets(config, model, catalog);
  EncodeOptions enc_opts;
  enc_opts.nearest_seq_fallback = config.nearest_seq_fallback;

  Json sections = Json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const TdcPipeline pipeline(model, t.encoder, enc_opts);
    const std::size_t n = t.config.n_groups();
    Json section{{"label", t.label},
                 {"target_fs", config.lsb_targets[i].value},
                 {"n_groups", n},
                 {"lsb_fs", t.config.lsb.value}};

    auto run_range = [&](TimeFs range, bool long_range) {
      DensityRunOptions opts;
      opts.events = config.density_events;
      opts.range = range;
      opts.events_per_window = config.events_per_window;
      opts.event_interval = config.density_event_interval;
      opts.seed = density_seed(config, i, long_range);
      DensityRun run = run_code_density(pipeline, opts);
      const std::size_t bins = bins_for_range(range, n, config.clock.start_period);
      LinearityReport rep = code_density(run.snapshots, bins, t.config.lsb);
      write_text(out_path(config, density_file(t.label, long_range)),
                 linearity_csv(config, rep, opts.seed));
      Json j = linearity_json(rep, run, range, opts.seed);
      return std::pair{std::move(rep), std::move(j)};
    };

    auto [short_rep, short_json] = run_range(config.short_range, false);
    if (short_rep.counts.size() == n) {
      const RseComparison cmp = compare_rse(t.config, short_rep);
      short_json["rse_predicted"] = cmp.predicted;
      short_json["rse_measured"] = cmp.measured;
      short_json["rse_deviation"] = cmp.deviation;
      short_json["rse_stat_error"] = cmp.stat_error;
    }
    section["short"] = short_json;
    log << "density: " << t.label << " N=" << n << " short: empty " << fmt(short_rep.empty_bin_fraction, 6)
        << ", dnl [" << fmt(short_json["dnl_min"].get<double>(), 3) << ", "
        << fmt(short_json["dnl_max"].get<double>(), 3) << "]\n";

    std::optional<TimeFs> long_range;
    for (TimeFs candidate : {config.long_range, config.long_range_fallback})
      if (!long_range &&
          static_cast<std::size_t>((static_cast<__int128>(candidate.value) * n +
                                    config.clock.start_period.value - 1) /
                                   config.clock.start_period.value) <= kMaxHistogramBins)
        long_range = candidate;
    if (long_range) {
      auto [long_rep, long_json] = run_range(*long_range, true);
      section["long"] = long_json;
      log << "density: " << t.label << " long " << format_ps(*long_range) << " ps: "
          << long_rep.counts.size() << " bins, empty " << fmt(long_rep.empty_bin_fraction, 6)
          << "\n";
    } else {
      section["long"] = nullptr;
      log << "density: " << t.label << " long range skipped, more than " << kMaxHistogramBins
          << " bins\n";
    }
    sections.push_back(std::move(section));
  }
  Json summary{{"provenance", provenance_json(config, "density")}, {"targets", sections}};
  write_text(out_path(config, files::density_summary), summary.dump(2) + "\n");
}

void cmd_interval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const DelayLineModel model = load_model(config);
  const StateCatalog catalog = load_catalog(config);
  const auto targets = load_targets(config, model, catalog);
  EncodeOptions enc_opts;
  enc_opts.nearest_seq_fallback = config.nearest_seq_fallback;

  Json sections = Json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    const TdcPipeline pipeline(model, t.encoder, enc_opts);
    SweepOptions opts;
    opts.step = config.interval_step;
    opts.range = config.interval_range;
    opts.events_per_step = config.interval_events_per_step;
    opts.jitter_sigma = config.interval_jitter;
    opts.event_interval = config.interval_event_interval;
    opts.seed = interval_seed(config, i);
    const SweepReport report = time_interval_sweep(pipeline, opts);

    std::string csv = provenance_block(config, "interval", opts.seed);
    csv += "step,input_fs,output_bin,residual,events,half_max_bins\n";
    for (std::size_t k = 0; k < report.steps.size(); ++k) {
      const auto& s = report.steps[k];
      csv += std::to_string(k) + "," + std::to_string(s.input.value) + ",";
      csv += s.output ? std::to_string(*s.output) + "," + fmt(s.residual) : std::string(",");
      csv += "," + std::to_string(s.events) + "," + std::to_string(s.half_max_bins) + "\n";
    }
    write_text(out_path(config, interval_file(t.label)), csv);

    Json section{{"label", t.label},
                 {"target_fs", config.lsb_targets[i].value},
                 {"n_groups", t.config.n_groups()},
                 {"lsb_fs", t.config.lsb.value},
                 {"seed", opts.seed},
                 {"steps", report.steps.size()},
                 {"slope_bins_per_ps", report.slope * 1000.0},
                 {"intercept_bins", report.intercept},
                 {"blank_histograms", report.blank_histograms},
                 {"order_violations", report.order_violations},
                 {"missing_codes", report.stats.missing_codes},
                 {"substituted", report.stats.substituted}};
    if (report.blank_histograms.size() < report.steps.size()) {
      const auto [lo, hi] = residual_envelope(report);
      section["residual_min"] = lo;
      section["residual_max"] = hi;
      section["fraction_within_two_bins"] = fraction_within_two_bins(report);
      log << "interval: " << t.label << " residual [" << fmt(lo, 3) << ", " << fmt(hi, 3) << "] LSB, "
          << report.blank_histograms.size() << " blank\n";
    } else {
      section["residual_min"] = nullptr;
      section["residual_max"] = nullptr;
      section["fraction_within_two_bins"] = nullptr;
      log << "interval: " << t.label << " every histogram blank\n";
    }
    sections.push_back(std::move(section));
  }
  Json summary{{"provenance", provenance_json(config, "interval")}, {"targets", sections}};
  write_text(out_path(config, files::interval_summary), summary.dump(2) + "\n");
}

void cmd_report(const RunConfig& config, std::ostream& log) {
  config.validate();
  std::vector<std::string> required{files::model,           files::catalog,
                                    files::rse_per_n,       files::selected,
                                    files::density_summary, files::interval_summary};
  for (const auto& target : config.lsb_targets) {
    const auto label = target_label(target);
    required.push_back(density_file(label, false));
    required.push_back(interval_file(label));
  }
  std::vector<std::string> missing;
  for (const auto& name : required)
    if (!fs::exists(out_path(config, name))) missing.push_back(name);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw InputError("missing stage outputs: " + list);
  }

  const DelayLineModel model = load_model(config);
  const StateCatalog catalog = load_catalog(config);
  const auto selected = load_selected(config);
  const Json density = read_json(out_path(config, files::density_summary));
  const Json interval = read_json(out_path(config, files::interval_summary));

  std::vector<std::string> warnings;
  const std::string hash = hex64(config_hash(config));
  for (const auto* j : {&density, &interval})
    if (j->value("provenance", Json::object()).value("config_hash", "") != hash)
      warnings.push_back(j->at("provenance").value("stage", std::string("?")) +
                         " outputs were written under a different config hash");

  auto find_section = [](const Json& doc, const std::string& label) -> const Json* {
    for (const auto& s : doc.at("targets"))
      if (s.at("label") == label) return &s;
    return nullptr;
  };

  // rse vs resolution
  const fs::path per_n_path = out_path(config, files::rse_per_n);
  const Table per_n = read_table(per_n_path);
  std::map<std::string, std::string> selected_by_n;
  for (const auto& target : config.lsb_targets) {
    const auto label = target_label(target);
    if (auto it = selected.find(label); it != selected.end()) {
      auto& names = selected_by_n[std::to_string(it->second.n_groups())];
      names += (names.empty() ? "" : " ") + label;
    }
  }
  std::string rse_plot = provenance_block(config, "report");
  rse_plot += "n,lsb_ps,rse,optimal_rse,selected\n";
  const auto c_n = per_n.column("n", per_n_path), c_lsb = per_n.column("lsb_fs", per_n_path),
             c_rse = per_n.column("rse", per_n_path),
             c_opt = per_n.column("optimal_rse", per_n_path);
  for (const auto& row : per_n.rows) {
    rse_plot += row.at(c_n) + "," + format_ps(TimeFs{parse_integer<std::int64_t>(row.at(c_lsb), "lsb_fs")}) + "," +
                row.at(c_rse) + "," + row.at(c_opt) + ",";
    if (auto it = selected_by_n.find(row.at(c_n)); it != selected_by_n.end()) rse_plot += it->second;
    rse_plot += "\n";
  }
  write_text(out_path(config, "plot_rse_vs_lsb.csv"), rse_plot);

  // per-target linearity and interval tables, concatenated
  std::string lin_short = provenance_block(config, "report"), lin_long = lin_short,
              interval_plot = lin_short;
  lin_short += "label,bin,time_ps,dnl,inl\n";
  lin_long += "label,bin,time_ps,dnl,inl\n";
  interval_plot += "label,input_ps,output_bin,residual\n";
  Json sections = Json::array();
  for (const auto& target : config.lsb_targets) {
    const auto label = target_label(target);
    const auto it = selected.find(label);
    if (it == selected.end()) throw InputError(std::string(files::selected) + " has no " + label);
    const BinConfiguration& c = it->second;

    auto append_linearity = [&](std::string& dest, const fs::path& path) {
      const Table t = read_table(path);
      const auto cb = t.column("bin", path), cd = t.column("dnl", path), ci = t.column("inl", path);
      for (const auto& row : t.rows) {
        const auto bin = parse_integer<std::int64_t>(row.at(cb), "bin");
        dest += label + "," + row.at(cb) + "," + format_ps(c.lsb * bin) + "," + row.at(cd) + "," +
                row.at(ci) + "\n";
      }
    };
    append_linearity(lin_short, out_path(config, density_file(label, false)));
    if (fs::exists(out_path(config, density_file(label, true))))
      append_linearity(lin_long, out_path(config, density_file(label, true)));

    const fs::path ipath = out_path(config, interval_file(label));
    const Table it_table = read_table(ipath);
    const auto ci = it_table.column("input_fs", ipath), co = it_table.column("output_bin", ipath),
               cr = it_table.column("residual", ipath);
    for (const auto& row : it_table.rows)
      interval_plot += label + "," + format_ps(TimeFs{parse_integer<std::int64_t>(row.at(ci), "input_fs")}) + "," + row.at(co) +
                       "," + row.at(cr) + "\n";

    Json section{{"label", label},
                 {"target_ps", format_ps(target)},
                 {"n_groups", c.n_groups()},
                 {"lsb_ps", format_ps(c.lsb)},
                 {"rse_predicted", c.rse}};
    const Json* d = find_section(density, label);
    const Json* iv = find_section(interval, label);
    if (!d) warnings.push_back(std::string(files::density_summary) + " has no " + label);
    if (!iv) warnings.push_back(std::string(files::interval_summary) + " has no " + label);
    section["density_short"] = d ? d->at("short") : Json(nullptr);
    section["density_long"] = d ? d->at("long") : Json(nullptr);
    section["interval"] = iv ? *iv : Json(nullptr);
    if (iv) section["interval"].erase("label");
    sections.push_back(std::move(section));
  }
  write_text(out_path(config, "plot_linearity_short.csv"), lin_short);
  write_text(out_path(config, "plot_linearity_long.csv"), lin_long);
  write_text(out_path(config, "plot_interval.csv"), interval_plot);

  Json summary{
      {"provenance", provenance_json(config, "report")},
      {"model",
       {{"n_taps", model.n_taps()},
        {"total_delay_ps", format_ps(model.total_delay())},
        {"model_seed", model.seed()}}},
      {"catalog",
       {{"states", catalog.size()},
        {"tie_count", catalog.tie_count()},
        {"total_events", catalog.total_events()},
        {"covered_range_ps", format_ps(catalog.covered_range())}}},
      {"per_n_rows", per_n.rows.size()},
      {"targets", sections},
      {"warnings", warnings}};
  write_text(out_path(config, files::summary), summary.dump(2) + "\n");
  log << "report: " << sections.size() << " lsb sections written to "
      << out_path(config, files::summary).string() << "\n";
  for (const auto& w : warnings) log << "report: warning: " << w << "\n";
}

}  // namespace tdcstate::cli
