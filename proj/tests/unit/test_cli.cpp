#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "support/oracles.hpp"
#include "tdcstate/cli/commands.hpp"
#include "tdcstate/cli/run_config.hpp"
#include "tdcstate/error.hpp"
#include "tdcstate/state_catalog.hpp"

using namespace tdcstate;
using namespace tdcstate::cli;
using namespace tdcstate::literals;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_run_config(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Scratch directory removed at scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tdcstate_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// A 16-tap line with 160 ps taps: six states per half period, so the whole
// pipeline runs in well under a second.
RunConfig small_config(const fs::path& out) {
  RunConfig c = parse(
      "seed = 7\n"
      "model.n_clb = 1\n"
      "model.nominal_tap_ps = 160\n"
      "model.mismatch_sigma_ps = 0\n"
      "model.skew_sigma_ps = 0\n"
      "collect.events = 200000\n"
      "collect.discovery_block = 10000\n"
      "configure.ref_min_ps = 50\n"
      "configure.ref_max_ps = 1000\n"
      "configure.ref_step_ps = 1\n"
      "lsb_targets_ps = 150, 400\n"
      "density.events = 100000\n"
      "density.events_per_window = 30000\n"
      "interval.events_per_step = 50\n");
  c.output_dir = out;
  return c;
}

void run_all(const RunConfig& c) {
  std::ostringstream log;
  cmd_collect(c, log);
  cmd_configure(c, log);
  cmd_density(c, log);
  cmd_interval(c, log);
  cmd_report(c, log);
}

// Data rows of one of the CSV outputs, provenance and header stripped.
std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.starts_with('#')) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.ends_with(',')) cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

template <typename F>
void expect_input_error(F&& f, const std::string& fragment) {
  try {
    f();
    ADD_FAILURE() << "no error, expected: " << fragment;
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(RunConfigParse, DefaultsAndOverrides) {
  const auto c = parse("# comment\n\nseed = 42  # trailing\nlsb_targets_ps = 5,10.04\n"
                       "configure.second_pass_fixed_point = true\nclock.start_period_ps = 1667\n");
  EXPECT_EQ(c.master_seed, 42U);
  EXPECT_EQ(c.lsb_targets, (std::vector<TimeFs>{5_ps, TimeFs{10'040}}));
  EXPECT_TRUE(c.second_pass_fixed_point);
  EXPECT_EQ(c.collect_events, 10'000'000U);
  EXPECT_EQ(c.ref_step, TimeFs{5});
  EXPECT_EQ(c.lsb_targets.size(), 2U);
  EXPECT_EQ(RunConfig{}.lsb_targets.size(), 6U);
}

TEST(RunConfigParse, Rejects) {
  EXPECT_THROW(parse("sed = 1\n"), ConfigError);
  EXPECT_THROW(parse("seed = 1\nseed = 2\n"), ConfigError);
  EXPECT_THROW(parse("seed = -1\n"), ConfigError);
  EXPECT_THROW(parse("seed\n"), ConfigError);
  EXPECT_THROW(parse("configure.second_pass_fixed_point = yes\n"), ConfigError);
  EXPECT_THROW(parse("configure.ref_min_ps = 1.2345\n"), ConfigError);
  EXPECT_THROW(parse("configure.ref_min_ps = 10\nconfigure.ref_max_ps = 5\n"), ConfigError);
  EXPECT_THROW(parse("lsb_targets_ps = 5,,10\n"), ConfigError);
  EXPECT_THROW(parse("lsb_targets_ps = 0\n"), ConfigError);
  EXPECT_THROW(parse("clock.half_period_ps = 900\n"), ConfigError);
  EXPECT_THROW(parse("model.n_clb = 0\n"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/run.cfg"), ConfigError);
}

TEST(RunConfigParse, CanonicalTextRoundTrips) {
  auto c = parse("seed = 9\nmodel.tap_file = taps.txt\ninterval.jitter_sigma_ps = 2.5\n");
  const auto text = canonical_text(c);
  const auto back = parse(text);
  EXPECT_EQ(canonical_text(back), text);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(text.find("output_dir"), std::string::npos);

  auto moved = c;
  moved.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(moved), config_hash(c));
  auto reseeded = c;
  reseeded.master_seed = 10;
  EXPECT_NE(config_hash(reseeded), config_hash(c));
  EXPECT_EQ(hex64(0xAB), "00000000000000ab");
}

TEST(RunConfigParse, LsbListsAndLabels) {
  EXPECT_EQ(parse_lsb_list(" 5, 10.04 ,87.73"),
            (std::vector<TimeFs>{5_ps, TimeFs{10'040}, TimeFs{87'730}}));
  EXPECT_THROW(parse_lsb_list(""), InputError);
  EXPECT_THROW(parse_lsb_list("5,"), InputError);
  EXPECT_THROW(parse_lsb_list("abc"), InputError);
  EXPECT_THROW(parse_lsb_list("-3"), InputError);
  EXPECT_EQ(target_label(5_ps), "lsb_5.000");
  EXPECT_EQ(target_label(TimeFs{87'730}), "lsb_87.730");
}

TEST(RunConfigParse, TapFileResolvesNextToConfig) {
  TempDir dir("cfg");
  std::ofstream(dir.path / "run.cfg") << "model.tap_file = line.txt\n";
  const auto c = load_run_config(dir.path / "run.cfg");
  EXPECT_EQ(c.tap_file_path(), dir.path / "line.txt");
}

TEST(Commands, CollectFindsEveryReachableState) {
  TempDir dir("collect");
  const auto c = small_config(dir.path);
  std::ostringstream log;
  cmd_collect(c, log);
  std::ifstream in(dir.path / files::catalog);
  const auto catalog = read_catalog(in);
  const auto model = build_model(1, 160_ps, 0_fs, 0_fs, 1, c.clock);
  const auto truth = oracle::true_state_widths(model);
  ASSERT_EQ(catalog.size(), truth.size());
  EXPECT_EQ(catalog.size(), 12U);
  for (const auto& r : catalog.records()) EXPECT_TRUE(truth.count(oracle::key_of(r.state)));
  EXPECT_EQ(catalog.total_events(), 200'000U);
  EXPECT_TRUE(catalog.has_widths());
  EXPECT_EQ(csv_rows(dir.path / files::discovery).size(), 20U);
  EXPECT_NE(log.str().find("12 states"), std::string::npos);
}

TEST(Commands, CollectRejectsZeroEvents) {
  TempDir dir("zero");
  auto c = small_config(dir.path);
  c.collect_events = 0;
  std::ostringstream log;
  expect_input_error([&] { cmd_collect(c, log); }, "empty input");
}

TEST(Commands, UnreadableModelFile) {
  TempDir dir("taps");
  auto c = small_config(dir.path);
  c.model.tap_file = (dir.path / "absent.txt").string();
  std::ostringstream log;
  expect_input_error([&] { cmd_collect(c, log); }, "model file unreadable");
}

TEST(Commands, ConfigureNeedsWidths) {
  TempDir dir("widths");
  const auto c = small_config(dir.path);
  std::ostringstream log;
  expect_input_error([&] { cmd_configure(c, log); }, "run 'collect' first");

  const std::vector<RawState> samples{RawState::from_hex("0001", 16, false),
                                      RawState::from_hex("0003", 16, false)};
  std::ofstream(dir.path / files::catalog) << [&] {
    std::ostringstream s;
    write_catalog(s, build_catalog(samples, 1667_ps));
    return s.str();
  }();
  expect_input_error([&] { cmd_configure(c, log); }, "catalog missing widths");
}

TEST(Commands, SmallCatalogGetsOracleColumn) {
  TempDir dir("oracle");
  const auto c = small_config(dir.path);
  std::ostringstream log;
  cmd_collect(c, log);
  cmd_configure(c, log);
  const auto rows = csv_rows(dir.path / files::rse_per_n);
  ASSERT_FALSE(rows.empty());
  std::ifstream in(dir.path / files::catalog);
  const auto catalog = read_catalog(in);
  std::vector<std::int64_t> w;
  for (auto x : catalog.widths()) w.push_back(x.value);
  const auto brute = oracle::min_rse_all_partitions(w);
  for (const auto& r : rows) {
    ASSERT_EQ(r.size(), 7U);
    const auto n = std::stoul(r[0]);
    const double rse = std::stod(r[2]);
    const double optimum = std::stod(r[5]);
    EXPECT_NEAR(optimum, brute.at(n), 1e-9) << n;
    EXPECT_GE(std::stod(r[6]), -1e-9);
    EXPECT_NEAR(std::stod(r[6]), rse - optimum, 1e-9);
  }

  // above the threshold the columns stay empty
  auto big = c;
  big.oracle_max_states = 11;
  cmd_configure(big, log);
  for (const auto& r : csv_rows(dir.path / files::rse_per_n)) {
    EXPECT_TRUE(r[5].empty());
    EXPECT_TRUE(r[6].empty());
  }
}

TEST(Commands, DensityCatchesEncoderFromAnotherModel) {
  TempDir dir("mismatch");
  const auto c = small_config(dir.path);
  std::ostringstream log;
  cmd_collect(c, log);
  cmd_configure(c, log);
  const auto other = build_model(2, 30_ps, 0_fs, 0_fs, 1, c.clock);
  std::ofstream(dir.path / files::model) << [&] {
    std::ostringstream s;
    write_tap_file(s, other);
    return s.str();
  }();
  expect_input_error([&] { cmd_density(c, log); }, "encoder/catalog mismatch for lsb_150.000");
  expect_input_error([&] { cmd_interval(c, log); }, "encoder/catalog mismatch");
}

TEST(Commands, ReportListsEveryMissingInput) {
  TempDir dir("empty");
  const auto c = small_config(dir.path);
  std::ostringstream log;
  try {
    cmd_report(c, log);
    FAIL();
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("missing stage outputs: model.txt, catalog.txt"), std::string::npos) << msg;
    EXPECT_NE(msg.find("density_lsb_400.000_short.csv"), std::string::npos) << msg;
    EXPECT_NE(msg.find("interval_lsb_150.000.csv"), std::string::npos) << msg;
  }
}

TEST(Commands, FullPipelineIsReproducible) {
  TempDir a("run_a");
  TempDir b("run_b");
  const auto ca = small_config(a.path);
  const auto cb = small_config(b.path);
  run_all(ca);
  run_all(cb);

  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a.path)) {
    const auto name = entry.path().filename();
    ASSERT_TRUE(fs::exists(b.path / name)) << name;
    EXPECT_EQ(slurp(entry.path()), slurp(b.path / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, static_cast<std::size_t>(std::distance(fs::directory_iterator(b.path),
                                                             fs::directory_iterator{})));

  const auto summary = nlohmann::json::parse(slurp(a.path / files::summary));
  ASSERT_EQ(summary.at("targets").size(), 2U);
  EXPECT_TRUE(summary.at("warnings").empty());
  const auto first = slurp(a.path / files::catalog);
  EXPECT_NE(first.find("\n# tdcstate 0.1.0 stage=collect\n# config_hash=" + hex64(config_hash(ca))),
            std::string::npos)
      << first.substr(0, 120);

  // a different master seed reruns the same line model with new streams
  auto reseeded = ca;
  reseeded.master_seed = 8;
  reseeded.output_dir = a.path / "reseeded";
  std::ostringstream log;
  cmd_collect(reseeded, log);
  const auto body = [](const std::string& text) { return text.substr(text.find("# n_clb=")); };
  EXPECT_EQ(body(slurp(a.path / files::model)), body(slurp(reseeded.output_dir / files::model)));
  EXPECT_NE(slurp(a.path / files::catalog), slurp(reseeded.output_dir / files::catalog));
}

TEST(Commands, ReportWarnsOnForeignStageOutputs) {
  TempDir dir("foreign");
  const auto c = small_config(dir.path);
  run_all(c);
  auto changed = c;
  changed.interval_events_per_step = 60;
  std::ostringstream log;
  cmd_interval(changed, log);
  cmd_report(c, log);
  const auto summary = nlohmann::json::parse(slurp(dir.path / files::summary));
  ASSERT_EQ(summary.at("warnings").size(), 1U);
  EXPECT_NE(log.str().find("report: warning:"), std::string::npos);
}
