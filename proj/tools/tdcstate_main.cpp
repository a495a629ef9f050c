#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tdcstate/cli/commands.hpp"
#include "tdcstate/cli/run_config.hpp"
#include "tdcstate/error.hpp"

namespace {

// One line on stderr: error: kind=<kind> message="<text>"
int fail(const char* kind, const std::string& message, int code) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  std::cerr << "error: kind=" << kind << " message=\"" << escaped << "\"\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tdcstate;

  CLI::App app{"State-encoding TDC toolkit: collect, configure, density, interval, report"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string lsb_list;
  app.add_option("--config", config_path, "Run configuration file (key = value)");
  app.add_option("--out", out_dir, "Output directory (default: out, or output_dir in the config)");
  app.add_option("--seed", seed, "Master seed override");
  app.add_option("--lsb", lsb_list, "Comma-separated lsb targets in ps, e.g. 5,10.04,21.65");

  using Command = void (*)(const cli::RunConfig&, std::ostream&);
  Command command = nullptr;
  const std::pair<const char*, Command> commands[] = {
      {"collect", cli::cmd_collect},
      {"configure", cli::cmd_configure},
      {"density", cli::cmd_density},
      {"interval", cli::cmd_interval},
      {"report", cli::cmd_report},
  };
  const char* help[] = {
      "Simulate the delay line and collect its states",
      "Sweep reference widths and pick a configuration per lsb target",
      "Code density test for each lsb target",
      "Fixed-step time interval sweep for each lsb target",
      "Merge stage outputs into summary.json and plot tables",
  };
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->callback([&command, c = commands[i].second] { command = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }

  try {
    cli::RunConfig config = config_path.empty() ? cli::RunConfig{} : cli::load_run_config(config_path);
    if (seed) config.master_seed = *seed;
    if (!lsb_list.empty()) {
      try {
        config.lsb_targets = cli::parse_lsb_list(lsb_list);
      } catch (const InputError& e) {
        throw ConfigError(std::string("--lsb: ") + e.what());
      }
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    command(config, std::cout);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const InputError& e) {
    return fail("input", e.what(), 3);
  } catch (const ContractViolation& e) {
    return fail("internal", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
