#include "hololab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace hololab;
using nlohmann::json;

namespace {

struct Options {
  std::string output;
  bool json = false;
  std::string example;
  std::string config;
  std::string plot;
  int plot_samples = 50;
  bool conjecture = false;
};

int emit(cli::CommandResult result, const std::string& command, const std::string& output, bool as_json) {
  json report = cli::versioned(std::move(result.report), command);
  report["exit_code"] = result.exit_code;
  cli::stamp(report);
  if (as_json) std::cout << report.dump(2) << "\n";
  else std::cout << result.summary;
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) {
      std::cerr << "error: cannot write report to '" << output << "'\n";
      return cli::kUsageError;
    }
    out << report.dump(2) << "\n";
  }
  return result.exit_code;
}

int fail(const std::exception& e, const std::string& command, const std::string& output, bool as_json) {
  std::cerr << "error: " << e.what() << "\n";
  cli::CommandResult r;
  r.exit_code = cli::kUsageError;
  r.report = {{"error", cli::error_to_json(e)}};
  return emit(std::move(r), command, output, as_json);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holonomy laboratory for weighted connections on manifolds with density"};
  app.require_subcommand(1);
  Options o;
  app.fallthrough();  // accept -o and --json after the subcommand
  app.add_option("-o,--output", o.output, "Write the JSON report to this path");
  app.add_flag("--json", o.json, "Print the JSON report instead of the summary");

  auto* run_example = app.add_subcommand("run-example", "Reproduce the golden values of a catalog entry");
  run_example->add_option("name", o.example, "Catalog entry, e.g. borel2d or so_pq(1,2)")->required();

  auto* holonomy = app.add_subcommand("holonomy", "Integrate the configured loops");
  holonomy->add_option("config", o.config, "Run config (JSON)")->required();
  holonomy->add_option("--plot", o.plot, "Write transported frames along each loop as CSV");
  holonomy->add_option("--plot-samples", o.plot_samples, "Frame samples per segment")->check(CLI::PositiveNumber);

  auto* algebra = app.add_subcommand("algebra", "Sample holonomy, close the algebra and classify it");
  algebra->add_option("config", o.config, "Run config (JSON)")->required();
  algebra->add_flag("--conjecture", o.conjecture, "Report against the strictly upper triangular bound");

  auto* verify = app.add_subcommand("verify", "Run the property checks (default suite without a config)");
  verify->add_option("config", o.config, "Run config (JSON)");

  auto* run = app.add_subcommand("run", "Run the task list of a config");
  run->add_option("config", o.config, "Run config (JSON)")->required();

  auto* catalog = app.add_subcommand("catalog", "Catalog commands");
  catalog->require_subcommand(1);
  auto* list = catalog->add_subcommand("list", "List catalog entries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsageError;
  }

  std::string command = list->parsed() ? "catalog list" : app.get_subcommands().front()->get_name();
  std::string output = o.output;
  try {
    const auto seed = cli::seed_from_env();
    std::optional<cli::RunConfig> config;
    if (!o.config.empty()) {
      config = cli::load_run_config(o.config, seed);
      if (output.empty() && config->output) output = *config->output;
    }
    if (run_example->parsed()) {
      return emit(cli::cmd_run_example(o.example), command, output, o.json);
    }
    if (holonomy->parsed()) {
      return emit(cli::cmd_holonomy(*config, o.plot.empty() ? std::nullopt : std::optional(o.plot), o.plot_samples),
                  command, output, o.json);
    }
    if (algebra->parsed()) {
      if (o.conjecture) config->conjecture = true;
      return emit(cli::cmd_algebra(*config), command, output, o.json);
    }
    if (verify->parsed()) {
      return emit(cli::cmd_verify(config, seed.value_or(1)), command, output, o.json);
    }
    if (run->parsed()) {
      return emit(cli::cmd_run(*config), command, output, o.json);
    }
    if (list->parsed()) {
      return emit(cli::cmd_catalog_list(), command, output, o.json);
    }
  } catch (const std::exception& e) {
    return fail(e, command, output, o.json);
  }
  return cli::kUsageError;
}
