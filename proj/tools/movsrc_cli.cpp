// movsrc: simulate measurements, reconstruct moving sources, evaluate summaries.
//
// Exit codes: 0 success, 1 invalid configuration or inputs, 2 runtime or
// numerical failure. MOVSRC_LOG_LEVEL sets verbosity (trace, debug, info,
// warn, error, off; default info).

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "movsrc/checkpoint.hpp"
#include "movsrc/cli.hpp"

namespace {

std::filesystem::path output_dir(const std::string& flag, const movsrc::RunConfig& config) {
  if (!flag.empty()) return flag;
  if (config.output_dir) return *config.output_dir;
  throw movsrc::ValidationError("no output directory: pass --out or set output_dir in the config");
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* level = std::getenv("MOVSRC_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }

  CLI::App app{"Bayesian reconstruction of moving acoustic point sources"};
  app.require_subcommand(1);

  std::string config_path, out_path, data_path, summaries_path, scenario;
  bool resume = false;
  std::size_t stop_after = 0;
  std::size_t threads = 0;

  auto* simulate = app.add_subcommand("simulate", "Generate synthetic measurements for a scenario");
  simulate->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "Output directory");

  auto* reconstruct = app.add_subcommand("reconstruct", "Run pCN-MCMC chains on measurements");
  reconstruct->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  reconstruct->add_option("--data", data_path, "Measurement directory from simulate")->required()->check(CLI::ExistingDirectory);
  reconstruct->add_option("--out", out_path, "Output directory");
  reconstruct->add_flag("--resume", resume, "Continue chains from checkpoints in the output directory");
  reconstruct->add_option("--stop-after", stop_after, "Stop each chain after this many samples (for staged runs)");
  reconstruct->add_option("--threads", threads, "Chains run concurrently on this many threads (default: all cores)");

  auto* evaluate = app.add_subcommand("evaluate", "Report error metrics of posterior summaries");
  evaluate->add_option("--summaries", summaries_path, "Directory written by reconstruct")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--scenario", scenario, "Built-in case name or run config file")->required();
  evaluate->add_option("--out", out_path, "Report file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      const movsrc::RunConfig config = movsrc::load_run_config(config_path);
      const auto out = output_dir(out_path, config);
      movsrc::cmd_simulate(config, out);
      std::cout << "measurements written to " << out.string() << '\n';
    } else if (*reconstruct) {
      const movsrc::RunConfig config = movsrc::load_run_config(config_path);
      const auto out = output_dir(out_path, config);
      const auto result = movsrc::cmd_reconstruct(config, data_path, out, {resume, stop_after, threads});
      if (result.complete) {
        for (std::size_t k = 0; k < result.chains.size(); ++k) {
          std::cout << "chain " << k << ": acceptance " << result.chains[k].acceptance_ratio() << '\n';
        }
        std::cout << "summaries written to " << out.string() << '\n';
      } else {
        std::cout << "checkpoints written to " << out.string() << "; rerun with --resume to finish\n";
      }
    } else if (*evaluate) {
      const auto report = movsrc::cmd_evaluate(summaries_path, scenario, out_path);
      std::cout << report.table();
    }
  } catch (const movsrc::ValidationError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const movsrc::CheckpointError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
