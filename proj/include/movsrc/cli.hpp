#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "movsrc/inference.hpp"
#include "movsrc/scenarios.hpp"

namespace movsrc {

inline constexpr int kConfigSchemaVersion = 1;

/// Bad configuration or mismatched inputs (exit code 1).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * Run configuration, read from a JSON document such as
 *
 *   { "schema_version": 1, "scenario": "case1",
 *     "overrides": { "ell": 2.0, "n_times": 40 },
 *     "chains": 2, "samples": 20000, "burn_in_fraction": 0.5,
 *     "delta": 0.0025, "beta": 100, "seed": 1, "noise_alpha": 0.0,
 *     "thinning": 10, "closed_curve": false,
 *     "checkpoint_interval": 1000, "sample_export_every": 100 }
 *
 * Only schema_version and scenario are required. Unknown keys are errors.
 * Override keys: c, T, T0, radius, kappa, ell, kappa_p, ell_p, kappa_q,
 * ell_q, velocity ([vx, vy], case 1), n_sensors, n_times, latent_size,
 * region ("hemisphere" | "quarter").
 */
struct RunConfig {
  std::string scenario;
  CaseOverrides overrides;  ///< also carries delta, beta, noise_alpha, closed_curve
  std::size_t chains = 2;
  std::size_t samples = 20000;
  double burn_in_fraction = 0.5;
  std::uint64_t seed = 1;
  std::size_t thinning = 10;
  std::size_t checkpoint_interval = 1000;
  std::size_t sample_export_every = 100;
  std::optional<std::filesystem::path> output_dir;
  nlohmann::json document;  ///< normalized source document

  Scenario build_scenario() const;
  /// FNV-1a hash of the normalized document.
  std::uint64_t hash() const;
};

/// Validates everything that can be checked before compute; throws ValidationError.
RunConfig parse_run_config(const nlohmann::json& document);
RunConfig load_run_config(const std::filesystem::path& path);

struct MeasurementArtifact {
  nlohmann::json manifest;
  MeasurementSet data;  ///< noisy field when present, clean otherwise
  std::optional<SourceModel> truth;
};

/**
 * Writes sensors.csv, times.csv, field_clean.csv, field_noisy.csv (only when
 * noise_alpha > 0), truth.csv and manifest.json into out.
 */
void cmd_simulate(const RunConfig& config, const std::filesystem::path& out);

MeasurementArtifact load_measurements(const std::filesystem::path& dir);

struct ReconstructOptions {
  bool resume = false;
  /// Stop every chain after this many samples (0: run to completion).
  std::size_t stop_after = 0;
  /// Chains run concurrently on this many threads (0: hardware concurrency).
  std::size_t threads = 0;
};

struct ReconstructResult {
  std::vector<ChainRecord> chains;
  bool complete = false;
  nlohmann::json diagnostics;  ///< empty while incomplete
};

/**
 * Runs the configured chains on the data in data_dir and writes into out:
 * chain_<k>.ckpt, trace_chain<k>.csv, samples_chain<k>.csv,
 * posterior_mean.csv, posterior_mode.csv, average_mode.csv,
 * diagnostics.json, plus copies of the measurement files used
 * (sensors.csv, times.csv, field.csv, truth.csv when known,
 * data_manifest.json) so the output directory evaluates on its own.
 * With resume, chains continue from existing checkpoints.
 */
ReconstructResult cmd_reconstruct(const RunConfig& config, const std::filesystem::path& data_dir,
                                  const std::filesystem::path& out, const ReconstructOptions& options = {});

struct EvaluationRow {
  std::string estimator;
  double wavefield_error = 0.0;
  std::optional<double> trajectory_error;
  std::optional<double> intensity_error;
};

struct EvaluationReport {
  std::string scenario;
  bool has_truth = false;
  std::vector<EvaluationRow> rows;

  nlohmann::json to_json() const;
  std::string table() const;
};

/**
 * Error metrics for every summary present in the directory
 * (posterior_mean, posterior_mode, average_mode). The scenario (a built-in
 * name or a run config file) supplies the physical configuration. Truth
 * comes from truth.csv in the directory; without it only the wavefield
 * residual is reported. Writes the JSON report to out.
 */
EvaluationReport cmd_evaluate(const std::filesystem::path& summaries, const std::string& scenario,
                              const std::filesystem::path& out);

}  // namespace movsrc
