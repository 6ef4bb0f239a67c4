#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "movsrc/gp_prior.hpp"
#include "movsrc/rng.hpp"
#include "movsrc/wavefield.hpp"

namespace movsrc {

inline constexpr double kRejectLogLikelihood = -std::numeric_limits<double>::infinity();

/// Independent priors on the latent functions, three per source in the
/// order (p_x, p_y, q). All share one emission grid.
struct LatentPriors {
  std::vector<GaussianProcessPrior> functions;

  std::size_t source_count() const { return functions.size() / 3; }
  Eigen::Index grid_size() const { return functions.front().size(); }
  /// Length of the concatenated whitened vector.
  Eigen::Index dimension() const {
    return static_cast<Eigen::Index>(functions.size()) * grid_size();
  }
  const std::vector<double>& grid() const { return functions.front().grid(); }
};

/// Builds the (p_x, p_y, q) priors for each source.
LatentPriors make_latent_priors(std::size_t sources, const GaussianProcessPrior& trajectory,
                                const GaussianProcessPrior& intensity);

/// Realized source model for a concatenated whitened vector.
SourceModel realize_model(const LatentPriors& priors, const Eigen::VectorXd& whitened);

using LogLikelihood = std::function<double(const SourceModel&)>;

/// -(beta / 2) ||U - G(f)||^2. Supersonic or near-field models and forward
/// failures score -infinity.
double log_likelihood(const SourceModel& model, const MeasurementSet& data, double beta,
                      const PhysicalConfig& cfg);

/// Reusable likelihood with its own scratch buffer; one per chain.
class GaussianLikelihood {
 public:
  GaussianLikelihood(std::shared_ptr<const MeasurementSet> data, PhysicalConfig cfg, double beta);

  double operator()(const SourceModel& model);
  /// ||U - G(f)||^2, or +infinity when the forward map is undefined.
  double squared_residual(const SourceModel& model);

  double beta() const { return beta_; }

 private:
  std::shared_ptr<const MeasurementSet> data_;
  PhysicalConfig cfg_;
  double beta_;
  FieldMatrix scratch_;
};

struct LatentState {
  Eigen::VectorXd whitened;
  SourceModel model;
  double log_likelihood = kRejectLogLikelihood;
};

LatentState make_state(Eigen::VectorXd whitened, const LatentPriors& priors,
                       const LogLikelihood& likelihood);

struct StepResult {
  LatentState state;
  bool accepted = false;
};

/**
 * One pCN move in whitened coordinates:
 *   s* = sqrt(1 - 2 delta) s + sqrt(2 delta) z,  z ~ N(0, I),
 * accepted with probability min{1, exp(L(f*) - L(f))}. A state scoring
 * -infinity accepts any proposal. Draws the normals first, then one
 * uniform, every step.
 */
StepResult pcn_step(const LatentState& state, double delta, const LatentPriors& priors,
                    const LogLikelihood& likelihood, Rng& rng);

struct ChainOptions {
  std::size_t n_samples = 1000;
  double delta = 0.0025;
  double beta = 100.0;  ///< recorded only; the likelihood carries its own
  std::uint64_t seed = 0;
  std::size_t thinning = 10;
  double burn_in_fraction = 0.5;
};

/// Ordered pCN samples plus everything needed to resume the chain.
struct ChainRecord {
  std::uint64_t seed = 0;
  double delta = 0.0;
  double beta = 0.0;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  std::size_t target_samples = 0;

  /// Whitened snapshots at sample indices that are multiples of thinning.
  std::vector<std::size_t> snapshot_index;
  std::vector<Eigen::VectorXd> snapshots;
  /// Full traces: one entry per sample.
  std::vector<double> log_likelihood;
  /// One flag per pCN step (samples - 1 entries).
  std::vector<std::uint8_t> accepted;
  /// Latent values at the grid quartiles of every function, per sample.
  std::vector<std::vector<double>> probes;

  Eigen::VectorXd current;
  double current_log_likelihood = kRejectLogLikelihood;
  std::string rng_state;

  std::size_t samples() const { return log_likelihood.size(); }
  bool complete() const { return samples() >= target_samples; }
  double acceptance_ratio() const;
};

struct ChainControl {
  /// Invoke on_checkpoint every this many samples (0: never).
  std::size_t checkpoint_every = 0;
  std::function<void(const ChainRecord&)> on_checkpoint;
  /// Stop once this many samples exist (0: run to the target).
  std::size_t stop_after = 0;
};

/// Starts a chain from a prior draw and runs it to n_samples (or stop_after).
ChainRecord run_chain(const LatentPriors& priors, const LogLikelihood& likelihood,
                      const ChainOptions& options, const ChainControl& control = {});

/// Continues a partial record to its target.
void continue_chain(ChainRecord& record, const LatentPriors& priors, const LogLikelihood& likelihood,
                    const ChainControl& control = {});

/// Grid indices of the probe points (quartiles).
std::vector<Eigen::Index> probe_indices(Eigen::Index grid_size);

/// Pointwise average of realized functions over retained snapshots of all chains.
SourceModel posterior_mean(std::span<const ChainRecord> chains, const LatentPriors& priors,
                           std::size_t burn_in);

/// Retained snapshot with the highest log-likelihood - |s|^2 / 2.
SourceModel posterior_mode(std::span<const ChainRecord> chains, const LatentPriors& priors,
                           std::size_t burn_in);

/// Average of the per-chain modes.
SourceModel average_mode(std::span<const ChainRecord> chains, const LatentPriors& priors,
                         std::size_t burn_in);

/// Pointwise average of source models on a common grid.
SourceModel average_models(std::span<const SourceModel> models);

/// Autocorrelation-corrected sample size with Geyer's initial positive
/// sequence truncation, clamped to [1, n].
double effective_sample_size(std::span<const double> series);

/// Minimum ESS over the log-likelihood and probe traces after burn-in.
double chain_effective_sample_size(const ChainRecord& record, std::size_t burn_in);

/// Gelman-Rubin potential scale reduction over equally long traces.
double potential_scale_reduction(std::span<const std::vector<double>> traces);

}  // namespace movsrc
