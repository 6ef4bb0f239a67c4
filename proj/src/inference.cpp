#include "movsrc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace movsrc {

namespace {

Eigen::VectorXd function_values(const LatentPriors& priors, const Eigen::VectorXd& whitened,
                                std::size_t f) {
  const GaussianProcessPrior& prior = priors.functions[f];
  const Eigen::Index m = prior.size();
  return prior.mean() + prior.factor() * whitened.segment(static_cast<Eigen::Index>(f) * m, m);
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

SourceModel model_from_values(const std::vector<double>& grid, const std::vector<Eigen::VectorXd>& values) {
  SourceModel model;
  for (std::size_t s = 0; s + 2 < values.size(); s += 3) {
    model.sources.emplace_back(SampledFunction(grid, to_std(values[s]), Extrapolation::Clamp),
                               SampledFunction(grid, to_std(values[s + 1]), Extrapolation::Clamp),
                               SampledFunction(grid, to_std(values[s + 2]), Extrapolation::Zero));
  }
  return model;
}

const SampledFunction& latent_function(const SourceModel& model, std::size_t f) {
  const Source& src = model.sources[f / 3];
  switch (f % 3) {
    case 0: return src.x;
    case 1: return src.y;
    default: return src.intensity;
  }
}

void record_sample(ChainRecord& record, const LatentState& state) {
  const std::size_t index = record.samples();
  record.log_likelihood.push_back(state.log_likelihood);
  const std::size_t n_functions = state.model.sources.size() * 3;
  const auto idx = probe_indices(static_cast<Eigen::Index>(latent_function(state.model, 0).size()));
  if (record.probes.empty()) record.probes.resize(n_functions * idx.size());
  std::size_t p = 0;
  for (std::size_t f = 0; f < n_functions; ++f) {
    const auto values = latent_function(state.model, f).values();
    for (Eigen::Index k : idx) record.probes[p++].push_back(values[static_cast<std::size_t>(k)]);
  }
  if (index % record.thinning == 0) {
    record.snapshot_index.push_back(index);
    record.snapshots.push_back(state.whitened);
  }
}

std::vector<std::pair<const ChainRecord*, std::size_t>> retained(std::span<const ChainRecord> chains,
                                                                 std::size_t burn_in) {
  std::vector<std::pair<const ChainRecord*, std::size_t>> out;
  for (const ChainRecord& chain : chains) {
    for (std::size_t j = 0; j < chain.snapshots.size(); ++j) {
      if (chain.snapshot_index[j] >= burn_in) out.emplace_back(&chain, j);
    }
  }
  if (out.empty()) throw std::runtime_error("posterior summary: no samples retained after burn-in");
  return out;
}

double autocovariance(std::span<const double> x, double mean, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
  return acc / static_cast<double>(x.size());
}

}  // namespace

LatentPriors make_latent_priors(std::size_t sources, const GaussianProcessPrior& trajectory,
                                const GaussianProcessPrior& intensity) {
  if (trajectory.grid() != intensity.grid()) {
    throw std::invalid_argument("make_latent_priors: trajectory and intensity priors need one grid");
  }
  LatentPriors priors;
  for (std::size_t s = 0; s < sources; ++s) {
    priors.functions.push_back(trajectory);
    priors.functions.push_back(trajectory);
    priors.functions.push_back(intensity);
  }
  return priors;
}

SourceModel realize_model(const LatentPriors& priors, const Eigen::VectorXd& whitened) {
  if (whitened.size() != priors.dimension()) throw std::invalid_argument("realize_model: dimension mismatch");
  std::vector<Eigen::VectorXd> values;
  values.reserve(priors.functions.size());
  for (std::size_t f = 0; f < priors.functions.size(); ++f) values.push_back(function_values(priors, whitened, f));
  return model_from_values(priors.grid(), values);
}

double log_likelihood(const SourceModel& model, const MeasurementSet& data, double beta,
                      const PhysicalConfig& cfg) {
  GaussianLikelihood likelihood(std::make_shared<const MeasurementSet>(data), cfg, beta);
  return likelihood(model);
}

GaussianLikelihood::GaussianLikelihood(std::shared_ptr<const MeasurementSet> data, PhysicalConfig cfg,
                                       double beta)
    : data_(std::move(data)), cfg_(cfg), beta_(beta) {
  if (!data_ || !data_->sensors) throw std::invalid_argument("GaussianLikelihood: missing data");
  if (!(beta_ > 0.0)) throw std::invalid_argument("GaussianLikelihood: beta must be positive");
}

double GaussianLikelihood::squared_residual(const SourceModel& model) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!max_speed(model, cfg_).subsonic) return kInf;
  try {
    forward_map_into(model, *data_->sensors, data_->times, cfg_, scratch_);
  } catch (const NearFieldError&) {
    return kInf;
  } catch (const ContractViolation&) {
    return kInf;
  } catch (const SolverFailure&) {
    return kInf;
  }
  const double ss = (data_->field - scratch_).squaredNorm();
  return std::isfinite(ss) ? ss : kInf;
}

double GaussianLikelihood::operator()(const SourceModel& model) {
  const double ss = squared_residual(model);
  return std::isfinite(ss) ? -0.5 * beta_ * ss : kRejectLogLikelihood;
}

LatentState make_state(Eigen::VectorXd whitened, const LatentPriors& priors,
                       const LogLikelihood& likelihood) {
  LatentState state;
  state.model = realize_model(priors, whitened);
  state.whitened = std::move(whitened);
  state.log_likelihood = likelihood(state.model);
  return state;
}

StepResult pcn_step(const LatentState& state, double delta, const LatentPriors& priors,
                    const LogLikelihood& likelihood, Rng& rng) {
  if (!(delta > 0.0 && delta <= 0.5)) throw std::invalid_argument("pcn_step: delta must lie in (0, 1/2]");
  const double keep = std::sqrt(1.0 - 2.0 * delta);
  const double mix = std::sqrt(2.0 * delta);
  Eigen::VectorXd proposal(state.whitened.size());
  for (Eigen::Index i = 0; i < proposal.size(); ++i) proposal(i) = keep * state.whitened(i) + mix * rng.normal();
  const double u = rng.uniform();

  LatentState candidate = make_state(std::move(proposal), priors, likelihood);
  bool accept = false;
  if (state.log_likelihood == kRejectLogLikelihood) {
    accept = true;
  } else if (candidate.log_likelihood != kRejectLogLikelihood) {
    accept = u < std::exp(candidate.log_likelihood - state.log_likelihood);
  }
  if (accept) return {std::move(candidate), true};
  return {state, false};
}

double ChainRecord::acceptance_ratio() const {
  if (accepted.empty()) return 0.0;
  const auto n = std::count(accepted.begin(), accepted.end(), std::uint8_t{1});
  return static_cast<double>(n) / static_cast<double>(accepted.size());
}

std::vector<Eigen::Index> probe_indices(Eigen::Index grid_size) {
  std::vector<Eigen::Index> idx;
  for (double q : {0.25, 0.5, 0.75}) {
    idx.push_back(static_cast<Eigen::Index>(std::lround(q * static_cast<double>(grid_size - 1))));
  }
  return idx;
}

ChainRecord run_chain(const LatentPriors& priors, const LogLikelihood& likelihood,
                      const ChainOptions& options, const ChainControl& control) {
  if (options.n_samples < 1) throw std::invalid_argument("run_chain: need at least one sample");
  if (options.thinning < 1) throw std::invalid_argument("run_chain: thinning must be >= 1");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0)) {
    throw std::invalid_argument("run_chain: burn-in fraction must lie in [0, 1)");
  }
  ChainRecord record;
  record.seed = options.seed;
  record.delta = options.delta;
  record.beta = options.beta;
  record.thinning = options.thinning;
  record.target_samples = options.n_samples;
  record.burn_in = static_cast<std::size_t>(options.burn_in_fraction * static_cast<double>(options.n_samples));

  Rng rng(options.seed);
  Eigen::VectorXd initial(priors.dimension());
  for (Eigen::Index i = 0; i < initial.size(); ++i) initial(i) = rng.normal();
  LatentState state = make_state(std::move(initial), priors, likelihood);
  record_sample(record, state);
  record.current = state.whitened;
  record.current_log_likelihood = state.log_likelihood;
  record.rng_state = rng.state();

  continue_chain(record, priors, likelihood, control);
  return record;
}

void continue_chain(ChainRecord& record, const LatentPriors& priors, const LogLikelihood& likelihood,
                    const ChainControl& control) {
  Rng rng;
  rng.restore(record.rng_state);
  LatentState state{record.current, realize_model(priors, record.current), record.current_log_likelihood};
  const auto sync = [&] {
    record.current = state.whitened;
    record.current_log_likelihood = state.log_likelihood;
    record.rng_state = rng.state();
  };

  std::size_t limit = record.target_samples;
  if (control.stop_after > 0) limit = std::min(limit, control.stop_after);
  while (record.samples() < limit) {
    StepResult step = pcn_step(state, record.delta, priors, likelihood, rng);
    state = std::move(step.state);
    record.accepted.push_back(step.accepted ? 1 : 0);
    record_sample(record, state);
    if (control.checkpoint_every > 0 && control.on_checkpoint &&
        record.samples() % control.checkpoint_every == 0) {
      sync();
      control.on_checkpoint(record);
    }
  }
  sync();
}

SourceModel posterior_mean(std::span<const ChainRecord> chains, const LatentPriors& priors,
                           std::size_t burn_in) {
  const auto kept = retained(chains, burn_in);
  std::vector<Eigen::VectorXd> sum(priors.functions.size(), Eigen::VectorXd::Zero(priors.grid_size()));
  for (const auto& [chain, j] : kept) {
    for (std::size_t f = 0; f < sum.size(); ++f) sum[f] += function_values(priors, chain->snapshots[j], f);
  }
  for (auto& v : sum) v /= static_cast<double>(kept.size());
  return model_from_values(priors.grid(), sum);
}

SourceModel posterior_mode(std::span<const ChainRecord> chains, const LatentPriors& priors,
                           std::size_t burn_in) {
  const auto kept = retained(chains, burn_in);
  const Eigen::VectorXd* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& [chain, j] : kept) {
    const Eigen::VectorXd& s = chain->snapshots[j];
    const double score = chain->log_likelihood[chain->snapshot_index[j]] - 0.5 * s.squaredNorm();
    if (best == nullptr || score > best_score) {
      best = &s;
      best_score = score;
    }
  }
  return realize_model(priors, *best);
}

SourceModel average_mode(std::span<const ChainRecord> chains, const LatentPriors& priors,
                         std::size_t burn_in) {
  std::vector<SourceModel> modes;
  for (const ChainRecord& chain : chains) modes.push_back(posterior_mode({&chain, 1}, priors, burn_in));
  return average_models(modes);
}

SourceModel average_models(std::span<const SourceModel> models) {
  if (models.empty()) throw std::invalid_argument("average_models: nothing to average");
  const std::size_t n_functions = models.front().sources.size() * 3;
  const auto grid = latent_function(models.front(), 0).grid();
  std::vector<Eigen::VectorXd> sum(n_functions, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
  for (const SourceModel& model : models) {
    if (model.sources.size() * 3 != n_functions) throw std::invalid_argument("average_models: source count mismatch");
    for (std::size_t f = 0; f < n_functions; ++f) {
      const auto values = latent_function(model, f).values();
      if (values.size() != grid.size()) throw std::invalid_argument("average_models: grid mismatch");
      sum[f] += Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
  }
  for (auto& v : sum) v /= static_cast<double>(models.size());
  return model_from_values({grid.begin(), grid.end()}, sum);
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) return static_cast<double>(n);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  const double gamma0 = autocovariance(series, mean, 0);
  if (!(gamma0 > 0.0)) return 1.0;

  // Sum rho_0 + rho_1 + ... in pairs while each pair sum stays positive.
  double pair_sum = 0.0;
  for (std::size_t lag = 0; lag + 1 < n; lag += 2) {
    const double pair = (autocovariance(series, mean, lag) + autocovariance(series, mean, lag + 1)) / gamma0;
    if (!(pair > 0.0)) break;
    pair_sum += pair;
  }
  const double tau = std::max(-1.0 + 2.0 * pair_sum, 1.0 / static_cast<double>(n));
  return std::clamp(static_cast<double>(n) / tau, 1.0, static_cast<double>(n));
}

double chain_effective_sample_size(const ChainRecord& record, std::size_t burn_in) {
  const auto tail = [&](const std::vector<double>& trace) {
    const std::size_t start = std::min(burn_in, trace.size());
    return std::span<const double>(trace.data() + start, trace.size() - start);
  };
  double ess = effective_sample_size(tail(record.log_likelihood));
  for (const auto& probe : record.probes) ess = std::min(ess, effective_sample_size(tail(probe)));
  return ess;
}

double potential_scale_reduction(std::span<const std::vector<double>> traces) {
  if (traces.size() < 2) return 1.0;
  const std::size_t n = traces.front().size();
  if (n < 2) return 1.0;
  std::vector<double> means;
  double within = 0.0;
  for (const auto& trace : traces) {
    if (trace.size() != n) throw std::invalid_argument("potential_scale_reduction: unequal trace lengths");
    const double m = std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : trace) var += (v - m) * (v - m);
    within += var / static_cast<double>(n - 1);
    means.push_back(m);
  }
  const auto k = static_cast<double>(traces.size());
  within /= k;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
  double between = 0.0;
  for (double m : means) between += (m - grand) * (m - grand);
  between /= (k - 1.0);  // B / n
  if (!(within > 0.0)) return 1.0;
  const double pooled = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * within + between;
  return std::sqrt(pooled / within);
}

}  // namespace movsrc
