#include "movsrc/gp_prior.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

namespace movsrc {

namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaxJitter = 1e-6;

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("GaussianProcessPrior: empty grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw std::invalid_argument("GaussianProcessPrior: grid must be strictly increasing");
    }
  }
}

// Index of the grid node equal to t, if any.
std::optional<Eigen::Index> grid_index(const std::vector<double>& grid, double t) {
  const double tol = 1e-12 * std::max(1.0, std::abs(grid.back() - grid.front()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (std::abs(grid[k] - t) <= tol) return static_cast<Eigen::Index>(k);
  }
  return std::nullopt;
}

}  // namespace

double se_kernel(double t, double t2, double magnitude, double length) {
  const double d = t - t2;
  return magnitude * magnitude * std::exp(-d * d / (2.0 * length * length));
}

double SEKernel::operator()(double t, double t2) const {
  return se_kernel(t, t2, magnitude, length);
}

GaussianProcessPrior::GaussianProcessPrior(std::vector<double> grid, MeanFunction mean_fn,
                                           CovarianceFunction cov_fn, double variance_scale)
    : grid_(std::move(grid)),
      mean_fn_(std::move(mean_fn)),
      cov_fn_(std::move(cov_fn)),
      variance_scale_(variance_scale) {
  check_grid(grid_);
  if (!mean_fn_) mean_fn_ = [](double) { return 0.0; };
  evaluate_on_grid();
  factorize();
}

GaussianProcessPrior::GaussianProcessPrior(std::vector<double> grid, MeanFunction mean_fn,
                                           CovarianceFunction cov_fn, double variance_scale,
                                           Eigen::MatrixXd factor, double jitter)
    : grid_(std::move(grid)),
      mean_fn_(std::move(mean_fn)),
      cov_fn_(std::move(cov_fn)),
      variance_scale_(variance_scale),
      factor_(std::move(factor)),
      jitter_(jitter) {
  check_grid(grid_);
  if (!mean_fn_) mean_fn_ = [](double) { return 0.0; };
  if (factor_.rows() != size() || factor_.cols() != size()) {
    throw std::invalid_argument("GaussianProcessPrior: factor dimensions do not match the grid");
  }
  evaluate_on_grid();
}

void GaussianProcessPrior::evaluate_on_grid() {
  const Eigen::Index m = size();
  mean_.resize(m);
  gram_.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    mean_(i) = mean_fn_(grid_[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = cov_fn_(grid_[static_cast<std::size_t>(i)], grid_[static_cast<std::size_t>(j)]);
      gram_(i, j) = k;
      gram_(j, i) = k;
    }
  }
}

void GaussianProcessPrior::factorize() {
  const Eigen::Index m = size();
  for (double rel = kInitialJitter; rel <= kMaxJitter * 1.0000001; rel *= 10.0) {
    const double jitter = rel * variance_scale_;
    Eigen::MatrixXd shifted = gram_;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite() || (lower.diagonal().array() <= 0.0).any()) continue;
    factor_ = std::move(lower);
    jitter_ = jitter;
    return;
  }
  std::ostringstream msg;
  msg << "Cholesky factorization of the " << m << "x" << m
      << " Gram matrix failed with jitter up to " << kMaxJitter << " * kappa^2";
  throw IllConditionedKernel(msg.str());
}

GaussianProcessPrior build_prior(std::vector<double> grid, MeanFunction mean_fn, SEKernel kernel) {
  if (!(kernel.magnitude > 0.0 && kernel.length > 0.0)) {
    throw std::invalid_argument("build_prior: kernel magnitude and length must be positive");
  }
  return GaussianProcessPrior(std::move(grid), std::move(mean_fn), kernel,
                              kernel.magnitude * kernel.magnitude);
}

Eigen::VectorXd realize(const GaussianProcessPrior& prior, const WhitenedVector& s) {
  if (s.s.size() != prior.size()) throw std::invalid_argument("realize: dimension mismatch");
  return prior.mean() + prior.factor() * s.s;
}

SampledFunction realize_function(const GaussianProcessPrior& prior, const WhitenedVector& s,
                                 Extrapolation rule) {
  const Eigen::VectorXd v = realize(prior, s);
  return SampledFunction(prior.grid(), std::vector<double>(v.data(), v.data() + v.size()), rule);
}

GaussianProcessPrior condition_on_points(const GaussianProcessPrior& prior,
                                         std::span<const double> tau_c,
                                         std::span<const double> f_c, double sigma) {
  if (tau_c.empty() || tau_c.size() != f_c.size()) {
    throw std::invalid_argument("condition_on_points: need matching, non-empty points and values");
  }
  if (sigma < 0.0) throw std::invalid_argument("condition_on_points: sigma must be non-negative");
  const auto n_c = static_cast<Eigen::Index>(tau_c.size());
  const std::vector<double> points(tau_c.begin(), tau_c.end());

  Eigen::MatrixXd kc(n_c, n_c);
  Eigen::VectorXd residual(n_c);
  for (Eigen::Index a = 0; a < n_c; ++a) {
    residual(a) = f_c[static_cast<std::size_t>(a)] - prior.mean_at(points[static_cast<std::size_t>(a)]);
    for (Eigen::Index b = 0; b < n_c; ++b) {
      kc(a, b) = prior.covariance(points[static_cast<std::size_t>(a)], points[static_cast<std::size_t>(b)]);
    }
    kc(a, a) += sigma * sigma;
  }
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(kc);
  const double floor = 1e-12 * prior.variance_scale();
  if (llt->info() != Eigen::Success || llt->matrixL().toDenseMatrix().diagonal().minCoeff() <= std::sqrt(floor) ||
      llt->rcond() < 1e-14) {
    throw ConditioningError("condition_on_points: K_c + sigma^2 I is singular; use sigma > 0");
  }
  const Eigen::VectorXd weights = llt->solve(residual);

  MeanFunction base_mean = prior.mean_function();
  CovarianceFunction base_cov = prior.covariance_function();
  MeanFunction mean_fn = [base_mean, base_cov, points, weights](double t) {
    double m = base_mean(t);
    for (std::size_t a = 0; a < points.size(); ++a) m += base_cov(t, points[a]) * weights(static_cast<Eigen::Index>(a));
    return m;
  };
  CovarianceFunction cov_fn = [base_cov, points, llt](double t, double t2) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::VectorXd kt(n);
    Eigen::VectorXd kt2(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      kt(a) = base_cov(t, points[static_cast<std::size_t>(a)]);
      kt2(a) = base_cov(points[static_cast<std::size_t>(a)], t2);
    }
    return base_cov(t, t2) - kt.dot(llt->solve(kt2));
  };

  // Noise-free values at grid nodes: project the existing square root so
  // every realization hits f_c to round-off.
  std::vector<Eigen::Index> idx;
  if (sigma == 0.0) {
    for (double t : points) {
      if (auto k = grid_index(prior.grid(), t)) idx.push_back(*k);
    }
  }
  if (sigma == 0.0 && idx.size() == points.size()) {
    const Eigen::MatrixXd& factor = prior.factor();
    Eigen::MatrixXd w(prior.size(), n_c);
    for (Eigen::Index a = 0; a < n_c; ++a) w.col(a) = factor.row(idx[static_cast<std::size_t>(a)]).transpose();
    const Eigen::MatrixXd gain = (w.transpose() * w).ldlt().solve(w.transpose());
    Eigen::MatrixXd projected = factor - (factor * w) * gain;
    return GaussianProcessPrior(prior.grid(), std::move(mean_fn), std::move(cov_fn),
                                prior.variance_scale(), std::move(projected), prior.jitter());
  }
  return GaussianProcessPrior(prior.grid(), std::move(mean_fn), std::move(cov_fn), prior.variance_scale());
}

GaussianProcessPrior condition_on_functional(const GaussianProcessPrior& prior,
                                             const LinearFunctional& functional, double target) {
  const double l2 = functional.on_kernel_twice;
  if (!(l2 > 1e-12 * prior.variance_scale())) {
    throw ConditioningError("condition_on_functional: L^2[k] is not positive; the functional is degenerate");
  }
  if (!functional.on_kernel) throw std::invalid_argument("condition_on_functional: missing L[k(., t)]");
  const double shift = (target - functional.on_mean) / l2;

  MeanFunction base_mean = prior.mean_function();
  CovarianceFunction base_cov = prior.covariance_function();
  auto on_kernel = functional.on_kernel;
  MeanFunction mean_fn = [base_mean, on_kernel, shift](double t) { return base_mean(t) + on_kernel(t) * shift; };
  CovarianceFunction cov_fn = [base_cov, on_kernel, l2](double t, double t2) {
    return base_cov(t, t2) - on_kernel(t2) * on_kernel(t) / l2;
  };

  if (functional.grid_weights) {
    const Eigen::VectorXd& a = *functional.grid_weights;
    if (a.size() != prior.size()) throw std::invalid_argument("condition_on_functional: grid weight size mismatch");
    const Eigen::MatrixXd& factor = prior.factor();
    const Eigen::VectorXd w = factor.transpose() * a;
    const double ww = w.squaredNorm();
    if (!(ww > 0.0)) throw ConditioningError("condition_on_functional: functional annihilates the prior");
    Eigen::MatrixXd projected = factor - (factor * w) * (w.transpose() / ww);
    return GaussianProcessPrior(prior.grid(), std::move(mean_fn), std::move(cov_fn),
                                prior.variance_scale(), std::move(projected), prior.jitter());
  }
  return GaussianProcessPrior(prior.grid(), std::move(mean_fn), std::move(cov_fn), prior.variance_scale());
}

LinearFunctional closed_curve_functional(const GaussianProcessPrior& prior) {
  const double t0 = prior.grid().front();
  const double t1 = prior.grid().back();
  if (prior.size() < 2) throw std::invalid_argument("closed_curve_functional: grid needs two endpoints");
  CovarianceFunction cov = prior.covariance_function();
  LinearFunctional f;
  f.on_kernel = [cov, t0, t1](double t) { return cov(t1, t) - cov(t0, t); };
  f.on_kernel_twice = cov(t1, t1) - 2.0 * cov(t0, t1) + cov(t0, t0);
  f.on_mean = prior.mean_at(t1) - prior.mean_at(t0);
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(prior.size());
  weights(0) = -1.0;
  weights(prior.size() - 1) = 1.0;
  f.grid_weights = std::move(weights);
  return f;
}

}  // namespace movsrc
