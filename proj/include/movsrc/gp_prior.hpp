#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "movsrc/sampled_function.hpp"

namespace movsrc {

class IllConditionedKernel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Squared-exponential covariance k(t, t') = magnitude^2 exp(-(t - t')^2 / (2 length^2)).
struct SEKernel {
  double magnitude = 1.0;
  double length = 1.0;

  double operator()(double t, double t2) const;
};

double se_kernel(double t, double t2, double magnitude, double length);

using MeanFunction = std::function<double(double)>;
using CovarianceFunction = std::function<double(double, double)>;

/// Standard-normal coordinates of a prior draw.
struct WhitenedVector {
  Eigen::VectorXd s;
};

/**
 * A Gaussian process restricted to an emission grid.
 *
 * Holds the current (possibly conditioned) mean and covariance both as
 * functions of time, so further conditioning composes, and as grid
 * quantities. The factor satisfies factor * factor^T = gram + jitter * I
 * up to round-off; after exact conditioning it is a projected square root
 * rather than a triangular Cholesky factor.
 */
class GaussianProcessPrior {
 public:
  /// Evaluates mean and Gram on the grid and factors with escalating jitter.
  /// A null mean function means zero mean.
  GaussianProcessPrior(std::vector<double> grid, MeanFunction mean_fn, CovarianceFunction cov_fn,
                       double variance_scale);
  /// Uses a precomputed square-root factor instead of refactoring.
  GaussianProcessPrior(std::vector<double> grid, MeanFunction mean_fn, CovarianceFunction cov_fn,
                       double variance_scale, Eigen::MatrixXd factor, double jitter);

  const std::vector<double>& grid() const { return grid_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& factor() const { return factor_; }
  double jitter() const { return jitter_; }
  /// Reference variance (kappa^2 of the originating kernel).
  double variance_scale() const { return variance_scale_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(grid_.size()); }

  double mean_at(double t) const { return mean_fn_(t); }
  double covariance(double t, double t2) const { return cov_fn_(t, t2); }
  const MeanFunction& mean_function() const { return mean_fn_; }
  const CovarianceFunction& covariance_function() const { return cov_fn_; }

 private:
  void evaluate_on_grid();
  void factorize();

  std::vector<double> grid_;
  MeanFunction mean_fn_;
  CovarianceFunction cov_fn_;
  double variance_scale_ = 1.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd factor_;
  double jitter_ = 0.0;
};

/// Assembles the Gram matrix and factors it once, escalating the diagonal
/// jitter from 1e-10 kappa^2 by decades up to 1e-6 kappa^2.
GaussianProcessPrior build_prior(std::vector<double> grid, MeanFunction mean_fn, SEKernel kernel);

/// Grid values mean + factor * s.
Eigen::VectorXd realize(const GaussianProcessPrior& prior, const WhitenedVector& s);
SampledFunction realize_function(const GaussianProcessPrior& prior, const WhitenedVector& s,
                                 Extrapolation rule);

/// Conditions on noisy point values f(tau_c) = f_c with noise std sigma.
GaussianProcessPrior condition_on_points(const GaussianProcessPrior& prior,
                                         std::span<const double> tau_c,
                                         std::span<const double> f_c, double sigma);

/**
 * A linear functional L supplied in evaluated form: its action on the
 * kernel's first argument, on both arguments, and on the mean. When the
 * functional is a fixed combination of grid values, grid_weights lets the
 * conditioning act on the factor directly so realizations satisfy the
 * constraint to round-off.
 */
struct LinearFunctional {
  std::function<double(double)> on_kernel;  ///< t -> L[k(., t)]
  double on_kernel_twice = 0.0;             ///< L^2[k]
  double on_mean = 0.0;                     ///< L[m]
  std::optional<Eigen::VectorXd> grid_weights;
};

GaussianProcessPrior condition_on_functional(const GaussianProcessPrior& prior,
                                             const LinearFunctional& functional, double target);

/// L[f] = f(t_end) - f(t_start) over the prior's grid endpoints, built on
/// the prior's current mean and covariance.
LinearFunctional closed_curve_functional(const GaussianProcessPrior& prior);

}  // namespace movsrc
