#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "movsrc/inference.hpp"
#include "movsrc/wavefield.hpp"

namespace movsrc {

/**
 * Deterministic, approximately uniform sensors on a sphere region.
 *
 * The region (a lune about the x axis: the upper hemisphere z > 0 or the
 * quarter sphere y, z > 0) is mapped to a rectangle by the Lambert
 * equal-area projection, x in (-1, 1) and azimuth psi in (0, Psi); a
 * Fibonacci lattice on that rectangle is area-uniform on the sphere.
 * Point 0 is the centre of the region.
 */
SensorArray sphere_sensors(std::size_t n, double radius, SensorRegion region);

/// Measurement instants per scenario, uniform on [0, T]. With beta = 100 and
/// delta = 0.0025 this keeps the pCN acceptance ratio near 20% on case 1.
inline constexpr std::size_t kDefaultTimeCount = 40;

struct Hyperparameters {
  double kappa_p = 1.0;
  double ell_p = 5.0;
  double kappa_q = 1.0;
  double ell_q = 5.0;
  double beta = 100.0;
  double delta = 0.0025;
};

/// Analytic truth of one source, used to sample the data-generating model.
struct SourceFormula {
  std::function<double(double)> x;
  std::function<double(double)> y;
  std::function<double(double)> intensity;
};

struct Scenario {
  std::string name;
  int case_id = 0;
  PhysicalConfig cfg;
  std::vector<SourceFormula> formulas;
  SourceModel truth;  ///< formulas sampled on a grid 4x finer than the latent grid
  SensorArray sensors;
  std::vector<double> times;
  Hyperparameters hyper;
  double noise_alpha = 0.0;
  bool closed_curve = false;
  std::size_t latent_size = 100;

  std::vector<double> latent_grid() const;
};

struct CaseOverrides {
  std::optional<double> c, T, T0, radius;
  std::optional<double> kappa, ell;  ///< both trajectory and intensity priors
  std::optional<double> kappa_p, ell_p, kappa_q, ell_q;
  std::optional<double> beta, delta, noise_alpha;
  std::optional<std::array<double, 2>> velocity;  ///< case 1 only
  std::optional<std::size_t> n_sensors, n_times, latent_size;
  std::optional<SensorRegion> region;
  std::optional<bool> closed_curve;
};

/// Cases 1-4: line, circular arc, closed bow curve, two sources.
Scenario build_case(int id, const CaseOverrides& overrides = {});
/// Accepts "case1".."case4" or "1".."4".
Scenario build_case(const std::string& name, const CaseOverrides& overrides = {});

/// Samples formulas on a grid into a SourceModel.
SourceModel sample_sources(const std::vector<SourceFormula>& formulas, const std::vector<double>& grid);

/// Independent SE priors on the latent grid, with the closed-curve
/// constraint on the trajectory priors when the scenario asks for it.
LatentPriors build_latent_priors(const Scenario& scenario);

/// Clean synthetic measurements of the scenario's truth.
MeasurementSet simulate_measurements(const Scenario& scenario);

}  // namespace movsrc
