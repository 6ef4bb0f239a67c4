#include "movsrc/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace movsrc {

namespace {

constexpr double kInverseGolden = 0.61803398874989484820;
constexpr std::size_t kTruthRefinement = 4;

double quartic_intensity(double t, double t0) {
  const double s = t / t0;
  return (((-28.44 * s + 56.89) * s - 39.11) * s + 10.67) * s;
}

template <typename T>
T pick(const std::optional<T>& value, T fallback) {
  return value ? *value : fallback;
}

}  // namespace

SensorArray sphere_sensors(std::size_t n, double radius, SensorRegion region) {
  if (n < 1) throw std::invalid_argument("sphere_sensors: need at least one sensor");
  if (!(radius > 0.0)) throw std::invalid_argument("sphere_sensors: radius must be positive");
  double span = 0.0;
  switch (region) {
    case SensorRegion::Hemisphere: span = kPi; break;
    case SensorRegion::QuarterSphere: span = 0.5 * kPi; break;
    case SensorRegion::Custom: throw std::invalid_argument("sphere_sensors: custom regions have no generator");
  }
  SensorArray array;
  array.radius = radius;
  array.region = region;
  array.positions.reserve(n);
  const auto count = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<double>(i);
    const double x = 1.0 - (2.0 * k + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - x * x));
    const double frac = std::fmod(0.5 + k * kInverseGolden, 1.0);
    const double psi = span * frac;
    array.positions.emplace_back(radius * x, radius * rho * std::cos(psi), radius * rho * std::sin(psi));
  }
  return array;
}

std::vector<double> Scenario::latent_grid() const { return uniform_grid(0.0, cfg.T0, latent_size); }

SourceModel sample_sources(const std::vector<SourceFormula>& formulas, const std::vector<double>& grid) {
  SourceModel model;
  for (const SourceFormula& f : formulas) {
    std::vector<double> xs, ys, qs;
    for (double t : grid) {
      xs.push_back(f.x(t));
      ys.push_back(f.y(t));
      qs.push_back(f.intensity(t));
    }
    model.sources.emplace_back(SampledFunction(grid, std::move(xs), Extrapolation::Clamp),
                               SampledFunction(grid, std::move(ys), Extrapolation::Clamp),
                               SampledFunction(grid, std::move(qs), Extrapolation::Zero));
  }
  return model;
}

Scenario build_case(int id, const CaseOverrides& o) {
  Scenario sc;
  sc.case_id = id;
  sc.name = "case" + std::to_string(id);
  double kappa = 1.0;
  double ell = 5.0;
  std::size_t n_sensors = 424;
  SensorRegion region = SensorRegion::Hemisphere;
  sc.cfg = PhysicalConfig{1.0, 20.0, 15.0};

  switch (id) {
    case 1: {
      ell = 15.0;
      const auto v = pick(o.velocity, std::array<double, 2>{0.15, 0.0});
      sc.formulas.push_back({[v](double t) { return v[0] * t; }, [v](double t) { return v[1] * t; },
                             [](double) { return 1.0; }});
      break;
    }
    case 2: {
      sc.formulas.push_back({[](double t) { return std::cos(0.3 * t) - 1.0; },
                             [](double t) { return std::sin(0.3 * t); }, nullptr});
      break;
    }
    case 3: {
      kappa = 1.2;
      ell = 4.0;
      sc.cfg = PhysicalConfig{1.0, 40.0, 35.0};
      if (o.region == SensorRegion::QuarterSphere) n_sensors = 213;
      break;
    }
    case 4: {
      sc.formulas.push_back({nullptr, nullptr, [](double) { return 1.0; }});
      sc.formulas.push_back({[](double t) { return 1.5 * std::cos(0.25 * t); },
                             [](double t) { return -1.5 * std::sin(0.25 * t); }, [](double) { return 1.0; }});
      break;
    }
    default: throw std::invalid_argument("build_case: unknown case id " + std::to_string(id));
  }

  sc.cfg.c = pick(o.c, sc.cfg.c);
  sc.cfg.T = pick(o.T, sc.cfg.T);
  sc.cfg.T0 = pick(o.T0, sc.cfg.T0);
  sc.cfg.validate();
  const double t0 = sc.cfg.T0;

  // Formulas that depend on T0 are bound after overrides.
  if (id == 2) {
    sc.formulas[0].intensity = [t0](double t) { return quartic_intensity(t, t0); };
  } else if (id == 3) {
    const double w = 2.0 * kPi / t0;
    sc.formulas.push_back({[w](double t) { return 1.6 * std::sin(w * t + 1.5 * kPi) + 16.0 / 15.0 * std::cos(3.0 * w * t); },
                           [w](double t) { return 1.6 * std::cos(w * t + 1.5 * kPi) + 16.0 / 15.0 * std::sin(3.0 * w * t); },
                           [t0](double t) { return quartic_intensity(t, t0); }});
  } else if (id == 4) {
    sc.formulas[0].x = [t0](double t) {
      const double s = t / t0;
      return 16.0 * s * s * s - 24.0 * s * s + 5.0 * s;
    };
    sc.formulas[0].y = [t0](double t) {
      const double s = t / t0;
      return 3.0 * s * (1.0 - s);
    };
  }

  sc.hyper.kappa_p = pick(o.kappa_p, pick(o.kappa, kappa));
  sc.hyper.ell_p = pick(o.ell_p, pick(o.ell, ell));
  sc.hyper.kappa_q = pick(o.kappa_q, pick(o.kappa, kappa));
  sc.hyper.ell_q = pick(o.ell_q, pick(o.ell, ell));
  sc.hyper.beta = pick(o.beta, sc.hyper.beta);
  sc.hyper.delta = pick(o.delta, sc.hyper.delta);
  sc.noise_alpha = pick(o.noise_alpha, 0.0);
  sc.closed_curve = pick(o.closed_curve, false);
  sc.latent_size = pick(o.latent_size, std::size_t{100});
  if (sc.latent_size < 2) throw std::invalid_argument("build_case: latent grid needs at least 2 points");

  region = pick(o.region, region);
  sc.sensors = sphere_sensors(pick(o.n_sensors, n_sensors), pick(o.radius, 3.0), region);
  sc.times = uniform_grid(0.0, sc.cfg.T, pick(o.n_times, kDefaultTimeCount));

  const std::size_t fine = kTruthRefinement * (sc.latent_size - 1) + 1;
  sc.truth = sample_sources(sc.formulas, uniform_grid(0.0, t0, fine));

  if (!max_speed(sc.truth, sc.cfg).subsonic) {
    throw std::invalid_argument("build_case: truth trajectory is not subsonic for this wave speed");
  }
  for (const Point3& x : sc.sensors.positions) {
    // Trajectories lie in z = 0, so z > 0 keeps every sensor off their hull.
    if (!(x.z() > 0.0)) throw std::invalid_argument("build_case: sensors must lie above the source plane");
  }
  check_timing(sc.truth, sc.sensors, sc.cfg);
  return sc;
}

Scenario build_case(const std::string& name, const CaseOverrides& overrides) {
  std::string digits = name;
  if (digits.rfind("case", 0) == 0) digits = digits.substr(4);
  if (digits.size() != 1 || digits[0] < '1' || digits[0] > '4') {
    throw std::invalid_argument("unknown scenario '" + name + "' (expected case1..case4)");
  }
  return build_case(digits[0] - '0', overrides);
}

LatentPriors build_latent_priors(const Scenario& scenario) {
  const std::vector<double> grid = scenario.latent_grid();
  const auto zero = [](double) { return 0.0; };
  GaussianProcessPrior trajectory = build_prior(grid, zero, SEKernel{scenario.hyper.kappa_p, scenario.hyper.ell_p});
  if (scenario.closed_curve) {
    trajectory = condition_on_functional(trajectory, closed_curve_functional(trajectory), 0.0);
  }
  GaussianProcessPrior intensity = build_prior(grid, zero, SEKernel{scenario.hyper.kappa_q, scenario.hyper.ell_q});
  return make_latent_priors(scenario.formulas.size(), trajectory, intensity);
}

MeasurementSet simulate_measurements(const Scenario& scenario) {
  MeasurementSet data;
  data.times = scenario.times;
  data.sensors = std::make_shared<const SensorArray>(scenario.sensors);
  data.field = forward_map(scenario.truth, scenario.sensors, scenario.times, scenario.cfg);
  return data;
}

}  // namespace movsrc
