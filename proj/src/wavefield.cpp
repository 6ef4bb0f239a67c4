#include "movsrc/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

namespace movsrc {

namespace {

constexpr int kMaxRetardedIterations = 200;

double near_field_threshold(const Point3& sensor) {
  const double scale = sensor.norm();
  return 1e-6 * (scale > 0.0 ? scale : 1.0);
}

bool same_grid(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

void PhysicalConfig::validate() const {
  if (!(c > 0.0)) throw std::invalid_argument("PhysicalConfig: wave speed c must be positive");
  if (!(T0 > 0.0 && T0 < T)) {
    throw std::invalid_argument("PhysicalConfig: need 0 < T0 < T");
  }
}

Source::Source(SampledFunction px, SampledFunction py, SampledFunction q)
    : x(std::move(px)), y(std::move(py)), intensity(std::move(q)) {
  if (!same_grid(x.grid(), y.grid()) || !same_grid(x.grid(), intensity.grid())) {
    throw std::invalid_argument("Source: trajectory and intensity must share one emission grid");
  }
}

std::string to_string(SensorRegion region) {
  switch (region) {
    case SensorRegion::Hemisphere: return "hemisphere";
    case SensorRegion::QuarterSphere: return "quarter";
    case SensorRegion::Custom: return "custom";
  }
  return "custom";
}

SensorRegion sensor_region_from_string(const std::string& name) {
  if (name == "hemisphere") return SensorRegion::Hemisphere;
  if (name == "quarter" || name == "quarter-sphere") return SensorRegion::QuarterSphere;
  if (name == "custom") return SensorRegion::Custom;
  throw std::invalid_argument("unknown sensor region '" + name + "'");
}

double SensorArray::area() const {
  const double r2 = radius * radius;
  switch (region) {
    case SensorRegion::Hemisphere: return 2.0 * kPi * r2;
    case SensorRegion::QuarterSphere: return kPi * r2;
    case SensorRegion::Custom: return 4.0 * kPi * r2;
  }
  return 4.0 * kPi * r2;
}

RetardedTime retarded_time(const Point3& sensor, double t, const Source& source,
                           const PhysicalConfig& cfg) {
  const double c = cfg.c;
  const double tol = 1e-12 * std::max(1.0, cfg.T);
  const auto g = [&](double tau) { return c * (t - tau) - (sensor - source.position(tau)).norm(); };

  // The path is piecewise linear and clamped, so it stays inside the hull
  // of its nodes: g(t - r_max / c) >= 0 and g(t) <= 0 bracket the root.
  double r_max = 0.0;
  const auto xs = source.x.values();
  const auto ys = source.y.values();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    r_max = std::max(r_max, (sensor - Point3(xs[k], ys[k], 0.0)).norm());
  }
  double lo = t - r_max / c;
  double hi = t;

  double tau = t;
  double gt = g(tau);
  for (int it = 0; it < kMaxRetardedIterations; ++it) {
    if (std::abs(gt) <= tol * c) return {tau, std::abs(gt), it};
    if (gt > 0.0) {
      lo = tau;
    } else {
      hi = tau;
    }
    const Point3 d = sensor - source.position(tau);
    const double r = d.norm();
    const Point3 slope(source.x.segment_slope(tau), source.y.segment_slope(tau), 0.0);
    const double h = r > 0.0 ? c - d.dot(slope) / r : c;
    double next = h > 0.0 ? tau + gt / h : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    tau = next;
    gt = g(tau);
  }
  if (std::abs(gt) <= tol * c) return {tau, std::abs(gt), kMaxRetardedIterations};
  std::ostringstream msg;
  msg << "retarded_time: no convergence after " << kMaxRetardedIterations
      << " iterations (residual " << std::abs(gt) << ")";
  throw SolverFailure(msg.str(), std::abs(gt));
}

double evaluate_field(const SourceModel& model, const Point3& sensor, double t,
                      const PhysicalConfig& cfg) {
  const double c = cfg.c;
  double u = 0.0;
  for (const Source& src : model.sources) {
    if ((sensor - src.position(0.0)).norm() >= c * t) continue;
    const RetardedTime rt = retarded_time(sensor, t, src, cfg);
    const double q = rt.tau > cfg.T0 ? 0.0 : src.intensity(rt.tau);
    if (q == 0.0) continue;
    const Point3 d = sensor - src.position(rt.tau);
    const double r = d.norm();
    if (r < near_field_threshold(sensor)) {
      throw NearFieldError("evaluate_field: sensor lies on the source trajectory");
    }
    const double h = c - d.dot(src.velocity(rt.tau)) / r;
    u += c / (4.0 * kPi) * q / (r * h);
  }
  return u;
}

void forward_map_into(const SourceModel& model, const SensorArray& sensors,
                      std::span<const double> times, const PhysicalConfig& cfg,
                      FieldMatrix& out) {
  const auto n_s = static_cast<Eigen::Index>(sensors.size());
  const auto n_t = static_cast<Eigen::Index>(times.size());
  for (Eigen::Index j = 1; j < n_t; ++j) {
    if (times[j] < times[j - 1]) throw std::invalid_argument("forward_map: measurement times must be sorted");
  }
  out.resize(n_s, n_t);
  out.setZero();

  const double c = cfg.c;
  const double amp = c / (4.0 * kPi);
  std::vector<double> obs_t;
  std::vector<double> obs_u;

  for (const Source& src : model.sources) {
    const auto grid = src.grid();
    const auto xs = src.x.values();
    const auto ys = src.y.values();
    const auto qs = src.intensity.values();
    const auto vx = src.x.node_derivatives();
    const auto vy = src.y.node_derivatives();
    const std::size_t m = grid.size();
    obs_t.resize(m);
    obs_u.resize(m);

    for (Eigen::Index i = 0; i < n_s; ++i) {
      const Point3& x = sensors.positions[static_cast<std::size_t>(i)];
      const double thr = near_field_threshold(x);
      for (std::size_t k = 0; k < m; ++k) {
        const double dx = x.x() - xs[k];
        const double dy = x.y() - ys[k];
        const double dz = x.z();
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (r < thr) throw NearFieldError("forward_map: sensor lies on the source trajectory");
        obs_t[k] = grid[k] + r / c;
        if (k > 0 && !(obs_t[k] > obs_t[k - 1])) {
          throw ContractViolation("forward_map: observation times not increasing (supersonic source)");
        }
        const double q = grid[k] > cfg.T0 ? 0.0 : qs[k];
        const double h = c - (dx * vx[k] + dy * vy[k]) / r;
        obs_u[k] = q == 0.0 ? 0.0 : amp * q / (r * h);
      }

      auto row = out.row(i);
      std::size_t k = 0;
      for (Eigen::Index j = 0; j < n_t; ++j) {
        const double t = times[static_cast<std::size_t>(j)];
        if (t < obs_t.front()) continue;
        if (t > obs_t.back()) break;
        while (k + 1 < m && obs_t[k + 1] < t) ++k;
        if (k + 1 == m) {
          row(j) += obs_u[k];
          continue;
        }
        const double w = (t - obs_t[k]) / (obs_t[k + 1] - obs_t[k]);
        row(j) += (1.0 - w) * obs_u[k] + w * obs_u[k + 1];
      }
    }
  }
}

FieldMatrix forward_map(const SourceModel& model, const SensorArray& sensors,
                        std::span<const double> times, const PhysicalConfig& cfg) {
  FieldMatrix out;
  forward_map_into(model, sensors, times, cfg, out);
  return out;
}

std::vector<double> noise_levels(const MeasurementSet& measurements, double alpha) {
  const auto& field = measurements.field;
  const double area = measurements.sensors->area();
  const auto n_s = static_cast<double>(field.rows());
  std::vector<double> sigma(static_cast<std::size_t>(field.cols()), 0.0);
  for (Eigen::Index l = 0; l < field.cols(); ++l) {
    sigma[static_cast<std::size_t>(l)] = alpha * std::sqrt(area / n_s * field.col(l).squaredNorm());
  }
  return sigma;
}

MeasurementSet add_noise(const MeasurementSet& measurements, double alpha, std::uint64_t seed) {
  if (alpha < 0.0) throw std::invalid_argument("add_noise: alpha must be non-negative");
  MeasurementSet noisy = measurements;
  noisy.noise_alpha = alpha;
  if (alpha == 0.0) return noisy;

  const std::vector<double> sigma = noise_levels(measurements, alpha);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index l = 0; l < noisy.field.cols(); ++l) {
    const double eps = sigma[static_cast<std::size_t>(l)] * normal(engine);
    noisy.field.col(l).array() += eps;
  }
  return noisy;
}

SpeedCheck max_speed(const SourceModel& model, const PhysicalConfig& cfg) {
  SpeedCheck check;
  for (const Source& src : model.sources) {
    const auto grid = src.grid();
    const auto xs = src.x.values();
    const auto ys = src.y.values();
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const double dt = grid[k] - grid[k - 1];
      const double speed = std::hypot(xs[k] - xs[k - 1], ys[k] - ys[k - 1]) / dt;
      check.max_speed = std::max(check.max_speed, speed);
    }
  }
  check.subsonic = check.max_speed < cfg.c;
  return check;
}

TimingCheck check_timing(const SourceModel& model, const SensorArray& sensors,
                         const PhysicalConfig& cfg) {
  double range = 0.0;
  for (const Source& src : model.sources) {
    const auto xs = src.x.values();
    const auto ys = src.y.values();
    for (const Point3& x : sensors.positions) {
      for (std::size_t k = 0; k < xs.size(); ++k) {
        range = std::max(range, (x - Point3(xs[k], ys[k], 0.0)).norm());
      }
    }
  }
  TimingCheck check;
  check.t_star = cfg.T0 + range / cfg.c;
  check.satisfied = cfg.T > check.t_star;
  if (!check.satisfied) {
    spdlog::warn("final time T = {} does not exceed T0 + max range / c = {}; late signals are cut off",
                 cfg.T, check.t_star);
  }
  return check;
}

}  // namespace movsrc
