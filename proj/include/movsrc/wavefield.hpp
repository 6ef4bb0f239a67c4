#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "movsrc/sampled_function.hpp"

namespace movsrc {

using Point3 = Eigen::Vector3d;
/// Sensors along rows, measurement times along columns.
using FieldMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;

// Errors ---------------------------------------------------------------------

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NearFieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input breaks an operation's precondition in a way that
/// would make the result meaningless (e.g. a supersonic source reaching
/// the forward map).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Domain types ---------------------------------------------------------------

struct PhysicalConfig {
  double c = 1.0;    ///< wave speed
  double T = 20.0;   ///< final measurement time
  double T0 = 15.0;  ///< source turn-off time

  /// Throws std::invalid_argument unless c > 0 and 0 < T0 < T.
  void validate() const;
};

/// One moving point source in the z = 0 plane. All three functions share
/// the same emission grid.
struct Source {
  SampledFunction x;
  SampledFunction y;
  SampledFunction intensity;

  Source() = default;
  Source(SampledFunction px, SampledFunction py, SampledFunction q);

  Point3 position(double tau) const { return {x(tau), y(tau), 0.0}; }
  Point3 velocity(double tau) const { return {x.derivative(tau), y.derivative(tau), 0.0}; }
  std::span<const double> grid() const { return x.grid(); }
};

struct SourceModel {
  std::vector<Source> sources;
};

enum class SensorRegion { Hemisphere, QuarterSphere, Custom };

std::string to_string(SensorRegion region);
SensorRegion sensor_region_from_string(const std::string& name);

struct SensorArray {
  std::vector<Point3> positions;
  double radius = 0.0;
  SensorRegion region = SensorRegion::Custom;

  std::size_t size() const { return positions.size(); }
  /// Analytic area of the sensor-bearing surface; Custom regions report
  /// the full sphere.
  double area() const;
};

struct MeasurementSet {
  std::vector<double> times;
  std::shared_ptr<const SensorArray> sensors;
  FieldMatrix field;
  double noise_alpha = 0.0;
};

// Operations -----------------------------------------------------------------

struct RetardedTime {
  double tau = 0.0;
  double residual = 0.0;  ///< |c (t - tau) - |x - p(tau)||
  int iterations = 0;
  /// The signal left before the source started (caller treats the field as 0).
  bool before_wavefront() const { return tau < 0.0; }
};

/// Emission time tau <= t with c (t - tau) = |x - p(tau)|.
RetardedTime retarded_time(const Point3& sensor, double t, const Source& source,
                           const PhysicalConfig& cfg);

/// Exact field u(t, x) of all sources, summed.
double evaluate_field(const SourceModel& model, const Point3& sensor, double t,
                      const PhysicalConfig& cfg);

/// Field on every (sensor, measurement time) pair via observation-time
/// interpolation. Measurement times must be non-decreasing.
FieldMatrix forward_map(const SourceModel& model, const SensorArray& sensors,
                        std::span<const double> times, const PhysicalConfig& cfg);

/// Same as forward_map, writing into a preallocated N_s x N_t matrix.
void forward_map_into(const SourceModel& model, const SensorArray& sensors,
                      std::span<const double> times, const PhysicalConfig& cfg,
                      FieldMatrix& out);

/// Time-dependent noise shared across sensors, relative level alpha.
MeasurementSet add_noise(const MeasurementSet& measurements, double alpha, std::uint64_t seed);

/// Per-time noise standard deviations for relative level alpha.
std::vector<double> noise_levels(const MeasurementSet& measurements, double alpha);

struct SpeedCheck {
  double max_speed = 0.0;
  bool subsonic = true;
};

SpeedCheck max_speed(const SourceModel& model, const PhysicalConfig& cfg);

struct TimingCheck {
  double t_star = 0.0;  ///< T0 + max sensor-to-trajectory distance / c
  bool satisfied = true;
};

/// Checks T > T0 + max|x - p|/c; logs a warning when it fails.
TimingCheck check_timing(const SourceModel& model, const SensorArray& sensors,
                         const PhysicalConfig& cfg);

}  // namespace movsrc
