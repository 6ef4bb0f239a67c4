#include "movsrc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace movsrc {

namespace {

void check_covers(const Source& src, std::span<const double> grid, const char* who) {
  if (grid.empty()) throw std::invalid_argument(std::string(who) + ": empty grid");
  const auto g = src.grid();
  const double tol = 1e-9 * std::max(1.0, std::abs(g.back() - g.front()));
  if (grid.front() < g.front() - tol || grid.back() > g.back() + tol) {
    throw std::invalid_argument(std::string(who) + ": grid mismatch between estimate, truth and metric grid");
  }
}

void check_pairing(const SourceModel& a, const SourceModel& b) {
  if (a.sources.size() != b.sources.size() || a.sources.empty()) {
    throw std::invalid_argument("error metric: estimate and truth have different source counts");
  }
}

}  // namespace

double trajectory_error(const Source& estimate, const Source& truth, std::span<const double> grid) {
  check_covers(estimate, grid, "trajectory_error");
  check_covers(truth, grid, "trajectory_error");
  double acc = 0.0;
  for (double t : grid) acc += (estimate.position(t) - truth.position(t)).squaredNorm();
  return std::sqrt(acc / static_cast<double>(grid.size()));
}

double intensity_error(const Source& estimate, const Source& truth, std::span<const double> grid) {
  check_covers(estimate, grid, "intensity_error");
  check_covers(truth, grid, "intensity_error");
  double acc = 0.0;
  for (double t : grid) {
    const double d = estimate.intensity(t) - truth.intensity(t);
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(grid.size()));
}

double trajectory_error(const SourceModel& estimate, const SourceModel& truth, std::span<const double> grid) {
  check_pairing(estimate, truth);
  double sum = 0.0;
  for (std::size_t s = 0; s < truth.sources.size(); ++s) sum += trajectory_error(estimate.sources[s], truth.sources[s], grid);
  return sum / static_cast<double>(truth.sources.size());
}

double intensity_error(const SourceModel& estimate, const SourceModel& truth, std::span<const double> grid) {
  check_pairing(estimate, truth);
  double sum = 0.0;
  for (std::size_t s = 0; s < truth.sources.size(); ++s) sum += intensity_error(estimate.sources[s], truth.sources[s], grid);
  return sum / static_cast<double>(truth.sources.size());
}

double wavefield_error(const SourceModel& estimate, const MeasurementSet& data, const PhysicalConfig& cfg) {
  const FieldMatrix predicted = forward_map(estimate, *data.sensors, data.times, cfg);
  const auto n = static_cast<double>(data.field.size());
  return std::sqrt((data.field - predicted).squaredNorm() / n);
}

}  // namespace movsrc
