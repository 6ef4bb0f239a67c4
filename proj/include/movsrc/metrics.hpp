#pragma once

#include <span>

#include "movsrc/wavefield.hpp"

namespace movsrc {

/// sqrt(mean over grid of |p_hat - p|^2); throws on grid mismatch.
double trajectory_error(const Source& estimate, const Source& truth, std::span<const double> grid);
double intensity_error(const Source& estimate, const Source& truth, std::span<const double> grid);

/// Source-averaged versions; models must list sources in the same order.
double trajectory_error(const SourceModel& estimate, const SourceModel& truth, std::span<const double> grid);
double intensity_error(const SourceModel& estimate, const SourceModel& truth, std::span<const double> grid);

/// RMS over all N_s * N_t entries of U - G(estimate).
double wavefield_error(const SourceModel& estimate, const MeasurementSet& data, const PhysicalConfig& cfg);

}  // namespace movsrc
