#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace movsrc {

/// How a SampledFunction behaves outside its grid.
enum class Extrapolation {
  Zero,   ///< vanishes outside [grid.front(), grid.back()] (source intensities)
  Clamp,  ///< holds the end values (trajectory coordinates)
};

/**
 * A scalar function of time stored as values on a strictly increasing
 * emission-time grid, evaluated by piecewise-linear interpolation.
 *
 * The derivative at a node is the central difference of its neighbours
 * (one-sided at the ends); between nodes it is interpolated linearly, so
 * it is continuous and second-order accurate for smooth data. Outside the
 * grid the derivative is zero for both extrapolation rules.
 */
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(std::vector<double> grid, std::vector<double> values,
                  Extrapolation rule);

  double operator()(double t) const;
  double derivative(double t) const;

  /// Slope of the interpolant itself (segment finite difference).
  double segment_slope(double t) const;

  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> node_derivatives() const { return node_derivatives_; }
  Extrapolation rule() const { return rule_; }
  std::size_t size() const { return grid_.size(); }

  /// Index k of the segment [grid[k], grid[k+1]] containing t; t must lie
  /// inside the grid.
  std::size_t segment(double t) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> node_derivatives_;
  Extrapolation rule_ = Extrapolation::Clamp;
};

/// M points uniformly spaced on [a, b], endpoints included.
std::vector<double> uniform_grid(double a, double b, std::size_t m);

}  // namespace movsrc
