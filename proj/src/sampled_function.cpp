#include "movsrc/sampled_function.hpp"

#include <algorithm>
#include <stdexcept>

namespace movsrc {

SampledFunction::SampledFunction(std::vector<double> grid, std::vector<double> values,
                                 Extrapolation rule)
    : grid_(std::move(grid)), values_(std::move(values)), rule_(rule) {
  if (grid_.empty() || grid_.size() != values_.size()) {
    throw std::invalid_argument("SampledFunction: grid and values must be non-empty and of equal length");
  }
  for (std::size_t k = 1; k < grid_.size(); ++k) {
    if (!(grid_[k] > grid_[k - 1])) {
      throw std::invalid_argument("SampledFunction: grid must be strictly increasing");
    }
  }
  const std::size_t m = grid_.size();
  node_derivatives_.assign(m, 0.0);
  if (m >= 2) {
    node_derivatives_[0] = (values_[1] - values_[0]) / (grid_[1] - grid_[0]);
    node_derivatives_[m - 1] = (values_[m - 1] - values_[m - 2]) / (grid_[m - 1] - grid_[m - 2]);
    for (std::size_t k = 1; k + 1 < m; ++k) {
      // Non-uniform three-point formula; reduces to the central difference
      // on uniform grids.
      const double hl = grid_[k] - grid_[k - 1];
      const double hr = grid_[k + 1] - grid_[k];
      const double dl = (values_[k] - values_[k - 1]) / hl;
      const double dr = (values_[k + 1] - values_[k]) / hr;
      node_derivatives_[k] = (hr * dl + hl * dr) / (hl + hr);
    }
  }
}

std::size_t SampledFunction::segment(double t) const {
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(grid_.begin(), it));
  k = k == 0 ? 0 : k - 1;
  return std::min(k, grid_.size() - 2);
}

double SampledFunction::operator()(double t) const {
  if (t < grid_.front() || t > grid_.back()) {
    if (rule_ == Extrapolation::Zero) return 0.0;
    return t < grid_.front() ? values_.front() : values_.back();
  }
  if (grid_.size() == 1) return values_.front();
  const std::size_t k = segment(t);
  const double w = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

double SampledFunction::derivative(double t) const {
  if (grid_.size() == 1 || t < grid_.front() || t > grid_.back()) return 0.0;
  const std::size_t k = segment(t);
  const double w = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
  return (1.0 - w) * node_derivatives_[k] + w * node_derivatives_[k + 1];
}

double SampledFunction::segment_slope(double t) const {
  if (grid_.size() == 1 || t < grid_.front() || t > grid_.back()) return 0.0;
  const std::size_t k = segment(t);
  return (values_[k + 1] - values_[k]) / (grid_[k + 1] - grid_[k]);
}

std::vector<double> uniform_grid(double a, double b, std::size_t m) {
  if (m == 0) throw std::invalid_argument("uniform_grid: need at least one point");
  std::vector<double> grid(m);
  if (m == 1) {
    grid[0] = a;
    return grid;
  }
  const double h = (b - a) / static_cast<double>(m - 1);
  for (std::size_t k = 0; k < m; ++k) grid[k] = a + h * static_cast<double>(k);
  grid[m - 1] = b;
  return grid;
}

}  // namespace movsrc
