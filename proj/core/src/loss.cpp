#include "cqrma/loss.hpp"

#include <string>

#include "cqrma/errors.hpp"

namespace cqrma {

namespace {

void require_level(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw DomainError("quantile level must lie strictly inside (0, 1), got " +
                      std::to_string(tau));
  }
}

}  // namespace

QuantileGrid::QuantileGrid(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) {
    throw DomainError("quantile grid needs at least one level");
  }
  double previous = 0.0;
  for (double tau : levels_) {
    require_level(tau);
    if (tau <= previous) {
      throw DomainError("quantile levels must be strictly increasing");
    }
    previous = tau;
  }
}

double check_loss(double residual, double tau) {
  require_level(tau);
  const double value = residual * (tau - (residual <= 0.0 ? 1.0 : 0.0));
  return value == 0.0 ? 0.0 : value;  // normalise -0.0
}

double check_subgradient(double residual, double tau) {
  require_level(tau);
  return tau - (residual <= 0.0 ? 1.0 : 0.0);
}

double composite_objective(const Eigen::MatrixXd& residuals, const QuantileGrid& grid) {
  if (static_cast<std::size_t>(residuals.cols()) != grid.size()) {
    throw ShapeError("residual matrix has " + std::to_string(residuals.cols()) +
                     " columns, quantile grid has " + std::to_string(grid.size()));
  }
  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double tau = grid.level(k);
    const auto col = residuals.col(static_cast<Eigen::Index>(k)).array();
    total += (col * (tau - (col <= 0.0).cast<double>())).sum();
  }
  return total;
}

}  // namespace cqrma
