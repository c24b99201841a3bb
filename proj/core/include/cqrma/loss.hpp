#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace cqrma {

/// Ordered quantile levels tau_1 < ... < tau_K, each strictly inside (0, 1).
class QuantileGrid {
 public:
  explicit QuantileGrid(std::vector<double> levels);
  static QuantileGrid single(double tau) { return QuantileGrid({tau}); }

  std::size_t size() const { return levels_.size(); }
  double level(std::size_t k) const { return levels_[k]; }
  const std::vector<double>& levels() const { return levels_; }
  bool operator==(const QuantileGrid&) const = default;

 private:
  std::vector<double> levels_;
};

/// Check loss rho_tau(e) = e * (tau - 1{e <= 0}). Nonnegative, zero iff e = 0.
double check_loss(double residual, double tau);

/// psi_tau(e) = tau - 1{e <= 0}. At e = 0 the indicator counts, so psi = tau - 1.
double check_subgradient(double residual, double tau);

/// Sum of check losses over an n x K residual matrix whose column k holds
/// residuals at grid level k.
double composite_objective(const Eigen::MatrixXd& residuals, const QuantileGrid& grid);

}  // namespace cqrma
