#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqrma/loss.hpp"
#include "cqrma/lp.hpp"

namespace cqrma {

/// Immutable regression sample: response, covariate matrix, unique column
/// names. Construction rejects non-finite entries, so downstream code never
/// re-validates.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
          std::vector<std::string> column_names = {});

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index p() const { return X_.cols(); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const std::vector<std::string>& column_names() const { return column_names_; }

  /// Copy of the selected rows, order preserved.
  Dataset rows(const std::vector<Eigen::Index>& keep) const;
  /// Copy with row `drop` deleted (leave-one-out building block).
  Dataset without_row(Eigen::Index drop) const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  std::vector<std::string> column_names_;
};

struct SolverDiagnostics {
  int iterations = 0;
  double complementarity_gap = 0.0;
  LpStatus status = LpStatus::optimal;
};

/// Joint composite fit of one candidate column subset: K quantile-specific
/// intercepts, one slope vector shared across all levels, the attained
/// objective, and solver state reusable as a warm start.
struct CqrFit {
  Eigen::VectorXd intercepts;           // one per grid level
  Eigen::VectorXd slopes;               // aligned with `columns`
  std::vector<Eigen::Index> columns;    // indices into the parent Dataset
  double objective = 0.0;
  SolverDiagnostics diagnostics;
  Eigen::VectorXd dual;                 // row duals of the fit LP

  Eigen::Index quantile_count() const { return intercepts.size(); }
};

/// Minimises sum_k sum_i rho_{tau_k}(y_i - b_k - x_{i(m)}' beta) jointly over
/// the K intercepts and the shared slopes. `columns` may be empty for an
/// intercepts-only fit. Throws SolverError when the LP cannot certify
/// optimality.
CqrFit fit_cqr(const Dataset& data, const std::vector<Eigen::Index>& columns,
               const QuantileGrid& grid, const LpOptions& options = {},
               const CqrFit* warm_start = nullptr);

/// Single-quantile regression: identical to fit_cqr with a singleton grid.
CqrFit fit_qr(const Dataset& data, const std::vector<Eigen::Index>& columns,
              double tau, const LpOptions& options = {});

/// b_k + x' beta for a row holding exactly the fit's model columns.
double predict(const CqrFit& fit, const Eigen::RowVectorXd& model_row, std::size_t k);

/// Same, gathering the model columns out of a full covariate row.
double predict_full_row(const CqrFit& fit, const Eigen::RowVectorXd& full_row,
                        std::size_t k);

/// Stationarity certificate of a converged fit. Each free column's
/// subgradient sum is scaled by its stated bound (slope j: ||x_j|| * K,
/// intercept k: n); the largest scaled magnitude is returned and should sit
/// below the solver tolerance. Rows with numerically zero residuals use the
/// subdifferential element implied by the LP duals rather than the fixed
/// psi convention, which is only a one-sided choice.
double subgradient_certificate(const CqrFit& fit, const Dataset& data,
                               const QuantileGrid& grid);

}  // namespace cqrma
