#include "cqrma/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "cqrma/errors.hpp"

namespace cqrma {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

void validate_columns(const Dataset& data, const std::vector<Index>& columns) {
  std::set<Index> seen;
  for (Index c : columns) {
    if (c < 0 || c >= data.p()) {
      throw DomainError("model column " + std::to_string(c) + " is out of range");
    }
    if (!seen.insert(c).second) {
      throw DomainError("model column " + std::to_string(c) + " repeats");
    }
  }
}

MatrixXd gather_columns(const Dataset& data, const std::vector<Index>& columns) {
  MatrixXd out(data.n(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Index>(j)) = data.X().col(columns[j]);
  }
  return out;
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::MatrixXd X,
                 std::vector<std::string> column_names)
    : y_(std::move(y)), X_(std::move(X)), column_names_(std::move(column_names)) {
  if (y_.size() == 0) {
    throw DomainError("dataset needs at least one observation");
  }
  if (X_.rows() != y_.size()) {
    throw ShapeError("covariate rows (" + std::to_string(X_.rows()) +
                     ") do not match response length (" + std::to_string(y_.size()) + ")");
  }
  if (!y_.allFinite() || !X_.allFinite()) {
    throw DomainError("dataset contains non-finite entries");
  }
  if (column_names_.empty()) {
    column_names_.reserve(static_cast<std::size_t>(X_.cols()));
    for (Index j = 0; j < X_.cols(); ++j) {
      column_names_.push_back("x" + std::to_string(j + 1));
    }
  }
  if (static_cast<Index>(column_names_.size()) != X_.cols()) {
    throw ShapeError("column name count does not match covariate count");
  }
  std::set<std::string> unique(column_names_.begin(), column_names_.end());
  if (unique.size() != column_names_.size()) {
    throw DomainError("column names must be unique");
  }
}

Dataset Dataset::rows(const std::vector<Index>& keep) const {
  VectorXd y(static_cast<Index>(keep.size()));
  MatrixXd X(static_cast<Index>(keep.size()), X_.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const Index r = keep[i];
    if (r < 0 || r >= n()) {
      throw DomainError("row index " + std::to_string(r) + " is out of range");
    }
    y[static_cast<Index>(i)] = y_[r];
    X.row(static_cast<Index>(i)) = X_.row(r);
  }
  return Dataset(std::move(y), std::move(X), column_names_);
}

Dataset Dataset::without_row(Index drop) const {
  if (drop < 0 || drop >= n()) {
    throw DomainError("row index " + std::to_string(drop) + " is out of range");
  }
  VectorXd y(n() - 1);
  MatrixXd X(n() - 1, X_.cols());
  Index w = 0;
  for (Index i = 0; i < n(); ++i) {
    if (i == drop) {
      continue;
    }
    y[w] = y_[i];
    X.row(w) = X_.row(i);
    ++w;
  }
  return Dataset(std::move(y), std::move(X), column_names_);
}

CqrFit fit_cqr(const Dataset& data, const std::vector<Index>& columns,
               const QuantileGrid& grid, const LpOptions& options,
               const CqrFit* warm_start) {
  validate_columns(data, columns);
  const Index K = static_cast<Index>(grid.size());
  const Index p = static_cast<Index>(columns.size());

  const PiecewiseLinearProgram problem =
      PiecewiseLinearProgram::regression(gather_columns(data, columns), data.y(), grid);

  LpSolution warm;
  const LpSolution* warm_ptr = nullptr;
  if (warm_start != nullptr && warm_start->quantile_count() == K &&
      warm_start->slopes.size() == p) {
    warm.parameters.resize(K + p);
    warm.parameters << warm_start->intercepts, warm_start->slopes;
    warm.dual = warm_start->dual;
    warm_ptr = &warm;
  }

  const LpSolution solution = solve_check_loss_lp(problem, warm_ptr, options);
  if (solution.status != LpStatus::optimal) {
    throw SolverError("composite fit did not converge (status " +
                          std::string(to_string(solution.status)) + ", gap " +
                          std::to_string(solution.complementarity_gap) + ")",
                      solution.iterations, solution.complementarity_gap);
  }

  CqrFit fit;
  fit.intercepts = solution.parameters.head(K);
  fit.slopes = solution.parameters.tail(p);
  fit.columns = columns;
  fit.objective = solution.objective;
  fit.diagnostics = {solution.iterations, solution.complementarity_gap, solution.status};
  fit.dual = solution.dual;
  return fit;
}

CqrFit fit_qr(const Dataset& data, const std::vector<Index>& columns, double tau,
              const LpOptions& options) {
  return fit_cqr(data, columns, QuantileGrid::single(tau), options);
}

double predict(const CqrFit& fit, const RowVectorXd& model_row, std::size_t k) {
  if (static_cast<Index>(k) >= fit.quantile_count()) {
    throw ShapeError("quantile index " + std::to_string(k) + " is out of range");
  }
  if (model_row.size() != fit.slopes.size()) {
    throw ShapeError("covariate row length " + std::to_string(model_row.size()) +
                     " does not match the fit's " + std::to_string(fit.slopes.size()) +
                     " slopes");
  }
  return fit.intercepts[static_cast<Index>(k)] + model_row.dot(fit.slopes);
}

double predict_full_row(const CqrFit& fit, const RowVectorXd& full_row, std::size_t k) {
  if (static_cast<Index>(k) >= fit.quantile_count()) {
    throw ShapeError("quantile index " + std::to_string(k) + " is out of range");
  }
  double value = fit.intercepts[static_cast<Index>(k)];
  for (std::size_t j = 0; j < fit.columns.size(); ++j) {
    const Index c = fit.columns[j];
    if (c >= full_row.size()) {
      throw ShapeError("full row does not cover model column " + std::to_string(c));
    }
    value += full_row[c] * fit.slopes[static_cast<Index>(j)];
  }
  return value;
}

double subgradient_certificate(const CqrFit& fit, const Dataset& data,
                               const QuantileGrid& grid) {
  const Index n = data.n();
  const Index K = static_cast<Index>(grid.size());
  const Index p = static_cast<Index>(fit.columns.size());
  const double y_scale = 1.0 + data.y().cwiseAbs().maxCoeff();
  const double zero_band = 1e-6 * y_scale;
  const bool have_dual = fit.dual.size() == n * K;

  // psi per stacked row; rows inside the zero band take the dual element
  // a - (1 - tau), which the LP certifies to lie in [tau - 1, tau].
  Eigen::ArrayXd psi(n * K);
  for (Index k = 0; k < K; ++k) {
    const double tau = grid.level(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) {
      double r = data.y()[i] - fit.intercepts[k];
      for (std::size_t j = 0; j < fit.columns.size(); ++j) {
        r -= data.X()(i, fit.columns[j]) * fit.slopes[static_cast<Index>(j)];
      }
      const Index row = k * n + i;
      if (have_dual && std::abs(r) <= zero_band) {
        psi[row] = std::clamp(fit.dual[row] - (1.0 - tau), tau - 1.0, tau);
      } else {
        psi[row] = check_subgradient(r, tau);
      }
    }
  }

  double worst = 0.0;
  for (Index k = 0; k < K; ++k) {
    const double total = psi.segment(k * n, n).sum();
    worst = std::max(worst, std::abs(total) / static_cast<double>(n));
  }
  for (Index j = 0; j < p; ++j) {
    const auto column = data.X().col(fit.columns[static_cast<std::size_t>(j)]);
    const double norm = column.norm();
    double total = 0.0;
    for (Index k = 0; k < K; ++k) {
      total += (psi.segment(k * n, n) * column.array()).sum();
    }
    worst = std::max(worst, std::abs(total) / (std::max(norm, 1e-300) *
                                               static_cast<double>(K)));
  }
  return worst;
}

}  // namespace cqrma
