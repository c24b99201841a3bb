#include "cqrma/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cqrma/errors.hpp"

namespace cqrma {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

void check_tensor_y(const LooPredictionTensor& tensor, const VectorXd& y,
                    const QuantileGrid& grid) {
  if (tensor.n() != y.size()) {
    throw ShapeError("tensor rows and response length differ");
  }
  if (tensor.quantile_count() != static_cast<Index>(grid.size())) {
    throw ShapeError("tensor level count and grid size differ");
  }
}

double stacked_mean_loss(const Eigen::VectorXd& residuals, const QuantileGrid& grid,
                         Index n) {
  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double tau = grid.level(k);
    const auto seg = residuals.segment(static_cast<Index>(k) * n, n).array();
    total += (seg * (tau - (seg <= 0.0).cast<double>())).sum();
  }
  return total / static_cast<double>(residuals.size());
}

// softmax(-score/2) with max subtraction; -inf scores soak up all the mass.
VectorXd smoothed_weights(const std::vector<double>& scores) {
  const Index M = static_cast<Index>(scores.size());
  VectorXd weights(M);
  const double best = *std::min_element(scores.begin(), scores.end());
  if (std::isinf(best)) {
    Index zero_count = 0;
    for (double score : scores) {
      if (std::isinf(score)) {
        ++zero_count;
      }
    }
    for (Index m = 0; m < M; ++m) {
      weights[m] = std::isinf(scores[static_cast<std::size_t>(m)])
                       ? 1.0 / static_cast<double>(zero_count)
                       : 0.0;
    }
    return weights;
  }
  for (Index m = 0; m < M; ++m) {
    weights[m] = std::exp(-0.5 * (scores[static_cast<std::size_t>(m)] - best));
  }
  return weights / weights.sum();
}

}  // namespace

WeightVector::WeightVector(Eigen::VectorXd weights) : w_(std::move(weights)) {
  if (w_.size() == 0) {
    throw DomainError("weight vector is empty");
  }
  if ((w_.array() < 0.0).any()) {
    throw DomainError("weights must be nonnegative");
  }
  if (std::abs(w_.sum() - 1.0) > 1e-12) {
    throw DomainError("weights must sum to one, got " + std::to_string(w_.sum()));
  }
}

WeightVector WeightVector::vertex(Index size, Index index) {
  if (index < 0 || index >= size) {
    throw DomainError("vertex index out of range");
  }
  VectorXd w = VectorXd::Zero(size);
  w[index] = 1.0;
  return WeightVector(std::move(w));
}

double cv_criterion(const LooPredictionTensor& tensor, const VectorXd& y,
                    const QuantileGrid& grid, const WeightVector& weights) {
  check_tensor_y(tensor, y, grid);
  if (weights.size() != tensor.model_count()) {
    throw ShapeError("weight count and model count differ");
  }
  const VectorXd stacked = stack_response(y, grid.size());
  const VectorXd residuals = stacked - tensor.flattened() * weights.values();
  return stacked_mean_loss(residuals, grid, tensor.n());
}

double single_level_cv_criterion(const LooPredictionTensor& tensor, const VectorXd& y,
                                 const QuantileGrid& grid, Index k,
                                 const WeightVector& weights) {
  check_tensor_y(tensor, y, grid);
  if (k < 0 || k >= tensor.quantile_count()) {
    throw ShapeError("grid level index out of range");
  }
  const double tau = grid.level(static_cast<std::size_t>(k));
  const auto residuals =
      (y - tensor.quantile_block(k) * weights.values()).array();
  return (residuals * (tau - (residuals <= 0.0).cast<double>())).sum() /
         static_cast<double>(tensor.n());
}

WeightVector select_weights_mcvc(const LooPredictionTensor& tensor, const VectorXd& y,
                                 const QuantileGrid& grid, const LpOptions& options) {
  check_tensor_y(tensor, y, grid);
  if (tensor.mode() != JackknifeMode::composite) {
    throw DomainError("composite weight selection needs a composite-mode tensor");
  }
  const VectorXd stacked = stack_response(y, grid.size());
  const LpSolution solution =
      solve_simplex_weight_lp(tensor.flattened(), stacked, grid, options);
  return WeightVector(solution.parameters);
}

std::vector<WeightVector> select_weights_mcv0(const LooPredictionTensor& tensor,
                                              const VectorXd& y, const QuantileGrid& grid,
                                              const LpOptions& options) {
  check_tensor_y(tensor, y, grid);
  if (tensor.mode() != JackknifeMode::per_quantile) {
    throw DomainError("per-quantile weight selection needs a per-quantile tensor");
  }
  std::vector<WeightVector> weights;
  weights.reserve(grid.size());
  for (Index k = 0; k < tensor.quantile_count(); ++k) {
    const QuantileGrid level = QuantileGrid::single(grid.level(static_cast<std::size_t>(k)));
    const LpSolution solution =
        solve_simplex_weight_lp(tensor.quantile_block(k), y, level, options);
    weights.emplace_back(solution.parameters);
  }
  return weights;
}

CriterionTable information_criteria(const std::vector<CqrFit>& fits,
                                    const LooPredictionTensor& tensor,
                                    const VectorXd& y, const QuantileGrid& grid,
                                    bool loo_fitted_values) {
  check_tensor_y(tensor, y, grid);
  if (static_cast<Index>(fits.size()) != tensor.model_count()) {
    throw ShapeError("fit count and tensor model count differ");
  }
  const Index n = tensor.n();
  const double nK = static_cast<double>(n) * static_cast<double>(grid.size());
  const VectorXd stacked = stack_response(y, grid.size());

  CriterionTable table;
  std::vector<double> aic_scores, sic_scores;
  for (Index m = 0; m < tensor.model_count(); ++m) {
    const auto& fit = fits[static_cast<std::size_t>(m)];
    const double loo_mean =
        stacked_mean_loss(stacked - tensor.flattened().col(m), grid, n);
    const double inner_mean =
        loo_fitted_values ? loo_mean : fit.objective / nK;
    const double penalty_terms =
        static_cast<double>(fit.columns.size()) + static_cast<double>(grid.size());

    ModelCriteria row;
    row.model_id = m + 1;
    row.covariate_count = static_cast<Index>(fit.columns.size());
    if (inner_mean <= 0.0) {
      // log(0): the model reproduces the sample exactly; it wins outright.
      row.aic = -std::numeric_limits<double>::infinity();
      row.sic = -std::numeric_limits<double>::infinity();
    } else {
      row.aic = 2.0 * nK * std::log(inner_mean) + 2.0 * penalty_terms;
      row.sic = 2.0 * nK * std::log(inner_mean) + penalty_terms * std::log(nK);
    }
    row.cv = loo_mean;
    aic_scores.push_back(row.aic);
    sic_scores.push_back(row.sic);
    table.models.push_back(row);
  }
  table.smoothed_aic_weights = smoothed_weights(aic_scores);
  table.smoothed_sic_weights = smoothed_weights(sic_scores);
  return table;
}

int select_model(const CriterionTable& table, SelectionRule rule) {
  if (table.models.empty()) {
    throw DomainError("criterion table is empty");
  }
  const ModelCriteria* best = nullptr;
  for (const auto& row : table.models) {
    const double score = rule == SelectionRule::aic_c   ? row.aic
                         : rule == SelectionRule::sic_c ? row.sic
                                                        : row.cv;
    if (best == nullptr) {
      best = &row;
      continue;
    }
    const double best_score = rule == SelectionRule::aic_c   ? best->aic
                              : rule == SelectionRule::sic_c ? best->sic
                                                             : best->cv;
    if (score < best_score ||
        (score == best_score && (row.covariate_count < best->covariate_count ||
                                 (row.covariate_count == best->covariate_count &&
                                  row.model_id < best->model_id)))) {
      best = &row;
    }
  }
  return best->model_id;
}

}  // namespace cqrma
