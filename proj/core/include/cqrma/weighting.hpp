#pragma once

#include <vector>

#include "cqrma/model_space.hpp"

namespace cqrma {

/// Point of the unit simplex: nonnegative entries summing to one (checked to
/// 1e-12 at construction).
class WeightVector {
 public:
  explicit WeightVector(Eigen::VectorXd weights);
  static WeightVector vertex(Eigen::Index size, Eigen::Index index);

  const Eigen::VectorXd& values() const { return w_; }
  Eigen::Index size() const { return w_.size(); }
  double operator[](Eigen::Index m) const { return w_[m]; }

 private:
  Eigen::VectorXd w_;
};

/// Leave-one-out composite CV criterion:
/// (1/(nK)) sum_{i,k} rho_{tau_k}(y_i - sum_m w_m yhat_{ikm}).
double cv_criterion(const LooPredictionTensor& tensor, const Eigen::VectorXd& y,
                    const QuantileGrid& grid, const WeightVector& weights);

/// Single-level CV criterion used by the per-quantile scheme:
/// (1/n) sum_i rho_{tau_k}(y_i - sum_m w_{m} yhat_{ikm}).
double single_level_cv_criterion(const LooPredictionTensor& tensor,
                                 const Eigen::VectorXd& y, const QuantileGrid& grid,
                                 Eigen::Index k, const WeightVector& weights);

/// argmin of cv_criterion over the simplex (composite-mode tensor required).
WeightVector select_weights_mcvc(const LooPredictionTensor& tensor,
                                 const Eigen::VectorXd& y, const QuantileGrid& grid,
                                 const LpOptions& options = {});

/// One simplex argmin per grid level (per-quantile tensor required).
std::vector<WeightVector> select_weights_mcv0(const LooPredictionTensor& tensor,
                                              const Eigen::VectorXd& y,
                                              const QuantileGrid& grid,
                                              const LpOptions& options = {});

struct ModelCriteria {
  int model_id = 0;
  Eigen::Index covariate_count = 0;
  double aic = 0.0;
  double sic = 0.0;
  /// Leave-one-out mean composite loss; model selection by CV picks its argmin.
  double cv = 0.0;
};

struct CriterionTable {
  std::vector<ModelCriteria> models;
  Eigen::VectorXd smoothed_aic_weights;
  Eigen::VectorXd smoothed_sic_weights;
};

/// AIC = 2nK log(mean loss) + 2(k_m + K) and SIC = 2nK log(mean loss) +
/// (k_m + K) log(nK) per model, plus softmax(-score/2) smoothed weights
/// (computed with max subtraction; the raw formula overflows for realistic
/// score magnitudes). By default the inner mean uses the leave-one-out fitted
/// values; `loo_fitted_values = false` switches to full-sample residuals.
/// A model with zero mean loss gets score -inf and all the smoothed weight
/// (split evenly among such models).
CriterionTable information_criteria(const std::vector<CqrFit>& fits,
                                    const LooPredictionTensor& tensor,
                                    const Eigen::VectorXd& y, const QuantileGrid& grid,
                                    bool loo_fitted_values = true);

enum class SelectionRule { aic_c, sic_c, cv_c };

/// Model id attaining the rule's minimum score; ties break toward fewer
/// covariates, then the smaller id.
int select_model(const CriterionTable& table, SelectionRule rule);

}  // namespace cqrma
