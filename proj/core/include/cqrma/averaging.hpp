#pragma once

#include <string>
#include <vector>

#include "cqrma/weighting.hpp"

namespace cqrma {

/// A model-averaged quantile predictor.
///
/// The composite scheme carries a single weight vector over shared-slope
/// fits: prediction at level k is sum_m w_m (b_{k,m} + x_(m)' beta_(m)). The
/// per-quantile scheme carries one weight vector and one single-quantile fit
/// per level. Selection estimators are the vertex-weight special case.
class AveragedPredictor {
 public:
  static AveragedPredictor composite(std::vector<CqrFit> fits, WeightVector weights,
                                     QuantileGrid grid);
  static AveragedPredictor per_quantile(std::vector<std::vector<CqrFit>> fits_by_level,
                                        std::vector<WeightVector> weights_by_level,
                                        QuantileGrid grid);

  double predict(const Eigen::RowVectorXd& full_row, std::size_t k) const;
  const QuantileGrid& grid() const { return grid_; }
  Eigen::Index model_count() const;

 private:
  AveragedPredictor(QuantileGrid grid) : grid_(std::move(grid)) {}

  QuantileGrid grid_;
  bool per_quantile_ = false;
  std::vector<CqrFit> fits_;                        // composite scheme
  std::vector<WeightVector> weights_;               // size 1, or K per-quantile
  std::vector<std::vector<CqrFit>> level_fits_;     // [k][m], per-quantile scheme
};

double predict_averaged(const AveragedPredictor& predictor,
                        const Eigen::RowVectorXd& x_row, std::size_t k);

/// Mean composite check loss of the predictor over a holdout sample:
/// (1/(n_s K)) sum_s sum_k rho_{tau_k}(y_s - yhat_{s,k}).
double prediction_error(const AveragedPredictor& predictor, const Dataset& holdout,
                        const QuantileGrid& grid);

/// Mean of the per-replication prediction errors.
double cpe_aggregate(const std::vector<double>& pe_samples);

struct MethodEvaluation {
  std::string method;
  std::vector<double> pe_samples;
  double cpe = 0.0;
};

/// Per-method prediction-error summary across replications.
struct EvaluationReport {
  int replications = 0;
  std::vector<MethodEvaluation> methods;
};

/// Builds a report from per-method samples, aggregating the CPE.
EvaluationReport make_report(const std::vector<std::string>& methods,
                             const std::vector<std::vector<double>>& pe_samples);

}  // namespace cqrma
