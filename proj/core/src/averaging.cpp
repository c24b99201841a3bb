#include "cqrma/averaging.hpp"

#include <string>

#include "cqrma/errors.hpp"

namespace cqrma {

namespace {

using Eigen::Index;

}  // namespace

AveragedPredictor AveragedPredictor::composite(std::vector<CqrFit> fits,
                                               WeightVector weights, QuantileGrid grid) {
  if (fits.empty()) {
    throw DomainError("averaged predictor needs at least one fit");
  }
  if (weights.size() != static_cast<Index>(fits.size())) {
    throw ShapeError("weight count and fit count differ");
  }
  for (const auto& fit : fits) {
    if (fit.quantile_count() != static_cast<Index>(grid.size())) {
      throw ShapeError("fit level count does not match the grid");
    }
  }
  AveragedPredictor predictor(std::move(grid));
  predictor.per_quantile_ = false;
  predictor.fits_ = std::move(fits);
  predictor.weights_.push_back(std::move(weights));
  return predictor;
}

AveragedPredictor AveragedPredictor::per_quantile(
    std::vector<std::vector<CqrFit>> fits_by_level,
    std::vector<WeightVector> weights_by_level, QuantileGrid grid) {
  if (fits_by_level.size() != grid.size() || weights_by_level.size() != grid.size()) {
    throw ShapeError("per-quantile predictor needs one fit list and one weight vector per level");
  }
  const std::size_t M = fits_by_level.front().size();
  if (M == 0) {
    throw DomainError("averaged predictor needs at least one fit");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (fits_by_level[k].size() != M ||
        weights_by_level[k].size() != static_cast<Index>(M)) {
      throw ShapeError("per-quantile fit/weight lists are ragged");
    }
    for (const auto& fit : fits_by_level[k]) {
      if (fit.quantile_count() != 1) {
        throw ShapeError("per-quantile predictor expects single-level fits");
      }
    }
  }
  AveragedPredictor predictor(std::move(grid));
  predictor.per_quantile_ = true;
  predictor.level_fits_ = std::move(fits_by_level);
  predictor.weights_ = std::move(weights_by_level);
  return predictor;
}

Eigen::Index AveragedPredictor::model_count() const {
  return per_quantile_ ? static_cast<Index>(level_fits_.front().size())
                       : static_cast<Index>(fits_.size());
}

double AveragedPredictor::predict(const Eigen::RowVectorXd& full_row,
                                  std::size_t k) const {
  if (k >= grid_.size()) {
    throw ShapeError("quantile index " + std::to_string(k) + " is out of range");
  }
  double value = 0.0;
  if (per_quantile_) {
    const auto& fits = level_fits_[k];
    const auto& weights = weights_[k];
    for (std::size_t m = 0; m < fits.size(); ++m) {
      const double w = weights[static_cast<Index>(m)];
      if (w != 0.0) {
        value += w * predict_full_row(fits[m], full_row, 0);
      }
    }
  } else {
    const auto& weights = weights_.front();
    for (std::size_t m = 0; m < fits_.size(); ++m) {
      const double w = weights[static_cast<Index>(m)];
      if (w != 0.0) {
        value += w * predict_full_row(fits_[m], full_row, k);
      }
    }
  }
  return value;
}

double predict_averaged(const AveragedPredictor& predictor,
                        const Eigen::RowVectorXd& x_row, std::size_t k) {
  return predictor.predict(x_row, k);
}

double prediction_error(const AveragedPredictor& predictor, const Dataset& holdout,
                        const QuantileGrid& grid) {
  if (!(grid == predictor.grid())) {
    throw ShapeError("holdout grid does not match the predictor's grid");
  }
  double total = 0.0;
  for (Eigen::Index s = 0; s < holdout.n(); ++s) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double fitted = predictor.predict(holdout.X().row(s), k);
      total += check_loss(holdout.y()[s] - fitted, grid.level(k));
    }
  }
  return total / (static_cast<double>(holdout.n()) * static_cast<double>(grid.size()));
}

double cpe_aggregate(const std::vector<double>& pe_samples) {
  if (pe_samples.empty()) {
    throw DomainError("cannot aggregate an empty prediction-error list");
  }
  double total = 0.0;
  for (double pe : pe_samples) {
    total += pe;
  }
  return total / static_cast<double>(pe_samples.size());
}

EvaluationReport make_report(const std::vector<std::string>& methods,
                             const std::vector<std::vector<double>>& pe_samples) {
  if (methods.size() != pe_samples.size()) {
    throw ShapeError("method list and sample list differ in length");
  }
  EvaluationReport report;
  report.replications =
      pe_samples.empty() ? 0 : static_cast<int>(pe_samples.front().size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    if (static_cast<int>(pe_samples[m].size()) != report.replications) {
      throw ShapeError("ragged prediction-error samples across methods");
    }
    report.methods.push_back(
        {methods[m], pe_samples[m], cpe_aggregate(pe_samples[m])});
  }
  return report;
}

}  // namespace cqrma
