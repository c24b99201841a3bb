#pragma once

#include <vector>

#include "cqrma/fit.hpp"

namespace cqrma {

/// A candidate column subset. The intercepts are always part of the fit and
/// are not listed. Ids are 1-based and unique within a model set.
struct CandidateModel {
  int id = 0;
  std::vector<Eigen::Index> columns;
};

enum class ModelOrdering { given, correlation_sorted };

/// Column indices ranked by |Pearson correlation with y|, descending.
/// Constant columns get correlation 0 and therefore rank last; ties keep the
/// original column order.
std::vector<Eigen::Index> correlation_ranking(const Dataset& data);

/// Nested candidate set: model m holds the first m covariates under the
/// chosen ordering. Requires 1 <= count <= p.
std::vector<CandidateModel> build_nested_models(const Dataset& data, int count,
                                                ModelOrdering ordering);

/// Full-sample composite fit of every candidate model.
std::vector<CqrFit> fit_all(const Dataset& data, const std::vector<CandidateModel>& models,
                            const QuantileGrid& grid, const LpOptions& options = {},
                            int threads = 0);

enum class JackknifeMode { composite, per_quantile };

struct JackknifeOptions {
  JackknifeMode mode = JackknifeMode::composite;
  /// Chain leave-one-out solves inside fixed-size index chunks. Off by
  /// default: cold starts make every entry an exact function of the sample
  /// without its own row, which the outlier-invariance contract relies on.
  bool warm_start = false;
  /// Per-quantile mode only: skip the leave-one-out refits and fill the
  /// tensor from full-sample single-quantile fits (the in-sample reading of
  /// the per-quantile criterion). Breaks the tensor's leave-one-out contract;
  /// intended for diagnostics and replication comparisons.
  bool literal_full_sample = false;
  int threads = 0;
  LpOptions lp;
};

/// Leave-one-out predictions yhat_{i,k,m}. Entry (i, k, m) is the prediction
/// for observation i from the model-m fit computed on the other n-1 rows
/// (composite mode shares slopes across levels per fit; per-quantile mode
/// refits each level separately). Stored flattened as an (n*K) x M matrix
/// with row k*n + i, which is exactly the layout the weight LP consumes.
class LooPredictionTensor {
 public:
  LooPredictionTensor(Eigen::Index n, Eigen::Index levels, Eigen::Index models,
                      JackknifeMode mode);

  double operator()(Eigen::Index i, Eigen::Index k, Eigen::Index m) const {
    return flat_(k * n_ + i, m);
  }
  double& at(Eigen::Index i, Eigen::Index k, Eigen::Index m) {
    return flat_(k * n_ + i, m);
  }

  const Eigen::MatrixXd& flattened() const { return flat_; }
  /// n x M slice for one grid level.
  Eigen::MatrixXd quantile_block(Eigen::Index k) const {
    return flat_.middleRows(k * n_, n_);
  }

  Eigen::Index n() const { return n_; }
  Eigen::Index quantile_count() const { return flat_.rows() / n_; }
  Eigen::Index model_count() const { return flat_.cols(); }
  JackknifeMode mode() const { return mode_; }

 private:
  Eigen::MatrixXd flat_;
  Eigen::Index n_;
  JackknifeMode mode_;
};

/// Builds the tensor of leave-one-out predictions for every model.
LooPredictionTensor jackknife_tensor(const Dataset& data,
                                     const std::vector<CandidateModel>& models,
                                     const QuantileGrid& grid,
                                     const JackknifeOptions& options = {});

}  // namespace cqrma
