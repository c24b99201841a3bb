#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqrma/averaging.hpp"

namespace cqrma {

/// Canonical order of the seven estimators: mcvc, mcv0, cvc, aicc, sicc,
/// saicc, ssicc.
const std::vector<std::string>& method_names();
bool is_method_name(const std::string& name);

struct MethodSuiteOptions {
  /// Subset of method_names() to fit; empty means all seven.
  std::vector<std::string> methods;
  LpOptions lp;
  int threads = 0;
  /// Information criteria use leave-one-out fitted values inside the log by
  /// default; false switches to full-sample residuals.
  bool criteria_use_loo = true;
  bool warm_start = false;
};

/// Everything the requested methods produced on one training sample.
struct MethodSuite {
  std::vector<std::string> methods;
  std::vector<AveragedPredictor> predictors;  // aligned with `methods`
  std::optional<WeightVector> mcvc_weights;
  std::optional<CriterionTable> criteria;

  const AveragedPredictor& predictor(const std::string& method) const;
};

/// Fits the composite and/or per-quantile machinery once and assembles each
/// requested method's predictor from it.
MethodSuite fit_method_suite(const Dataset& train,
                             const std::vector<CandidateModel>& models,
                             const QuantileGrid& grid,
                             const MethodSuiteOptions& options = {});

}  // namespace cqrma
