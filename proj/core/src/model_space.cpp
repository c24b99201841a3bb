#include "cqrma/model_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cqrma/errors.hpp"
#include "cqrma/parallel.hpp"

namespace cqrma {

namespace {

using Eigen::Index;

// Fixed scheduling grain for leave-one-out work: results must not depend on
// how many workers run, so the chunking is a constant, not thread-derived.
constexpr Index kLooChunk = 32;

void validate_models(const Dataset& data, const std::vector<CandidateModel>& models) {
  if (models.empty()) {
    throw DomainError("candidate model list is empty");
  }
  std::vector<int> ids;
  for (const auto& model : models) {
    ids.push_back(model.id);
    for (Index c : model.columns) {
      if (c < 0 || c >= data.p()) {
        throw DomainError("model " + std::to_string(model.id) + " references column " +
                          std::to_string(c) + " outside the dataset");
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw DomainError("candidate model ids must be unique");
  }
}

}  // namespace

std::vector<Index> correlation_ranking(const Dataset& data) {
  const Index n = data.n();
  const double mean_y = data.y().mean();
  const Eigen::ArrayXd yc = data.y().array() - mean_y;
  const double sy = std::sqrt(yc.square().sum());

  std::vector<std::pair<double, Index>> scored;
  scored.reserve(static_cast<std::size_t>(data.p()));
  for (Index j = 0; j < data.p(); ++j) {
    const Eigen::ArrayXd xc = data.X().col(j).array() - data.X().col(j).mean();
    const double sx = std::sqrt(xc.square().sum());
    double corr = 0.0;  // constant columns carry no association
    if (sx > 0.0 && sy > 0.0 && n > 1) {
      corr = std::abs((xc * yc).sum() / (sx * sy));
    }
    scored.emplace_back(corr, j);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });

  std::vector<Index> order;
  order.reserve(scored.size());
  for (const auto& [corr, j] : scored) {
    order.push_back(j);
  }
  return order;
}

std::vector<CandidateModel> build_nested_models(const Dataset& data, int count,
                                                ModelOrdering ordering) {
  if (count < 1) {
    throw DomainError("candidate model count must be at least 1");
  }
  if (count > data.p()) {
    throw DomainError("candidate model count " + std::to_string(count) +
                      " exceeds the " + std::to_string(data.p()) + " covariates");
  }
  std::vector<Index> order;
  if (ordering == ModelOrdering::correlation_sorted) {
    order = correlation_ranking(data);
  } else {
    order.resize(static_cast<std::size_t>(data.p()));
    for (Index j = 0; j < data.p(); ++j) {
      order[static_cast<std::size_t>(j)] = j;
    }
  }

  std::vector<CandidateModel> models;
  models.reserve(static_cast<std::size_t>(count));
  for (int m = 1; m <= count; ++m) {
    CandidateModel model;
    model.id = m;
    model.columns.assign(order.begin(), order.begin() + m);
    models.push_back(std::move(model));
  }
  return models;
}

std::vector<CqrFit> fit_all(const Dataset& data, const std::vector<CandidateModel>& models,
                            const QuantileGrid& grid, const LpOptions& options,
                            int threads) {
  validate_models(data, models);
  std::vector<CqrFit> fits(models.size());
  parallel_for(
      models.size(),
      [&](std::size_t m) {
        try {
          fits[m] = fit_cqr(data, models[m].columns, grid, options);
        } catch (const SolverError& error) {
          throw SolverError("model " + std::to_string(models[m].id) + ": " +
                                error.what(),
                            error.iterations, error.complementarity_gap);
        }
      },
      threads);
  return fits;
}

LooPredictionTensor::LooPredictionTensor(Index n, Index levels, Index models,
                                         JackknifeMode mode)
    : flat_(Eigen::MatrixXd::Zero(n * levels, models)), n_(n), mode_(mode) {}

LooPredictionTensor jackknife_tensor(const Dataset& data,
                                     const std::vector<CandidateModel>& models,
                                     const QuantileGrid& grid,
                                     const JackknifeOptions& options) {
  validate_models(data, models);
  const Index n = data.n();
  const Index K = static_cast<Index>(grid.size());
  const Index M = static_cast<Index>(models.size());
  for (const auto& model : models) {
    const Index needed = static_cast<Index>(model.columns.size()) + K + 1;
    if (n < needed) {
      throw DomainError("model " + std::to_string(model.id) + " needs at least " +
                        std::to_string(needed) + " observations for leave-one-out fits, have " +
                        std::to_string(n));
    }
  }

  LooPredictionTensor tensor(n, K, M, options.mode);

  if (options.mode == JackknifeMode::per_quantile && options.literal_full_sample) {
    parallel_for(
        static_cast<std::size_t>(M) * static_cast<std::size_t>(K),
        [&](std::size_t task) {
          const Index m = static_cast<Index>(task) / K;
          const Index k = static_cast<Index>(task) % K;
          const CqrFit fit = fit_qr(data, models[static_cast<std::size_t>(m)].columns,
                                    grid.level(static_cast<std::size_t>(k)), options.lp);
          for (Index i = 0; i < n; ++i) {
            tensor.at(i, k, m) = predict_full_row(fit, data.X().row(i), 0);
          }
        },
        options.threads);
    return tensor;
  }

  const Index chunks = (n + kLooChunk - 1) / kLooChunk;
  parallel_for(
      static_cast<std::size_t>(M) * static_cast<std::size_t>(chunks),
      [&](std::size_t task) {
        const Index m = static_cast<Index>(task) / chunks;
        const Index chunk = static_cast<Index>(task) % chunks;
        const auto& model = models[static_cast<std::size_t>(m)];
        const Index begin = chunk * kLooChunk;
        const Index end = std::min(begin + kLooChunk, n);

        if (options.mode == JackknifeMode::composite) {
          CqrFit previous;
          for (Index i = begin; i < end; ++i) {
            const Dataset loo = data.without_row(i);
            const CqrFit* warm =
                options.warm_start && i > begin ? &previous : nullptr;
            CqrFit fit;
            try {
              fit = fit_cqr(loo, model.columns, grid, options.lp, warm);
            } catch (const SolverError& error) {
              throw SolverError("model " + std::to_string(model.id) +
                                    ", left-out row " + std::to_string(i) + ": " +
                                    error.what(),
                                error.iterations, error.complementarity_gap);
            }
            for (Index k = 0; k < K; ++k) {
              tensor.at(i, k, m) =
                  predict_full_row(fit, data.X().row(i), static_cast<std::size_t>(k));
            }
            if (options.warm_start) {
              previous = std::move(fit);
            }
          }
        } else {
          for (Index k = 0; k < K; ++k) {
            CqrFit previous;
            for (Index i = begin; i < end; ++i) {
              const Dataset loo = data.without_row(i);
              const CqrFit* warm =
                  options.warm_start && i > begin ? &previous : nullptr;
              CqrFit fit;
              try {
                fit = fit_cqr(loo, model.columns,
                              QuantileGrid::single(grid.level(static_cast<std::size_t>(k))),
                              options.lp, warm);
              } catch (const SolverError& error) {
                throw SolverError("model " + std::to_string(model.id) + ", level " +
                                      std::to_string(grid.level(static_cast<std::size_t>(k))) +
                                      ", left-out row " + std::to_string(i) + ": " +
                                      error.what(),
                                  error.iterations, error.complementarity_gap);
              }
              tensor.at(i, k, m) = predict_full_row(fit, data.X().row(i), 0);
              if (options.warm_start) {
                previous = std::move(fit);
              }
            }
          }
        }
      },
      options.threads);
  return tensor;
}

}  // namespace cqrma
