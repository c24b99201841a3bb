#pragma once

#include <Eigen/Dense>

#include "cqrma/loss.hpp"

namespace cqrma {

struct LpOptions {
  /// Relative complementarity-gap target certifying optimality.
  double gap_tolerance = 1e-8;
  /// Relative primal/dual feasibility target.
  double feasibility_tolerance = 1e-9;
  int max_iterations = 200;
  /// Weight LPs switch from dense normal equations to the low-rank update
  /// path above this many stacked rows.
  Eigen::Index weight_dense_row_limit = 600;
};

enum class LpStatus { optimal, max_iterations, infeasible };

const char* to_string(LpStatus status);

/// Outcome of one LP solve.
///
/// `parameters` holds the free variables of the regression family
/// (K intercepts, then slopes) or the M simplex weights of the weight family.
/// `residuals` is stacked quantile-major: entry k*n + i is the residual of
/// observation i at grid level k. `dual` stores the row multipliers
/// (regression: box duals in [0,1]; weights: equality multipliers plus the
/// simplex multiplier in the last slot), kept so callers can warm-start and
/// re-check optimality certificates.
struct LpSolution {
  Eigen::VectorXd parameters;
  Eigen::VectorXd residuals;
  Eigen::VectorXd dual;
  double objective = 0.0;
  int iterations = 0;
  LpStatus status = LpStatus::optimal;
  double complementarity_gap = 0.0;
};

/// One of the two LP families induced by composite check-loss estimation.
/// The regression family stacks one n-row block per quantile level with free
/// intercepts and slopes; the weight family carries prediction columns and
/// the unit-simplex constraint. Objective coefficients are derived only from
/// the quantile levels (tau on positive residual parts, 1-tau on negative).
struct PiecewiseLinearProgram {
  Eigen::MatrixXd columns;   // regression: n x p covariates; weights: (n*K) x M predictions
  Eigen::VectorXd response;  // regression: n; weights: n*K stacked quantile-major
  QuantileGrid grid;
  bool simplex_weights = false;

  static PiecewiseLinearProgram regression(Eigen::MatrixXd covariates,
                                           Eigen::VectorXd response, QuantileGrid grid);
  static PiecewiseLinearProgram weight_selection(Eigen::MatrixXd predictions,
                                                 Eigen::VectorXd stacked_response,
                                                 QuantileGrid grid);

  Eigen::Index observation_count() const;
  /// K + p for the regression family, M for the weight family.
  Eigen::Index free_variable_count() const;
};

/// Replicates a length-n response K times (quantile-major stacking).
Eigen::VectorXd stack_response(const Eigen::VectorXd& response, std::size_t levels);

/// Minimises sum_{k,i} rho_{tau_k}(y_i - b_k - x_i' beta) over the free
/// intercepts and slopes. Primal-dual interior point on the bounded dual
/// (Frisch-Newton); a warm start reuses a previous solution's duals and
/// parameters. Non-convergence returns the best iterate with status
/// max_iterations; numerical breakdown throws SolverError.
LpSolution solve_check_loss_lp(const PiecewiseLinearProgram& problem,
                               const LpSolution* warm_start = nullptr,
                               const LpOptions& options = {});

/// Minimises (1/(nK)) sum_{i,k} rho_{tau_k}(y_i - sum_m w_m yhat_{ikm}) over
/// the unit simplex. Flat optima are resolved to a vertex of the optimal
/// face, preferring low column indices (so two identical columns yield
/// w = (1, 0)).
LpSolution solve_simplex_weight_lp(const Eigen::MatrixXd& loss_slopes,
                                   const Eigen::VectorXd& responses,
                                   const QuantileGrid& grid,
                                   const LpOptions& options = {});

}  // namespace cqrma
