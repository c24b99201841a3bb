#include "cqrma/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cqrma/errors.hpp"

namespace cqrma {

namespace {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kStepScale = 0.9995;

// Nearest power of two, so response normalisation is exactly invertible and
// scaling a problem by 2^k reproduces bit-identical solves.
double pow2_scale(double magnitude) {
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    return 1.0;
  }
  return std::exp2(std::round(std::log2(magnitude)));
}

double fraction_to_boundary(const ArrayXd& x, const ArrayXd& dx) {
  double step = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < x.size(); ++i) {
    if (dx[i] < 0.0) {
      step = std::min(step, -x[i] / dx[i]);
    }
  }
  return std::min(1.0, kStepScale * step);
}

ArrayXd stacked_levels(const QuantileGrid& grid, Index n) {
  ArrayXd tau(static_cast<Index>(grid.size()) * n);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    tau.segment(static_cast<Index>(k) * n, n).setConstant(grid.level(k));
  }
  return tau;
}

double stacked_objective(const ArrayXd& residuals, const ArrayXd& tau) {
  return (residuals * (tau - (residuals <= 0.0).cast<double>())).sum();
}

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + " contains non-finite entries");
  }
}

// ---------------------------------------------------------------------------
// Regression family: primal-dual interior point on the bounded dual
//
//   max y'a   s.t.  A'a = A'(1 - tau),  a in [0, 1]^N
//
// where A stacks the K intercept indicator blocks next to the covariate
// block. The multiplier of the equality rows recovers -(b, beta); the bound
// multipliers recover the split residuals.
// ---------------------------------------------------------------------------

struct StackedRegression {
  MatrixXd design;  // N x P, N = n*K, P = K + p
  VectorXd response;
  ArrayXd tau;
};

StackedRegression stack_regression(const PiecewiseLinearProgram& problem) {
  const Index n = problem.response.size();
  const Index p = problem.columns.cols();
  const Index K = static_cast<Index>(problem.grid.size());
  StackedRegression out;
  out.design.setZero(n * K, K + p);
  out.response.resize(n * K);
  for (Index k = 0; k < K; ++k) {
    out.design.block(k * n, k, n, 1).setOnes();
    if (p > 0) {
      out.design.block(k * n, K, n, p) = problem.columns;
    }
    out.response.segment(k * n, n) = problem.response;
  }
  out.tau = stacked_levels(problem.grid, n);
  return out;
}

LpSolution frisch_newton(const MatrixXd& design, const VectorXd& response,
                         const ArrayXd& tau, const LpSolution* warm,
                         const LpOptions& options) {
  const Index N = design.rows();
  const Index P = design.cols();

  const double scale = pow2_scale(response.cwiseAbs().maxCoeff());
  const VectorXd y = response / scale;

  ArrayXd a(N), s(N), z(N), w(N);
  VectorXd theta(P);
  if (warm != nullptr && warm->dual.size() == N && warm->parameters.size() == P) {
    a = warm->dual.array().min(0.99).max(0.01);
    theta = -(warm->parameters / scale);
  } else {
    a = 1.0 - tau;
    MatrixXd gram = design.transpose() * design;
    gram.diagonal().array() += 1e-10 * (1.0 + gram.diagonal().maxCoeff());
    theta = gram.ldlt().solve(design.transpose() * (-y));
  }
  s = 1.0 - a;
  {
    const ArrayXd rd0 = (-y - design * theta).array();
    const double shift = 1e-4 * (1.0 + rd0.abs().maxCoeff());
    z = rd0.max(0.0) + shift;
    w = (-rd0).max(0.0) + shift;
  }

  const VectorXd rhs = design.transpose() * (1.0 - tau).matrix();
  const double rhs_scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  const double y_scale = 1.0 + y.cwiseAbs().maxCoeff();

  LpStatus status = LpStatus::max_iterations;
  int iterations = 0;
  double gap = 0.0;

  VectorXd r_p(P);
  ArrayXd r_u(N), r_d(N), q(N), g(N);
  ArrayXd da(N), ds(N), dz(N), dw(N);
  VectorXd dtheta(P);
  MatrixXd scaled(N, P), normal(P, P);

  for (int it = 0; it < options.max_iterations; ++it) {
    r_p = rhs - design.transpose() * a.matrix();
    r_u = 1.0 - a - s;
    r_d = (-y - design * theta).array() - z + w;
    gap = (a * z + s * w).sum();

    const double objective_scale = 1.0 + std::abs(y.dot(a.matrix()));
    const bool feasible =
        r_p.cwiseAbs().maxCoeff() <= options.feasibility_tolerance * rhs_scale &&
        r_u.abs().maxCoeff() <= options.feasibility_tolerance &&
        r_d.abs().maxCoeff() <= options.feasibility_tolerance * y_scale;
    if (feasible && gap <= options.gap_tolerance * objective_scale) {
      status = LpStatus::optimal;
      break;
    }

    iterations = it + 1;
    q = 1.0 / (z / a + w / s);

    scaled = q.sqrt().matrix().asDiagonal() * design;
    normal.setZero();
    normal.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    normal.diagonal().array() += 1e-14 * (1.0 + normal.diagonal().maxCoeff());
    Eigen::LDLT<MatrixXd> factor(normal.selfadjointView<Eigen::Lower>());

    // Affine (predictor) direction.
    g = r_d + z - w - (w / s) * r_u;
    dtheta = factor.solve(r_p + design.transpose() * (q * g).matrix());
    da = q * ((design * dtheta).array() - g);
    ds = r_u - da;
    dz = -z - (z / a) * da;
    dw = -w - (w / s) * ds;

    double alpha_p = std::min(fraction_to_boundary(a, da), fraction_to_boundary(s, ds));
    double alpha_d = std::min(fraction_to_boundary(z, dz), fraction_to_boundary(w, dw));
    const double gap_affine = ((a + alpha_p * da) * (z + alpha_d * dz)).sum() +
                              ((s + alpha_p * ds) * (w + alpha_d * dw)).sum();
    double sigma = gap_affine / gap;
    sigma = std::clamp(sigma * sigma * sigma, 0.0, 1.0);
    const double mu = sigma * gap / static_cast<double>(2 * N);

    // Corrector direction; reuses the factorisation.
    const ArrayXd ta = mu - a * z - da * dz;
    const ArrayXd ts = mu - s * w - ds * dw;
    g = r_d - ta / a + ts / s - (w / s) * r_u;
    dtheta = factor.solve(r_p + design.transpose() * (q * g).matrix());
    da = q * ((design * dtheta).array() - g);
    ds = r_u - da;
    dz = ta / a - (z / a) * da;
    dw = ts / s - (w / s) * ds;

    alpha_p = std::min(fraction_to_boundary(a, da), fraction_to_boundary(s, ds));
    alpha_d = std::min(fraction_to_boundary(z, dz), fraction_to_boundary(w, dw));

    a += alpha_p * da;
    s += alpha_p * ds;
    theta += alpha_d * dtheta;
    z += alpha_d * dz;
    w += alpha_d * dw;

    if (!a.allFinite() || !z.allFinite() || !theta.allFinite()) {
      throw SolverError("check-loss LP: numerical breakdown (problem reported infeasible)",
                        iterations, gap * scale);
    }
  }

  LpSolution solution;
  solution.parameters = -theta * scale;
  solution.residuals = response - design * solution.parameters;
  solution.dual = a.matrix();
  solution.objective = stacked_objective(solution.residuals.array(), tau);
  solution.iterations = iterations;
  solution.status = status;
  solution.complementarity_gap = gap * scale;
  return solution;
}

// ---------------------------------------------------------------------------
// Weight family: standard-form Mehrotra predictor-corrector on
//
//   min c'v   s.t.  E v = h,  v >= 0,
//   v = (w, u+, u-),  E = [P  I  -I; 1' 0 0],  h = (y; 1),
//   c = (perturbation, tau/N, (1-tau)/N).
//
// E is never materialised; the normal matrix's leading block is
// P Dw P' + diag(D+ + D-), solved densely for small row counts and through
// the rank-M update formula above the dense row limit.
// ---------------------------------------------------------------------------

struct WeightWorkspace {
  const MatrixXd& P;  // N x M predictions
  const VectorXd& y;  // N
  Index N, M;

  VectorXd apply_E(const VectorXd& v) const {
    VectorXd out(N + 1);
    out.head(N) = P * v.head(M) + v.segment(M, N) - v.tail(N);
    out[N] = v.head(M).sum();
    return out;
  }

  VectorXd apply_Et(const VectorXd& lambda) const {
    VectorXd out(M + 2 * N);
    out.head(M) = P.transpose() * lambda.head(N);
    out.head(M).array() += lambda[N];
    out.segment(M, N) = lambda.head(N);
    out.tail(N) = -lambda.head(N);
    return out;
  }
};

// Solves the bordered normal system for one or more right-hand sides per
// iteration; `factor_*` caches whatever the active path needs.
class WeightNormalSolver {
 public:
  WeightNormalSolver(const WeightWorkspace& ws, const ArrayXd& d, bool dense)
      : ws_(ws), dense_(dense) {
    const Index N = ws.N;
    const Index M = ws.M;
    const ArrayXd dw = d.head(M);
    ArrayXd lambda_diag = d.segment(M, N) + d.tail(N);
    lambda_diag = lambda_diag.max(1e-13 * (1.0 + lambda_diag.maxCoeff()));
    c1_ = ws.P * dw.matrix();
    gamma_ = dw.sum();
    if (dense_) {
      MatrixXd scaled = dw.sqrt().matrix().asDiagonal() * ws.P.transpose();  // M x N? no
      // scaled holds sqrt(Dw) P' (M x N); rankUpdate forms P Dw P'.
      n11_.setZero(N, N);
      n11_.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
      n11_.diagonal() += lambda_diag.matrix();
      n11_factor_.compute(n11_.selfadjointView<Eigen::Lower>());
    } else {
      lambda_inv_ = 1.0 / lambda_diag;
      MatrixXd g = ws.P.transpose() * lambda_inv_.matrix().asDiagonal() * ws.P;
      g.diagonal() += (1.0 / dw.max(1e-300)).matrix();
      g_factor_.compute(g);
    }
    t_ = solve_block(c1_);
    denominator_ = gamma_ - c1_.dot(t_);
    if (std::abs(denominator_) < 1e-300) {
      denominator_ = denominator_ < 0 ? -1e-300 : 1e-300;
    }
  }

  VectorXd solve(const VectorXd& rhs) const {
    const VectorXd u = solve_block(rhs.head(ws_.N));
    const double x2 = (rhs[ws_.N] - c1_.dot(u)) / denominator_;
    VectorXd out(ws_.N + 1);
    out.head(ws_.N) = u - x2 * t_;
    out[ws_.N] = x2;
    return out;
  }

 private:
  VectorXd solve_block(const VectorXd& r) const {
    if (dense_) {
      return n11_factor_.solve(r);
    }
    const VectorXd lr = (lambda_inv_ * r.array()).matrix();
    return lr - (lambda_inv_ *
                 (ws_.P * g_factor_.solve(ws_.P.transpose() * lr)).array())
                    .matrix();
  }

  const WeightWorkspace& ws_;
  bool dense_;
  MatrixXd n11_;
  Eigen::LDLT<MatrixXd> n11_factor_;
  ArrayXd lambda_inv_;
  Eigen::LDLT<MatrixXd> g_factor_;
  VectorXd c1_, t_;
  double gamma_ = 0.0;
  double denominator_ = 1.0;
};

struct WeightIpResult {
  VectorXd weights;
  VectorXd lambda;
  int iterations = 0;
  double gap = 0.0;
  LpStatus status = LpStatus::max_iterations;
};

WeightIpResult weight_interior_point(const MatrixXd& predictions, const VectorXd& y,
                                     const ArrayXd& tau, const VectorXd& w_perturbation,
                                     const LpOptions& options) {
  const Index N = predictions.rows();
  const Index M = predictions.cols();
  const Index total = M + 2 * N;
  const WeightWorkspace ws{predictions, y, N, M};
  const bool dense = N + 1 <= options.weight_dense_row_limit;
  // Tighter gap target than the regression family: flat weight optima are
  // compared against grid oracles at 1e-8.
  const double gap_tolerance = std::min(options.gap_tolerance, 1e-9);

  VectorXd c(total);
  c.head(M) = w_perturbation;
  c.segment(M, N) = (tau / static_cast<double>(N)).matrix();
  c.tail(N) = ((1.0 - tau) / static_cast<double>(N)).matrix();

  VectorXd h(N + 1);
  h.head(N) = y;
  h[N] = 1.0;

  VectorXd v(total);
  v.head(M).setConstant(1.0 / static_cast<double>(M));
  {
    const VectorXd r0 = y - predictions * v.head(M);
    const double slack = 0.1 * (1.0 + r0.cwiseAbs().mean());
    v.segment(M, N) = r0.cwiseMax(0.0).array() + slack;
    v.tail(N) = (-r0).cwiseMax(0.0).array() + slack;
  }
  VectorXd lambda = VectorXd::Zero(N + 1);
  VectorXd z = c.array().max(0.0) + 1.0 / static_cast<double>(N);

  const double h_scale = 1.0 + h.cwiseAbs().maxCoeff();
  const double c_scale = 1.0 + c.cwiseAbs().maxCoeff();

  WeightIpResult result;
  VectorXd r_p(N + 1), r_d(total), dv(total), dz(total), dlambda(N + 1), t(total);

  for (int it = 0; it < options.max_iterations; ++it) {
    r_p = h - ws.apply_E(v);
    r_d = c - ws.apply_Et(lambda) - z;
    const double gap = v.dot(z);
    result.gap = gap;

    const double objective_scale = 1.0 + std::abs(c.dot(v));
    if (r_p.cwiseAbs().maxCoeff() <= options.feasibility_tolerance * h_scale &&
        r_d.cwiseAbs().maxCoeff() <= options.feasibility_tolerance * c_scale &&
        gap <= gap_tolerance * objective_scale) {
      result.status = LpStatus::optimal;
      break;
    }

    result.iterations = it + 1;
    const ArrayXd d = v.array() / z.array();
    WeightNormalSolver normal(ws, d, dense);

    // Affine step.
    dlambda = normal.solve(r_p + ws.apply_E((d * (r_d + z).array()).matrix()));
    dv = (d * (ws.apply_Et(dlambda) - r_d + (-z)).array()).matrix();
    dz = (-z.array() - (z.array() / v.array()) * dv.array()).matrix();

    double alpha_p = fraction_to_boundary(v.array(), dv.array());
    double alpha_d = fraction_to_boundary(z.array(), dz.array());
    const double gap_affine =
        (v + alpha_p * dv).dot(z + alpha_d * dz);
    double sigma = std::clamp(gap_affine / gap, 0.0, 1.0);
    sigma = sigma * sigma * sigma;
    const double mu = sigma * gap / static_cast<double>(total);

    // Corrector, reusing the factorisation.
    t = (mu - v.array() * z.array() - dv.array() * dz.array()).matrix();
    const ArrayXd t_over_v = t.array() / v.array();
    dlambda = normal.solve(r_p + ws.apply_E((d * (r_d.array() - t_over_v)).matrix()));
    dv = (d * (ws.apply_Et(dlambda) - r_d).array() + d * t_over_v).matrix();
    dz = (t_over_v - (z.array() / v.array()) * dv.array()).matrix();

    alpha_p = fraction_to_boundary(v.array(), dv.array());
    alpha_d = fraction_to_boundary(z.array(), dz.array());

    v += alpha_p * dv;
    lambda += alpha_d * dlambda;
    z += alpha_d * dz;

    if (!v.allFinite() || !z.allFinite() || !lambda.allFinite()) {
      throw SolverError("weight LP: numerical breakdown", result.iterations, result.gap);
    }
  }

  result.weights = v.head(M);
  result.lambda = lambda;
  return result;
}

VectorXd clean_weights(const VectorXd& raw) {
  VectorXd w = raw.cwiseMax(0.0);
  const double top = w.maxCoeff();
  if (!(top > 0.0)) {
    return VectorXd::Constant(raw.size(), 1.0 / static_cast<double>(raw.size()));
  }
  for (Index m = 0; m < w.size(); ++m) {
    if (w[m] < 1e-8 * top) {
      w[m] = 0.0;
    }
  }
  return w / w.sum();
}

// Drops interior-point dust: a weight is zeroed whenever removing it (and
// renormalising) does not increase the criterion. On a flat optimal face this
// walks to a vertex; elsewhere every removal is rejected.
VectorXd purify_weights(VectorXd w, const MatrixXd& predictions, const VectorXd& y,
                        const ArrayXd& tau) {
  const Index N = predictions.rows();
  auto objective = [&](const VectorXd& candidate) {
    return stacked_objective((y - predictions * candidate).array(), tau) /
           static_cast<double>(N);
  };
  double best = objective(w);
  std::vector<Index> order(static_cast<std::size_t>(w.size()));
  for (Index m = 0; m < w.size(); ++m) {
    order[static_cast<std::size_t>(m)] = m;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return w[a] < w[b]; });
  for (Index m : order) {
    if (w[m] <= 0.0 || w[m] >= 1.0) {
      continue;
    }
    VectorXd candidate = w;
    candidate[m] = 0.0;
    candidate /= candidate.sum();
    const double value = objective(candidate);
    if (value <= best + 1e-12 * (1.0 + best)) {
      w = std::move(candidate);
      best = std::min(best, value);
    }
  }
  return w;
}

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::max_iterations:
      return "max-iterations";
    case LpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

PiecewiseLinearProgram PiecewiseLinearProgram::regression(Eigen::MatrixXd covariates,
                                                          Eigen::VectorXd response,
                                                          QuantileGrid grid) {
  if (covariates.rows() != 0 && covariates.rows() != response.size()) {
    throw ShapeError("covariate rows do not match the response length");
  }
  if (response.size() == 0) {
    throw DomainError("regression LP needs at least one observation");
  }
  require_finite(covariates, "covariate matrix");
  require_finite(response, "response");
  PiecewiseLinearProgram problem{std::move(covariates), std::move(response),
                                 std::move(grid), false};
  if (problem.columns.rows() == 0) {
    problem.columns.resize(problem.response.size(), 0);
  }
  return problem;
}

PiecewiseLinearProgram PiecewiseLinearProgram::weight_selection(
    Eigen::MatrixXd predictions, Eigen::VectorXd stacked_response, QuantileGrid grid) {
  if (predictions.cols() < 1) {
    throw DomainError("weight LP needs at least one candidate column");
  }
  if (predictions.rows() != stacked_response.size()) {
    throw ShapeError("prediction rows do not match the stacked response length");
  }
  const Index K = static_cast<Index>(grid.size());
  if (predictions.rows() == 0 || predictions.rows() % K != 0) {
    throw ShapeError("stacked rows must be a positive multiple of the grid size");
  }
  require_finite(predictions, "prediction matrix");
  require_finite(stacked_response, "stacked response");
  return PiecewiseLinearProgram{std::move(predictions), std::move(stacked_response),
                                std::move(grid), true};
}

Eigen::Index PiecewiseLinearProgram::observation_count() const {
  return simplex_weights ? response.size() / static_cast<Index>(grid.size())
                         : response.size();
}

Eigen::Index PiecewiseLinearProgram::free_variable_count() const {
  return simplex_weights ? columns.cols()
                         : static_cast<Index>(grid.size()) + columns.cols();
}

Eigen::VectorXd stack_response(const Eigen::VectorXd& response, std::size_t levels) {
  VectorXd out(response.size() * static_cast<Index>(levels));
  for (std::size_t k = 0; k < levels; ++k) {
    out.segment(static_cast<Index>(k) * response.size(), response.size()) = response;
  }
  return out;
}

LpSolution solve_check_loss_lp(const PiecewiseLinearProgram& problem,
                               const LpSolution* warm_start, const LpOptions& options) {
  if (problem.simplex_weights) {
    throw DomainError("solve_check_loss_lp expects the regression family");
  }
  const StackedRegression stacked = stack_regression(problem);
  return frisch_newton(stacked.design, stacked.response, stacked.tau, warm_start,
                       options);
}

LpSolution solve_simplex_weight_lp(const Eigen::MatrixXd& loss_slopes,
                                   const Eigen::VectorXd& responses,
                                   const QuantileGrid& grid, const LpOptions& options) {
  const PiecewiseLinearProgram problem =
      PiecewiseLinearProgram::weight_selection(loss_slopes, responses, grid);
  const Index N = problem.response.size();
  const Index M = problem.columns.cols();
  const Index n = problem.observation_count();
  const ArrayXd tau = stacked_levels(problem.grid, n);

  auto finish = [&](VectorXd weights, VectorXd lambda, int iterations, double gap,
                    LpStatus status) {
    LpSolution solution;
    solution.parameters = std::move(weights);
    solution.residuals = problem.response - problem.columns * solution.parameters;
    solution.dual = std::move(lambda);
    solution.objective =
        stacked_objective(solution.residuals.array(), tau) / static_cast<double>(N);
    solution.iterations = iterations;
    solution.status = status;
    solution.complementarity_gap = gap;
    return solution;
  };

  if (M == 1) {
    return finish(VectorXd::Ones(1), VectorXd::Zero(N + 1), 0, 0.0, LpStatus::optimal);
  }

  const double scale =
      pow2_scale(std::max(problem.response.cwiseAbs().maxCoeff(),
                          problem.columns.cwiseAbs().maxCoeff()));
  const MatrixXd predictions = problem.columns / scale;
  const VectorXd y = problem.response / scale;

  const WeightIpResult stage1 = weight_interior_point(
      predictions, y, tau, VectorXd::Zero(M), options);
  if (stage1.status != LpStatus::optimal) {
    return finish(clean_weights(stage1.weights), stage1.lambda, stage1.iterations,
                  stage1.gap * scale, stage1.status);
  }
  const VectorXd w1 = purify_weights(clean_weights(stage1.weights), predictions, y, tau);
  const double objective1 =
      stacked_objective((y - predictions * w1).array(), tau) / static_cast<double>(N);

  // Re-solve with a tiny index-increasing cost on the weights. On a flat
  // optimal face this lands on the lexicographically preferred vertex (two
  // identical columns resolve to (1, 0)); elsewhere the perturbation is far
  // below the optimality gap of any competing vertex.
  VectorXd perturbation(M);
  const double delta =
      std::max(1e-6 * objective1, 1e-12) / static_cast<double>(M);
  for (Index m = 0; m < M; ++m) {
    perturbation[m] = delta * static_cast<double>(m);
  }
  const WeightIpResult stage2 =
      weight_interior_point(predictions, y, tau, perturbation, options);
  const int iterations = stage1.iterations + stage2.iterations;

  if (stage2.status == LpStatus::optimal) {
    const VectorXd w2 =
        purify_weights(clean_weights(stage2.weights), predictions, y, tau);
    const double objective2 =
        stacked_objective((y - predictions * w2).array(), tau) / static_cast<double>(N);
    if (objective2 <= objective1 + 1e-9 * (1.0 + std::abs(objective1))) {
      return finish(w2, stage2.lambda, iterations, stage2.gap * scale,
                    LpStatus::optimal);
    }
  }
  return finish(w1, stage1.lambda, iterations, stage1.gap * scale, LpStatus::optimal);
}

}  // namespace cqrma
