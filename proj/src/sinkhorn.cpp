// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace memgen {

namespace {

constexpr Scalar kMarginalSumTol = 1e-9;

Scalar logsumexp(const Vec& v) {
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

void TransportProblem::validate() const {
  if (row_marginal.size() == 0 || col_marginal.size() == 0)
    throw std::invalid_argument("TransportProblem: empty marginal");
  if (cost.rows() != row_marginal.size() || cost.cols() != col_marginal.size())
    throw std::invalid_argument("TransportProblem: cost shape does not match marginals");
  if ((row_marginal.array() < 0).any() || (col_marginal.array() < 0).any())
    throw std::invalid_argument("TransportProblem: negative marginal entry");
  // Tolerate roundoff-scale negatives (e.g. 1 - cos of aligned vectors).
  if ((cost.array() < -1e-12).any())
    throw std::invalid_argument("TransportProblem: negative cost entry");
  if (std::abs(row_marginal.sum() - 1.0) > kMarginalSumTol ||
      std::abs(col_marginal.sum() - 1.0) > kMarginalSumTol)
    throw std::invalid_argument("TransportProblem: marginals must sum to 1");
}

TransportSolution sinkhorn(const TransportProblem& problem, Scalar lambda, Scalar tol,
                           int max_iter) {
  problem.validate();
  if (lambda <= 0) throw std::invalid_argument("sinkhorn: lambda must be positive");
  if (tol <= 0) throw std::invalid_argument("sinkhorn: tol must be positive");

  // Restrict to rows/cols with positive mass; zero-mass entries carry no plan.
  std::vector<Index> rows, cols;
  for (Index i = 0; i < problem.row_marginal.size(); ++i)
    if (problem.row_marginal(i) > 0) rows.push_back(i);
  for (Index j = 0; j < problem.col_marginal.size(); ++j)
    if (problem.col_marginal(j) > 0) cols.push_back(j);

  const Index nr = static_cast<Index>(rows.size());
  const Index nc = static_cast<Index>(cols.size());
  Vec r(nr), c(nc);
  Mat cost(nr, nc);
  for (Index i = 0; i < nr; ++i) {
    r(i) = problem.row_marginal(rows[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < nc; ++j)
      cost(i, j) = std::max<Scalar>(
          0.0, problem.cost(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]));
  }
  for (Index j = 0; j < nc; ++j) c(j) = problem.col_marginal(cols[static_cast<std::size_t>(j)]);

  const Vec log_r = r.array().log();
  const Vec log_c = c.array().log();
  const Mat scaled_cost = lambda * cost;  // log A = alpha_i + beta_j - lambda B_ij

  Vec alpha = Vec::Zero(nr);
  Vec beta = Vec::Zero(nc);

  auto log_plan = [&](Index i, Index j) { return alpha(i) + beta(j) - scaled_cost(i, j); };

  int iter = 0;
  bool converged = false;
  Mat plan(nr, nc);
  for (iter = 1; iter <= max_iter; ++iter) {
    for (Index i = 0; i < nr; ++i) {
      Vec row(nc);
      for (Index j = 0; j < nc; ++j) row(j) = beta(j) - scaled_cost(i, j);
      alpha(i) = log_r(i) - logsumexp(row);
    }
    for (Index j = 0; j < nc; ++j) {
      Vec col(nr);
      for (Index i = 0; i < nr; ++i) col(i) = alpha(i) - scaled_cost(i, j);
      beta(j) = log_c(j) - logsumexp(col);
    }
    if (!alpha.allFinite() || !beta.allFinite())
      throw std::runtime_error("sinkhorn: numerical overflow");

    for (Index i = 0; i < nr; ++i)
      for (Index j = 0; j < nc; ++j) plan(i, j) = std::exp(log_plan(i, j));
    const Scalar row_violation = (plan.rowwise().sum() - r).cwiseAbs().maxCoeff();
    const Scalar col_violation = (plan.colwise().sum().transpose() - c).cwiseAbs().maxCoeff();
    if (std::max(row_violation, col_violation) < tol) {
      converged = true;
      break;
    }
  }

  TransportSolution sol;
  sol.iterations = std::min(iter, max_iter);
  sol.converged = converged;
  sol.plan = Mat::Zero(problem.cost.rows(), problem.cost.cols());
  sol.row_potential = Vec::Zero(problem.cost.rows());
  sol.col_potential = Vec::Zero(problem.cost.cols());
  sol.distance = 0.0;
  sol.entropy = 0.0;
  for (Index i = 0; i < nr; ++i) {
    sol.row_potential(rows[static_cast<std::size_t>(i)]) = alpha(i) / lambda;
    for (Index j = 0; j < nc; ++j) {
      const Scalar a = plan(i, j);
      sol.plan(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]) = a;
      sol.distance += a * cost(i, j);
      if (a > 0) sol.entropy -= a * log_plan(i, j);
    }
  }
  for (Index j = 0; j < nc; ++j)
    sol.col_potential(cols[static_cast<std::size_t>(j)]) = beta(j) / lambda;
  sol.regularized_objective = sol.distance - sol.entropy / lambda;
  if (!std::isfinite(sol.distance)) throw std::runtime_error("sinkhorn: numerical overflow");
  return sol;
}

namespace {

Scalar assignment_brute_force(const Mat& cost) {
  const Index n = cost.rows();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Scalar best = std::numeric_limits<Scalar>::infinity();
  do {
    Scalar total = 0.0;
    for (Index i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<Scalar>(n);
}

// Enumerates basic feasible solutions: every vertex of the transportation
// polytope is supported on at most rows+cols-1 cells.
Scalar vertex_enumeration(const TransportProblem& p) {
  const Index nr = p.cost.rows();
  const Index nc = p.cost.cols();
  const Index cells = nr * nc;
  const Index basis = nr + nc - 1;

  std::vector<bool> pick(static_cast<std::size_t>(cells), false);
  std::fill(pick.begin(), pick.begin() + basis, true);
  std::sort(pick.begin(), pick.end());  // lexicographically first combination

  Scalar best = std::numeric_limits<Scalar>::infinity();
  do {
    std::vector<Index> chosen;
    for (Index k = 0; k < cells; ++k)
      if (pick[static_cast<std::size_t>(k)]) chosen.push_back(k);

    Mat system = Mat::Zero(nr + nc, basis);
    Vec rhs(nr + nc);
    for (Index i = 0; i < nr; ++i) rhs(i) = p.row_marginal(i);
    for (Index j = 0; j < nc; ++j) rhs(nr + j) = p.col_marginal(j);
    for (std::size_t k = 0; k < chosen.size(); ++k) {
      const Index row = chosen[k] / nc;
      const Index col = chosen[k] % nc;
      system(row, static_cast<Index>(k)) = 1.0;
      system(nr + col, static_cast<Index>(k)) = 1.0;
    }

    const Vec x = system.colPivHouseholderQr().solve(rhs);
    if ((system * x - rhs).cwiseAbs().maxCoeff() > 1e-9) continue;
    if ((x.array() < -1e-10).any()) continue;

    Scalar total = 0.0;
    for (std::size_t k = 0; k < chosen.size(); ++k)
      total += std::max<Scalar>(x(static_cast<Index>(k)), 0.0) * p.cost(chosen[k] / nc, chosen[k] % nc);
    best = std::min(best, total);
  } while (std::next_permutation(pick.begin(), pick.end()));

  if (!std::isfinite(best))
    throw std::runtime_error("exact_ot_oracle: no feasible vertex found");
  return best;
}

}  // namespace

Scalar exact_ot_oracle(const TransportProblem& problem) {
  problem.validate();
  const Index nr = problem.cost.rows();
  const Index nc = problem.cost.cols();

  const bool uniform_square =
      nr == nc &&
      (problem.row_marginal.array() - 1.0 / static_cast<Scalar>(nr)).abs().maxCoeff() < 1e-12 &&
      (problem.col_marginal.array() - 1.0 / static_cast<Scalar>(nc)).abs().maxCoeff() < 1e-12;

  if (uniform_square && nr <= 7) return assignment_brute_force(problem.cost);
  if (nr * nc <= 12) return vertex_enumeration(problem);
  throw std::runtime_error("exact_ot_oracle: oracle limit");
}

}  // namespace memgen
