// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "memgen/rng.hpp"
#include "memgen/sinkhorn.hpp"

using namespace memgen;

namespace {

TransportProblem uniform_problem(Rng& rng, Index n) {
  TransportProblem p;
  p.row_marginal = Vec::Constant(n, 1.0 / static_cast<Scalar>(n));
  p.col_marginal = Vec::Constant(n, 1.0 / static_cast<Scalar>(n));
  p.cost = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) p.cost(i, j) = rng.uniform();
  return p;
}

Vec random_simplex(Rng& rng, Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform() + 1e-3;
  return v / v.sum();
}

}  // namespace

TEST_CASE("sinkhorn: zero cost gives the product plan and zero distance") {
  Rng rng(1);
  TransportProblem p;
  p.row_marginal = random_simplex(rng, 3);
  p.col_marginal = random_simplex(rng, 5);
  p.cost = Mat::Zero(3, 5);
  const TransportSolution sol = sinkhorn(p, 10.0, 1e-9, 1000);
  CHECK(sol.converged);
  CHECK(sol.distance == doctest::Approx(0.0).epsilon(1e-12));
  const Mat product = p.row_marginal * p.col_marginal.transpose();
  CHECK((sol.plan - product).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sinkhorn: 1x1 forced plan") {
  TransportProblem p;
  p.row_marginal = Vec::Ones(1);
  p.col_marginal = Vec::Ones(1);
  p.cost = Mat::Constant(1, 1, 0.7);
  const TransportSolution sol = sinkhorn(p, 5.0, 1e-9, 100);
  CHECK(sol.plan(0, 0) == doctest::Approx(1.0));
  CHECK(sol.distance == doctest::Approx(0.7));
}

TEST_CASE("sinkhorn: permutation cost at high lambda approaches assignment") {
  TransportProblem p;
  const Index n = 4;
  p.row_marginal = Vec::Constant(n, 0.25);
  p.col_marginal = Vec::Constant(n, 0.25);
  p.cost = Mat::Ones(n, n);
  // zeros on a fixed permutation
  const Index perm[4] = {2, 0, 3, 1};
  for (Index i = 0; i < n; ++i) p.cost(i, perm[i]) = 0.0;
  const TransportSolution sol = sinkhorn(p, 100.0, 1e-8, 20000);
  CHECK(sol.converged);
  CHECK(exact_ot_oracle(p) == doctest::Approx(0.0));
  CHECK(sol.distance < 0.02);
}

TEST_CASE("sinkhorn: marginals match within tolerance after convergence") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    TransportProblem p;
    p.row_marginal = random_simplex(rng, 4);
    p.col_marginal = random_simplex(rng, 6);
    p.cost = Mat::Zero(4, 6);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 6; ++j) p.cost(i, j) = rng.uniform();
    const TransportSolution sol = sinkhorn(p, 30.0, 1e-8, 50000);
    REQUIRE(sol.converged);
    CHECK((sol.plan.rowwise().sum() - p.row_marginal).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((sol.plan.colwise().sum().transpose() - p.col_marginal).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(sol.distance == doctest::Approx((sol.plan.cwiseProduct(p.cost)).sum()));
  }
}

TEST_CASE("sinkhorn: distance non-increasing in lambda") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const TransportProblem p = uniform_problem(rng, 5);
    Scalar prev = std::numeric_limits<Scalar>::infinity();
    for (const Scalar lambda : {5.0, 10.0, 20.0, 50.0, 100.0, 200.0}) {
      const Scalar d = sinkhorn(p, lambda, 1e-9, 100000).distance;
      CHECK(d <= prev + 1e-9);
      prev = d;
    }
  }
}

TEST_CASE("sinkhorn: converges to the exact optimum within 2% at lambda=200") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const TransportProblem p = uniform_problem(rng, 5);
    const Scalar exact = exact_ot_oracle(p);
    // Tight marginal tolerance so the plan is near-feasible and its cost is
    // a genuine upper bound on the LP optimum.
    const Scalar entropic = sinkhorn(p, 200.0, 1e-10, 400000).distance;
    CHECK(entropic >= exact - 1e-9);
    CHECK(entropic <= exact * 1.02);
  }
}

TEST_CASE("sinkhorn: zero-mass marginal entries are masked") {
  TransportProblem p;
  p.row_marginal = (Vec(4) << 0.5, 0.0, 0.25, 0.25).finished();
  p.col_marginal = (Vec(3) << 0.0, 0.6, 0.4).finished();
  p.cost = Mat::Ones(4, 3);
  p.cost(0, 1) = 0.1;
  const TransportSolution sol = sinkhorn(p, 50.0, 1e-9, 20000);
  CHECK(sol.converged);
  CHECK(sol.plan.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.plan.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sol.plan.rowwise().sum() - p.row_marginal).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("sinkhorn: argument validation") {
  TransportProblem p;
  p.row_marginal = Vec::Ones(1);
  p.col_marginal = Vec::Ones(1);
  p.cost = Mat::Zero(1, 1);
  CHECK_THROWS_AS(sinkhorn(p, -1.0), std::invalid_argument);
  TransportProblem bad = p;
  bad.row_marginal = Vec::Constant(1, 0.5);
  CHECK_THROWS_AS(sinkhorn(bad, 10.0), std::invalid_argument);
  bad = p;
  bad.cost = Mat::Constant(1, 1, -0.1);
  CHECK_THROWS_AS(sinkhorn(bad, 10.0), std::invalid_argument);
}

TEST_CASE("exact oracle: identity-favoring cost gives zero") {
  TransportProblem p;
  p.row_marginal = Vec::Constant(3, 1.0 / 3.0);
  p.col_marginal = Vec::Constant(3, 1.0 / 3.0);
  p.cost = Mat::Ones(3, 3) - Mat::Identity(3, 3);
  CHECK(exact_ot_oracle(p) == doctest::Approx(0.0));
}

TEST_CASE("exact oracle: constant cost gives that constant") {
  Rng rng(13);
  TransportProblem p;
  p.row_marginal = random_simplex(rng, 3);
  p.col_marginal = random_simplex(rng, 4);
  p.cost = Mat::Ones(3, 4);
  CHECK(exact_ot_oracle(p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exact oracle: vertex enumeration agrees with brute force on square instances") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const TransportProblem p = uniform_problem(rng, 3);  // 3x3 = 9 cells <= 12
    // Both oracle paths are applicable here; compare them directly.
    TransportProblem non_uniform = p;
    non_uniform.row_marginal(0) += 1e-9;  // route to vertex enumeration
    non_uniform.row_marginal /= non_uniform.row_marginal.sum();
    const Scalar brute = exact_ot_oracle(p);
    const Scalar vertex = exact_ot_oracle(non_uniform);
    CHECK(brute == doctest::Approx(vertex).epsilon(1e-6));
  }
}

TEST_CASE("exact oracle: oracle limit") {
  Rng rng(19);
  const TransportProblem p = uniform_problem(rng, 8);
  CHECK_THROWS_WITH_AS(exact_ot_oracle(p), "exact_ot_oracle: oracle limit", std::runtime_error);
}
