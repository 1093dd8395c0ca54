// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "memgen/types.hpp"

namespace memgen {

// Discrete OT instance: move mass from row_marginal to col_marginal at the
// given per-cell cost. Marginals are probability vectors.
struct TransportProblem {
  Vec row_marginal;
  Vec col_marginal;
  Mat cost;

  // Throws std::invalid_argument on shape/negativity/normalization issues.
  void validate() const;
};

struct TransportSolution {
  Mat plan;                      // row sums = row_marginal, col sums = col_marginal
  Scalar distance = 0.0;         // <plan, cost>
  Scalar regularized_objective = 0.0;  // <plan, cost> - (1/lambda) h(plan)
  Scalar entropy = 0.0;          // h(plan) = -sum plan .* log plan
  Vec row_potential;             // dual f (0 on masked rows)
  Vec col_potential;             // dual g (0 on masked cols)
  int iterations = 0;
  bool converged = false;
};

// Log-domain Sinkhorn scaling on kernel exp(-lambda * cost). Stops when the
// worst marginal violation drops below tol or max_iter is hit. Exact zeros
// in the marginals are handled by masking those rows/columns.
TransportSolution sinkhorn(const TransportProblem& problem, Scalar lambda,
                           Scalar tol = 1e-6, int max_iter = 500);

// Exact unregularized OT distance for small instances. Uniform equal-size
// marginals with n <= 7 are solved by brute force over permutations; other
// instances with rows*cols <= 12 by enumerating basic feasible solutions of
// the transportation polytope. Larger instances throw "oracle limit".
Scalar exact_ot_oracle(const TransportProblem& problem);

}  // namespace memgen
