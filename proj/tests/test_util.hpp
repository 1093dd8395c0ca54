// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "memgen/autodiff.hpp"
#include "memgen/rng.hpp"
#include "memgen/types.hpp"

namespace memgen::testutil {

// Central finite differences of `loss` against the analytic gradient stored
// in each parameter after one backward pass (caller runs backward via
// `grad_fn`, which must recompute the loss AND populate grads). Checks
// `coords` random coordinates per parameter; returns the worst relative
// error found.
struct FdReport {
  Scalar worst_rel = 0.0;
  std::string worst_param;
};

inline FdReport fd_check(const std::vector<ad::ParamPtr>& params,
                         const std::function<Scalar()>& loss,
                         const std::function<void()>& grad_fn, Rng& rng, int coords = 5,
                         Scalar step = 1e-5) {
  grad_fn();
  std::vector<Mat> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.push_back(p->grad);

  FdReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params[k];
    for (int c = 0; c < coords; ++c) {
      const Index i = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(p->value.rows())));
      const Index j = static_cast<Index>(rng.uniform_int(static_cast<std::uint64_t>(p->value.cols())));
      const Scalar saved = p->value(i, j);
      p->value(i, j) = saved + step;
      const Scalar up = loss();
      p->value(i, j) = saved - step;
      const Scalar down = loss();
      p->value(i, j) = saved;
      const Scalar fd = (up - down) / (2.0 * step);
      const Scalar an = grads[k](i, j);
      // The 1e-6 floor absorbs central-difference roundoff (~1e-11 at unit
      // loss scale) on coordinates whose true gradient is zero.
      const Scalar rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), Scalar(1e-6)});
      if (rel > report.worst_rel) {
        report.worst_rel = rel;
        report.worst_param = p->name;
      }
    }
  }
  return report;
}

inline Mat random_matrix(Rng& rng, Index rows, Index cols, Scalar scale = 1.0) {
  return rng.gaussian(rows, cols, scale);
}

}  // namespace memgen::testutil
