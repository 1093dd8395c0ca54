// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "memgen/types.hpp"

namespace memgen {

// Deterministic RNG with fully explicit, serializable state. All stochastic
// behaviour in the library flows through this class so that fixed seeds give
// bitwise-identical runs and checkpoints can resume the stream exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  Scalar uniform() {
    return static_cast<Scalar>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the spare value is part of the state.
  Scalar normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    Scalar u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const Scalar u2 = uniform();
    const Scalar radius = std::sqrt(-2.0 * std::log(u1));
    const Scalar angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % n;
  }

  bool bernoulli(Scalar p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  Mat gaussian(Index rows, Index cols, Scalar stddev) {
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = stddev * normal();
    return m;
  }

  std::string serialize() const {
    std::ostringstream oss;
    oss << engine_ << ' ' << (has_spare_ ? 1 : 0);
    if (has_spare_) {
      oss << ' ';
      oss.precision(17);
      oss << spare_;
    }
    return oss.str();
  }

  void deserialize(const std::string& state) {
    std::istringstream iss(state);
    int spare_flag = 0;
    iss >> engine_ >> spare_flag;
    if (!iss) throw std::runtime_error("Rng: malformed serialized state");
    has_spare_ = spare_flag != 0;
    spare_ = 0.0;
    if (has_spare_) iss >> spare_;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  Scalar spare_ = 0.0;
};

}  // namespace memgen
