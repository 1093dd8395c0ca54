// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "memgen/types.hpp"

namespace memgen {

// Binary container of named float64 arrays with a JSON metadata header.
// Used for memory-bank files and model checkpoints. Data is stored
// row-major, little-endian, after the header.
class ArrayStore {
 public:
  static constexpr int kFormatVersion = 1;

  void put(const std::string& name, const Mat& array);
  const Mat& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }

  nlohmann::json meta;

  void save(const std::string& path) const;
  static ArrayStore load(const std::string& path);

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Mat> arrays_;
};

// FNV-1a content hash rendered as 16 hex digits.
std::string content_hash(const std::string& text);

}  // namespace memgen
