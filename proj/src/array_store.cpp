// Copyright 2026 The memgen Authors
// SPDX-License-Identifier: Apache-2.0

#include "memgen/array_store.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace memgen {

namespace {
constexpr char kMagic[8] = {'M', 'G', 'A', 'R', 'B', 'I', 'N', '\n'};
}  // namespace

void ArrayStore::put(const std::string& name, const Mat& array) {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) order_.push_back(name);
  arrays_[name] = array;
}

const Mat& ArrayStore::get(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end())
    throw std::runtime_error("ArrayStore: missing array '" + name + "'");
  return it->second;
}

bool ArrayStore::has(const std::string& name) const {
  return arrays_.count(name) > 0;
}

void ArrayStore::save(const std::string& path) const {
  nlohmann::json header;
  header["format_version"] = kFormatVersion;
  header["meta"] = meta;
  nlohmann::json arr_index = nlohmann::json::array();
  for (const auto& name : order_) {
    const Mat& m = arrays_.at(name);
    arr_index.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  header["arrays"] = arr_index;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("ArrayStore: cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& name : order_) {
    const Mat& m = arrays_.at(name);
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) {
        const Scalar v = m(r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
      }
  }
  if (!out) throw std::runtime_error("ArrayStore: write failed for '" + path + "'");
}

ArrayStore ArrayStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("ArrayStore: cannot open '" + path + "'");

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("ArrayStore: '" + path + "' is not an array container");

  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw std::runtime_error("ArrayStore: truncated file '" + path + "'");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("ArrayStore: truncated file '" + path + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("ArrayStore: corrupt header in '" + path + "': " + e.what());
  }
  const int version = header.value("format_version", -1);
  if (version != kFormatVersion)
    throw std::runtime_error("ArrayStore: version mismatch in '" + path + "': file version " +
                             std::to_string(version) + ", supported version " +
                             std::to_string(kFormatVersion));

  ArrayStore store;
  store.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const Index rows = entry.at("rows").get<Index>();
    const Index cols = entry.at("cols").get<Index>();
    Mat m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) {
        Scalar v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!in) throw std::runtime_error("ArrayStore: truncated file '" + path + "'");
        m(r, c) = v;
      }
    store.put(name, m);
  }
  return store;
}

std::string content_hash(const std::string& text) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

}  // namespace memgen
