#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "binlab/tensor.hpp"

namespace binlab {

/// Named tensors plus a JSON metadata block.
///
/// File layout (all integers little-endian):
///   bytes 0..7   magic "BINLAB\0\1"
///   u32          format version (1)
///   u64          header length H
///   H bytes      UTF-8 JSON: {"meta": ..., "tensors": [{"name", "shape", "offset"}...]}
///   payload      float64 values, each tensor contiguous at its byte offset
///                relative to the payload start
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json meta = nlohmann::json::object();
  std::map<std::string, Tensor> tensors;

  void put(const std::string& name, const Tensor& t) { tensors[name] = t; }
  bool has(const std::string& name) const { return tensors.count(name) != 0; }
  /// Throws DataError when absent.
  const Tensor& get(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws DataError on a missing file, bad magic, unknown version or truncation.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace binlab
