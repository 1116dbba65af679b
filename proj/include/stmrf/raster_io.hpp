#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

/// Flat raster container, bit-exact on disk.
///
/// File layout (all little-endian):
///   bytes  0-3   magic "STMR"
///   bytes  4-5   version (u16, currently 1)
///   bytes  6-7   dtype code (u16): 1 = f32, 2 = f64, 3 = u16
///   bytes  8-23  dims T, H, W, C (u32 each)
///   bytes 24-63  reserved, zero
///   payload      T*H*W*C values, row-major with C fastest
/// Dates, when present, live in a sidecar UTF-8 text file "<path>.dates"
/// with one ISO-8601 date per line.
enum class RasterDtype : std::uint16_t { kF32 = 1, kF64 = 2, kU16 = 3 };

struct RasterData {
  int t = 0, h = 0, w = 0, c = 0;
  RasterDtype dtype = RasterDtype::kF64;
  std::vector<double> f64;          // kF32/kF64 payloads (f32 widened)
  std::vector<std::uint16_t> u16;   // kU16 payload
  std::vector<Date> dates;          // empty when no sidecar exists
};

void write_raster(const std::string& path, const RasterData& data);
RasterData read_raster(const std::string& path);

// Typed conveniences used throughout the pipeline.
void write_feature_stack(const std::string& path, const FeatureStack& fs);
FeatureStack read_feature_stack(const std::string& path);
void write_probability_stack(const std::string& path,
                             const ProbabilityStack& ps,
                             const std::vector<Date>& dates);
ProbabilityStack read_probability_stack(const std::string& path);
void write_label_stack(const std::string& path, const LabelStack& ls,
                       const std::vector<Date>& dates);
LabelStack read_label_stack(const std::string& path);

}  // namespace stmrf
