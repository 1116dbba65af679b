#include "stmrf/raster_io.hpp"

#include <cstring>
#include <fstream>

namespace stmrf {

namespace {

constexpr std::size_t kHeaderSize = 64;

void put_u16(std::vector<unsigned char>& b, std::size_t off, std::uint16_t v) {
  b[off] = v & 0xff;
  b[off + 1] = (v >> 8) & 0xff;
}

void put_u32(std::vector<unsigned char>& b, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[off + i] = (v >> (8 * i)) & 0xff;
}

std::uint16_t get_u16(const unsigned char* b) {
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_raster(const std::string& path, const RasterData& data) {
  if (data.t < 1 || data.h < 1 || data.w < 1 || data.c < 1)
    throw DataError("raster dimensions must be positive");
  const std::size_t n =
      static_cast<std::size_t>(data.t) * data.h * data.w * data.c;

  std::vector<unsigned char> header(kHeaderSize, 0);
  std::memcpy(header.data(), "STMR", 4);
  put_u16(header, 4, 1);
  put_u16(header, 6, static_cast<std::uint16_t>(data.dtype));
  put_u32(header, 8, static_cast<std::uint32_t>(data.t));
  put_u32(header, 12, static_cast<std::uint32_t>(data.h));
  put_u32(header, 16, static_cast<std::uint32_t>(data.w));
  put_u32(header, 20, static_cast<std::uint32_t>(data.c));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open raster for writing: " + path);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  std::vector<unsigned char> payload;
  switch (data.dtype) {
    case RasterDtype::kF64: {
      if (data.f64.size() != n) throw DataError("raster payload size mismatch");
      payload.resize(n * 8);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data.f64[i], 8);
        for (int b = 0; b < 8; ++b)
          payload[i * 8 + b] = (bits >> (8 * b)) & 0xff;
      }
      break;
    }
    case RasterDtype::kF32: {
      if (data.f64.size() != n) throw DataError("raster payload size mismatch");
      payload.resize(n * 4);
      for (std::size_t i = 0; i < n; ++i) {
        const float f = static_cast<float>(data.f64[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int b = 0; b < 4; ++b)
          payload[i * 4 + b] = (bits >> (8 * b)) & 0xff;
      }
      break;
    }
    case RasterDtype::kU16: {
      if (data.u16.size() != n) throw DataError("raster payload size mismatch");
      payload.resize(n * 2);
      for (std::size_t i = 0; i < n; ++i) {
        payload[i * 2] = data.u16[i] & 0xff;
        payload[i * 2 + 1] = (data.u16[i] >> 8) & 0xff;
      }
      break;
    }
    default:
      throw DataError("unknown raster dtype");
  }
  out.write(reinterpret_cast<const char*>(payload.data()), payload.size());
  if (!out) throw DataError("failed writing raster: " + path);
  out.close();

  if (!data.dates.empty()) {
    if (static_cast<int>(data.dates.size()) != data.t)
      throw DataError("raster has " + std::to_string(data.dates.size()) +
                      " dates for T=" + std::to_string(data.t));
    std::ofstream ds(path + ".dates");
    if (!ds) throw DataError("cannot write dates sidecar for: " + path);
    for (const auto& d : data.dates) ds << d.to_string() << '\n';
  }
}

RasterData read_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open raster: " + path);
  unsigned char header[kHeaderSize];
  in.read(reinterpret_cast<char*>(header), kHeaderSize);
  if (!in) throw DataError("raster too short for header: " + path);
  if (std::memcmp(header, "STMR", 4) != 0)
    throw DataError("not an STMR raster (bad magic): " + path);
  const std::uint16_t version = get_u16(header + 4);
  if (version != 1)
    throw DataError("unsupported STMR version " + std::to_string(version));
  RasterData data;
  const std::uint16_t dtype = get_u16(header + 6);
  data.t = static_cast<int>(get_u32(header + 8));
  data.h = static_cast<int>(get_u32(header + 12));
  data.w = static_cast<int>(get_u32(header + 16));
  data.c = static_cast<int>(get_u32(header + 20));
  if (data.t < 1 || data.h < 1 || data.w < 1 || data.c < 1)
    throw DataError("corrupt STMR dimensions in: " + path);
  const std::size_t n =
      static_cast<std::size_t>(data.t) * data.h * data.w * data.c;

  auto read_all = [&](std::size_t bytes) {
    std::vector<unsigned char> buf(bytes);
    in.read(reinterpret_cast<char*>(buf.data()), bytes);
    if (!in) throw DataError("raster payload truncated: " + path);
    return buf;
  };

  switch (dtype) {
    case 1: {
      data.dtype = RasterDtype::kF32;
      const auto buf = read_all(n * 4);
      data.f64.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
          bits |= static_cast<std::uint32_t>(buf[i * 4 + b]) << (8 * b);
        float f;
        std::memcpy(&f, &bits, 4);
        data.f64[i] = f;
      }
      break;
    }
    case 2: {
      data.dtype = RasterDtype::kF64;
      const auto buf = read_all(n * 8);
      data.f64.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
          bits |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
        std::memcpy(&data.f64[i], &bits, 8);
      }
      break;
    }
    case 3: {
      data.dtype = RasterDtype::kU16;
      const auto buf = read_all(n * 2);
      data.u16.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        data.u16[i] = static_cast<std::uint16_t>(buf[i * 2] | (buf[i * 2 + 1] << 8));
      break;
    }
    default:
      throw DataError("unknown STMR dtype code " + std::to_string(dtype));
  }

  std::ifstream ds(path + ".dates");
  if (ds) {
    std::string line;
    while (std::getline(ds, line)) {
      if (line.empty()) continue;
      data.dates.push_back(Date::parse(line));
    }
    if (static_cast<int>(data.dates.size()) != data.t)
      throw DataError("dates sidecar of " + path + " lists " +
                      std::to_string(data.dates.size()) + " dates for T=" +
                      std::to_string(data.t));
  }
  return data;
}

void write_feature_stack(const std::string& path, const FeatureStack& fs) {
  fs.validate();
  RasterData d;
  d.t = fs.t;
  d.h = fs.h;
  d.w = fs.w;
  d.c = fs.f;
  d.dtype = RasterDtype::kF64;
  d.f64 = fs.values;
  d.dates = fs.dates;
  write_raster(path, d);
}

FeatureStack read_feature_stack(const std::string& path) {
  const RasterData d = read_raster(path);
  if (d.dtype == RasterDtype::kU16)
    throw DataError("feature raster must be floating point: " + path);
  FeatureStack fs(d.t, d.h, d.w, d.c, d.dates);
  fs.values = d.f64;
  fs.validate();
  return fs;
}

void write_probability_stack(const std::string& path,
                             const ProbabilityStack& ps,
                             const std::vector<Date>& dates) {
  ps.validate();
  RasterData d;
  d.t = ps.t;
  d.h = ps.h;
  d.w = ps.w;
  d.c = ps.k;
  d.dtype = RasterDtype::kF64;
  d.f64 = ps.values;
  d.dates = dates;
  write_raster(path, d);
}

ProbabilityStack read_probability_stack(const std::string& path) {
  const RasterData d = read_raster(path);
  if (d.dtype == RasterDtype::kU16)
    throw DataError("probability raster must be floating point: " + path);
  ProbabilityStack ps(d.t, d.h, d.w, d.c);
  ps.values = d.f64;
  ps.validate();
  return ps;
}

void write_label_stack(const std::string& path, const LabelStack& ls,
                       const std::vector<Date>& dates) {
  RasterData d;
  d.t = ls.t;
  d.h = ls.h;
  d.w = ls.w;
  d.c = 1;
  d.dtype = RasterDtype::kU16;
  d.u16.resize(ls.values.size());
  for (std::size_t i = 0; i < ls.values.size(); ++i) {
    if (ls.values[i] < 0 || ls.values[i] > 0xffff)
      throw DataError("label does not fit u16");
    d.u16[i] = static_cast<std::uint16_t>(ls.values[i]);
  }
  d.dates = dates;
  write_raster(path, d);
}

LabelStack read_label_stack(const std::string& path) {
  const RasterData d = read_raster(path);
  if (d.dtype != RasterDtype::kU16 || d.c != 1)
    throw DataError("label raster must be single-channel u16: " + path);
  LabelStack ls(d.t, d.h, d.w);
  for (std::size_t i = 0; i < d.u16.size(); ++i)
    ls.values[i] = d.u16[i];
  return ls;
}

}  // namespace stmrf
