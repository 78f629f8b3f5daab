#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "seqpinn/errors.hpp"

namespace seqpinn {

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n,
                           std::uint64_t hash = 14695981039346656037ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= data[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

namespace detail {

// The on-disk format mandates little-endian; these helpers make the byte
// order explicit instead of relying on host order.
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_f64(std::vector<unsigned char>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class ByteReader {
 public:
  ByteReader(const unsigned char* data, std::size_t n) : data_(data), n_(n) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  const unsigned char* raw(std::size_t n) {
    need(n);
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return n_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > n_) throw format_error("file is truncated");
  }
  const unsigned char* data_;
  std::size_t n_, pos_ = 0;
};

}  // namespace detail

/// Dense space-time solution table from the pseudospectral solver. Spatial
/// nodes follow the periodic convention (x_hi is the domain end, not a
/// node); time nodes include both endpoints.
struct ReferenceGrid {
  std::uint32_t nx = 0, nt = 0;
  double x_lo = 0, x_hi = 0, t_lo = 0, t_hi = 0;
  std::vector<double> values;  // nt rows of nx values

  // In-memory provenance; not part of the file format.
  std::string problem;
  std::string creation;

  double x_node(std::uint32_t i) const {
    return x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(nx);
  }
  double t_node(std::uint32_t j) const {
    return nt < 2 ? t_lo
                  : t_lo + (t_hi - t_lo) * static_cast<double>(j) /
                               static_cast<double>(nt - 1);
  }
  double at(std::uint32_t j, std::uint32_t i) const {
    return values[static_cast<std::size_t>(j) * nx + i];
  }

  void validate() const {
    if (nx < 256 || (nx & (nx - 1)) != 0)
      throw format_error("grid: nx must be a power of two >= 256");
    if (nt < 2) throw format_error("grid: nt must be >= 2");
    if (!(x_lo < x_hi) || !(t_lo < t_hi))
      throw format_error("grid: empty spatial or temporal extent");
    if (values.size() != static_cast<std::size_t>(nx) * nt)
      throw format_error("grid: value count does not match nx*nt");
    for (double v : values)
      if (!std::isfinite(v)) throw format_error("grid: non-finite value");
  }
};

inline constexpr char kGridMagic[8] = {'P', 'D', 'E', 'G', 'R', 'I', 'D', '1'};
inline constexpr std::uint32_t kGridVersion = 1;

inline void save_grid(const ReferenceGrid& grid, const std::string& path) {
  grid.validate();
  std::vector<unsigned char> buf;
  buf.reserve(36 + grid.values.size() * 8 + 8);
  for (char c : kGridMagic) buf.push_back(static_cast<unsigned char>(c));
  detail::put_u32(buf, kGridVersion);
  detail::put_u32(buf, grid.nx);
  detail::put_u32(buf, grid.nt);
  detail::put_f64(buf, grid.x_lo);
  detail::put_f64(buf, grid.x_hi);
  detail::put_f64(buf, grid.t_lo);
  detail::put_f64(buf, grid.t_hi);
  const std::size_t value_start = buf.size();
  for (double v : grid.values) detail::put_f64(buf, v);
  const std::uint64_t checksum =
      fnv1a(buf.data() + value_start, buf.size() - value_start);
  detail::put_u64(buf, checksum);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw format_error("failed writing grid file '" + path + "'");
}

inline ReferenceGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open grid file '" + path + "'");
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  detail::ByteReader r(buf.data(), buf.size());

  const unsigned char* magic = r.raw(8);
  if (std::memcmp(magic, kGridMagic, 8) != 0)
    throw format_error("grid file '" + path + "' has wrong magic bytes");
  const std::uint32_t version = r.u32();
  if (version != kGridVersion)
    throw format_error("grid file version " + std::to_string(version) +
                       " is not supported");
  ReferenceGrid g;
  g.nx = r.u32();
  g.nt = r.u32();
  g.x_lo = r.f64();
  g.x_hi = r.f64();
  g.t_lo = r.f64();
  g.t_hi = r.f64();
  const std::size_t count = static_cast<std::size_t>(g.nx) * g.nt;
  if (r.remaining() != count * 8 + 8)
    throw format_error("grid file '" + path + "' is truncated");
  const unsigned char* vb = r.raw(count * 8);
  const std::uint64_t stored = r.u64();
  if (fnv1a(vb, count * 8) != stored)
    throw format_error("grid file '" + path + "' failed its checksum");
  g.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(vb[i * 8 + b]) << (8 * b);
    g.values[i] = std::bit_cast<double>(bits);
  }
  g.validate();
  return g;
}

/// Bilinear interpolation, periodic in x; t must lie within the grid.
inline double interpolate(const ReferenceGrid& grid, double x, double t) {
  const double tol = 1e-12 * std::max(1.0, std::abs(grid.t_hi));
  if (t < grid.t_lo - tol || t > grid.t_hi + tol)
    throw config_error("grid interpolation: t is outside the stored range");
  t = std::min(std::max(t, grid.t_lo), grid.t_hi);

  const double dt = (grid.t_hi - grid.t_lo) / static_cast<double>(grid.nt - 1);
  double ft = (t - grid.t_lo) / dt;
  auto j0 = static_cast<std::uint32_t>(std::min<double>(ft, grid.nt - 1));
  if (j0 >= grid.nt - 1) j0 = grid.nt - 2;
  const double wt = ft - static_cast<double>(j0);

  const double span = grid.x_hi - grid.x_lo;
  double fx = (x - grid.x_lo) / span;
  fx -= std::floor(fx);  // periodic wrap into [0,1)
  fx *= static_cast<double>(grid.nx);
  auto i0 = static_cast<std::uint32_t>(fx);
  if (i0 >= grid.nx) i0 = grid.nx - 1;
  const double wx = fx - static_cast<double>(i0);
  const std::uint32_t i1 = (i0 + 1) % grid.nx;

  const double a = grid.at(j0, i0) * (1.0 - wx) + grid.at(j0, i1) * wx;
  const double b = grid.at(j0 + 1, i0) * (1.0 - wx) + grid.at(j0 + 1, i1) * wx;
  return a * (1.0 - wt) + b * wt;
}

}  // namespace seqpinn
