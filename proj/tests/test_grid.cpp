#include "test_util.hpp"

#include <fstream>

using namespace seqpinn;

namespace {

ReferenceGrid sample_grid(std::uint32_t nx = 256, std::uint32_t nt = 3) {
  ReferenceGrid g;
  g.nx = nx;
  g.nt = nt;
  g.x_lo = 0.0;
  g.x_hi = 2.0 * std::numbers::pi;
  g.t_lo = 0.0;
  g.t_hi = 1.0;
  g.values.resize(static_cast<std::size_t>(nx) * nt);
  for (std::uint32_t j = 0; j < nt; ++j)
    for (std::uint32_t i = 0; i < nx; ++i)
      g.values[static_cast<std::size_t>(j) * nx + i] =
          std::sin(0.1 * i) + static_cast<double>(j);
  return g;
}

std::vector<unsigned char> file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path,
                 const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("grid files roundtrip bit for bit", "[grid]") {
  testutil::TempDir dir("gridrt");
  const std::string path = (dir.path() / "ref.grid").string();
  const ReferenceGrid g = sample_grid();
  save_grid(g, path);
  const ReferenceGrid back = load_grid(path);
  REQUIRE(back.nx == g.nx);
  REQUIRE(back.nt == g.nt);
  REQUIRE(back.x_lo == g.x_lo);
  REQUIRE(back.x_hi == g.x_hi);
  REQUIRE(back.t_lo == g.t_lo);
  REQUIRE(back.t_hi == g.t_hi);
  REQUIRE(back.values == g.values);
}

TEST_CASE("grid geometry is validated before writing", "[grid]") {
  testutil::TempDir dir("gridval");
  const std::string path = (dir.path() / "bad.grid").string();

  ReferenceGrid g = sample_grid();
  g.nx = 100;  // not a power of two
  g.values.resize(static_cast<std::size_t>(g.nx) * g.nt);
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);

  g = sample_grid(128);  // power of two but below the floor
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);

  g = sample_grid();
  g.nt = 1;
  g.values.resize(g.nx);
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);

  g = sample_grid();
  g.values.pop_back();
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);

  g = sample_grid();
  g.values[7] = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);

  g = sample_grid();
  g.t_hi = g.t_lo;
  REQUIRE_THROWS_AS(save_grid(g, path), format_error);
}

TEST_CASE("grid reader rejects damaged files with precise reasons", "[grid]") {
  testutil::TempDir dir("griddmg");
  const std::string good_path = (dir.path() / "good.grid").string();
  save_grid(sample_grid(), good_path);
  const std::vector<unsigned char> good = file_bytes(good_path);

  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_grid((dir.path() / "nope.grid").string()),
                      format_error);
  }

  SECTION("wrong magic") {
    auto bytes = good;
    bytes[0] = 'X';
    const std::string p = (dir.path() / "magic.grid").string();
    write_bytes(p, bytes);
    try {
      load_grid(p);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      REQUIRE(std::string(e.what()).find("magic") != std::string::npos);
    }
  }

  SECTION("unsupported version") {
    auto bytes = good;
    bytes[8] = 9;  // little-endian version word follows the 8-byte magic
    const std::string p = (dir.path() / "ver.grid").string();
    write_bytes(p, bytes);
    try {
      load_grid(p);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      REQUIRE(std::string(e.what()).find("version") != std::string::npos);
    }
  }

  SECTION("truncated payload") {
    auto bytes = good;
    bytes.resize(bytes.size() - 11);
    const std::string p = (dir.path() / "trunc.grid").string();
    write_bytes(p, bytes);
    try {
      load_grid(p);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      REQUIRE(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }

  SECTION("flipped value byte fails the checksum") {
    auto bytes = good;
    bytes[60] ^= 0x40;  // inside the first value, well past the header
    const std::string p = (dir.path() / "bitflip.grid").string();
    write_bytes(p, bytes);
    try {
      load_grid(p);
      FAIL("expected format_error");
    } catch (const format_error& e) {
      REQUIRE(std::string(e.what()).find("checksum") != std::string::npos);
    }
  }
}

TEST_CASE("a hand-assembled little-endian file decodes exactly", "[grid]") {
  // Build the documented layout byte by byte, independent of save_grid.
  std::vector<unsigned char> bytes;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto u64 = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
      bytes.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto f64 = [&](double v) { u64(std::bit_cast<std::uint64_t>(v)); };

  const std::uint32_t nx = 256, nt = 2;
  for (char c : {'P', 'D', 'E', 'G', 'R', 'I', 'D', '1'})
    bytes.push_back(static_cast<unsigned char>(c));
  u32(1);  // version
  u32(nx);
  u32(nt);
  f64(-1.0);  // x_lo
  f64(1.0);   // x_hi
  f64(0.0);   // t_lo
  f64(0.25);  // t_hi
  const std::size_t value_start = bytes.size();
  std::vector<double> vals(static_cast<std::size_t>(nx) * nt);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = 1.0 + static_cast<double>(i) * 0.5;
    f64(vals[i]);
  }
  u64(fnv1a(bytes.data() + value_start, bytes.size() - value_start));

  testutil::TempDir dir("gridle");
  const std::string p = (dir.path() / "manual.grid").string();
  write_bytes(p, bytes);
  const ReferenceGrid g = load_grid(p);
  REQUIRE(g.nx == nx);
  REQUIRE(g.nt == nt);
  REQUIRE(g.x_lo == -1.0);
  REQUIRE(g.x_hi == 1.0);
  REQUIRE(g.t_hi == 0.25);
  REQUIRE(g.values == vals);
}

TEST_CASE("interpolation reproduces node values exactly on aligned grids",
          "[grid]") {
  // Domain chosen so every node coordinate is a small integer: the weight
  // arithmetic is then exact and nodes must come back bit for bit.
  ReferenceGrid g;
  g.nx = 256;
  g.nt = 3;
  g.x_lo = 0.0;
  g.x_hi = 256.0;
  g.t_lo = 0.0;
  g.t_hi = 2.0;
  g.values.resize(static_cast<std::size_t>(g.nx) * g.nt);
  for (std::uint32_t j = 0; j < g.nt; ++j)
    for (std::uint32_t i = 0; i < g.nx; ++i)
      g.values[static_cast<std::size_t>(j) * g.nx + i] =
          std::cos(0.3 * i) * (j + 1.0);

  for (std::uint32_t j = 0; j < g.nt; ++j)
    for (std::uint32_t i : {0u, 1u, 100u, 255u})
      REQUIRE(interpolate(g, g.x_node(i), g.t_node(j)) == g.at(j, i));
}

TEST_CASE("interpolation is bilinear between nodes", "[grid]") {
  // Values u = x are reproduced exactly by linear interpolation away from
  // the periodic seam; in t the two identical rows make time irrelevant.
  ReferenceGrid g;
  g.nx = 256;
  g.nt = 2;
  g.x_lo = 0.0;
  g.x_hi = 256.0;
  g.t_lo = 0.0;
  g.t_hi = 1.0;
  g.values.resize(512);
  for (std::uint32_t j = 0; j < 2; ++j)
    for (std::uint32_t i = 0; i < 256; ++i)
      g.values[static_cast<std::size_t>(j) * 256 + i] = static_cast<double>(i);

  for (double x : {3.25, 100.5, 254.9}) {
    REQUIRE(interpolate(g, x, 0.0) == Catch::Approx(x).margin(1e-12));
    REQUIRE(interpolate(g, x, 0.37) == Catch::Approx(x).margin(1e-12));
  }

  // Mixed-time interpolation: rows 0 and 2x give u = (1 + wt) * x.
  for (std::uint32_t i = 0; i < 256; ++i) g.values[256 + i] = 2.0 * i;
  REQUIRE(interpolate(g, 10.0, 0.25) == Catch::Approx(12.5).margin(1e-12));
}

TEST_CASE("interpolation wraps periodically in space", "[grid]") {
  ReferenceGrid g;
  g.nx = 256;
  g.nt = 2;
  g.x_lo = 0.0;
  g.x_hi = 2.0 * std::numbers::pi;
  g.t_lo = 0.0;
  g.t_hi = 1.0;
  g.values.resize(512);
  for (std::uint32_t j = 0; j < 2; ++j)
    for (std::uint32_t i = 0; i < 256; ++i)
      g.values[static_cast<std::size_t>(j) * 256 + i] =
          std::sin(g.x_node(i));

  const double span = g.x_hi - g.x_lo;
  for (double x : {0.3, 2.9, 6.1}) {
    const double base = interpolate(g, x, 0.5);
    REQUIRE(interpolate(g, x + span, 0.5) == Catch::Approx(base).margin(1e-12));
    REQUIRE(interpolate(g, x - span, 0.5) == Catch::Approx(base).margin(1e-12));
  }

  // Past the last node the blend reaches around to the first node.
  const double x_seam = g.x_node(255) + 0.5 * span / 256.0;
  const double expect = 0.5 * (g.at(0, 255) + g.at(0, 0));
  REQUIRE(interpolate(g, x_seam, 0.0) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("interpolation polices the stored time range", "[grid]") {
  const ReferenceGrid g = sample_grid();
  REQUIRE_THROWS_AS(interpolate(g, 0.1, -0.5), config_error);
  REQUIRE_THROWS_AS(interpolate(g, 0.1, 1.5), config_error);
  // A hair outside is forgiven (floating-point node arithmetic).
  REQUIRE_NOTHROW(interpolate(g, 0.1, 1.0 + 1e-13));
  REQUIRE_NOTHROW(interpolate(g, 0.1, -1e-13));
}
