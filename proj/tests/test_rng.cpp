#include "test_util.hpp"

using namespace seqpinn;

TEST_CASE("rng streams are reproducible for a fixed seed", "[rng]") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("rng uniform01 stays in the half-open unit interval", "[rng]") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("rng uniform respects custom bounds", "[rng]") {
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-3.0, 5.0);
    REQUIRE(u >= -3.0);
    REQUIRE(u < 5.0);
  }
}

TEST_CASE("rng below produces values under the bound", "[rng]") {
  Rng r(99);
  for (int i = 0; i < 1000; ++i) REQUIRE(r.below(17) < 17);
}

TEST_CASE("mix_seed separates nearby inputs", "[rng]") {
  REQUIRE(mix_seed(0, 1) != mix_seed(0, 2));
  REQUIRE(mix_seed(0, 1) != mix_seed(1, 1));
  REQUIRE(mix_seed(5, 7) == mix_seed(5, 7));
  // Derived streams must not collide with the master stream.
  Rng master(42), derived(mix_seed(42, 1));
  REQUIRE(master.next_u64() != derived.next_u64());
}
