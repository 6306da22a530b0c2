#include <doctest.h>

#include <charconv>
#include <random>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

using namespace qguard;

TEST_CASE("fnv1a64 is stable and order-sensitive") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") != fnv1a64("b"));
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
  CHECK(fnv1a64("abc") == fnv1a64("abc"));
}

TEST_CASE("to_hex64 is fixed width") {
  CHECK(to_hex64(0) == "0000000000000000");
  CHECK(to_hex64(0xdeadbeefULL) == "00000000deadbeef");
}

TEST_CASE("base64 round-trips random blobs") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint8_t> blob(static_cast<std::size_t>(len(rng)));
    for (auto& b : blob) b = static_cast<std::uint8_t>(byte(rng));
    auto encoded = base64_encode(blob);
    CHECK(base64_decode(encoded) == blob);
  }
}

TEST_CASE("base64 rejects garbage") {
  CHECK_THROWS_AS(base64_decode("a!b"), Error);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int trial = 0; trial < 1000; ++trial) {
    double x = dist(rng);
    auto s = format_double(x);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(ec == std::errc());
    CHECK(back == x);
  }
  CHECK(format_double(0.15) == "0.15");
}

TEST_CASE("hash_uniform is deterministic and in range") {
  for (int i = 0; i < 500; ++i) {
    double u = hash_uniform("q" + std::to_string(i), "body", 42);
    CHECK(u >= -1.0);
    CHECK(u <= 1.0);
    CHECK(u == hash_uniform("q" + std::to_string(i), "body", 42));
  }
  CHECK(hash_uniform("a", "b", 1) != hash_uniform("a", "b", 2));
}
