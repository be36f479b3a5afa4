#include <doctest.h>

#include <array>
#include <bit>
#include <stdexcept>

#include "cloudchamber/spinspace.hpp"

using namespace cloudchamber;

namespace {

SideAssignment symmetric_sides(std::size_t n) {
  SideAssignment s(n, Side::Right);
  for (std::size_t j = 0; j < n / 2; ++j) s[j] = Side::Left;
  return s;
}

}  // namespace

TEST_CASE("flip_partner toggles one bit") {
  CHECK(flip_partner(SpinConfig{0b0000}, 2, 4).mask == 0b0100U);
  CHECK(flip_partner(SpinConfig{0b0101}, 0, 4).mask == 0b0100U);
  CHECK_THROWS_AS(flip_partner(SpinConfig{0}, 4, 4), std::out_of_range);
}

TEST_CASE("flip_partner is an involution changing exactly one bit") {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::uint32_t m = 0; m < (1U << n); ++m) {
      for (std::size_t j = 0; j < n; ++j) {
        const SpinConfig c{m};
        const SpinConfig p = flip_partner(c, j, n);
        REQUIRE(std::popcount(p.mask ^ c.mask) == 1);
        REQUIRE(is_valid(p, n));
        REQUIRE(flip_partner(p, j, n) == c);
      }
    }
  }
}

TEST_CASE("spin_sum") {
  CHECK(spin_sum(SpinConfig{0b0000}, 4) == -4);
  CHECK(spin_sum(SpinConfig{0b1111}, 4) == 4);
  CHECK(spin_sum(SpinConfig{0b0011}, 4) == 0);
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::uint32_t m = 0; m < (1U << n); ++m) {
      const SpinConfig c{m};
      REQUIRE(spin_sum(c, n) + spin_sum(complement(c, n), n) == 0);
      REQUIRE((spin_sum(c, n) - static_cast<int>(n)) % 2 == 0);
    }
  }
}

TEST_CASE("classify examples") {
  const SideAssignment lr{Side::Left, Side::Left, Side::Right, Side::Right};
  CHECK(classify(SpinConfig{0b0000}, lr) == ConfigClass::Unchanged);
  CHECK(classify(SpinConfig{0b0100}, lr) == ConfigClass::OneSpin);
  CHECK(classify(SpinConfig{0b0011}, lr) == ConfigClass::LeftTrack);
  CHECK(classify(SpinConfig{0b1100}, lr) == ConfigClass::RightTrack);
  CHECK(classify(SpinConfig{0b0101}, lr) == ConfigClass::MultipleTracks);
}

TEST_CASE("classify partitions every configuration space") {
  for (std::size_t n = 2; n <= 12; n += 2) {
    const auto sides = symmetric_sides(n);
    std::array<std::size_t, kNumConfigClasses> counts{};
    for (std::uint32_t m = 0; m < (1U << n); ++m) ++counts[static_cast<std::size_t>(classify(SpinConfig{m}, sides))];
    std::size_t total = 0;
    for (auto c : counts) total += c;
    CHECK(total == channel_count(n));
    // Closed forms: one UC, N OS, 2^(N/2) - 1 - N/2 per track side.
    const std::size_t h = n / 2;
    CHECK(counts[0] == 1);
    CHECK(counts[1] == n);
    CHECK(counts[2] == (std::size_t{1} << h) - 1 - h);
    CHECK(counts[3] == counts[2]);
  }
}

TEST_CASE("mirror swaps track sides and fixes the other classes") {
  for (std::size_t n = 2; n <= 10; n += 2) {
    const auto sides = symmetric_sides(n);
    for (std::uint32_t m = 0; m < (1U << n); ++m) {
      const auto a = classify(SpinConfig{m}, sides);
      const auto b = classify(mirror(SpinConfig{m}, n), sides);
      if (a == ConfigClass::LeftTrack) REQUIRE(b == ConfigClass::RightTrack);
      else if (a == ConfigClass::RightTrack) REQUIRE(b == ConfigClass::LeftTrack);
      else REQUIRE(b == a);
    }
  }
}

TEST_CASE("flip_neighbors") {
  auto nb = flip_neighbors(SpinConfig{0b00}, 2);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0] == std::pair<std::size_t, SpinConfig>{0, SpinConfig{0b01}});
  CHECK(nb[1] == std::pair<std::size_t, SpinConfig>{1, SpinConfig{0b10}});
  nb = flip_neighbors(SpinConfig{0b01}, 2);
  CHECK(nb[0].second.mask == 0b00U);
  CHECK(nb[1].second.mask == 0b11U);
  for (std::uint32_t m = 0; m < 64; ++m) CHECK(flip_neighbors(SpinConfig{m}, 6).size() == 6);
}

TEST_CASE("channel_count caps the spin number") {
  CHECK(channel_count(0) == 1);
  CHECK(channel_count(12) == 4096);
  CHECK(channel_count(kMaxSpins) == (std::size_t{1} << 24));
  CHECK_THROWS_AS(channel_count(kMaxSpins + 1), std::out_of_range);
}

TEST_CASE("bit strings are detector ordered") {
  CHECK(to_bitstring(SpinConfig{0b0001}, 4) == "1000");
  CHECK(to_bitstring(SpinConfig{0b1100}, 4) == "0011");
  CHECK(!is_valid(SpinConfig{0b10000}, 4));
}
