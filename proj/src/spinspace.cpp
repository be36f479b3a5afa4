#include "cloudchamber/spinspace.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace cloudchamber {

const char* to_string(ConfigClass tag) {
  switch (tag) {
    case ConfigClass::Unchanged: return "UC";
    case ConfigClass::OneSpin: return "OS";
    case ConfigClass::LeftTrack: return "LRC_left";
    case ConfigClass::RightTrack: return "LRC_right";
    case ConfigClass::MultipleTracks: return "MT";
  }
  return "?";
}

std::size_t channel_count(std::size_t num_spins) {
  if (num_spins > kMaxSpins) {
    throw std::out_of_range("at most " + std::to_string(kMaxSpins) + " spins are supported, got " +
                            std::to_string(num_spins));
  }
  return std::size_t{1} << num_spins;
}

bool is_valid(SpinConfig c, std::size_t num_spins) {
  return num_spins <= kMaxSpins && (c.mask >> num_spins) == 0;
}

SpinConfig flip_partner(SpinConfig c, std::size_t j, std::size_t num_spins) {
  if (j >= num_spins) {
    throw std::out_of_range("detector index " + std::to_string(j) + " out of range for " +
                            std::to_string(num_spins) + " spins");
  }
  return SpinConfig{c.mask ^ (std::uint32_t{1} << j)};
}

int spin_value(SpinConfig c, std::size_t j) { return ((c.mask >> j) & 1U) != 0U ? 1 : -1; }

int spin_sum(SpinConfig c, std::size_t num_spins) {
  return 2 * std::popcount(c.mask) - static_cast<int>(num_spins);
}

int flip_count(SpinConfig c) { return std::popcount(c.mask); }

ConfigClass classify(SpinConfig c, const SideAssignment& sides) {
  const int flips = std::popcount(c.mask);
  if (flips == 0) return ConfigClass::Unchanged;
  if (flips == 1) return ConfigClass::OneSpin;

  bool left = false;
  bool right = false;
  for (std::size_t j = 0; j < sides.size(); ++j) {
    if (((c.mask >> j) & 1U) == 0U) continue;
    (sides[j] == Side::Left ? left : right) = true;
  }
  if (left && right) return ConfigClass::MultipleTracks;
  return left ? ConfigClass::LeftTrack : ConfigClass::RightTrack;
}

std::vector<std::pair<std::size_t, SpinConfig>> flip_neighbors(SpinConfig c, std::size_t num_spins) {
  std::vector<std::pair<std::size_t, SpinConfig>> out;
  out.reserve(num_spins);
  for (std::size_t j = 0; j < num_spins; ++j) out.emplace_back(j, flip_partner(c, j, num_spins));
  return out;
}

SpinConfig complement(SpinConfig c, std::size_t num_spins) {
  const std::uint32_t all = num_spins == 32 ? ~0U : ((std::uint32_t{1} << num_spins) - 1U);
  return SpinConfig{~c.mask & all};
}

SpinConfig mirror(SpinConfig c, std::size_t num_spins) {
  std::uint32_t out = 0;
  for (std::size_t j = 0; j < num_spins; ++j) {
    if ((c.mask >> j) & 1U) out |= std::uint32_t{1} << (num_spins - 1 - j);
  }
  return SpinConfig{out};
}

std::string to_bitstring(SpinConfig c, std::size_t num_spins) {
  std::string s(num_spins, '0');
  for (std::size_t j = 0; j < num_spins; ++j) {
    if ((c.mask >> j) & 1U) s[j] = '1';
  }
  return s;
}

}  // namespace cloudchamber
