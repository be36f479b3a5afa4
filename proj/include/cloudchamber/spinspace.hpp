#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cloudchamber {

inline constexpr std::size_t kMaxSpins = 24;

/// One of the 2^N detector spin configurations. Bit j set means detector j
/// (in ascending position order) is up; mask 0 is the all-down ground state.
struct SpinConfig {
  std::uint32_t mask = 0;

  friend auto operator<=>(const SpinConfig&, const SpinConfig&) = default;
};

enum class Side : std::uint8_t { Left, Right };

/// Side of the origin for each detector, indexed like the mask bits.
using SideAssignment = std::vector<Side>;

enum class ConfigClass : std::uint8_t { Unchanged, OneSpin, LeftTrack, RightTrack, MultipleTracks };

inline constexpr std::size_t kNumConfigClasses = 5;

const char* to_string(ConfigClass tag);

/// 2^N, rejecting N > kMaxSpins.
std::size_t channel_count(std::size_t num_spins);

bool is_valid(SpinConfig c, std::size_t num_spins);

/// Configuration differing from `c` only at detector `j`. Throws std::out_of_range.
SpinConfig flip_partner(SpinConfig c, std::size_t j, std::size_t num_spins);

/// sigma_j in {-1, +1}.
int spin_value(SpinConfig c, std::size_t j);

/// sum_j sigma_j = 2 popcount - N.
int spin_sum(SpinConfig c, std::size_t num_spins);

int flip_count(SpinConfig c);

ConfigClass classify(SpinConfig c, const SideAssignment& sides);

std::vector<std::pair<std::size_t, SpinConfig>> flip_neighbors(SpinConfig c, std::size_t num_spins);

SpinConfig complement(SpinConfig c, std::size_t num_spins);

/// Exchanges detector j with detector N-1-j (its positional mirror in a
/// symmetric layout).
SpinConfig mirror(SpinConfig c, std::size_t num_spins);

/// Detector-ordered bit string: character k is detector k ('1' = up).
std::string to_bitstring(SpinConfig c, std::size_t num_spins);

}  // namespace cloudchamber
