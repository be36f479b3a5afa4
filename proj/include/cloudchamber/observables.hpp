#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cloudchamber/assembly.hpp"
#include "cloudchamber/spinspace.hpp"
#include "cloudchamber/state.hpp"

namespace cloudchamber {

/// p[mask] = dx * sum_i |psi_mask(x_i)|^2.
struct ChannelProbabilities {
  std::vector<Real> p;
  Real t = 0.0;

  Real total() const;
};

struct ClassProbabilities {
  Real unchanged = 0.0;
  Real one_spin = 0.0;
  Real left_track = 0.0;
  Real right_track = 0.0;
  Real multiple_tracks = 0.0;
  Real total = 0.0;
  Real t = 0.0;

  /// Both track sides together.
  Real two_lrc() const { return left_track + right_track; }
  Real row_sum() const { return unchanged + one_spin + left_track + right_track + multiple_tracks; }
};

ChannelProbabilities channel_probs(const StateVector& state, Real t = 0.0);

ClassProbabilities class_probs(const ChannelProbabilities& cp, const SideAssignment& sides);

/// Re <psi, H psi> with the dx-weighted inner product.
Real energy(const StateVector& state, const DiscreteHamiltonian& h);

/// Per-step scalar diagnostics.
struct StepSample {
  std::size_t step = 0;
  Real t = 0.0;
  Real norm2 = 0.0;
  Real energy = 0.0;
  ClassProbabilities classes;
};

/// First recorded time with UC < 1 - drop, or nullopt if UC never drops.
/// `drop` must lie in (0, 1).
std::optional<Real> arrival_time(std::span<const StepSample> series, Real drop);

}  // namespace cloudchamber
