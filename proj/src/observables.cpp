#include "cloudchamber/observables.hpp"

#include <numeric>
#include <stdexcept>

namespace cloudchamber {

Real ChannelProbabilities::total() const { return std::accumulate(p.begin(), p.end(), 0.0); }

ChannelProbabilities channel_probs(const StateVector& state, Real t) {
  ChannelProbabilities cp;
  cp.t = t;
  cp.p.resize(state.channels);
  for (std::size_t m = 0; m < state.channels; ++m) cp.p[m] = state.dx * state.channel(m).squaredNorm();
  return cp;
}

ClassProbabilities class_probs(const ChannelProbabilities& cp, const SideAssignment& sides) {
  if (cp.p.size() != channel_count(sides.size())) {
    throw std::invalid_argument("class_probs: " + std::to_string(cp.p.size()) +
                                " channels do not match " + std::to_string(sides.size()) + " detectors");
  }
  ClassProbabilities out;
  out.t = cp.t;
  for (std::size_t m = 0; m < cp.p.size(); ++m) {
    const Real p = cp.p[m];
    switch (classify(SpinConfig{static_cast<std::uint32_t>(m)}, sides)) {
      case ConfigClass::Unchanged: out.unchanged += p; break;
      case ConfigClass::OneSpin: out.one_spin += p; break;
      case ConfigClass::LeftTrack: out.left_track += p; break;
      case ConfigClass::RightTrack: out.right_track += p; break;
      case ConfigClass::MultipleTracks: out.multiple_tracks += p; break;
    }
    out.total += p;
  }
  return out;
}

Real energy(const StateVector& state, const DiscreteHamiltonian& h) {
  Eigen::VectorXcd hv;
  h.apply(state.values, hv);
  return inner_product(state.values, hv, state.dx).real();
}

std::optional<Real> arrival_time(std::span<const StepSample> series, Real drop) {
  if (!(drop > 0.0 && drop < 1.0)) throw std::invalid_argument("arrival_time: drop must lie in (0, 1)");
  if (series.empty()) throw std::invalid_argument("arrival_time: empty series");
  for (const auto& s : series) {
    if (s.classes.unchanged < 1.0 - drop) return s.t;
  }
  return std::nullopt;
}

}  // namespace cloudchamber
