#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <string>

#include "horizon/mdp.hpp"

namespace horizon {

using Blob = std::string;

struct StepResult {
  Blob next;
  double reward = 0.0;
  bool terminal = false;

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

/// A deterministic black-box environment addressed by opaque state blobs.
template <class S>
concept Simulator = requires(const S& sim, const Blob& blob, ActionIndex a) {
  { sim.num_actions() } -> std::convertible_to<std::size_t>;
  { sim.initial_state() } -> std::convertible_to<Blob>;
  { sim.step(blob, a) } -> std::convertible_to<StepResult>;
  { sim.observation_key(blob) } -> std::convertible_to<Blob>;
};

inline Blob encode_index(std::uint64_t v) {
  Blob out(8, '\0');
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  return out;
}

inline std::uint64_t decode_index(const Blob& blob) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[i])) << (8 * i);
  }
  return v;
}

/// Exposes an explicit MDP through the simulator interface. Entering a
/// terminal state is reported as termination.
class MdpSimulator {
 public:
  explicit MdpSimulator(const TabularMdp& mdp) : mdp_(&mdp) {}

  std::size_t num_actions() const { return mdp_->num_actions(); }
  Blob initial_state() const { return encode_index(mdp_->start_state()); }
  StepResult step(const Blob& blob, ActionIndex a) const {
    const auto s = static_cast<StateIndex>(decode_index(blob));
    const StateIndex nxt = mdp_->next(s, a);
    return {encode_index(nxt), mdp_->reward(s, a), mdp_->is_terminal(nxt)};
  }
  Blob observation_key(const Blob& blob) const { return blob; }

 private:
  const TabularMdp* mdp_;
};

}  // namespace horizon
