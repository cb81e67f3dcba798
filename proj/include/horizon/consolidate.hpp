#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/simulator.hpp"

namespace horizon {

struct ConsolidationResult {
  TabularMdp mdp;
  // mapping[old state] = quotient state
  std::vector<StateIndex> mapping;
};

namespace detail {

template <class Key>
std::vector<StateIndex> number_blocks(const std::vector<Key>& signature) {
  std::map<Key, StateIndex> ids;
  std::vector<StateIndex> block(signature.size());
  for (std::size_t s = 0; s < signature.size(); ++s) {
    block[s] = ids.try_emplace(signature[s], ids.size()).first->second;
  }
  return block;
}

}  // namespace detail

/// Coarsest partition whose blocks agree on observation key, per-action
/// rewards and per-action successor blocks; returns the quotient MDP.
/// Blocks are numbered by their lowest member.
inline ConsolidationResult consolidate(const TabularMdp& mdp,
                                       const std::vector<Blob>& observation_keys) {
  const std::size_t n = mdp.num_states();
  const std::size_t num_actions = mdp.num_actions();
  if (observation_keys.size() != n) {
    throw PreconditionError("consolidate needs one observation key per state");
  }

  std::vector<std::string> initial(n);
  for (StateIndex s = 0; s < n; ++s) {
    std::string& key = initial[s];
    const std::uint64_t len = observation_keys[s].size();
    key.append(reinterpret_cast<const char*>(&len), sizeof len);
    key += observation_keys[s];
    for (ActionIndex a = 0; a < num_actions; ++a) {
      double r = mdp.reward(s, a);
      if (r == 0.0) r = 0.0;  // fold -0.0 into +0.0
      char bytes[sizeof r];
      std::memcpy(bytes, &r, sizeof r);
      key.append(bytes, sizeof r);
    }
  }
  std::vector<StateIndex> block = detail::number_blocks(initial);
  std::size_t block_count = *std::max_element(block.begin(), block.end()) + 1;

  for (;;) {
    std::vector<std::vector<StateIndex>> signature(n, std::vector<StateIndex>(num_actions + 1));
    for (StateIndex s = 0; s < n; ++s) {
      signature[s][0] = block[s];
      for (ActionIndex a = 0; a < num_actions; ++a) signature[s][a + 1] = block[mdp.next(s, a)];
    }
    std::vector<StateIndex> refined = detail::number_blocks(signature);
    const std::size_t refined_count = *std::max_element(refined.begin(), refined.end()) + 1;
    block.swap(refined);
    if (refined_count == block_count) break;
    block_count = refined_count;
  }

  std::vector<StateIndex> representative(block_count, n);
  std::vector<std::uint8_t> terminal(block_count, 0);
  for (StateIndex s = 0; s < n; ++s) {
    if (representative[block[s]] == n) representative[block[s]] = s;
    if (mdp.is_terminal(s)) terminal[block[s]] = 1;
  }
  std::vector<StateIndex> next(block_count * num_actions);
  std::vector<double> reward(block_count * num_actions);
  for (StateIndex b = 0; b < block_count; ++b) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      next[b * num_actions + a] = block[mdp.next(representative[b], a)];
      reward[b * num_actions + a] = mdp.reward(representative[b], a);
    }
  }
  ConsolidationResult out;
  out.mdp = TabularMdp(block_count, num_actions, mdp.horizon(), block[mdp.start_state()],
                       std::move(next), std::move(reward), std::move(terminal), mdp.discount());
  out.mapping = std::move(block);
  return out;
}

/// Pure bisimulation quotient: every state shares the same observation key.
inline ConsolidationResult consolidate(const TabularMdp& mdp) {
  return consolidate(mdp, std::vector<Blob>(mdp.num_states()));
}

}  // namespace horizon
