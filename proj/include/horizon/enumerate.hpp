#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/simulator.hpp"

namespace horizon {

struct EnumerationConfig {
  std::size_t max_states = 10'000'000;
  std::size_t worker_count = 1;
  std::size_t horizon = 0;
  // Share of stored (state, action) pairs that are stepped a second time.
  double replay_fraction = 0.01;
};

struct EnumerationResult {
  TabularMdp mdp;
  // Blob of every state; the terminal sink has an empty blob.
  std::vector<Blob> blobs;
  std::optional<StateIndex> sink;
};

namespace detail {

/// Insert-once map from blob to index, sharded to keep lock contention low.
class StateRegistry {
 public:
  explicit StateRegistry(std::size_t shards) : shards_(shards) {}

  /// Returns (index, inserted). The first writer of a blob wins.
  std::pair<StateIndex, bool> intern(const Blob& blob, std::atomic<std::size_t>& counter) {
    Shard& shard = shards_[std::hash<Blob>{}(blob) % shards_.size()];
    std::lock_guard<std::mutex> lock(shard.mutex);
    auto it = shard.index.find(blob);
    if (it != shard.index.end()) return {it->second, false};
    const StateIndex id = counter.fetch_add(1);
    shard.index.emplace(blob, id);
    return {id, true};
  }

 private:
  struct Shard {
    std::mutex mutex;
    std::unordered_map<Blob, StateIndex> index;
  };
  std::vector<Shard> shards_;
};

struct ExpandedRow {
  StateIndex state;
  std::vector<StateIndex> next;
  std::vector<double> reward;
};

inline bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

}  // namespace detail

/// Breadth-first exploration of every state reachable within the horizon.
/// Expansion of each BFS level is spread over worker threads; the result is
/// relabelled in sequential first-visit order so it does not depend on the
/// worker count.
template <Simulator Sim>
EnumerationResult enumerate(const Sim& sim, const EnumerationConfig& config) {
  if (config.max_states == 0 || config.worker_count == 0) {
    throw PreconditionError("enumeration caps and worker count must be positive");
  }
  const std::size_t num_actions = sim.num_actions();
  constexpr StateIndex kSinkId = 1;
  std::atomic<std::size_t> counter{0};
  detail::StateRegistry registry(std::max<std::size_t>(64, 8 * config.worker_count));
  std::vector<Blob> blobs_by_id{sim.initial_state(), Blob()};
  registry.intern(blobs_by_id[0], counter);
  counter.store(kSinkId + 1);

  std::vector<detail::ExpandedRow> rows;
  std::vector<StateIndex> frontier{0};

  for (std::size_t depth = 0; depth < config.horizon && !frontier.empty(); ++depth) {
    const std::size_t workers = std::min(config.worker_count, frontier.size());
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> overflow{false};
    std::vector<std::vector<detail::ExpandedRow>> local_rows(workers);
    std::vector<std::vector<std::pair<StateIndex, Blob>>> local_new(workers);
    std::vector<std::exception_ptr> errors(workers);

    auto work = [&](std::size_t w) {
      try {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= frontier.size() || overflow.load()) return;
          const StateIndex id = frontier[i];
          const Blob& blob = blobs_by_id[id];
          detail::ExpandedRow row{id, std::vector<StateIndex>(num_actions),
                                  std::vector<double>(num_actions)};
          for (ActionIndex a = 0; a < num_actions; ++a) {
            StepResult res = sim.step(blob, a);
            row.reward[a] = res.reward;
            if (res.terminal) {
              row.next[a] = kSinkId;
              continue;
            }
            auto [nid, inserted] = registry.intern(res.next, counter);
            row.next[a] = nid;
            if (inserted) {
              if (nid > config.max_states) overflow.store(true);
              local_new[w].emplace_back(nid, std::move(res.next));
            }
          }
          local_rows[w].push_back(std::move(row));
        }
      } catch (...) {
        errors[w] = std::current_exception();
        overflow.store(true);
      }
    };

    if (workers <= 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::size_t discovered = 0;
    for (const auto& list : local_new) discovered += list.size();
    if (overflow.load() || counter.load() - 1 > config.max_states) {
      throw CapExceeded("enumeration exceeded " + std::to_string(config.max_states) +
                            " states at depth " + std::to_string(depth) + " (frontier of " +
                            std::to_string(discovered) + " new states)",
                        discovered);
    }
    blobs_by_id.resize(counter.load());
    std::vector<StateIndex> next_frontier;
    next_frontier.reserve(discovered);
    for (auto& list : local_new) {
      for (auto& [nid, blob] : list) {
        blobs_by_id[nid] = std::move(blob);
        next_frontier.push_back(nid);
      }
    }
    std::sort(next_frontier.begin(), next_frontier.end());
    for (auto& list : local_rows) {
      for (auto& row : list) rows.push_back(std::move(row));
    }
    frontier.swap(next_frontier);
  }

  // Raw tables indexed by registry id. Unexpanded states self-loop.
  const std::size_t raw_count = blobs_by_id.size();
  std::vector<StateIndex> raw_next(raw_count * num_actions);
  std::vector<double> raw_reward(raw_count * num_actions, 0.0);
  for (StateIndex s = 0; s < raw_count; ++s) {
    for (ActionIndex a = 0; a < num_actions; ++a) raw_next[s * num_actions + a] = s;
  }
  for (const auto& row : rows) {
    for (ActionIndex a = 0; a < num_actions; ++a) {
      raw_next[row.state * num_actions + a] = row.next[a];
      raw_reward[row.state * num_actions + a] = row.reward[a];
    }
  }

  // Replay a deterministic sample of the stored pairs.
  const std::size_t total_pairs = rows.size() * num_actions;
  if (total_pairs > 0 && config.replay_fraction > 0.0) {
    const std::size_t stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(1.0 / std::min(1.0, config.replay_fraction)));
    for (std::size_t p = 0; p < total_pairs; p += stride) {
      const auto& row = rows[p / num_actions];
      const ActionIndex a = p % num_actions;
      const StepResult again = sim.step(blobs_by_id[row.state], a);
      const bool next_matches = again.terminal ? row.next[a] == kSinkId
                                               : (row.next[a] != kSinkId &&
                                                  blobs_by_id[row.next[a]] == again.next);
      if (!next_matches || !detail::same_bits(again.reward, row.reward[a])) {
        throw NondeterminismError("simulator returned different results when state " +
                                  std::to_string(row.state) + ", action " + std::to_string(a) +
                                  " was replayed");
      }
    }
  }

  // Canonical relabelling by sequential BFS first-visit order.
  std::vector<StateIndex> relabel(raw_count, raw_count);
  std::vector<StateIndex> order{0};
  relabel[0] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const StateIndex s = order[head];
    for (ActionIndex a = 0; a < num_actions; ++a) {
      const StateIndex nxt = raw_next[s * num_actions + a];
      if (relabel[nxt] == raw_count) {
        relabel[nxt] = order.size();
        order.push_back(nxt);
      }
    }
  }
  const std::size_t count = order.size();
  std::vector<StateIndex> next(count * num_actions);
  std::vector<double> reward(count * num_actions);
  std::vector<std::uint8_t> terminal(count, 0);
  EnumerationResult out;
  out.blobs.resize(count);
  for (StateIndex i = 0; i < count; ++i) {
    const StateIndex raw = order[i];
    out.blobs[i] = raw == kSinkId ? Blob() : blobs_by_id[raw];
    if (raw == kSinkId) {
      terminal[i] = 1;
      out.sink = i;
    }
    for (ActionIndex a = 0; a < num_actions; ++a) {
      next[i * num_actions + a] = relabel[raw_next[raw * num_actions + a]];
      reward[i * num_actions + a] = raw == kSinkId ? 0.0 : raw_reward[raw * num_actions + a];
    }
  }
  out.mdp = TabularMdp(count, num_actions, config.horizon, 0, std::move(next), std::move(reward),
                       std::move(terminal));
  return out;
}

/// Observation keys of enumerated states as reported by the simulator; the
/// terminal sink gets an empty key.
template <Simulator Sim>
std::vector<Blob> observation_keys(const Sim& sim, const EnumerationResult& result) {
  std::vector<Blob> keys(result.blobs.size());
  for (StateIndex s = 0; s < keys.size(); ++s) {
    if (result.sink && *result.sink == s) continue;
    keys[s] = sim.observation_key(result.blobs[s]);
  }
  return keys;
}

}  // namespace horizon
