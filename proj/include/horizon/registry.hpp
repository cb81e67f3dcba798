#pragma once

#include <charconv>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "horizon/consolidate.hpp"
#include "horizon/enumerate.hpp"
#include "horizon/envgen.hpp"
#include "horizon/errors.hpp"
#include "horizon/gridworld.hpp"
#include "horizon/io.hpp"

namespace horizon {

/// Environments every suite run covers.
inline const std::vector<std::string>& builtin_environment_names() {
  static const std::vector<std::string> names{
      "needle_chain_T8_A2", "dense_chain_T10_A2", "delayed_chain_T10_A2", "adversarial_T4_A2",
      "periodic_T12_H3_A2", "distractor_T8_A2",   "empty_5x5"};
  return names;
}

struct ResolveOptions {
  std::size_t max_states = 10'000'000;
  std::size_t workers = 1;
};

namespace detail {

inline std::size_t parse_count(const std::string& text, const std::string& name) {
  std::size_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw LookupError("unknown environment: " + name);
  }
  return v;
}

inline TabularMdp enumerate_grid(int n, std::size_t horizon, const ResolveOptions& options) {
  const GridSimulator sim = make_empty_grid(n, horizon);
  EnumerationConfig config;
  config.horizon = horizon;
  config.max_states = options.max_states;
  config.worker_count = options.workers;
  const EnumerationResult result = enumerate(sim, config);
  return consolidate(result.mdp, observation_keys(sim, result)).mdp;
}

}  // namespace detail

/// Resolves `<family>_T<T>[_A<A>][_H<H>]`, `random_tree_T<T>_A<A>_seed<n>`,
/// `empty_<n>x<n>[_T<T>]`, or a path to an MDP file.
inline TabularMdp resolve_environment(const std::string& name, const ResolveOptions& options = {}) {
  static const std::regex chain(
      R"(^(needle_chain|dense_chain|delayed_chain|adversarial|periodic|distractor)_T(\d+)((?:_[AH]\d+)*)$)");
  static const std::regex tree(R"(^random_tree_T(\d+)_A(\d+)_seed(\d+)$)");
  static const std::regex grid(R"(^empty_(\d+)x(\d+)(?:_T(\d+))?$)");
  static const std::regex suffix(R"(_([AH])(\d+))");
  std::smatch match;
  GeneratorOptions gen;
  gen.max_states = options.max_states;
  if (std::regex_match(name, match, chain)) {
    const std::string family = match[1];
    const std::size_t horizon = detail::parse_count(match[2], name);
    std::optional<std::size_t> actions, period;
    const std::string rest = match[3];
    for (auto it = std::sregex_iterator(rest.begin(), rest.end(), suffix);
         it != std::sregex_iterator(); ++it) {
      auto& slot = (*it)[1] == "A" ? actions : period;
      if (slot) throw LookupError("unknown environment: " + name);
      slot = detail::parse_count((*it)[2], name);
    }
    const std::size_t a = actions.value_or(2);
    if (family == "periodic") {
      if (!period) throw LookupError("periodic environment needs _H<H>: " + name);
      return make_lowerbound_periodic(horizon, a, *period, 0, gen);
    }
    if (period) throw LookupError("unknown environment: " + name);
    if (family == "needle_chain") return make_needle_chain(horizon, a, gen);
    if (family == "dense_chain") return make_dense_chain(horizon, a, gen);
    if (family == "delayed_chain") return make_delayed_chain(horizon, a, gen);
    if (family == "adversarial") return make_adversarial_kT(horizon, a, gen);
    return make_distractor(horizon, a, gen);
  }
  if (std::regex_match(name, match, tree)) {
    return make_random_tree(detail::parse_count(match[1], name), detail::parse_count(match[2], name),
                            detail::parse_count(match[3], name), options.max_states);
  }
  if (std::regex_match(name, match, grid)) {
    const std::size_t n = detail::parse_count(match[1], name);
    if (n != detail::parse_count(match[2], name) || n < 3 || n > 250) {
      throw LookupError("unknown environment: " + name);
    }
    const std::size_t horizon = match[3].matched ? detail::parse_count(match[3], name) : 100;
    return detail::enumerate_grid(static_cast<int>(n), horizon, options);
  }
  if (std::ifstream(name).good()) return load_mdp(name);
  throw LookupError("unknown environment: " + name);
}

}  // namespace horizon
