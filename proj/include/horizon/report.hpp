#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "horizon/bounds.hpp"
#include "horizon/dp.hpp"
#include "horizon/errors.hpp"
#include "horizon/mdp.hpp"
#include "horizon/policy.hpp"
#include "horizon/tight/failure.hpp"

namespace horizon {

struct ReportOptions {
  std::vector<std::size_t> tight_k{1, 2, 3};
  TightOptions tight;
  bool include_tight = true;
  bool covering_per_timestep_union = false;
};

struct BoundReport {
  std::string env;
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::size_t horizon = 0;
  std::optional<std::size_t> min_k;
  std::size_t window = 0;
  TimestepCount worst_case;
  TimestepCount ucb;
  CoveringLength covering;
  TimestepCount epw;
  std::optional<Theorem4Result> thm4;
  std::optional<TightResult> tight;
  std::optional<TimestepCount> tight_timesteps;
  std::optional<GoalBound> goal;
  std::optional<TimestepCount> goal_timesteps;
  // Why an optional bound is absent, keyed by bound name.
  std::map<std::string, std::string> notes;
};

inline BoundReport compute_bound_report(const std::string& env, const TabularMdp& mdp,
                                        const Policy& expl, const ReportOptions& options = {}) {
  BoundReport r;
  r.env = env;
  r.num_states = mdp.num_states();
  r.num_actions = mdp.num_actions();
  r.horizon = mdp.horizon();
  r.min_k = min_k_qvi(mdp, expl);
  r.window = epw(mdp);
  r.worst_case = worst_case_bound(mdp.num_actions(), mdp.horizon());
  r.ucb = ucb_bound(mdp);
  r.covering = covering_length_bounds(mdp, expl, options.covering_per_timestep_union);
  r.epw = epw_bound(mdp, r.window);
  if (!r.min_k) {
    r.notes["thm4"] = "not k-QVI-solvable for any k <= T";
  } else if (mdp.min_reward() < 0.0) {
    r.notes["thm4"] = "negative rewards";
  } else {
    r.thm4 = theorem4_bound(mdp, expl, *r.min_k);
  }
  if (options.include_tight) {
    std::vector<std::size_t> ks;
    for (std::size_t k : options.tight_k) {
      if (k >= 1 && k <= mdp.horizon()) ks.push_back(k);
    }
    if (ks.empty()) {
      r.notes["tight"] = "no k in range";
    } else {
      r.tight = tight_effective_horizon(mdp, expl, ks, options.tight);
      if (r.tight->found) {
        r.tight_timesteps = gorp_bound(mdp.horizon(), mdp.num_actions(), r.tight->effective);
      } else {
        r.notes["tight"] = "no k converged below 10^" + std::to_string(options.tight.max_log10_m);
      }
    }
  } else {
    r.notes["tight"] = "disabled";
  }
  const GoalCheck check = check_goal_mdp(mdp);
  if (check.ok) {
    r.goal = goal_mdp_bound(mdp, expl);
    r.goal_timesteps = gorp_bound(mdp.horizon(), mdp.num_actions(), r.goal->effective);
  } else {
    r.notes["goal"] = check.failed_clause;
  }
  return r;
}

namespace detail {

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json count_json(const TimestepCount& c) {
  nlohmann::json j;
  j["log10"] = number_or_null(c.log10_value);
  j["value"] = c.value ? nlohmann::json(*c.value) : nlohmann::json(nullptr);
  return j;
}

inline std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream out;
  out.precision(10);
  out << v;
  return out.str();
}

}  // namespace detail

inline nlohmann::json to_json(const BoundReport& r) {
  using detail::count_json;
  using detail::number_or_null;
  nlohmann::json j;
  j["env"] = r.env;
  j["S"] = r.num_states;
  j["A"] = r.num_actions;
  j["T"] = r.horizon;
  j["min_k"] = r.min_k ? nlohmann::json(*r.min_k) : nlohmann::json(nullptr);
  j["worst_case"] = count_json(r.worst_case);
  j["ucb"] = count_json(r.ucb);
  auto cov = count_json(r.covering.timesteps);
  cov["L_lower"] = number_or_null(r.covering.lower);
  cov["L_upper"] = number_or_null(r.covering.upper);
  cov["mu_min_total"] = number_or_null(r.covering.min_total_occupancy);
  cov["mu_min_peak"] = number_or_null(r.covering.min_peak_occupancy);
  cov["infinite"] = r.covering.infinite;
  j["covering_length"] = cov;
  auto epw_j = count_json(r.epw);
  epw_j["W"] = r.window;
  j["epw_bound"] = epw_j;
  if (r.thm4) {
    auto t = count_json(r.thm4->timesteps);
    t["k"] = r.thm4->k;
    t["log10_m"] = r.thm4->log10_m;
    t["H"] = r.thm4->effective;
    t["worst_ratio"] = r.thm4->worst_ratio;
    j["thm4_bound"] = t;
  } else {
    j["thm4_bound"] = nullptr;
  }
  if (r.tight && r.tight_timesteps) {
    auto t = count_json(*r.tight_timesteps);
    t["k"] = r.tight->k;
    t["log10_m"] = r.tight->log10_m;
    t["H"] = r.tight->effective;
    nlohmann::json per_k = nlohmann::json::array();
    for (const auto& pk : r.tight->per_k) {
      per_k.push_back({{"k", pk.k},
                       {"converged", pk.converged},
                       {"log10_m", number_or_null(pk.log10_m)},
                       {"H", number_or_null(pk.effective)},
                       {"failure_at_m", pk.failure_at_m}});
    }
    t["per_k"] = per_k;
    j["tight_bound"] = t;
  } else {
    j["tight_bound"] = nullptr;
  }
  if (r.goal && r.goal_timesteps) {
    auto g = count_json(*r.goal_timesteps);
    g["p"] = r.goal->p;
    g["H"] = number_or_null(r.goal->effective);
    j["goal_bound"] = g;
  } else {
    j["goal_bound"] = nullptr;
  }
  j["notes"] = r.notes;
  return j;
}

/// Column names of bound CSV rows; values are log10 timesteps unless the
/// name says otherwise. Empty cells mean the bound does not apply.
inline const std::vector<std::string>& bound_csv_columns() {
  static const std::vector<std::string> cols{
      "env",          "S",           "A",          "T",           "min_k",
      "W",            "worst_case",  "ucb",        "covering",    "covering_L_lower",
      "covering_L_upper", "epw",     "thm4_k",     "thm4_H",      "thm4",
      "tight_k",      "tight_log10_m", "tight_H",  "tight",       "goal_p",
      "goal_H",       "goal"};
  return cols;
}

inline std::vector<std::string> bound_csv_row(const BoundReport& r) {
  using detail::format_number;
  const auto opt = [](bool present, double v) { return present ? format_number(v) : std::string(); };
  return {r.env,
          std::to_string(r.num_states),
          std::to_string(r.num_actions),
          std::to_string(r.horizon),
          r.min_k ? std::to_string(*r.min_k) : std::string(),
          std::to_string(r.window),
          format_number(r.worst_case.log10_value),
          format_number(r.ucb.log10_value),
          format_number(r.covering.timesteps.log10_value),
          format_number(r.covering.lower),
          format_number(r.covering.upper),
          format_number(r.epw.log10_value),
          r.thm4 ? std::to_string(r.thm4->k) : std::string(),
          opt(r.thm4.has_value(), r.thm4 ? r.thm4->effective : 0.0),
          opt(r.thm4.has_value(), r.thm4 ? r.thm4->timesteps.log10_value : 0.0),
          r.tight_timesteps ? std::to_string(r.tight->k) : std::string(),
          opt(r.tight_timesteps.has_value(), r.tight ? r.tight->log10_m : 0.0),
          opt(r.tight_timesteps.has_value(), r.tight ? r.tight->effective : 0.0),
          opt(r.tight_timesteps.has_value(),
              r.tight_timesteps ? r.tight_timesteps->log10_value : 0.0),
          opt(r.goal.has_value(), r.goal ? r.goal->p : 0.0),
          opt(r.goal.has_value(), r.goal ? r.goal->effective : 0.0),
          opt(r.goal_timesteps.has_value(), r.goal_timesteps ? r.goal_timesteps->log10_value : 0.0)};
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char ch : c) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace horizon
