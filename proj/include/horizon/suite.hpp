#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "horizon/errors.hpp"
#include "horizon/io.hpp"
#include "horizon/learners.hpp"
#include "horizon/metrics.hpp"
#include "horizon/parallel.hpp"
#include "horizon/registry.hpp"
#include "horizon/report.hpp"

namespace horizon {

struct SuiteEntry {
  std::string env;                     // generator name or MDP file
  std::optional<std::size_t> horizon;  // overrides the environment's T
  std::string expl = "uniform";        // "uniform" or a policy file
  std::vector<std::size_t> k_range{1, 2, 3};
  std::size_t seeds = 101;
  double budget = 1e8;  // timesteps per learner run
};

struct SuiteManifest {
  std::uint64_t global_seed = 0;
  std::vector<SuiteEntry> entries;
};

inline SuiteManifest manifest_from_json(const nlohmann::json& j) {
  try {
    SuiteManifest m;
    m.global_seed = j.value("global_seed", std::uint64_t{0});
    for (const auto& e : j.at("entries")) {
      SuiteEntry entry;
      entry.env = e.at("env").get<std::string>();
      if (e.contains("horizon") && !e["horizon"].is_null()) entry.horizon = e["horizon"].get<std::size_t>();
      entry.expl = e.value("expl", entry.expl);
      if (e.contains("k_range")) {
        const auto range = e["k_range"].get<std::vector<std::size_t>>();
        if (range.size() != 2 || range[0] < 1 || range[0] > range[1]) {
          throw FormatError("k_range must be [lo, hi] with 1 <= lo <= hi");
        }
        entry.k_range.clear();
        for (std::size_t k = range[0]; k <= range[1]; ++k) entry.k_range.push_back(k);
      }
      entry.seeds = e.value("seeds", entry.seeds);
      entry.budget = e.value("budget", entry.budget);
      if (entry.seeds == 0 || entry.seeds % 2 == 0) throw FormatError("seed count must be odd");
      m.entries.push_back(std::move(entry));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

inline SuiteManifest load_manifest(const std::string& path) {
  const std::string text = detail::read_file(path);
  try {
    return manifest_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("manifest " + path + " is not valid JSON: " + e.what());
  }
}

inline Policy resolve_policy(const std::string& spec, const TabularMdp& mdp) {
  if (spec == "uniform") return Policy::uniform(mdp.num_actions());
  Policy p = load_policy(spec);
  if (!p.covers(mdp)) throw PreconditionError("policy " + spec + " does not cover the MDP");
  return p;
}

/// Empirical timesteps of each learner; nullopt when it did not converge
/// within the budget.
struct EmpiricalRow {
  std::size_t gorp_k = 0;
  std::optional<std::size_t> gorp_m;
  std::optional<double> gorp_log10;
  std::optional<double> window_log10;
  std::optional<double> rmax_log10;
};

struct SuiteRow {
  BoundReport report;
  EmpiricalRow empirical;
};

inline std::vector<std::uint64_t> seed_list(std::uint64_t global_seed, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = run_seed(global_seed, i);
  return seeds;
}

inline EmpiricalRow run_learners(const TabularMdp& mdp, const Policy& expl, const BoundReport& report,
                                 const SuiteEntry& entry, std::uint64_t global_seed) {
  EmpiricalRow row;
  const double log10_t2 = 2.0 * std::log10(static_cast<double>(mdp.horizon()));
  const double log10_a = std::log10(static_cast<double>(mdp.num_actions()));
  const double log10_budget = std::log10(entry.budget);

  row.gorp_k = report.tight_timesteps ? report.tight->k : report.min_k.value_or(1);
  const double log10_per_m = log10_t2 + static_cast<double>(row.gorp_k) * log10_a;
  if (log10_per_m <= log10_budget) {
    const auto m_cap = static_cast<std::size_t>(std::floor(std::pow(10.0, log10_budget - log10_per_m)));
    const auto seeds = seed_list(global_seed, entry.seeds);
    const EmpiricalMinM found = empirical_min_m(mdp, expl, row.gorp_k, seeds, std::max<std::size_t>(m_cap, 1));
    if (found.found) {
      row.gorp_m = found.m;
      row.gorp_log10 = found.log10_timesteps;
    }
  }

  if (static_cast<double>(report.window) * log10_a + log10_t2 <= log10_budget) {
    const RunResult r = plan_over_window(mdp, report.window);
    if (r.success) row.window_log10 = std::log10(static_cast<double>(r.timesteps));
  }

  const double sat = static_cast<double>(mdp.num_states()) * static_cast<double>(mdp.num_actions()) *
                     static_cast<double>(mdp.horizon());
  if (sat <= entry.budget) {
    const RunResult r = rmax_run(mdp);
    if (r.success) row.rmax_log10 = std::log10(static_cast<double>(r.timesteps));
  }
  return row;
}

inline std::vector<SuiteRow> run_suite(const SuiteManifest& manifest, std::size_t workers = 1,
                                       const ResolveOptions& resolve = {}) {
  std::vector<SuiteRow> rows(manifest.entries.size());
  parallel_for(manifest.entries.size(), workers, [&](std::size_t i) {
    const SuiteEntry& entry = manifest.entries[i];
    TabularMdp mdp = resolve_environment(entry.env, resolve);
    if (entry.horizon) mdp = mdp.with_horizon(*entry.horizon);
    const Policy expl = resolve_policy(entry.expl, mdp);
    ReportOptions options;
    options.tight_k = entry.k_range;
    rows[i].report = compute_bound_report(entry.env, mdp, expl, options);
    rows[i].empirical = run_learners(mdp, expl, rows[i].report, entry, manifest.global_seed);
  });
  return rows;
}

inline std::vector<std::string> suite_csv_columns() {
  auto cols = bound_csv_columns();
  for (const char* c : {"gorp_k", "gorp_m", "gorp_empirical", "window_empirical", "rmax_empirical"}) {
    cols.emplace_back(c);
  }
  return cols;
}

inline std::string suite_csv(const std::vector<SuiteRow>& rows) {
  std::string out = csv_line(suite_csv_columns()) + "\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_number(*v) : std::string();
  };
  for (const auto& r : rows) {
    auto cells = bound_csv_row(r.report);
    cells.push_back(std::to_string(r.empirical.gorp_k));
    cells.push_back(r.empirical.gorp_m ? std::to_string(*r.empirical.gorp_m) : std::string());
    cells.push_back(cell(r.empirical.gorp_log10));
    cells.push_back(cell(r.empirical.window_log10));
    cells.push_back(cell(r.empirical.rmax_log10));
    out += csv_line(cells) + "\n";
  }
  return out;
}

/// Bound columns that the comparison treats as predictions.
inline const std::vector<std::string>& prediction_columns() {
  static const std::vector<std::string> cols{"worst_case", "ucb", "covering", "epw",
                                             "thm4",       "tight", "goal"};
  return cols;
}

/// Spearman, median ratio, AUROC and accuracy of one bound column against
/// one empirical column. Metrics that are undefined on the data are null.
inline nlohmann::json compare_series(const PairedSeries& series) {
  nlohmann::json j;
  std::size_t converged = 0;
  for (const auto& p : series) converged += p.empirical ? 1 : 0;
  j["pairs"] = series.size();
  j["converged"] = converged;
  try {
    j["spearman"] = spearman(series);
  } catch (const PreconditionError&) {
    j["spearman"] = nullptr;
  }
  j["median_ratio"] = converged > 0 ? nlohmann::json(median_ratio(series)) : nlohmann::json(nullptr);
  const auto roc = auroc(series);
  j["auroc"] = roc ? nlohmann::json(*roc) : nlohmann::json(nullptr);
  j["accuracy"] = series.empty() ? nlohmann::json(nullptr)
                                 : nlohmann::json(best_threshold_accuracy(series));
  return j;
}

}  // namespace horizon
