#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "horizon/horizon.hpp"
#include "horizon/registry.hpp"
#include "horizon/report.hpp"
#include "horizon/suite.hpp"

namespace {

using namespace horizon;

constexpr int kExitBadFlags = 2;
constexpr int kExitDataError = 3;
constexpr int kExitCapExceeded = 4;

std::vector<std::size_t> parse_k_range(const std::string& text) {
  std::size_t lo = 0;
  std::size_t hi = 0;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      lo = hi = std::stoul(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      lo = std::stoul(text.substr(0, dots), &used);
      if (used != dots) throw std::invalid_argument(text);
      const std::string tail = text.substr(dots + 2);
      hi = std::stoul(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--k", "expected K or LO..HI, got '" + text + "'");
  }
  if (lo < 1 || hi < lo) throw CLI::ValidationError("--k", "need 1 <= LO <= HI");
  std::vector<std::size_t> ks;
  for (std::size_t k = lo; k <= hi; ++k) ks.push_back(k);
  return ks;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    detail::write_file(path, text);
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (!cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("CSV file " + path + " is empty");
  return rows;
}

// env -> column -> cell
using CsvTable = std::map<std::string, std::map<std::string, std::string>>;

CsvTable index_by_env(const std::vector<std::vector<std::string>>& rows, const std::string& path) {
  const auto& header = rows.front();
  const auto env_col = std::find(header.begin(), header.end(), "env");
  if (env_col == header.end()) throw FormatError("CSV file " + path + " has no env column");
  const auto env_idx = static_cast<std::size_t>(env_col - header.begin());
  CsvTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw FormatError("CSV file " + path + " row " + std::to_string(r + 1) + " has " +
                        std::to_string(rows[r].size()) + " cells, header has " +
                        std::to_string(header.size()));
    }
    auto& entry = table[rows[r][env_idx]];
    for (std::size_t c = 0; c < header.size(); ++c) entry[header[c]] = rows[r][c];
  }
  return table;
}

double parse_cell(const std::string& cell, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::logic_error&) {
    throw FormatError("cannot parse " + what + " value '" + cell + "'");
  }
}

std::string csv_number(double v) { return detail::format_number(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-complexity bounds and learners for deterministic tabular MDPs"};
  app.require_subcommand(1);
  std::size_t workers = default_worker_count();
  app.add_option("--workers", workers, "Worker threads (default: HORIZON_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  // enumerate
  auto* enumerate_cmd = app.add_subcommand("enumerate", "Build a tabular MDP from a named environment");
  std::string env_name;
  std::size_t env_horizon = 0;
  std::size_t max_states = 10'000'000;
  std::string out_path;
  bool raw = false;
  bool as_json = false;
  enumerate_cmd->add_option("--env", env_name, "Environment name")->required();
  enumerate_cmd->add_option("--horizon", env_horizon, "Horizon T (0 keeps the environment's own)");
  enumerate_cmd->add_option("--max-states", max_states, "State cap")->check(CLI::PositiveNumber);
  enumerate_cmd->add_option("--out", out_path, "Output MDP file")->required();
  enumerate_cmd->add_flag("--raw", raw, "Skip consolidation of gridworld enumerations");
  enumerate_cmd->add_flag("--json", as_json, "Write the JSON mirror instead of the binary format");

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Compute every bound for one MDP");
  std::string mdp_spec;
  std::string expl_spec = "uniform";
  std::string k_text = "1..3";
  bool no_tight = false;
  bool covering_union = false;
  std::string report_out;
  bool report_csv = false;
  bounds_cmd->add_option("--mdp", mdp_spec, "Environment name or MDP file")->required();
  bounds_cmd->add_option("--expl", expl_spec, "Exploration policy: uniform or a policy file");
  bounds_cmd->add_option("--k", k_text, "Lookahead range for the tight bound, K or LO..HI");
  bounds_cmd->add_flag("--no-tight", no_tight, "Skip the tight effective-horizon search");
  bounds_cmd->add_flag("--covering-union-over-t", covering_union,
                       "Use ln(2SAT) instead of ln(2SA) in the covering-length bound");
  bounds_cmd->add_option("--out", report_out, "Output file (default stdout)");
  bounds_cmd->add_flag("--csv", report_csv, "Emit a CSV row instead of JSON");

  // bound tight
  auto* bound_cmd = app.add_subcommand("bound", "Compute a single bound");
  bound_cmd->require_subcommand(1);
  auto* tight_cmd = bound_cmd->add_subcommand("tight", "Tight effective horizon");
  std::size_t partition = 100;
  tight_cmd->add_option("--mdp", mdp_spec, "Environment name or MDP file")->required();
  tight_cmd->add_option("--expl", expl_spec, "Exploration policy: uniform or a policy file");
  tight_cmd->add_option("--k", k_text, "Lookahead range, K or LO..HI");
  tight_cmd->add_option("--partition", partition, "Riemann partition count")->check(CLI::PositiveNumber);
  tight_cmd->add_option("--out", report_out, "Output file (default stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a learner over seeds; CSV rows on stdout");
  std::string algorithm;
  std::size_t k = 1;
  std::size_t m = 1;
  std::size_t seed_count = 101;
  std::uint64_t global_seed = 0;
  std::size_t window = 0;
  bool random_ties = false;
  run_cmd->add_option("algorithm", algorithm, "gorp | pg-gorp | fqi-gorp | window | rmax")
      ->required()
      ->check(CLI::IsMember({"gorp", "pg-gorp", "fqi-gorp", "window", "rmax"}));
  run_cmd->add_option("--mdp", mdp_spec, "Environment name or MDP file")->required();
  run_cmd->add_option("--expl", expl_spec, "Exploration policy: uniform or a policy file");
  run_cmd->add_option("--k", k, "Lookahead depth")->check(CLI::PositiveNumber);
  run_cmd->add_option("--m", m, "Rollouts per sequence")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seeds", seed_count, "Number of seeds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--global-seed", global_seed, "Seed of the whole batch");
  run_cmd->add_option("--window", window, "Planning window (default: the MDP's EPW)");
  run_cmd->add_flag("--random-ties", random_ties, "Break argmax ties uniformly at random");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Metrics of bound columns against empirical results");
  std::string bounds_csv_path;
  std::string empirical_csv_path;
  std::string empirical_column = "gorp_empirical";
  std::string metrics_out;
  compare_cmd->add_option("--bounds", bounds_csv_path, "CSV with env and bound columns")->required();
  compare_cmd->add_option("--empirical", empirical_csv_path, "CSV with env and an empirical column")
      ->required();
  compare_cmd->add_option("--column", empirical_column, "Empirical column to compare against");
  compare_cmd->add_option("--out", metrics_out, "Output JSON (default stdout)");

  // suite
  auto* suite_cmd = app.add_subcommand("suite", "Bounds and learners for every manifest entry");
  std::string manifest_path;
  std::string suite_out;
  std::string suite_metrics;
  suite_cmd->add_option("--manifest", manifest_path, "Suite manifest (JSON)")->required();
  suite_cmd->add_option("--out", suite_out, "Output CSV (default stdout)");
  suite_cmd->add_option("--metrics-out", suite_metrics, "Also write metrics JSON against gorp_empirical");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadFlags;
  }

  ResolveOptions resolve;
  resolve.workers = workers;

  try {
    if (*enumerate_cmd) {
      resolve.max_states = max_states;
      TabularMdp mdp = [&] {
        static const std::regex grid(R"(^empty_(\d+)x\1(?:_T(\d+))?$)");
        std::smatch match;
        if (raw && std::regex_match(env_name, match, grid)) {
          const std::size_t horizon =
              env_horizon ? env_horizon : (match[2].matched ? std::stoul(match[2]) : 100);
          const GridSimulator sim = make_empty_grid(std::stoi(match[1]), horizon);
          EnumerationConfig config;
          config.horizon = horizon;
          config.max_states = max_states;
          config.worker_count = workers;
          return enumerate(sim, config).mdp;
        }
        std::string name = env_name;
        if (env_horizon && std::regex_match(env_name, match, grid)) {
          name = "empty_" + std::string(match[1]) + "x" + std::string(match[1]) + "_T" +
                 std::to_string(env_horizon);
        }
        return resolve_environment(name, resolve);
      }();
      if (env_horizon) mdp = mdp.with_horizon(env_horizon);
      if (as_json) {
        save_mdp_json(mdp, out_path);
      } else {
        save_mdp(mdp, out_path);
      }
      nlohmann::json summary{{"env", env_name},
                             {"S", mdp.num_states()},
                             {"A", mdp.num_actions()},
                             {"T", mdp.horizon()},
                             {"out", out_path}};
      std::cout << summary.dump() << "\n";
      return 0;
    }

    if (*bounds_cmd) {
      const TabularMdp mdp = resolve_environment(mdp_spec, resolve);
      const Policy expl = resolve_policy(expl_spec, mdp);
      ReportOptions options;
      options.tight_k = parse_k_range(k_text);
      options.include_tight = !no_tight;
      options.covering_per_timestep_union = covering_union;
      options.tight.workers = workers;
      const BoundReport report = compute_bound_report(mdp_spec, mdp, expl, options);
      if (report_csv) {
        write_output(report_out,
                     csv_line(bound_csv_columns()) + "\n" + csv_line(bound_csv_row(report)) + "\n");
      } else {
        write_output(report_out, to_json(report).dump(2) + "\n");
      }
      return 0;
    }

    if (*tight_cmd) {
      const TabularMdp mdp = resolve_environment(mdp_spec, resolve);
      const Policy expl = resolve_policy(expl_spec, mdp);
      TightOptions options;
      options.partition = partition;
      options.workers = workers;
      const TightResult r = tight_effective_horizon(mdp, expl, parse_k_range(k_text), options);
      nlohmann::json j;
      j["env"] = mdp_spec;
      j["found"] = r.found;
      j["k"] = r.found ? nlohmann::json(r.k) : nlohmann::json(nullptr);
      j["log10_m"] = detail::number_or_null(r.log10_m);
      j["H"] = detail::number_or_null(r.effective);
      j["log10_timesteps"] = detail::number_or_null(r.log10_timesteps);
      j["per_k"] = nlohmann::json::array();
      for (const auto& pk : r.per_k) {
        j["per_k"].push_back({{"k", pk.k},
                              {"converged", pk.converged},
                              {"log10_m", detail::number_or_null(pk.log10_m)},
                              {"H", detail::number_or_null(pk.effective)},
                              {"failure_at_m", pk.failure_at_m},
                              {"evaluations", pk.evaluations}});
      }
      write_output(report_out, j.dump(2) + "\n");
      return 0;
    }

    if (*run_cmd) {
      const TabularMdp mdp = resolve_environment(mdp_spec, resolve);
      const Policy expl = resolve_policy(expl_spec, mdp);
      LearnerOptions options;
      options.ties = random_ties ? TieBreak::seeded_random : TieBreak::lowest_index;
      const auto seeds = seed_list(global_seed, seed_count);
      std::vector<RunResult> results(seeds.size());
      const std::size_t w = window ? window : epw(mdp);
      parallel_for(seeds.size(), workers, [&](std::size_t i) {
        if (algorithm == "gorp") {
          results[i] = gorp_run(mdp, expl, k, m, seeds[i], options);
        } else if (algorithm == "pg-gorp") {
          results[i] = pg_gorp_run(mdp, expl, m, seeds[i], options);
        } else if (algorithm == "fqi-gorp") {
          results[i] = fqi_gorp_run(mdp, expl, k, m, seeds[i], options);
        } else if (algorithm == "window") {
          results[i] = plan_over_window(mdp, w, options);
          results[i].seed = seeds[i];
        } else {
          results[i] = rmax_run(mdp);
          results[i].seed = seeds[i];
        }
      });
      std::cout << "seed,success,timesteps,return\n";
      for (const auto& r : results) {
        std::cout << r.seed << ',' << (r.success ? 1 : 0) << ',' << r.timesteps << ','
                  << csv_number(r.achieved_return) << "\n";
      }
      return 0;
    }

    if (*compare_cmd) {
      const CsvTable bounds = index_by_env(read_csv(bounds_csv_path), bounds_csv_path);
      const CsvTable empirical = index_by_env(read_csv(empirical_csv_path), empirical_csv_path);
      nlohmann::json out;
      out["empirical_column"] = empirical_column;
      for (const std::string& column : prediction_columns()) {
        PairedSeries series;
        bool present = false;
        for (const auto& [env, cells] : bounds) {
          const auto b = cells.find(column);
          if (b == cells.end()) continue;
          present = true;
          if (b->second.empty()) continue;
          const auto e_row = empirical.find(env);
          if (e_row == empirical.end()) continue;
          const auto e = e_row->second.find(empirical_column);
          if (e == e_row->second.end()) {
            throw FormatError("empirical CSV has no column " + empirical_column);
          }
          PairedPoint p;
          p.bound = parse_cell(b->second, column);
          if (!e->second.empty()) p.empirical = parse_cell(e->second, empirical_column);
          series.push_back(p);
        }
        if (present) out["metrics"][column] = compare_series(series);
      }
      write_output(metrics_out, out.dump(2) + "\n");
      return 0;
    }

    if (*suite_cmd) {
      const SuiteManifest manifest = load_manifest(manifest_path);
      const auto rows = run_suite(manifest, workers, resolve);
      write_output(suite_out, suite_csv(rows));
      if (!suite_metrics.empty()) {
        nlohmann::json out;
        out["empirical_column"] = "gorp_empirical";
        for (const std::string& column : prediction_columns()) {
          PairedSeries series;
          for (const auto& r : rows) {
            const auto cells = bound_csv_row(r.report);
            const auto& names = bound_csv_columns();
            const auto idx = static_cast<std::size_t>(
                std::find(names.begin(), names.end(), column) - names.begin());
            if (cells[idx].empty()) continue;
            PairedPoint p;
            p.bound = parse_cell(cells[idx], column);
            p.empirical = r.empirical.gorp_log10;
            series.push_back(p);
          }
          out["metrics"][column] = compare_series(series);
        }
        detail::write_file(suite_metrics, out.dump(2) + "\n");
      }
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFlags;
  } catch (const CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << " (observed " << e.observed() << ")\n";
    return kExitCapExceeded;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return 0;
}
