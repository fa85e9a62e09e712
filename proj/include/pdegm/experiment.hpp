/* Experiment runner: builds a model problem from a flat configuration, runs
 * the primal-dual iteration from u0 = 1, p0 = 0 with sigma0 = 1/L and
 * tau0 = 0.99/L, and writes one CSV convergence log per replicate plus an
 * averaged log when several replicates are requested.  Presets bundle the
 * standard benchmark setups: acceleration on/off comparison, mesh sweep, and
 * Moreau-Yosida parameter sweep for each of the three problems.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pdegm/csv.hpp"
#include "pdegm/engine.hpp"
#include "pdegm/problems.hpp"

namespace pdegm {

/// mu just below the strong-convexity constant of G: full acceleration.
inline constexpr double full_acceleration_mu = 1.0 - 1e-16;

struct ExperimentConfig {
  ProblemFamily family = ProblemFamily::l1;
  int n = 1000;
  double gamma = 1e-12;
  double mu = 0.0;
  double alpha = 1e-2;       // l1 and state data-term weight
  double noise_r = 0.3;      // l1 impulsive corruption probability
  double noise_delta = 0.1;  // l1 impulsive noise level
  int n_bins = 11;           // linf quantization bins
  double delta = 0.0;        // linf bound; 0 derives step/2 from quantization
  double cbound = 0.68;      // state constraint
  long iters = 1000;
  long accel_iters = -1;     // -1: accelerate for the whole run
  std::uint64_t seed = 12345;
  int replicates = 1;
  std::string out_dir = "results";
  std::string label;         // file-name stem; defaults to the family name
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.n < 2) throw std::invalid_argument("config: n must be at least 2");
  if (cfg.iters < 1) throw std::invalid_argument("config: iters must be at least 1");
  if (cfg.replicates < 1) throw std::invalid_argument("config: replicates must be at least 1");
  if (!(cfg.gamma >= 0.0)) throw std::invalid_argument("config: gamma must be nonnegative");
  if (!(cfg.mu >= 0.0 && cfg.mu < 1.0)) {
    throw std::invalid_argument("config: mu must be in [0, 1) (G is 1-strongly convex)");
  }
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
  if (cfg.family == ProblemFamily::linf && cfg.n_bins < 2 && cfg.delta <= 0.0) {
    throw std::invalid_argument("config: linf needs nbins >= 2 or an explicit delta");
  }
}

/// Synthetic data and problem wiring for one replicate.  Replicates share the
/// base seed and draw from split substreams, so they are independent but
/// individually reproducible.
inline ProblemSpec build_problem(const ExperimentConfig& cfg, int replicate) {
  const Mesh1D mesh = build_mesh(cfg.n);
  ProblemParams params;
  params.alpha = cfg.alpha;
  params.gamma = cfg.gamma;
  params.delta = cfg.delta;
  params.cbound = cfg.cbound;
  NoiseConfig noise;
  noise.seed = cfg.seed;
  noise.replicate = static_cast<std::uint64_t>(replicate);
  switch (cfg.family) {
    case ProblemFamily::l1:
      noise.kind = NoiseConfig::Kind::impulsive;
      noise.r = cfg.noise_r;
      noise.delta = cfg.noise_delta;
      break;
    case ProblemFamily::linf:
      noise.kind = NoiseConfig::Kind::quantize;
      noise.n_bins = cfg.n_bins;
      break;
    case ProblemFamily::state:
      noise.kind = NoiseConfig::Kind::none;
      break;
  }
  return make_problem(cfg.family, mesh, params, noise);
}

struct RunArtifact {
  int replicate = 0;
  std::string csv_path;
  std::vector<IterateRecord> records;
  ElementField u_final;
  NodalField p_final;
  double j_initial = 0.0;
  double delta_used = 0.0;
  StepSizeInit step_init;
};

struct ExperimentOutput {
  std::vector<RunArtifact> runs;
  std::string average_csv;  // empty unless replicates > 1
};

namespace detail {

inline std::string run_stem(const ExperimentConfig& cfg) {
  const std::string label = cfg.label.empty() ? to_string(cfg.family) : cfg.label;
  return label + "_n" + std::to_string(cfg.n) + "_g" + format_double(cfg.gamma) + "_mu" +
         format_double(cfg.mu);
}

inline std::vector<std::pair<std::string, std::string>> config_metadata(
    const ExperimentConfig& cfg, const RunArtifact& artifact) {
  std::vector<std::pair<std::string, std::string>> m;
  m.emplace_back("problem", to_string(cfg.family));
  m.emplace_back("n", std::to_string(cfg.n));
  m.emplace_back("gamma", format_double(cfg.gamma));
  m.emplace_back("mu", format_double(cfg.mu));
  if (cfg.family != ProblemFamily::linf) m.emplace_back("alpha", format_double(cfg.alpha));
  if (cfg.family == ProblemFamily::l1) {
    m.emplace_back("noise_r", format_double(cfg.noise_r));
    m.emplace_back("noise_delta", format_double(cfg.noise_delta));
  }
  if (cfg.family == ProblemFamily::linf) {
    m.emplace_back("nbins", std::to_string(cfg.n_bins));
    m.emplace_back("delta", format_double(artifact.delta_used));
  }
  if (cfg.family == ProblemFamily::state) m.emplace_back("cbound", format_double(cfg.cbound));
  m.emplace_back("iters", std::to_string(cfg.iters));
  m.emplace_back("accel_iters",
                 std::to_string(cfg.accel_iters < 0 ? cfg.iters : cfg.accel_iters));
  m.emplace_back("seed", std::to_string(cfg.seed));
  m.emplace_back("replicate", std::to_string(artifact.replicate));
  m.emplace_back("rng", RandomStream::generator_name());
  m.emplace_back("normal_method", RandomStream::normal_method());
  m.emplace_back("u0", "1");
  m.emplace_back("p0", "0");
  m.emplace_back("l_estimate", format_double(artifact.step_init.l_estimate));
  m.emplace_back("sigma0", format_double(artifact.step_init.sigma0));
  m.emplace_back("tau0", format_double(artifact.step_init.tau0));
  m.emplace_back("j_initial", format_double(artifact.j_initial));
  return m;
}

}  // namespace detail

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"iter",  "J_gamma",       "tau",
                                                "sigma", "omega",         "primal_change",
                                                "feasibility", "wall_time_ms"};
  return cols;
}

/// Runs one replicate in memory without touching the filesystem.
inline RunArtifact run_replicate(const ExperimentConfig& cfg, int replicate) {
  const ProblemSpec prob = build_problem(cfg, replicate);
  const auto n = static_cast<std::size_t>(cfg.n);
  const ElementField u0 = ElementField::constant(n, 1.0);
  const NodalField p0(n + 1, 0.0);
  RunArtifact artifact;
  artifact.replicate = replicate;
  artifact.delta_used = prob.delta;
  artifact.step_init = lipschitz_estimate(prob, u0);
  const long budget = cfg.accel_iters < 0 ? cfg.iters : cfg.accel_iters;
  const auto sched = make_schedule(artifact.step_init.tau0, artifact.step_init.sigma0, cfg.mu,
                                   AccelMode::accel_g, budget);
  RunResult result = run(prob, sched, u0, p0, cfg.iters);
  artifact.records = std::move(result.records);
  artifact.u_final = std::move(result.u);
  artifact.p_final = std::move(result.p);
  artifact.j_initial = result.j_initial;
  return artifact;
}

/// Runs every replicate, writes one CSV per run plus the averaged J_gamma
/// curve when replicates > 1, and returns the in-memory artifacts.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string stem = (std::filesystem::path(cfg.out_dir) / detail::run_stem(cfg)).string();

  ExperimentOutput out;
  for (int rep = 0; rep < cfg.replicates; ++rep) {
    RunArtifact artifact = run_replicate(cfg, rep);
    CsvFile csv;
    csv.metadata = detail::config_metadata(cfg, artifact);
    csv.columns = csv_columns();
    csv.rows.reserve(artifact.records.size());
    for (const auto& r : artifact.records) {
      csv.rows.push_back({static_cast<double>(r.iter), r.j_gamma, r.tau, r.sigma, r.omega,
                          r.primal_change, r.feasibility, r.wall_time_ms});
    }
    artifact.csv_path = stem + "_rep" + std::to_string(rep) + ".csv";
    write_csv(artifact.csv_path, csv);
    out.runs.push_back(std::move(artifact));
  }

  if (cfg.replicates > 1) {
    CsvFile avg;
    avg.metadata = detail::config_metadata(cfg, out.runs.front());
    double j0_mean = 0.0;
    for (const auto& run_artifact : out.runs) j0_mean += run_artifact.j_initial;
    j0_mean /= cfg.replicates;
    for (auto& [key, value] : avg.metadata) {
      if (key == "j_initial") value = format_double(j0_mean);
      if (key == "replicate") value = "averaged";
    }
    avg.metadata.emplace_back("replicates", std::to_string(cfg.replicates));
    avg.metadata.emplace_back("averaged", "J_gamma arithmetic mean per iteration");
    avg.columns = {"iter", "J_gamma"};
    for (long k = 0; k < cfg.iters; ++k) {
      double mean = 0.0;
      for (const auto& run_artifact : out.runs) mean += run_artifact.records[k].j_gamma;
      mean /= cfg.replicates;
      avg.rows.push_back({static_cast<double>(k + 1), mean});
    }
    out.average_csv = stem + "_avg.csv";
    write_csv(out.average_csv, avg);
  }
  return out;
}

/// First iteration whose remaining decrease is at most 1% of the run's total
/// decrease from the initial objective: J_k <= J_N + 0.01 (J_0 - J_N).
/// Values below the final count as reached, so transient dips qualify.
inline long iterations_to_one_percent(double j_initial, const std::vector<double>& j_values) {
  if (j_values.empty()) return 0;
  const double final_j = j_values.back();
  const double target = final_j + 0.01 * std::max(j_initial - final_j, 0.0);
  for (std::size_t k = 0; k < j_values.size(); ++k) {
    if (j_values[k] <= target) return static_cast<long>(k) + 1;
  }
  return static_cast<long>(j_values.size());
}

inline long iterations_to_one_percent(const std::vector<double>& j_values) {
  return iterations_to_one_percent(j_values.empty() ? 0.0 : j_values.front(), j_values);
}

struct SummaryRow {
  std::string path;
  double final_j = 0.0;
  long iters_to_one_percent = 0;
  double final_feasibility = 0.0;
  double total_wall_ms = 0.0;
};

/// Per-run summary of a set of convergence CSVs, sorted by how quickly each
/// run settled.
inline std::vector<SummaryRow> summarize(const std::vector<std::string>& paths) {
  std::vector<SummaryRow> rows;
  for (const auto& path : paths) {
    const CsvFile csv = read_csv(path);
    const auto column = [&](const std::string& name) -> long {
      for (std::size_t c = 0; c < csv.columns.size(); ++c) {
        if (csv.columns[c] == name) return static_cast<long>(c);
      }
      return -1;
    };
    const long j_col = column("J_gamma");
    if (j_col < 0) throw std::runtime_error(path + ": no J_gamma column");
    if (csv.rows.empty()) throw std::runtime_error(path + ": no data rows");
    std::vector<double> j_values;
    j_values.reserve(csv.rows.size());
    for (const auto& row : csv.rows) j_values.push_back(row[j_col]);
    const std::string j0_meta = metadata_value(csv, "j_initial");
    const double j_initial =
        j0_meta.empty() ? j_values.front() : detail::parse_double(j0_meta, path, 0);

    SummaryRow s;
    s.path = path;
    s.final_j = j_values.back();
    s.iters_to_one_percent = iterations_to_one_percent(j_initial, j_values);
    const long feas_col = column("feasibility");
    if (feas_col >= 0) s.final_feasibility = csv.rows.back()[feas_col];
    const long wall_col = column("wall_time_ms");
    if (wall_col >= 0) s.total_wall_ms = csv.rows.back()[wall_col];
    rows.push_back(std::move(s));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return a.iters_to_one_percent < b.iters_to_one_percent;
  });
  return rows;
}

inline std::string summary_text(const std::vector<SummaryRow>& rows) {
  std::string out = "run,final_J,iters_to_1pct,final_feasibility,total_wall_ms\n";
  for (const auto& r : rows) {
    out += r.path + "  J=" + format_double(r.final_j) +
           "  iters_to_1%=" + std::to_string(r.iters_to_one_percent) +
           "  feas=" + format_double(r.final_feasibility) +
           "  wall_ms=" + format_double(r.total_wall_ms) + "\n";
  }
  return out;
}

inline void write_summary(const std::vector<SummaryRow>& rows, const std::string& out_stem) {
  CsvFile csv;
  csv.columns = {"final_J", "iters_to_1pct", "final_feasibility", "total_wall_ms"};
  // The run path is metadata per row; store rows in file order with paths in
  // a parallel comment block to keep the table numeric.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv.metadata.emplace_back("run" + std::to_string(i), rows[i].path);
    csv.rows.push_back({rows[i].final_j, static_cast<double>(rows[i].iters_to_one_percent),
                        rows[i].final_feasibility, rows[i].total_wall_ms});
  }
  write_csv(out_stem + ".csv", csv);
  std::ofstream txt(out_stem + ".txt", std::ios::binary);
  if (!txt) throw std::runtime_error("write_summary: cannot open " + out_stem + ".txt");
  txt << summary_text(rows);
}

/// Benchmark presets; <family>-accel compares mu = 0 with full acceleration,
/// <family>-mesh sweeps n in {100, 1000, 10000}, <family>-gamma sweeps the
/// Moreau-Yosida parameter with and without acceleration.
inline std::vector<ExperimentConfig> preset_configs(std::string_view name, ExperimentConfig base) {
  const auto family_defaults = [&base](ProblemFamily family) {
    base.family = family;
    switch (family) {
      case ProblemFamily::l1:
        base.alpha = 1e-2;
        base.iters = 1000;
        break;
      case ProblemFamily::linf:
        base.iters = 10000;
        break;
      case ProblemFamily::state:
        base.alpha = 1e-12;
        base.cbound = 0.68;
        base.iters = 10000;
        break;
    }
  };

  std::string_view family_part = name;
  std::string_view kind;
  if (const auto dash = name.rfind('-'); dash != std::string_view::npos) {
    family_part = name.substr(0, dash);
    kind = name.substr(dash + 1);
  }
  ProblemFamily family;
  if (family_part == "l1") {
    family = ProblemFamily::l1;
  } else if (family_part == "linf") {
    family = ProblemFamily::linf;
  } else if (family_part == "state") {
    family = ProblemFamily::state;
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
  }
  family_defaults(family);
  base.label = std::string(name);

  std::vector<ExperimentConfig> configs;
  if (kind == "accel") {
    for (double mu : {0.0, full_acceleration_mu}) {
      auto cfg = base;
      cfg.mu = mu;
      configs.push_back(cfg);
    }
  } else if (kind == "mesh") {
    base.mu = full_acceleration_mu;
    if (family == ProblemFamily::l1) base.replicates = 10;
    for (int n : {100, 1000, 10000}) {
      auto cfg = base;
      cfg.n = n;
      configs.push_back(cfg);
    }
  } else if (kind == "gamma") {
    for (double gamma : {1e-1, 1e-3, 1e-6}) {
      for (double mu : {0.0, full_acceleration_mu}) {
        auto cfg = base;
        cfg.gamma = gamma;
        cfg.mu = mu;
        configs.push_back(cfg);
      }
    }
  } else {
    throw std::invalid_argument("unknown preset '" + std::string(name) +
                                "' (expected <family>-{accel,mesh,gamma})");
  }
  return configs;
}

}  // namespace pdegm
