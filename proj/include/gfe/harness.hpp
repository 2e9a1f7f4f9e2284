// Experiment harness: reproducible Monte Carlo runs, two-pass centering,
// geometry experiment, named recipes, CSV/JSON persistence.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gfe/extremes.hpp"
#include "gfe/field.hpp"
#include "gfe/tail.hpp"

namespace gfe {

struct ExperimentConfig {
  FieldKind kind = FieldKind::gff;
  std::vector<int> Ns;
  long replicates = 1;
  std::uint64_t seed = 1;

  bool stat_max = true;
  bool stat_gap = false;
  std::vector<double> near_max_lambdas;  // near-max counts when nonempty
  std::vector<int> pair_r;               // restricted pair max when nonempty
  Metric pair_metric = Metric::plain;
  std::vector<int> top_m;                // sum of top-m values when nonempty
  std::vector<int> geometry_r;           // geometry_experiment grids
  std::vector<double> geometry_c;
  std::vector<int> brw_xs;               // level-count windows (BRW only)

  enum class Statistic { max, gap };
  std::vector<double> tail_lambdas;      // tail fit when nonempty
  std::vector<TailModel> tail_models;
  Statistic tail_on = Statistic::max;

  enum class Centering { empirical, formula };
  Centering centering = Centering::empirical;

  int workers = 0;        // 0: environment override (GFE_WORKERS) or 1
  int top_k = 64;         // top-K values persisted per replicate
  bool resample_pass2 = false;  // recount near-max sets by re-deriving each field
  int k_lo = -1, k_hi = -1;     // MBRW level range; -1 means full

  std::string csv_path;   // per-replicate rows; empty disables
  std::string json_path;  // summary JSON; empty disables

  void validate() const;  // throws std::invalid_argument on bad combinations
};

/** Per-size aggregate of one experiment. */
struct PerNSummary {
  int N = 0;
  long reps = 0;
  double center = 0.0;             // centering used by pass 2
  double mean_max = 0.0, se_max = 0.0, sd_max = 0.0;
  double mean_gap = 0.0, se_gap = 0.0;
  std::map<double, double> near_mean, near_se;   // lambda -> mean |A_lambda|
  std::map<int, double> pair_mean, pair_se;      // r -> mean pair max
  std::map<int, double> topm_mean, topm_se;      // m -> mean top-m sum
  std::map<int, double> xs_mean, xs_se;          // x -> mean level count
  std::vector<TailEstimate> tails;
  std::vector<double> maxima;  // per-replicate maxima, replicate order
  std::vector<double> gaps;    // per-replicate gaps when stat_gap
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<PerNSummary> per_n;
};

/**
 * Two-pass runner.  Pass 1 samples each replicate on a worker pool (each
 * replicate owns a derived substream), streams per-replicate CSV rows ordered
 * by replicate index, and persists the top-K values.  Pass 2 derives centered
 * statistics; it errors loudly if a requested lambda exceeds what the stored
 * top-K supports, unless resample_pass2 re-derives fields bit-identically.
 * Output bytes depend only on the config, not the worker count.
 */
ExperimentResult run_experiment(const ExperimentConfig& config);

/** Serialize the summary (schema version "1") as JSON text. */
std::string summary_json_text(const ExperimentResult& result);

struct GeometryReport {
  int N = 0;
  long reps = 0;
  double center = 0.0;
  std::vector<int> r_grid;
  std::vector<double> c_grid;
  std::vector<std::vector<double>> p;   // p[c_index][r_index]
  std::vector<std::vector<double>> se;
};

/**
 * For each (r, c): empirical probability that some vertex pair with distance in
 * [r, N/r] has both values >= center - c * log log r, computed from the
 * per-replicate near-max set.  Requires GFF kind and r >= 2, r^2 <= N.
 */
GeometryReport geometry_experiment(const ExperimentConfig& config);
std::string geometry_json_text(const GeometryReport& report);

// ---------------------------------------------------------------- recipes --

struct Recipe {
  std::string name;
  std::vector<std::pair<std::string, std::string>> kv;  // ordered key=value lines
};

/** Parse key=value lines ('#' comments, blank lines ignored). */
Recipe parse_recipe_text(const std::string& text, const std::string& name);

/** Load a built-in recipe by name, or any key=value file by path. */
Recipe load_recipe(const std::string& name_or_path);
std::vector<std::string> builtin_recipe_names();
std::string builtin_recipe_text(const std::string& name);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RecipeOutcome {
  std::vector<CheckLine> checks;
  int exit_code = 0;  // 0 all checks pass, 2 otherwise
  std::string csv_path, json_path;
};

/**
 * Run a recipe into out_dir (CSV + JSON named after the recipe) and evaluate
 * its named checks.  workers_override > 0 beats both the recipe and the
 * environment; outputs are byte-identical across worker counts.
 */
RecipeOutcome run_recipe(const Recipe& recipe, const std::string& out_dir,
                         int workers_override = 0, std::ostream* log = nullptr);

/** Effective worker count: explicit > 0, else GFE_WORKERS, else 1. */
int effective_workers(int configured);

}  // namespace gfe
