// Built-in experiment recipes (key=value text) and their evaluation checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "gfe/constants.hpp"
#include "gfe/harness.hpp"

namespace gfe {

namespace {

const std::map<std::string, const char*>& builtin_table() {
  static const std::map<std::string, const char*> table = {
      {"smoke",
       "# quick determinism probe: small GFF batch, max + gap\n"
       "kind=gff\n"
       "ns=32\n"
       "replicates=200\n"
       "seed=424242\n"
       "stats=max,gap\n"
       "topk=8\n"
       "centering=empirical\n"
       "check=none\n"},
      {"mn-slope",
       "# mean-max growth in log N against the centering slope\n"
       "kind=gff\n"
       "ns=64,128,256,512\n"
       "replicates=2000\n"
       "seed=20260801\n"
       "stats=max\n"
       "centering=empirical\n"
       "check=mn-slope\n"
       "slope_tol_rel=0.10\n"},
      {"thm1.4",
       "# right tail of the centered maximum, poly-exponential model\n"
       "kind=gff\n"
       "ns=256\n"
       "replicates=100000\n"
       "seed=20260804\n"
       "stats=max\n"
       "tail_lambdas=1,1.5,2,2.5,3\n"
       "tail_models=polyexp\n"
       "centering=empirical\n"
       "check=tail-exponent\n"
       "exponent_tol_rel=0.25\n"},
      {"thm1.3",
       "# law of the gap between the two largest values\n"
       "kind=gff\n"
       "ns=128\n"
       "replicates=50000\n"
       "seed=20260803\n"
       "stats=max,gap\n"
       "tail_on=gap\n"
       "tail_lambdas=0.5,1,1.5,2,2.5\n"
       "tail_models=gaussian,pure-exponential\n"
       "centering=empirical\n"
       "check=gap-law\n"
       "small_gap_delta=0.1\n"
       "small_gap_limit=0.15\n"
       "ref_gap_delta=0.5\n"},
      {"thm1.2",
       "# near-max set growth in the depth lambda\n"
       "kind=gff\n"
       "ns=256\n"
       "replicates=10000\n"
       "seed=20260802\n"
       "stats=max\n"
       "near_max_lambdas=2,3,4,5,6\n"
       "resample_pass2=true\n"
       "centering=empirical\n"
       "check=near-max-growth\n"
       "slope_lo=0.3\n"
       "slope_hi=3.0\n"
       "envelope_halfwidth=0.75\n"},
      {"thm1.1",
       "# two near-maxima at macroscopic distance: annulus pair probability trend\n"
       "kind=gff\n"
       "ns=512\n"
       "replicates=1000\n"
       "seed=20260805\n"
       "stats=max\n"
       "geometry_r=2,4,8,16\n"
       "geometry_c=0.5,1\n"
       "topk=512\n"
       "centering=empirical\n"
       "check=geometry-trend\n"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_csv(s)) out.push_back(std::stoi(tok));
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_csv(s)) out.push_back(std::stod(tok));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("recipe: bad boolean " + s);
}

FieldKind parse_kind(const std::string& s) {
  if (s == "gff") return FieldKind::gff;
  if (s == "mbrw") return FieldKind::mbrw;
  if (s == "brw") return FieldKind::brw;
  throw std::invalid_argument("recipe: unknown kind " + s);
}

// Keys consumed by check evaluators rather than the experiment config.
bool is_check_key(const std::string& k) {
  return k == "check" || k == "slope_tol_rel" || k == "exponent_tol_rel" ||
         k == "small_gap_delta" || k == "small_gap_limit" || k == "ref_gap_delta" ||
         k == "slope_lo" || k == "slope_hi" || k == "envelope_halfwidth";
}

std::string kv_get(const Recipe& r, const std::string& key, const std::string& dflt) {
  for (const auto& [k, v] : r.kv)
    if (k == key) return v;
  return dflt;
}

double kv_double(const Recipe& r, const std::string& key, double dflt) {
  const std::string v = kv_get(r, key, "");
  return v.empty() ? dflt : std::stod(v);
}

ExperimentConfig config_from_recipe(const Recipe& r) {
  ExperimentConfig c;
  for (const auto& [key, value] : r.kv) {
    if (is_check_key(key)) continue;
    if (key == "kind") {
      c.kind = parse_kind(value);
    } else if (key == "ns") {
      c.Ns = parse_ints(value);
    } else if (key == "replicates") {
      c.replicates = std::stol(value);
    } else if (key == "seed") {
      c.seed = std::stoull(value);
    } else if (key == "stats") {
      c.stat_gap = false;
      for (const auto& s : split_csv(value)) {
        if (s == "max") {
          c.stat_max = true;
        } else if (s == "gap") {
          c.stat_gap = true;
        } else {
          throw std::invalid_argument("recipe: unknown statistic " + s);
        }
      }
    } else if (key == "near_max_lambdas") {
      c.near_max_lambdas = parse_doubles(value);
    } else if (key == "pair_r") {
      c.pair_r = parse_ints(value);
    } else if (key == "pair_metric") {
      c.pair_metric = value == "torus" ? Metric::torus : Metric::plain;
    } else if (key == "top_m") {
      c.top_m = parse_ints(value);
    } else if (key == "geometry_r") {
      c.geometry_r = parse_ints(value);
    } else if (key == "geometry_c") {
      c.geometry_c = parse_doubles(value);
    } else if (key == "brw_xs") {
      c.brw_xs = parse_ints(value);
    } else if (key == "tail_lambdas") {
      c.tail_lambdas = parse_doubles(value);
    } else if (key == "tail_models") {
      for (const auto& s : split_csv(value))
        c.tail_models.push_back(tail_model_from_name(s));
    } else if (key == "tail_on") {
      c.tail_on = value == "gap" ? ExperimentConfig::Statistic::gap
                                 : ExperimentConfig::Statistic::max;
    } else if (key == "centering") {
      c.centering = value == "formula" ? ExperimentConfig::Centering::formula
                                       : ExperimentConfig::Centering::empirical;
    } else if (key == "topk") {
      c.top_k = std::stoi(value);
    } else if (key == "resample_pass2") {
      c.resample_pass2 = parse_bool(value);
    } else if (key == "workers") {
      c.workers = std::stoi(value);
    } else if (key == "k_lo") {
      c.k_lo = std::stoi(value);
    } else if (key == "k_hi") {
      c.k_hi = std::stoi(value);
    } else {
      throw std::invalid_argument("recipe: unknown key " + key);
    }
  }
  return c;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const TailEstimate* find_tail(const PerNSummary& sn, TailModel model) {
  for (const TailEstimate& t : sn.tails)
    if (t.model == model) return &t;
  return nullptr;
}

std::vector<CheckLine> check_mn_slope(const Recipe& r, const ExperimentResult& res) {
  const double tol = kv_double(r, "slope_tol_rel", 0.10);
  std::vector<double> lx, ly;
  for (const PerNSummary& sn : res.per_n) {
    lx.push_back(std::log(static_cast<double>(sn.N)));
    ly.push_back(sn.mean_max);
  }
  const double slope = ols_slope(lx, ly);
  const double target = constants::m_n_slope();
  const double rel = std::abs(slope / target - 1.0);
  CheckLine line;
  line.name = "mn-slope";
  line.pass = rel <= tol;
  line.detail = "slope=" + fmt(slope) + " target=" + fmt(target) +
                " rel_dev=" + fmt(rel) + " tol=" + fmt(tol);
  return {line};
}

std::vector<CheckLine> check_tail_exponent(const Recipe& r,
                                           const ExperimentResult& res) {
  const double tol = kv_double(r, "exponent_tol_rel", 0.25);
  const PerNSummary& sn = res.per_n.front();
  const TailEstimate* t = find_tail(sn, TailModel::polyexp);
  CheckLine line;
  line.name = "tail-exponent";
  if (!t || t->degenerate) {
    line.pass = false;
    line.detail = "polyexp fit unavailable or degenerate";
    return {line};
  }
  const double target = constants::right_tail_exponent();
  const double rel = std::abs(t->exponent / target - 1.0);
  line.pass = rel <= tol;
  line.detail = "exponent=" + fmt(t->exponent) + " target=" + fmt(target) +
                " rel_dev=" + fmt(rel) + " tol=" + fmt(tol) + " ci=[" +
                fmt(t->ci_lo) + "," + fmt(t->ci_hi) + "]";
  return {line};
}

double empirical_cdf_at(const std::vector<double>& xs, double t) {
  long c = 0;
  for (double v : xs)
    if (v <= t) ++c;
  return xs.empty() ? 0.0 : static_cast<double>(c) / xs.size();
}

std::vector<CheckLine> check_gap_law(const Recipe& r, const ExperimentResult& res) {
  const PerNSummary& sn = res.per_n.front();
  const TailEstimate* g = find_tail(sn, TailModel::gaussian);
  const TailEstimate* e = find_tail(sn, TailModel::pure_exponential);
  std::vector<CheckLine> lines;

  CheckLine fit;
  fit.name = "gap-gaussian-fits-better";
  if (!g || !e || g->degenerate || e->degenerate) {
    fit.pass = false;
    fit.detail = "required fits unavailable or degenerate";
  } else {
    fit.pass = g->weighted_r2 > e->weighted_r2 && g->exponent > 0.0;
    fit.detail = "wR2_gaussian=" + fmt(g->weighted_r2) +
                 " wR2_linear=" + fmt(e->weighted_r2) +
                 " a_gaussian=" + fmt(g->exponent);
  }
  lines.push_back(fit);

  const double delta = kv_double(r, "small_gap_delta", 0.1);
  const double limit = kv_double(r, "small_gap_limit", 0.15);
  const double ref_delta = kv_double(r, "ref_gap_delta", 0.5);
  const double p_small = empirical_cdf_at(sn.gaps, delta);
  const double p_ref = empirical_cdf_at(sn.gaps, ref_delta);

  CheckLine mass;
  mass.name = "gap-small-mass";
  mass.pass = p_small < limit;
  mass.detail = "P(gap<=" + fmt(delta) + ")=" + fmt(p_small) + " limit=" + fmt(limit);
  lines.push_back(mass);

  CheckLine mono;
  mono.name = "gap-mass-monotone";
  mono.pass = p_small < p_ref;
  mono.detail = "P(gap<=" + fmt(delta) + ")=" + fmt(p_small) + " < P(gap<=" +
                fmt(ref_delta) + ")=" + fmt(p_ref);
  lines.push_back(mono);
  return lines;
}

std::vector<CheckLine> check_near_max_growth(const Recipe& r,
                                             const ExperimentResult& res) {
  const PerNSummary& sn = res.per_n.front();
  std::vector<double> lams, logs;
  bool positive = true;
  for (const auto& [lam, mean] : sn.near_mean) {
    lams.push_back(lam);
    if (mean <= 0.0) positive = false;
    logs.push_back(mean > 0.0 ? std::log(mean) : 0.0);
  }
  std::vector<CheckLine> lines;

  CheckLine inc;
  inc.name = "near-max-increasing";
  inc.pass = positive;
  for (std::size_t i = 1; i < logs.size() && inc.pass; ++i)
    if (logs[i] <= logs[i - 1]) inc.pass = false;
  {
    std::string s = "log mean counts:";
    for (std::size_t i = 0; i < lams.size(); ++i)
      s += " (" + fmt(lams[i]) + ", " + fmt(logs[i]) + ")";
    inc.detail = s;
  }
  lines.push_back(inc);

  const double slope = ols_slope(lams, logs);
  const double lo = kv_double(r, "slope_lo", 0.3);
  const double hi = kv_double(r, "slope_hi", 3.0);
  CheckLine sl;
  sl.name = "near-max-slope";
  sl.pass = positive && slope >= lo && slope <= hi;
  sl.detail = "slope=" + fmt(slope) + " window=[" + fmt(lo) + "," + fmt(hi) + "]";
  lines.push_back(sl);

  // Envelope: residuals of the OLS line stay inside a fixed half-width band.
  double intercept = 0.0;
  {
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < lams.size(); ++i) {
      sx += lams[i];
      sy += logs[i];
    }
    intercept = sy / lams.size() - slope * sx / lams.size();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < lams.size(); ++i)
    worst = std::max(worst, std::abs(logs[i] - (intercept + slope * lams[i])));
  const double half = kv_double(r, "envelope_halfwidth", 0.75);
  CheckLine env;
  env.name = "near-max-envelope";
  env.pass = positive && worst <= half;
  env.detail = "max_residual=" + fmt(worst) + " halfwidth=" + fmt(half);
  lines.push_back(env);
  return lines;
}

std::vector<CheckLine> check_geometry_trend(const GeometryReport& rep) {
  std::vector<CheckLine> lines;
  for (std::size_t ci = 0; ci < rep.c_grid.size(); ++ci) {
    const auto& p = rep.p[ci];
    const auto& se = rep.se[ci];
    int inversions = 0;
    double worst_excess = 0.0, worst_allowance = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (p[i] > p[i - 1]) {
        ++inversions;
        const double excess = p[i] - p[i - 1];
        const double allow =
            2.0 * std::sqrt(se[i] * se[i] + se[i - 1] * se[i - 1]);
        if (excess - allow > worst_excess - worst_allowance) {
          worst_excess = excess;
          worst_allowance = allow;
        }
      }
    }
    CheckLine line;
    line.name = "geometry-trend-c" + fmt(rep.c_grid[ci]);
    line.pass = inversions == 0 ||
                (inversions == 1 && worst_excess <= worst_allowance);
    std::string s = "p(r):";
    for (std::size_t i = 0; i < p.size(); ++i)
      s += " " + std::to_string(rep.r_grid[i]) + "->" + fmt(p[i]);
    s += " inversions=" + std::to_string(inversions);
    if (inversions > 0)
      s += " worst_excess=" + fmt(worst_excess) + " allowed=" + fmt(worst_allowance);
    line.detail = s;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Recipe parse_recipe_text(const std::string& text, const std::string& name) {
  Recipe r;
  r.name = name;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("recipe: bad line '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    for (const auto& [k, v] : r.kv)
      if (k == key) throw std::invalid_argument("recipe: duplicate key " + key);
    r.kv.emplace_back(key, value);
  }
  return r;
}

std::vector<std::string> builtin_recipe_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtin_table()) names.push_back(k);
  return names;
}

std::string builtin_recipe_text(const std::string& name) {
  auto it = builtin_table().find(name);
  if (it == builtin_table().end())
    throw std::invalid_argument("unknown recipe " + name);
  return it->second;
}

Recipe load_recipe(const std::string& name_or_path) {
  auto it = builtin_table().find(name_or_path);
  if (it != builtin_table().end())
    return parse_recipe_text(it->second, name_or_path);
  std::ifstream is(name_or_path);
  if (!is)
    throw std::invalid_argument("recipe: no built-in or file named " + name_or_path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_recipe_text(os.str(),
                           std::filesystem::path(name_or_path).stem().string());
}

RecipeOutcome run_recipe(const Recipe& recipe, const std::string& out_dir,
                         int workers_override, std::ostream* log) {
  ExperimentConfig cfg = config_from_recipe(recipe);
  std::filesystem::create_directories(out_dir);
  cfg.csv_path = (std::filesystem::path(out_dir) / (recipe.name + ".csv")).string();
  cfg.json_path = (std::filesystem::path(out_dir) / (recipe.name + ".json")).string();
  if (workers_override > 0) cfg.workers = workers_override;

  const std::string check = kv_get(recipe, "check", "none");
  RecipeOutcome out;
  out.csv_path = cfg.csv_path;
  out.json_path = cfg.json_path;

  if (check == "geometry-trend") {
    GeometryReport rep = geometry_experiment(cfg);
    out.checks = check_geometry_trend(rep);
  } else {
    ExperimentResult res = run_experiment(cfg);
    if (check == "mn-slope") {
      out.checks = check_mn_slope(recipe, res);
    } else if (check == "tail-exponent") {
      out.checks = check_tail_exponent(recipe, res);
    } else if (check == "gap-law") {
      out.checks = check_gap_law(recipe, res);
    } else if (check == "near-max-growth") {
      out.checks = check_near_max_growth(recipe, res);
    } else if (check != "none") {
      throw std::invalid_argument("recipe: unknown check " + check);
    }
  }

  out.exit_code = 0;
  for (const CheckLine& line : out.checks) {
    if (!line.pass) out.exit_code = 2;
    if (log)
      (*log) << (line.pass ? "[PASS] " : "[FAIL] ") << recipe.name << "/"
             << line.name << ": " << line.detail << "\n";
  }
  return out;
}

}  // namespace gfe
