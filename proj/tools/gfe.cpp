// Command-line front end: sampling, Green queries, extreme statistics, recipes.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfe/compare.hpp"
#include "gfe/constants.hpp"
#include "gfe/extremes.hpp"
#include "gfe/field_io.hpp"
#include "gfe/green.hpp"
#include "gfe/harness.hpp"
#include "gfe/samplers.hpp"

namespace {

using nlohmann::ordered_json;

gfe::Vertex parse_vertex(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("vertex must be x,y: " + s);
  return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

gfe::FieldKind parse_kind(const std::string& s) {
  if (s == "gff") return gfe::FieldKind::gff;
  if (s == "mbrw") return gfe::FieldKind::mbrw;
  if (s == "brw") return gfe::FieldKind::brw;
  throw CLI::ValidationError("kind must be gff|mbrw|brw: " + s);
}

double formula_center(gfe::FieldKind kind, int N) {
  return kind == gfe::FieldKind::gff ? gfe::constants::m_n(N)
                                     : gfe::constants::t_n(gfe::GridSpec(N).n());
}

ordered_json vertex_json(gfe::Vertex v) { return ordered_json{{"x", v.x}, {"y", v.y}}; }

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// Dense numeric CSV (optionally one header line, '#' comments) -> matrix.
Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string tok;
    bool bad = false;
    while (std::getline(ls, tok, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used])))
          ++used;
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        bad = true;
        break;
      }
    }
    if (bad) {
      if (first) {  // tolerate a single header line
        first = false;
        continue;
      }
      throw std::runtime_error(path + ": non-numeric row: " + line);
    }
    first = false;
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no numeric rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw std::runtime_error(path + ": ragged rows");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

int run(int argc, char** argv) {
  CLI::App app{"2D Gaussian field sampler and extreme-value experiment runner"};
  app.require_subcommand(1);

  // ---- sample ----
  auto* sample = app.add_subcommand("sample", "sample one field and write it");
  std::string s_kind = "gff", s_levels, s_out;
  int s_n = 0;
  std::uint64_t s_seed = 1;
  sample->add_option("--kind", s_kind, "gff|mbrw|brw")->capture_default_str();
  sample->add_option("--n", s_n, "box side")->required();
  sample->add_option("--seed", s_seed, "field seed")->capture_default_str();
  sample->add_option("--levels", s_levels, "MBRW level range a:b");
  sample->add_option("--out", s_out, "output field file")->required();

  // ---- green ----
  auto* green = app.add_subcommand("green", "Green function entry: solver and MC");
  int g_n = 0;
  std::string g_x, g_y;
  long g_walks = 200000;
  std::uint64_t g_seed = 1;
  green->add_option("--n", g_n, "box side")->required();
  green->add_option("--x", g_x, "vertex x,y")->required();
  green->add_option("--y", g_y, "vertex x,y")->required();
  green->add_option("--walks", g_walks, "MC walk count")->capture_default_str();
  green->add_option("--mc-seed", g_seed, "MC seed")->capture_default_str();

  // ---- resistance ----
  auto* resist = app.add_subcommand(
      "resistance", "both sides of the increment-variance / resistance identity");
  int r_n = 0;
  std::string r_u, r_v;
  resist->add_option("--n", r_n, "box side")->required();
  resist->add_option("--u", r_u, "vertex x,y")->required();
  resist->add_option("--v", r_v, "vertex x,y")->required();

  // ---- covcheck ----
  auto* covcheck =
      app.add_subcommand("covcheck", "GFF covariance vs the log-distance profile");
  int c_n = 0, c_maxv = 256;
  std::uint64_t c_seed = 1;
  covcheck->add_option("--n", c_n, "sub-box side (power of two, 4n <= 256)")->required();
  covcheck->add_option("--max-vertices", c_maxv, "vertex budget")->capture_default_str();
  covcheck->add_option("--seed", c_seed, "vertex sample seed")->capture_default_str();

  // ---- extremes ----
  auto* extremes = app.add_subcommand("extremes", "extreme statistics of one field");
  std::string e_in, e_center = "auto", e_lambdas;
  int e_topk = 20;
  extremes->add_option("--in", e_in, "field file")->required();
  extremes->add_option("--topk", e_topk, "top-k size")->capture_default_str();
  extremes->add_option("--center", e_center, "auto|formula")->capture_default_str();
  extremes->add_option("--lambdas", e_lambdas, "near-max depths, comma separated");

  // ---- pairmax ----
  auto* pairmax = app.add_subcommand("pairmax", "restricted pair maximum");
  std::string p_in, p_metric = "plain";
  int p_r = 0;
  pairmax->add_option("--in", p_in, "field file")->required();
  pairmax->add_option("--r", p_r, "annulus parameter")->required();
  pairmax->add_option("--metric", p_metric, "plain|torus")->capture_default_str();

  // ---- tail ----
  auto* tail = app.add_subcommand("tail", "Monte Carlo tail fit of max or gap");
  std::string t_kind = "gff", t_lambdas, t_models = "pure-exponential", t_on = "max",
              t_centering = "empirical", t_csv, t_json;
  int t_n = 0, t_workers = 0;
  long t_reps = 0;
  std::uint64_t t_seed = 1;
  tail->add_option("--kind", t_kind, "gff|mbrw|brw")->capture_default_str();
  tail->add_option("--n", t_n, "box side")->required();
  tail->add_option("--reps", t_reps, "replicates")->required();
  tail->add_option("--seed", t_seed, "master seed")->capture_default_str();
  tail->add_option("--lambdas", t_lambdas, "grid, comma separated")->required();
  tail->add_option("--models", t_models, "comma list of tail models")
      ->capture_default_str();
  tail->add_option("--on", t_on, "max|gap")->capture_default_str();
  tail->add_option("--centering", t_centering, "empirical|formula")
      ->capture_default_str();
  tail->add_option("--csv", t_csv, "per-replicate CSV path");
  tail->add_option("--json", t_json, "summary JSON path");
  tail->add_option("--workers", t_workers, "worker threads (0: env or 1)");

  // ---- geometry ----
  auto* geometry =
      app.add_subcommand("geometry", "two near-maxima at macroscopic distance");
  std::string y_r, y_c, y_json;
  int y_n = 0, y_topk = 64, y_workers = 0;
  long y_reps = 0;
  std::uint64_t y_seed = 1;
  geometry->add_option("--n", y_n, "box side")->required();
  geometry->add_option("--reps", y_reps, "replicates")->required();
  geometry->add_option("--seed", y_seed, "master seed")->capture_default_str();
  geometry->add_option("--r", y_r, "annulus grid, comma separated")->required();
  geometry->add_option("--c", y_c, "depth factors, comma separated")->required();
  geometry->add_option("--topk", y_topk, "top-K persisted per replicate")
      ->capture_default_str();
  geometry->add_option("--json", y_json, "report JSON path");
  geometry->add_option("--workers", y_workers, "worker threads (0: env or 1)");

  // ---- compare-sm ----
  auto* compare = app.add_subcommand(
      "compare-sm", "Monte Carlo top-m-sum order check for two covariance models");
  std::string m_covx, m_covy, m_ms = "1,2,4";
  long m_reps = 100000;
  std::uint64_t m_seed = 1;
  compare->add_option("--covx", m_covx, "CSV matrix, lower model X")->required();
  compare->add_option("--covy", m_covy, "CSV matrix, upper model Y")->required();
  compare->add_option("--m", m_ms, "comma list of m")->capture_default_str();
  compare->add_option("--reps", m_reps, "replicates")->capture_default_str();
  compare->add_option("--seed", m_seed, "seed")->capture_default_str();

  // ---- recipe ----
  auto* recipe = app.add_subcommand("recipe", "run a named experiment recipe");
  std::string rc_name, rc_out = "runs";
  int rc_workers = 0;
  bool rc_list = false, rc_show = false;
  recipe->add_option("name", rc_name, "built-in name or key=value file");
  recipe->add_option("--out", rc_out, "output directory")->capture_default_str();
  recipe->add_option("--workers", rc_workers, "worker threads (0: env or 1)");
  recipe->add_flag("--list", rc_list, "list built-in recipes");
  recipe->add_flag("--show", rc_show, "print the recipe text instead of running");

  CLI11_PARSE(app, argc, argv);

  if (sample->parsed()) {
    gfe::Field f;
    const gfe::FieldKind kind = parse_kind(s_kind);
    if (kind == gfe::FieldKind::gff) {
      f = gfe::sample_gff(s_n, s_seed);
    } else if (kind == gfe::FieldKind::brw) {
      f = gfe::sample_brw(s_n, s_seed);
    } else if (!s_levels.empty()) {
      const auto colon = s_levels.find(':');
      if (colon == std::string::npos)
        throw CLI::ValidationError("--levels must be a:b");
      f = gfe::sample_mbrw(s_n, s_seed, std::stoi(s_levels.substr(0, colon)),
                           std::stoi(s_levels.substr(colon + 1)));
    } else {
      f = gfe::sample_mbrw(s_n, s_seed);
    }
    gfe::write_field(f, s_out);
    emit(ordered_json{{"kind", gfe::kind_name(f.kind)},
                      {"n", f.N},
                      {"seed", f.seed},
                      {"k_lo", f.k_lo},
                      {"k_hi", f.k_hi},
                      {"out", s_out}});
    return 0;
  }

  if (green->parsed()) {
    const gfe::Vertex x = parse_vertex(g_x), y = parse_vertex(g_y);
    const gfe::GridSpec grid(g_n);
    if (!grid.is_interior(x) || !grid.is_interior(y))
      throw std::invalid_argument("green: vertices must be interior");
    double solver = 0.0;
    std::string route;
    if (g_n <= gfe::kDenseGreenLimit) {
      solver = gfe::build_green(g_n).entry(x, y);
      route = "dense";
    } else {
      const auto col = gfe::green_column_cg(g_n, y);
      solver = col[static_cast<std::size_t>(x.x - 1) * (g_n - 2) + (x.y - 1)];
      route = "cg";
    }
    const auto [mc, se] = gfe::green_mc_oracle(g_n, x, y, g_walks, g_seed);
    emit(ordered_json{{"n", g_n},
                      {"x", vertex_json(x)},
                      {"y", vertex_json(y)},
                      {"solver", solver},
                      {"route", route},
                      {"mc_mean", mc},
                      {"mc_se", se},
                      {"walks", g_walks}});
    return 0;
  }

  if (resist->parsed()) {
    const gfe::Vertex u = parse_vertex(r_u), v = parse_vertex(r_v);
    const gfe::GridSpec grid(r_n);
    if (!grid.is_interior(u) || !grid.is_interior(v))
      throw std::invalid_argument("resistance: vertices must be interior");
    const double reff = gfe::effective_resistance(r_n, u, v);
    const auto gu = gfe::green_column_cg(r_n, u);
    const auto gv = gfe::green_column_cg(r_n, v);
    const auto at = [&](const std::vector<double>& col, gfe::Vertex w) {
      return col[static_cast<std::size_t>(w.x - 1) * (r_n - 2) + (w.y - 1)];
    };
    const double increment_var = at(gu, u) + at(gv, v) - 2.0 * at(gu, v);
    emit(ordered_json{{"n", r_n},
                      {"u", vertex_json(u)},
                      {"v", vertex_json(v)},
                      {"increment_variance", increment_var},
                      {"four_r_eff", 4.0 * reff},
                      {"abs_diff", std::abs(increment_var - 4.0 * reff)}});
    return 0;
  }

  if (covcheck->parsed()) {
    const gfe::CovProfileReport rep = gfe::gff_cov_profile_check(c_n, c_maxv, c_seed);
    emit(ordered_json{{"box_side", rep.box_side},
                      {"sub_side", rep.sub_side},
                      {"c_emp", rep.c_emp},
                      {"worst_u", vertex_json(rep.worst_u)},
                      {"worst_v", vertex_json(rep.worst_v)},
                      {"worst_cov", rep.worst_cov},
                      {"worst_pred", rep.worst_pred},
                      {"vertices", rep.vertices},
                      {"pairs", rep.pairs}});
    return 0;
  }

  if (extremes->parsed()) {
    const gfe::Field f = gfe::read_field(e_in);
    std::vector<double> lambdas;
    if (!e_lambdas.empty()) {
      std::istringstream ls(e_lambdas);
      std::string tok;
      while (std::getline(ls, tok, ',')) lambdas.push_back(std::stod(tok));
    }
    double center = 0.0;
    if (e_center == "formula") {
      center = formula_center(f.kind, f.N);
    } else if (e_center == "auto") {
      center = gfe::summarize(f, 2, 0.0).max;
    } else {
      throw CLI::ValidationError("--center must be auto|formula");
    }
    const gfe::ExtremeSummary s = gfe::summarize(f, e_topk, center, lambdas);
    ordered_json topk = ordered_json::array();
    for (const auto& [val, vx] : s.top_k)
      topk.push_back(ordered_json{{"value", val}, {"vertex", vertex_json(vx)}});
    ordered_json near = ordered_json::array();
    for (const auto& [lam, count] : s.near_max_counts)
      near.push_back(ordered_json{{"lambda", lam}, {"count", count}});
    emit(ordered_json{{"kind", gfe::kind_name(f.kind)},
                      {"n", f.N},
                      {"max", s.max},
                      {"argmax", vertex_json(s.argmax)},
                      {"gap", s.gap},
                      {"center", s.center},
                      {"top_k", topk},
                      {"near_max", near}});
    return 0;
  }

  if (pairmax->parsed()) {
    const gfe::Field f = gfe::read_field(p_in);
    const gfe::Metric metric =
        p_metric == "torus" ? gfe::Metric::torus : gfe::Metric::plain;
    const gfe::PairMaxResult r = gfe::pair_max_restricted(f, p_r, metric);
    emit(ordered_json{{"kind", gfe::kind_name(f.kind)},
                      {"n", f.N},
                      {"r", r.r},
                      {"metric", p_metric},
                      {"value", r.value},
                      {"a", vertex_json(r.a)},
                      {"b", vertex_json(r.b)}});
    return 0;
  }

  if (tail->parsed()) {
    gfe::ExperimentConfig cfg;
    cfg.kind = parse_kind(t_kind);
    cfg.Ns = {t_n};
    cfg.replicates = t_reps;
    cfg.seed = t_seed;
    cfg.stat_gap = t_on == "gap";
    cfg.tail_on = t_on == "gap" ? gfe::ExperimentConfig::Statistic::gap
                                : gfe::ExperimentConfig::Statistic::max;
    cfg.centering = t_centering == "formula"
                        ? gfe::ExperimentConfig::Centering::formula
                        : gfe::ExperimentConfig::Centering::empirical;
    {
      std::istringstream ls(t_lambdas);
      std::string tok;
      while (std::getline(ls, tok, ',')) cfg.tail_lambdas.push_back(std::stod(tok));
    }
    {
      std::istringstream ls(t_models);
      std::string tok;
      while (std::getline(ls, tok, ','))
        cfg.tail_models.push_back(gfe::tail_model_from_name(tok));
    }
    cfg.workers = t_workers;
    cfg.csv_path = t_csv;
    cfg.json_path = t_json;
    const gfe::ExperimentResult res = gfe::run_experiment(cfg);
    std::cout << gfe::summary_json_text(res) << "\n";
    return 0;
  }

  if (geometry->parsed()) {
    gfe::ExperimentConfig cfg;
    cfg.kind = gfe::FieldKind::gff;
    cfg.Ns = {y_n};
    cfg.replicates = y_reps;
    cfg.seed = y_seed;
    cfg.top_k = y_topk;
    cfg.workers = y_workers;
    {
      std::istringstream ls(y_r);
      std::string tok;
      while (std::getline(ls, tok, ',')) cfg.geometry_r.push_back(std::stoi(tok));
    }
    {
      std::istringstream ls(y_c);
      std::string tok;
      while (std::getline(ls, tok, ',')) cfg.geometry_c.push_back(std::stod(tok));
    }
    const gfe::GeometryReport rep = gfe::geometry_experiment(cfg);
    const std::string text = gfe::geometry_json_text(rep);
    if (!y_json.empty()) {
      std::ofstream os(y_json, std::ios::trunc);
      if (!os) throw std::runtime_error("cannot open " + y_json);
      os << text;
    }
    std::cout << text << "\n";
    return 0;
  }

  if (compare->parsed()) {
    const gfe::CovModel X = gfe::CovModel::validated(read_matrix_csv(m_covx), "X");
    const gfe::CovModel Y = gfe::CovModel::validated(read_matrix_csv(m_covy), "Y");
    std::vector<int> ms;
    {
      std::istringstream ls(m_ms);
      std::string tok;
      while (std::getline(ls, tok, ',')) ms.push_back(std::stoi(tok));
    }
    const gfe::PremiseReport premise = gfe::check_slepian_premise(X, Y);
    const gfe::OrderReport rep = gfe::mc_order_compare(X, Y, ms, m_reps, m_seed);
    ordered_json rows = ordered_json::array();
    for (const auto& row : rep.rows)
      rows.push_back(ordered_json{{"m", row.m},
                                  {"mean_x", row.mean_x},
                                  {"mean_y", row.mean_y},
                                  {"diff", row.diff},
                                  {"se_diff", row.se_diff},
                                  {"pass", row.pass}});
    emit(ordered_json{{"dim", X.dim()},
                      {"reps", rep.reps},
                      {"premise_pass", premise.pass},
                      {"premise_min_margin", premise.min_margin},
                      {"rows", rows},
                      {"pass", rep.pass}});
    return rep.pass ? 0 : 2;
  }

  if (recipe->parsed()) {
    if (rc_list) {
      for (const auto& name : gfe::builtin_recipe_names()) std::cout << name << "\n";
      return 0;
    }
    if (rc_name.empty())
      throw CLI::ValidationError("recipe: name required unless --list");
    if (rc_show) {
      std::cout << gfe::builtin_recipe_text(rc_name);
      return 0;
    }
    const gfe::Recipe r = gfe::load_recipe(rc_name);
    const gfe::RecipeOutcome out = gfe::run_recipe(r, rc_out, rc_workers, &std::cout);
    std::cout << "csv: " << out.csv_path << "\n"
              << "json: " << out.json_path << "\n";
    return out.exit_code;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
