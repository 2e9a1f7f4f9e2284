// Experiment runner: deterministic replicate substreams, worker pool, two-pass
// centered statistics, geometry experiment, CSV/JSON persistence.

#include "gfe/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gfe/constants.hpp"
#include "gfe/rng.hpp"
#include "gfe/samplers.hpp"
#include "json.hpp"

namespace gfe {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Field sample_field_for(const ExperimentConfig& c, int N, long rep) {
  const std::uint64_t fs =
      rng::field_seed(c.seed, static_cast<std::uint64_t>(c.kind), N,
                      static_cast<std::uint64_t>(rep));
  switch (c.kind) {
    case FieldKind::gff:
      return sample_gff(N, fs);
    case FieldKind::mbrw: {
      GridSpec grid(N);
      const int lo = c.k_lo < 0 ? 0 : c.k_lo;
      const int hi = c.k_hi < 0 ? grid.n() : c.k_hi;
      return sample_mbrw(N, fs, lo, hi);
    }
    case FieldKind::brw:
      return sample_brw(N, fs);
  }
  throw std::logic_error("sample_field_for: bad kind");
}

struct RepRow {
  double max = 0.0;
  Vertex argmax;
  double gap = 0.0;
  std::vector<std::pair<double, Vertex>> topk;  // kept only when pass 2 needs it
  std::vector<double> pair_vals;                // aligned with config.pair_r
  std::vector<double> topm_vals;                // aligned with config.top_m
  std::vector<long> xs_counts;                  // aligned with config.brw_xs
};

struct MeanVar {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double sd() const {
    if (n < 2) return 0.0;
    return std::sqrt(std::max(0.0, (sumsq - sum * sum / n) / (n - 1)));
  }
  double se() const { return n ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

// Pass 1 for one N: sample every replicate on the pool, keep per-replicate rows.
std::vector<RepRow> pass1(const ExperimentConfig& c, int N, bool keep_topk) {
  const long reps = c.replicates;
  std::vector<RepRow> rows(static_cast<std::size_t>(reps));
  std::atomic<long> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto work = [&]() {
    for (;;) {
      const long rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        Field f = sample_field_for(c, N, rep);
        RepRow& row = rows[static_cast<std::size_t>(rep)];
        const int k = keep_topk ? c.top_k : 2;
        ExtremeSummary s = summarize(f, k, 0.0, {});
        row.max = s.max;
        row.argmax = s.argmax;
        row.gap = s.gap;
        if (keep_topk) row.topk = std::move(s.top_k);
        for (int r : c.pair_r)
          row.pair_vals.push_back(pair_max_restricted(f, r, c.pair_metric).value);
        for (int m : c.top_m) row.topm_vals.push_back(sum_top_m(f.values, m));
        if (!c.brw_xs.empty()) {
          auto counts = brw_level_counts(f, c.brw_xs);
          for (int x : c.brw_xs) row.xs_counts.push_back(counts.at(x));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = static_cast<int>(
      std::max<long>(1, std::min<long>(effective_workers(c.workers), reps)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return rows;
}

std::string csv_header(const ExperimentConfig& c) {
  std::string h = "N,replicate,max,argmax_x,argmax_y";
  if (c.stat_gap) h += ",gap";
  for (int r : c.pair_r) h += ",pair_r" + std::to_string(r);
  for (int m : c.top_m) h += ",topm_" + std::to_string(m);
  for (int x : c.brw_xs) h += ",xi_" + std::to_string(x);
  return h + "\n";
}

void append_csv_rows(std::string& out, const ExperimentConfig& c, int N,
                     const std::vector<RepRow>& rows) {
  for (std::size_t rep = 0; rep < rows.size(); ++rep) {
    const RepRow& r = rows[rep];
    out += std::to_string(N);
    out += ',';
    out += std::to_string(rep);
    out += ',';
    out += fmt_double(r.max);
    out += ',';
    out += std::to_string(r.argmax.x);
    out += ',';
    out += std::to_string(r.argmax.y);
    if (c.stat_gap) {
      out += ',';
      out += fmt_double(r.gap);
    }
    for (double v : r.pair_vals) {
      out += ',';
      out += fmt_double(v);
    }
    for (double v : r.topm_vals) {
      out += ',';
      out += fmt_double(v);
    }
    for (long v : r.xs_counts) {
      out += ',';
      out += std::to_string(v);
    }
    out += '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!os) throw std::runtime_error("short write to " + path);
}

double formula_center(FieldKind kind, int N) {
  switch (kind) {
    case FieldKind::gff:
      return constants::m_n(N);
    case FieldKind::brw:
    case FieldKind::mbrw:
      return constants::t_n(GridSpec(N).n());
  }
  throw std::logic_error("formula_center: bad kind");
}

}  // namespace

int effective_workers(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("GFE_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

void ExperimentConfig::validate() const {
  if (Ns.empty()) throw std::invalid_argument("config: Ns must be nonempty");
  for (int N : Ns) {
    if (N < 1) throw std::invalid_argument("config: N must be >= 1");
    if (kind == FieldKind::gff && N < 3)
      throw std::invalid_argument("config: GFF needs N >= 3");
    if (kind != FieldKind::gff && !GridSpec::is_power_of_two(N))
      throw std::invalid_argument("config: hierarchical kinds need N = 2^n");
  }
  if (replicates < 1) throw std::invalid_argument("config: replicates must be >= 1");
  if (top_k < 2) throw std::invalid_argument("config: top_k must be >= 2");
  for (std::size_t i = 1; i < near_max_lambdas.size(); ++i)
    if (near_max_lambdas[i] <= near_max_lambdas[i - 1])
      throw std::invalid_argument("config: near-max lambdas must increase");
  for (int r : pair_r) {
    if (r < 1) throw std::invalid_argument("config: pair r must be >= 1");
    for (int N : Ns)
      if (static_cast<long long>(r) * r > N)
        throw std::invalid_argument("config: pair r^2 must be <= N");
  }
  if (geometry_r.empty() != geometry_c.empty())
    throw std::invalid_argument("config: geometry grids must come together");
  for (int r : geometry_r) {
    if (r < 2) throw std::invalid_argument("config: geometry r must be >= 2");
    for (int N : Ns)
      if (static_cast<long long>(r) * r > N)
        throw std::invalid_argument("config: geometry r^2 must be <= N");
  }
  if (!geometry_r.empty() && kind != FieldKind::gff)
    throw std::invalid_argument("config: geometry experiment needs the GFF kind");
  if (!brw_xs.empty() && kind != FieldKind::brw)
    throw std::invalid_argument("config: level-count windows need the BRW kind");
  if (!tail_lambdas.empty() && tail_models.empty())
    throw std::invalid_argument("config: tail fit requested without models");
  if (tail_on == Statistic::gap && !tail_lambdas.empty() && !stat_gap)
    throw std::invalid_argument("config: gap tail fit needs the gap statistic");
  if ((k_lo >= 0) != (k_hi >= 0))
    throw std::invalid_argument("config: level range needs both ends");
  if (k_lo >= 0 && kind != FieldKind::mbrw)
    throw std::invalid_argument("config: level range applies to MBRW only");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const bool want_near = !config.near_max_lambdas.empty();
  const bool keep_topk = want_near && !config.resample_pass2;

  ExperimentResult result;
  result.config = config;
  std::string csv = csv_header(config);

  for (int N : config.Ns) {
    std::vector<RepRow> rows = pass1(config, N, keep_topk);
    append_csv_rows(csv, config, N, rows);

    PerNSummary sn;
    sn.N = N;
    sn.reps = config.replicates;
    MeanVar mv_max, mv_gap;
    std::vector<MeanVar> mv_pair(config.pair_r.size());
    std::vector<MeanVar> mv_topm(config.top_m.size());
    std::vector<MeanVar> mv_xs(config.brw_xs.size());
    sn.maxima.reserve(rows.size());
    for (const RepRow& r : rows) {
      mv_max.add(r.max);
      sn.maxima.push_back(r.max);
      if (config.stat_gap) {
        mv_gap.add(r.gap);
        sn.gaps.push_back(r.gap);
      }
      for (std::size_t i = 0; i < r.pair_vals.size(); ++i)
        mv_pair[i].add(r.pair_vals[i]);
      for (std::size_t i = 0; i < r.topm_vals.size(); ++i)
        mv_topm[i].add(r.topm_vals[i]);
      for (std::size_t i = 0; i < r.xs_counts.size(); ++i)
        mv_xs[i].add(static_cast<double>(r.xs_counts[i]));
    }
    sn.mean_max = mv_max.mean();
    sn.se_max = mv_max.se();
    sn.sd_max = mv_max.sd();
    if (config.stat_gap) {
      sn.mean_gap = mv_gap.mean();
      sn.se_gap = mv_gap.se();
    }
    for (std::size_t i = 0; i < config.pair_r.size(); ++i) {
      sn.pair_mean[config.pair_r[i]] = mv_pair[i].mean();
      sn.pair_se[config.pair_r[i]] = mv_pair[i].se();
    }
    for (std::size_t i = 0; i < config.top_m.size(); ++i) {
      sn.topm_mean[config.top_m[i]] = mv_topm[i].mean();
      sn.topm_se[config.top_m[i]] = mv_topm[i].se();
    }
    for (std::size_t i = 0; i < config.brw_xs.size(); ++i) {
      sn.xs_mean[config.brw_xs[i]] = mv_xs[i].mean();
      sn.xs_se[config.brw_xs[i]] = mv_xs[i].se();
    }

    sn.center = config.centering == ExperimentConfig::Centering::empirical
                    ? sn.mean_max
                    : formula_center(config.kind, N);

    // Pass 2: centered statistics from persisted top-K or re-derived fields.
    if (want_near) {
      std::vector<MeanVar> mv_near(config.near_max_lambdas.size());
      const std::size_t total = static_cast<std::size_t>(N) * N;
      for (long rep = 0; rep < config.replicates; ++rep) {
        const RepRow& r = rows[static_cast<std::size_t>(rep)];
        Field resampled;
        if (config.resample_pass2) resampled = sample_field_for(config, N, rep);
        for (std::size_t li = 0; li < config.near_max_lambdas.size(); ++li) {
          const double thr = sn.center - config.near_max_lambdas[li];
          long count = 0;
          if (config.resample_pass2) {
            for (double v : resampled.values)
              if (v >= thr) ++count;
          } else {
            for (const auto& tv : r.topk)
              if (tv.first >= thr) ++count;
            if (static_cast<std::size_t>(count) == r.topk.size() &&
                r.topk.size() < total)
              throw std::runtime_error(
                  "run_experiment: top-K=" + std::to_string(config.top_k) +
                  " cannot certify the near-max count at lambda=" +
                  fmt_double(config.near_max_lambdas[li]) +
                  " (replicate " + std::to_string(rep) +
                  "); raise top_k or enable resample_pass2");
          }
          mv_near[li].add(static_cast<double>(count));
        }
      }
      for (std::size_t li = 0; li < config.near_max_lambdas.size(); ++li) {
        sn.near_mean[config.near_max_lambdas[li]] = mv_near[li].mean();
        sn.near_se[config.near_max_lambdas[li]] = mv_near[li].se();
      }
    }

    if (!config.tail_lambdas.empty()) {
      const std::vector<double>& samples =
          config.tail_on == ExperimentConfig::Statistic::gap ? sn.gaps : sn.maxima;
      const double center =
          config.tail_on == ExperimentConfig::Statistic::gap ? 0.0 : sn.center;
      for (TailModel model : config.tail_models)
        sn.tails.push_back(
            estimate_tail(samples, center, config.tail_lambdas, model));
    }

    result.per_n.push_back(std::move(sn));
  }

  if (!config.csv_path.empty()) write_text_file(config.csv_path, csv);
  if (!config.json_path.empty())
    write_text_file(config.json_path, summary_json_text(result));
  return result;
}

namespace {

Json tail_json(const TailEstimate& t) {
  Json j;
  j["model"] = tail_model_name(t.model);
  j["reps"] = t.reps;
  j["lambda"] = t.lambda;
  j["counts"] = t.counts;
  j["p"] = t.p;
  j["se"] = t.se;
  j["used"] = t.used;
  j["degenerate"] = t.degenerate;
  if (!t.degenerate) {
    j["exponent"] = t.exponent;
    j["exponent_se"] = t.exponent_se;
    j["ci"] = {t.ci_lo, t.ci_hi};
    j["intercept"] = t.intercept;
    j["weighted_r2"] = t.weighted_r2;
  }
  return j;
}

template <typename K>
Json stat_json(const std::map<K, double>& mean, const std::map<K, double>& se) {
  Json j = Json::object();
  for (const auto& [k, v] : mean) {
    Json entry;
    entry["mean"] = v;
    entry["se"] = se.at(k);
    std::ostringstream key;
    key << k;
    j[key.str()] = entry;
  }
  return j;
}

}  // namespace

std::string summary_json_text(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  Json j;
  j["schema"] = "1";
  Json cfg;
  cfg["kind"] = kind_name(c.kind);
  cfg["ns"] = c.Ns;
  cfg["replicates"] = c.replicates;
  cfg["seed"] = c.seed;
  cfg["centering"] =
      c.centering == ExperimentConfig::Centering::empirical ? "empirical" : "formula";
  cfg["top_k"] = c.top_k;
  cfg["resample_pass2"] = c.resample_pass2;
  j["config"] = cfg;
  Json per = Json::array();
  for (const PerNSummary& sn : result.per_n) {
    Json e;
    e["N"] = sn.N;
    e["reps"] = sn.reps;
    e["center"] = sn.center;
    e["mean_max"] = sn.mean_max;
    e["se_max"] = sn.se_max;
    e["sd_max"] = sn.sd_max;
    if (result.config.stat_gap) {
      e["mean_gap"] = sn.mean_gap;
      e["se_gap"] = sn.se_gap;
    }
    if (!sn.near_mean.empty()) e["near_max"] = stat_json(sn.near_mean, sn.near_se);
    if (!sn.pair_mean.empty()) e["pair_max"] = stat_json(sn.pair_mean, sn.pair_se);
    if (!sn.topm_mean.empty()) e["top_m"] = stat_json(sn.topm_mean, sn.topm_se);
    if (!sn.xs_mean.empty()) e["level_counts"] = stat_json(sn.xs_mean, sn.xs_se);
    if (!sn.tails.empty()) {
      Json tails = Json::array();
      for (const TailEstimate& t : sn.tails) tails.push_back(tail_json(t));
      e["tails"] = tails;
    }
    per.push_back(e);
  }
  j["per_n"] = per;
  return j.dump(2) + "\n";
}

GeometryReport geometry_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.geometry_r.empty())
    throw std::invalid_argument("geometry_experiment: empty geometry grids");
  if (config.Ns.size() != 1)
    throw std::invalid_argument("geometry_experiment: exactly one N expected");
  const int N = config.Ns.front();

  std::vector<RepRow> rows = pass1(config, N, /*keep_topk=*/true);
  std::string csv = csv_header(config);
  append_csv_rows(csv, config, N, rows);
  if (!config.csv_path.empty()) write_text_file(config.csv_path, csv);

  MeanVar mv_max;
  for (const RepRow& r : rows) mv_max.add(r.max);
  const double center = config.centering == ExperimentConfig::Centering::empirical
                            ? mv_max.mean()
                            : formula_center(config.kind, N);

  const std::vector<int>& rg = config.geometry_r;
  // Deepest value still covered by this replicate's top-K: a miss is only
  // certifiable when every candidate at the threshold was retained.
  std::vector<std::vector<double>> best_minval(
      rows.size(), std::vector<double>(rg.size(),
                                       -std::numeric_limits<double>::infinity()));
  for (std::size_t rep = 0; rep < rows.size(); ++rep) {
    const auto& tk = rows[rep].topk;
    for (std::size_t i = 0; i < tk.size(); ++i)
      for (std::size_t j = i + 1; j < tk.size(); ++j) {
        const double mn = std::min(tk[i].first, tk[j].first);
        double d = std::hypot(static_cast<double>(tk[i].second.x - tk[j].second.x),
                              static_cast<double>(tk[i].second.y - tk[j].second.y));
        for (std::size_t ri = 0; ri < rg.size(); ++ri) {
          if (d >= rg[ri] && d <= static_cast<double>(N) / rg[ri])
            if (mn > best_minval[rep][ri]) best_minval[rep][ri] = mn;
        }
      }
  }

  GeometryReport rep;
  rep.N = N;
  rep.reps = config.replicates;
  rep.center = center;
  rep.r_grid = rg;
  rep.c_grid = config.geometry_c;
  const std::size_t total = static_cast<std::size_t>(N) * N;
  for (double cc : config.geometry_c) {
    std::vector<double> prow, serow;
    for (std::size_t ri = 0; ri < rg.size(); ++ri) {
      const double thr = center - cc * std::log(std::log(static_cast<double>(rg[ri])));
      long hits = 0;
      for (std::size_t r2 = 0; r2 < rows.size(); ++r2) {
        const bool hit = best_minval[r2][ri] >= thr;
        if (hit) {
          ++hits;
          continue;
        }
        const auto& tk = rows[r2].topk;
        if (!tk.empty() && tk.back().first >= thr && tk.size() < total)
          throw std::runtime_error(
              "geometry_experiment: top-K=" + std::to_string(config.top_k) +
              " cannot certify a miss at r=" + std::to_string(rg[ri]) +
              ", c=" + fmt_double(cc) + " (replicate " + std::to_string(r2) +
              "); raise top_k");
      }
      const double p = static_cast<double>(hits) / config.replicates;
      prow.push_back(p);
      serow.push_back(std::sqrt(p * (1.0 - p) / config.replicates));
    }
    rep.p.push_back(prow);
    rep.se.push_back(serow);
  }
  if (!config.json_path.empty())
    write_text_file(config.json_path, geometry_json_text(rep));
  return rep;
}

std::string geometry_json_text(const GeometryReport& report) {
  Json j;
  j["schema"] = "1";
  j["N"] = report.N;
  j["reps"] = report.reps;
  j["center"] = report.center;
  j["r_grid"] = report.r_grid;
  j["c_grid"] = report.c_grid;
  j["p"] = report.p;
  j["se"] = report.se;
  return j.dump(2) + "\n";
}

}  // namespace gfe
