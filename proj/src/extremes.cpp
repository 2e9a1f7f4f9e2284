// Extreme statistics of sampled fields: max/gap/top-k, restricted pair maxima,
// near-max counts, BRW level counts and split-constrained pair maxima.

#include "gfe/extremes.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "gfe/constants.hpp"

namespace gfe {

namespace {

// Canonical pair order: both pairs as (lex-min vertex, lex-max vertex).
std::pair<Vertex, Vertex> canonical(Vertex a, Vertex b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

bool pair_less(const std::pair<Vertex, Vertex>& p, const std::pair<Vertex, Vertex>& q) {
  return p < q;
}

double pair_distance(Vertex u, Vertex v, int N, Metric metric) {
  if (metric == Metric::torus) return torus_distance(u, v, N);
  return std::hypot(static_cast<double>(u.x - v.x), static_cast<double>(u.y - v.y));
}

}  // namespace

ExtremeSummary summarize(const Field& f, int top_k, double center,
                         const std::vector<double>& lambda_grid) {
  f.require_square();
  const int N = f.N;
  const std::size_t total = f.values.size();
  if (top_k < 2) throw std::invalid_argument("summarize: top_k must be >= 2");
  if (static_cast<std::size_t>(top_k) > total)
    top_k = static_cast<int>(total);
  if (top_k < 2) throw std::invalid_argument("summarize: field too small for top-2");

  // K-th largest value by selection, then exact sort of the short candidate list.
  std::vector<double> vals(f.values);
  std::nth_element(vals.begin(), vals.begin() + (top_k - 1), vals.end(),
                   std::greater<double>());
  const double kth = vals[top_k - 1];

  ExtremeSummary s;
  s.center = center;
  std::vector<std::pair<double, Vertex>> cand;
  cand.reserve(static_cast<std::size_t>(top_k) * 2);
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      const double v = f.values[static_cast<std::size_t>(x) * N + y];
      if (v >= kth) cand.emplace_back(v, Vertex{x, y});
    }
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  cand.resize(top_k);
  s.top_k = std::move(cand);
  s.max = s.top_k[0].first;
  s.argmax = s.top_k[0].second;
  s.gap = s.max - s.top_k[1].first;

  if (!lambda_grid.empty()) {
    std::vector<double> lams(lambda_grid);
    std::sort(lams.begin(), lams.end());
    for (double lam : lams) {
      const double thr = center - lam;
      long count = 0;
      for (double v : f.values)
        if (v >= thr) ++count;
      s.near_max_counts[lam] = count;
    }
  }
  return s;
}

PairMaxResult pair_max_restricted(const Field& f, int r, Metric metric) {
  f.require_square();
  const int N = f.N;
  if (r < 1) throw std::invalid_argument("pair_max_restricted: r must be >= 1");
  if (static_cast<long long>(r) * r > N)
    throw std::invalid_argument("pair_max_restricted: r^2 must be <= N");
  const double d_lo = r;
  const double d_hi = static_cast<double>(N) / r;

  std::vector<std::pair<double, Vertex>> sorted;
  sorted.reserve(f.values.size());
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y)
      sorted.emplace_back(f.values[static_cast<std::size_t>(x) * N + y], Vertex{x, y});
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  PairMaxResult best;
  best.r = r;
  best.metric = metric;
  bool found = false;
  // Sorted scan: once value_i + value_0 cannot beat the best, nothing later can.
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (found && sorted[i].first + sorted[0].first < best.value) break;
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double sum = sorted[i].first + sorted[j].first;
      if (found && sum < best.value) break;
      const double d =
          pair_distance(sorted[i].second, sorted[j].second, N, metric);
      if (d < d_lo || d > d_hi) continue;
      auto pr = canonical(sorted[i].second, sorted[j].second);
      if (!found || sum > best.value ||
          (sum == best.value && pair_less(pr, canonical(best.a, best.b)))) {
        best.value = sum;
        best.a = pr.first;
        best.b = pr.second;
        found = true;
      }
    }
  }
  if (!found)
    throw std::runtime_error("pair_max_restricted: no pair in the annulus at r=" +
                             std::to_string(r));
  return best;
}

double sum_top_m(const std::vector<double>& values, int m) {
  if (m < 1 || static_cast<std::size_t>(m) > values.size())
    throw std::invalid_argument("sum_top_m: m out of range");
  std::vector<double> v(values);
  std::nth_element(v.begin(), v.begin() + (m - 1), v.end(), std::greater<double>());
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += v[i];
  return s;
}

NeighborAvgResult neighbor_avg_field(const Field& f) {
  f.require_square();
  if (f.kind != FieldKind::gff)
    throw std::invalid_argument("neighbor_avg_field: requires a GFF-kind field");
  const int N = f.N;
  NeighborAvgResult out;
  out.zeta = f;
  std::fill(out.zeta.values.begin(), out.zeta.values.end(), 0.0);
  for (int x = 1; x + 1 < N; ++x)
    for (int y = 1; y + 1 < N; ++y)
      out.zeta.at(Vertex{x, y}) =
          0.25 * (f.at(Vertex{x - 1, y}) + f.at(Vertex{x + 1, y}) +
                  f.at(Vertex{x, y - 1}) + f.at(Vertex{x, y + 1}));
  bool first = true;
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y) {
      Vertex v{x, y};
      if (!even_vertex(v)) continue;
      const double z = out.zeta.at(v);
      if (first || z > out.max_even) {
        out.max_even = z;
        out.argmax_even = v;
        first = false;
      }
    }
  return out;
}

std::map<int, long> brw_level_counts(const Field& f, const std::vector<int>& xs) {
  f.require_square();
  if (f.kind != FieldKind::brw)
    throw std::invalid_argument("brw_level_counts: requires a BRW-kind field");
  GridSpec grid(f.N);
  const int n = grid.n();
  if (n < 1) throw std::invalid_argument("brw_level_counts: needs N >= 2");
  const double t = constants::t_n(n);
  std::map<int, long> counts;
  for (int x : xs) counts[x] = 0;
  // Value v falls in the window (t - x - 1, t - x] iff x = ceil(t - v).
  for (double v : f.values) {
    const double cx = std::ceil(t - v);
    if (cx < -2.0e9 || cx > 2.0e9) continue;
    auto it = counts.find(static_cast<int>(cx));
    if (it != counts.end()) ++it->second;
  }
  return counts;
}

PairMaxResult brw_pair_max_split(const Field& f, int s_lo, int s_hi) {
  f.require_square();
  if (f.kind != FieldKind::brw)
    throw std::invalid_argument("brw_pair_max_split: requires a BRW-kind field");
  GridSpec grid(f.N);
  const int N = f.N;
  const int n = grid.n();
  if (s_lo < 1 || s_hi > n || s_lo > s_hi)
    throw std::invalid_argument("brw_pair_max_split: split range [" +
                                std::to_string(s_lo) + "," + std::to_string(s_hi) +
                                "] outside [1," + std::to_string(n) + "]");

  // Block maxima with argmax, refined level by level; at level s the best pair
  // inside a block takes the two largest maxima from distinct children.
  struct Cell {
    double v;
    Vertex at;
  };
  std::vector<Cell> cur(f.values.size());
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y)
      cur[static_cast<std::size_t>(x) * N + y] = {f.at(Vertex{x, y}), Vertex{x, y}};

  auto better = [](const Cell& a, const Cell& b) {
    if (a.v != b.v) return a.v > b.v;
    return a.at < b.at;
  };

  PairMaxResult best;
  best.r = s_lo;
  bool found = false;
  int m = N;  // blocks per side at the child level
  for (int s = 1; s <= n; ++s) {
    const int pm = m / 2;  // blocks per side at level s
    std::vector<Cell> nxt(static_cast<std::size_t>(pm) * pm);
    for (int bi = 0; bi < pm; ++bi)
      for (int bj = 0; bj < pm; ++bj) {
        Cell kids[4] = {cur[static_cast<std::size_t>(2 * bi) * m + 2 * bj],
                        cur[static_cast<std::size_t>(2 * bi) * m + 2 * bj + 1],
                        cur[static_cast<std::size_t>(2 * bi + 1) * m + 2 * bj],
                        cur[static_cast<std::size_t>(2 * bi + 1) * m + 2 * bj + 1]};
        std::sort(kids, kids + 4, better);
        if (s >= s_lo && s <= s_hi) {
          const double sum = kids[0].v + kids[1].v;
          auto pr = canonical(kids[0].at, kids[1].at);
          if (!found || sum > best.value ||
              (sum == best.value && pair_less(pr, canonical(best.a, best.b)))) {
            best.value = sum;
            best.a = pr.first;
            best.b = pr.second;
            found = true;
          }
        }
        nxt[static_cast<std::size_t>(bi) * pm + bj] = kids[0];
      }
    cur = std::move(nxt);
    m = pm;
  }
  if (!found) throw std::logic_error("brw_pair_max_split: no candidate found");
  return best;
}

}  // namespace gfe
