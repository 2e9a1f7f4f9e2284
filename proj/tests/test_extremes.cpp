// Extreme-statistic tests against brute-force oracles and constructed fields.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gfe/constants.hpp"
#include "gfe/extremes.hpp"
#include "gfe/rng.hpp"
#include "gfe/samplers.hpp"

using namespace gfe;

namespace {

Field make_manual(FieldKind kind, int N, std::vector<double> values) {
  Field f;
  f.kind = kind;
  f.N = N;
  f.seed = 0;
  if (kind != FieldKind::gff) {
    f.k_lo = 0;
    f.k_hi = GridSpec(N).n();
  }
  f.values = std::move(values);
  f.require_square();
  return f;
}

Field random_field(FieldKind kind, int N, std::uint64_t seed) {
  auto eng = rng::stream(seed, 0, rng::Purpose::scratch);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(N) * N);
  for (double& t : v) t = normal(eng);
  return make_manual(kind, N, std::move(v));
}

// Oracle: max and the largest value at a vertex other than the argmax.
std::pair<double, double> max_and_second_oracle(const Field& f) {
  double best = -1e300;
  Vertex arg{0, 0};
  for (int x = 0; x < f.N; ++x)
    for (int y = 0; y < f.N; ++y) {
      const Vertex v{x, y};
      if (f.at(v) > best || (f.at(v) == best && v < arg)) {
        best = f.at(v);
        arg = v;
      }
    }
  double second = -1e300;
  for (int x = 0; x < f.N; ++x)
    for (int y = 0; y < f.N; ++y)
      if (Vertex{x, y} != arg) second = std::max(second, f.at({x, y}));
  return {best, second};
}

double pair_max_oracle(const Field& f, int r, Metric metric) {
  double best = -1e300;
  for (int ux = 0; ux < f.N; ++ux)
    for (int uy = 0; uy < f.N; ++uy)
      for (int vx = 0; vx < f.N; ++vx)
        for (int vy = 0; vy < f.N; ++vy) {
          const Vertex u{ux, uy}, v{vx, vy};
          if (u == v) continue;
          const double d =
              metric == Metric::torus
                  ? torus_distance(u, v, f.N)
                  : std::hypot(static_cast<double>(ux - vx),
                               static_cast<double>(uy - vy));
          if (d + 1e-12 < r || d - 1e-12 > static_cast<double>(f.N) / r) continue;
          best = std::max(best, f.at(u) + f.at(v));
        }
  return best;
}

double pair_split_oracle(const Field& f, int s_lo, int s_hi) {
  const GridSpec grid(f.N);
  double best = -1e300;
  for (int ux = 0; ux < f.N; ++ux)
    for (int uy = 0; uy < f.N; ++uy)
      for (int vx = 0; vx < f.N; ++vx)
        for (int vy = 0; vy < f.N; ++vy) {
          const Vertex u{ux, uy}, v{vx, vy};
          if (u == v) continue;
          const int s = split_level(u, v, grid);
          if (s < s_lo || s > s_hi) continue;
          best = std::max(best, f.at(u) + f.at(v));
        }
  return best;
}

}  // namespace

TEST_SUITE("extremes") {

TEST_CASE("summarize: constructed fields") {
  const int N = 4;
  Field zero = make_manual(FieldKind::gff, N, std::vector<double>(N * N, 0.0));
  const ExtremeSummary sz = summarize(zero, 3, 0.0, {0.0, 1.0, 2.5});
  CHECK(sz.max == 0.0);
  CHECK(sz.gap == 0.0);
  for (const auto& [lam, count] : sz.near_max_counts) CHECK(count == N * N);

  std::vector<double> vals(N * N, 0.0);
  vals[2 * N + 1] = 5.0;
  Field spike = make_manual(FieldKind::gff, N, vals);
  const ExtremeSummary ss = summarize(spike, 2, 5.0, {1.0});
  CHECK(ss.max == 5.0);
  CHECK(ss.argmax == Vertex{2, 1});
  CHECK(ss.gap == 5.0);
  CHECK(ss.near_max_counts.at(1.0) == 1);

  // Tie at the max: gap 0, lexicographically smallest argmax.
  vals[1 * N + 3] = 5.0;
  Field tie = make_manual(FieldKind::gff, N, vals);
  const ExtremeSummary st = summarize(tie, 4, 0.0);
  CHECK(st.gap == 0.0);
  CHECK(st.argmax == Vertex{1, 3});
  CHECK(st.top_k[0].second == Vertex{1, 3});
  CHECK(st.top_k[1].second == Vertex{2, 1});

  CHECK_THROWS_AS(summarize(zero, 1, 0.0), std::invalid_argument);
}

TEST_CASE("summarize: gap and top-k against the oracle on random fields") {
  for (int t = 0; t < 100; ++t) {
    const Field f = random_field(FieldKind::gff, 5, 9000 + t);
    const auto [mx, second] = max_and_second_oracle(f);
    const ExtremeSummary s = summarize(f, 6, mx, {0.5, 1.0, 1.5});
    CHECK(s.max == mx);
    CHECK(s.gap == doctest::Approx(mx - second).epsilon(1e-14));
    // top_k strictly ordered by (value desc, vertex asc); values match a sort.
    std::vector<double> all(f.values);
    std::sort(all.begin(), all.end(), std::greater<double>());
    for (std::size_t i = 0; i < s.top_k.size(); ++i) {
      CHECK(s.top_k[i].first == all[i]);
      if (i > 0)
        CHECK((s.top_k[i - 1].first > s.top_k[i].first ||
               (s.top_k[i - 1].first == s.top_k[i].first &&
                s.top_k[i - 1].second < s.top_k[i].second)));
    }
    // near-max counts nondecreasing in lambda.
    long prev = -1;
    for (const auto& [lam, count] : s.near_max_counts) {
      CHECK(count >= prev);
      prev = count;
    }
  }
}

TEST_CASE("pair max: spikes and the active constraint") {
  const int N = 8;
  std::vector<double> vals(N * N, 0.0);
  vals[1 * N + 1] = 3.0;
  vals[1 * N + 5] = 2.0;  // distance 4 from the first spike
  Field two = make_manual(FieldKind::gff, N, vals);
  const PairMaxResult pr = pair_max_restricted(two, 2, Metric::plain);
  CHECK(pr.value == 5.0);
  CHECK(pr.a == Vertex{1, 1});
  CHECK(pr.b == Vertex{1, 5});

  std::vector<double> adj(N * N, 0.0);
  adj[3 * N + 3] = 3.0;
  adj[3 * N + 4] = 2.9;  // adjacent: distance 1 < r = 2
  Field near = make_manual(FieldKind::gff, N, adj);
  const PairMaxResult pn = pair_max_restricted(near, 2, Metric::plain);
  CHECK(pn.value < 5.9);
  CHECK(pn.value == pair_max_oracle(near, 2, Metric::plain));
}

TEST_CASE("pair max: brute-force oracle, both metrics") {
  for (int t = 0; t < 12; ++t) {
    const Field f = random_field(FieldKind::gff, 8, 9200 + t);
    for (int r : {1, 2}) {
      for (Metric m : {Metric::plain, Metric::torus}) {
        const PairMaxResult got = pair_max_restricted(f, r, m);
        CHECK(got.value == doctest::Approx(pair_max_oracle(f, r, m)).epsilon(1e-14));
        const double d = m == Metric::torus
                             ? torus_distance(got.a, got.b, f.N)
                             : std::hypot(static_cast<double>(got.a.x - got.b.x),
                                          static_cast<double>(got.a.y - got.b.y));
        CHECK(d >= r - 1e-12);
        CHECK(d <= static_cast<double>(f.N) / r + 1e-12);
      }
    }
  }
  const Field big = random_field(FieldKind::gff, 16, 9400);
  for (int r : {1, 2, 4})
    CHECK(pair_max_restricted(big, r, Metric::plain).value ==
          doctest::Approx(pair_max_oracle(big, r, Metric::plain)).epsilon(1e-14));
  CHECK_THROWS_AS(pair_max_restricted(big, 5, Metric::plain), std::invalid_argument);
  CHECK_THROWS_AS(pair_max_restricted(big, 0, Metric::plain), std::invalid_argument);
}

TEST_CASE("sum of the top m values") {
  CHECK(sum_top_m({3.0, 1.0, 2.0}, 2) == 5.0);
  CHECK(sum_top_m({3.0, 1.0, 2.0}, 3) == 6.0);
  // Random 10-vector, m = 4: brute force over all C(10, 4) subsets.
  auto eng = rng::stream(7, 0, rng::Purpose::scratch);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(10);
  for (double& v : x) v = normal(eng);
  double brute = -1e300;
  for (int mask = 0; mask < (1 << 10); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != 4) continue;
    double s = 0.0;
    for (int i = 0; i < 10; ++i)
      if (mask & (1 << i)) s += x[i];
    brute = std::max(brute, s);
  }
  CHECK(sum_top_m(x, 4) == doctest::Approx(brute).epsilon(1e-14));
  // Concavity: increments are the sorted values, hence nonincreasing.
  double prev_inc = 1e300, prev = 0.0;
  for (int m = 1; m <= 10; ++m) {
    const double cur = sum_top_m(x, m);
    CHECK(cur - prev <= prev_inc + 1e-14);
    prev_inc = cur - prev;
    prev = cur;
  }
  CHECK_THROWS_AS(sum_top_m(x, 0), std::invalid_argument);
  CHECK_THROWS_AS(sum_top_m(x, 11), std::invalid_argument);
}

TEST_CASE("neighbor average: constructed cases") {
  const int N = 6;
  std::vector<double> vals(N * N, 0.0);
  const GridSpec grid(N);
  for (int x = 1; x < N - 1; ++x)
    for (int y = 1; y < N - 1; ++y) vals[x * N + y] = 2.5;  // constant interior
  Field constant = make_manual(FieldKind::gff, N, vals);
  const NeighborAvgResult rc = neighbor_avg_field(constant);
  for (int x = 2; x < N - 2; ++x)
    for (int y = 2; y < N - 2; ++y)
      CHECK(rc.zeta.at({x, y}) == doctest::Approx(2.5).epsilon(1e-15));
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y)
      if (grid.is_boundary({x, y})) CHECK(rc.zeta.at({x, y}) == 0.0);

  std::vector<double> sp(N * N, 0.0);
  sp[3 * N + 3] = 4.0;
  Field spike = make_manual(FieldKind::gff, N, sp);
  const NeighborAvgResult rs = neighbor_avg_field(spike);
  CHECK(rs.zeta.at({2, 3}) == 1.0);
  CHECK(rs.zeta.at({4, 3}) == 1.0);
  CHECK(rs.zeta.at({3, 2}) == 1.0);
  CHECK(rs.zeta.at({3, 4}) == 1.0);
  CHECK(rs.zeta.at({3, 3}) == 0.0);
  // A spike at an even vertex feeds only odd neighbors, so the even max is 0.
  CHECK(rs.max_even == 0.0);

  std::vector<double> sp2(N * N, 0.0);
  sp2[3 * N + 4] = 4.0;  // odd vertex: neighbors are even
  const NeighborAvgResult rs2 = neighbor_avg_field(make_manual(FieldKind::gff, N, sp2));
  CHECK(rs2.max_even == 1.0);
  CHECK(even_vertex(rs2.argmax_even));
  CHECK(rs2.zeta.at(rs2.argmax_even) == 1.0);

  Field wrong = random_field(FieldKind::mbrw, 8, 1);
  CHECK_THROWS_AS(neighbor_avg_field(wrong), std::invalid_argument);
}

TEST_CASE("neighbor average: even-sublattice max tracks the field max at N=64") {
  // Joint Monte Carlo at N = 64, 2000 replicates: the even-sublattice max of the
  // neighbor average should sit within 1.0 of the field max on average, and the
  // mean max itself within 1.5 of the closed-form centering.
  const int N = 64;
  const long reps = 2000;
  double sum_max = 0.0, sum_even = 0.0;
  for (long r = 0; r < reps; ++r) {
    const Field f = sample_gff(N, rng::field_seed(20260812, 0, N, r));
    sum_max += summarize(f, 2, 0.0).max;
    sum_even += neighbor_avg_field(f).max_even;
  }
  const double mean_max = sum_max / reps;
  const double mean_even = sum_even / reps;
  CAPTURE(mean_max);
  CAPTURE(mean_even);
  CAPTURE(constants::m_n(N));
  CHECK(std::abs(mean_max - constants::m_n(N)) <= 1.5);
  CHECK(std::abs(mean_even - mean_max) <= 1.0);
}

TEST_CASE("brw level counts: tiling and empty windows") {
  const Field f = sample_brw(16, 2026);
  const int n = 4;
  const double t = constants::t_n(n);
  double lo = 1e300, hi = -1e300;
  for (double v : f.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Windows (t - x - 1, t - x] tile the line; x = ceil(t - v) catches v.
  std::vector<int> xs;
  for (int x = static_cast<int>(std::ceil(t - hi)); x <= std::ceil(t - lo); ++x)
    xs.push_back(x);
  const auto counts = brw_level_counts(f, xs);
  long total = 0;
  for (const auto& [x, c] : counts) total += c;
  CHECK(total == 16 * 16);
  // A window far above the sample max is empty.
  const auto none = brw_level_counts(f, {static_cast<int>(std::ceil(t - hi)) - 5});
  CHECK(none.begin()->second == 0);

  Field wrong = random_field(FieldKind::gff, 8, 2);
  CHECK_THROWS_AS(brw_level_counts(wrong, {0}), std::invalid_argument);
}

TEST_CASE("brw pair max by split level: oracle and trivial ranges") {
  const GridSpec grid(8);
  for (int t = 0; t < 10; ++t) {
    const Field f =
        t < 5 ? sample_brw(8, 300 + t) : random_field(FieldKind::brw, 8, 300 + t);
    for (const auto& [lo, hi] : std::vector<std::pair<int, int>>{
             {1, 3}, {1, 1}, {2, 3}, {3, 3}, {2, 2}}) {
      const PairMaxResult got = brw_pair_max_split(f, lo, hi);
      CHECK(got.value == doctest::Approx(pair_split_oracle(f, lo, hi)).epsilon(1e-14));
      const int s = split_level(got.a, got.b, grid);
      CHECK(s >= lo);
      CHECK(s <= hi);
    }
    // Unconstrained range: the top two values at distinct vertices.
    const ExtremeSummary sm = summarize(f, 2, 0.0);
    CHECK(brw_pair_max_split(f, 1, 3).value ==
          doctest::Approx(2.0 * sm.max - sm.gap).epsilon(1e-13));
  }
  const Field f = sample_brw(16, 77);
  CHECK(brw_pair_max_split(f, 1, 4).value ==
        doctest::Approx(pair_split_oracle(f, 1, 4)).epsilon(1e-14));
  CHECK_THROWS_AS(brw_pair_max_split(f, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(brw_pair_max_split(f, 2, 5), std::invalid_argument);
  CHECK_THROWS_AS(brw_pair_max_split(f, 3, 2), std::invalid_argument);
}

}  // TEST_SUITE
