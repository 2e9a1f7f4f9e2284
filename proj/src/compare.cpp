// Gaussian comparison: premise checks, the subset-family claim, MC order checks.

#include "gfe/compare.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "gfe/green.hpp"
#include "gfe/rng.hpp"
#include "gfe/samplers.hpp"

namespace gfe {

namespace {

constexpr double kPivotTol = 1e-10;

void require_same_dim(const CovModel& X, const CovModel& Y, const char* who) {
  if (X.dim() != Y.dim())
    throw std::invalid_argument(std::string(who) + ": size mismatch " +
                                std::to_string(X.dim()) + " vs " +
                                std::to_string(Y.dim()));
}

double increment(const Eigen::MatrixXd& C, int a, int b) {
  return C(a, a) + C(b, b) - 2.0 * C(a, b);
}

}  // namespace

CovModel CovModel::validated(Eigen::MatrixXd C, std::string label) {
  if (C.rows() != C.cols() || C.rows() < 1)
    throw std::invalid_argument("CovModel: matrix must be square and nonempty");
  const double scale = std::max(1.0, C.cwiseAbs().maxCoeff());
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > kPivotTol * scale)
    throw std::invalid_argument("CovModel: matrix not symmetric");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
  if (ldlt.info() != Eigen::Success)
    throw std::invalid_argument("CovModel: factorization failed");
  const double min_pivot = ldlt.vectorD().minCoeff();
  if (min_pivot < -kPivotTol * scale)
    throw std::invalid_argument("CovModel: not PSD (pivot " +
                                std::to_string(min_pivot) + ")");
  CovModel m;
  m.C = std::move(C);
  m.label = std::move(label);
  return m;
}

Eigen::MatrixXd CovModel::sampling_factor() const {
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Semidefinite within tolerance: LDLT with negative pivots clamped to zero.
  Eigen::LDLT<Eigen::MatrixXd> ldlt(C);
  Eigen::MatrixXd L = ldlt.matrixL();
  Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd F = L * d.asDiagonal();
  return ldlt.transpositionsP().transpose() * F;
}

PremiseReport check_sf_premise(const CovModel& X, const CovModel& Y) {
  require_same_dim(X, Y, "check_sf_premise");
  const int n = X.dim();
  const double scale =
      std::max({1.0, X.C.cwiseAbs().maxCoeff(), Y.C.cwiseAbs().maxCoeff()});
  PremiseReport rep;
  rep.pass = true;
  bool first = true;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double margin = increment(X.C, a, b) - increment(Y.C, a, b);
      if (first || margin < rep.min_margin) {
        rep.min_margin = margin;
        rep.worst_a = a;
        rep.worst_b = b;
        first = false;
      }
    }
  if (n == 1) rep.min_margin = 0.0;
  rep.pass = rep.min_margin >= -1e-12 * scale;
  rep.detail = rep.pass ? "increment domination holds"
                        : "increment violated at pair (" +
                              std::to_string(rep.worst_a) + "," +
                              std::to_string(rep.worst_b) + ")";
  return rep;
}

PremiseReport check_slepian_premise(const CovModel& X, const CovModel& Y) {
  require_same_dim(X, Y, "check_slepian_premise");
  const int n = X.dim();
  for (int a = 0; a < n; ++a) {
    if (std::abs(X.C(a, a) - Y.C(a, a)) > 1e-12) {
      PremiseReport rep;
      rep.pass = false;
      rep.worst_a = rep.worst_b = a;
      rep.min_margin = -(std::abs(X.C(a, a) - Y.C(a, a)));
      rep.detail = "variance mismatch at index " + std::to_string(a);
      return rep;
    }
  }
  PremiseReport rep = check_sf_premise(X, Y);
  rep.detail = rep.pass ? "equal variances and off-diagonal domination hold"
                        : "off-diagonal covariance violated at pair (" +
                              std::to_string(rep.worst_a) + "," +
                              std::to_string(rep.worst_b) + ")";
  return rep;
}

ClaimResult claim_inequality_check(const std::vector<double>& x, double beta, int i,
                                   int j, int m) {
  const int n = static_cast<int>(x.size());
  if (n < 1 || n > 20)
    throw std::invalid_argument("claim_inequality_check: need 1 <= n <= 20");
  if (m < 1 || m > n) throw std::invalid_argument("claim_inequality_check: bad m");
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("claim_inequality_check: index out of range");
  if (i == j) throw std::invalid_argument("claim_inequality_check: i == j");

  const std::uint32_t bit_i = 1u << i, bit_j = 1u << j;
  const std::uint32_t top = 1u << n;
  // Subset sums by peeling the lowest set bit.
  std::vector<double> sum(top, 0.0);
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    const int low = std::countr_zero(mask);
    sum[mask] = sum[mask & (mask - 1)] + x[low];
  }
  double all_m = 0.0, excl_ij = 0.0, excl_i = 0.0, excl_j = 0.0;
  for (std::uint32_t mask = 0; mask < top; ++mask) {
    const int s = std::popcount(mask);
    if (s > m) continue;
    const double e = std::exp(beta * sum[mask]);
    if (s == m) all_m += e;
    if (s == m - 2 && !(mask & bit_i) && !(mask & bit_j)) excl_ij += e;
    if (s == m - 1) {
      if (!(mask & bit_i)) excl_i += e;
      if (!(mask & bit_j)) excl_j += e;
    }
  }
  ClaimResult res;
  res.lhs = all_m * excl_ij;  // the size-(m-2) family is empty for m = 1
  res.rhs = excl_i * excl_j;
  res.pass = res.lhs <= res.rhs * (1.0 + 1e-12);
  return res;
}

OrderReport mc_order_compare(const CovModel& X, const CovModel& Y,
                             const std::vector<int>& ms, long reps,
                             std::uint64_t seed) {
  require_same_dim(X, Y, "mc_order_compare");
  if (reps < 1) throw std::invalid_argument("mc_order_compare: reps must be >= 1");
  const int n = X.dim();
  for (int m : ms)
    if (m < 1 || m > n)
      throw std::invalid_argument("mc_order_compare: m out of range");
  PremiseReport premise = check_slepian_premise(X, Y);
  if (!premise.pass)
    throw std::invalid_argument("mc_order_compare: premise failure: " +
                                premise.detail);

  const Eigen::MatrixXd Fx = X.sampling_factor();
  const Eigen::MatrixXd Fy = Y.sampling_factor();
  auto gen = rng::stream(seed, 0, rng::Purpose::compare);
  std::normal_distribution<double> dist;

  const std::size_t mcount = ms.size();
  std::vector<double> sx_sum(mcount, 0.0), sy_sum(mcount, 0.0);
  std::vector<double> d_sum(mcount, 0.0), d_sumsq(mcount, 0.0);
  Eigen::VectorXd z(n), xv(n), yv(n);
  std::vector<double> xs(n), ys(n);
  for (long rep = 0; rep < reps; ++rep) {
    for (int t = 0; t < n; ++t) z(t) = dist(gen);
    xv.noalias() = Fx * z;
    yv.noalias() = Fy * z;
    for (int t = 0; t < n; ++t) {
      xs[t] = xv(t);
      ys[t] = yv(t);
    }
    std::sort(xs.begin(), xs.end(), std::greater<double>());
    std::sort(ys.begin(), ys.end(), std::greater<double>());
    // Prefix sums of the sorted values give every S_m at once.
    std::vector<double> prefx(n + 1, 0.0), prefy(n + 1, 0.0);
    for (int t = 0; t < n; ++t) {
      prefx[t + 1] = prefx[t] + xs[t];
      prefy[t + 1] = prefy[t] + ys[t];
    }
    for (std::size_t mi = 0; mi < mcount; ++mi) {
      const double sx = prefx[ms[mi]];
      const double sy = prefy[ms[mi]];
      const double d = sx - sy;
      sx_sum[mi] += sx;
      sy_sum[mi] += sy;
      d_sum[mi] += d;
      d_sumsq[mi] += d * d;
    }
  }

  OrderReport rep;
  rep.reps = reps;
  rep.pass = true;
  for (std::size_t mi = 0; mi < mcount; ++mi) {
    OrderReport::Row row;
    row.m = ms[mi];
    row.mean_x = sx_sum[mi] / reps;
    row.mean_y = sy_sum[mi] / reps;
    row.diff = d_sum[mi] / reps;
    const double var =
        std::max(0.0, d_sumsq[mi] / reps - row.diff * row.diff);
    row.se_diff = std::sqrt(var / reps);
    row.pass = row.diff >= -3.0 * row.se_diff;
    rep.pass = rep.pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

// Exact covariance evaluator for one field model.
struct CovEval {
  FieldCovSpec spec;
  std::shared_ptr<const GreenOperator> green;  // GFF only

  static CovEval make(const FieldCovSpec& s) {
    CovEval e;
    e.spec = s;
    if (s.N < 1) throw std::invalid_argument("field_cov_compare: bad N");
    if (s.kind == FieldKind::gff) {
      if (s.N > kDenseGreenLimit)
        throw std::invalid_argument(
            "field_cov_compare: GFF covariance unevaluable past the dense limit");
      e.green = std::make_shared<GreenOperator>(build_green(s.N));
    } else {
      GridSpec grid(s.N);
      (void)grid.n();  // hierarchical sizes only
    }
    return e;
  }

  double cov(Vertex u, Vertex v) const {
    const double s2 = spec.scale * spec.scale;
    switch (spec.kind) {
      case FieldKind::gff:
        return s2 * green->entry(u, v);
      case FieldKind::mbrw: {
        GridSpec grid(spec.N);
        const int lo = spec.k_lo < 0 ? 0 : spec.k_lo;
        const int hi = spec.k_hi < 0 ? grid.n() : spec.k_hi;
        return s2 * mbrw_cov_exact(u, v, spec.N, lo, hi);
      }
      case FieldKind::brw:
        return s2 * brw_cov_exact(u, v, spec.N);
    }
    return 0.0;
  }
};

}  // namespace

FieldCovCompareReport field_cov_compare(const FieldCovSpec& a, const FieldCovSpec& b,
                                        int pair_count, std::uint64_t seed,
                                        CompareMode mode) {
  if (pair_count < 1)
    throw std::invalid_argument("field_cov_compare: pair_count must be >= 1");
  if (a.N != b.N)
    throw std::invalid_argument("field_cov_compare: sides must share one grid size");
  CovEval ea = CovEval::make(a);
  CovEval eb = CovEval::make(b);

  // Common vertex sample; interior coordinates whenever a GFF participates.
  const bool interior = a.kind == FieldKind::gff || b.kind == FieldKind::gff;
  const int lo = interior ? 1 : 0;
  const int hi = interior ? a.N - 2 : a.N - 1;
  if (hi < lo) throw std::invalid_argument("field_cov_compare: grid too small");
  auto gen = rng::stream(seed, a.N, rng::Purpose::compare);
  std::uniform_int_distribution<int> coord(lo, hi);

  FieldCovCompareReport rep;
  rep.mode = mode;
  bool diag_ok = true;
  bool first = true;
  for (int t = 0; t < pair_count; ++t) {
    Vertex u{coord(gen), coord(gen)};
    Vertex v{coord(gen), coord(gen)};
    while (v == u) v = Vertex{coord(gen), coord(gen)};
    FieldCovCompareReport::Pair pr;
    pr.u = u;
    pr.v = v;
    pr.cov_a = ea.cov(u, v);
    pr.cov_b = eb.cov(u, v);
    pr.var_au = ea.cov(u, u);
    pr.var_av = ea.cov(v, v);
    pr.var_bu = eb.cov(u, u);
    pr.var_bv = eb.cov(v, v);
    if (mode == CompareMode::sf) {
      pr.margin = (pr.var_au + pr.var_av - 2.0 * pr.cov_a) -
                  (pr.var_bu + pr.var_bv - 2.0 * pr.cov_b);
    } else {
      pr.margin = pr.cov_b - pr.cov_a;
      if (std::abs(pr.var_au - pr.var_bu) > 1e-9 ||
          std::abs(pr.var_av - pr.var_bv) > 1e-9)
        diag_ok = false;
    }
    if (first || pr.margin < rep.min_margin) rep.min_margin = pr.margin;
    if (first || pr.margin > rep.max_margin) rep.max_margin = pr.margin;
    rep.fitted_shift = std::max(rep.fitted_shift, pr.cov_b - pr.cov_a);
    rep.pairs.push_back(pr);
    first = false;
  }
  rep.fitted_shift = std::max(0.0, rep.fitted_shift);
  rep.pass = rep.min_margin >= -1e-9 && (mode == CompareMode::sf || diag_ok);
  rep.detail = mode == CompareMode::slepian && !diag_ok
                   ? "variance mismatch between the two sides"
                   : (rep.pass ? "premise holds over the sample"
                               : "premise violated on at least one pair");
  return rep;
}

}  // namespace gfe
