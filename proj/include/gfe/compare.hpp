// Gaussian comparison toolkit: Sudakov-Fernique and Slepian premise checkers,
// the top-m-sum comparison claim, Monte Carlo order checks, field-covariance reports.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gfe/field.hpp"
#include "gfe/lattice.hpp"

namespace gfe {

/** Validated covariance matrix: symmetric, PSD up to pivot tolerance 1e-10. */
struct CovModel {
  Eigen::MatrixXd C;
  std::string label;

  /** Validates and returns the model; throws (never repairs) on failure. */
  static CovModel validated(Eigen::MatrixXd C, std::string label = "");

  int dim() const { return static_cast<int>(C.rows()); }
  /** Factor L with C = L L^T for sampling (within-tolerance pivots clamped to 0). */
  Eigen::MatrixXd sampling_factor() const;
};

/** Result of a pairwise premise scan. */
struct PremiseReport {
  bool pass = false;
  double min_margin = 0.0;  // smallest pairwise slack (negative = violation)
  int worst_a = -1, worst_b = -1;
  std::string detail;
};

/** Sudakov-Fernique premise: E(X_a - X_b)^2 >= E(Y_a - Y_b)^2 for all pairs. */
PremiseReport check_sf_premise(const CovModel& X, const CovModel& Y);

/** Slepian premise: equal variances and E X_a X_b <= E Y_a Y_b off-diagonal. */
PremiseReport check_slepian_premise(const CovModel& X, const CovModel& Y);

struct ClaimResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;  // lhs <= rhs * (1 + 1e-12)
};

/**
 * Deterministic subset-family inequality behind the top-m-sum comparison: with
 * e_A = exp(beta * sum_{a in A} x_a),
 *   (sum over |A| = m) * (sum over |B| = m-2, B avoiding i and j)
 *     <= (sum over |B| = m-1 avoiding i) * (sum over |B| = m-1 avoiding j).
 * Empty families sum to 0; the size-0 family contributes the empty set, weight 1.
 * Requires i != j and n <= 25 (exact enumeration).
 */
ClaimResult claim_inequality_check(const std::vector<double>& x, double beta, int i,
                                   int j, int m);

/** Monte Carlo check that E S_m(X) >= E S_m(Y) for top-m sums. */
struct OrderReport {
  struct Row {
    int m = 0;
    double mean_x = 0.0, mean_y = 0.0;
    double diff = 0.0;     // mean_x - mean_y
    double se_diff = 0.0;  // paired standard error (common random numbers)
    bool pass = false;     // diff >= -3 se_diff
  };
  std::vector<Row> rows;
  bool pass = false;
  long reps = 0;
};

/**
 * Samples X and Y from common standard normals and compares E S_m for each m.
 * Requires the Slepian-style premise (equal variances, Cov X <= Cov Y off-diag).
 */
OrderReport mc_order_compare(const CovModel& X, const CovModel& Y,
                             const std::vector<int>& ms, long reps,
                             std::uint64_t seed);

enum class CompareMode { sf, slepian };

/** One side of a field-covariance comparison. */
struct FieldCovSpec {
  FieldKind kind = FieldKind::gff;
  int N = 0;
  int k_lo = -1, k_hi = -1;  // MBRW level range; -1 means full
  double scale = 1.0;        // field scale factor; covariance scales by scale^2
};

struct FieldCovCompareReport {
  struct Pair {
    Vertex u, v;
    double cov_a = 0.0, cov_b = 0.0;  // scaled cross-covariances
    double var_au = 0.0, var_av = 0.0, var_bu = 0.0, var_bv = 0.0;
    double margin = 0.0;  // mode-dependent premise slack
  };
  CompareMode mode = CompareMode::sf;
  std::vector<Pair> pairs;
  double min_margin = 0.0;
  double max_margin = 0.0;
  bool pass = false;         // all margins >= -1e-9 (and diag match for slepian)
  double fitted_shift = 0.0; // smallest C >= 0 with cov_a >= cov_b - C over the sample
  std::string detail;
};

/**
 * Exact covariances of two field models on a common seeded pair sample
 * (interior vertices when either side is a GFF; identical vertex coordinates on
 * both sides).  Margin per pair: sf mode = increment_a - increment_b; slepian
 * mode = cov_b - cov_a, with the variance match reported separately.
 */
FieldCovCompareReport field_cov_compare(const FieldCovSpec& a, const FieldCovSpec& b,
                                        int pair_count, std::uint64_t seed,
                                        CompareMode mode);

}  // namespace gfe
