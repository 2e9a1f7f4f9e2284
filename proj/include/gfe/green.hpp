// Green function of SRW killed on the boundary of V_N; resistances; covariance profile.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "gfe/lattice.hpp"

namespace gfe {

// Dense (I - P) factorizations above this side length would not fit in memory;
// larger boxes are served by the matrix-free conjugate-gradient routes below.
inline constexpr int kDenseGreenLimit = 80;

/** Dense Green function over the interior of V_N (expected visit counts). */
struct GreenOperator {
  int N = 0;                 // box side
  int M = 0;                 // interior side N - 2
  Eigen::MatrixXd G;         // M^2 x M^2, indexed by interior row-major rank

  /** Rank of an interior vertex. */
  int index(Vertex v) const;
  Vertex vertex(int rank) const;
  double entry(Vertex u, Vertex v) const;  // 0 if either vertex is non-interior
};

/** Build the dense Green function by Cholesky of (I - P). Requires 3 <= N <= 80. */
GreenOperator build_green(int N);

/** Max abs entry of (I - P) G - I, by sparse application of the stencil. */
double green_residual(const GreenOperator& g);

/** Monte Carlo visit-count estimate of G(x, y): returns (mean, standard error). */
std::pair<double, double> green_mc_oracle(int N, Vertex x, Vertex y, long walks,
                                          std::uint64_t seed);

/** One column G(., y) via conjugate gradient on (I - P); works past the dense
 *  limit.  Interior-indexed: entry (x.x - 1) * (N - 2) + (x.y - 1) is G(x, y). */
std::vector<double> green_column_cg(int N, Vertex y, double tol = 1e-12);

/** Effective resistance between interior u and v, unit conductances, matrix-free. */
double effective_resistance(int N, Vertex u, Vertex v);

/** Effective resistance between v and the wired boundary of V_N. */
double boundary_resistance(int N, Vertex v);

/** Worst deviation of the covariance from the log-distance profile. */
struct CovProfileReport {
  int box_side = 0;        // the enclosing box V_{4N}
  int sub_side = 0;        // the centered sub-box side N
  double c_emp = 0.0;      // max |cov - slope * (log2 N - log2+ |u-v|)|
  Vertex worst_u, worst_v;
  double worst_cov = 0.0;
  double worst_pred = 0.0;
  int vertices = 0;
  int pairs = 0;
};

/**
 * Check Cov(eta_u, eta_v) against (2 log 2 / pi)(log2 N - log2+ |u-v|) over the
 * centered side-N sub-box of V_{4N}.  Vertices: the full sub-box when it has at
 * most max_vertices points, otherwise corners + center + a seeded sample.
 * Requires 4N <= 256.
 */
CovProfileReport gff_cov_profile_check(int N, int max_vertices = 256,
                                       std::uint64_t seed = 1);

}  // namespace gfe
