// Samplers: Dirichlet GFF (dense and spectral), MBRW on the torus, dyadic BRW.
#pragma once

#include <cstdint>

#include "gfe/field.hpp"
#include "gfe/lattice.hpp"

namespace gfe {

/**
 * GFF on V_N (zero boundary) via the cached dense Cholesky of the Green function.
 * Covariance of the interior values is exactly G.  Requires 3 <= N <= 80.
 */
Field sample_gff_dense(int N, std::uint64_t seed);

/** Same law as sample_gff_dense, via the sine basis and a fast sine transform. */
Field sample_gff_spectral(int N, std::uint64_t seed);

/** Default GFF route: the spectral sampler (same law at every size). */
Field sample_gff(int N, std::uint64_t seed);

/**
 * Modified branching random walk on the N-torus, N = 2^n: level-k contribution is
 * a box sum of iid N(0, 4^-k) torus noise over the side-2^k box at v, summed over
 * k in [k_lo, k_hi].  Variance of each value is k_hi - k_lo + 1.
 */
Field sample_mbrw(int N, std::uint64_t seed, int k_lo, int k_hi);
Field sample_mbrw(int N, std::uint64_t seed);  // full range [0, n]

/** Exact MBRW covariance over the level range (closed form, torus displacement). */
double mbrw_cov_exact(Vertex u, Vertex v, int N, int k_lo, int k_hi);
double mbrw_cov_exact(Vertex u, Vertex v, int N);

/**
 * Dyadic branching random walk on V_N, N = 2^n: one standard Gaussian per dyadic
 * block per level 0..n; value at v sums the blocks containing v.  Variance n + 1,
 * covariance n + 1 - split_level(u, v).
 */
Field sample_brw(int N, std::uint64_t seed);

/** Exact BRW covariance. */
double brw_cov_exact(Vertex u, Vertex v, int N);

}  // namespace gfe
