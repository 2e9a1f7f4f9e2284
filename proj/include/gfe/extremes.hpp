// Extreme-value statistics of one sampled field: max, gap, top-k, near-max sets,
// restricted pair maxima, level-count windows.
#pragma once

#include <map>
#include <utility>
#include <vector>

#include "gfe/field.hpp"
#include "gfe/lattice.hpp"

namespace gfe {

/** Distance convention for pair statistics. */
enum class Metric { plain, torus };

struct ExtremeSummary {
  double max = 0.0;
  Vertex argmax;                 // lexicographically smallest among ties
  double gap = 0.0;              // max minus second-largest value (0 on ties)
  double center = 0.0;           // the centering used for near-max counts
  std::vector<std::pair<double, Vertex>> top_k;  // value-descending, ties by vertex
  std::map<double, long> near_max_counts;        // lambda -> #{v : eta_v >= center - lambda}
};

/**
 * One-pass summary.  top_k >= 2 required (clamped to N^2); near-max counts are
 * computed for each lambda in the grid against the supplied center.
 */
ExtremeSummary summarize(const Field& f, int top_k, double center,
                         const std::vector<double>& lambda_grid = {});

struct PairMaxResult {
  double value = 0.0;  // eta_a + eta_b
  Vertex a, b;
  int r = 0;           // annulus parameter (split range start for the BRW variant)
  Metric metric = Metric::plain;
};

/**
 * max { eta_u + eta_v : r <= d(u,v) <= N/r } via a sorted-scan with pruning.
 * Requires 1 <= r and r^2 <= N.
 */
PairMaxResult pair_max_restricted(const Field& f, int r, Metric metric);

/** Sum of the m largest values.  Requires 1 <= m <= values.size(). */
double sum_top_m(const std::vector<double>& values, int m);

struct NeighborAvgResult {
  Field zeta;          // zeta_v = quarter sum of the four lattice neighbors
  double max_even = 0.0;  // max of zeta over the even sublattice
  Vertex argmax_even;
};

/** Neighbor-averaged field of a zero-boundary field (off-grid neighbors count 0). */
NeighborAvgResult neighbor_avg_field(const Field& f);

/**
 * BRW level counts: for each x in xs, #{v : t_n - x - 1 < eta_v <= t_n - x}.
 * The half-open windows tile the line, so the counts over all integers x sum to N^2.
 */
std::map<int, long> brw_level_counts(const Field& f, const std::vector<int>& xs);

/**
 * max over levels s in [s_lo, s_hi] and level-s blocks B of
 * max_u eta_u + max_v eta_v with u, v in distinct level-(s-1) children of B.
 * Such a pair has split level exactly s.  Requires 1 <= s_lo <= s_hi <= n.
 */
PairMaxResult brw_pair_max_split(const Field& f, int s_lo, int s_hi);

}  // namespace gfe
