// Lattice geometry: boxes, torus metric, dyadic block hierarchy.
#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gfe {

struct Vertex {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

inline std::string to_string(const Vertex& v) {
  return "(" + std::to_string(v.x) + "," + std::to_string(v.y) + ")";
}

/** Side-N box V_N = {0,...,N-1}^2 with dyadic structure when N = 2^n. */
struct GridSpec {
  int N = 0;

  explicit GridSpec(int N_) : N(N_) {
    if (N < 1) throw std::invalid_argument("GridSpec: N must be >= 1");
  }

  static bool is_power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

  bool hierarchical() const { return is_power_of_two(N); }

  /** Number of dyadic levels: n with N = 2^n. Requires a hierarchical grid. */
  int n() const {
    if (!hierarchical())
      throw std::invalid_argument("GridSpec: dyadic levels need N = 2^n, got N=" +
                                  std::to_string(N));
    int k = 0;
    while ((1 << k) < N) ++k;
    return k;
  }

  bool contains(Vertex v) const {
    return v.x >= 0 && v.x < N && v.y >= 0 && v.y < N;
  }
  bool is_boundary(Vertex v) const {
    return contains(v) && (v.x == 0 || v.y == 0 || v.x == N - 1 || v.y == N - 1);
  }
  bool is_interior(Vertex v) const { return contains(v) && !is_boundary(v); }

  /** Side length of the interior box (0 when N <= 2). */
  int interior_side() const { return N >= 2 ? N - 2 : 0; }
};

/** Level-k dyadic block: side 2^k, corner at a multiple of 2^k. */
struct DyadicBlock {
  int level = 0;
  Vertex corner;
  friend constexpr auto operator<=>(const DyadicBlock&, const DyadicBlock&) = default;
};

/** Euclidean distance on the N-torus (minimum over the 3x3 shifted copies). */
inline double torus_distance(Vertex u, Vertex v, int N) {
  if (N < 1) throw std::invalid_argument("torus_distance: N must be >= 1");
  int dx = std::abs(u.x - v.x) % N;
  int dy = std::abs(u.y - v.y) % N;
  dx = std::min(dx, N - dx);
  dy = std::min(dy, N - dy);
  return std::hypot(static_cast<double>(dx), static_cast<double>(dy));
}

/** Number of level-k torus-indexed side-2^k boxes containing a fixed vertex: 4^k. */
inline long long boxes_containing_count(Vertex v, int k, const GridSpec& grid) {
  if (!grid.contains(v))
    throw std::invalid_argument("boxes_containing_count: vertex outside grid");
  int n = grid.n();
  if (k < 0 || k > n)
    throw std::invalid_argument("boxes_containing_count: level out of range");
  return 1LL << (2 * k);
}

/** The unique level-k dyadic block containing v. */
inline DyadicBlock dyadic_block(Vertex v, int k, const GridSpec& grid) {
  if (!grid.contains(v))
    throw std::invalid_argument("dyadic_block: vertex outside grid");
  int n = grid.n();
  if (k < 0 || k > n)
    throw std::invalid_argument("dyadic_block: level out of range");
  return DyadicBlock{k, Vertex{(v.x >> k) << k, (v.y >> k) << k}};
}

/** Smallest level at which u and v share a dyadic block. Requires u != v. */
inline int split_level(Vertex u, Vertex v, const GridSpec& grid) {
  if (!grid.contains(u) || !grid.contains(v))
    throw std::invalid_argument("split_level: vertex outside grid");
  if (u == v) throw std::invalid_argument("split_level: u == v has no split level");
  int n = grid.n();
  for (int k = 1; k <= n; ++k)
    if ((u.x >> k) == (v.x >> k) && (u.y >> k) == (v.y >> k)) return k;
  throw std::logic_error("split_level: unreachable");
}

/** Even sublattice V^e: vertices with x + y even. */
inline bool even_vertex(Vertex v) { return ((v.x + v.y) & 1) == 0; }

}  // namespace gfe
