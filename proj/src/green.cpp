// Green function, resistances, and the log-distance covariance profile check.

#include "gfe/green.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gfe/constants.hpp"
#include "gfe/rng.hpp"

namespace gfe {

namespace {

void require_interior(const GridSpec& grid, Vertex v, const char* who) {
  if (!grid.is_interior(v))
    throw std::invalid_argument(std::string(who) + ": vertex " + to_string(v) +
                                " not interior to V_" + std::to_string(grid.N));
}

// y = (I - P) x on interior vectors, absorbing boundary (Dirichlet zero).
void apply_ImP(int M, const std::vector<double>& x, std::vector<double>& y) {
  auto idx = [M](int i, int j) { return static_cast<std::size_t>(i) * M + j; };
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double nb = 0.0;
      if (i > 0) nb += x[idx(i - 1, j)];
      if (i < M - 1) nb += x[idx(i + 1, j)];
      if (j > 0) nb += x[idx(i, j - 1)];
      if (j < M - 1) nb += x[idx(i, j + 1)];
      y[idx(i, j)] = x[idx(i, j)] - 0.25 * nb;
    }
}

// Conjugate gradient for (I - P) x = b; the operator is SPD on interior vectors.
std::vector<double> solve_ImP_cg(int M, const std::vector<double>& b, double tol) {
  const std::size_t sz = b.size();
  std::vector<double> x(sz, 0.0), r = b, p = b, Ap(sz);
  double rr = 0.0, bb = 0.0;
  for (std::size_t t = 0; t < sz; ++t) {
    rr += r[t] * r[t];
    bb += b[t] * b[t];
  }
  if (bb == 0.0) return x;
  const double stop = tol * tol * bb;
  const int max_iter = 20 * M + 200;
  for (int it = 0; it < max_iter && rr > stop; ++it) {
    apply_ImP(M, p, Ap);
    double pAp = 0.0;
    for (std::size_t t = 0; t < sz; ++t) pAp += p[t] * Ap[t];
    const double alpha = rr / pAp;
    double rr_next = 0.0;
    for (std::size_t t = 0; t < sz; ++t) {
      x[t] += alpha * p[t];
      r[t] -= alpha * Ap[t];
      rr_next += r[t] * r[t];
    }
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t t = 0; t < sz; ++t) p[t] = r[t] + beta * p[t];
  }
  if (rr > stop) throw std::runtime_error("solve_ImP_cg: no convergence");
  return x;
}

}  // namespace

int GreenOperator::index(Vertex v) const {
  return (v.x - 1) * M + (v.y - 1);
}

Vertex GreenOperator::vertex(int rank) const {
  return Vertex{rank / M + 1, rank % M + 1};
}

double GreenOperator::entry(Vertex u, Vertex v) const {
  GridSpec grid(N);
  if (!grid.is_interior(u) || !grid.is_interior(v)) return 0.0;
  return G(index(u), index(v));
}

GreenOperator build_green(int N) {
  if (N < 3) throw std::invalid_argument("build_green: N must be >= 3");
  if (N > kDenseGreenLimit)
    throw std::invalid_argument("build_green: N over the dense limit " +
                                std::to_string(kDenseGreenLimit));
  const int M = N - 2;
  const int sz = M * M;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sz, sz);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const int r = i * M + j;
      A(r, r) = 1.0;
      if (i > 0) A(r, r - M) = -0.25;
      if (i < M - 1) A(r, r + M) = -0.25;
      if (j > 0) A(r, r - 1) = -0.25;
      if (j < M - 1) A(r, r + 1) = -0.25;
    }
  GreenOperator g;
  g.N = N;
  g.M = M;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("build_green: factorization failed");
  g.G = llt.solve(Eigen::MatrixXd::Identity(sz, sz));
  // Exact symmetry for downstream consumers (solve leaves ~1e-15 asymmetry).
  g.G = 0.5 * (g.G + g.G.transpose()).eval();
  return g;
}

double green_residual(const GreenOperator& g) {
  const int M = g.M;
  const int sz = M * M;
  std::vector<double> col(sz), out(sz);
  double worst = 0.0;
  for (int c = 0; c < sz; ++c) {
    for (int r = 0; r < sz; ++r) col[r] = g.G(r, c);
    apply_ImP(M, col, out);
    for (int r = 0; r < sz; ++r) {
      const double want = (r == c) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(out[r] - want));
    }
  }
  return worst;
}

std::pair<double, double> green_mc_oracle(int N, Vertex x, Vertex y, long walks,
                                          std::uint64_t seed) {
  GridSpec grid(N);
  require_interior(grid, x, "green_mc_oracle");
  require_interior(grid, y, "green_mc_oracle");
  if (walks < 1) throw std::invalid_argument("green_mc_oracle: walks must be >= 1");
  auto gen = rng::stream(seed, 0, rng::Purpose::walk);
  std::uniform_int_distribution<int> step(0, 3);
  static constexpr int dx[4] = {1, -1, 0, 0};
  static constexpr int dy[4] = {0, 0, 1, -1};
  double sum = 0.0, sumsq = 0.0;
  for (long w = 0; w < walks; ++w) {
    Vertex pos = x;
    long visits = 0;
    while (grid.is_interior(pos)) {
      if (pos == y) ++visits;
      const int s = step(gen);
      pos.x += dx[s];
      pos.y += dy[s];
    }
    sum += visits;
    sumsq += static_cast<double>(visits) * visits;
  }
  const double mean = sum / walks;
  const double var = std::max(0.0, sumsq / walks - mean * mean);
  const double se = std::sqrt(var / walks);
  return {mean, se};
}

std::vector<double> green_column_cg(int N, Vertex y, double tol) {
  GridSpec grid(N);
  require_interior(grid, y, "green_column_cg");
  const int M = N - 2;
  std::vector<double> b(static_cast<std::size_t>(M) * M, 0.0);
  b[static_cast<std::size_t>(y.x - 1) * M + (y.y - 1)] = 1.0;
  return solve_ImP_cg(M, b, tol);
}

double effective_resistance(int N, Vertex u, Vertex v) {
  GridSpec grid(N);
  require_interior(grid, u, "effective_resistance");
  require_interior(grid, v, "effective_resistance");
  if (u == v) return 0.0;
  const int M = N - 2;
  std::vector<double> b(static_cast<std::size_t>(M) * M, 0.0);
  // Unit current u -> v through the grounded Laplacian L = 4 (I - P).
  b[static_cast<std::size_t>(u.x - 1) * M + (u.y - 1)] = 0.25;
  b[static_cast<std::size_t>(v.x - 1) * M + (v.y - 1)] = -0.25;
  auto phi = solve_ImP_cg(M, b, 1e-13);
  return phi[static_cast<std::size_t>(u.x - 1) * M + (u.y - 1)] -
         phi[static_cast<std::size_t>(v.x - 1) * M + (v.y - 1)];
}

double boundary_resistance(int N, Vertex v) {
  GridSpec grid(N);
  require_interior(grid, v, "boundary_resistance");
  const int M = N - 2;
  std::vector<double> b(static_cast<std::size_t>(M) * M, 0.0);
  b[static_cast<std::size_t>(v.x - 1) * M + (v.y - 1)] = 0.25;
  auto phi = solve_ImP_cg(M, b, 1e-13);
  return phi[static_cast<std::size_t>(v.x - 1) * M + (v.y - 1)];
}

CovProfileReport gff_cov_profile_check(int N, int max_vertices, std::uint64_t seed) {
  if (!GridSpec::is_power_of_two(N) || N < 2)
    throw std::invalid_argument("gff_cov_profile_check: N must be a power of two >= 2");
  const int big = 4 * N;
  if (big > 256)
    throw std::invalid_argument("gff_cov_profile_check: 4N must be <= 256");
  GridSpec grid(N);
  const int n = grid.n();

  // Vertex sample inside the sub-box (2N, 2N) + V_N of V_{4N}: the whole box if
  // small enough, else the four corners + center + a seeded uniform fill.
  std::vector<Vertex> verts;
  if (N * N <= max_vertices) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) verts.push_back(Vertex{2 * N + i, 2 * N + j});
  } else {
    verts = {Vertex{2 * N, 2 * N}, Vertex{2 * N, 3 * N - 1}, Vertex{3 * N - 1, 2 * N},
             Vertex{3 * N - 1, 3 * N - 1}, Vertex{2 * N + N / 2, 2 * N + N / 2}};
    auto gen = rng::stream(seed, N, rng::Purpose::scratch);
    std::uniform_int_distribution<int> off(0, N - 1);
    while (static_cast<int>(verts.size()) < max_vertices) {
      Vertex v{2 * N + off(gen), 2 * N + off(gen)};
      if (std::find(verts.begin(), verts.end(), v) == verts.end()) verts.push_back(v);
    }
  }

  // One Green column of V_{4N} per sampled vertex.
  const int M = big - 2;
  std::vector<std::vector<double>> cols;
  cols.reserve(verts.size());
  for (Vertex v : verts) cols.push_back(green_column_cg(big, v, 1e-12));

  const double slope = constants::log_distance_slope();
  CovProfileReport rep;
  rep.box_side = big;
  rep.sub_side = N;
  rep.vertices = static_cast<int>(verts.size());
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a; b < verts.size(); ++b) {
      const Vertex u = verts[a], v = verts[b];
      const double cov = cols[a][static_cast<std::size_t>(v.x - 1) * M + (v.y - 1)];
      const double dist = std::hypot(static_cast<double>(u.x - v.x),
                                     static_cast<double>(u.y - v.y));
      const double logd = dist > 1.0 ? std::log2(dist) : 0.0;
      const double pred = slope * (n - logd);
      const double dev = std::abs(cov - pred);
      ++rep.pairs;
      if (dev > rep.c_emp) {
        rep.c_emp = dev;
        rep.worst_u = u;
        rep.worst_v = v;
        rep.worst_cov = cov;
        rep.worst_pred = pred;
      }
    }
  return rep;
}

}  // namespace gfe
