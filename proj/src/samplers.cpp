// Field samplers: dense-Cholesky GFF, sine-basis GFF, torus MBRW, dyadic BRW.

#include "gfe/samplers.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "gfe/constants.hpp"
#include "gfe/green.hpp"
#include "gfe/rng.hpp"

namespace gfe {

namespace {

std::vector<double> draw_normals(std::mt19937_64& gen, std::size_t count, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  std::vector<double> out(count);
  for (auto& v : out) v = dist(gen);
  return out;
}

// ------------------------------------------------------------ dense route --

using LltPtr = std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>>;

LltPtr dense_factor(int N) {
  static std::mutex mu;
  static std::map<int, LltPtr> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
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
  auto llt = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A);
  if (llt->info() != Eigen::Success)
    throw std::runtime_error("dense_factor: factorization failed");
  cache.emplace(N, llt);
  return cache.at(N);
}

// ---------------------------------------------------------- spectral route --

struct SinePlan {
  fftw_plan plan;
  int M;
};

// Plans are cached per size and reused so repeated runs execute the identical
// algorithm; buffers are caller-owned (FFTW_UNALIGNED permits that).
const SinePlan& sine_plan(int M) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SinePlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(M);
  if (it == cache.end()) {
    std::vector<double> dummy(static_cast<std::size_t>(M) * M);
    auto sp = std::make_unique<SinePlan>();
    sp->M = M;
    sp->plan = fftw_plan_r2r_2d(M, M, dummy.data(), dummy.data(), FFTW_RODFT00,
                                FFTW_RODFT00, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!sp->plan) throw std::runtime_error("sine_plan: plan creation failed");
    it = cache.emplace(M, std::move(sp)).first;
  }
  return *it->second;
}

void check_gff_size(int N, const char* who) {
  if (N < 3) throw std::invalid_argument(std::string(who) + ": N must be >= 3");
}

Field make_field(FieldKind kind, int N, std::uint64_t seed, int k_lo, int k_hi) {
  Field f;
  f.kind = kind;
  f.N = N;
  f.seed = seed;
  f.k_lo = k_lo;
  f.k_hi = k_hi;
  f.values.assign(static_cast<std::size_t>(N) * N, 0.0);
  return f;
}

// ------------------------------------------------------------- MBRW pieces --

void check_mbrw_args(int N, int k_lo, int k_hi, int n) {
  if (k_lo < 0 || k_hi > n || k_lo > k_hi)
    throw std::invalid_argument("sample_mbrw: level range [" + std::to_string(k_lo) +
                                "," + std::to_string(k_hi) + "] outside [0," +
                                std::to_string(n) + "]");
}

// Level-k contribution: box sums of iid N(0, 4^-k) torus noise over the
// side-2^k box with upper-right corner at each vertex, via a circular
// summed-area table on a (N + w - 1)^2 extension.
std::vector<double> mbrw_level_field(int N, std::uint64_t seed, int k) {
  const int w = 1 << k;
  auto gen = rng::stream(seed, k, rng::Purpose::level_noise);
  const std::vector<double> noise =
      draw_normals(gen, static_cast<std::size_t>(N) * N, std::ldexp(1.0, -k));
  const int E = N + w - 1;
  // Prefix table S with one guard row/column of zeros: S[i][j] = sum of the
  // extension over rows < i, cols < j; extension cell (i, j) wraps to
  // noise[(i - w + 1) mod N][(j - w + 1) mod N].
  std::vector<double> S(static_cast<std::size_t>(E + 1) * (E + 1), 0.0);
  auto sat = [E, &S](int i, int j) -> double& {
    return S[static_cast<std::size_t>(i) * (E + 1) + j];
  };
  for (int i = 0; i < E; ++i) {
    const int si = (i - (w - 1) + N) % N;
    for (int j = 0; j < E; ++j) {
      const int sj = (j - (w - 1) + N) % N;
      sat(i + 1, j + 1) = noise[static_cast<std::size_t>(si) * N + sj] +
                          sat(i, j + 1) + sat(i + 1, j) - sat(i, j);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(N) * N);
  for (int x = 0; x < N; ++x)
    for (int y = 0; y < N; ++y)
      out[static_cast<std::size_t>(x) * N + y] =
          sat(x + w, y + w) - sat(x, y + w) - sat(x + w, y) + sat(x, y);
  return out;
}

// Fixed balanced reduction over the level universe [0, n]: restricting the
// level range prunes subtrees but never reassociates the surviving additions,
// so range splits aligned with tree nodes are bit-exact.
std::optional<std::vector<double>> reduce_levels(int lo, int hi, int k_lo, int k_hi,
                                                 int N, std::uint64_t seed) {
  if (hi < k_lo || lo > k_hi) return std::nullopt;
  if (lo == hi) return mbrw_level_field(N, seed, lo);
  const int mid = (lo + hi) / 2;
  auto a = reduce_levels(lo, mid, k_lo, k_hi, N, seed);
  auto b = reduce_levels(mid + 1, hi, k_lo, k_hi, N, seed);
  if (!a) return b;
  if (!b) return a;
  for (std::size_t t = 0; t < a->size(); ++t) (*a)[t] += (*b)[t];
  return a;
}

double window_overlap(long long w, int d, int N) {
  return static_cast<double>(std::max(0LL, w - d)) +
         static_cast<double>(std::max(0LL, w - (N - d)));
}

}  // namespace

// -------------------------------------------------------------------- GFF --

Field sample_gff_dense(int N, std::uint64_t seed) {
  check_gff_size(N, "sample_gff_dense");
  if (N > kDenseGreenLimit)
    throw std::invalid_argument("sample_gff_dense: N over the dense limit " +
                                std::to_string(kDenseGreenLimit));
  const int M = N - 2;
  auto llt = dense_factor(N);
  auto gen = rng::stream(seed, 0, rng::Purpose::dense_noise);
  std::vector<double> zv = draw_normals(gen, static_cast<std::size_t>(M) * M, 1.0);
  Eigen::Map<Eigen::VectorXd> z(zv.data(), static_cast<Eigen::Index>(zv.size()));
  // (I - P) = L L^T, so x = L^{-T} z has covariance (I - P)^{-1} = G.
  Eigen::VectorXd x = llt->matrixU().solve(z);
  Field f = make_field(FieldKind::gff, N, seed, 0, 0);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      f.at(Vertex{i + 1, j + 1}) = x(static_cast<Eigen::Index>(i) * M + j);
  return f;
}

Field sample_gff_spectral(int N, std::uint64_t seed) {
  check_gff_size(N, "sample_gff_spectral");
  const int M = N - 2;
  auto gen = rng::stream(seed, 0, rng::Purpose::spectral_noise);
  std::vector<double> buf = draw_normals(gen, static_cast<std::size_t>(M) * M, 1.0);
  // Divide each sine coefficient by sqrt of its (I - P) eigenvalue.
  const double step = constants::pi / (M + 1);
  std::vector<double> cosv(M);
  for (int j = 0; j < M; ++j) cosv[j] = std::cos(step * (j + 1));
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < M; ++k) {
      const double q = 1.0 - 0.5 * (cosv[j] + cosv[k]);
      buf[static_cast<std::size_t>(j) * M + k] /= std::sqrt(q);
    }
  const SinePlan& sp = sine_plan(M);
  std::vector<double> out(buf.size());
  fftw_execute_r2r(sp.plan, buf.data(), out.data());
  const double norm = 1.0 / (2.0 * (M + 1));
  Field f = make_field(FieldKind::gff, N, seed, 0, 0);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      f.at(Vertex{i + 1, j + 1}) = out[static_cast<std::size_t>(i) * M + j] * norm;
  return f;
}

Field sample_gff(int N, std::uint64_t seed) {
  return sample_gff_spectral(N, seed);
}

// ------------------------------------------------------------------- MBRW --

Field sample_mbrw(int N, std::uint64_t seed, int k_lo, int k_hi) {
  GridSpec grid(N);
  const int n = grid.n();
  check_mbrw_args(N, k_lo, k_hi, n);
  auto acc = reduce_levels(0, n, k_lo, k_hi, N, seed);
  Field f = make_field(FieldKind::mbrw, N, seed, k_lo, k_hi);
  f.values = std::move(*acc);
  return f;
}

Field sample_mbrw(int N, std::uint64_t seed) {
  GridSpec grid(N);
  return sample_mbrw(N, seed, 0, grid.n());
}

double mbrw_cov_exact(Vertex u, Vertex v, int N, int k_lo, int k_hi) {
  GridSpec grid(N);
  const int n = grid.n();
  check_mbrw_args(N, k_lo, k_hi, n);
  const int dx = ((u.x - v.x) % N + N) % N;
  const int dy = ((u.y - v.y) % N + N) % N;
  double cov = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const long long w = 1LL << k;
    cov += std::ldexp(window_overlap(w, dx, N) * window_overlap(w, dy, N), -2 * k);
  }
  return cov;
}

double mbrw_cov_exact(Vertex u, Vertex v, int N) {
  GridSpec grid(N);
  return mbrw_cov_exact(u, v, N, 0, grid.n());
}

// -------------------------------------------------------------------- BRW --

Field sample_brw(int N, std::uint64_t seed) {
  GridSpec grid(N);
  const int n = grid.n();
  // Pyramid refinement: expand the level-(k+1) partial sums 2x2 and add the
  // level-k block noise; every vertex ends up with its n+1 ancestral blocks.
  std::vector<double> acc(1, 0.0);
  {
    auto gen = rng::stream(seed, n, rng::Purpose::level_noise);
    acc = draw_normals(gen, 1, 1.0);
  }
  for (int k = n - 1; k >= 0; --k) {
    const int m = N >> k;        // blocks per side at level k
    const int pm = m / 2;        // blocks per side at level k+1
    auto gen = rng::stream(seed, k, rng::Purpose::level_noise);
    std::vector<double> nxt = draw_normals(gen, static_cast<std::size_t>(m) * m, 1.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        nxt[static_cast<std::size_t>(i) * m + j] +=
            acc[static_cast<std::size_t>(i / 2) * pm + j / 2];
    acc = std::move(nxt);
  }
  Field f = make_field(FieldKind::brw, N, seed, 0, n);
  f.values = std::move(acc);
  return f;
}

double brw_cov_exact(Vertex u, Vertex v, int N) {
  GridSpec grid(N);
  const int n = grid.n();
  if (!grid.contains(u) || !grid.contains(v))
    throw std::invalid_argument("brw_cov_exact: vertex outside grid");
  if (u == v) return n + 1.0;
  return n + 1.0 - split_level(u, v, grid);
}

}  // namespace gfe
