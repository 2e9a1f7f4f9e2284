// Exceedance tail estimation with weighted least squares on three models.

#include "gfe/tail.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfe {

const char* tail_model_name(TailModel m) {
  switch (m) {
    case TailModel::pure_exponential: return "pure-exponential";
    case TailModel::polyexp: return "polyexp";
    case TailModel::gaussian: return "gaussian";
  }
  return "?";
}

TailModel tail_model_from_name(const std::string& name) {
  if (name == "pure-exponential" || name == "exponential")
    return TailModel::pure_exponential;
  if (name == "polyexp") return TailModel::polyexp;
  if (name == "gaussian") return TailModel::gaussian;
  throw std::invalid_argument("unknown tail model: " + name);
}

TailEstimate estimate_tail(const std::vector<double>& samples, double center,
                           const std::vector<double>& lambda_grid, TailModel model) {
  if (samples.size() < 1000)
    throw std::invalid_argument("estimate_tail: need at least 1000 samples");
  if (lambda_grid.empty())
    throw std::invalid_argument("estimate_tail: empty lambda grid");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (lambda_grid[i] <= lambda_grid[i - 1])
      throw std::invalid_argument("estimate_tail: grid must be strictly increasing");
  if (model == TailModel::polyexp)
    for (double l : lambda_grid)
      if (l <= 0.0)
        throw std::invalid_argument("estimate_tail: polyexp needs positive lambdas");

  TailEstimate est;
  est.model = model;
  est.reps = static_cast<long>(samples.size());
  est.lambda = lambda_grid;
  const double reps = static_cast<double>(est.reps);
  for (double lam : lambda_grid) {
    long c = 0;
    for (double s : samples)
      if (s - center >= lam) ++c;
    est.counts.push_back(c);
    const double p = c / reps;
    est.p.push_back(p);
    est.se.push_back(std::sqrt(p * (1.0 - p) / reps));
    // Zero-count points carry no tail information; saturated points break the
    // delta-method weight. Both are excluded and flagged.
    est.used.push_back(c > 0 && c < est.reps);
  }

  // Design: y = b + slope * g(lambda); exponent a = -slope.
  double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
  int usable = 0;
  for (std::size_t i = 0; i < est.lambda.size(); ++i) {
    if (!est.used[i]) continue;
    ++usable;
    const double lam = est.lambda[i];
    const double p = est.p[i];
    double yv = std::log(p);
    double xv = lam;
    if (model == TailModel::polyexp) yv -= std::log(lam);
    if (model == TailModel::gaussian) xv = lam * lam;
    const double w = reps * p / (1.0 - p);  // inverse variance of log p
    sw += w;
    swx += w * xv;
    swy += w * yv;
    swxx += w * xv * xv;
    swxy += w * xv * yv;
  }
  if (usable < 2) {
    est.degenerate = true;
    est.exponent = std::numeric_limits<double>::quiet_NaN();
    est.exponent_se = est.ci_lo = est.ci_hi = est.exponent;
    est.intercept = est.weighted_r2 = est.exponent;
    return est;
  }
  const double det = sw * swxx - swx * swx;
  if (det <= 0.0) {
    est.degenerate = true;
    est.exponent = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  const double slope = (sw * swxy - swx * swy) / det;
  const double intercept = (swxx * swy - swx * swxy) / det;
  est.exponent = -slope;
  est.intercept = intercept;
  // Weights are exact inverse variances, so Cov(beta) = (X' W X)^{-1} directly.
  est.exponent_se = std::sqrt(sw / det);
  est.ci_lo = est.exponent - 1.96 * est.exponent_se;
  est.ci_hi = est.exponent + 1.96 * est.exponent_se;

  double rss = 0, tss = 0;
  const double ybar = swy / sw;
  for (std::size_t i = 0; i < est.lambda.size(); ++i) {
    if (!est.used[i]) continue;
    const double lam = est.lambda[i];
    const double p = est.p[i];
    double yv = std::log(p);
    double xv = lam;
    if (model == TailModel::polyexp) yv -= std::log(lam);
    if (model == TailModel::gaussian) xv = lam * lam;
    const double w = reps * p / (1.0 - p);
    const double fit = intercept + slope * xv;
    rss += w * (yv - fit) * (yv - fit);
    tss += w * (yv - ybar) * (yv - ybar);
  }
  est.weighted_r2 = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  return est;
}

}  // namespace gfe
