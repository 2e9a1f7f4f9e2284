// Tail estimation: exceedance probabilities with binomial errors and weighted
// least-squares fits of three parametric tail models.
#pragma once

#include <string>
#include <vector>

namespace gfe {

enum class TailModel {
  pure_exponential,  // log p(lambda) ~ b - a lambda
  polyexp,           // log p(lambda) - log lambda ~ b - a lambda
  gaussian,          // log p(lambda) ~ b - a lambda^2
};

const char* tail_model_name(TailModel m);
TailModel tail_model_from_name(const std::string& name);

struct TailEstimate {
  TailModel model = TailModel::pure_exponential;
  long reps = 0;
  std::vector<double> lambda;
  std::vector<long> counts;
  std::vector<double> p;       // exceedance probability per grid point
  std::vector<double> se;      // sqrt(p(1-p)/reps)
  std::vector<bool> used;      // excluded (zero or full count) points flagged false
  double exponent = 0.0;       // fitted a
  double exponent_se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% interval for a
  double intercept = 0.0;      // fitted b
  double weighted_r2 = 0.0;
  bool degenerate = false;     // fewer than two usable grid points
};

/**
 * Exceedance counts of samples - center over the lambda grid, then WLS on the
 * declared model with delta-method weights reps * p / (1 - p).  Requires at
 * least 1000 samples and a nonempty strictly increasing grid intersecting the
 * observed range; an all-zero-count grid is reported degenerate, not thrown.
 */
TailEstimate estimate_tail(const std::vector<double>& samples, double center,
                           const std::vector<double>& lambda_grid, TailModel model);

}  // namespace gfe
