#include "mwss/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mwss/errors.hpp"

namespace mwss::nn {

// Kept strictly inside (0, 1) even where the exact value rounds to an endpoint.
double sigmoid(double z) {
  constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  if (z >= 0.0) return std::min(1.0 / (1.0 + std::exp(-z)), kBelowOne);
  const double e = std::exp(z);
  return std::max(e / (1.0 + e), std::numeric_limits<double>::denorm_min());
}

BceResult bce_loss(double prediction, int label) {
  if (label != 0 && label != 1) throw ValidationError("bce_loss: label must be 0 or 1, got " + std::to_string(label));
  const double p = std::clamp(prediction, kProbClamp, 1.0 - kProbClamp);
  if (label == 1) return {-std::log(p), -1.0 / p};
  return {-std::log(1.0 - p), 1.0 / (1.0 - p)};
}

}  // namespace mwss::nn
