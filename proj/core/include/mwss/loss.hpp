#pragma once

namespace mwss::nn {

inline constexpr double kProbClamp = 1e-7;

struct BceResult {
  double loss;
  double grad;  // dloss/dprediction at the clamped prediction
};

/// Binary cross-entropy −[y ln p + (1−y) ln(1−p)] with p clamped to [1e-7, 1−1e-7].
BceResult bce_loss(double prediction, int label);

double sigmoid(double z);

}  // namespace mwss::nn
