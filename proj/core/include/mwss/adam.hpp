#pragma once

#include <cstdint>

#include "mwss/param_vector.hpp"

namespace mwss::nn {

// Hyperparameters are not given by the method; these are the usual defaults.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool bias_correction = true;
};

struct AdamState {
  AdamConfig config;
  ParamVector m;
  ParamVector v;
  std::uint64_t t = 0;

  static AdamState init(const ParamVector& params, AdamConfig config = {});
};

struct AdamUpdate {
  ParamVector params;
  AdamState state;
};

/// One Adam step. Inputs are taken by value so callers may move them in;
/// nothing the caller still owns is modified.
/// Throws NumericError naming the segment if `grads` holds a NaN/Inf.
AdamUpdate adam_step(AdamState state, ParamVector params, const ParamVector& grads, double learning_rate);

}  // namespace mwss::nn
