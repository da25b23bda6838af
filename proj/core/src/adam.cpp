#include "mwss/adam.hpp"

#include <cmath>

namespace mwss::nn {

AdamState AdamState::init(const ParamVector& params, AdamConfig config) {
  return AdamState{config, params.zeros_like(), params.zeros_like(), 0};
}

AdamUpdate adam_step(AdamState state, ParamVector params, const ParamVector& grads, double learning_rate) {
  require_same_layout(params, grads, "adam_step");
  require_same_layout(params, state.m, "adam_step state");
  require_finite(grads, "adam_step gradient");

  const auto& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double m_corr = c.bias_correction ? 1.0 - std::pow(c.beta1, t) : 1.0;
  const double v_corr = c.bias_correction ? 1.0 - std::pow(c.beta2, t) : 1.0;
  auto p = params.values();
  auto m = state.m.values();
  auto v = state.v.values();
  const auto g = grads.values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / m_corr;
    const double v_hat = v[i] / v_corr;
    p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
  return {std::move(params), std::move(state)};
}

}  // namespace mwss::nn
