#include "mwss/mlp.hpp"

#include <cmath>

#include "mwss/errors.hpp"
#include "mwss/loss.hpp"

namespace mwss::nn {
namespace {

std::string weight_name(const std::string& prefix, std::size_t layer) {
  return prefix + ".l" + std::to_string(layer) + ".w";
}
std::string bias_name(const std::string& prefix, std::size_t layer) {
  return prefix + ".l" + std::to_string(layer) + ".b";
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::identity: return z;
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::tanh: return std::tanh(z);
    case Activation::sigmoid: return sigmoid(z);
  }
  return z;
}

// Derivative expressed through the pre-activation z and output y.
double activate_grad(Activation a, double z, double y) {
  switch (a) {
    case Activation::identity: return 1.0;
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::sigmoid: return y * (1.0 - y);
  }
  return 1.0;
}

void check_segment(const ParamVector& params, const std::string& name, std::size_t expected) {
  const auto& seg = params.layout().at(name);
  if (seg.size() != expected) {
    throw ValidationError("segment '" + name + "' holds " + std::to_string(seg.size()) + " values, expected " +
                          std::to_string(expected));
  }
}

template <typename OnLayer>
std::vector<double> run_forward(const MlpSpec& spec, const ParamVector& params, const std::string& prefix,
                                std::span<const double> input, OnLayer&& on_layer) {
  spec.validate();
  if (input.size() != spec.input_dim()) {
    throw ValidationError("mlp '" + prefix + "': input has " + std::to_string(input.size()) + " values, expected " +
                          std::to_string(spec.input_dim()));
  }
  std::vector<double> a(input.begin(), input.end());
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    check_segment(params, weight_name(prefix, l), in * out);
    check_segment(params, bias_name(prefix, l), out);
    const auto w = params.segment(weight_name(prefix, l));
    const auto b = params.segment(bias_name(prefix, l));
    const Activation act = (l + 1 == spec.layers()) ? spec.output : spec.hidden;
    std::vector<double> z(out);
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* row = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) s += row[i] * a[i];
      z[o] = s;
      y[o] = activate(act, s);
    }
    on_layer(a, z);
    a = std::move(y);
  }
  return a;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ValidationError("MlpSpec needs at least two widths");
  for (auto w : widths) {
    if (w == 0) throw ValidationError("MlpSpec widths must be positive");
  }
}

void add_mlp_segments(Layout& layout, const std::string& prefix, const MlpSpec& spec) {
  spec.validate();
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    layout.add(weight_name(prefix, l), {spec.widths[l + 1], spec.widths[l]});
    layout.add(bias_name(prefix, l), {spec.widths[l + 1]});
  }
}

void init_mlp(ParamVector& params, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    const double fan_in = static_cast<double>(spec.widths[l]);
    const double fan_out = static_cast<double>(spec.widths[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : params.segment(weight_name(prefix, l))) w = rng.uniform(-bound, bound);
    for (double& b : params.segment(bias_name(prefix, l))) b = 0.0;
  }
}

MlpOutput mlp_forward(const MlpSpec& spec, const ParamVector& params, const std::string& prefix,
                      std::span<const double> input) {
  MlpOutput out;
  out.tape.spec = spec;
  out.tape.prefix = prefix;
  out.tape.layout_fingerprint = params.layout().fingerprint();
  out.output = run_forward(spec, params, prefix, input, [&](const std::vector<double>& a, std::vector<double>& z) {
    out.tape.activations.push_back(a);
    out.tape.pre.push_back(z);
  });
  out.tape.activations.push_back(out.output);
  return out;
}

std::vector<double> mlp_eval(const MlpSpec& spec, const ParamVector& params, const std::string& prefix,
                             std::span<const double> input) {
  return run_forward(spec, params, prefix, input, [](const std::vector<double>&, std::vector<double>&) {});
}

std::vector<double> mlp_backward(const MlpTape& tape, const ParamVector& params, std::span<const double> upstream,
                                 ParamVector& grads) {
  const auto& spec = tape.spec;
  if (tape.activations.size() != spec.layers() + 1 || tape.pre.size() != spec.layers()) {
    throw ValidationError("mlp_backward: tape for '" + tape.prefix + "' is incomplete");
  }
  if (grads.layout().fingerprint() != tape.layout_fingerprint ||
      params.layout().fingerprint() != tape.layout_fingerprint) {
    throw ValidationError("mlp_backward: tape for '" + tape.prefix + "' was recorded against a different layout");
  }
  if (upstream.size() != spec.output_dim()) {
    throw ValidationError("mlp_backward: upstream gradient has " + std::to_string(upstream.size()) +
                          " values, expected " + std::to_string(spec.output_dim()));
  }
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (std::size_t l = spec.layers(); l-- > 0;) {
    const std::size_t in = spec.widths[l];
    const std::size_t out = spec.widths[l + 1];
    const Activation act = (l + 1 == spec.layers()) ? spec.output : spec.hidden;
    const auto& a = tape.activations[l];
    const auto& z = tape.pre[l];
    const auto& y = tape.activations[l + 1];
    const auto w = params.segment(weight_name(tape.prefix, l));
    auto gw = grads.segment(weight_name(tape.prefix, l));
    auto gb = grads.segment(bias_name(tape.prefix, l));
    std::vector<double> next(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double dz = delta[o] * activate_grad(act, z[o], y[o]);
      if (dz == 0.0) continue;
      gb[o] += dz;
      double* grow = gw.data() + o * in;
      const double* wrow = w.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += dz * a[i];
        next[i] += dz * wrow[i];
      }
    }
    delta = std::move(next);
  }
  return delta;
}

}  // namespace mwss::nn
