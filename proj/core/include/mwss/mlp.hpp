#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwss/param_vector.hpp"
#include "mwss/rng.hpp"

namespace mwss::nn {

enum class Activation { identity, relu, tanh, sigmoid };

std::string_view to_string(Activation a);

struct MlpSpec {
  std::vector<std::size_t> widths;
  Activation hidden = Activation::relu;
  Activation output = Activation::identity;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t layers() const { return widths.size() - 1; }
  void validate() const;
};

/// Registers "<prefix>.l<i>.w" ([out, in], row-major) and "<prefix>.l<i>.b" for every layer.
void add_mlp_segments(Layout& layout, const std::string& prefix, const MlpSpec& spec);

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
void init_mlp(ParamVector& params, const std::string& prefix, const MlpSpec& spec, Rng& rng);

/// Cached activations of one forward pass.
struct MlpTape {
  MlpSpec spec;
  std::string prefix;
  std::uint64_t layout_fingerprint = 0;
  // a[0] is the input, a[i + 1] the post-activation output of layer i.
  std::vector<std::vector<double>> activations;
  // Pre-activation z of each layer.
  std::vector<std::vector<double>> pre;
};

struct MlpOutput {
  std::vector<double> output;
  MlpTape tape;
};

MlpOutput mlp_forward(const MlpSpec& spec, const ParamVector& params, const std::string& prefix,
                      std::span<const double> input);

/// Output only, no tape. Same arithmetic as mlp_forward.
std::vector<double> mlp_eval(const MlpSpec& spec, const ParamVector& params, const std::string& prefix,
                             std::span<const double> input);

/// Backpropagates `upstream` (dL/d output) through the taped pass.
/// Parameter gradients are accumulated into the tape's segments of `grads`;
/// the gradient with respect to the input is returned.
std::vector<double> mlp_backward(const MlpTape& tape, const ParamVector& params,
                                 std::span<const double> upstream, ParamVector& grads);

}  // namespace mwss::nn
