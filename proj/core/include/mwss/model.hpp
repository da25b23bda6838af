#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwss/encoder.hpp"
#include "mwss/mlp.hpp"
#include "mwss/param_vector.hpp"
#include "mwss/rng.hpp"

namespace mwss::model {

enum class HeadSharing { multi, shared };

HeadSharing parse_head_sharing(std::string_view name);
std::string_view to_string(HeadSharing s);

/// Shape of the joint classifier θ = (θ_E, θ_c, θ_1..θ_K) and the label weighting network α.
struct ModelSpec {
  text::EncoderSpec encoder;
  std::size_t head_hidden = 300;
  std::size_t num_sources = 3;
  HeadSharing sharing = HeadSharing::multi;
  std::size_t label_embed_dim = 256;
  std::vector<std::size_t> lwn_hidden{768, 768};

  std::size_t num_weak_heads() const { return sharing == HeadSharing::multi ? num_sources : 1; }
  /// [encoder_dim, head_hidden, 1], relu hidden, sigmoid output.
  nn::MlpSpec head_spec() const;
  /// [encoder_dim + label_embed_dim, lwn_hidden..., 1], relu hidden, sigmoid output.
  nn::MlpSpec lwn_spec() const;
  /// Prefix of the head consuming weak source k (0-based).
  std::string weak_head_prefix(std::size_t source) const;
  void validate() const;
  std::uint64_t fingerprint() const;
};

inline constexpr std::string_view kCleanHead = "head.clean";
inline constexpr std::string_view kLwnPrefix = "lwn.mlp";
inline constexpr std::string_view kLabelEmbed = "lwn.label_embed";

std::shared_ptr<const nn::Layout> classifier_layout(const ModelSpec& spec);
std::shared_ptr<const nn::Layout> lwn_layout(const ModelSpec& spec);

nn::ParamVector init_classifier(const ModelSpec& spec, Rng& rng);
nn::ParamVector init_lwn(const ModelSpec& spec, Rng& rng);

struct Example {
  std::string id;
  text::TokenIds tokens;
  int label = 0;
};

/// Non-owning view of examples drawn for one step.
using Batch = std::vector<const Example*>;

struct Batches {
  Batch clean;
  std::vector<Batch> weak;  // one per source
};

enum class InferenceHead { clean, weak_mean };

double predict_clean(const ModelSpec& spec, const nn::ParamVector& theta, std::span<const std::uint32_t> tokens);
double predict_weak(const ModelSpec& spec, const nn::ParamVector& theta, std::size_t source,
                    std::span<const std::uint32_t> tokens);
/// Clean head, or the mean of the weak heads (used when no clean head was trained).
double predict(const ModelSpec& spec, const nn::ParamVector& theta, std::span<const std::uint32_t> tokens,
               InferenceHead head);

/// ω_α(h, ỹ) = sigmoid(MLP([h ; embed(ỹ)])).
double lwn_weight(const ModelSpec& spec, const nn::ParamVector& alpha, std::span<const double> h, int weak_label);

/// Weight assigned to every weak instance: learned by the LWN, or pinned to a constant.
struct WeightPolicy {
  std::optional<double> pinned;

  static WeightPolicy learned() { return {}; }
  static WeightPolicy constant(double w) { return {w}; }
};

struct GradRequest {
  bool theta = true;
  bool alpha = true;
};

struct TrainLoss {
  double total = 0.0;
  double clean = 0.0;
  std::vector<double> weak;         // weighted mean loss per source
  std::vector<double> mean_weight;  // mean ω per source (0 for an empty batch)
  nn::ParamVector grad_theta;       // empty unless requested
  nn::ParamVector grad_alpha;       // empty unless requested
};

/// Weighted joint objective: mean clean BCE plus, for every source k, the mean
/// of ω·BCE over the weak batch through head k.
///
/// The LWN reads h as a constant feature: ∇θ sees ω only as a coefficient and
/// ∇α sees the loss only as a coefficient. By default that feature is h under
/// `theta`; `feature_theta` pins it to h under another parameter point, which
/// makes L_train(θ; θ_f) an ordinary function of θ whose exact gradient at
/// θ = θ_f is grad_theta.
TrainLoss train_loss(const ModelSpec& spec, const nn::ParamVector& theta, const nn::ParamVector& alpha,
                     const Batches& batches, const WeightPolicy& policy, GradRequest request = {},
                     const nn::ParamVector* feature_theta = nullptr);

struct ValLoss {
  double loss = 0.0;
  std::size_t correct = 0;
  nn::ParamVector grad;  // empty unless requested
};

/// Mean BCE of the inference head on clean examples.
ValLoss val_loss(const ModelSpec& spec, const nn::ParamVector& theta, const Batch& batch, bool want_grad,
                 InferenceHead head = InferenceHead::clean);

}  // namespace mwss::model
