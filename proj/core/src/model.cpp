#include "mwss/model.hpp"

#include <cmath>

#include "mwss/errors.hpp"
#include "mwss/hash.hpp"
#include "mwss/loss.hpp"

namespace mwss::model {
namespace {

const std::string kCleanHeadName(kCleanHead);
const std::string kLwnName(kLwnPrefix);

void require_label(int label, const char* what) {
  if (label != 0 && label != 1) {
    throw ValidationError(std::string(what) + ": label must be 0 or 1, got " + std::to_string(label));
  }
}

void require_finite_loss(double loss, const std::string& term) {
  if (!std::isfinite(loss)) throw NumericError("train_loss: non-finite loss in " + term);
}

// Forward through one sigmoid head, returning p and (optionally) the tape.
struct HeadPass {
  double p;
  nn::MlpTape tape;
};

HeadPass head_forward(const ModelSpec& spec, const nn::ParamVector& theta, const std::string& prefix,
                      std::span<const double> h, bool keep_tape) {
  if (keep_tape) {
    auto out = nn::mlp_forward(spec.head_spec(), theta, prefix, h);
    return {out.output[0], std::move(out.tape)};
  }
  return {nn::mlp_eval(spec.head_spec(), theta, prefix, h)[0], {}};
}

std::vector<double> lwn_input(const ModelSpec& spec, const nn::ParamVector& alpha, std::span<const double> h,
                              int weak_label) {
  require_label(weak_label, "lwn_weight");
  if (h.size() != spec.encoder.output_dim()) {
    throw ValidationError("lwn_weight: representation has " + std::to_string(h.size()) + " values, expected " +
                          std::to_string(spec.encoder.output_dim()));
  }
  const auto table = alpha.segment(kLabelEmbed);
  const std::size_t e = spec.label_embed_dim;
  std::vector<double> in(h.begin(), h.end());
  const auto row = table.subspan(static_cast<std::size_t>(weak_label) * e, e);
  in.insert(in.end(), row.begin(), row.end());
  return in;
}

}  // namespace

HeadSharing parse_head_sharing(std::string_view name) {
  if (name == "multi") return HeadSharing::multi;
  if (name == "shared") return HeadSharing::shared;
  throw ValidationError("unknown head sharing '" + std::string(name) + "' (expected multi or shared)");
}

std::string_view to_string(HeadSharing s) { return s == HeadSharing::shared ? "shared" : "multi"; }

nn::MlpSpec ModelSpec::head_spec() const {
  return {{encoder.output_dim(), head_hidden, 1}, nn::Activation::relu, nn::Activation::sigmoid};
}

nn::MlpSpec ModelSpec::lwn_spec() const {
  nn::MlpSpec s;
  s.widths.push_back(encoder.output_dim() + label_embed_dim);
  s.widths.insert(s.widths.end(), lwn_hidden.begin(), lwn_hidden.end());
  s.widths.push_back(1);
  s.hidden = nn::Activation::relu;
  s.output = nn::Activation::sigmoid;
  return s;
}

std::string ModelSpec::weak_head_prefix(std::size_t source) const {
  if (source >= num_sources) {
    throw ValidationError("weak source index " + std::to_string(source) + " out of range (K=" +
                          std::to_string(num_sources) + ")");
  }
  return sharing == HeadSharing::multi ? "head.weak" + std::to_string(source) : std::string("head.weak");
}

void ModelSpec::validate() const {
  encoder.validate();
  if (num_sources == 0) throw ValidationError("model needs at least one weak source");
  if (head_hidden == 0 || label_embed_dim == 0) throw ValidationError("head_hidden and label_embed_dim must be positive");
  head_spec().validate();
  lwn_spec().validate();
}

std::uint64_t ModelSpec::fingerprint() const {
  std::string s = std::string(text::to_string(encoder.variant)) + "|" + std::to_string(encoder.vocab_size) + "|" +
                  std::to_string(encoder.embed_dim) + "|" + std::to_string(encoder.filters_per_width) + "|";
  for (auto w : encoder.filter_widths) s += std::to_string(w) + ",";
  s += "|" + std::to_string(head_hidden) + "|" + std::to_string(num_sources) + "|" + std::string(to_string(sharing)) +
       "|" + std::to_string(label_embed_dim) + "|";
  for (auto w : lwn_hidden) s += std::to_string(w) + ",";
  return fnv1a(s);
}

std::shared_ptr<const nn::Layout> classifier_layout(const ModelSpec& spec) {
  spec.validate();
  auto layout = std::make_shared<nn::Layout>();
  text::add_encoder_segments(*layout, spec.encoder);
  nn::add_mlp_segments(*layout, kCleanHeadName, spec.head_spec());
  for (std::size_t k = 0; k < spec.num_weak_heads(); ++k) {
    nn::add_mlp_segments(*layout, spec.sharing == HeadSharing::multi ? "head.weak" + std::to_string(k) : "head.weak",
                         spec.head_spec());
  }
  return layout;
}

std::shared_ptr<const nn::Layout> lwn_layout(const ModelSpec& spec) {
  spec.validate();
  auto layout = std::make_shared<nn::Layout>();
  layout->add(std::string(kLabelEmbed), {2, spec.label_embed_dim});
  nn::add_mlp_segments(*layout, kLwnName, spec.lwn_spec());
  return layout;
}

nn::ParamVector init_classifier(const ModelSpec& spec, Rng& rng) {
  nn::ParamVector theta(classifier_layout(spec));
  text::init_encoder(theta, spec.encoder, rng);
  nn::init_mlp(theta, kCleanHeadName, spec.head_spec(), rng);
  for (std::size_t k = 0; k < spec.num_weak_heads(); ++k) {
    nn::init_mlp(theta, spec.sharing == HeadSharing::multi ? "head.weak" + std::to_string(k) : "head.weak",
                 spec.head_spec(), rng);
  }
  return theta;
}

nn::ParamVector init_lwn(const ModelSpec& spec, Rng& rng) {
  nn::ParamVector alpha(lwn_layout(spec));
  const double bound = std::sqrt(6.0 / (1.0 + static_cast<double>(spec.label_embed_dim)));
  for (double& x : alpha.segment(kLabelEmbed)) x = rng.uniform(-bound, bound);
  nn::init_mlp(alpha, kLwnName, spec.lwn_spec(), rng);
  return alpha;
}

double predict_clean(const ModelSpec& spec, const nn::ParamVector& theta, std::span<const std::uint32_t> tokens) {
  const auto enc = text::encode(spec.encoder, theta, tokens);
  return nn::mlp_eval(spec.head_spec(), theta, kCleanHeadName, enc.h)[0];
}

double predict_weak(const ModelSpec& spec, const nn::ParamVector& theta, std::size_t source,
                    std::span<const std::uint32_t> tokens) {
  const auto prefix = spec.weak_head_prefix(source);
  const auto enc = text::encode(spec.encoder, theta, tokens);
  return nn::mlp_eval(spec.head_spec(), theta, prefix, enc.h)[0];
}

double predict(const ModelSpec& spec, const nn::ParamVector& theta, std::span<const std::uint32_t> tokens,
               InferenceHead head) {
  const auto enc = text::encode(spec.encoder, theta, tokens);
  if (head == InferenceHead::clean) return nn::mlp_eval(spec.head_spec(), theta, kCleanHeadName, enc.h)[0];
  double sum = 0.0;
  for (std::size_t k = 0; k < spec.num_weak_heads(); ++k) {
    sum += nn::mlp_eval(spec.head_spec(), theta, spec.weak_head_prefix(std::min(k, spec.num_sources - 1)), enc.h)[0];
  }
  return sum / static_cast<double>(spec.num_weak_heads());
}

double lwn_weight(const ModelSpec& spec, const nn::ParamVector& alpha, std::span<const double> h, int weak_label) {
  const auto in = lwn_input(spec, alpha, h, weak_label);
  return nn::mlp_eval(spec.lwn_spec(), alpha, kLwnName, in)[0];
}

TrainLoss train_loss(const ModelSpec& spec, const nn::ParamVector& theta, const nn::ParamVector& alpha,
                     const Batches& batches, const WeightPolicy& policy, GradRequest request,
                     const nn::ParamVector* feature_theta) {
  if (batches.weak.size() != spec.num_sources) {
    throw ValidationError("train_loss: got " + std::to_string(batches.weak.size()) + " weak batches for K=" +
                          std::to_string(spec.num_sources));
  }
  bool any = !batches.clean.empty();
  for (const auto& b : batches.weak) any = any || !b.empty();
  if (!any) throw ValidationError("train_loss: all batches are empty");

  const bool learned = !policy.pinned.has_value();
  TrainLoss out;
  out.weak.assign(spec.num_sources, 0.0);
  out.mean_weight.assign(spec.num_sources, 0.0);
  if (request.theta) out.grad_theta = theta.zeros_like();
  if (request.alpha) out.grad_alpha = alpha.zeros_like();
  const auto head = spec.head_spec();
  const auto lwn = spec.lwn_spec();

  if (!batches.clean.empty()) {
    const double inv = 1.0 / static_cast<double>(batches.clean.size());
    for (const Example* ex : batches.clean) {
      auto enc = text::encode(spec.encoder, theta, ex->tokens);
      auto pass = head_forward(spec, theta, kCleanHeadName, enc.h, request.theta);
      const auto bce = nn::bce_loss(pass.p, ex->label);
      out.clean += inv * bce.loss;
      if (request.theta) {
        const double up = inv * bce.grad;
        const auto dh = nn::mlp_backward(pass.tape, theta, std::span<const double>(&up, 1), out.grad_theta);
        text::encode_backward(spec.encoder, theta, enc.tape, dh, out.grad_theta);
      }
    }
    require_finite_loss(out.clean, "clean term");
  }

  for (std::size_t k = 0; k < spec.num_sources; ++k) {
    const auto& batch = batches.weak[k];
    if (batch.empty()) continue;
    const auto prefix = spec.weak_head_prefix(k);
    const double inv = 1.0 / static_cast<double>(batch.size());
    double weight_sum = 0.0;
    for (const Example* ex : batch) {
      auto enc = text::encode(spec.encoder, theta, ex->tokens);
      auto pass = head_forward(spec, theta, prefix, enc.h, request.theta);
      const auto bce = nn::bce_loss(pass.p, ex->label);

      double omega = 0.0;
      if (learned) {
        const auto in = feature_theta == nullptr
                            ? lwn_input(spec, alpha, enc.h, ex->label)
                            : lwn_input(spec, alpha, text::encode(spec.encoder, *feature_theta, ex->tokens).h,
                                        ex->label);
        if (request.alpha) {
          auto lw = nn::mlp_forward(lwn, alpha, kLwnName, in);
          omega = lw.output[0];
          const double up = inv * bce.loss;
          const auto din = nn::mlp_backward(lw.tape, alpha, std::span<const double>(&up, 1), out.grad_alpha);
          // Only the label-embedding half of the input gradient is kept; h is detached.
          auto row = out.grad_alpha.segment(kLabelEmbed)
                         .subspan(static_cast<std::size_t>(ex->label) * spec.label_embed_dim, spec.label_embed_dim);
          const std::size_t hd = enc.h.size();
          for (std::size_t c = 0; c < row.size(); ++c) row[c] += din[hd + c];
        } else {
          omega = nn::mlp_eval(lwn, alpha, kLwnName, in)[0];
        }
      } else {
        omega = *policy.pinned;
      }
      weight_sum += omega;
      out.weak[k] += inv * omega * bce.loss;

      if (request.theta && omega != 0.0) {
        const double up = inv * omega * bce.grad;
        const auto dh = nn::mlp_backward(pass.tape, theta, std::span<const double>(&up, 1), out.grad_theta);
        text::encode_backward(spec.encoder, theta, enc.tape, dh, out.grad_theta);
      }
    }
    out.mean_weight[k] = weight_sum * inv;
    require_finite_loss(out.weak[k], "weak term of source " + std::to_string(k));
  }

  out.total = out.clean;
  for (double w : out.weak) out.total += w;
  return out;
}

ValLoss val_loss(const ModelSpec& spec, const nn::ParamVector& theta, const Batch& batch, bool want_grad,
                 InferenceHead head) {
  if (batch.empty()) throw ValidationError("val_loss: empty batch");
  ValLoss out;
  if (want_grad) out.grad = theta.zeros_like();
  const double inv = 1.0 / static_cast<double>(batch.size());
  const std::size_t heads = head == InferenceHead::clean ? 1 : spec.num_weak_heads();
  for (const Example* ex : batch) {
    auto enc = text::encode(spec.encoder, theta, ex->tokens);
    std::vector<HeadPass> passes;
    double p = 0.0;
    for (std::size_t j = 0; j < heads; ++j) {
      const std::string prefix = head == InferenceHead::clean ? kCleanHeadName : spec.weak_head_prefix(j);
      passes.push_back(head_forward(spec, theta, prefix, enc.h, want_grad));
      p += passes.back().p;
    }
    p /= static_cast<double>(heads);
    const auto bce = nn::bce_loss(p, ex->label);
    out.loss += inv * bce.loss;
    if ((p > 0.5 ? 1 : 0) == ex->label) ++out.correct;
    if (want_grad) {
      std::vector<double> dh(enc.h.size(), 0.0);
      const double up = inv * bce.grad / static_cast<double>(heads);
      for (auto& pass : passes) {
        const auto g = nn::mlp_backward(pass.tape, theta, std::span<const double>(&up, 1), out.grad);
        for (std::size_t c = 0; c < dh.size(); ++c) dh[c] += g[c];
      }
      text::encode_backward(spec.encoder, theta, enc.tape, dh, out.grad);
    }
  }
  if (!std::isfinite(out.loss)) throw NumericError("val_loss: non-finite validation loss");
  return out;
}

}  // namespace mwss::model
