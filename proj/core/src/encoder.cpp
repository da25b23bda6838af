#include "mwss/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mwss/errors.hpp"

namespace mwss::text {
namespace {

std::string conv_weight(std::size_t width) { return "encoder.conv" + std::to_string(width) + ".w"; }
std::string conv_bias(std::size_t width) { return "encoder.conv" + std::to_string(width) + ".b"; }

std::size_t non_pad_prefix(std::span<const std::uint32_t> tokens) {
  std::size_t n = 0;
  while (n < tokens.size() && tokens[n] != kPadId) ++n;
  return n;
}

}  // namespace

EncoderVariant parse_encoder_variant(std::string_view name) {
  if (name == "meanpool") return EncoderVariant::meanpool;
  if (name == "cnn") return EncoderVariant::cnn;
  throw ValidationError("unknown encoder variant '" + std::string(name) + "' (expected meanpool or cnn)");
}

std::string_view to_string(EncoderVariant v) { return v == EncoderVariant::cnn ? "cnn" : "meanpool"; }

std::size_t EncoderSpec::output_dim() const {
  return variant == EncoderVariant::cnn ? filters_per_width * filter_widths.size() : embed_dim;
}

void EncoderSpec::validate() const {
  if (vocab_size < 2 || embed_dim == 0) throw ValidationError("encoder needs vocab_size >= 2 and embed_dim > 0");
  if (variant == EncoderVariant::cnn) {
    if (filter_widths.empty() || filters_per_width == 0) throw ValidationError("cnn encoder needs filters");
    for (auto w : filter_widths) {
      if (w == 0) throw ValidationError("cnn filter widths must be positive");
    }
  }
}

void add_encoder_segments(nn::Layout& layout, const EncoderSpec& spec) {
  spec.validate();
  layout.add(std::string(kEmbedSegment), {spec.vocab_size, spec.embed_dim});
  if (spec.variant == EncoderVariant::cnn) {
    for (auto w : spec.filter_widths) {
      layout.add(conv_weight(w), {spec.filters_per_width, w * spec.embed_dim});
      layout.add(conv_bias(w), {spec.filters_per_width});
    }
  }
}

void init_encoder(nn::ParamVector& params, const EncoderSpec& spec, Rng& rng) {
  // A lookup reads one row, so the embedding is treated as a 1 -> d layer.
  const double embed_bound = std::sqrt(6.0 / (1.0 + static_cast<double>(spec.embed_dim)));
  auto embed = params.segment(kEmbedSegment);
  for (std::size_t i = 0; i < embed.size(); ++i) {
    embed[i] = i < spec.embed_dim ? 0.0 : rng.uniform(-embed_bound, embed_bound);
  }
  if (spec.variant == EncoderVariant::cnn) {
    for (auto w : spec.filter_widths) {
      const double fan_in = static_cast<double>(w * spec.embed_dim);
      const double bound = std::sqrt(6.0 / (fan_in + static_cast<double>(spec.filters_per_width)));
      for (double& x : params.segment(conv_weight(w))) x = rng.uniform(-bound, bound);
      for (double& x : params.segment(conv_bias(w))) x = 0.0;
    }
  }
}

Encoding encode(const EncoderSpec& spec, const nn::ParamVector& params, std::span<const std::uint32_t> tokens) {
  const std::size_t d = spec.embed_dim;
  const auto embed = params.segment(kEmbedSegment);
  if (embed.size() != spec.vocab_size * d) {
    throw ValidationError("encoder.embed holds " + std::to_string(embed.size()) + " values, expected " +
                          std::to_string(spec.vocab_size * d));
  }
  const std::size_t n = non_pad_prefix(tokens);
  Encoding enc;
  enc.tape.variant = spec.variant;
  enc.tape.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
  for (auto id : enc.tape.tokens) {
    if (id >= spec.vocab_size) throw ValidationError("token id " + std::to_string(id) + " outside vocabulary");
  }

  if (spec.variant == EncoderVariant::meanpool) {
    enc.h.assign(d, 0.0);
    if (n == 0) return enc;
    for (auto id : enc.tape.tokens) {
      const double* row = embed.data() + static_cast<std::size_t>(id) * d;
      for (std::size_t c = 0; c < d; ++c) enc.h[c] += row[c];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& x : enc.h) x *= inv;
    return enc;
  }

  const std::size_t f = spec.filters_per_width;
  enc.h.assign(spec.output_dim(), 0.0);
  enc.tape.argmax.assign(spec.output_dim(), -1);
  if (n == 0) return enc;
  std::size_t feature = 0;
  for (auto w : spec.filter_widths) {
    const auto wt = params.segment(conv_weight(w));
    const auto bias = params.segment(conv_bias(w));
    // Windows start on real tokens only; a text shorter than the filter gets
    // a single window whose tail reads the (zero) pad row.
    const std::size_t starts = n >= w ? n - w + 1 : 1;
    for (std::size_t k = 0; k < f; ++k, ++feature) {
      const double* filt = wt.data() + k * w * d;
      double best = -std::numeric_limits<double>::infinity();
      std::int64_t best_at = -1;
      for (std::size_t p = 0; p < starts; ++p) {
        double s = bias[k];
        for (std::size_t j = 0; j < w && p + j < n; ++j) {
          const double* row = embed.data() + static_cast<std::size_t>(enc.tape.tokens[p + j]) * d;
          const double* fj = filt + j * d;
          for (std::size_t c = 0; c < d; ++c) s += fj[c] * row[c];
        }
        if (s > best) {
          best = s;
          best_at = static_cast<std::int64_t>(p);
        }
      }
      if (best > 0.0) {
        enc.h[feature] = best;
        enc.tape.argmax[feature] = best_at;
      }
    }
  }
  return enc;
}

void encode_backward(const EncoderSpec& spec, const nn::ParamVector& params, const EncoderTape& tape,
                     std::span<const double> upstream, nn::ParamVector& grads) {
  if (upstream.size() != spec.output_dim()) {
    throw ValidationError("encode_backward: upstream has " + std::to_string(upstream.size()) + " values, expected " +
                          std::to_string(spec.output_dim()));
  }
  if (tape.variant != spec.variant) throw ValidationError("encode_backward: tape recorded for another variant");
  const std::size_t d = spec.embed_dim;
  const std::size_t n = tape.tokens.size();
  auto gembed = grads.segment(kEmbedSegment);

  if (spec.variant == EncoderVariant::meanpool) {
    if (n == 0) return;
    const double inv = 1.0 / static_cast<double>(n);
    for (auto id : tape.tokens) {
      double* row = gembed.data() + static_cast<std::size_t>(id) * d;
      for (std::size_t c = 0; c < d; ++c) row[c] += inv * upstream[c];
    }
    return;
  }

  if (tape.argmax.size() != spec.output_dim()) throw ValidationError("encode_backward: cnn tape is incomplete");
  const auto embed = params.segment(kEmbedSegment);
  const std::size_t f = spec.filters_per_width;
  std::size_t feature = 0;
  for (auto w : spec.filter_widths) {
    const auto wt = params.segment(conv_weight(w));
    auto gw = grads.segment(conv_weight(w));
    auto gb = grads.segment(conv_bias(w));
    for (std::size_t k = 0; k < f; ++k, ++feature) {
      const double g = upstream[feature];
      const std::int64_t at = tape.argmax[feature];
      if (at < 0 || g == 0.0) continue;
      const auto p = static_cast<std::size_t>(at);
      gb[k] += g;
      const double* filt = wt.data() + k * w * d;
      double* gfilt = gw.data() + k * w * d;
      for (std::size_t j = 0; j < w && p + j < n; ++j) {
        const auto id = static_cast<std::size_t>(tape.tokens[p + j]);
        const double* row = embed.data() + id * d;
        double* grow = gembed.data() + id * d;
        for (std::size_t c = 0; c < d; ++c) {
          gfilt[j * d + c] += g * row[c];
          grow[c] += g * filt[j * d + c];
        }
      }
    }
  }
}

}  // namespace mwss::text
