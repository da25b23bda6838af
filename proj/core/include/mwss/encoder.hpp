#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mwss/param_vector.hpp"
#include "mwss/rng.hpp"
#include "mwss/tokenizer.hpp"

namespace mwss::text {

enum class EncoderVariant { meanpool, cnn };

EncoderVariant parse_encoder_variant(std::string_view name);
std::string_view to_string(EncoderVariant v);

struct EncoderSpec {
  EncoderVariant variant = EncoderVariant::meanpool;
  std::size_t vocab_size = std::size_t{1} << 15;
  std::size_t embed_dim = 128;
  std::vector<std::size_t> filter_widths{3, 4, 5};
  std::size_t filters_per_width = 100;

  /// d for meanpool, filters_per_width * |filter_widths| for cnn.
  std::size_t output_dim() const;
  void validate() const;
};

inline constexpr std::string_view kEmbedSegment = "encoder.embed";

/// "encoder.embed" [V, d] plus "encoder.conv<w>.w" [filters, w*d] and
/// "encoder.conv<w>.b" [filters] for the cnn variant.
void add_encoder_segments(nn::Layout& layout, const EncoderSpec& spec);

/// Uniform embeddings in ±sqrt(6/(V+d)) with the pad row at zero; Glorot conv filters.
void init_encoder(nn::ParamVector& params, const EncoderSpec& spec, Rng& rng);

struct EncoderTape {
  EncoderVariant variant = EncoderVariant::meanpool;
  std::vector<std::uint32_t> tokens;  // non-pad prefix
  // cnn: for every output feature, window start of the max (or -1 when the
  // feature is zero because nothing survived masking or the ReLU clipped it).
  std::vector<std::int64_t> argmax;
};

struct Encoding {
  std::vector<double> h;
  EncoderTape tape;
};

/// Content representation h(x). Pad positions never contribute: meanpool
/// averages non-pad rows only (all-pad gives 0); cnn max-pools ReLU(conv)
/// over windows that start on a non-pad token.
Encoding encode(const EncoderSpec& spec, const nn::ParamVector& params, std::span<const std::uint32_t> tokens);

/// Accumulates dL/dparams for dL/dh = `upstream`. The pad row never receives gradient.
void encode_backward(const EncoderSpec& spec, const nn::ParamVector& params, const EncoderTape& tape,
                     std::span<const double> upstream, nn::ParamVector& grads);

}  // namespace mwss::text
