#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mwss/config.hpp"
#include "mwss/model.hpp"
#include "mwss/param_vector.hpp"

namespace mwss::harness {

/// A trained classifier and LWN together with the configuration that built them.
///
/// File layout: one JSON header line, then the raw parameter values
/// (theta, then alpha) as little-endian IEEE-754 doubles.
struct Checkpoint {
  std::string manifest;
  std::string method;
  std::uint64_t seed = 0;
  RunConfig config;
  model::ModelSpec spec;  // may differ from config.model in the number of sources
  nn::ParamVector theta;
  nn::ParamVector alpha;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Rejects files whose parameter layout does not match the stored spec.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mwss::harness
