#include "mwss/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "mwss/errors.hpp"
#include "mwss/hash.hpp"

namespace mwss::harness {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

constexpr const char* kSchema = "mwss.checkpoint";

void write_values(std::ostream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_values(std::istream& in, std::span<double> v, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double))) {
    throw ValidationError("checkpoint " + path.string() + " is truncated");
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::string first;
    std::getline(in, first);
    bool same = false;
    try {
      same = json::parse(first).value("schema", "") == kSchema;
    } catch (const json::exception&) {
    }
    if (!same) throw ValidationError("refusing to overwrite " + path.string() + ": not a checkpoint");
  }
  json h{{"schema", kSchema},
         {"version", 1},
         {"manifest", ckpt.manifest},
         {"method", ckpt.method},
         {"seed", ckpt.seed},
         {"config", to_ini(ckpt.config)},
         {"config_hash", config_hash(ckpt.config)},
         {"num_sources", ckpt.spec.num_sources},
         {"theta_size", ckpt.theta.size()},
         {"theta_layout", hex64(ckpt.theta.layout().fingerprint())},
         {"alpha_size", ckpt.alpha.size()},
         {"alpha_layout", hex64(ckpt.alpha.layout().fingerprint())}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << h.dump() << '\n';
  write_values(out, ckpt.theta.values());
  write_values(out, ckpt.alpha.values());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path.string());
  std::string first;
  std::getline(in, first);
  json h;
  try {
    h = json::parse(first);
  } catch (const json::exception&) {
    throw ValidationError(path.string() + " is not a checkpoint (bad header)");
  }
  if (h.value("schema", "") != kSchema || h.value("version", 0) != 1) {
    throw ValidationError(path.string() + " is not a version 1 checkpoint");
  }
  Checkpoint c;
  try {
    c.manifest = h.at("manifest").get<std::string>();
    c.method = h.at("method").get<std::string>();
    c.seed = h.at("seed").get<std::uint64_t>();
    c.config = parse_config(h.at("config").get<std::string>(), path.string() + " (embedded config)");
    if (config_hash(c.config) != h.at("config_hash").get<std::string>()) {
      throw ValidationError("checkpoint " + path.string() + ": embedded config does not match its hash");
    }
    c.spec = c.config.model;
    c.spec.num_sources = h.at("num_sources").get<std::size_t>();
    const auto theta_layout = model::classifier_layout(c.spec);
    const auto alpha_layout = model::lwn_layout(c.spec);
    if (hex64(theta_layout->fingerprint()) != h.at("theta_layout").get<std::string>() ||
        theta_layout->total() != h.at("theta_size").get<std::size_t>() ||
        hex64(alpha_layout->fingerprint()) != h.at("alpha_layout").get<std::string>() ||
        alpha_layout->total() != h.at("alpha_size").get<std::size_t>()) {
      throw ValidationError("checkpoint " + path.string() + ": parameter layout does not match its model spec");
    }
    c.theta = nn::ParamVector(theta_layout);
    c.alpha = nn::ParamVector(alpha_layout);
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + ": " + e.what());
  }
  read_values(in, c.theta.values(), path);
  read_values(in, c.alpha.values(), path);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ValidationError("checkpoint " + path.string() + " has trailing bytes");
  }
  return c;
}

}  // namespace mwss::harness
