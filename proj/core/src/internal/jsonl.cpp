#include "internal/jsonl.hpp"

#include "mwss/corpus.hpp"
#include "mwss/errors.hpp"

namespace mwss::io {

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
}

nlohmann::json header(std::string_view schema, const std::string& manifest) {
  return nlohmann::json{{"schema", std::string(schema)}, {"version", data::kSchemaVersion}, {"manifest", manifest}};
}

nlohmann::json read_jsonl(const std::filesystem::path& path, std::string_view schema,
                          const std::function<void(const nlohmann::json&, std::size_t)>& on_record) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  nlohmann::json head;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail_at(path, lineno, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) fail_at(path, lineno, "expected a JSON object");
    if (head.is_null()) {
      if (!rec.contains("schema") || !rec["schema"].is_string() || rec["schema"].get<std::string>() != schema) {
        fail_at(path, lineno, "header must declare schema \"" + std::string(schema) + "\"");
      }
      if (!rec.contains("version") || rec["version"] != data::kSchemaVersion) {
        fail_at(path, lineno, "unsupported schema version (expected " + std::to_string(data::kSchemaVersion) + ")");
      }
      head = std::move(rec);
      continue;
    }
    try {
      on_record(rec, lineno);
    } catch (const nlohmann::json::exception& e) {
      fail_at(path, lineno, std::string("bad record: ") + e.what());
    }
  }
  if (head.is_null()) fail_at(path, lineno, "missing header line");
  return head;
}

std::ofstream open_output(const std::filesystem::path& path, std::string_view schema) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    bool same = false;
    try {
      auto h = nlohmann::json::parse(first);
      same = h.is_object() && h.value("schema", "") == schema && h.value("version", 0) == data::kSchemaVersion;
    } catch (const nlohmann::json::exception&) {
      same = false;
    }
    if (!same) {
      throw ValidationError("refusing to overwrite " + path.string() + ": it was written with a different schema");
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace mwss::io
