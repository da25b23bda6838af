#pragma once

// Internal helpers shared by the file readers/writers. Not installed.

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace mwss::io {

/// Reads a JSONL file whose first line is a header with the given schema name.
/// `on_record` receives each parsed record and its 1-based line number.
nlohmann::json read_jsonl(const std::filesystem::path& path, std::string_view schema,
                          const std::function<void(const nlohmann::json&, std::size_t)>& on_record);

/// Opens `path` for writing after checking that an existing file carries the same schema header.
std::ofstream open_output(const std::filesystem::path& path, std::string_view schema);

nlohmann::json header(std::string_view schema, const std::string& manifest);

/// Throws ValidationError "<path>:<line>: <what>".
[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& what);

}  // namespace mwss::io
