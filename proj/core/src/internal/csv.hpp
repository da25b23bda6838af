#pragma once

// CSV output with a versioned first line: "# manifest=<hash> schema=<name>/v1".

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mwss::io {

class CsvWriter {
 public:
  /// Refuses to replace an existing file written under another schema.
  CsvWriter(const std::filesystem::path& path, const std::string& schema, const std::string& manifest,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

/// Shortest round-trip form.
std::string real(double v);

}  // namespace mwss::io
