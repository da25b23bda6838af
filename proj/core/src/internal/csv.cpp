#include "internal/csv.hpp"

#include <charconv>

#include "mwss/errors.hpp"

namespace mwss::io {
namespace {

std::string existing_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return "";
  const auto at = line.find("schema=");
  if (line.rfind("# ", 0) != 0 || at == std::string::npos) return "(unversioned)";
  return line.substr(at + 7);
}

std::string quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema, const std::string& manifest,
                     const std::vector<std::string>& columns)
    : width_(columns.size()) {
  const std::string versioned = schema + "/v1";
  if (std::filesystem::exists(path)) {
    const auto old = existing_schema(path);
    if (old != versioned) {
      throw ValidationError("refusing to overwrite " + path.string() + ": it holds schema " + old + ", not " + versioned);
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw ValidationError("cannot write " + path.string());
  out_ << "# manifest=" << manifest << " schema=" << versioned << '\n';
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << quote(cells[i]);
  }
  out_ << '\n';
}

std::string real(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

}  // namespace mwss::io
