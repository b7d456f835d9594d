#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace premium {

using Json = nlohmann::ordered_json;

// Version tag written into (and required from) every JSON document.
inline constexpr int kFormatVersion = 1;

std::string read_text_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so a
// failed write never leaves a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& doc);

// Throws IoError unless doc is an object with the expected kind tag and
// format version.
void require_document(const Json& doc, std::string_view kind);

std::uint64_t fnv1a64(std::string_view bytes);

// 16 hex digits of FNV-1a over the compact dump of a config document.
std::string config_hash(const Json& config);

// Provenance block embedded in every artifact.
Json artifact_meta(std::uint64_t seed, const Json& config);

// "1.235" style, used for report tables.
std::string format_fixed(double value, int decimals);

// Shortest representation that round-trips to the same double.
std::string format_exact(double value);

// Comma-separated text with LF line endings. Leading '#' lines carry
// provenance; consumers skip them.
class CsvBuilder {
 public:
  void comment(std::string_view text);
  void header(std::initializer_list<std::string_view> names);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const noexcept { return text_; }

 private:
  void append_cells(const std::vector<std::string>& cells);
  std::string text_;
};

std::string csv_escape(std::string_view cell);

// Lines of a CSV file with '#' comment lines removed, split on commas.
// Quoted cells may contain commas and doubled quotes but not line breaks.
std::vector<std::vector<std::string>> read_csv_cells(
    const std::filesystem::path& path);

}  // namespace premium
