#include "premium/io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "premium/error.hpp"

namespace premium {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const fs::path parent = path.has_parent_path() ? path.parent_path() : ".";
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) {
    throw IoError("cannot create directory '" + parent.string() +
                  "': " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw IoError("write failure on '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot move '" + tmp.string() + "' into place: " +
                  ec.message());
  }
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw IoError("corrupt JSON document '" + path.string() +
                  "': " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

void require_document(const Json& doc, std::string_view kind) {
  if (!doc.is_object()) throw IoError("document is not a JSON object");
  const auto version = doc.find("format_version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw IoError("document has no format_version tag");
  }
  if (version->get<int>() != kFormatVersion) {
    throw IoError("unsupported format_version " + version->dump() +
                  " (expected " + std::to_string(kFormatVersion) + ")");
  }
  const auto found = doc.find("kind");
  if (found == doc.end() || !found->is_string() ||
      found->get<std::string>() != kind) {
    throw IoError("expected a '" + std::string(kind) + "' document");
  }
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& config) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf.data();
}

Json artifact_meta(std::uint64_t seed, const Json& config) {
  Json meta;
  meta["format_version"] = kFormatVersion;
  meta["seed"] = seed;
  meta["config_hash"] = config_hash(config);
  return meta;
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  std::string out = buf.data();
  // No "-0.000" in tables.
  if (out.front() == '-' &&
      out.find_first_not_of("-0.") == std::string::npos) {
    out.erase(0, 1);
  }
  return out;
}

std::string format_exact(double value) {
  std::array<char, 32> buf{};
  const auto result =
      std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(cell);
  }
  std::string out = "\"";
  for (const char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvBuilder::comment(std::string_view text) {
  text_ += "# ";
  text_ += text;
  text_ += '\n';
}

void CsvBuilder::header(std::initializer_list<std::string_view> names) {
  std::vector<std::string> cells(names.begin(), names.end());
  append_cells(cells);
}

void CsvBuilder::header(const std::vector<std::string>& names) {
  append_cells(names);
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
  append_cells(cells);
}

void CsvBuilder::append_cells(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) text_ += ',';
    text_ += csv_escape(cells[i]);
  }
  text_ += '\n';
}

std::vector<std::vector<std::string>> read_csv_cells(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c != '"') {
          cells.back() += c;
        } else if (i + 1 < line.size() && line[i + 1] == '"') {
          cells.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.emplace_back();
      } else {
        cells.back() += c;
      }
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace premium
