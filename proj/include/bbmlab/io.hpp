#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace bbmlab {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// FNV-1a content hash, hex string; used for manifest bookkeeping.
std::string content_hash(const std::string& bytes);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// One observable per column, 't' first; plain RFC-ish CSV.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string to_string() const;
};

}  // namespace bbmlab
