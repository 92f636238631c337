#include "bbmlab/io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bbmlab {

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for read: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string CsvTable::to_string() const {
  std::ostringstream ss;
  ss.precision(17);
  for (std::size_t i = 0; i < columns.size(); ++i)
    ss << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i)
      ss << r[i] << (i + 1 < r.size() ? "," : "\n");
  }
  return ss.str();
}

}  // namespace bbmlab
