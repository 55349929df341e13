#include "vdep/fileio.hpp"

#include <fstream>
#include <sstream>

#include "vdep/common.hpp"

namespace fs = std::filesystem;

namespace vdep {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: {}", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: {}", path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  write_binary_atomic(path, content.data(), content.size());
}

void write_binary_atomic(const std::string& path, const void* data, size_t bytes) {
  ensure_parent_dir(path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write file: {}", tmp);
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) fail("short write: {}", tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail("cannot rename {} -> {}: {}", tmp, path, ec.message());
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail("cannot create directory {}: {}", dir, ec.message());
}

std::string path_join(const std::string& a, const std::string& b) {
  return (fs::path(a) / b).string();
}

}  // namespace vdep
