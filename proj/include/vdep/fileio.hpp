#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace vdep {

std::string read_text_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

// Writes to <path>.tmp then renames, so a failing stage never leaves a
// partially written artifact behind.
void write_text_atomic(const std::string& path, const std::string& content);
void write_binary_atomic(const std::string& path, const void* data, size_t bytes);

void ensure_parent_dir(const std::string& path);
void ensure_dir(const std::string& dir);

std::string path_join(const std::string& a, const std::string& b);

}  // namespace vdep
