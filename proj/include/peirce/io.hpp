#pragma once
// Small file helpers used across modules and the CLI.

#include <filesystem>
#include <string>
#include <vector>

#include "peirce/errors.hpp"

namespace peirce::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<size_t, std::string>> read_lines(const std::string& path);

void ensure_dir(const std::filesystem::path& dir);

}  // namespace peirce::io
