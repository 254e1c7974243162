#pragma once

#include <string>

namespace spartq {

// Writes to a temp file in the target directory, then renames over `path`.
// No partial artifact remains on failure.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace spartq
