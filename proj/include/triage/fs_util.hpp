#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace triage {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames it over `path`. Parent
// directories are created as needed. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace triage
