#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sheetaudit {

/// Whole file as bytes. Throws UnreadableFile.
std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place, so readers
/// never see a partial file. Throws IoFailure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sheetaudit
