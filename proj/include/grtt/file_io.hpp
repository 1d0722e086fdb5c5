#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace grtt {

/// Writes to a sibling temporary file, then renames it over `path`, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

std::vector<std::byte> read_file(const std::filesystem::path& path);

}  // namespace grtt
