#pragma once

#include <filesystem>
#include <string>

namespace relmatch::util {

/// Reads a whole file. Throws IoFailure if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes `data` to `path` atomically: a sibling temp file is written first
/// and renamed over the target, so readers never observe a truncated file.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

} // namespace relmatch::util
