#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace qrng::io {

std::vector<std::byte> read_file(const std::filesystem::path& path);

// Writes to `<path>.tmp` next to the target and renames over it. On failure
// the temporary is removed and IoError is thrown; no partial target remains.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace qrng::io
