#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace timeqa {

std::string read_text(const std::filesystem::path& path);

/// Non-blank lines of a line-delimited file, in order.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes to `<path>.tmp` then renames over `path`, creating parent directories.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace timeqa
