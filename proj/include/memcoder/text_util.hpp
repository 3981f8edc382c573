#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace memcoder {

std::string trim(std::string_view text);
// Splits on '\n' and drops a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Keeps at most the last `max_lines` lines of `text`.
std::string tail_lines(std::string_view text, std::size_t max_lines);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

// Rough token estimate (4 bytes per token) used for budgeting and for
// backends that do not report usage.
std::size_t approx_tokens(std::string_view text) noexcept;

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so readers never see a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace memcoder
