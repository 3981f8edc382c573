#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace memcoder {

// 64-bit FNV-1a. Stable across platforms; used for fixture fingerprints
// and manifest content hashes, not for security.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string to_hex(std::uint64_t value);

// Hex FNV-1a of a string.
std::string content_hash(std::string_view data);

// Hex FNV-1a of a file's bytes. For a directory, hashes every regular file
// in lexicographic path order together with its relative path.
std::string file_hash(const std::filesystem::path& path);

}  // namespace memcoder
