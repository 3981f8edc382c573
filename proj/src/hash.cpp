#include "memcoder/hash.hpp"

#include <algorithm>
#include <vector>

#include "memcoder/error.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string content_hash(std::string_view data) { return to_hex(fnv1a64(data)); }

std::string file_hash(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(path)) {
    return content_hash(read_file(path));
  }
  std::vector<fs::path> files;
  for (const auto& item : fs::recursive_directory_iterator(path)) {
    if (item.is_regular_file()) files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());
  std::uint64_t h = fnv1a64("");
  for (const auto& file : files) {
    h = fnv1a64(fs::relative(file, path).generic_string(), h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(read_file(file), h);
  }
  return to_hex(h);
}

}  // namespace memcoder
