#include "memcoder/error.hpp"

namespace memcoder {

int to_int(ExitCode code) noexcept { return static_cast<int>(code); }

}  // namespace memcoder
