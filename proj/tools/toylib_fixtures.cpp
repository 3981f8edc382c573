// Regenerates the scripted toylib fixtures:
//   toylib_fixtures [out_dir] [templates_dir]
#include <iostream>

#include "memcoder/error.hpp"
#include "toylib/toylib_world.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : std::filesystem::path(MEMCODER_DATA_DIR) / "data/toylib";
  const std::filesystem::path tdir = argc > 2 ? argv[2] : memcoder::TemplateSet::default_dir();
  try {
    const auto templates = memcoder::TemplateSet::load(tdir);
    toylib::write_fixtures(toylib::generate_fixtures(templates), out);
  } catch (const memcoder::Error& e) {
    std::cerr << "toylib_fixtures: " << e.what() << "\n";
    return memcoder::to_int(e.exit_code());
  }
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}
