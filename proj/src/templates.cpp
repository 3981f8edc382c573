#include "memcoder/templates.hpp"

#include <vector>

#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(tmpl, pos, std::string::npos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    const auto name = tmpl.substr(open + 2, close - open - 2);
    auto it = vars.find(name);
    if (it == vars.end()) throw ConfigError("template placeholder {{" + name + "}} has no value");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

const std::vector<std::string>& TemplateSet::required_names() {
  static const std::vector<std::string> names = {
      "generation_system", "generation_user", "vanilla_user",     "task_block",
      "api_block",         "api_block_doc",   "api_block_accum",  "reflect_task_system",
      "reflect_task_user", "reflect_api_system", "reflect_api_user", "route_system",
      "route_user",
  };
  return names;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
  TemplateSet set;
  set.dir_ = dir;
  const auto version_file = dir / "VERSION";
  if (!fs::exists(version_file)) throw ConfigError("template directory has no VERSION file: " + dir.string());
  set.version_ = trim(read_file(version_file));
  for (const auto& name : required_names()) {
    const auto file = dir / (name + ".txt");
    if (!fs::exists(file)) throw ConfigError("missing template " + file.string());
    set.files_[name] = read_file(file);
  }
  set.hash_ = file_hash(dir);
  return set;
}

std::filesystem::path TemplateSet::default_dir() {
  return std::filesystem::path(MEMCODER_DATA_DIR) / "templates" / "v1";
}

const std::string& TemplateSet::get(const std::string& name) const {
  auto it = files_.find(name);
  if (it == files_.end()) throw ConfigError("unknown template '" + name + "'");
  return it->second;
}

std::string TemplateSet::render(const std::string& name, const std::map<std::string, std::string>& vars) const {
  return substitute(get(name), vars);
}

}  // namespace memcoder
