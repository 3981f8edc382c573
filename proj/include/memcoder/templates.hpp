#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace memcoder {

// Replaces every {{name}} in `tmpl` with vars[name]. Substituted values are
// not rescanned. Throws ConfigError for a placeholder with no value.
std::string substitute(const std::string& tmpl, const std::map<std::string, std::string>& vars);

// A directory of versioned prompt templates. The version string comes from
// the directory's VERSION file.
class TemplateSet {
 public:
  static TemplateSet load(const std::filesystem::path& dir);
  // Directory shipped with the build (templates/v1 under MEMCODER_DATA_DIR).
  static std::filesystem::path default_dir();

  const std::string& version() const noexcept { return version_; }
  // Hash over all template files; changes whenever any template changes.
  const std::string& content_hash() const noexcept { return hash_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  const std::string& get(const std::string& name) const;
  std::string render(const std::string& name, const std::map<std::string, std::string>& vars) const;

  static const std::vector<std::string>& required_names();

 private:
  std::filesystem::path dir_;
  std::string version_;
  std::string hash_;
  std::map<std::string, std::string> files_;
};

}  // namespace memcoder
