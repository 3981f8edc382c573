#include "memcoder/reflector.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "memcoder/error.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {
namespace {

constexpr std::size_t kFeedbackLines = 10;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Blanks out comments and string literals, keeping newlines so line
// structure survives.
std::string strip_comments_and_strings(const std::string& code) {
  std::string out = code;
  std::size_t i = 0;
  const std::size_t n = code.size();
  while (i < n) {
    const char c = code[i];
    if (c == '#') {
      while (i < n && code[i] != '\n') out[i++] = ' ';
      continue;
    }
    if (c == '"' || c == '\'') {
      const bool triple = i + 2 < n && code[i + 1] == c && code[i + 2] == c;
      const std::size_t quote_len = triple ? 3 : 1;
      for (std::size_t k = 0; k < quote_len; ++k) out[i + k] = ' ';
      i += quote_len;
      while (i < n) {
        if (code[i] == '\\' && i + 1 < n) {
          out[i] = ' ';
          if (code[i + 1] != '\n') out[i + 1] = ' ';
          i += 2;
          continue;
        }
        if (!triple && code[i] == '\n') break;  // unterminated single-line string
        if (code[i] == c && (!triple || (i + 2 < n && code[i + 1] == c && code[i + 2] == c))) {
          for (std::size_t k = 0; k < quote_len; ++k) out[i + k] = ' ';
          i += quote_len;
          break;
        }
        if (code[i] != '\n') out[i] = ' ';
        ++i;
      }
      continue;
    }
    ++i;
  }
  return out;
}

std::vector<std::vector<std::string>> dotted_chains(const std::string& text) {
  std::vector<std::vector<std::string>> chains;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!ident_start(text[i]) || (i > 0 && ident_char(text[i - 1]))) {
      ++i;
      continue;
    }
    std::vector<std::string> segs;
    while (true) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      segs.push_back(text.substr(i, j - i));
      i = j;
      if (i + 1 < text.size() && text[i] == '.' && ident_start(text[i + 1])) {
        ++i;
        continue;
      }
      break;
    }
    chains.push_back(std::move(segs));
  }
  return chains;
}

std::vector<std::string> split_dots(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> words(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// alias -> fully qualified dotted path, from `import a.b as c` and
// `from a.b import x as y, z`.
std::map<std::string, std::string> import_aliases(const std::string& stripped) {
  std::map<std::string, std::string> aliases;
  for (const auto& raw_line : split_lines(stripped)) {
    const auto w = words(raw_line);
    if (w.size() >= 4 && w[0] == "import") {
      for (std::size_t k = 1; k < w.size();) {
        if (k + 2 < w.size() && w[k + 1] == "as") {
          aliases[w[k + 2]] = w[k];
          k += 3;
        } else {
          ++k;
        }
      }
    } else if (w.size() >= 4 && w[0] == "from" && w[2] == "import") {
      const auto& module = w[1];
      for (std::size_t k = 3; k < w.size(); ++k) {
        if (w[k] == "as") continue;
        if (k + 2 < w.size() && w[k + 1] == "as") {
          aliases[w[k + 2]] = module + "." + w[k];
          k += 2;
        } else {
          aliases[w[k]] = module + "." + w[k];
        }
      }
    }
  }
  return aliases;
}

}  // namespace

std::set<std::string> extract_invoked_apis(const std::string& code, const LibraryCatalog& catalog) {
  const auto stripped = strip_comments_and_strings(code);
  const auto aliases = import_aliases(stripped);
  std::set<std::string> found;
  for (auto segs : dotted_chains(stripped)) {
    if (auto it = aliases.find(segs.front()); it != aliases.end()) {
      auto expanded = split_dots(it->second);
      expanded.insert(expanded.end(), segs.begin() + 1, segs.end());
      segs = std::move(expanded);
    }
    for (std::size_t len = segs.size(); len > 0; --len) {
      std::string candidate = segs[0];
      for (std::size_t k = 1; k < len; ++k) candidate += "." + segs[k];
      if (catalog.contains(candidate)) {
        found.insert(std::move(candidate));
        break;
      }
    }
  }
  return found;
}

std::string fallback_task_guideline(const std::set<std::string>& invoked_apis, const ExecutionFeedback& feedback) {
  std::vector<std::string> names(invoked_apis.begin(), invoked_apis.end());
  std::ostringstream out;
  out << "APIs used: " << (names.empty() ? std::string("(none)") : join(names, ", "))
      << "; outcome: " << to_string(feedback.status) << " (" << feedback.tests_passed << "/" << feedback.tests_total
      << " tests passed)";
  return out.str();
}

RoutingAction parse_routing_decision(const std::string& response, const std::vector<Guideline>& existing,
                                     const std::string& candidate) {
  std::string line;
  for (const auto& l : split_lines(response)) {
    line = trim(l);
    if (!line.empty()) break;
  }
  while (!line.empty() && (line.back() == '.' || line.back() == ':')) line.pop_back();
  std::istringstream in(line);
  std::string verb;
  in >> verb;
  for (auto& c : verb) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::string rest;
  std::getline(in, rest);
  rest = trim(rest);
  if (verb == "ADD" && rest.empty()) return routing::Add{candidate};
  if (verb == "DISCARD" && rest.empty()) return routing::Discard{};
  if (verb == "DELETE") {
    if (rest.empty() || !std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return routing::Discard{};
    }
    if (rest.size() > 9) return routing::Add{candidate};
    const auto index = std::stoul(rest);
    if (index >= existing.size()) return routing::Add{candidate};
    return routing::Delete{existing[index].id, candidate};
  }
  return routing::Discard{};
}

Reflector::Reflector(LlmBackend& llm, const TemplateSet& templates, ReflectorConfig config)
    : llm_(llm), templates_(templates), config_(std::move(config)) {}

std::optional<std::string> Reflector::ask(MessageList messages) {
  ++calls_;
  ChatRequest request;
  request.messages = std::move(messages);
  request.temperature = config_.temperature;
  request.top_p = config_.top_p;
  request.max_tokens = config_.max_tokens;
  request.model = config_.model;
  try {
    return trim(llm_.complete(request, 0).text);
  } catch (const Error&) {
    ++failures_;
    return std::nullopt;
  }
}

MessageList Reflector::task_prompt(const std::string& requirement, const std::string& code,
                                   const ExecutionFeedback& feedback, const std::set<std::string>& invoked_apis) const {
  std::vector<std::string> names(invoked_apis.begin(), invoked_apis.end());
  return {{"system", templates_.get("reflect_task_system")},
          {"user", templates_.render("reflect_task_user", {{"requirement", requirement},
                                                           {"code", code},
                                                           {"outcome", to_string(feedback.status)},
                                                           {"feedback", feedback.summary(kFeedbackLines)},
                                                           {"apis", names.empty() ? "(none)" : join(names, ", ")}})}};
}

MessageList Reflector::api_prompt(const std::string& api_name, const ApiDoc& doc, const std::string& code,
                                  const ExecutionFeedback& feedback) const {
  return {{"system", templates_.get("reflect_api_system")},
          {"user", templates_.render("reflect_api_user", {{"api_name", api_name},
                                                          {"doc", doc.render()},
                                                          {"code", code},
                                                          {"outcome", to_string(feedback.status)},
                                                          {"feedback", feedback.summary(kFeedbackLines)}})}};
}

MessageList Reflector::route_prompt(const std::string& candidate, const ApiDoc& doc,
                                    const std::vector<Guideline>& existing) const {
  std::string listed;
  if (existing.empty()) {
    listed = "(none)";
  } else {
    for (std::size_t i = 0; i < existing.size(); ++i) {
      if (i) listed += "\n";
      listed += "[" + std::to_string(i) + "] " + existing[i].text;
    }
  }
  return {{"system", templates_.get("route_system")},
          {"user", templates_.render("route_user", {{"api_name", doc.name},
                                                    {"doc", doc.render()},
                                                    {"candidate", candidate},
                                                    {"existing", listed}})}};
}

std::string Reflector::reflect_task(const std::string& requirement, const std::string& code,
                                    const ExecutionFeedback& feedback, const std::set<std::string>& invoked_apis) {
  auto reply = ask(task_prompt(requirement, code, feedback, invoked_apis));
  if (!reply || reply->empty()) return fallback_task_guideline(invoked_apis, feedback);
  return *reply;
}

std::optional<std::string> Reflector::reflect_api(const std::string& api_name, const ApiDoc& doc,
                                                  const std::string& code, const ExecutionFeedback& feedback) {
  auto reply = ask(api_prompt(api_name, doc, code, feedback));
  if (!reply || reply->empty()) return std::nullopt;
  return reply;
}

RoutingAction Reflector::route_guideline(const std::string& candidate, const ApiDoc& doc,
                                         const std::vector<Guideline>& existing) {
  auto reply = ask(route_prompt(candidate, doc, existing));
  if (!reply) return routing::Discard{};
  return parse_routing_decision(*reply, existing, candidate);
}

}  // namespace memcoder
