#pragma once

#include <string>
#include <vector>

namespace memcoder {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using MessageList = std::vector<ChatMessage>;

}  // namespace memcoder
