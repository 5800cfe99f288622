/*
 * Copyright 2026 The nfqa Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <optional>
#include <vector>

#include "nfqa/decomposer.hpp"

namespace nfqa {

namespace {

// End index (inclusive) of the balanced region opening at `start`, or
// nullopt when brackets never balance. String literals are skipped.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '{':
      case '[':
        stack.push_back(c);
        break;
      case '}':
      case ']': {
        const char open = c == '}' ? '{' : '[';
        if (stack.empty() || stack.back() != open) return std::nullopt;
        stack.pop_back();
        if (stack.empty()) return i;
        break;
      }
      default:
        break;
    }
  }
  return std::nullopt;
}

}  // namespace

Json extract_first_json(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const auto end = balanced_end(text, i);
    if (!end) continue;
    Json parsed = Json::parse(text.substr(i, *end - i + 1), nullptr,
                              /*allow_exceptions=*/false);
    if (!parsed.is_discarded()) return parsed;
  }
  throw ParseError("no JSON object or list found in: " +
                   std::string(text.substr(0, 160)));
}

}  // namespace nfqa
