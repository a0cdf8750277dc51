/*
 * Copyright 2026 The capsrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace capsrl {

inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kNoneRole = "_";
inline constexpr std::size_t kNoneRoleId = 0;

// Insertion-ordered label <-> id map. Id 0 is reserved: the unknown token for
// token vocabularies, the none-role for role inventories.
class Vocabulary {
 public:
  explicit Vocabulary(std::string reserved);

  static Vocabulary tokens() { return Vocabulary(std::string(kUnknownToken)); }
  static Vocabulary roles() { return Vocabulary(std::string(kNoneRole)); }

  std::size_t add(std::string_view label);
  std::optional<std::size_t> find(std::string_view label) const;
  // Falls back to the reserved id.
  std::size_t id(std::string_view label) const;
  const std::string& label(std::size_t id) const;

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.labels_ == b.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string lowercase(std::string_view text);

}  // namespace capsrl
