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

#include "capsrl/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace capsrl {

Vocabulary::Vocabulary(std::string reserved) { add(reserved); }

std::size_t Vocabulary::add(std::string_view label) {
  std::string key(label);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const std::size_t id = labels_.size();
  labels_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<std::size_t> Vocabulary::find(std::string_view label) const {
  if (auto it = index_.find(std::string(label)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocabulary::id(std::string_view label) const { return find(label).value_or(0); }

const std::string& Vocabulary::label(std::size_t id) const {
  if (id >= labels_.size()) {
    throw std::out_of_range("label id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(labels_.size()));
  }
  return labels_[id];
}

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace capsrl
