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
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "capsrl/conll.hpp"

namespace capsrl {

// Static word vectors read from "token v1 ... vdim" lines.
struct EmbeddingFile {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  std::vector<std::string> order;     // first-occurrence order
  std::vector<std::string> warnings;  // duplicate tokens, last occurrence wins

  const std::vector<double>* find(const std::string& token) const;
};

EmbeddingFile load_embeddings(const std::filesystem::path& path, std::size_t dim,
                              bool normalize = false);

// Precomputed per-token input vectors: "sentence-id token-index v1 ... vdim",
// both ids 1-based. Stand in for the lookup embeddings of the token sequence.
class ContextualVectors {
 public:
  std::size_t dim() const { return dim_; }
  bool has_sentence(std::size_t sentence_id) const;
  // Row-major [n x dim] for a sentence; throws if any token is missing.
  std::vector<double> sentence(std::size_t sentence_id, std::size_t length) const;

  friend ContextualVectors load_contextual_vectors(const std::filesystem::path& path,
                                                   std::size_t dim);

 private:
  std::size_t dim_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> vectors_;
};

ContextualVectors load_contextual_vectors(const std::filesystem::path& path, std::size_t dim);

// Fills EncodedInstance::inputs from sentence ids (ordinal + 1).
void attach_contextual(std::vector<EncodedInstance>& instances, const ContextualVectors& vectors);

}  // namespace capsrl
