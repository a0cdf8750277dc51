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

#include "capsrl/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "capsrl/error.hpp"

namespace capsrl {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string field;
  while (in >> field) out.push_back(std::move(field));
  return out;
}

double parse_real(const std::string& text, const std::string& source, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw ParseError(source, line, "not a real number: '" + text + "'");
  return value;
}

std::size_t parse_index(const std::string& text, const std::string& source, std::size_t line) {
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.front() == '-') {
    throw ParseError(source, line, "not an index: '" + text + "'");
  }
  return value;
}

}  // namespace

const std::vector<double>* EmbeddingFile::find(const std::string& token) const {
  auto it = vectors.find(token);
  return it == vectors.end() ? nullptr : &it->second;
}

EmbeddingFile load_embeddings(const std::filesystem::path& path, std::size_t dim, bool normalize) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string source = path.string();
  EmbeddingFile out;
  out.dim = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw ParseError(source, line_no,
                       "expected token and " + std::to_string(dim) + " values, got " +
                           std::to_string(fields.size() - 1) + " values");
    }
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = parse_real(fields[d + 1], source, line_no);
    if (normalize) {
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (double& x : v) x /= norm;
    }
    auto [it, inserted] = out.vectors.insert_or_assign(fields[0], std::move(v));
    if (inserted) {
      out.order.push_back(fields[0]);
    } else {
      out.warnings.push_back(source + ":" + std::to_string(line_no) + ": duplicate token '" +
                             fields[0] + "', keeping the last occurrence");
    }
  }
  return out;
}

bool ContextualVectors::has_sentence(std::size_t sentence_id) const {
  auto it = vectors_.lower_bound({sentence_id, 0});
  return it != vectors_.end() && it->first.first == sentence_id;
}

std::vector<double> ContextualVectors::sentence(std::size_t sentence_id,
                                                std::size_t length) const {
  std::vector<double> out;
  out.reserve(length * dim_);
  for (std::size_t t = 1; t <= length; ++t) {
    auto it = vectors_.find({sentence_id, t});
    if (it == vectors_.end()) {
      throw std::out_of_range("no contextual vector for sentence " + std::to_string(sentence_id) +
                              " token " + std::to_string(t));
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

ContextualVectors load_contextual_vectors(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string source = path.string();
  ContextualVectors out;
  out.dim_ = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 2) {
      throw ParseError(source, line_no,
                       "expected sentence id, token index and " + std::to_string(dim) +
                           " values, got " + std::to_string(fields.size()) + " fields");
    }
    const auto sentence = parse_index(fields[0], source, line_no);
    const auto token = parse_index(fields[1], source, line_no);
    if (sentence == 0 || token == 0) throw ParseError(source, line_no, "ids are 1-based");
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) v[d] = parse_real(fields[d + 2], source, line_no);
    out.vectors_[{sentence, token}] = std::move(v);
  }
  return out;
}

void attach_contextual(std::vector<EncodedInstance>& instances, const ContextualVectors& vectors) {
  for (auto& inst : instances) inst.inputs = vectors.sentence(inst.sentence + 1, inst.tokens.size());
}

}  // namespace capsrl
