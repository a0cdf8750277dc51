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

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "capsrl/vocab.hpp"

namespace capsrl {

// CoNLL-2009 fixed columns preceding the APRED block.
inline constexpr std::size_t kFixedColumns = 14;
enum Column : std::size_t {
  kId = 0, kForm = 1, kLemma = 2, kPlemma = 3, kPos = 4, kPpos = 5, kFeat = 6, kPfeat = 7,
  kHead = 8, kPhead = 9, kDeprel = 10, kPdeprel = 11, kFillpred = 12, kPred = 13,
};

using ConllRow = std::array<std::string, kFixedColumns>;

struct Token {
  std::size_t index = 1;  // 1-based, as in the ID column
  std::string form;
  std::string lemma;
  bool is_predicate = false;
};

// One predicate of a sentence with a role label per token ("_" is none).
struct PredicateInstance {
  std::size_t sentence = 0;   // 0-based ordinal of the sentence in its file
  std::size_t predicate = 0;  // 0-based token position
  std::vector<std::string> roles;
};

struct Sentence {
  std::vector<ConllRow> rows;
  std::vector<PredicateInstance> predicates;  // in token order, one per FILLPRED=Y

  std::size_t size() const { return rows.size(); }
  Token token(std::size_t position) const;
};

std::vector<Sentence> read_conll(const std::filesystem::path& path);
std::vector<Sentence> read_conll(std::istream& in, const std::string& source = "<stream>");

void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences);
void write_conll(std::ostream& out, const std::vector<Sentence>& sentences);

// Replaces the role labels of every predicate instance, visited in corpus
// order, with predicted role ids. Throws on ids outside `roles` and on count
// mismatches.
std::vector<Sentence> with_predictions(const std::vector<Sentence>& sentences,
                                       const std::vector<std::vector<std::size_t>>& predicted,
                                       const Vocabulary& roles);

void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                 const std::vector<std::vector<std::size_t>>& predicted, const Vocabulary& roles);

// All predicate instances of a corpus, in order.
std::vector<PredicateInstance> instances(const std::vector<Sentence>& sentences);

// Lowercased forms, then lemmas, in file order.
void add_tokens(const std::vector<Sentence>& sentences, Vocabulary& vocab);
void add_roles(const std::vector<Sentence>& sentences, Vocabulary& roles);

// Model-ready view of one predicate instance.
struct EncodedInstance {
  std::size_t sentence = 0;
  std::size_t predicate = 0;
  std::size_t predicate_lemma = 0;
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> roles;
  // Optional precomputed token vectors [n x d_e] replacing the table lookup.
  std::vector<double> inputs;
};

// Gold roles missing from `roles` map to the none-role unless strict is set,
// in which case they raise.
std::vector<EncodedInstance> encode(const std::vector<Sentence>& sentences, const Vocabulary& tokens,
                                    const Vocabulary& roles, bool strict = false);

}  // namespace capsrl
