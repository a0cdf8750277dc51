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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "capsrl/conll.hpp"
#include "json.hpp"

namespace capsrl {

// Template grammar: [the AGENT] [distractor clause]? VERB [the PATIENT]
// [marker the FILLER]* [trailing distractor clause]?. Role 0 is filled by
// agents, role 1 by patients, every further role by its own word class
// introduced by a marker word.
struct GrammarSpec {
  std::size_t agents = 8;
  std::size_t patients = 8;
  std::size_t verbs = 4;
  std::size_t distractors = 8;  // distractor nouns, verbs and adjectives each
  std::size_t fillers = 6;      // nouns per additional role
  std::vector<std::string> roles = {"A0", "A1", "A2", "AM-LOC", "AM-TMP"};
  std::size_t min_length = 5;
  std::size_t max_length = 24;
  // Probability that a distractor noun copies the surface form of one of the
  // sentence's true argument fillers.
  double confusability = 0.3;
  double distractor_rate = 0.5;  // per distractor clause
  double optional_rate = 0.5;    // per additional role
  double dev_fraction = 0.25;
  double test_fraction = 0.25;
  std::uint64_t seed = 7;

  void validate() const;
};

nlohmann::json to_json(const GrammarSpec& spec);
GrammarSpec grammar_spec_from_json(const nlohmann::json& j);

struct SyntheticCorpus {
  std::vector<Sentence> train;
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
};

// `train_sentences` sentences in the train split; dev and test sizes follow
// the spec fractions. Every sentence has one predicate and each role at most
// once. Dev/test use only train-split word forms, and no sentence repeats
// across splits.
SyntheticCorpus generate(const GrammarSpec& spec, std::size_t train_sentences);

// Writes train.conll, dev.conll and test.conll.
void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus);

}  // namespace capsrl
