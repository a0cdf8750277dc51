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
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "capsrl/vocab.hpp"
#include "json.hpp"

namespace capsrl {

// Role sequences per proposition; id 0 is the none-role.
using RoleSequences = std::vector<std::vector<std::size_t>>;

struct ArgumentCounts {
  std::size_t predicted = 0;
  std::size_t gold = 0;
  std::size_t correct = 0;
};

// Role-only labeled scores; predicate senses are not scored.
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double exact_match = 0.0;
  double token_accuracy = 0.0;
  ArgumentCounts counts;
  std::size_t propositions = 0;
  std::size_t exact = 0;
  std::size_t tokens = 0;
  std::size_t tokens_correct = 0;
};

// An argument is a (token, role != none) pair; it is correct when both match.
EvalReport score(const RoleSequences& gold, const RoleSequences& predicted);

struct DuplicateReport {
  std::size_t propositions = 0;
  std::size_t violating = 0;                  // propositions with a role on >= 2 tokens
  std::map<std::size_t, std::size_t> per_role;  // role -> violating propositions
};

DuplicateReport count_duplicate_violations(const RoleSequences& propositions);

// Label changes between iteration `from` and `from + 1`, indexed [a * L + b]
// for a change a -> b. A change is correct when b is the gold label.
struct TransitionMatrix {
  std::size_t from = 0;
  std::size_t labels = 0;
  std::vector<std::size_t> correct;
  std::vector<std::size_t> wrong;

  std::size_t total_correct() const;
  std::size_t total_wrong() const;
};

// trajectory[p][t] holds the argmax labels of proposition p at iteration t.
std::vector<TransitionMatrix> transitions(
    const std::vector<std::vector<std::vector<std::size_t>>>& trajectory, const RoleSequences& gold,
    std::size_t num_labels);

// sign(q) * log|q|, and 0 for q == 0.
double signlog(double q);

enum class BreakdownKey { sentence_length, argument_count };

// Bins: length decades keyed by their lower bound, or gold argument counts.
// Empty bins are absent.
std::map<std::size_t, EvalReport> breakdown(const RoleSequences& gold, const RoleSequences& predicted,
                                            BreakdownKey key);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const DuplicateReport& report, const Vocabulary& roles);
nlohmann::json to_json(const TransitionMatrix& matrix, const Vocabulary& roles);
std::string to_text(const EvalReport& report);

// Labels kept for display: every label when min_count == 0, otherwise labels
// occurring more than min_count times in gold.
std::vector<std::size_t> frequent_labels(const RoleSequences& gold, std::size_t num_labels,
                                         std::size_t min_count);

// CSV with rows = from-label, cols = to-label over the kept labels.
void write_transition_csv(std::ostream& out, const std::vector<std::size_t>& matrix,
                          std::size_t num_labels, const std::vector<std::size_t>& kept,
                          const Vocabulary& roles);

}  // namespace capsrl
