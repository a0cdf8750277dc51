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

#include "capsrl/eval.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace capsrl {

namespace {

void check_aligned(const RoleSequences& gold, const RoleSequences& predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("misaligned corpora: " + std::to_string(gold.size()) +
                                " gold vs " + std::to_string(predicted.size()) +
                                " predicted propositions");
  }
  for (std::size_t p = 0; p < gold.size(); ++p) {
    if (gold[p].size() != predicted[p].size()) {
      throw std::invalid_argument("misaligned proposition " + std::to_string(p) + ": " +
                                  std::to_string(gold[p].size()) + " gold vs " +
                                  std::to_string(predicted[p].size()) + " predicted tokens");
    }
  }
}

void accumulate(EvalReport& r, const std::vector<std::size_t>& gold,
                const std::vector<std::size_t>& predicted) {
  bool exact = true;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool same = gold[i] == predicted[i];
    exact = exact && same;
    r.tokens_correct += same ? 1 : 0;
    if (gold[i] != kNoneRoleId) ++r.counts.gold;
    if (predicted[i] != kNoneRoleId) {
      ++r.counts.predicted;
      if (same) ++r.counts.correct;
    }
  }
  r.tokens += gold.size();
  ++r.propositions;
  r.exact += exact ? 1 : 0;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void finalize(EvalReport& r) {
  r.precision = ratio(r.counts.correct, r.counts.predicted);
  r.recall = ratio(r.counts.correct, r.counts.gold);
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  r.exact_match = ratio(r.exact, r.propositions);
  r.token_accuracy = ratio(r.tokens_correct, r.tokens);
}

std::size_t argument_count(const std::vector<std::size_t>& roles) {
  std::size_t n = 0;
  for (auto r : roles) n += r != kNoneRoleId ? 1 : 0;
  return n;
}

}  // namespace

EvalReport score(const RoleSequences& gold, const RoleSequences& predicted) {
  check_aligned(gold, predicted);
  EvalReport r;
  for (std::size_t p = 0; p < gold.size(); ++p) accumulate(r, gold[p], predicted[p]);
  finalize(r);
  return r;
}

DuplicateReport count_duplicate_violations(const RoleSequences& propositions) {
  DuplicateReport out;
  for (const auto& roles : propositions) {
    ++out.propositions;
    std::map<std::size_t, std::size_t> seen;
    for (auto r : roles) {
      if (r != kNoneRoleId) ++seen[r];
    }
    bool violating = false;
    for (const auto& [role, count] : seen) {
      if (count >= 2) {
        violating = true;
        ++out.per_role[role];
      }
    }
    out.violating += violating ? 1 : 0;
  }
  return out;
}

std::size_t TransitionMatrix::total_correct() const {
  std::size_t n = 0;
  for (auto c : correct) n += c;
  return n;
}

std::size_t TransitionMatrix::total_wrong() const {
  std::size_t n = 0;
  for (auto c : wrong) n += c;
  return n;
}

std::vector<TransitionMatrix> transitions(
    const std::vector<std::vector<std::vector<std::size_t>>>& trajectory, const RoleSequences& gold,
    std::size_t num_labels) {
  if (trajectory.size() != gold.size()) {
    throw std::invalid_argument("transitions: " + std::to_string(trajectory.size()) +
                                " trajectories for " + std::to_string(gold.size()) +
                                " gold propositions");
  }
  std::size_t steps = 0;
  for (std::size_t p = 0; p < trajectory.size(); ++p) {
    if (trajectory[p].size() < 2) {
      throw std::invalid_argument("transitions: trajectory of proposition " + std::to_string(p) +
                                  " has fewer than 2 iterations");
    }
    if (p == 0) steps = trajectory[p].size();
    if (trajectory[p].size() != steps) {
      throw std::invalid_argument("transitions: trajectories differ in length");
    }
  }
  std::vector<TransitionMatrix> out;
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    TransitionMatrix m;
    m.from = t;
    m.labels = num_labels;
    m.correct.assign(num_labels * num_labels, 0);
    m.wrong.assign(num_labels * num_labels, 0);
    for (std::size_t p = 0; p < trajectory.size(); ++p) {
      const auto& before = trajectory[p][t];
      const auto& after = trajectory[p][t + 1];
      if (before.size() != gold[p].size() || after.size() != gold[p].size()) {
        throw std::invalid_argument("transitions: proposition " + std::to_string(p) +
                                    " length differs from gold");
      }
      for (std::size_t i = 0; i < before.size(); ++i) {
        if (before[i] == after[i]) continue;
        if (before[i] >= num_labels || after[i] >= num_labels) {
          throw std::invalid_argument("transitions: label outside inventory");
        }
        auto& target = after[i] == gold[p][i] ? m.correct : m.wrong;
        ++target[before[i] * num_labels + after[i]];
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

double signlog(double q) {
  if (q == 0.0) return 0.0;
  const double magnitude = std::log(std::fabs(q));
  return q > 0 ? magnitude : -magnitude;
}

std::map<std::size_t, EvalReport> breakdown(const RoleSequences& gold, const RoleSequences& predicted,
                                            BreakdownKey key) {
  check_aligned(gold, predicted);
  std::map<std::size_t, EvalReport> bins;
  for (std::size_t p = 0; p < gold.size(); ++p) {
    const std::size_t bin = key == BreakdownKey::sentence_length ? gold[p].size() / 10 * 10
                                                                 : argument_count(gold[p]);
    accumulate(bins[bin], gold[p], predicted[p]);
  }
  for (auto& [bin, report] : bins) finalize(report);
  return bins;
}

nlohmann::json to_json(const EvalReport& r) {
  return {
      {"precision", r.precision},
      {"recall", r.recall},
      {"f1", r.f1},
      {"exact_match", r.exact_match},
      {"token_accuracy", r.token_accuracy},
      {"predicted_arguments", r.counts.predicted},
      {"gold_arguments", r.counts.gold},
      {"correct_arguments", r.counts.correct},
      {"propositions", r.propositions},
      {"exact_propositions", r.exact},
      {"scoring", "role-only F1"},
  };
}

nlohmann::json to_json(const DuplicateReport& r, const Vocabulary& roles) {
  nlohmann::json per_role = nlohmann::json::object();
  for (const auto& [role, count] : r.per_role) per_role[roles.label(role)] = count;
  return {{"propositions", r.propositions}, {"violating", r.violating}, {"per_role", per_role}};
}

nlohmann::json to_json(const TransitionMatrix& m, const Vocabulary& roles) {
  nlohmann::json changes = nlohmann::json::array();
  for (std::size_t a = 0; a < m.labels; ++a)
    for (std::size_t b = 0; b < m.labels; ++b) {
      const auto good = m.correct[a * m.labels + b];
      const auto bad = m.wrong[a * m.labels + b];
      if (good == 0 && bad == 0) continue;
      changes.push_back({{"from", roles.label(a)},
                         {"to", roles.label(b)},
                         {"correct", good},
                         {"wrong", bad},
                         {"correct_signlog", signlog(static_cast<double>(good))},
                         {"wrong_signlog", -signlog(static_cast<double>(bad))}});
    }
  return {{"from_iteration", m.from + 1},
          {"to_iteration", m.from + 2},
          {"total_correct", m.total_correct()},
          {"total_wrong", m.total_wrong()},
          {"changes", changes}};
}

std::string to_text(const EvalReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(16) << "precision" << 100.0 * r.precision << '\n'
      << std::setw(16) << "recall" << 100.0 * r.recall << '\n'
      << std::setw(16) << "f1" << 100.0 * r.f1 << '\n'
      << std::setw(16) << "exact_match" << 100.0 * r.exact_match << '\n'
      << std::setw(16) << "token_accuracy" << 100.0 * r.token_accuracy << '\n'
      << std::setw(16) << "arguments" << r.counts.correct << " correct / " << r.counts.predicted
      << " predicted / " << r.counts.gold << " gold\n"
      << std::setw(16) << "propositions" << r.propositions << " (role-only F1)\n";
  return out.str();
}

std::vector<std::size_t> frequent_labels(const RoleSequences& gold, std::size_t num_labels,
                                         std::size_t min_count) {
  std::vector<std::size_t> counts(num_labels, 0);
  for (const auto& roles : gold)
    for (auto r : roles)
      if (r < num_labels) ++counts[r];
  std::vector<std::size_t> kept;
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (min_count == 0 || counts[l] > min_count) kept.push_back(l);
  }
  return kept;
}

void write_transition_csv(std::ostream& out, const std::vector<std::size_t>& matrix,
                          std::size_t num_labels, const std::vector<std::size_t>& kept,
                          const Vocabulary& roles) {
  out << "from\\to";
  for (auto b : kept) out << ',' << roles.label(b);
  out << '\n';
  for (auto a : kept) {
    out << roles.label(a);
    for (auto b : kept) out << ',' << matrix[a * num_labels + b];
    out << '\n';
  }
}

}  // namespace capsrl
