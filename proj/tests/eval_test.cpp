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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "capsrl/eval.hpp"
#include "eval_oracles.hpp"

namespace capsrl {
namespace {

TEST(Score, PerfectPrediction) {
  RoleSequences gold = {{0, 1, 2}, {3, 0}};
  auto r = score(gold, gold);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_EQ(r.exact_match, 1.0);
  EXPECT_EQ(r.token_accuracy, 1.0);
}

TEST(Score, OneRightOneSpurious) {
  RoleSequences gold = {{1, 2, 0}};
  RoleSequences pred = {{1, 0, 3}};
  auto r = score(gold, pred);
  EXPECT_EQ(r.precision, 0.5);
  EXPECT_EQ(r.recall, 0.5);
  EXPECT_EQ(r.f1, 0.5);
  EXPECT_EQ(r.exact_match, 0.0);
  EXPECT_EQ(r.counts.correct, 1u);
}

TEST(Score, NoArgumentsScoresZero) {
  RoleSequences gold = {{0, 0}};
  auto r = score(gold, gold);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.exact_match, 1.0);
}

TEST(Score, MisalignedCorporaRaise) {
  EXPECT_THROW(score({{0, 1}}, {{0, 1}, {1}}), std::invalid_argument);
  EXPECT_THROW(score({{0, 1}}, {{0}}), std::invalid_argument);
}

TEST(Score, MatchesSetIntersection) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto [gold, pred] = testing::random_pair(rng, 1 + trial, 6);
    auto r = score(gold, pred);
    auto s = testing::set_score(gold, pred);
    EXPECT_EQ(r.counts.predicted, s.predicted);
    EXPECT_EQ(r.counts.gold, s.gold);
    EXPECT_EQ(r.counts.correct, s.correct);
    EXPECT_EQ(r.precision, s.p);
    EXPECT_EQ(r.recall, s.r);
    EXPECT_EQ(r.f1, s.f1);
    EXPECT_EQ(r.exact_match, s.em);
    EXPECT_GE(r.f1, 0.0);
    EXPECT_LE(r.f1, 1.0);
  }
}

TEST(Duplicates, Examples) {
  EXPECT_EQ(count_duplicate_violations({{1, 1, 0}}).violating, 1u);
  EXPECT_EQ(count_duplicate_violations({{1, 2}}).violating, 0u);
  EXPECT_EQ(count_duplicate_violations({{0, 0, 0}}).violating, 0u);
  auto r = count_duplicate_violations({{1, 1, 2, 2}, {2, 0, 2}});
  EXPECT_EQ(r.violating, 2u);
  EXPECT_EQ(r.per_role.at(1), 1u);
  EXPECT_EQ(r.per_role.at(2), 2u);
}

TEST(Duplicates, MatchesMultisetOracle) {
  std::mt19937_64 rng(2);
  auto [gold, pred] = testing::random_pair(rng, 1000, 5);
  EXPECT_EQ(count_duplicate_violations(pred).violating, testing::multiset_violations(pred));
  EXPECT_EQ(count_duplicate_violations(gold).violating, testing::multiset_violations(gold));
}

TEST(Transitions, Examples) {
  // one proposition, tokens: gold A0(1), none, A1(2)
  RoleSequences gold = {{1, 0, 2}};
  auto same = transitions({{{0, 0, 2}, {0, 0, 2}}}, gold, 3);
  ASSERT_EQ(same.size(), 1u);
  EXPECT_EQ(same[0].total_correct() + same[0].total_wrong(), 0u);

  auto one = transitions({{{0, 0, 2}, {1, 0, 2}}}, gold, 3);
  EXPECT_EQ(one[0].correct[0 * 3 + 1], 1u);
  EXPECT_EQ(one[0].total_correct(), 1u);
  EXPECT_EQ(one[0].total_wrong(), 0u);

  EXPECT_THROW(transitions({{{0, 0, 2}}}, gold, 3), std::invalid_argument);
}

TEST(Transitions, MatchesEnumeration) {
  // 3 tokens, 2 iterations, hand-built
  RoleSequences gold = {{1, 2, 0}};
  std::vector<std::vector<std::vector<std::size_t>>> traj = {{{2, 2, 1}, {1, 0, 0}}};
  auto m = transitions(traj, gold, 3);
  ASSERT_EQ(m.size(), 1u);
  // token 0: 2->1 correct; token 1: 2->0 wrong; token 2: 1->0 correct
  std::vector<std::size_t> correct(9, 0), wrong(9, 0);
  correct[2 * 3 + 1] = 1;
  wrong[2 * 3 + 0] = 1;
  correct[1 * 3 + 0] = 1;
  EXPECT_EQ(m[0].correct, correct);
  EXPECT_EQ(m[0].wrong, wrong);
}

TEST(Transitions, TotalsEqualChangedTokens) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> lab(0, 3);
  std::vector<std::vector<std::vector<std::size_t>>> traj;
  RoleSequences gold;
  for (int p = 0; p < 40; ++p) {
    const std::size_t n = 1 + p % 9;
    std::vector<std::vector<std::size_t>> steps(3, std::vector<std::size_t>(n));
    std::vector<std::size_t> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = lab(rng);
      for (auto& s : steps) s[i] = lab(rng);
    }
    traj.push_back(steps);
    gold.push_back(g);
  }
  auto ms = transitions(traj, gold, 4);
  ASSERT_EQ(ms.size(), 2u);
  for (std::size_t t = 0; t < 2; ++t) {
    std::size_t changed = 0;
    for (const auto& p : traj)
      for (std::size_t i = 0; i < p[t].size(); ++i) changed += p[t][i] != p[t + 1][i];
    EXPECT_EQ(ms[t].total_correct() + ms[t].total_wrong(), changed);
    for (std::size_t a = 0; a < 4; ++a) {
      EXPECT_EQ(ms[t].correct[a * 4 + a], 0u);
      EXPECT_EQ(ms[t].wrong[a * 4 + a], 0u);
    }
  }
}

TEST(Signlog, Values) {
  EXPECT_EQ(signlog(0), 0.0);
  EXPECT_EQ(signlog(1), 0.0);
  EXPECT_EQ(signlog(-1), 0.0);
  EXPECT_NEAR(signlog(-10), -2.302585, 1e-6);
  EXPECT_NEAR(signlog(std::exp(2.0)), 2.0, 1e-12);
  EXPECT_NEAR(signlog(-std::exp(2.0)), -2.0, 1e-12);
}

TEST(Breakdown, SingleBinHoldsGlobalReport) {
  RoleSequences gold = {{1, 0, 2, 0, 0}, {0, 0, 0, 1, 1}};
  RoleSequences pred = {{1, 0, 0, 0, 0}, {0, 2, 0, 1, 1}};
  auto bins = breakdown(gold, pred, BreakdownKey::sentence_length);
  ASSERT_EQ(bins.size(), 1u);
  auto global = score(gold, pred);
  EXPECT_EQ(bins.at(0).f1, global.f1);
  EXPECT_EQ(bins.at(0).exact_match, global.exact_match);
}

TEST(Breakdown, EmptyBinsAreOmitted) {
  RoleSequences gold = {std::vector<std::size_t>(3, 0), std::vector<std::size_t>(25, 0)};
  gold[0][0] = 1;
  gold[1][4] = 2;
  gold[1][7] = 1;
  gold[1][9] = 3;
  auto bins = breakdown(gold, gold, BreakdownKey::sentence_length);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_TRUE(bins.count(0));
  EXPECT_TRUE(bins.count(20));
  auto by_args = breakdown(gold, gold, BreakdownKey::argument_count);
  ASSERT_EQ(by_args.size(), 2u);
  EXPECT_TRUE(by_args.count(1));
  EXPECT_TRUE(by_args.count(3));
}

TEST(Breakdown, BinCountsSumToGlobal) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto [gold, pred] = testing::random_pair(rng, 60, 5);
    auto global = score(gold, pred);
    for (auto key : {BreakdownKey::sentence_length, BreakdownKey::argument_count}) {
      ArgumentCounts sum;
      std::size_t props = 0, exact = 0;
      for (const auto& [bin, r] : breakdown(gold, pred, key)) {
        sum.predicted += r.counts.predicted;
        sum.gold += r.counts.gold;
        sum.correct += r.counts.correct;
        props += r.propositions;
        exact += r.exact;
      }
      EXPECT_EQ(sum.predicted, global.counts.predicted);
      EXPECT_EQ(sum.gold, global.counts.gold);
      EXPECT_EQ(sum.correct, global.counts.correct);
      EXPECT_EQ(props, global.propositions);
      EXPECT_EQ(exact, global.exact);
    }
  }
}

TEST(Reports, JsonTextAndCsv) {
  Vocabulary roles = Vocabulary::roles();
  roles.add("A0");
  roles.add("A1");
  auto r = score({{1, 2, 0}}, {{1, 0, 2}});
  auto j = to_json(r);
  EXPECT_EQ(j["correct_arguments"], 1);
  EXPECT_EQ(j["scoring"], "role-only F1");
  EXPECT_NE(to_text(r).find("f1"), std::string::npos);

  auto m = transitions({{{0, 0, 2}, {1, 0, 1}}}, {{1, 0, 2}}, 3);
  auto mj = to_json(m[0], roles);
  EXPECT_EQ(mj["total_correct"], 1);
  EXPECT_EQ(mj["total_wrong"], 1);
  std::ostringstream csv;
  write_transition_csv(csv, m[0].correct, 3, frequent_labels({{1, 0, 2}}, 3, 0), roles);
  EXPECT_EQ(csv.str(), "from\\to,_,A0,A1\n_,0,1,0\nA0,0,0,0\nA1,0,0,0\n");
  EXPECT_EQ(frequent_labels({{1, 1, 0, 2}}, 3, 1), (std::vector<std::size_t>{1}));

  auto dj = to_json(count_duplicate_violations({{1, 1}}), roles);
  EXPECT_EQ(dj["violating"], 1);
  EXPECT_EQ(dj["per_role"]["A0"], 1);
}

}  // namespace
}  // namespace capsrl
