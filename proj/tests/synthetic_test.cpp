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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "capsrl/synthetic.hpp"
#include "capsrl/training.hpp"
#include "eval_oracles.hpp"

namespace capsrl {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "capsrl_synthetic_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::set<std::string> forms(const std::vector<Sentence>& sentences) {
  std::set<std::string> out;
  for (const auto& s : sentences)
    for (const auto& r : s.rows) out.insert(r[kForm]);
  return out;
}

TEST(Synthetic, SameSeedGivesIdenticalFiles) {
  GrammarSpec spec;
  auto a = temp_dir("a"), b = temp_dir("b");
  write_corpus(a, generate(spec, 120));
  write_corpus(b, generate(spec, 120));
  for (const char* f : {"train.conll", "dev.conll", "test.conll"}) {
    EXPECT_FALSE(slurp(a / f).empty()) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  spec.seed = 8;
  auto c = temp_dir("c");
  write_corpus(c, generate(spec, 120));
  EXPECT_NE(slurp(a / "train.conll"), slurp(c / "train.conll"));
}

TEST(Synthetic, SplitSizesAndRoundTrip) {
  GrammarSpec spec;
  auto corpus = generate(spec, 200);
  EXPECT_EQ(corpus.train.size(), 200u);
  EXPECT_EQ(corpus.dev.size(), 50u);
  EXPECT_EQ(corpus.test.size(), 50u);
  auto dir = temp_dir("rt");
  write_corpus(dir, corpus);
  auto back = read_conll(dir / "train.conll");
  ASSERT_EQ(back.size(), corpus.train.size());
  auto again = dir / "again.conll";
  write_conll(again, back);
  EXPECT_EQ(slurp(again), slurp(dir / "train.conll"));
  auto a = instances(corpus.train), b = instances(back);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].roles, b[i].roles);
}

TEST(Synthetic, StructureInvariants) {
  GrammarSpec spec;
  spec.confusability = 0.5;
  auto corpus = generate(spec, 300);
  Vocabulary roles = Vocabulary::roles();
  for (const auto& r : spec.roles) roles.add(r);
  std::size_t confusable = 0;
  for (const auto* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const auto& s : *split) {
      ASSERT_EQ(s.predicates.size(), 1u);
      EXPECT_GE(s.size(), spec.min_length);
      EXPECT_LE(s.size(), spec.max_length);
      std::size_t preds = 0;
      for (std::size_t i = 0; i < s.size(); ++i) preds += s.token(i).is_predicate;
      EXPECT_EQ(preds, 1u);
      const auto& roles_of = s.predicates[0].roles;
      std::multiset<std::string> filler_forms;
      for (std::size_t i = 0; i < s.size(); ++i)
        if (roles_of[i] != "_") filler_forms.insert(s.rows[i][kForm]);
      for (std::size_t i = 0; i < s.size(); ++i)
        if (roles_of[i] == "_" && filler_forms.count(s.rows[i][kForm])) {
          ++confusable;
          break;
        }
    }
    auto enc = encode(*split, Vocabulary::tokens(), roles, true);
    auto gold = gold_roles(enc);
    EXPECT_EQ(count_duplicate_violations(gold).violating, 0u);
    EXPECT_EQ(testing::multiset_violations(gold), 0u);
  }
  // some sentences contain a non-argument copy of a true filler
  EXPECT_GT(confusable, 30u);
}

TEST(Synthetic, HeldOutVocabularyIsCoveredAndSplitsDisjoint) {
  GrammarSpec spec;
  spec.confusability = 0.5;
  auto corpus = generate(spec, 200);
  auto train = forms(corpus.train);
  for (const auto* split : {&corpus.dev, &corpus.test})
    for (const auto& f : forms(*split)) EXPECT_TRUE(train.count(f)) << f;
  auto key = [](const Sentence& s) {
    std::string k;
    for (const auto& r : s.rows) k += r[kForm] + " ";
    return k;
  };
  std::set<std::string> seen;
  for (const auto& s : corpus.train) seen.insert(key(s));
  for (const auto* split : {&corpus.dev, &corpus.test})
    for (const auto& s : *split) EXPECT_TRUE(seen.insert(key(s)).second);
}

TEST(Synthetic, ImpossibleSpecsRaise) {
  GrammarSpec spec;
  spec.max_length = 4;
  EXPECT_THROW(generate(spec, 10), std::invalid_argument);
  spec = GrammarSpec{};
  spec.min_length = 30;
  EXPECT_THROW(generate(spec, 10), std::invalid_argument);
  spec = GrammarSpec{};
  spec.roles = {"A0"};
  EXPECT_THROW(generate(spec, 10), std::invalid_argument);
  spec = GrammarSpec{};
  spec.verbs = 0;
  EXPECT_THROW(generate(spec, 10), std::invalid_argument);
  spec = GrammarSpec{};
  spec.confusability = 1.5;
  EXPECT_THROW(generate(spec, 10), std::invalid_argument);
  spec = GrammarSpec{};
  EXPECT_THROW(generate(spec, 0), std::invalid_argument);
  // the tiny grammar cannot yield enough distinct held-out sentences
  spec.agents = spec.patients = spec.verbs = spec.distractors = spec.fillers = 1;
  spec.roles = {"A0", "A1"};
  spec.distractor_rate = 0.0;
  EXPECT_THROW(generate(spec, 10), std::runtime_error);
}

TEST(Synthetic, SpecJsonRoundTrip) {
  GrammarSpec spec;
  spec.confusability = 0.7;
  spec.roles = {"X", "Y", "Z"};
  auto back = grammar_spec_from_json(to_json(spec));
  EXPECT_EQ(back.confusability, 0.7);
  EXPECT_EQ(back.roles, spec.roles);
  EXPECT_EQ(back.seed, 7u);
}

// With no confusable copies every role is decidable from the local context,
// so the factorized baseline fits the corpus exactly.
TEST(Synthetic, LocalModelSolvesUnconfusableCorpus) {
  GrammarSpec spec;
  spec.confusability = 0.0;
  auto corpus = generate(spec, 60);
  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(corpus.train, tokens);
  Vocabulary roles = Vocabulary::roles();
  for (const auto& r : spec.roles) roles.add(r);
  auto train_set = encode(corpus.train, tokens, roles, true);

  ModelConfig mc;
  mc.encoder.vocab_size = tokens.size();
  mc.encoder.embed_dim = 16;
  mc.encoder.hidden_dim = 16;
  mc.encoder.layers = 1;
  mc.num_roles = roles.size();
  mc.variant = Variant::baseline;
  SrlModel model(mc, 1);
  TrainConfig tc;
  tc.learning_rate = 0.01;
  tc.batch_size = 8;
  tc.l2 = 0.0;
  tc.max_epochs = 100;
  tc.patience = 100;
  tc.target_token_accuracy = 1.0;
  tc.target_exact_match = 1.0;
  auto result = train(model, train_set, train_set, tc);
  EXPECT_TRUE(result.reached_target) << result.epochs.size() << " epochs";
  auto report = score(gold_roles(train_set), predict_roles(model, train_set));
  EXPECT_EQ(report.token_accuracy, 1.0);
  EXPECT_EQ(report.exact_match, 1.0);
}

}  // namespace
}  // namespace capsrl
