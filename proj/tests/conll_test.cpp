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
#include <sstream>
#include <string>

#include "capsrl/conll.hpp"
#include "capsrl/embeddings.hpp"
#include "capsrl/error.hpp"
#include "capsrl/eval.hpp"
#include "capsrl/vocab.hpp"

namespace capsrl {
namespace {

namespace fs = std::filesystem;

const fs::path kData = CAPSRL_TEST_DATA;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string row(int id, const std::string& form, bool pred, const std::string& apreds) {
  std::string r = std::to_string(id) + "\t" + form + "\t" + form + "\t" + form +
                  "\tNN\tNN\t_\t_\t0\t0\tROOT\tROOT\t" + (pred ? "Y\t" + form + ".01" : "_\t_");
  if (!apreds.empty()) r += "\t" + apreds;
  return r + "\n";
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "capsrl_conll_test";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Conll, MinimalSentence) {
  std::istringstream in(row(1, "dogs", true, "_") + row(2, "bark", false, "A1"));
  auto sentences = read_conll(in);
  ASSERT_EQ(sentences.size(), 1u);
  ASSERT_EQ(sentences[0].predicates.size(), 1u);
  const auto& p = sentences[0].predicates[0];
  EXPECT_EQ(p.predicate, 0u);
  EXPECT_EQ(p.roles, (std::vector<std::string>{"_", "A1"}));
  auto tok = sentences[0].token(0);
  EXPECT_EQ(tok.index, 1u);
  EXPECT_EQ(tok.form, "dogs");
  EXPECT_TRUE(tok.is_predicate);

  Vocabulary roles = Vocabulary::roles();
  add_roles(sentences, roles);
  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(sentences, tokens);
  auto enc = encode(sentences, tokens, roles);
  ASSERT_EQ(enc.size(), 1u);
  EXPECT_EQ(enc[0].roles, (std::vector<std::size_t>{kNoneRoleId, roles.id("A1")}));
}

TEST(Conll, EmptyFile) {
  std::istringstream in("");
  EXPECT_TRUE(read_conll(in).empty());
  std::istringstream blank("\n\n  \n");
  EXPECT_TRUE(read_conll(blank).empty());
}

TEST(Conll, RaggedApredIsParseErrorWithLine) {
  std::istringstream in(row(1, "a", true, "_") + row(2, "b", false, "A0\tA1"));
  try {
    read_conll(in, "ragged");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("ragged:2"), std::string::npos);
  }
}

TEST(Conll, ApredCountMustMatchPredicates) {
  std::istringstream in("\n" + row(1, "a", true, "_\t_") + row(2, "b", false, "A0\t_"));
  try {
    read_conll(in, "count");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Conll, MalformedIndexColumn) {
  std::istringstream bad(row(1, "a", true, "_") + "x" + row(2, "b", false, "A0").substr(1));
  EXPECT_THROW(read_conll(bad), ParseError);
  std::istringstream skip(row(1, "a", true, "_") + row(3, "b", false, "A0"));
  EXPECT_THROW(read_conll(skip), ParseError);
  std::istringstream short_row("1\ta\tb\n");
  EXPECT_THROW(read_conll(short_row), ParseError);
}

TEST(Conll, FixtureRoundTripsByteIdentically) {
  const auto path = kData / "fixture.conll";
  auto first = read_conll(path);
  ASSERT_EQ(first.size(), 3u);
  EXPECT_EQ(first[1].predicates.size(), 2u);
  EXPECT_EQ(instances(first).size(), 4u);

  auto out = temp_file("roundtrip.conll");
  write_conll(out, first);
  EXPECT_EQ(slurp(out), slurp(path));

  auto second = read_conll(out);
  auto a = instances(first), b = instances(second);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].roles, b[i].roles);
    EXPECT_EQ(a[i].predicate, b[i].predicate);
    EXPECT_EQ(a[i].sentence, b[i].sentence);
  }
}

TEST(Conll, EveryInstanceMarksItsPredicate) {
  auto sentences = read_conll(kData / "fixture.conll");
  for (const auto& s : sentences)
    for (const auto& p : s.predicates) {
      EXPECT_TRUE(s.token(p.predicate).is_predicate);
      EXPECT_EQ(p.roles.size(), s.size());
    }
}

TEST(Conll, PredictionsReplaceRoles) {
  auto sentences = read_conll(kData / "fixture.conll");
  Vocabulary roles = Vocabulary::roles();
  add_roles(sentences, roles);
  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(sentences, tokens);
  auto enc = encode(sentences, tokens, roles);

  RoleSequences all_none;
  RoleSequences gold;
  for (const auto& e : enc) {
    all_none.emplace_back(e.tokens.size(), kNoneRoleId);
    gold.push_back(e.roles);
  }
  auto none = with_predictions(sentences, all_none, roles);
  for (const auto& p : instances(none))
    for (const auto& r : p.roles) EXPECT_EQ(r, "_");

  auto path = temp_file("gold.conll");
  write_conll(path, sentences, gold, roles);
  EXPECT_EQ(slurp(path), slurp(kData / "fixture.conll"));

  auto bad = gold;
  bad[0][1] = roles.size();
  EXPECT_THROW(with_predictions(sentences, bad, roles), std::invalid_argument);
  gold.pop_back();
  EXPECT_THROW(with_predictions(sentences, gold, roles), std::invalid_argument);
}

TEST(Conll, VocabularyIsInsertionOrdered) {
  auto sentences = read_conll(kData / "fixture.conll");
  Vocabulary a = Vocabulary::tokens(), b = Vocabulary::tokens();
  add_tokens(sentences, a);
  add_tokens(sentences, b);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.label(0), "<unk>");
  EXPECT_EQ(a.label(1), "the");
  EXPECT_EQ(a.label(2), "committee");
  EXPECT_EQ(a.id("never-seen"), 0u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.id(a.label(i)), i);
}

TEST(Conll, UnknownRolesAreNoneUnlessStrict) {
  auto sentences = read_conll(kData / "fixture.conll");
  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(sentences, tokens);
  Vocabulary roles = Vocabulary::roles();
  roles.add("A0");
  auto enc = encode(sentences, tokens, roles);
  EXPECT_EQ(enc[0].roles[4], kNoneRoleId);  // A1 unknown
  EXPECT_EQ(enc[0].roles[1], roles.id("A0"));
  EXPECT_THROW(encode(sentences, tokens, roles, true), std::invalid_argument);
}

TEST(Conll, PredicateLemmaIsLookedUp) {
  auto sentences = read_conll(kData / "fixture.conll");
  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(sentences, tokens);
  Vocabulary roles = Vocabulary::roles();
  add_roles(sentences, roles);
  auto enc = encode(sentences, tokens, roles);
  EXPECT_EQ(enc[0].predicate_lemma, tokens.id("approve"));
  EXPECT_EQ(enc[0].tokens[1], tokens.id("committee"));  // lowercased form
}

TEST(Embeddings, SingleLine) {
  auto path = temp_file("one.txt");
  std::ofstream(path) << "cat 1.0 0.0\n";
  auto e = load_embeddings(path, 2);
  ASSERT_NE(e.find("cat"), nullptr);
  EXPECT_EQ(*e.find("cat"), (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(e.find("dog"), nullptr);
}

TEST(Embeddings, DuplicateKeepsLastAndWarns) {
  auto path = temp_file("dup.txt");
  std::ofstream(path) << "cat 1 2\ndog 3 4\ncat 5 6\n";
  auto e = load_embeddings(path, 2);
  EXPECT_EQ(*e.find("cat"), (std::vector<double>{5, 6}));
  ASSERT_EQ(e.warnings.size(), 1u);
  EXPECT_NE(e.warnings[0].find("cat"), std::string::npos);
  EXPECT_EQ(e.order, (std::vector<std::string>{"cat", "dog"}));
}

TEST(Embeddings, WrongArityNamesLine) {
  auto path = temp_file("arity.txt");
  std::ofstream(path) << "cat 1 2\ndog 3\n";
  try {
    load_embeddings(path, 2);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Embeddings, FixtureValuesAreExact) {
  auto e = load_embeddings(kData / "embeddings.txt", 3);
  EXPECT_EQ(e.vectors.size(), 5u);
  EXPECT_EQ(*e.find("the"), (std::vector<double>{0.125, -0.5, 1.0}));
  EXPECT_EQ(*e.find("committee"), (std::vector<double>{0.25, 0.75, -1.5}));
  EXPECT_EQ(*e.find("approve"), (std::vector<double>{-2.0, 0.0, 0.5}));
  EXPECT_EQ(*e.find("plan"), (std::vector<double>{1e-3, 3.25, -0.0625}));
  EXPECT_EQ(*e.find("<unk>"), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Embeddings, NormalizeGivesUnitRows) {
  auto e = load_embeddings(kData / "embeddings.txt", 3, true);
  const auto& v = *e.find("committee");
  EXPECT_NEAR(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 1.0, 1e-15);
  EXPECT_EQ(*e.find("<unk>"), (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Embeddings, ContextualVectors) {
  auto cv = load_contextual_vectors(kData / "contextual.txt", 2);
  EXPECT_TRUE(cv.has_sentence(1));
  EXPECT_FALSE(cv.has_sentence(3));
  EXPECT_EQ(cv.sentence(1, 2), (std::vector<double>{0.5, 1.0, -0.5, 2.0}));
  EXPECT_THROW(cv.sentence(2, 2), std::out_of_range);

  std::vector<EncodedInstance> inst(1);
  inst[0].sentence = 0;
  inst[0].tokens = {3, 4};
  attach_contextual(inst, cv);
  EXPECT_EQ(inst[0].inputs, (std::vector<double>{0.5, 1.0, -0.5, 2.0}));
  EXPECT_THROW(load_contextual_vectors(kData / "contextual.txt", 3), ParseError);
}

}  // namespace
}  // namespace capsrl
