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

#include "capsrl/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace capsrl {

namespace {

// The shortest sentence: the AGENT VERB the PATIENT.
constexpr std::size_t kRequiredSlots = 5;
constexpr std::size_t kMaxAttemptsPerSentence = 1000;

struct Word {
  std::string form;
  std::string pos;
  std::string role = std::string(kNoneRole);
  bool predicate = false;
};

void check_rate(const char* name, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string("grammar: ") + name + " must be in [0, 1]");
  }
}

class Sampler {
 public:
  Sampler(const GrammarSpec& spec, std::mt19937_64& rng) : spec_(spec), rng_(rng) {}

  std::vector<Word> sentence() {
    const std::string agent = "ag" + std::to_string(pick(spec_.agents));
    const std::string patient = "pt" + std::to_string(pick(spec_.patients));
    std::vector<std::string> fillers = {agent, patient};

    std::vector<std::vector<Word>> extras;
    for (std::size_t r = 2; r < spec_.roles.size(); ++r) {
      if (!coin(spec_.optional_rate)) continue;
      const std::string noun = "f" + std::to_string(r) + "w" + std::to_string(pick(spec_.fillers));
      fillers.push_back(noun);
      extras.push_back({{"mk" + std::to_string(r), "IN"}, {"the", "DT"},
                        {noun, "NN", spec_.roles[r]}});
    }
    std::shuffle(extras.begin(), extras.end(), rng_);

    std::vector<Word> words = {{"the", "DT"}, {agent, "NN", spec_.roles[0]}};
    if (coin(spec_.distractor_rate)) {
      append(words, {{"that", "WDT"}, {"the", "DT"}, {distractor(fillers), "NN"},
                     {"dv" + std::to_string(pick(spec_.distractors)), "VB"}});
    }
    words.push_back({"vb" + std::to_string(verb_ = pick(spec_.verbs)), "VB",
                     std::string(kNoneRole), true});
    append(words, {{"the", "DT"}, {patient, "NN", spec_.roles[1]}});
    for (auto& phrase : extras) append(words, phrase);
    if (coin(spec_.distractor_rate)) {
      append(words, {{"while", "IN"}, {"the", "DT"}, {distractor(fillers), "NN"},
                     {"dv" + std::to_string(pick(spec_.distractors)), "VB"}, {"the", "DT"},
                     {distractor(fillers), "NN"}});
    }
    while (words.size() < spec_.min_length) {
      std::vector<std::size_t> nouns;
      for (std::size_t i = 0; i < words.size(); ++i)
        if (words[i].pos == "NN") nouns.push_back(i);
      const std::size_t at = nouns[pick(nouns.size())];
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at),
                   Word{"adj" + std::to_string(pick(spec_.distractors)), "JJ"});
    }
    return words;
  }

  std::size_t verb() const { return verb_; }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string distractor(const std::vector<std::string>& fillers) {
    if (coin(spec_.confusability)) return fillers[pick(fillers.size())];
    return "dn" + std::to_string(pick(spec_.distractors));
  }

  static void append(std::vector<Word>& out, std::vector<Word> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }

  const GrammarSpec& spec_;
  std::mt19937_64& rng_;
  std::size_t verb_ = 0;
};

Sentence to_sentence(const std::vector<Word>& words, std::size_t verb, std::size_t ordinal) {
  Sentence s;
  PredicateInstance inst;
  inst.sentence = ordinal;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    ConllRow row;
    row.fill("_");
    row[kId] = std::to_string(i + 1);
    row[kForm] = w.form;
    row[kLemma] = w.form;
    row[kPlemma] = w.form;
    row[kPos] = w.pos;
    row[kPpos] = w.pos;
    if (w.predicate) {
      row[kFillpred] = "Y";
      row[kPred] = "vb" + std::to_string(verb) + ".01";
      inst.predicate = i;
    }
    s.rows.push_back(std::move(row));
    inst.roles.push_back(w.role);
  }
  s.predicates.push_back(std::move(inst));
  return s;
}

std::string key_of(const std::vector<Word>& words) {
  std::string key;
  for (const auto& w : words) key += w.form + ' ';
  return key;
}

}  // namespace

void GrammarSpec::validate() const {
  if (verbs < 1) throw std::invalid_argument("grammar: at least one verb required");
  if (roles.size() < 2) throw std::invalid_argument("grammar: at least two roles required");
  if (agents < 1 || patients < 1 || distractors < 1 || fillers < 1) {
    throw std::invalid_argument("grammar: every word class needs at least one word");
  }
  if (std::set<std::string>(roles.begin(), roles.end()).size() != roles.size() ||
      std::count(roles.begin(), roles.end(), std::string(kNoneRole)) != 0) {
    throw std::invalid_argument("grammar: role names must be distinct and not '_'");
  }
  check_rate("confusability", confusability);
  check_rate("distractor_rate", distractor_rate);
  check_rate("optional_rate", optional_rate);
  check_rate("dev_fraction", dev_fraction);
  check_rate("test_fraction", test_fraction);
  if (max_length < kRequiredSlots) {
    throw std::invalid_argument("grammar: max_length " + std::to_string(max_length) +
                                " is shorter than the " + std::to_string(kRequiredSlots) +
                                " required slots");
  }
  if (min_length > max_length) {
    throw std::invalid_argument("grammar: min_length exceeds max_length");
  }
}

nlohmann::json to_json(const GrammarSpec& s) {
  return {{"agents", s.agents},
          {"patients", s.patients},
          {"verbs", s.verbs},
          {"distractors", s.distractors},
          {"fillers", s.fillers},
          {"roles", s.roles},
          {"min_length", s.min_length},
          {"max_length", s.max_length},
          {"confusability", s.confusability},
          {"distractor_rate", s.distractor_rate},
          {"optional_rate", s.optional_rate},
          {"dev_fraction", s.dev_fraction},
          {"test_fraction", s.test_fraction},
          {"seed", s.seed}};
}

GrammarSpec grammar_spec_from_json(const nlohmann::json& j) {
  GrammarSpec s;
  s.agents = j.value("agents", s.agents);
  s.patients = j.value("patients", s.patients);
  s.verbs = j.value("verbs", s.verbs);
  s.distractors = j.value("distractors", s.distractors);
  s.fillers = j.value("fillers", s.fillers);
  s.roles = j.value("roles", s.roles);
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  s.confusability = j.value("confusability", s.confusability);
  s.distractor_rate = j.value("distractor_rate", s.distractor_rate);
  s.optional_rate = j.value("optional_rate", s.optional_rate);
  s.dev_fraction = j.value("dev_fraction", s.dev_fraction);
  s.test_fraction = j.value("test_fraction", s.test_fraction);
  s.seed = j.value("seed", s.seed);
  return s;
}

SyntheticCorpus generate(const GrammarSpec& spec, std::size_t train_sentences) {
  spec.validate();
  if (train_sentences < 1) throw std::invalid_argument("generate: need at least one sentence");
  std::mt19937_64 rng(spec.seed);
  Sampler sampler(spec, rng);
  std::unordered_set<std::string> train_keys;
  std::unordered_set<std::string> held_out_keys;
  std::unordered_set<std::string> vocabulary;

  auto draw = [&](std::size_t count, bool held_out, std::vector<Sentence>& out) {
    std::size_t attempts = 0;
    while (out.size() < count) {
      if (++attempts > kMaxAttemptsPerSentence * count) {
        throw std::runtime_error("generate: could not sample enough sentences within the length "
                                 "range and training vocabulary");
      }
      auto words = sampler.sentence();
      if (words.size() > spec.max_length) continue;
      const auto key = key_of(words);
      if (held_out) {
        if (train_keys.count(key) || held_out_keys.count(key)) continue;
        bool known = std::all_of(words.begin(), words.end(),
                                 [&](const Word& w) { return vocabulary.count(w.form) != 0; });
        if (!known) continue;
        held_out_keys.insert(key);
      } else {
        train_keys.insert(key);
        for (const auto& w : words) vocabulary.insert(w.form);
      }
      out.push_back(to_sentence(words, sampler.verb(), out.size()));
    }
  };

  SyntheticCorpus corpus;
  draw(train_sentences, false, corpus.train);
  const auto dev_count = static_cast<std::size_t>(
      static_cast<double>(train_sentences) * spec.dev_fraction + 0.5);
  const auto test_count = static_cast<std::size_t>(
      static_cast<double>(train_sentences) * spec.test_fraction + 0.5);
  draw(dev_count, true, corpus.dev);
  draw(test_count, true, corpus.test);
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  write_conll(dir / "train.conll", corpus.train);
  write_conll(dir / "dev.conll", corpus.dev);
  write_conll(dir / "test.conll", corpus.test);
}

}  // namespace capsrl
