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

#include "capsrl/conll.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "capsrl/error.hpp"

namespace capsrl {

Token Sentence::token(std::size_t position) const {
  const auto& row = rows.at(position);
  return Token{position + 1, row[kForm], row[kLemma], row[kFillpred] == "Y"};
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(std::move(field));
  return fields;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

struct PendingSentence {
  Sentence sentence;
  std::vector<std::vector<std::string>> apreds;
  std::size_t first_line = 0;
  std::size_t apred_count = 0;
};

Sentence finish(PendingSentence& pending, std::size_t ordinal, const std::string& source) {
  auto& s = pending.sentence;
  std::vector<std::size_t> predicate_positions;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (s.rows[i][kFillpred] == "Y") predicate_positions.push_back(i);
  }
  if (predicate_positions.size() != pending.apred_count) {
    throw ParseError(source, pending.first_line,
                     "sentence has " + std::to_string(predicate_positions.size()) +
                         " predicates but " + std::to_string(pending.apred_count) +
                         " APRED columns");
  }
  for (std::size_t k = 0; k < predicate_positions.size(); ++k) {
    PredicateInstance inst;
    inst.sentence = ordinal;
    inst.predicate = predicate_positions[k];
    inst.roles.reserve(s.rows.size());
    for (const auto& apred : pending.apreds) inst.roles.push_back(apred[k]);
    s.predicates.push_back(std::move(inst));
  }
  return std::move(s);
}

}  // namespace

std::vector<Sentence> read_conll(std::istream& in, const std::string& source) {
  std::vector<Sentence> out;
  PendingSentence pending;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      if (open) {
        out.push_back(finish(pending, out.size(), source));
        pending = PendingSentence{};
        open = false;
      }
      continue;
    }
    auto fields = split_fields(line);
    if (fields.size() < kFixedColumns) {
      throw ParseError(source, line_no,
                       "expected at least " + std::to_string(kFixedColumns) + " columns, got " +
                           std::to_string(fields.size()));
    }
    const std::size_t expected_index = pending.sentence.rows.size() + 1;
    std::size_t index = 0;
    const auto& id = fields[kId];
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
    if (ec != std::errc() || ptr != id.data() + id.size() || index != expected_index) {
      throw ParseError(source, line_no,
                       "malformed index column '" + id + "', expected " +
                           std::to_string(expected_index));
    }
    const std::size_t apred_count = fields.size() - kFixedColumns;
    if (!open) {
      open = true;
      pending.first_line = line_no;
      pending.apred_count = apred_count;
    } else if (apred_count != pending.apred_count) {
      throw ParseError(source, line_no,
                       "ragged APRED columns: " + std::to_string(apred_count) + " here, " +
                           std::to_string(pending.apred_count) + " on line " +
                           std::to_string(pending.first_line));
    }
    ConllRow row;
    for (std::size_t c = 0; c < kFixedColumns; ++c) row[c] = std::move(fields[c]);
    pending.sentence.rows.push_back(std::move(row));
    pending.apreds.emplace_back(std::make_move_iterator(fields.begin() + kFixedColumns),
                                std::make_move_iterator(fields.end()));
  }
  if (open) out.push_back(finish(pending, out.size(), source));
  return out;
}

std::vector<Sentence> read_conll(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_conll(in, path.string());
}

void write_conll(std::ostream& out, const std::vector<Sentence>& sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const auto& row = s.rows[i];
      for (std::size_t c = 0; c < kFixedColumns; ++c) {
        if (c) out << '\t';
        out << row[c];
      }
      for (const auto& p : s.predicates) {
        if (p.roles.size() != s.rows.size()) {
          throw std::invalid_argument("predicate at token " + std::to_string(p.predicate + 1) +
                                      " has " + std::to_string(p.roles.size()) +
                                      " roles for a sentence of " +
                                      std::to_string(s.rows.size()) + " tokens");
        }
        out << '\t' << p.roles[i];
      }
      out << '\n';
    }
    out << '\n';
  }
}

void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_conll(out, sentences);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Sentence> with_predictions(const std::vector<Sentence>& sentences,
                                       const std::vector<std::vector<std::size_t>>& predicted,
                                       const Vocabulary& roles) {
  std::vector<Sentence> out = sentences;
  std::size_t next = 0;
  for (auto& s : out) {
    for (auto& p : s.predicates) {
      if (next >= predicted.size()) {
        throw std::invalid_argument("fewer predictions (" + std::to_string(predicted.size()) +
                                    ") than predicate instances");
      }
      const auto& ids = predicted[next++];
      if (ids.size() != s.size()) {
        throw std::invalid_argument("prediction " + std::to_string(next - 1) + " has " +
                                    std::to_string(ids.size()) + " labels for " +
                                    std::to_string(s.size()) + " tokens");
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= roles.size()) {
          throw std::invalid_argument("unknown role id " + std::to_string(ids[i]));
        }
        p.roles[i] = roles.label(ids[i]);
      }
    }
  }
  if (next != predicted.size()) {
    throw std::invalid_argument("more predictions (" + std::to_string(predicted.size()) +
                                ") than predicate instances (" + std::to_string(next) + ")");
  }
  return out;
}

void write_conll(const std::filesystem::path& path, const std::vector<Sentence>& sentences,
                 const std::vector<std::vector<std::size_t>>& predicted, const Vocabulary& roles) {
  write_conll(path, with_predictions(sentences, predicted, roles));
}

std::vector<PredicateInstance> instances(const std::vector<Sentence>& sentences) {
  std::vector<PredicateInstance> out;
  for (const auto& s : sentences) out.insert(out.end(), s.predicates.begin(), s.predicates.end());
  return out;
}

void add_tokens(const std::vector<Sentence>& sentences, Vocabulary& vocab) {
  for (const auto& s : sentences) {
    for (const auto& row : s.rows) vocab.add(lowercase(row[kForm]));
    for (const auto& row : s.rows) vocab.add(lowercase(row[kLemma]));
  }
}

void add_roles(const std::vector<Sentence>& sentences, Vocabulary& roles) {
  for (const auto& s : sentences)
    for (const auto& p : s.predicates)
      for (const auto& r : p.roles) roles.add(r);
}

std::vector<EncodedInstance> encode(const std::vector<Sentence>& sentences, const Vocabulary& tokens,
                                    const Vocabulary& roles, bool strict) {
  std::vector<EncodedInstance> out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto& s = sentences[si];
    std::vector<std::size_t> ids;
    ids.reserve(s.size());
    for (const auto& row : s.rows) ids.push_back(tokens.id(lowercase(row[kForm])));
    for (const auto& p : s.predicates) {
      EncodedInstance e;
      e.sentence = si;
      e.predicate = p.predicate;
      e.predicate_lemma = tokens.id(lowercase(s.rows[p.predicate][kLemma]));
      e.tokens = ids;
      e.roles.reserve(p.roles.size());
      for (const auto& r : p.roles) {
        auto id = roles.find(r);
        if (!id && strict) throw std::invalid_argument("unknown role label '" + r + "'");
        e.roles.push_back(id.value_or(kNoneRoleId));
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace capsrl
