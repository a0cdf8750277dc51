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


// capsrl command-line driver: train, predict, evaluate, analyze, generate.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capsrl/capsule.hpp"
#include "capsrl/conll.hpp"
#include "capsrl/embeddings.hpp"
#include "capsrl/eval.hpp"
#include "capsrl/params.hpp"
#include "capsrl/synthetic.hpp"
#include "capsrl/training.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace capsrl;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// ---- configuration -------------------------------------------------------

struct DataPaths {
  std::string train, dev, test;
  std::string embeddings;
  std::string contextual_vectors, dev_contextual_vectors;
  std::string output_dir = "run";
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataPaths data;
};

RunConfig default_run_config() {
  RunConfig c;
  c.model.encoder.embed_dim = 300;
  c.model.encoder.hidden_dim = 500;
  c.model.capsule_size = 16;
  c.model.iterations = c.train.iterations;
  return c;
}

json to_json(const DataPaths& d) {
  return {{"train", d.train},
          {"dev", d.dev},
          {"test", d.test},
          {"embeddings", d.embeddings},
          {"contextual_vectors", d.contextual_vectors},
          {"dev_contextual_vectors", d.dev_contextual_vectors},
          {"output_dir", d.output_dir}};
}

json to_json(const RunConfig& c) {
  json model = capsrl::to_json(c.model);
  // sizes come from the data
  model.erase("vocab_size");
  model.erase("num_roles");
  model.erase("iterations");
  return {{"model", model}, {"train", capsrl::to_json(c.train)}, {"data", to_json(c.data)}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = default_run_config();
  if (j.contains("model")) {
    json m = capsrl::to_json(c.model);
    m.update(j["model"]);
    c.model = model_config_from_json(m);
  }
  if (j.contains("train")) {
    json t = capsrl::to_json(c.train);
    t.update(j["train"]);
    c.train = train_config_from_json(t);
  }
  c.model.iterations = c.train.iterations;
  if (j.contains("data")) {
    const auto& d = j["data"];
    c.data.train = d.value("train", c.data.train);
    c.data.dev = d.value("dev", c.data.dev);
    c.data.test = d.value("test", c.data.test);
    c.data.embeddings = d.value("embeddings", c.data.embeddings);
    c.data.contextual_vectors = d.value("contextual_vectors", c.data.contextual_vectors);
    c.data.dev_contextual_vectors = d.value("dev_contextual_vectors", c.data.dev_contextual_vectors);
    c.data.output_dir = d.value("output_dir", c.data.output_dir);
  }
  return c;
}

// Flags parsed by CLI11; unset optionals leave the config file value.
struct TrainFlags {
  std::string config;
  std::optional<std::string> train, dev, test, out, embeddings, contextual, dev_contextual;
  std::optional<std::string> variant, reduction;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta, learning_rate;
  std::optional<std::size_t> epochs, batch_size;
};

RunConfig resolve(const TrainFlags& f) {
  RunConfig c = f.config.empty() ? default_run_config() : run_config_from_json(read_json(f.config));
  if (f.train) c.data.train = *f.train;
  if (f.dev) c.data.dev = *f.dev;
  if (f.test) c.data.test = *f.test;
  if (f.out) c.data.output_dir = *f.out;
  if (f.embeddings) c.data.embeddings = *f.embeddings;
  if (f.contextual) c.data.contextual_vectors = *f.contextual;
  if (f.dev_contextual) c.data.dev_contextual_vectors = *f.dev_contextual;
  if (f.variant) c.model.variant = parse_variant(*f.variant);
  if (f.reduction) c.train.reduction = parse_uniqueness_reduction(*f.reduction);
  if (f.iterations) c.train.iterations = *f.iterations;
  c.model.iterations = c.train.iterations;
  if (f.seed) c.train.seed = *f.seed;
  if (f.eta) c.train.eta = *f.eta;
  if (f.learning_rate) c.train.learning_rate = *f.learning_rate;
  if (f.epochs) c.train.max_epochs = *f.epochs;
  if (f.batch_size) c.train.batch_size = *f.batch_size;
  if (c.data.train.empty()) throw UsageError("no training file (use --train or data.train)");
  if (c.data.dev.empty()) c.data.dev = c.data.train;
  c.train.validate();
  return c;
}

Vocabulary labels_vocab(const json& labels, Vocabulary vocab) {
  for (std::size_t i = 1; i < labels.size(); ++i) vocab.add(labels[i].get<std::string>());
  return vocab;
}

json labels_json(const Vocabulary& v) { return v.labels(); }

void attach_sidecar(std::vector<EncodedInstance>& data, const std::string& path, std::size_t dim) {
  if (path.empty()) return;
  attach_contextual(data, load_contextual_vectors(path, dim));
}

// ---- train ---------------------------------------------------------------

int cmd_train(const TrainFlags& flags) {
  RunConfig cfg = resolve(flags);
  const fs::path out_dir = cfg.data.output_dir;
  fs::create_directories(out_dir / "reports");

  const auto train_sentences = read_conll(cfg.data.train);
  const auto dev_sentences = read_conll(cfg.data.dev);
  if (!cfg.data.contextual_vectors.empty() && cfg.data.dev_contextual_vectors.empty() &&
      cfg.data.dev != cfg.data.train) {
    throw UsageError("--contextual-vectors needs --dev-contextual-vectors for a separate dev file");
  }

  Vocabulary tokens = Vocabulary::tokens();
  add_tokens(train_sentences, tokens);
  std::optional<EmbeddingFile> pretrained;
  if (!cfg.data.embeddings.empty()) {
    pretrained = load_embeddings(cfg.data.embeddings, cfg.model.encoder.embed_dim);
    for (const auto& w : pretrained->warnings) std::cerr << "capsrl: warning: " << w << '\n';
    // held-out words with a pretrained vector keep it instead of <unk>
    Vocabulary dev_tokens = Vocabulary::tokens();
    add_tokens(dev_sentences, dev_tokens);
    for (const auto& t : dev_tokens.labels())
      if (pretrained->find(t)) tokens.add(t);
  }
  Vocabulary roles = Vocabulary::roles();
  add_roles(train_sentences, roles);

  cfg.model.encoder.vocab_size = tokens.size();
  cfg.model.num_roles = roles.size();
  auto train_set = encode(train_sentences, tokens, roles);
  auto dev_set = encode(dev_sentences, tokens, roles);
  if (train_set.empty()) throw UsageError(cfg.data.train + " has no predicate instances");
  if (dev_set.empty()) throw UsageError(cfg.data.dev + " has no predicate instances");
  attach_sidecar(train_set, cfg.data.contextual_vectors, cfg.model.encoder.embed_dim);
  attach_sidecar(dev_set,
                 cfg.data.dev_contextual_vectors.empty() ? cfg.data.contextual_vectors
                                                         : cfg.data.dev_contextual_vectors,
                 cfg.model.encoder.embed_dim);

  write_text(out_dir / "config.resolved", to_json(cfg).dump(2) + "\n");

  SrlModel model(cfg.model, cfg.train.seed);
  if (pretrained) {
    const auto n = model.load_pretrained(*pretrained, tokens);
    std::cerr << "capsrl: " << n << " of " << tokens.size() << " embedding rows pretrained\n";
  }

  std::ofstream log(out_dir / "train.log.jsonl", std::ios::binary);
  auto result = train(model, train_set, dev_set, cfg.train, [&](const EpochLog& e) {
    log << capsrl::to_json(e).dump() << '\n';
    log.flush();
    std::cerr << "epoch " << e.epoch << "  loss " << std::setprecision(6) << e.train_loss
              << "  dev F1 " << std::fixed << std::setprecision(2) << 100.0 * e.dev.f1
              << "  EM " << 100.0 * e.dev.exact_match << std::defaultfloat << '\n';
  });
  if (result.clamped) std::cerr << "capsrl: warning: " << result.clamped << " clamped log-probabilities\n";
  if (result.skipped_steps) {
    std::cerr << "capsrl: warning: " << result.skipped_steps << " steps skipped (non-finite gradient)\n";
  }

  json meta = {{"model", capsrl::to_json(cfg.model)},
               {"variant", std::string(to_string(cfg.model.variant))},
               {"iterations", cfg.model.iterations},
               {"tokens", labels_json(tokens)},
               {"roles", labels_json(roles)},
               {"best_epoch", result.best_epoch},
               {"best_dev_f1", result.best_dev_f1}};
  save_checkpoint(out_dir / "model.ckpt.json", model.params(), meta);

  const auto dev_pred = predict_roles(model, dev_set);
  write_conll(out_dir / "predictions.conll", dev_sentences, dev_pred, roles);
  auto dev_report = score(gold_roles(dev_set), dev_pred);
  write_text(out_dir / "reports" / "dev.json", capsrl::to_json(dev_report).dump(2) + "\n");
  write_text(out_dir / "reports" / "dev.txt", to_text(dev_report));
  if (!cfg.data.test.empty()) {
    const auto test_sentences = read_conll(cfg.data.test);
    auto test_set = encode(test_sentences, tokens, roles);
    auto report = score(gold_roles(test_set), predict_roles(model, test_set));
    write_text(out_dir / "reports" / "test.json", capsrl::to_json(report).dump(2) + "\n");
    write_text(out_dir / "reports" / "test.txt", to_text(report));
  }
  std::cout << to_text(dev_report);
  return 0;
}

// ---- predict -------------------------------------------------------------

struct PredictFlags {
  std::string checkpoint, input, output, config, trajectory, contextual;
  std::optional<int> iterations;
};

int cmd_predict(const PredictFlags& f) {
  const auto ckpt = read_checkpoint(f.checkpoint);
  const auto& meta = ckpt.metadata;
  if (!meta.contains("model") || !meta.contains("tokens") || !meta.contains("roles")) {
    throw std::runtime_error(f.checkpoint + ": metadata lacks model, tokens or roles");
  }
  ModelConfig mc = model_config_from_json(meta["model"]);
  if (!f.config.empty()) {
    // architecture from the config file, sizes from the checkpoint
    RunConfig rc = run_config_from_json(read_json(f.config));
    rc.model.encoder.vocab_size = mc.encoder.vocab_size;
    rc.model.num_roles = mc.num_roles;
    mc = rc.model;
  }
  const Vocabulary tokens = labels_vocab(meta["tokens"], Vocabulary::tokens());
  const Vocabulary roles = labels_vocab(meta["roles"], Vocabulary::roles());
  SrlModel model(mc, 0);
  load_parameters(model.params(), ckpt);

  const auto sentences = read_conll(f.input);
  auto data = encode(sentences, tokens, roles);
  attach_sidecar(data, f.contextual, mc.encoder.embed_dim);

  std::ofstream traj;
  if (!f.trajectory.empty()) {
    traj.open(f.trajectory, std::ios::binary);
    if (!traj) throw std::runtime_error("cannot write " + f.trajectory);
  }
  RoleSequences predicted;
  for (const auto& inst : data) {
    auto pred = model.predict(inst, f.iterations);
    predicted.push_back(pred.labels());
    if (traj.is_open()) {
      json iters = json::array();
      for (const auto& dist : pred.iterations) {
        json rows = json::array();
        for (std::size_t i = 0; i < pred.length; ++i)
          rows.push_back(std::vector<double>(dist.begin() + i * pred.num_roles,
                                             dist.begin() + (i + 1) * pred.num_roles));
        iters.push_back(rows);
      }
      traj << json{{"sentence", inst.sentence + 1},
                   {"predicate", inst.predicate + 1},
                   {"roles", roles.labels()},
                   {"iterations", iters}}
                  .dump()
           << '\n';
    }
  }
  write_conll(f.output, sentences, predicted, roles);
  return 0;
}

// ---- evaluate / analyze --------------------------------------------------

struct Aligned {
  Vocabulary roles = Vocabulary::roles();
  RoleSequences gold, predicted;
};

RoleSequences role_ids(const std::vector<Sentence>& sentences, const Vocabulary& roles) {
  RoleSequences out;
  for (const auto& p : instances(sentences)) {
    std::vector<std::size_t> ids;
    for (const auto& r : p.roles) ids.push_back(roles.id(r));
    out.push_back(std::move(ids));
  }
  return out;
}

Aligned load_aligned(const std::string& gold_path, const std::string& pred_path) {
  const auto gold = read_conll(gold_path);
  const auto pred = read_conll(pred_path);
  Aligned a;
  add_roles(gold, a.roles);
  add_roles(pred, a.roles);
  a.gold = role_ids(gold, a.roles);
  a.predicted = role_ids(pred, a.roles);
  if (gold.size() != pred.size()) {
    throw std::runtime_error("misaligned files: " + std::to_string(gold.size()) + " vs " +
                             std::to_string(pred.size()) + " sentences");
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size() || gold[s].predicates.size() != pred[s].predicates.size()) {
      throw std::runtime_error("misaligned files: sentence " + std::to_string(s + 1) + " differs");
    }
  }
  return a;
}

void emit(const json& report, const std::string& out_path) {
  std::cout << report.dump(2) << '\n';
  if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
}

int cmd_evaluate(const std::string& gold, const std::string& predicted, const std::string& out) {
  auto a = load_aligned(gold, predicted);
  auto report = score(a.gold, a.predicted);
  std::cout << to_text(report);
  emit(capsrl::to_json(report), out);
  return 0;
}

struct AnalyzeFlags {
  std::string mode, gold, predicted, trajectory, out_dir;
  std::size_t min_label_count = 50;
};

int analyze_transitions(const AnalyzeFlags& f) {
  if (f.gold.empty() || f.trajectory.empty())
    throw UsageError("--mode transitions needs --gold and --trajectory");
  const auto gold_sentences = read_conll(f.gold);
  std::ifstream in(f.trajectory);
  if (!in) throw std::runtime_error("cannot open " + f.trajectory);
  std::vector<std::vector<std::vector<std::size_t>>> traj;
  Vocabulary roles = Vocabulary::roles();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (traj.empty()) roles = labels_vocab(j.at("roles"), Vocabulary::roles());
    std::vector<std::vector<std::size_t>> steps;
    for (const auto& it : j.at("iterations")) {
      std::vector<double> flat;
      for (const auto& row : it)
        for (double p : row) flat.push_back(p);
      steps.push_back(argmax_rows(flat, roles.size()));
    }
    traj.push_back(std::move(steps));
  }
  RoleSequences gold;
  for (const auto& p : instances(gold_sentences)) {
    std::vector<std::size_t> ids;
    for (const auto& r : p.roles) {
      auto id = roles.find(r);
      if (!id) throw std::runtime_error("gold role '" + r + "' not in the trajectory inventory");
      ids.push_back(*id);
    }
    gold.push_back(std::move(ids));
  }
  const auto matrices = transitions(traj, gold, roles.size());
  const auto kept = frequent_labels(gold, roles.size(), f.min_label_count);
  const fs::path dir = f.out_dir.empty() ? fs::path("reports") : fs::path(f.out_dir);
  fs::create_directories(dir);
  json report = json::array();
  for (const auto& m : matrices) {
    const std::string tag = matrices.size() == 1 ? "" : "." + std::to_string(m.from + 1) + "-" +
                                                             std::to_string(m.from + 2);
    for (auto [name, counts] : {std::pair{"correct", &m.correct}, {"wrong", &m.wrong}}) {
      std::ofstream csv(dir / ("transitions" + tag + "." + name + ".csv"), std::ios::binary);
      write_transition_csv(csv, *counts, roles.size(), kept, roles);
    }
    report.push_back(capsrl::to_json(m, roles));
  }
  write_text(dir / "transitions.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_analyze(const AnalyzeFlags& f) {
  if (f.mode == "transitions") return analyze_transitions(f);
  const std::string out = f.out_dir.empty() ? "" : (fs::path(f.out_dir) / (f.mode + ".json")).string();
  if (f.mode == "duplicates") {
    const std::string& path = f.predicted.empty() ? f.gold : f.predicted;
    if (path.empty()) throw UsageError("--mode duplicates needs --predicted or --gold");
    const auto sentences = read_conll(path);
    Vocabulary roles = Vocabulary::roles();
    add_roles(sentences, roles);
    json report = capsrl::to_json(count_duplicate_violations(role_ids(sentences, roles)), roles);
    if (!f.predicted.empty() && !f.gold.empty()) {
      auto a = load_aligned(f.gold, f.predicted);
      report = {{"predicted", capsrl::to_json(count_duplicate_violations(a.predicted), a.roles)},
                {"gold", capsrl::to_json(count_duplicate_violations(a.gold), a.roles)}};
    }
    emit(report, out);
    return 0;
  }
  if (f.mode == "breakdown") {
    if (f.gold.empty() || f.predicted.empty()) throw UsageError("--mode breakdown needs --gold and --predicted");
    auto a = load_aligned(f.gold, f.predicted);
    json report;
    for (auto [name, key] : {std::pair{"sentence_length", BreakdownKey::sentence_length},
                             {"argument_count", BreakdownKey::argument_count}}) {
      json bins = json::array();
      for (const auto& [bin, r] : breakdown(a.gold, a.predicted, key)) {
        json b = capsrl::to_json(r);
        if (key == BreakdownKey::sentence_length) {
          b["bin"] = std::to_string(bin) + "-" + std::to_string(bin + 9);
        } else {
          b["bin"] = std::to_string(bin);
        }
        bins.push_back(b);
      }
      report[name] = bins;
    }
    emit(report, out);
    return 0;
  }
  throw UsageError("unknown --mode '" + f.mode + "' (expected duplicates, transitions or breakdown)");
}

// ---- generate ------------------------------------------------------------

int cmd_generate(const std::string& spec_path, std::size_t n, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, std::optional<double> confusability) {
  GrammarSpec spec = spec_path.empty() ? GrammarSpec{} : grammar_spec_from_json(read_json(spec_path));
  if (seed) spec.seed = *seed;
  if (confusability) spec.confusability = *confusability;
  write_corpus(out_dir, generate(spec, n));
  write_text(fs::path(out_dir) / "spec.json", capsrl::to_json(spec).dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capsule-network semantic role labeler"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("--config", tf.config, "JSON run configuration");
  train_cmd->add_option("--train", tf.train, "training file (CoNLL-2009)");
  train_cmd->add_option("--dev", tf.dev, "development file (defaults to the training file)");
  train_cmd->add_option("--test", tf.test, "optional test file, scored after training");
  train_cmd->add_option("--out", tf.out, "output directory");
  train_cmd->add_option("--variant", tf.variant,
                        "baseline, mean_capsules, capsule_no_global or capsule_global");
  train_cmd->add_option("--iterations", tf.iterations, "routing iterations T");
  train_cmd->add_option("--seed", tf.seed, "random seed");
  train_cmd->add_option("--embeddings", tf.embeddings, "static embedding text file");
  train_cmd->add_option("--contextual-vectors", tf.contextual, "per-token vectors for --train");
  train_cmd->add_option("--dev-contextual-vectors", tf.dev_contextual, "per-token vectors for --dev");
  train_cmd->add_option("--eta", tf.eta, "uniqueness loss weight");
  train_cmd->add_option("--uniqueness-reduction", tf.reduction, "max or sum");
  train_cmd->add_option("--learning-rate", tf.learning_rate, "Adam step size");
  train_cmd->add_option("--epochs", tf.epochs, "maximum epochs");
  train_cmd->add_option("--batch-size", tf.batch_size, "instances per batch");

  PredictFlags pf;
  auto* predict_cmd = app.add_subcommand("predict", "label a CoNLL file with a trained model");
  predict_cmd->add_option("--checkpoint", pf.checkpoint, "model.ckpt.json")->required();
  predict_cmd->add_option("--input", pf.input, "input CoNLL file")->required();
  predict_cmd->add_option("--output", pf.output, "output CoNLL file")->required();
  predict_cmd->add_option("--config", pf.config, "run configuration overriding the architecture");
  predict_cmd->add_option("--iterations", pf.iterations, "routing iterations at inference");
  predict_cmd->add_option("--dump-trajectory", pf.trajectory, "JSON-lines per-iteration couplings");
  predict_cmd->add_option("--contextual-vectors", pf.contextual, "per-token vectors for --input");

  std::string eval_gold, eval_pred, eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold roles");
  eval_cmd->add_option("--gold", eval_gold, "gold CoNLL file")->required();
  eval_cmd->add_option("--predicted", eval_pred, "predicted CoNLL file")->required();
  eval_cmd->add_option("--out", eval_out, "write the JSON report here");

  AnalyzeFlags af;
  auto* analyze_cmd = app.add_subcommand("analyze", "duplicate, transition and breakdown analyses");
  analyze_cmd->add_option("--mode", af.mode, "duplicates, transitions or breakdown")->required();
  analyze_cmd->add_option("--gold", af.gold, "gold CoNLL file");
  analyze_cmd->add_option("--predicted", af.predicted, "predicted CoNLL file");
  analyze_cmd->add_option("--trajectory", af.trajectory, "trajectory dump from predict");
  analyze_cmd->add_option("--out-dir", af.out_dir, "directory for report files");
  analyze_cmd->add_option("--min-label-count", af.min_label_count,
                          "keep labels seen more often than this in gold (0 keeps all)");

  std::string spec_path, gen_out;
  std::size_t gen_n = 200;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_conf;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic corpus");
  gen_cmd->add_option("--spec", spec_path, "grammar JSON (defaults built in)");
  gen_cmd->add_option("-n,--sentences", gen_n, "training sentences");
  gen_cmd->add_option("--out-dir", gen_out, "output directory")->required();
  gen_cmd->add_option("--seed", gen_seed, "override the spec seed");
  gen_cmd->add_option("--confusability", gen_conf, "override the spec confusability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "capsrl: error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*train_cmd) return cmd_train(tf);
    if (*predict_cmd) return cmd_predict(pf);
    if (*eval_cmd) return cmd_evaluate(eval_gold, eval_pred, eval_out);
    if (*analyze_cmd) return cmd_analyze(af);
    if (*gen_cmd) return cmd_generate(spec_path, gen_n, gen_out, gen_seed, gen_conf);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "capsrl: error: " << msg << '\n';
    return 1;
  }
  return 1;
}
