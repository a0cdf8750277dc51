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

#include "capsrl/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "capsrl/error.hpp"

namespace capsrl {

std::string_view to_string(UniquenessReduction r) {
  return r == UniquenessReduction::max ? "max" : "sum";
}

UniquenessReduction parse_uniqueness_reduction(std::string_view name) {
  if (name == "max") return UniquenessReduction::max;
  if (name == "sum") return UniquenessReduction::sum;
  throw std::invalid_argument("unknown uniqueness reduction '" + std::string(name) +
                              "' (expected max or sum)");
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be >= 0");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j = {
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"l2", c.l2},
      {"eta", c.eta},
      {"uniqueness_reduction", std::string(to_string(c.reduction))},
      {"iterations", c.iterations},
      {"max_epochs", c.max_epochs},
      {"patience", c.patience},
      {"seed", c.seed},
      {"clip_norm", c.clip_norm},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
  };
  j["target_token_accuracy"] =
      c.target_token_accuracy ? nlohmann::json(*c.target_token_accuracy) : nlohmann::json();
  j["target_exact_match"] =
      c.target_exact_match ? nlohmann::json(*c.target_exact_match) : nlohmann::json();
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.l2 = j.value("l2", c.l2);
  c.eta = j.value("eta", c.eta);
  c.reduction = parse_uniqueness_reduction(
      j.value("uniqueness_reduction", std::string(to_string(c.reduction))));
  c.iterations = j.value("iterations", c.iterations);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  if (j.contains("target_token_accuracy") && !j["target_token_accuracy"].is_null())
    c.target_token_accuracy = j["target_token_accuracy"].get<double>();
  if (j.contains("target_exact_match") && !j["target_exact_match"].is_null())
    c.target_exact_match = j["target_exact_match"].get<double>();
  return c;
}

Tensor main_loss(Graph& graph, const Tensor& distribution, std::span<const std::size_t> gold,
                 std::size_t* clamped) {
  return graph.nll(distribution, gold, kProbabilityFloor, clamped);
}

Tensor l2_penalty(Graph& graph, const ParameterStore& params, double lambda) {
  Tensor total = Tensor::scalar(0.0);
  for (const auto& p : params) total = graph.add(total, graph.sum_squares(p.value, p.frozen_rows));
  return graph.scale(total, lambda);
}

Tensor uniqueness_loss(Graph& graph, const Tensor& logits, UniquenessReduction reduction) {
  const std::size_t roles = logits.dim(1);
  const Tensor over_words = graph.softmax(graph.transpose(logits));  // [R x n]
  const Tensor per_role = reduction == UniquenessReduction::max
                              ? graph.log(graph.max_last(over_words))
                              : graph.log(over_words, kProbabilityFloor);
  return graph.scale(graph.sum(per_role), 1.0 / static_cast<double>(roles));
}

BatchLoss batch_loss(Graph& graph, const SrlModel& model,
                     std::span<const EncodedInstance* const> batch, const TrainConfig& config,
                     std::mt19937_64* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("batch_loss: empty batch");
  BatchLoss out;
  ForwardOptions options;
  options.iterations = config.iterations;
  options.dropout_rng = dropout_rng;
  Tensor sum;
  for (const auto* inst : batch) {
    auto fwd = model.forward(graph, *inst, options);
    Tensor term = main_loss(graph, fwd.distribution, inst->roles, &out.clamped);
    term = graph.add(term, graph.scale(uniqueness_loss(graph, fwd.logits, config.reduction),
                                       config.eta));
    sum = sum.defined() ? graph.add(sum, term) : term;
  }
  Tensor mean = graph.scale(sum, 1.0 / static_cast<double>(batch.size()));
  out.total = graph.add(mean, l2_penalty(graph, model.params(), config.l2));
  return out;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

bool Adam::step(ParameterStore& params) {
  for (auto& p : params) {
    if (!p.value.has_grad()) continue;
    for (double g : p.value.mutable_grad()) {
      if (!std::isfinite(g)) {
        ++anomalies_;
        return false;
      }
    }
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  std::size_t index = 0;
  for (auto& p : params) {
    auto& m = m_[index];
    auto& v = v_[index];
    ++index;
    if (!p.value.has_grad()) continue;
    auto grad = p.value.mutable_grad();
    auto data = p.value.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      data[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
  return true;
}

double clip_gradients(ParameterStore& params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params) {
    if (!p.value.has_grad()) continue;
    for (double g : p.value.mutable_grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& p : params) {
      if (!p.value.has_grad()) continue;
      for (double& g : p.value.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

nlohmann::json to_json(const EpochLog& log) {
  return {{"epoch", log.epoch},
          {"train_loss", log.train_loss},
          {"dev_P", log.dev.precision},
          {"dev_R", log.dev.recall},
          {"dev_F1", log.dev.f1},
          {"dev_EM", log.dev.exact_match},
          {"seconds", log.seconds}};
}

RoleSequences predict_roles(const SrlModel& model, const std::vector<EncodedInstance>& data,
                            std::optional<int> iterations) {
  RoleSequences out;
  out.reserve(data.size());
  for (const auto& inst : data) out.push_back(model.predict(inst, iterations).labels());
  return out;
}

RoleSequences gold_roles(const std::vector<EncodedInstance>& data) {
  RoleSequences out;
  out.reserve(data.size());
  for (const auto& inst : data) out.push_back(inst.roles);
  return out;
}

TrainResult train(SrlModel& model, const std::vector<EncodedInstance>& train_set,
                  const std::vector<EncodedInstance>& dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training corpus");
  if (dev_set.empty()) throw std::invalid_argument("train: empty development corpus");

  std::mt19937_64 shuffle_rng(config.seed);
  std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Adam adam(config.learning_rate, config.beta1, config.beta2, config.epsilon);
  const RoleSequences dev_gold = gold_roles(dev_set);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  std::vector<std::vector<double>> best = model.params().snapshot();
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<const EncodedInstance*> batch;
      for (std::size_t b = begin; b < end; ++b) batch.push_back(&train_set[order[b]]);
      model.params().zero_grad();
      Graph graph;
      auto loss = batch_loss(graph, model, batch, config, &dropout_rng);
      graph.backward(loss.total);
      result.clamped += loss.clamped;
      if (config.clip_norm > 0.0) clip_gradients(model.params(), config.clip_norm);
      if (!adam.step(model.params())) ++result.skipped_steps;
      loss_sum += loss.total.item();
      ++batches;
    }
    model.params().zero_grad();

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = loss_sum / static_cast<double>(batches);
    log.dev = score(dev_gold, predict_roles(model, dev_set, config.iterations));
    log.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (std::isnan(log.dev.f1)) {
      throw NumericalError("dev F1 is NaN after epoch " + std::to_string(epoch) +
                           " (train loss " + std::to_string(log.train_loss) + ")");
    }
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);

    const bool reached = (config.target_token_accuracy || config.target_exact_match) &&
                         log.dev.token_accuracy >= config.target_token_accuracy.value_or(0.0) &&
                         log.dev.exact_match >= config.target_exact_match.value_or(0.0);
    if (log.dev.f1 > result.best_dev_f1 || reached) {
      result.best_dev_f1 = std::max(result.best_dev_f1, log.dev.f1);
      result.best_epoch = epoch;
      best = model.params().snapshot();
      stale = 0;
    } else {
      ++stale;
    }
    if (reached) {
      result.reached_target = true;
      break;
    }
    if (stale > config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  model.params().restore(best);
  return result;
}

}  // namespace capsrl
