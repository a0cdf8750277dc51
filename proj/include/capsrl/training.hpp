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
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "capsrl/capsule.hpp"
#include "capsrl/conll.hpp"
#include "capsrl/eval.hpp"
#include "capsrl/params.hpp"
#include "capsrl/tensor.hpp"

namespace capsrl {

// How the per-role softmax over words is reduced before entering the
// uniqueness term: log of the max entry, or sum of the per-word logs.
enum class UniquenessReduction { max, sum };

std::string_view to_string(UniquenessReduction r);
UniquenessReduction parse_uniqueness_reduction(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  double l2 = 4e-4;   // lambda
  double eta = 0.0;   // uniqueness-loss weight
  UniquenessReduction reduction = UniquenessReduction::max;
  int iterations = 2;  // T used during training
  std::size_t max_epochs = 50;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // <= 0 disables clipping
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Optional stop once the dev report reaches both targets.
  std::optional<double> target_token_accuracy;
  std::optional<double> target_exact_match;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// Floor applied inside the log of the gold-label probability.
inline constexpr double kProbabilityFloor = 1e-12;

// -(1/n) sum_i log c_i[y_i] for the final-iteration distribution [n x R].
Tensor main_loss(Graph& graph, const Tensor& distribution, std::span<const std::size_t> gold,
                 std::size_t* clamped = nullptr);

// lambda * sum of squared trainable values, skipping frozen rows.
Tensor l2_penalty(Graph& graph, const ParameterStore& params, double lambda);

// (1/R) sum_j reduce_i(softmax over words of b[., j]) for final logits [n x R].
Tensor uniqueness_loss(Graph& graph, const Tensor& logits, UniquenessReduction reduction);

struct BatchLoss {
  Tensor total;
  std::size_t clamped = 0;
};

// Mean over the batch of (main + eta * uniqueness), plus the L2 penalty.
// Only the last routing iteration enters the loss.
BatchLoss batch_loss(Graph& graph, const SrlModel& model,
                     std::span<const EncodedInstance* const> batch, const TrainConfig& config,
                     std::mt19937_64* dropout_rng = nullptr);

class Adam {
 public:
  Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  // Applies one bias-corrected update from the accumulated gradients.
  // Returns false and leaves everything untouched on a non-finite gradient.
  bool step(ParameterStore& params);

  std::size_t steps() const { return steps_; }
  std::size_t anomalies() const { return anomalies_; }
  const std::vector<double>& first_moment(std::size_t param) const { return m_.at(param); }
  const std::vector<double>& second_moment(std::size_t param) const { return v_.at(param); }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::size_t steps_ = 0;
  std::size_t anomalies_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_gradients(ParameterStore& params, double max_norm);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  EvalReport dev;
  double seconds = 0.0;
};

nlohmann::json to_json(const EpochLog& log);

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_dev_f1 = -1.0;
  bool stopped_early = false;
  bool reached_target = false;
  std::size_t clamped = 0;
  std::size_t skipped_steps = 0;
};

// Role predictions for every instance with frozen parameters.
RoleSequences predict_roles(const SrlModel& model, const std::vector<EncodedInstance>& data,
                            std::optional<int> iterations = std::nullopt);
RoleSequences gold_roles(const std::vector<EncodedInstance>& data);

// Seeded mini-batch training with per-epoch dev evaluation. The parameters
// of the best dev-F1 epoch are restored before returning.
TrainResult train(SrlModel& model, const std::vector<EncodedInstance>& train_set,
                  const std::vector<EncodedInstance>& dev_set, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace capsrl
