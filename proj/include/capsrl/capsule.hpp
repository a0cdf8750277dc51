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
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "capsrl/conll.hpp"
#include "capsrl/embeddings.hpp"
#include "capsrl/encoder.hpp"
#include "capsrl/params.hpp"
#include "capsrl/tensor.hpp"

namespace capsrl {

enum class Variant { baseline, mean_capsules, capsule_no_global, capsule_global };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);
inline bool uses_routing(Variant v) {
  return v == Variant::capsule_no_global || v == Variant::capsule_global;
}

struct ModelConfig {
  EncoderConfig encoder;
  std::size_t num_roles = 2;       // |T|, none-role included
  std::size_t capsule_size = 16;   // K
  Variant variant = Variant::capsule_global;
  int iterations = 2;              // T, ignored without routing

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Per-word role scores x_i^T W_j p, one bilinear family per role.
// states [n x d_l], predicate [d_e x 1], weights [(R*d_l) x d_e] -> [n x R].
Tensor baseline_logits(Graph& graph, const Tensor& states, const Tensor& predicate,
                       const Tensor& weights, std::size_t num_roles);

// Word capsules u[i, j*K + k] = x_i^T W_j^k p with weights stacked as
// [(R*K*d_l) x d_e], block (j*K + k). Returns [n x R*K].
Tensor word_capsules(Graph& graph, const Tensor& states, const Tensor& predicate,
                     const Tensor& weights, std::size_t num_roles, std::size_t capsule_size);

// b[i, j] = mean_k u[i, j*K + k].
Tensor mean_capsule_logits(Graph& graph, const Tensor& capsules, std::size_t num_roles);

// One step of the routing loop, captured before the logit update.
struct RoutingState {
  int t = 0;
  Tensor logits;    // b^(t) [n x R]
  Tensor coupling;  // c^(t) = softmax(b^(t)) per word [n x R]
  Tensor pooled;    // s^(t) [R x K]
  Tensor capsules;  // v^(t) = squash(s^(t)) [R x K]
  Tensor global;    // g^(t) [K x 1]; undefined without the global node
};

struct RoutingWeights {
  Tensor route;         // [K x K]
  Tensor global_proj;   // [K x R*K], undefined disables the global node
  Tensor global_route;  // [K x K]
};

struct RoutingResult {
  Tensor logits;        // b^(T)
  Tensor distribution;  // softmax(b^(T)) per word
  std::vector<RoutingState> trajectory;  // t = 0 .. T-1
};

// Dynamic routing by agreement over fixed word capsules [n x R*K].
// Raises NumericalError naming the iteration if the logits turn non-finite.
RoutingResult route(Graph& graph, const Tensor& capsules, std::size_t num_roles,
                    const RoutingWeights& weights, int iterations);

struct ForwardOptions {
  std::optional<int> iterations;        // overrides the trained T
  std::mt19937_64* dropout_rng = nullptr;  // enables word dropout
};

struct ForwardResult {
  Tensor logits;        // final role logits [n x R]
  Tensor distribution;  // per-word role distribution [n x R]
  std::vector<RoutingState> trajectory;
};

// Per-word role distributions after each refinement iteration.
struct Prediction {
  std::size_t length = 0;
  std::size_t num_roles = 0;
  std::vector<double> distribution;               // final [n x R]
  std::vector<std::vector<double>> iterations;    // c^(1) .. c^(T); one entry without routing
  std::vector<RoutingState> trajectory;

  std::vector<std::size_t> labels() const;
};

// Argmax per row of a row-major [n x R] matrix; ties go to the lowest id.
std::vector<std::size_t> argmax_rows(const std::vector<double>& matrix, std::size_t cols);

class SrlModel {
 public:
  SrlModel(const ModelConfig& config, std::uint64_t seed);

  SrlModel(const SrlModel&) = delete;
  SrlModel& operator=(const SrlModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  RoutingWeights routing_weights() const;

  // Initializes table rows from a static embedding file and excludes them
  // from the L2 penalty. Returns the number of rows set.
  std::size_t load_pretrained(const EmbeddingFile& file, const Vocabulary& vocab);

  ForwardResult forward(Graph& graph, const EncodedInstance& instance,
                        const ForwardOptions& options = {}) const;

  // Inference without gradient recording. iterations must be >= 1.
  Prediction predict(const EncodedInstance& instance,
                     std::optional<int> iterations = std::nullopt) const;

 private:
  Tensor inputs(Graph& graph, const EncodedInstance& instance, std::mt19937_64* dropout_rng) const;

  ModelConfig config_;
  ParameterStore params_;
  std::mt19937_64 init_rng_;
  Encoder encoder_;
  Tensor w_baseline_;
  Tensor w_word_;
  Tensor w_route_;
  Tensor w_global_proj_;
  Tensor w_global_route_;
};

}  // namespace capsrl
