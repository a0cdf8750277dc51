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

#include "capsrl/capsule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "capsrl/error.hpp"

namespace capsrl {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::baseline: return "baseline";
    case Variant::mean_capsules: return "mean_capsules";
    case Variant::capsule_no_global: return "capsule_no_global";
    case Variant::capsule_global: return "capsule_global";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (auto v : {Variant::baseline, Variant::mean_capsules, Variant::capsule_no_global,
                 Variant::capsule_global}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "' (expected baseline, mean_capsules, capsule_no_global or "
                              "capsule_global)");
}

void ModelConfig::validate() const {
  encoder.validate();
  if (num_roles < 2) throw std::invalid_argument("model: need the none-role and at least one role");
  if (capsule_size < 1) throw std::invalid_argument("model: capsule_size must be positive");
  if (iterations < 1) throw std::invalid_argument("model: iterations must be >= 1");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"vocab_size", c.encoder.vocab_size},
      {"embed_dim", c.encoder.embed_dim},
      {"hidden_dim", c.encoder.hidden_dim},
      {"layers", c.encoder.layers},
      {"word_dropout", c.encoder.word_dropout},
      {"predicate_indicator", c.encoder.predicate_indicator},
      {"init_range", c.encoder.init_range},
      {"forget_bias", c.encoder.forget_bias},
      {"num_roles", c.num_roles},
      {"capsule_size", c.capsule_size},
      {"variant", std::string(to_string(c.variant))},
      {"iterations", c.iterations},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder.vocab_size = j.value("vocab_size", c.encoder.vocab_size);
  c.encoder.embed_dim = j.value("embed_dim", c.encoder.embed_dim);
  c.encoder.hidden_dim = j.value("hidden_dim", c.encoder.hidden_dim);
  c.encoder.layers = j.value("layers", c.encoder.layers);
  c.encoder.word_dropout = j.value("word_dropout", c.encoder.word_dropout);
  c.encoder.predicate_indicator = j.value("predicate_indicator", c.encoder.predicate_indicator);
  c.encoder.init_range = j.value("init_range", c.encoder.init_range);
  c.encoder.forget_bias = j.value("forget_bias", c.encoder.forget_bias);
  c.num_roles = j.value("num_roles", c.num_roles);
  c.capsule_size = j.value("capsule_size", c.capsule_size);
  c.variant = parse_variant(j.value("variant", std::string(to_string(c.variant))));
  c.iterations = j.value("iterations", c.iterations);
  return c;
}

Tensor word_capsules(Graph& graph, const Tensor& states, const Tensor& predicate,
                     const Tensor& weights, std::size_t num_roles, std::size_t capsule_size) {
  if (states.rank() != 2 || predicate.rank() != 2 || predicate.dim(1) != 1 || weights.rank() != 2) {
    throw ShapeError("word_capsules: expected states [n x d_l], predicate [d_e x 1], got " +
                     shape_string(states.shape()) + " and " + shape_string(predicate.shape()));
  }
  const std::size_t d_l = states.dim(1);
  const std::size_t blocks = num_roles * capsule_size;
  if (weights.dim(0) != blocks * d_l || weights.dim(1) != predicate.dim(0)) {
    throw ShapeError("word_capsules: weights " + shape_string(weights.shape()) +
                     " do not match " + std::to_string(blocks) + " blocks of [" +
                     std::to_string(d_l) + "x" + std::to_string(predicate.dim(0)) + "]");
  }
  // W_j^k p for every block, then one product against all word states.
  Tensor projected = graph.reshape(graph.matmul(weights, predicate), {blocks, d_l});
  return graph.matmul(states, graph.transpose(projected));
}

Tensor baseline_logits(Graph& graph, const Tensor& states, const Tensor& predicate,
                       const Tensor& weights, std::size_t num_roles) {
  return word_capsules(graph, states, predicate, weights, num_roles, 1);
}

Tensor mean_capsule_logits(Graph& graph, const Tensor& capsules, std::size_t num_roles) {
  if (capsules.rank() != 2 || capsules.dim(1) % num_roles != 0) {
    throw ShapeError("mean_capsule_logits: capsules " + shape_string(capsules.shape()) +
                     " not divisible into " + std::to_string(num_roles) + " roles");
  }
  const std::size_t n = capsules.dim(0);
  const std::size_t k = capsules.dim(1) / num_roles;
  return graph.reshape(graph.mean_last(graph.reshape(capsules, {n * num_roles, k})),
                       {n, num_roles});
}

namespace {

void require_finite(const Tensor& t, const std::string& what) {
  for (double x : t.data()) {
    if (!std::isfinite(x)) throw NumericalError(what);
  }
}

}  // namespace

RoutingResult route(Graph& graph, const Tensor& capsules, std::size_t num_roles,
                    const RoutingWeights& weights, int iterations) {
  if (iterations < 1) throw std::invalid_argument("route: iterations must be >= 1");
  if (capsules.rank() != 2 || capsules.dim(1) % num_roles != 0) {
    throw ShapeError("route: capsules " + shape_string(capsules.shape()) +
                     " not divisible into " + std::to_string(num_roles) + " roles");
  }
  const std::size_t n = capsules.dim(0);
  const std::size_t k = capsules.dim(1) / num_roles;
  if (weights.route.shape() != Shape{k, k}) {
    throw ShapeError("route: routing weights " + shape_string(weights.route.shape()) +
                     " do not match capsule size " + std::to_string(k));
  }
  const bool global = weights.global_proj.defined();
  if (global && (weights.global_proj.shape() != Shape{k, num_roles * k} ||
                 weights.global_route.shape() != Shape{k, k})) {
    throw ShapeError("route: global node weights " + shape_string(weights.global_proj.shape()) +
                     ", " + shape_string(weights.global_route.shape()) + " do not match K=" +
                     std::to_string(k));
  }
  require_finite(capsules, "route: non-finite word capsules");

  RoutingResult result;
  Tensor logits = Tensor::zeros({n, num_roles});
  for (int t = 0; t < iterations; ++t) {
    RoutingState state;
    state.t = t;
    state.logits = logits;
    state.coupling = graph.softmax(logits);
    state.pooled = graph.capsule_pool(state.coupling, capsules);
    state.capsules = graph.squash(state.pooled);
    Tensor update = graph.capsule_agreement(graph.matmul(state.capsules, weights.route), capsules);
    if (global) {
      state.global =
          graph.matmul(weights.global_proj, graph.reshape(state.pooled, {num_roles * k, 1}));
      Tensor global_row = graph.matmul(graph.transpose(state.global), weights.global_route);
      update = graph.add(update, graph.capsule_agreement(graph.tile_rows(global_row, num_roles),
                                                         capsules));
    }
    logits = graph.add(logits, update);
    require_finite(logits, "route: non-finite role logits at iteration " + std::to_string(t));
    result.trajectory.push_back(std::move(state));
  }
  result.logits = logits;
  result.distribution = graph.softmax(logits);
  return result;
}

std::vector<std::size_t> argmax_rows(const std::vector<double>& matrix, std::size_t cols) {
  std::vector<std::size_t> out(matrix.size() / cols);
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (matrix[r * cols + c] > matrix[r * cols + best]) best = c;
    }
    out[r] = best;
  }
  return out;
}

std::vector<std::size_t> Prediction::labels() const { return argmax_rows(distribution, num_roles); }

SrlModel::SrlModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config),
      init_rng_(seed),
      encoder_((config_.validate(), config_.encoder), params_, init_rng_) {
  const std::size_t roles = config_.num_roles;
  const std::size_t k = config_.capsule_size;
  const std::size_t d_l = config_.encoder.hidden_dim;
  const std::size_t d_e = config_.encoder.embed_dim;
  const double r = config_.encoder.init_range;
  auto& rng = init_rng_;
  if (config_.variant == Variant::baseline) {
    w_baseline_ = params_.add("baseline.w", Tensor::uniform({roles * d_l, d_e}, -r, r, rng, true));
    return;
  }
  w_word_ = params_.add("capsule.w_word", Tensor::uniform({roles * k * d_l, d_e}, -r, r, rng, true));
  if (!uses_routing(config_.variant)) return;
  w_route_ = params_.add("routing.w_route", Tensor::uniform({k, k}, -r, r, rng, true));
  if (config_.variant == Variant::capsule_global) {
    w_global_proj_ = params_.add("routing.w_global_proj",
                                 Tensor::uniform({k, roles * k}, -r, r, rng, true));
    w_global_route_ =
        params_.add("routing.w_global_route", Tensor::uniform({k, k}, -r, r, rng, true));
  }
}

RoutingWeights SrlModel::routing_weights() const {
  return RoutingWeights{w_route_, w_global_proj_, w_global_route_};
}

std::size_t SrlModel::load_pretrained(const EmbeddingFile& file, const Vocabulary& vocab) {
  const std::size_t d_e = config_.encoder.embed_dim;
  if (file.dim != d_e) {
    throw ShapeError("embedding file has dimension " + std::to_string(file.dim) +
                     ", model expects " + std::to_string(d_e));
  }
  auto& entry = params_.entry("embeddings");
  auto table = entry.value.mutable_data();
  entry.frozen_rows.assign(vocab.size(), false);
  std::size_t loaded = 0;
  for (std::size_t id = 1; id < vocab.size() && id < config_.encoder.vocab_size; ++id) {
    const auto* v = file.find(vocab.label(id));
    if (!v) continue;
    std::copy(v->begin(), v->end(), table.begin() + id * d_e);
    entry.frozen_rows[id] = true;
    ++loaded;
  }
  entry.frozen_rows.resize(config_.encoder.vocab_size, false);
  return loaded;
}

Tensor SrlModel::inputs(Graph& graph, const EncodedInstance& instance,
                        std::mt19937_64* dropout_rng) const {
  const std::size_t n = instance.tokens.size();
  Tensor embedded;
  if (!instance.inputs.empty()) {
    embedded = Tensor({n, config_.encoder.embed_dim}, instance.inputs);
  } else if (dropout_rng && config_.encoder.word_dropout > 0.0) {
    std::bernoulli_distribution drop(config_.encoder.word_dropout);
    std::vector<std::size_t> ids = instance.tokens;
    for (auto& id : ids) {
      if (drop(*dropout_rng)) id = 0;
    }
    embedded = encoder_.embed(graph, ids);
  } else {
    embedded = encoder_.embed(graph, instance.tokens);
  }
  if (!config_.encoder.predicate_indicator) return embedded;
  std::vector<double> flag(n, 0.0);
  flag[instance.predicate] = 1.0;
  return graph.concat_cols({embedded, Tensor({n, 1}, std::move(flag))});
}

ForwardResult SrlModel::forward(Graph& graph, const EncodedInstance& instance,
                                const ForwardOptions& options) const {
  if (instance.tokens.empty()) throw std::invalid_argument("forward: empty sentence");
  if (instance.predicate >= instance.tokens.size()) {
    throw std::invalid_argument("forward: predicate position " +
                                std::to_string(instance.predicate) + " outside sentence of " +
                                std::to_string(instance.tokens.size()) + " tokens");
  }
  if (options.iterations && *options.iterations < 1) {
    throw std::invalid_argument("iterations override must be >= 1, got " +
                                std::to_string(*options.iterations));
  }
  const Tensor states = encoder_.encode(graph, inputs(graph, instance, options.dropout_rng));
  const Tensor predicate = encoder_.predicate_embedding(graph, instance.predicate_lemma);
  const std::size_t roles = config_.num_roles;

  ForwardResult out;
  switch (config_.variant) {
    case Variant::baseline:
      out.logits = baseline_logits(graph, states, predicate, w_baseline_, roles);
      out.distribution = graph.softmax(out.logits);
      break;
    case Variant::mean_capsules:
      out.logits = mean_capsule_logits(
          graph, word_capsules(graph, states, predicate, w_word_, roles, config_.capsule_size),
          roles);
      out.distribution = graph.softmax(out.logits);
      break;
    case Variant::capsule_no_global:
    case Variant::capsule_global: {
      Tensor u = word_capsules(graph, states, predicate, w_word_, roles, config_.capsule_size);
      auto routed = route(graph, u, roles, routing_weights(),
                          options.iterations.value_or(config_.iterations));
      out.logits = routed.logits;
      out.distribution = routed.distribution;
      out.trajectory = std::move(routed.trajectory);
      break;
    }
  }
  return out;
}

Prediction SrlModel::predict(const EncodedInstance& instance, std::optional<int> iterations) const {
  Graph graph(false);
  ForwardOptions options;
  options.iterations = iterations;
  auto out = forward(graph, instance, options);
  Prediction p;
  p.length = instance.tokens.size();
  p.num_roles = config_.num_roles;
  p.distribution.assign(out.distribution.data().begin(), out.distribution.data().end());
  for (std::size_t t = 1; t < out.trajectory.size(); ++t) {
    const auto c = out.trajectory[t].coupling.data();
    p.iterations.emplace_back(c.begin(), c.end());
  }
  p.iterations.push_back(p.distribution);
  p.trajectory = std::move(out.trajectory);
  return p;
}

}  // namespace capsrl
