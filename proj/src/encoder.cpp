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

#include "capsrl/encoder.hpp"

#include <stdexcept>
#include <string>

#include "capsrl/error.hpp"

namespace capsrl {

void EncoderConfig::validate() const {
  if (vocab_size == 0) throw std::invalid_argument("encoder: empty vocabulary");
  if (embed_dim == 0) throw std::invalid_argument("encoder: embed_dim must be positive");
  if (hidden_dim == 0 || hidden_dim % 2 != 0) {
    throw std::invalid_argument("encoder: hidden_dim must be even and positive, got " +
                                std::to_string(hidden_dim));
  }
  if (layers < 1) throw std::invalid_argument("encoder: at least one layer required");
  if (word_dropout < 0.0 || word_dropout >= 1.0) {
    throw std::invalid_argument("encoder: word_dropout must be in [0, 1)");
  }
}

Encoder::Encoder(const EncoderConfig& config, ParameterStore& params, std::mt19937_64& rng)
    : config_(config) {
  config_.validate();
  const double r = config_.init_range;
  table_ = params.add("embeddings",
                      Tensor::uniform({config_.vocab_size, config_.embed_dim}, -r, r, rng, true));
  const std::size_t h = config_.hidden_dim / 2;
  for (std::size_t layer = 0; layer < config_.layers; ++layer) {
    const std::size_t d_in = layer == 0 ? input_dim() : config_.hidden_dim;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix = "lstm.l" + std::to_string(layer) + "." + dir + ".";
      LstmWeights w;
      w.w_input = params.add(prefix + "w_input", Tensor::uniform({d_in, 4 * h}, -r, r, rng, true));
      w.w_hidden = params.add(prefix + "w_hidden", Tensor::uniform({h, 4 * h}, -r, r, rng, true));
      std::vector<double> bias(4 * h, 0.0);
      for (std::size_t c = h; c < 2 * h; ++c) bias[c] = config_.forget_bias;
      w.bias = params.add(prefix + "bias", Tensor({1, 4 * h}, std::move(bias), true));
      lstm_.push_back(std::move(w));
    }
  }
}

Tensor Encoder::embed(Graph& graph, std::span<const std::size_t> ids) const {
  return graph.gather_rows(table_, ids);
}

Tensor Encoder::predicate_embedding(Graph& graph, std::size_t lemma_id) const {
  const std::size_t id[] = {lemma_id};
  return graph.reshape(graph.gather_rows(table_, id), {config_.embed_dim, 1});
}

Tensor Encoder::run_direction(Graph& graph, const Tensor& inputs, const LstmWeights& w,
                              bool reverse) const {
  const std::size_t n = inputs.dim(0);
  const std::size_t h = config_.hidden_dim / 2;
  const Tensor projected = graph.matmul(inputs, w.w_input);
  Tensor state = Tensor::zeros({1, h});
  Tensor cell = Tensor::zeros({1, h});
  std::vector<Tensor> states(n);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t t = reverse ? n - 1 - step : step;
    Tensor gates = graph.add(graph.add(graph.row(projected, t), graph.matmul(state, w.w_hidden)),
                             w.bias);
    Tensor in_gate = graph.sigmoid(graph.slice_cols(gates, 0, h));
    Tensor forget_gate = graph.sigmoid(graph.slice_cols(gates, h, 2 * h));
    Tensor candidate = graph.tanh(graph.slice_cols(gates, 2 * h, 3 * h));
    Tensor out_gate = graph.sigmoid(graph.slice_cols(gates, 3 * h, 4 * h));
    cell = graph.add(graph.mul(forget_gate, cell), graph.mul(in_gate, candidate));
    state = graph.mul(out_gate, graph.tanh(cell));
    states[t] = state;
  }
  return graph.concat(states);
}

Tensor Encoder::encode(Graph& graph, const Tensor& inputs) const {
  if (inputs.rank() != 2 || inputs.dim(1) != input_dim()) {
    throw ShapeError("encode: expected [n x " + std::to_string(input_dim()) + "] inputs, got " +
                     shape_string(inputs.shape()));
  }
  Tensor layer_input = inputs;
  for (std::size_t layer = 0; layer < config_.layers; ++layer) {
    Tensor fwd = run_direction(graph, layer_input, lstm_[2 * layer], false);
    Tensor bwd = run_direction(graph, layer_input, lstm_[2 * layer + 1], true);
    layer_input = graph.concat_cols({fwd, bwd});
  }
  return layer_input;
}

}  // namespace capsrl
