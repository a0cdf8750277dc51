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
#include <random>
#include <span>
#include <vector>

#include "capsrl/params.hpp"
#include "capsrl/tensor.hpp"

namespace capsrl {

struct EncoderConfig {
  std::size_t vocab_size = 1;
  std::size_t embed_dim = 300;   // d_e
  std::size_t hidden_dim = 500;  // d_l, half per direction
  std::size_t layers = 2;
  double word_dropout = 0.0;
  // Appends a 0/1 predicate-position feature to every token embedding.
  bool predicate_indicator = false;
  double init_range = 0.1;
  double forget_bias = 1.0;

  void validate() const;
};

struct LstmWeights {
  Tensor w_input;   // [d_in x 4H], gate order: input, forget, cell, output
  Tensor w_hidden;  // [H x 4H]
  Tensor bias;      // [1 x 4H]
};

// Lookup embeddings followed by a stacked bidirectional LSTM.
class Encoder {
 public:
  Encoder(const EncoderConfig& config, ParameterStore& params, std::mt19937_64& rng);

  const EncoderConfig& config() const { return config_; }
  std::size_t input_dim() const {
    return config_.embed_dim + (config_.predicate_indicator ? 1 : 0);
  }

  // [n x d_e] rows of the embedding table; ids past the table raise.
  Tensor embed(Graph& graph, std::span<const std::size_t> ids) const;
  // [d_e x 1] column: the lemma's row of the shared table.
  Tensor predicate_embedding(Graph& graph, std::size_t lemma_id) const;
  // [n x input_dim] -> [n x d_l], forward states in the left half.
  Tensor encode(Graph& graph, const Tensor& inputs) const;

  const Tensor& table() const { return table_; }
  // Layer-major, forward then backward direction.
  const std::vector<LstmWeights>& lstm() const { return lstm_; }

 private:
  Tensor run_direction(Graph& graph, const Tensor& inputs, const LstmWeights& w,
                       bool reverse) const;

  EncoderConfig config_;
  Tensor table_;
  std::vector<LstmWeights> lstm_;
};

}  // namespace capsrl
