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

// Small random models and instances shared by the model-level tests.

#include <random>
#include <vector>

#include "capsrl/capsule.hpp"
#include "capsrl/conll.hpp"

namespace capsrl::testing {

inline ModelConfig tiny_config(Variant variant, std::size_t roles = 3, std::size_t k = 2,
                               int iterations = 2) {
  ModelConfig c;
  c.encoder.vocab_size = 8;
  c.encoder.embed_dim = 4;
  c.encoder.hidden_dim = 4;
  c.encoder.layers = 1;
  c.encoder.init_range = 0.5;
  c.num_roles = roles;
  c.capsule_size = k;
  c.variant = variant;
  c.iterations = iterations;
  return c;
}

inline EncodedInstance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t vocab,
                                       std::size_t roles) {
  std::uniform_int_distribution<std::size_t> tok(0, vocab - 1);
  std::uniform_int_distribution<std::size_t> role(0, roles - 1);
  std::uniform_int_distribution<std::size_t> pos(0, n - 1);
  EncodedInstance e;
  for (std::size_t i = 0; i < n; ++i) {
    e.tokens.push_back(tok(rng));
    e.roles.push_back(role(rng));
  }
  e.predicate = pos(rng);
  e.predicate_lemma = tok(rng);
  return e;
}

inline const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::baseline, Variant::mean_capsules,
                                         Variant::capsule_no_global, Variant::capsule_global};
  return v;
}

}  // namespace capsrl::testing
