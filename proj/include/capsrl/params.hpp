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
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "capsrl/tensor.hpp"
#include "json.hpp"

namespace capsrl {

struct Parameter {
  std::string name;
  Tensor value;
  // Rows excluded from the L2 penalty (e.g. pretrained embedding rows).
  std::vector<bool> frozen_rows;
};

// Named trainable tensors in registration order. Handles returned by add()
// stay valid: loading values copies into the existing storage.
class ParameterStore {
 public:
  Tensor add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const Tensor& get(const std::string& name) const;
  Parameter& entry(const std::string& name);

  std::vector<Parameter>::iterator begin() { return params_.begin(); }
  std::vector<Parameter>::iterator end() { return params_.end(); }
  std::vector<Parameter>::const_iterator begin() const { return params_.begin(); }
  std::vector<Parameter>::const_iterator end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }
  std::size_t num_values() const;

  void zero_grad();
  // Deep copy of all values, e.g. to retain the best epoch.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline constexpr const char* kCheckpointFormat = "capsrl-checkpoint";
inline constexpr int kCheckpointVersion = 1;

// JSON container: {"format", "version", "metadata", "parameters": [{name, shape, data}]}.
// Doubles are written in shortest round-trip form, so values reload bitwise.
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const nlohmann::json& metadata);

struct Checkpoint {
  nlohmann::json metadata;
  std::vector<std::pair<std::string, Tensor>> parameters;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies checkpoint values into an existing store. Missing, extra, or
// mis-shaped parameters raise an error naming the parameter.
void load_parameters(ParameterStore& params, const Checkpoint& checkpoint);

}  // namespace capsrl
