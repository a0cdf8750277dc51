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

#include "capsrl/params.hpp"

#include <fstream>
#include <stdexcept>

#include "capsrl/error.hpp"

namespace capsrl {

Tensor ParameterStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{name, value, {}});
  return value;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second].value;
}

Parameter& ParameterStore::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return params_[it->second];
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

std::vector<std::vector<double>> ParameterStore::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.value.data().begin(), p.value.data().end());
  return out;
}

void ParameterStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw std::invalid_argument("snapshot size mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].value.mutable_data();
    if (values[i].size() != dst.size()) {
      throw ShapeError("snapshot size mismatch for '" + params_[i].name + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params,
                     const nlohmann::json& metadata) {
  nlohmann::json doc;
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["metadata"] = metadata;
  auto& list = doc["parameters"] = nlohmann::json::array();
  for (const auto& p : params) {
    list.push_back({{"name", p.name},
                    {"shape", p.value.shape()},
                    {"data", std::vector<double>(p.value.data().begin(), p.value.data().end())}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": invalid checkpoint: " + e.what());
  }
  if (doc.value("format", "") != kCheckpointFormat) {
    throw std::runtime_error(path.string() + ": not a capsrl checkpoint");
  }
  if (doc.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error(path.string() + ": unsupported checkpoint version " +
                             doc.value("version", nlohmann::json()).dump());
  }
  Checkpoint out;
  out.metadata = doc.value("metadata", nlohmann::json::object());
  for (const auto& p : doc.at("parameters")) {
    out.parameters.emplace_back(
        p.at("name").get<std::string>(),
        Tensor(p.at("shape").get<Shape>(), p.at("data").get<std::vector<double>>()));
  }
  return out;
}

void load_parameters(ParameterStore& params, const Checkpoint& checkpoint) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, value] : checkpoint.parameters) by_name[name] = &value;
  for (auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint is missing parameter '" + p.name + "'");
    }
    if (it->second->shape() != p.value.shape()) {
      throw ShapeError("parameter '" + p.name + "' has shape " + shape_string(p.value.shape()) +
                       " in the model but " + shape_string(it->second->shape()) +
                       " in the checkpoint");
    }
  }
  if (by_name.size() != params.size()) {
    for (const auto& [name, value] : checkpoint.parameters) {
      if (!params.contains(name)) {
        throw std::runtime_error("checkpoint has unexpected parameter '" + name + "'");
      }
    }
  }
  for (auto& p : params) {
    auto src = by_name.at(p.name)->data();
    std::copy(src.begin(), src.end(), p.value.mutable_data().begin());
  }
}

}  // namespace capsrl
