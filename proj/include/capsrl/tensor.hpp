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
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace capsrl {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient reaches this tensor
  bool requires_grad = false;
};
}  // namespace detail

// Dense row-major array of doubles. Copies share storage; use clone() for a
// deep copy. Scalars have shape {1}.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor uniform(Shape shape, double low, double high, std::mt19937_64& rng,
                        bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() { return impl_->data; }
  double operator[](std::size_t i) const { return impl_->data[i]; }
  // Row-major element of a rank-2 tensor.
  double at(std::size_t row, std::size_t col) const {
    return impl_->data[row * impl_->shape[1] + col];
  }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  bool has_grad() const { return !impl_->grad.empty(); }
  // Zeros when no gradient has been accumulated.
  std::vector<double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad() { impl_->grad.clear(); }

  Tensor clone() const;
  Tensor detach() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend class Graph;
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<detail::TensorImpl> impl_;
};

// Records differentiable operations in construction order. backward() replays
// the records in exact reverse order. Single-threaded; one graph per step.
class Graph {
 public:
  // A graph built with record=false evaluates ops without recording them.
  explicit Graph(bool record = true) : record_(record) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Elementwise, shapes must be equal.
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor scale(const Tensor& a, double factor);
  Tensor tanh(const Tensor& a);
  Tensor sigmoid(const Tensor& a);
  // Natural log of max(a, floor). Positions below the floor get no gradient.
  Tensor log(const Tensor& a, double floor = 0.0);

  // Rank-2 products.
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& a);
  // Scalar x^T W p for vectors x[d1], p[d2] and W[d1 x d2].
  Tensor bilinear(const Tensor& x, const Tensor& w, const Tensor& p);

  Tensor reshape(const Tensor& a, Shape shape);
  // Concatenation along axis 0 (rank-1 or rank-2 inputs with matching tails).
  Tensor concat(const std::vector<Tensor>& parts);
  // Concatenation of rank-2 tensors along axis 1.
  Tensor concat_cols(const std::vector<Tensor>& parts);
  Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
  Tensor row(const Tensor& a, std::size_t index);
  Tensor gather_rows(const Tensor& table, std::span<const std::size_t> ids);
  Tensor tile_rows(const Tensor& a, std::size_t count);

  // Reductions. sum/mean/sum_squares return scalars; the *_last variants
  // reduce the last axis and drop it (a rank-1 input yields shape {1}).
  Tensor sum(const Tensor& a);
  Tensor mean(const Tensor& a);
  Tensor mean_last(const Tensor& a);
  Tensor max_last(const Tensor& a);
  // Sum of squares. Rows flagged in skip_rows (if nonempty) are left out.
  Tensor sum_squares(const Tensor& a, const std::vector<bool>& skip_rows = {});

  // Softmax and squash operate along the last axis.
  Tensor softmax(const Tensor& a);
  Tensor squash(const Tensor& a);

  // -(1/n) sum_i log max(probs[i, target_i], floor) over rows of probs[n x C].
  // Increments *clamped for every row where the floor was hit.
  Tensor nll(const Tensor& probs, std::span<const std::size_t> targets, double floor = 1e-12,
             std::size_t* clamped = nullptr);

  // s[j, k] = sum_i c[i, j] * u[i, j*K + k] for c[n x R], u[n x R*K].
  Tensor capsule_pool(const Tensor& coupling, const Tensor& capsules);
  // a[i, j] = sum_k w[j, k] * u[i, j*K + k] for w[R x K], u[n x R*K].
  Tensor capsule_agreement(const Tensor& weights, const Tensor& capsules);

  // Seeds d(root)/d(root) = 1 and propagates to every recorded input.
  void backward(const Tensor& root);

  std::size_t num_records() const { return records_.size(); }
  bool recording() const { return record_; }

 private:
  Tensor make_output(Shape shape, std::vector<double> data,
                     std::initializer_list<const Tensor*> inputs);
  void record(std::function<void()> backward_fn) { records_.push_back(std::move(backward_fn)); }

  bool record_;
  std::vector<std::function<void()>> records_;
};

}  // namespace capsrl
