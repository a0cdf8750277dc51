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

#include "capsrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "capsrl/error.hpp"

namespace capsrl {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  if (shape.empty()) shape = {1};
  for (auto d : shape) {
    if (d == 0) throw ShapeError("tensor shape " + shape_string(shape) + " has a zero dimension");
  }
  if (numel(shape) != data.size()) {
    throw ShapeError("tensor shape " + shape_string(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto n = numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::uniform(Shape shape, double low, double high, std::mt19937_64& rng,
                       bool requires_grad) {
  std::uniform_real_distribution<double> dist(low, high);
  std::vector<double> data(numel(shape));
  for (auto& x : data) x = dist(rng);
  return Tensor(std::move(shape), std::move(data), requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

std::vector<double> Tensor::grad() const {
  if (impl_->grad.empty()) return std::vector<double>(size(), 0.0);
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (impl_->grad.empty()) impl_->grad.assign(size(), 0.0);
  return impl_->grad;
}

Tensor Tensor::clone() const {
  Tensor out(impl_->shape, impl_->data, impl_->requires_grad);
  out.impl_->grad = impl_->grad;
  return out;
}

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }

namespace {

using Impl = std::shared_ptr<detail::TensorImpl>;

std::vector<double>& grad_of(detail::TensorImpl& t) {
  if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
  return t.grad;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shapes differ: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_string(a.shape()));
  }
}

Shape drop_last(const Shape& shape) {
  if (shape.size() <= 1) return {1};
  return Shape(shape.begin(), shape.end() - 1);
}

}  // namespace

Tensor Graph::make_output(Shape shape, std::vector<double> data,
                          std::initializer_list<const Tensor*> inputs) {
  bool needs_grad = false;
  if (record_) {
    for (const auto* t : inputs) needs_grad = needs_grad || t->requires_grad();
  }
  return Tensor(std::move(shape), std::move(data), needs_grad);
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + b[i];
  auto out = make_output(a.shape(), std::move(y), {&a, &b});
  if (out.requires_grad()) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      for (auto* t : {ai.get(), bi.get()}) {
        if (!t->requires_grad) continue;
        auto& g = grad_of(*t);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
    });
  }
  return out;
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] - b[i];
  auto out = make_output(a.shape(), std::move(y), {&a, &b});
  if (out.requires_grad()) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& g = grad_of(*ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_of(*bi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= oi->grad[i];
      }
    });
  }
  return out;
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] * b[i];
  auto out = make_output(a.shape(), std::move(y), {&a, &b});
  if (out.requires_grad()) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      if (ai->requires_grad) {
        auto& g = grad_of(*ai);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * bi->data[i];
      }
      if (bi->requires_grad) {
        auto& g = grad_of(*bi);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * ai->data[i];
      }
    });
  }
  return out;
}

Tensor Graph::scale(const Tensor& a, double factor) {
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] * factor;
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, factor] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i] * factor;
    });
  }
  return out;
}

Tensor Graph::tanh(const Tensor& a) {
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(a[i]);
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double t = oi->data[i];
        g[i] += oi->grad[i] * (1.0 - t * t);
      }
    });
  }
  return out;
}

Tensor Graph::sigmoid(const Tensor& a) {
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double x = a[i];
    y[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double s = oi->data[i];
        g[i] += oi->grad[i] * s * (1.0 - s);
      }
    });
  }
  return out;
}

Tensor Graph::log(const Tensor& a, double floor) {
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(std::max(a[i], floor));
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, floor] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double x = ai->data[i];
        if (x > floor) g[i] += oi->grad[i] / x;
      }
    });
  }
  return out;
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: inner dimensions differ: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  std::vector<double> y(m * n, 0.0);
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* yr = y.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      if (av == 0.0) continue;
      const double* br = bd + p * n;
      for (std::size_t j = 0; j < n; ++j) yr[j] += av * br[j];
    }
  }
  auto out = make_output({m, n}, std::move(y), {&a, &b});
  if (out.requires_grad()) {
    record([ai = a.impl_, bi = b.impl_, oi = out.impl_, m, k, n] {
      if (oi->grad.empty()) return;
      const double* g = oi->grad.data();
      if (ai->requires_grad) {
        auto& ga = grad_of(*ai);
        const double* bd = bi->data.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bd[p * n + j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (bi->requires_grad) {
        auto& gb = grad_of(*bi);
        const double* ad = ai->data.data();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double av = ad[i * k + p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * g[i * n + j];
          }
        }
      }
    });
  }
  return out;
}

Tensor Graph::transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> y(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[j * m + i] = a[i * n + j];
  auto out = make_output({n, m}, std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, m, n] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += oi->grad[j * m + i];
    });
  }
  return out;
}

Tensor Graph::bilinear(const Tensor& x, const Tensor& w, const Tensor& p) {
  require_rank("bilinear", w, 2);
  const std::size_t d1 = w.dim(0), d2 = w.dim(1);
  if (x.size() != d1 || p.size() != d2) {
    throw ShapeError("bilinear: " + shape_string(x.shape()) + " x " + shape_string(w.shape()) +
                     " x " + shape_string(p.shape()) + " do not chain");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < d1; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d2; ++j) row += w[i * d2 + j] * p[j];
    acc += x[i] * row;
  }
  auto out = make_output({1}, {acc}, {&x, &w, &p});
  if (out.requires_grad()) {
    record([xi = x.impl_, wi = w.impl_, pi = p.impl_, oi = out.impl_, d1, d2] {
      if (oi->grad.empty()) return;
      const double g = oi->grad[0];
      const auto& xd = xi->data;
      const auto& wd = wi->data;
      const auto& pd = pi->data;
      if (xi->requires_grad) {
        auto& gx = grad_of(*xi);
        for (std::size_t i = 0; i < d1; ++i) {
          double row = 0.0;
          for (std::size_t j = 0; j < d2; ++j) row += wd[i * d2 + j] * pd[j];
          gx[i] += g * row;
        }
      }
      if (wi->requires_grad) {
        auto& gw = grad_of(*wi);
        for (std::size_t i = 0; i < d1; ++i)
          for (std::size_t j = 0; j < d2; ++j) gw[i * d2 + j] += g * xd[i] * pd[j];
      }
      if (pi->requires_grad) {
        auto& gp = grad_of(*pi);
        for (std::size_t j = 0; j < d2; ++j) {
          double col = 0.0;
          for (std::size_t i = 0; i < d1; ++i) col += xd[i] * wd[i * d2 + j];
          gp[j] += g * col;
        }
      }
    });
  }
  return out;
}

Tensor Graph::reshape(const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw ShapeError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                     shape_string(shape));
  }
  std::vector<double> y(a.data().begin(), a.data().end());
  auto out = make_output(std::move(shape), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[i];
    });
  }
  return out;
}

Tensor Graph::concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const auto& first = parts.front().shape();
  std::size_t lead = 0;
  bool needs_grad = false;
  for (const auto& p : parts) {
    if (p.rank() != first.size() || !std::equal(first.begin() + 1, first.end(),
                                                  p.shape().begin() + 1)) {
      throw ShapeError("concat: incompatible shapes " + shape_string(first) + " and " +
                       shape_string(p.shape()));
    }
    lead += p.dim(0);
    needs_grad = needs_grad || p.requires_grad();
  }
  Shape shape = first;
  shape[0] = lead;
  std::vector<double> y;
  y.reserve(numel(shape));
  for (const auto& p : parts) y.insert(y.end(), p.data().begin(), p.data().end());
  Tensor out(std::move(shape), std::move(y), record_ && needs_grad);
  if (out.requires_grad()) {
    std::vector<Impl> impls;
    impls.reserve(parts.size());
    for (const auto& p : parts) impls.push_back(p.impl_);
    record([impls = std::move(impls), oi = out.impl_] {
      if (oi->grad.empty()) return;
      std::size_t offset = 0;
      for (const auto& t : impls) {
        if (t->requires_grad) {
          auto& g = grad_of(*t);
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += oi->grad[offset + i];
        }
        offset += t->data.size();
      }
    });
  }
  return out;
}

Tensor Graph::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = parts.front().rank() == 2 ? parts.front().dim(0) : 0;
  std::size_t cols = 0;
  bool needs_grad = false;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (p.rank() != 2 || p.dim(0) != rows) {
      throw ShapeError("concat_cols: incompatible shapes " +
                       shape_string(parts.front().shape()) + " and " + shape_string(p.shape()));
    }
    widths.push_back(p.dim(1));
    cols += p.dim(1);
    needs_grad = needs_grad || p.requires_grad();
  }
  std::vector<double> y(rows * cols);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < w; ++c) y[r * cols + offset + c] = p[r * w + c];
    offset += w;
  }
  Tensor out({rows, cols}, std::move(y), record_ && needs_grad);
  if (out.requires_grad()) {
    std::vector<Impl> impls;
    for (const auto& p : parts) impls.push_back(p.impl_);
    record([impls = std::move(impls), widths = std::move(widths), oi = out.impl_, rows, cols] {
      if (oi->grad.empty()) return;
      std::size_t offset = 0;
      for (std::size_t t = 0; t < impls.size(); ++t) {
        const std::size_t w = widths[t];
        if (impls[t]->requires_grad) {
          auto& g = grad_of(*impls[t]);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < w; ++c) g[r * w + c] += oi->grad[r * cols + offset + c];
        }
        offset += w;
      }
    });
  }
  return out;
}

Tensor Graph::slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank("slice_cols", a, 2);
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (begin >= end || end > cols) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") out of bounds for " + shape_string(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> y(rows * w);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < w; ++c) y[r * w + c] = a[r * cols + begin + c];
  auto out = make_output({rows, w}, std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, rows, cols, begin, w] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < w; ++c) g[r * cols + begin + c] += oi->grad[r * w + c];
    });
  }
  return out;
}

Tensor Graph::row(const Tensor& a, std::size_t index) {
  require_rank("row", a, 2);
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (index >= rows) {
    throw ShapeError("row: index " + std::to_string(index) + " out of bounds for " +
                     shape_string(a.shape()));
  }
  std::vector<double> y(a.data().begin() + index * cols, a.data().begin() + (index + 1) * cols);
  auto out = make_output({1, cols}, std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, index, cols] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t c = 0; c < cols; ++c) g[index * cols + c] += oi->grad[c];
    });
  }
  return out;
}

Tensor Graph::gather_rows(const Tensor& table, std::span<const std::size_t> ids) {
  require_rank("gather_rows", table, 2);
  if (ids.empty()) throw ShapeError("gather_rows: no ids");
  const std::size_t rows = table.dim(0), cols = table.dim(1);
  std::vector<double> y(ids.size() * cols);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= rows) {
      throw ShapeError("gather_rows: id " + std::to_string(ids[r]) + " out of bounds for " +
                       shape_string(table.shape()));
    }
    std::copy_n(table.data().begin() + ids[r] * cols, cols, y.begin() + r * cols);
  }
  auto out = make_output({ids.size(), cols}, std::move(y), {&table});
  if (out.requires_grad()) {
    record([ti = table.impl_, oi = out.impl_, ids = std::vector<std::size_t>(ids.begin(), ids.end()),
            cols] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ti);
      for (std::size_t r = 0; r < ids.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) g[ids[r] * cols + c] += oi->grad[r * cols + c];
    });
  }
  return out;
}

Tensor Graph::tile_rows(const Tensor& a, std::size_t count) {
  require_rank("tile_rows", a, 2);
  if (a.dim(0) != 1 || count == 0) {
    throw ShapeError("tile_rows: expected a single row, got " + shape_string(a.shape()));
  }
  const std::size_t cols = a.dim(1);
  std::vector<double> y(count * cols);
  for (std::size_t r = 0; r < count; ++r) std::copy_n(a.data().begin(), cols, y.begin() + r * cols);
  auto out = make_output({count, cols}, std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, count, cols] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < count; ++r)
        for (std::size_t c = 0; c < cols; ++c) g[c] += oi->grad[r * cols + c];
    });
  }
  return out;
}

Tensor Graph::sum(const Tensor& a) {
  double acc = 0.0;
  for (double x : a.data()) acc += x;
  auto out = make_output({1}, {acc}, {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (auto& x : g) x += oi->grad[0];
    });
  }
  return out;
}

Tensor Graph::mean(const Tensor& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor Graph::mean_last(const Tensor& a) {
  const std::size_t width = a.shape().back();
  const std::size_t groups = a.size() / width;
  std::vector<double> y(groups, 0.0);
  for (std::size_t r = 0; r < groups; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < width; ++c) acc += a[r * width + c];
    y[r] = acc / static_cast<double>(width);
  }
  auto out = make_output(drop_last(a.shape()), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, groups, width] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      const double inv = 1.0 / static_cast<double>(width);
      for (std::size_t r = 0; r < groups; ++r)
        for (std::size_t c = 0; c < width; ++c) g[r * width + c] += oi->grad[r] * inv;
    });
  }
  return out;
}

Tensor Graph::max_last(const Tensor& a) {
  const std::size_t width = a.shape().back();
  const std::size_t groups = a.size() / width;
  std::vector<double> y(groups);
  std::vector<std::size_t> arg(groups);
  for (std::size_t r = 0; r < groups; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < width; ++c) {
      if (a[r * width + c] > a[r * width + best]) best = c;
    }
    arg[r] = best;
    y[r] = a[r * width + best];
  }
  auto out = make_output(drop_last(a.shape()), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, arg = std::move(arg), width] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < arg.size(); ++r) g[r * width + arg[r]] += oi->grad[r];
    });
  }
  return out;
}

Tensor Graph::sum_squares(const Tensor& a, const std::vector<bool>& skip_rows) {
  const std::size_t rows = a.rank() >= 2 ? a.dim(0) : 1;
  const std::size_t width = a.size() / rows;
  if (!skip_rows.empty() && skip_rows.size() != rows) {
    throw ShapeError("sum_squares: mask of length " + std::to_string(skip_rows.size()) +
                     " for " + shape_string(a.shape()));
  }
  std::vector<char> keep(rows, 1);
  for (std::size_t r = 0; r < skip_rows.size(); ++r) keep[r] = skip_rows[r] ? 0 : 1;
  double acc = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!keep[r]) continue;
    for (std::size_t c = 0; c < width; ++c) acc += a[r * width + c] * a[r * width + c];
  }
  auto out = make_output({1}, {acc}, {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, keep = std::move(keep), width] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < keep.size(); ++r) {
        if (!keep[r]) continue;
        for (std::size_t c = 0; c < width; ++c)
          g[r * width + c] += 2.0 * ai->data[r * width + c] * oi->grad[0];
      }
    });
  }
  return out;
}

Tensor Graph::softmax(const Tensor& a) {
  const std::size_t width = a.shape().back();
  const std::size_t groups = a.size() / width;
  std::vector<double> y(a.size());
  for (std::size_t r = 0; r < groups; ++r) {
    const double* x = a.data().data() + r * width;
    double* out = y.data() + r * width;
    const double top = *std::max_element(x, x + width);
    double total = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      out[c] = std::exp(x[c] - top);
      total += out[c];
    }
    for (std::size_t c = 0; c < width; ++c) out[c] /= total;
  }
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, groups, width] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < groups; ++r) {
        const double* yv = oi->data.data() + r * width;
        const double* gy = oi->grad.data() + r * width;
        double dot = 0.0;
        for (std::size_t c = 0; c < width; ++c) dot += gy[c] * yv[c];
        for (std::size_t c = 0; c < width; ++c) g[r * width + c] += yv[c] * (gy[c] - dot);
      }
    });
  }
  return out;
}

Tensor Graph::squash(const Tensor& a) {
  // |s|^2/(1+|s|^2) * s/|s| rewritten as |s|/(1+|s|^2) * s: identical for
  // s != 0 and continuous at the origin, where it maps to 0.
  const std::size_t width = a.shape().back();
  const std::size_t groups = a.size() / width;
  std::vector<double> y(a.size());
  std::vector<double> norms(groups);
  for (std::size_t r = 0; r < groups; ++r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < width; ++c) sq += a[r * width + c] * a[r * width + c];
    const double norm = std::sqrt(sq);
    norms[r] = norm;
    const double factor = norm / (1.0 + sq);
    for (std::size_t c = 0; c < width; ++c) y[r * width + c] = factor * a[r * width + c];
  }
  auto out = make_output(a.shape(), std::move(y), {&a});
  if (out.requires_grad()) {
    record([ai = a.impl_, oi = out.impl_, norms = std::move(norms), width] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*ai);
      for (std::size_t r = 0; r < norms.size(); ++r) {
        const double n = norms[r];
        const double sq = n * n;
        const double factor = n / (1.0 + sq);
        const double* s = ai->data.data() + r * width;
        const double* gy = oi->grad.data() + r * width;
        double dot = 0.0;
        for (std::size_t c = 0; c < width; ++c) dot += s[c] * gy[c];
        // d factor / d|s| divided by |s|; the term vanishes at the origin.
        const double radial = n > 0.0 ? (1.0 - sq) / ((1.0 + sq) * (1.0 + sq) * n) : 0.0;
        for (std::size_t c = 0; c < width; ++c)
          g[r * width + c] += factor * gy[c] + radial * dot * s[c];
      }
    });
  }
  return out;
}

Tensor Graph::nll(const Tensor& probs, std::span<const std::size_t> targets, double floor,
                  std::size_t* clamped) {
  require_rank("nll", probs, 2);
  const std::size_t n = probs.dim(0), classes = probs.dim(1);
  if (targets.size() != n) {
    throw ShapeError("nll: " + std::to_string(targets.size()) + " targets for " +
                     shape_string(probs.shape()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= classes) {
      throw ShapeError("nll: target " + std::to_string(targets[i]) + " out of range for " +
                       shape_string(probs.shape()));
    }
    const double p = probs[i * classes + targets[i]];
    if (p <= floor && clamped) ++*clamped;
    acc -= std::log(std::max(p, floor));
  }
  auto out = make_output({1}, {acc / static_cast<double>(n)}, {&probs});
  if (out.requires_grad()) {
    record([pi = probs.impl_, oi = out.impl_,
            targets = std::vector<std::size_t>(targets.begin(), targets.end()), classes, floor] {
      if (oi->grad.empty()) return;
      auto& g = grad_of(*pi);
      const double inv_n = 1.0 / static_cast<double>(targets.size());
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::size_t at = i * classes + targets[i];
        const double p = pi->data[at];
        if (p > floor) g[at] -= oi->grad[0] * inv_n / p;
      }
    });
  }
  return out;
}

Tensor Graph::capsule_pool(const Tensor& coupling, const Tensor& capsules) {
  require_rank("capsule_pool", coupling, 2);
  require_rank("capsule_pool", capsules, 2);
  const std::size_t n = coupling.dim(0), roles = coupling.dim(1);
  if (capsules.dim(0) != n || capsules.dim(1) % roles != 0) {
    throw ShapeError("capsule_pool: couplings " + shape_string(coupling.shape()) +
                     " do not match capsules " + shape_string(capsules.shape()));
  }
  const std::size_t k = capsules.dim(1) / roles;
  std::vector<double> y(roles * k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < roles; ++j) {
      const double c = coupling[i * roles + j];
      for (std::size_t q = 0; q < k; ++q) y[j * k + q] += c * capsules[(i * roles + j) * k + q];
    }
  auto out = make_output({roles, k}, std::move(y), {&coupling, &capsules});
  if (out.requires_grad()) {
    record([ci = coupling.impl_, ui = capsules.impl_, oi = out.impl_, n, roles, k] {
      if (oi->grad.empty()) return;
      const auto& gy = oi->grad;
      if (ci->requires_grad) {
        auto& gc = grad_of(*ci);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < roles; ++j) {
            double acc = 0.0;
            for (std::size_t q = 0; q < k; ++q) acc += gy[j * k + q] * ui->data[(i * roles + j) * k + q];
            gc[i * roles + j] += acc;
          }
      }
      if (ui->requires_grad) {
        auto& gu = grad_of(*ui);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < roles; ++j) {
            const double c = ci->data[i * roles + j];
            for (std::size_t q = 0; q < k; ++q) gu[(i * roles + j) * k + q] += c * gy[j * k + q];
          }
      }
    });
  }
  return out;
}

Tensor Graph::capsule_agreement(const Tensor& weights, const Tensor& capsules) {
  require_rank("capsule_agreement", weights, 2);
  require_rank("capsule_agreement", capsules, 2);
  const std::size_t roles = weights.dim(0), k = weights.dim(1);
  if (capsules.dim(1) != roles * k) {
    throw ShapeError("capsule_agreement: weights " + shape_string(weights.shape()) +
                     " do not match capsules " + shape_string(capsules.shape()));
  }
  const std::size_t n = capsules.dim(0);
  std::vector<double> y(n * roles, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < roles; ++j) {
      double acc = 0.0;
      for (std::size_t q = 0; q < k; ++q) acc += weights[j * k + q] * capsules[(i * roles + j) * k + q];
      y[i * roles + j] = acc;
    }
  auto out = make_output({n, roles}, std::move(y), {&weights, &capsules});
  if (out.requires_grad()) {
    record([wi = weights.impl_, ui = capsules.impl_, oi = out.impl_, n, roles, k] {
      if (oi->grad.empty()) return;
      const auto& gy = oi->grad;
      if (wi->requires_grad) {
        auto& gw = grad_of(*wi);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < roles; ++j) {
            const double g = gy[i * roles + j];
            for (std::size_t q = 0; q < k; ++q) gw[j * k + q] += g * ui->data[(i * roles + j) * k + q];
          }
      }
      if (ui->requires_grad) {
        auto& gu = grad_of(*ui);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < roles; ++j) {
            const double g = gy[i * roles + j];
            for (std::size_t q = 0; q < k; ++q) gu[(i * roles + j) * k + q] += g * wi->data[j * k + q];
          }
      }
    });
  }
  return out;
}

void Graph::backward(const Tensor& root) {
  if (root.size() != 1) {
    throw ShapeError("backward: root must be a scalar, got " + shape_string(root.shape()));
  }
  if (!root.requires_grad()) return;
  grad_of(*root.impl_)[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
}

}  // namespace capsrl
