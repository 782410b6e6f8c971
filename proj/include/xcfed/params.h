/*
 * Copyright 2026 The xcfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Flat parameter vectors and the two small classifiers trained by the
// simulator. Parameters are opaque to the aggregation layer: every rule
// operates on the flat vector.

#ifndef XCFED_PARAMS_H_
#define XCFED_PARAMS_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xcfed {

// Dense vector of doubles with a tag so parameters and gradients do not mix.
template <typename Tag>
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim) : values_(dim, 0.0) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}
  DenseVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& raw() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double l2_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

struct ParamTag {};
struct GradientTag {};
using ParamVector = DenseVector<ParamTag>;
using Gradient = DenseVector<GradientTag>;

enum class ModelKind { kLogisticRegression, kMlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  std::size_t features = 1;
  std::size_t classes = 2;
  std::size_t hidden = 0;  // mlp only

  static ModelSpec logistic(std::size_t features, std::size_t classes);
  static ModelSpec mlp(std::size_t features, std::size_t hidden,
                       std::size_t classes);

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  std::size_t parameter_count() const;
};

// Row-major sample matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

struct Batch {
  Matrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Copies the listed rows out of a larger batch.
Batch gather(const Batch& source, std::span<const std::size_t> rows);

// Entries uniform in [-0.05, 0.05]; a pure function of (spec, seed).
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mean cross-entropy over the batch.
double forward_loss(const ModelSpec& spec, const ParamVector& params,
                    const Batch& batch);

// Analytic gradient of forward_loss.
Gradient backward(const ModelSpec& spec, const ParamVector& params,
                  const Batch& batch);

// Loss and gradient from one pass over the batch.
double loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                         const Batch& batch, Gradient& grad);

// Class scores for one sample.
std::vector<double> logits(const ModelSpec& spec, const ParamVector& params,
                           std::span<const double> features);

// Argmax of the logits, ties to the lowest class index.
int predict(const ModelSpec& spec, const ParamVector& params,
            std::span<const double> features);

ParamVector sgd_step(const ParamVector& params, const Gradient& grad, double lr);

namespace internal {
[[noreturn]] void throw_non_finite(const char* where);
}  // namespace internal

// out = sum_i weights[i] * vectors[i], accumulated in input order.
template <typename Tag>
DenseVector<Tag> combine(std::span<const double> weights,
                         std::span<const DenseVector<Tag>> vectors) {
  if (vectors.empty()) throw std::invalid_argument("combine: empty input");
  if (weights.size() != vectors.size()) {
    throw std::invalid_argument("combine: weights/vectors length mismatch");
  }
  const std::size_t dim = vectors.front().size();
  DenseVector<Tag> out(dim);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw std::invalid_argument("combine: dimension mismatch");
    }
    const double w = weights[i];
    for (std::size_t j = 0; j < dim; ++j) out[j] += w * vectors[i][j];
  }
  if (!out.all_finite()) internal::throw_non_finite("combine");
  return out;
}

template <typename Tag>
DenseVector<Tag> combine(const std::vector<double>& weights,
                         const std::vector<DenseVector<Tag>>& vectors) {
  return combine(std::span<const double>(weights),
                 std::span<const DenseVector<Tag>>(vectors));
}

}  // namespace xcfed

#endif  // XCFED_PARAMS_H_
