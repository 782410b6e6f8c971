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

#include "xcfed/params.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "xcfed/rng.h"

namespace xcfed {

namespace internal {
void throw_non_finite(const char* where) {
  throw std::domain_error(std::string(where) + ": result has non-finite entries");
}
}  // namespace internal

namespace {

void check_shapes(const ModelSpec& spec, const ParamVector& params,
                  const Batch& batch, const char* where) {
  if (params.size() != spec.parameter_count()) {
    throw std::invalid_argument(std::string(where) + ": expected " +
                                std::to_string(spec.parameter_count()) +
                                " parameters, got " +
                                std::to_string(params.size()));
  }
  if (batch.size() == 0) {
    throw std::invalid_argument(std::string(where) + ": empty batch");
  }
  if (batch.features.cols != spec.features ||
      batch.features.rows != batch.size()) {
    throw std::invalid_argument(std::string(where) + ": feature shape mismatch");
  }
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.classes) {
      throw std::invalid_argument(std::string(where) + ": label out of range");
    }
  }
}

// Offsets of each weight block inside the flat vector.
struct Layout {
  // logistic: W (classes x features), b (classes)
  // mlp: W1 (hidden x features), b1 (hidden), W2 (classes x hidden), b2
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

Layout layout_of(const ModelSpec& spec) {
  Layout l;
  if (spec.kind == ModelKind::kLogisticRegression) {
    l.w1 = 0;
    l.b1 = spec.features * spec.classes;
  } else {
    l.w1 = 0;
    l.b1 = spec.features * spec.hidden;
    l.w2 = l.b1 + spec.hidden;
    l.b2 = l.w2 + spec.hidden * spec.classes;
  }
  return l;
}

// out[r] = bias[r] + sum_c weights[r, c] * x[c]
void affine(const double* weights, const double* bias, std::span<const double> x,
            std::size_t out_dim, double* out) {
  const std::size_t in_dim = x.size();
  for (std::size_t r = 0; r < out_dim; ++r) {
    const double* w = weights + r * in_dim;
    double acc = bias[r];
    for (std::size_t c = 0; c < in_dim; ++c) acc += w[c] * x[c];
    out[r] = acc;
  }
}

// Forward pass for one sample; fills hidden activations for the mlp.
void forward_sample(const ModelSpec& spec, const Layout& l, const double* p,
                    std::span<const double> x, std::vector<double>& hidden,
                    std::vector<double>& z) {
  if (spec.kind == ModelKind::kLogisticRegression) {
    affine(p + l.w1, p + l.b1, x, spec.classes, z.data());
    return;
  }
  affine(p + l.w1, p + l.b1, x, spec.hidden, hidden.data());
  for (double& h : hidden) h = std::tanh(h);
  affine(p + l.w2, p + l.b2, hidden, spec.classes, z.data());
}

double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kMlp ? "mlp" : "logistic-regression";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "logistic-regression" || name == "logistic") {
    return ModelKind::kLogisticRegression;
  }
  if (name == "mlp") return ModelKind::kMlp;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::logistic(std::size_t features, std::size_t classes) {
  ModelSpec s{ModelKind::kLogisticRegression, features, classes, 0};
  s.validate();
  return s;
}

ModelSpec ModelSpec::mlp(std::size_t features, std::size_t hidden,
                         std::size_t classes) {
  ModelSpec s{ModelKind::kMlp, features, classes, hidden};
  s.validate();
  return s;
}

void ModelSpec::validate() const {
  if (features < 1) throw std::invalid_argument("model.features must be positive");
  if (classes < 2) throw std::invalid_argument("model.classes must be at least 2");
  if (kind == ModelKind::kMlp && hidden < 1) {
    throw std::invalid_argument("model.hidden must be positive for mlp");
  }
}

std::size_t ModelSpec::parameter_count() const {
  if (kind == ModelKind::kLogisticRegression) return features * classes + classes;
  return features * hidden + hidden + hidden * classes + classes;
}

Batch gather(const Batch& source, std::span<const std::size_t> rows) {
  Batch out;
  out.features = Matrix(rows.size(), source.features.cols);
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = source.features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels[i] = source.labels[rows[i]];
  }
  return out;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, 0x1417));
  ParamVector out(spec.parameter_count());
  for (double& v : out.values()) v = rng.uniform(-0.05, 0.05);
  return out;
}

double forward_loss(const ModelSpec& spec, const ParamVector& params,
                    const Batch& batch) {
  check_shapes(spec, params, batch, "forward_loss");
  const Layout l = layout_of(spec);
  std::vector<double> hidden(spec.hidden), z(spec.classes);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    forward_sample(spec, l, params.values().data(), batch.features.row(i),
                   hidden, z);
    total += log_sum_exp(z) - z[static_cast<std::size_t>(batch.labels[i])];
  }
  return std::max(0.0, total / static_cast<double>(batch.size()));
}

double loss_and_gradient(const ModelSpec& spec, const ParamVector& params,
                         const Batch& batch, Gradient& grad) {
  check_shapes(spec, params, batch, "backward");
  const Layout l = layout_of(spec);
  const double* p = params.values().data();
  grad = Gradient(params.size());
  double* g = grad.values().data();

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::vector<double> hidden(spec.hidden), z(spec.classes), dz(spec.classes),
      dhidden(spec.hidden);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto x = batch.features.row(i);
    const auto y = static_cast<std::size_t>(batch.labels[i]);
    forward_sample(spec, l, p, x, hidden, z);
    const double lse = log_sum_exp(z);
    total += lse - z[y];
    for (std::size_t c = 0; c < spec.classes; ++c) {
      dz[c] = (std::exp(z[c] - lse) - (c == y ? 1.0 : 0.0)) * inv_n;
    }

    // Output layer: input is x (logistic) or the hidden activations (mlp).
    const std::span<const double> in =
        spec.kind == ModelKind::kLogisticRegression
            ? x
            : std::span<const double>(hidden);
    const std::size_t w_out = spec.kind == ModelKind::kLogisticRegression ? l.w1 : l.w2;
    const std::size_t b_out = spec.kind == ModelKind::kLogisticRegression ? l.b1 : l.b2;
    for (std::size_t c = 0; c < spec.classes; ++c) {
      double* gw = g + w_out + c * in.size();
      for (std::size_t k = 0; k < in.size(); ++k) gw[k] += dz[c] * in[k];
      g[b_out + c] += dz[c];
    }
    if (spec.kind == ModelKind::kLogisticRegression) continue;

    for (std::size_t h = 0; h < spec.hidden; ++h) {
      double acc = 0.0;
      for (std::size_t c = 0; c < spec.classes; ++c) {
        acc += p[l.w2 + c * spec.hidden + h] * dz[c];
      }
      dhidden[h] = acc * (1.0 - hidden[h] * hidden[h]);
    }
    for (std::size_t h = 0; h < spec.hidden; ++h) {
      double* gw = g + l.w1 + h * spec.features;
      for (std::size_t k = 0; k < spec.features; ++k) gw[k] += dhidden[h] * x[k];
      g[l.b1 + h] += dhidden[h];
    }
  }
  if (!grad.all_finite()) internal::throw_non_finite("backward");
  return std::max(0.0, total * inv_n);
}

Gradient backward(const ModelSpec& spec, const ParamVector& params,
                  const Batch& batch) {
  Gradient grad;
  loss_and_gradient(spec, params, batch, grad);
  return grad;
}

std::vector<double> logits(const ModelSpec& spec, const ParamVector& params,
                           std::span<const double> features) {
  if (params.size() != spec.parameter_count() || features.size() != spec.features) {
    throw std::invalid_argument("logits: shape mismatch");
  }
  std::vector<double> hidden(spec.hidden), z(spec.classes);
  forward_sample(spec, layout_of(spec), params.values().data(), features, hidden, z);
  return z;
}

int predict(const ModelSpec& spec, const ParamVector& params,
            std::span<const double> features) {
  const auto z = logits(spec, params, features);
  // max_element returns the first maximum, i.e. the lowest class index.
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

ParamVector sgd_step(const ParamVector& params, const Gradient& grad, double lr) {
  if (params.size() != grad.size()) {
    throw std::invalid_argument("sgd_step: dimension mismatch");
  }
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("sgd_step: learning rate must be nonnegative");
  }
  ParamVector out = params;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= lr * grad[j];
  if (!out.all_finite()) internal::throw_non_finite("sgd_step");
  return out;
}

}  // namespace xcfed
