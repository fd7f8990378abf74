#include <cmath>

#include "adascale/errors.hpp"
#include "adascale/kernels/kernels.hpp"
#include "adascale/objectives.hpp"

namespace adascale {

namespace {

// log(1 + e^z), stable for large |z|
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

GeneratedClassifier::GeneratedClassifier(ClassifierOptions opts) : opts_(opts) {
  const std::size_t n = opts_.n_examples;
  const std::size_t p = opts_.features;
  if (n == 0 || p == 0) throw ConfigError("classifier needs examples and features");
  if (opts_.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (opts_.model == ClassifierOptions::Model::mlp && opts_.hidden == 0)
    throw ConfigError("mlp needs at least one hidden unit");

  dim_ = opts_.model == ClassifierOptions::Model::logistic ? p + 1 : opts_.hidden * (p + 2) + 1;

  RngStream data_rng(opts_.data_seed, 0, 0);
  const double offset = opts_.separation / std::sqrt(static_cast<double>(p));
  x_.resize(n * p);
  y_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y_[i] = static_cast<double>(i % 2);
    const double sign = y_[i] > 0.5 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < p; ++j) x_[i * p + j] = sign * offset + data_rng.normal();
  }

  w0_ = ParamVector(dim_);
  if (opts_.model == ClassifierOptions::Model::mlp) {
    // Break hidden-unit symmetry with a fixed small random start.
    RngStream init_rng(opts_.data_seed, 1, 0);
    const double s = 1.0 / std::sqrt(static_cast<double>(p));
    for (std::size_t k = 0; k < dim_; ++k) w0_[k] = s * init_rng.normal();
  }
}

std::string_view GeneratedClassifier::name() const {
  return opts_.model == ClassifierOptions::Model::logistic ? "logistic" : "mlp";
}

// Parameter layout.
//   logistic: [w (p), b]
//   mlp:      [W1 (h x p, row-major), b1 (h), w2 (h), b2]
double GeneratedClassifier::logit(const ParamVector& w, std::size_t i,
                                  std::vector<double>* hidden) const {
  const std::size_t p = opts_.features;
  const auto& k = kernels::active();
  const double* xi = x_.data() + i * p;
  if (opts_.model == ClassifierOptions::Model::logistic) return k.dot(w.data(), xi, p) + w[p];

  const std::size_t h = opts_.hidden;
  const double* W1 = w.data();
  const double* b1 = W1 + h * p;
  const double* w2 = b1 + h;
  const double b2 = w2[h];
  hidden->resize(h);
  for (std::size_t u = 0; u < h; ++u) (*hidden)[u] = std::tanh(k.dot(W1 + u * p, xi, p) + b1[u]);
  return k.dot(w2, hidden->data(), h) + b2;
}

double GeneratedClassifier::example_loss(const ParamVector& w, std::size_t i) const {
  check_dim(w);
  std::vector<double> hidden;
  const double z = logit(w, i, &hidden);
  return softplus(z) - y_[i] * z;
}

void GeneratedClassifier::accumulate_example_gradient(const ParamVector& w, std::size_t i,
                                                      double weight, std::vector<double>& hidden,
                                                      ParamVector& out) const {
  const std::size_t p = opts_.features;
  const double* xi = x_.data() + i * p;
  const double dz = weight * (sigmoid(logit(w, i, &hidden)) - y_[i]);
  const auto& k = kernels::active();
  if (opts_.model == ClassifierOptions::Model::logistic) {
    k.axpy(dz, xi, out.data(), p);
    out[p] += dz;
    return;
  }
  const std::size_t h = opts_.hidden;
  const double* w2 = w.data() + h * p + h;
  double* gW1 = out.data();
  double* gb1 = gW1 + h * p;
  double* gw2 = gb1 + h;
  k.axpy(dz, hidden.data(), gw2, h);
  gw2[h] += dz;
  for (std::size_t u = 0; u < h; ++u) {
    const double dh = dz * w2[u] * (1.0 - hidden[u] * hidden[u]);
    k.axpy(dh, xi, gW1 + u * p, p);
    gb1[u] += dh;
  }
}

void GeneratedClassifier::gradient_over(const ParamVector& w, std::span<const std::uint32_t> idx,
                                        ParamVector& out) const {
  check_dim(w);
  if (idx.empty()) throw ConfigError("empty batch");
  if (out.dim() != dim_) out = ParamVector(dim_);
  out.fill(0.0);
  std::vector<double> hidden;
  for (std::uint32_t i : idx) {
    if (i >= opts_.n_examples) throw ConfigError("example index out of range");
    accumulate_example_gradient(w, i, 1.0, hidden, out);
  }
  kernels::scale(1.0 / static_cast<double>(idx.size()), out.span());
  if (opts_.l2 > 0.0) kernels::axpy(opts_.l2, w.span(), out.span());
}

Batch GeneratedClassifier::sample_batch(RngStream& rng, int worker_index) const {
  ExampleIndices b;
  b.indices.resize(opts_.batch_size);
  for (auto& i : b.indices) i = static_cast<std::uint32_t>(rng.below(opts_.n_examples));
  return Batch{std::move(b), worker_index};
}

Batch GeneratedClassifier::full_batch() const {
  ExampleIndices b;
  b.indices.resize(opts_.n_examples);
  for (std::size_t i = 0; i < opts_.n_examples; ++i) b.indices[i] = static_cast<std::uint32_t>(i);
  return Batch{std::move(b), 1};
}

void GeneratedClassifier::stochastic_gradient(const ParamVector& w, const Batch& b,
                                              ParamVector& out) const {
  const auto* idx = std::get_if<ExampleIndices>(&b.payload);
  if (!idx) throw ConfigError("classifier batches carry example indices");
  gradient_over(w, idx->indices, out);
}

void GeneratedClassifier::true_gradient(const ParamVector& w, ParamVector& out) const {
  const Batch all = full_batch();
  gradient_over(w, std::get<ExampleIndices>(all.payload).indices, out);
}

double GeneratedClassifier::value(const ParamVector& w) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < opts_.n_examples; ++i) sum += example_loss(w, i);
  double f = sum / static_cast<double>(opts_.n_examples);
  if (opts_.l2 > 0.0) f += 0.5 * opts_.l2 * kernels::sq_norm(w.span());
  return f;
}

}  // namespace adascale
