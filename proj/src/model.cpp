#include "fedscore/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fedscore/kernels.hpp"
#include "fedscore/random.hpp"

namespace fedscore {

ModelParams::ModelParams(std::vector<double> values) : values_(std::move(values)) {
  if (!all_finite()) throw std::domain_error("model parameters contain non-finite entries");
}

namespace {

void require_same_dim(const ModelParams& a, const ModelParams& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("model dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
}

void require_finite(double x) {
  if (!std::isfinite(x)) throw std::domain_error("model arithmetic produced a non-finite entry");
}

}  // namespace

ModelParams& ModelParams::operator+=(const ModelParams& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) require_finite(values_[i] += other.values_[i]);
  return *this;
}

ModelParams& ModelParams::operator-=(const ModelParams& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) require_finite(values_[i] -= other.values_[i]);
  return *this;
}

ModelParams& ModelParams::operator*=(double factor) {
  for (auto& v : values_) require_finite(v *= factor);
  return *this;
}

ModelParams& ModelParams::add_scaled(const ModelParams& other, double factor) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) require_finite(values_[i] += factor * other.values_[i]);
  return *this;
}

double ModelParams::dot(const ModelParams& other) const {
  require_same_dim(*this, other);
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * other.values_[i];
  return acc;
}

double ModelParams::norm() const { return std::sqrt(dot(*this)); }

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t MlpShape::b1_offset() const {
  return static_cast<std::size_t>(hidden) * static_cast<std::size_t>(input_dim);
}
std::size_t MlpShape::w2_offset() const { return b1_offset() + static_cast<std::size_t>(hidden); }
std::size_t MlpShape::b2_offset() const {
  return w2_offset() + static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(hidden);
}
std::size_t MlpShape::param_count() const { return b2_offset() + static_cast<std::size_t>(n_classes); }

ModelParams init_mlp(const MlpShape& shape, std::uint64_t seed) {
  if (shape.input_dim < 1 || shape.hidden < 1 || shape.n_classes < 2) throw std::invalid_argument("bad MLP shape");
  ModelParams p(shape.param_count());
  Rng rng(seed);
  const double a1 = std::sqrt(6.0 / (shape.input_dim + shape.hidden));
  const double a2 = std::sqrt(6.0 / (shape.hidden + shape.n_classes));
  std::uniform_real_distribution<double> u1(-a1, a1);
  std::uniform_real_distribution<double> u2(-a2, a2);
  for (std::size_t i = shape.w1_offset(); i < shape.b1_offset(); ++i) p[i] = u1(rng);
  for (std::size_t i = shape.w2_offset(); i < shape.b2_offset(); ++i) p[i] = u2(rng);
  return p;
}

void mlp_logits(const MlpShape& shape, std::span<const double> params, std::span<const double> x,
                std::span<double> hidden, std::span<double> logits) {
  const auto d = static_cast<std::size_t>(shape.input_dim);
  const auto h = static_cast<std::size_t>(shape.hidden);
  const auto k = static_cast<std::size_t>(shape.n_classes);
  const double* w1 = params.data() + shape.w1_offset();
  const double* b1 = params.data() + shape.b1_offset();
  const double* w2 = params.data() + shape.w2_offset();
  const double* b2 = params.data() + shape.b2_offset();
  for (std::size_t j = 0; j < h; ++j) {
    double a = b1[j];
    const double* row = w1 + j * d;
    for (std::size_t q = 0; q < d; ++q) a += row[q] * x[q];
    hidden[j] = std::tanh(a);
  }
  for (std::size_t c = 0; c < k; ++c) {
    double z = b2[c];
    const double* row = w2 + c * h;
    for (std::size_t j = 0; j < h; ++j) z += row[j] * hidden[j];
    logits[c] = z;
  }
}

namespace {

// log Σ exp(z), shifted by the max for stability.
double log_sum_exp(std::span<const double> z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - zmax);
  return zmax + std::log(s);
}

constexpr std::size_t kMaxStack = 64;

}  // namespace

double sample_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> x, int label,
                   bool* correct) {
  double hidden_buf[kMaxStack];
  double logit_buf[kMaxStack];
  std::vector<double> hidden_heap, logit_heap;
  std::span<double> hidden(hidden_buf, static_cast<std::size_t>(shape.hidden));
  std::span<double> logits(logit_buf, static_cast<std::size_t>(shape.n_classes));
  if (static_cast<std::size_t>(shape.hidden) > kMaxStack) {
    hidden_heap.resize(static_cast<std::size_t>(shape.hidden));
    hidden = hidden_heap;
  }
  if (static_cast<std::size_t>(shape.n_classes) > kMaxStack) {
    logit_heap.resize(static_cast<std::size_t>(shape.n_classes));
    logits = logit_heap;
  }
  mlp_logits(shape, params, x, hidden, logits);
  if (correct) {
    const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
    *correct = best == label;
  }
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

double loss_and_gradient(const MlpShape& shape, std::span<const double> params, const LabeledDataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (grad.size() != shape.param_count() || params.size() != shape.param_count())
    throw std::invalid_argument("parameter/gradient size does not match MLP shape");
  const auto d = static_cast<std::size_t>(shape.input_dim);
  const auto h = static_cast<std::size_t>(shape.hidden);
  const auto k = static_cast<std::size_t>(shape.n_classes);
  std::fill(grad.begin(), grad.end(), 0.0);
  double* gw1 = grad.data() + shape.w1_offset();
  double* gb1 = grad.data() + shape.b1_offset();
  double* gw2 = grad.data() + shape.w2_offset();
  double* gb2 = grad.data() + shape.b2_offset();
  const double* w2 = params.data() + shape.w2_offset();

  std::vector<double> hidden(h), logits(k), dz(k), da(h);
  double total = 0.0;
  for (std::size_t idx : batch) {
    const auto x = data.row(idx);
    const auto label = static_cast<std::size_t>(data.labels[idx]);
    mlp_logits(shape, params, x, hidden, logits);
    const double lse = log_sum_exp(logits);
    total += lse - logits[label];
    for (std::size_t c = 0; c < k; ++c) dz[c] = std::exp(logits[c] - lse) - (c == label ? 1.0 : 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      gb2[c] += dz[c];
      double* row = gw2 + c * h;
      for (std::size_t j = 0; j < h; ++j) row[j] += dz[c] * hidden[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      double back = 0.0;
      for (std::size_t c = 0; c < k; ++c) back += w2[c * h + j] * dz[c];
      da[j] = back * (1.0 - hidden[j] * hidden[j]);
    }
    for (std::size_t j = 0; j < h; ++j) {
      gb1[j] += da[j];
      double* row = gw1 + j * d;
      for (std::size_t q = 0; q < d; ++q) row[q] += da[j] * x[q];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= inv;
  return total * inv;
}

Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data) {
  if (params.dim() != shape.param_count()) throw std::invalid_argument("parameter count does not match MLP shape");
  return kernels::parallel::evaluate_mlp(shape, params, data);
}

const char* utility_label(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kAccuracy:
      return "accuracy";
    case UtilityKind::kLossGain:
      return "loss_gain";
    default:
      return "neg_loss";
  }
}

UtilityKind parse_utility(std::string_view label) {
  if (label == "neg_loss") return UtilityKind::kNegLoss;
  if (label == "accuracy") return UtilityKind::kAccuracy;
  if (label == "loss_gain") return UtilityKind::kLossGain;
  throw std::invalid_argument("unknown utility '" + std::string(label) + "' (expected neg_loss, loss_gain or accuracy)");
}

double utility(const Evaluation& e, UtilityKind kind, int n_classes) {
  switch (kind) {
    case UtilityKind::kAccuracy:
      return e.accuracy;
    case UtilityKind::kLossGain:
      return std::log(static_cast<double>(n_classes)) - e.mean_loss;
    default:
      return -e.mean_loss;
  }
}

}  // namespace fedscore
