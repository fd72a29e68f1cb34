#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedscore/data.hpp"

namespace fedscore {

/// Flat parameter vector. Arithmetic requires equal dimensions and throws
/// std::domain_error if a result entry is not finite.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(std::size_t dim) : values_(dim, 0.0) {}
  explicit ModelParams(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  ModelParams& operator+=(const ModelParams& other);
  ModelParams& operator-=(const ModelParams& other);
  ModelParams& operator*=(double factor);
  /// this += factor * other
  ModelParams& add_scaled(const ModelParams& other, double factor);

  friend ModelParams operator+(ModelParams a, const ModelParams& b) { return a += b; }
  friend ModelParams operator-(ModelParams a, const ModelParams& b) { return a -= b; }
  friend ModelParams operator*(ModelParams a, double f) { return a *= f; }

  double dot(const ModelParams& other) const;
  double norm() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<double> values_;
};

/// Two-layer perceptron input_dim -> hidden (tanh) -> n_classes (softmax).
/// Parameter layout: W1 [hidden x input], b1 [hidden], W2 [classes x hidden], b2 [classes].
struct MlpShape {
  int input_dim = 0;
  int hidden = 32;
  int n_classes = 0;

  std::size_t param_count() const;
  std::size_t w1_offset() const { return 0; }
  std::size_t b1_offset() const;
  std::size_t w2_offset() const;
  std::size_t b2_offset() const;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

/// Glorot-uniform weights, zero biases.
ModelParams init_mlp(const MlpShape& shape, std::uint64_t seed);

/// Writes the class logits for one input. `hidden` receives the tanh
/// activations and must hold shape.hidden entries.
void mlp_logits(const MlpShape& shape, std::span<const double> params, std::span<const double> x,
                std::span<double> hidden, std::span<double> logits);

/// Cross-entropy of one sample; `correct` is set when argmax (lowest index on
/// ties) equals the label.
double sample_loss(const MlpShape& shape, std::span<const double> params, std::span<const double> x, int label,
                   bool* correct = nullptr);

/// Mean cross-entropy over data[batch] and its gradient (written to grad,
/// which is overwritten).
double loss_and_gradient(const MlpShape& shape, std::span<const double> params, const LabeledDataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad);

struct Evaluation {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

/// Parallel over samples; bit-identical to kernels::serial::evaluate_mlp.
Evaluation evaluate_mlp(const MlpShape& shape, const ModelParams& params, const LabeledDataset& data);

// kLossGain is ln(n_classes) - loss: the negative loss shifted so a uniform
// predictor scores 0. Marginals match kNegLoss; v(M) stays positive once the
// model beats chance, which keeps efficiency rescaling sign-stable.
enum class UtilityKind { kNegLoss, kAccuracy, kLossGain };

const char* utility_label(UtilityKind kind);
UtilityKind parse_utility(std::string_view label);

double utility(const Evaluation& e, UtilityKind kind, int n_classes);

}  // namespace fedscore
