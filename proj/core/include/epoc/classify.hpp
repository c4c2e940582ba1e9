#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "epoc/features.hpp"

namespace epoc {

/// Per-feature z-score fitted on training data.
struct Standardizer {
  FeatureVector mean{0.0, 0.0};
  FeatureVector scale{1.0, 1.0};

  static Standardizer fit(std::span<const FeatureVector> features);
  FeatureVector apply(const FeatureVector& x) const;
};

enum class LinearKind { Svm, LogReg };

std::string_view to_string(LinearKind kind);

struct LinearModel {
  FeatureVector weights{0.0, 0.0};  // in standardized feature space
  double bias{0.0};
  LinearKind kind{LinearKind::Svm};
  Standardizer scaler;

  double decision(const FeatureVector& x) const;
  int predict(const FeatureVector& x) const { return decision(x) > 0.0 ? 1 : 0; }
};

struct LinearHyperparams {
  double l2{1e-3};
  std::size_t iterations{500};
  double initial_step{1.0};
};

struct LinearTraining {
  LinearModel model;
  std::vector<double> loss_history;  // objective after each accepted step, starting at init
};

/// Full-batch (sub)gradient descent from zero with backtracking step control:
/// a step is accepted only if it lowers the regularized objective, so the
/// history is strictly decreasing. SVM uses hinge loss, LogReg cross-entropy.
LinearTraining train_linear_detailed(const LabeledFeatureSet& data, LinearKind kind,
                                     const LinearHyperparams& hp = {});
LinearModel train_linear(const LabeledFeatureSet& data, LinearKind kind,
                         const LinearHyperparams& hp = {});

/// Plain-text `key=value` lines.
std::string serialize(const LinearModel& model);
LinearModel parse_linear_model(std::string_view text);

/// 2 -> 64 -> 32 -> 1, tanh hidden layers, sigmoid output.
struct MlpModel {
  static constexpr std::size_t kInputs = 2;
  static constexpr std::size_t kHidden1 = 64;
  static constexpr std::size_t kHidden2 = 32;
  static constexpr std::size_t kParamCount =
      kHidden1 * kInputs + kHidden1 + kHidden2 * kHidden1 + kHidden2 + kHidden2 + 1;

  Standardizer scaler;
  /// Flat layout: W1 (64x2 row-major), b1, W2 (32x64), b2, W3 (32), b3.
  std::vector<double> params = std::vector<double>(kParamCount, 0.0);
  double final_loss{0.0};

  /// Probability of class 1.
  double probability(const FeatureVector& x) const;
  int predict(const FeatureVector& x) const { return probability(x) > 0.5 ? 1 : 0; }
};

struct MlpHyperparams {
  std::size_t epochs{100};
  double learning_rate{0.05};
  std::size_t batch_size{32};
  std::uint64_t seed{0};
};

/// Xavier-uniform weights, zero biases; scaler left at identity.
MlpModel mlp_initialize(std::uint64_t seed);

struct LossAndGradient {
  double loss{0.0};
  std::vector<double> gradient;
};

/// Mean binary cross-entropy over already-standardized inputs and its
/// gradient with respect to `params` (same flat layout).
LossAndGradient mlp_loss_and_gradient(std::span<const double> params,
                                      std::span<const FeatureVector> inputs,
                                      std::span<const int> labels);

/// Mini-batch gradient descent on cross-entropy. Deterministic given the seed.
/// Throws std::runtime_error when the loss becomes non-finite.
MlpModel train_mlp(const LabeledFeatureSet& data, const MlpHyperparams& hp);
MlpModel train_mlp(const LabeledFeatureSet& data, std::size_t epochs, double learning_rate,
                   std::uint64_t seed);

using Predictor = std::function<int(const FeatureVector&)>;
using Trainer = std::function<Predictor(const LabeledFeatureSet&)>;

Trainer linear_trainer(LinearKind kind, LinearHyperparams hp = {});
Trainer mlp_trainer(MlpHyperparams hp = {});

struct Holdout {
  double fraction{0.2};  // 0 means train and test on all data
};
struct KFold {
  std::size_t k{5};
};
using Split = std::variant<Holdout, KFold>;

struct Confusion {
  std::size_t true_pos{0}, true_neg{0}, false_pos{0}, false_neg{0};
  std::size_t total() const { return true_pos + true_neg + false_pos + false_neg; }
};

struct Evaluation {
  double accuracy{0.0};
  Confusion confusion;
};

/// Scores a fixed predictor on `data`.
Evaluation score(const Predictor& predict, const LabeledFeatureSet& data);

/// Stratified split, shuffled per class with `seed`; accuracy is pooled over
/// every held-out sample. Throws std::invalid_argument for a fold count
/// larger than the smallest class.
Evaluation evaluate(const Trainer& train, const LabeledFeatureSet& data, const Split& split,
                    std::uint64_t seed);

/// Throws std::invalid_argument unless both labels 0 and 1 are present.
void require_two_classes(const LabeledFeatureSet& data);

}  // namespace epoc
