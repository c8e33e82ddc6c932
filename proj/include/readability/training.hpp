#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "readability/encoder.hpp"
#include "readability/features.hpp"
#include "readability/mlp.hpp"
#include "readability/optim.hpp"
#include "readability/provider.hpp"

namespace readability {

struct TrainingConfig {
  std::size_t batch_size = 16;
  double phase1_lr = 5e-5;
  double phase2_lr = 1e-3;
  double warmup_fraction = 0.3;
  int phase1_max_epochs = 100;
  int phase1_patience = 5;
  std::int64_t phase1_grace = 300;
  int phase2_max_epochs = 5000;
  int phase2_patience = 100;
  /// Updates between phase-1 evaluations; 0 means ceil(steps_per_epoch / 2).
  std::int64_t eval_every = 0;
  std::size_t mlp_hidden = 128;
  double init_std = 0.02;
  AdamWOptions adamw;
  RmsPropOptions rmsprop;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ceil(n / batch): the last partial batch is trained on.
std::int64_t steps_per_epoch(std::size_t n, std::size_t batch_size);
/// About every half epoch.
std::int64_t default_eval_every(std::size_t n, std::size_t batch_size);

/// Linear head used during phase 1 only.
struct RegressionHead {
  Mat w;  // d x 1
  Mat b;  // 1 x 1

  template <typename F>
  void for_each_tensor(F&& f) {
    f("head.b", b);
    f("head.w", w);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    f("head.b", b);
    f("head.w", w);
  }
};

struct Phase1Model {
  EncoderWeights encoder;
  RegressionHead head;

  static Phase1Model zeros(const EncoderConfig& config);

  template <typename F>
  void for_each_tensor(F&& f) {
    encoder.for_each_tensor(f);
    head.for_each_tensor(f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    encoder.for_each_tensor(f);
    head.for_each_tensor(f);
  }
};

struct Phase1Data {
  std::vector<TokenSequence> tokens;
  std::vector<double> labels;
};

/// Phase-1 scores (encoder + linear head) for each sequence.
std::vector<double> phase1_predict(const Phase1Model& model, const EncoderConfig& config,
                                   std::span<const TokenSequence> tokens);

/// MSE over the batch; accumulates its gradient into grads.
double phase1_loss_and_grad(const Phase1Model& model, const EncoderConfig& config,
                            std::span<const TokenSequence> tokens, std::span<const double> labels, Phase1Model& grads);

struct Phase1Result {
  Phase1Model model;  // best evaluation
  double best_rmse = 0.0;
  std::int64_t updates = 0;
  int evaluations = 0;
  bool stopped_early = false;
};

/// End-to-end fine-tuning of encoder + linear head with AdamW, linear
/// warmup and early stopping on the early-stop set.
Phase1Result train_phase1(const Phase1Data& train, const Phase1Data& early_stop, const EncoderConfig& config,
                          const TrainingConfig& training);

struct Phase2Data {
  Mat embeddings;                      // n x embedding dim
  std::vector<FeatureVector> features;  // unscaled
  std::vector<double> labels;
};

/// Concatenation of embeddings and scaled features, one row per sentence.
Mat phase2_inputs(const Mat& embeddings, std::span<const FeatureVector> features, const FeatureScaler& scaler);

struct Phase2Result {
  MlpWeights mlp;  // best epoch
  FeatureScaler scaler;
  double best_rmse = 0.0;
  int epochs = 0;
  bool stopped_early = false;
};

/// MLP on frozen embeddings + readability features with RMSprop at a
/// constant rate, evaluated once per epoch. The scaler is fitted on the
/// training rows only.
Phase2Result train_phase2(const Phase2Data& train, const Phase2Data& early_stop, const TrainingConfig& training);

/// Everything needed to score a sentence.
struct TrainedModel {
  ModelFamily family = ModelFamily::A;
  EncoderProvider encoder;
  MlpWeights mlp;
  FeatureScaler scaler;
  std::string catalog_version;

  /// Throws unless embedding dim + feature dim equals the MLP input dim.
  void validate() const;
};

/// Raw (unclamped) score of one sentence.
double predict(const TrainedModel& model, std::string_view id, std::string_view text, const FrequencyLexicon& lexicon,
               const FeatureCatalog& catalog);

}  // namespace readability
