#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "readability/corpus.hpp"
#include "readability/features.hpp"
#include "readability/precomputed.hpp"
#include "readability/provider.hpp"
#include "readability/training.hpp"

namespace readability {

struct MemberOptions {
  ModelFamily family = ModelFamily::A;
  ProviderKind provider = ProviderKind::Transformer;
  /// Sizes only; vocab_size, pooling and the causal flag follow from the
  /// vocabulary and the family.
  EncoderConfig encoder;
  std::size_t vocab_max_size = 8000;
  std::size_t projection_dim = 64;
  std::shared_ptr<const PrecomputedEmbeddings> precomputed;
  /// training.seed is the member seed.
  TrainingConfig training;
};

struct MemberReport {
  bool phase1_ran = false;
  double phase1_best_rmse = 0.0;
  std::int64_t phase1_updates = 0;
  double phase2_best_rmse = 0.0;
  int phase2_epochs = 0;
};

/// Both training phases for one ensemble member. Phase 1 only runs for the
/// transformer provider; the other providers have fixed embeddings.
TrainedModel train_member(std::span<const RatedSentence> train, std::span<const RatedSentence> early_stop,
                          const MemberOptions& options, const FrequencyLexicon& lexicon, const FeatureCatalog& catalog,
                          MemberReport* report = nullptr);

}  // namespace readability
