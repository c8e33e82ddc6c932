#include "readability/pipeline.hpp"

#include "readability/error.hpp"

namespace readability {
namespace {

std::vector<FeatureVector> features_of(std::span<const RatedSentence> sentences, const FrequencyLexicon& lexicon,
                                       const FeatureCatalog& catalog) {
  std::vector<FeatureVector> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(extract_features(s.text, lexicon, catalog));
  return out;
}

std::vector<double> labels_of(std::span<const RatedSentence> sentences) {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.mos);
  return out;
}

Mat embeddings_of(const EncoderProvider& provider, std::span<const RatedSentence> sentences) {
  Mat out(static_cast<Eigen::Index>(sentences.size()), static_cast<Eigen::Index>(embedding_dim(provider)));
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = embed(provider, sentences[i].id, sentences[i].text);
  }
  return out;
}

}  // namespace

TrainedModel train_member(std::span<const RatedSentence> train, std::span<const RatedSentence> early_stop,
                          const MemberOptions& options, const FrequencyLexicon& lexicon, const FeatureCatalog& catalog,
                          MemberReport* report) {
  if (train.empty() || early_stop.empty()) throw Error("member training needs non-empty train and early-stop sets");
  options.training.validate();

  std::vector<std::string> texts;
  texts.reserve(train.size());
  for (const auto& s : train) texts.push_back(s.text);
  Vocabulary vocab = Vocabulary::build(texts, options.vocab_max_size);

  MemberReport local;
  MemberReport& rep = report ? *report : local;
  TrainedModel model;
  model.family = options.family;
  model.catalog_version = catalog.version();

  switch (options.provider) {
    case ProviderKind::Transformer: {
      EncoderConfig config = options.encoder;
      const auto family_defaults = EncoderConfig::for_family(options.family, vocab.size());
      config.vocab_size = family_defaults.vocab_size;
      config.pooling = family_defaults.pooling;
      config.causal = family_defaults.causal;
      config.validate();
      auto tokenize_all = [&](std::span<const RatedSentence> sentences) {
        Phase1Data data;
        for (const auto& s : sentences) data.tokens.push_back(encode_for_family(options.family, s.text, vocab, config.max_len));
        data.labels = labels_of(sentences);
        return data;
      };
      const auto phase1 = train_phase1(tokenize_all(train), tokenize_all(early_stop), config, options.training);
      rep.phase1_ran = true;
      rep.phase1_best_rmse = phase1.best_rmse;
      rep.phase1_updates = phase1.updates;
      // The phase-1 regression head is discarded here.
      model.encoder = TransformerProvider{config, std::move(vocab), phase1.model.encoder};
      break;
    }
    case ProviderKind::RandomProjection:
      model.encoder = RandomProjectionProvider{std::move(vocab), options.family, options.encoder.max_len,
                                               Rng(options.training.seed).derive("projection").seed(),
                                               options.projection_dim};
      break;
    case ProviderKind::Precomputed:
      if (!options.precomputed) throw ConfigError("precomputed provider needs an embedding file");
      model.encoder = PrecomputedProvider{options.precomputed};
      break;
  }

  Phase2Data train_data{embeddings_of(model.encoder, train), features_of(train, lexicon, catalog), labels_of(train)};
  Phase2Data es_data{embeddings_of(model.encoder, early_stop), features_of(early_stop, lexicon, catalog),
                     labels_of(early_stop)};
  auto phase2 = train_phase2(train_data, es_data, options.training);
  rep.phase2_best_rmse = phase2.best_rmse;
  rep.phase2_epochs = phase2.epochs;
  model.mlp = std::move(phase2.mlp);
  model.scaler = std::move(phase2.scaler);
  model.validate();
  return model;
}

}  // namespace readability
