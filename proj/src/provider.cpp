#include "readability/provider.hpp"

#include "readability/error.hpp"

namespace readability {

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::Transformer:
      return "transformer";
    case ProviderKind::RandomProjection:
      return "random-projection";
    case ProviderKind::Precomputed:
      return "precomputed";
  }
  return "unknown";
}

ProviderKind parse_provider_kind(std::string_view text) {
  if (text == "transformer") return ProviderKind::Transformer;
  if (text == "random-projection") return ProviderKind::RandomProjection;
  if (text == "precomputed") return ProviderKind::Precomputed;
  throw ConfigError("unknown encoder provider '" + std::string(text) +
                    "' (expected transformer, random-projection or precomputed)");
}

TokenSequence encode_for_family(ModelFamily family, std::string_view text, const Vocabulary& vocab,
                                std::size_t max_len) {
  return family == ModelFamily::A ? encode_bert_style(text, vocab, max_len) : encode_gpt_style(text, vocab, max_len);
}

ProviderKind provider_kind(const EncoderProvider& provider) {
  return static_cast<ProviderKind>(provider.index());
}

std::size_t embedding_dim(const EncoderProvider& provider) {
  struct {
    std::size_t operator()(const TransformerProvider& p) const { return p.config.model_dim; }
    std::size_t operator()(const RandomProjectionProvider& p) const { return p.dim; }
    std::size_t operator()(const PrecomputedProvider& p) const {
      if (!p.table) throw Error("precomputed provider has no embedding table");
      return p.table->dim();
    }
  } visitor;
  return std::visit(visitor, provider);
}

RowVec embed(const EncoderProvider& provider, std::string_view id, std::string_view text) {
  struct {
    std::string_view id, text;
    RowVec operator()(const TransformerProvider& p) const {
      const auto tokens = encode_for_family(p.config.family(), text, p.vocab, p.config.max_len);
      return encoder_forward(tokens, p.weights, p.config);
    }
    RowVec operator()(const RandomProjectionProvider& p) const {
      const auto tokens = encode_for_family(p.family, text, p.vocab, p.max_len);
      return random_projection_encode(tokens, p.seed, p.dim);
    }
    RowVec operator()(const PrecomputedProvider& p) const {
      if (!p.table) throw Error("precomputed provider has no embedding table");
      const auto& v = p.table->at(id);
      return Eigen::Map<const RowVec>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
  } visitor{id, text};
  return std::visit(visitor, provider);
}

}  // namespace readability
