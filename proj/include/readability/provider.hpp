#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>

#include "readability/encoder.hpp"
#include "readability/precomputed.hpp"
#include "readability/tokenizer.hpp"

namespace readability {

enum class ProviderKind { Transformer, RandomProjection, Precomputed };

std::string to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view text);

/// Family A sentences get BERT-style tokens, family B GPT-style tokens.
TokenSequence encode_for_family(ModelFamily family, std::string_view text, const Vocabulary& vocab,
                                std::size_t max_len);

struct TransformerProvider {
  EncoderConfig config;
  Vocabulary vocab;
  EncoderWeights weights;
};

struct RandomProjectionProvider {
  Vocabulary vocab;
  ModelFamily family = ModelFamily::A;
  std::size_t max_len = 128;
  std::uint64_t seed = 0;
  std::size_t dim = 64;
};

struct PrecomputedProvider {
  std::shared_ptr<const PrecomputedEmbeddings> table;
};

using EncoderProvider = std::variant<TransformerProvider, RandomProjectionProvider, PrecomputedProvider>;

ProviderKind provider_kind(const EncoderProvider& provider);
std::size_t embedding_dim(const EncoderProvider& provider);

/// Sentence embedding; the id is only consulted by the precomputed provider.
RowVec embed(const EncoderProvider& provider, std::string_view id, std::string_view text);

}  // namespace readability
