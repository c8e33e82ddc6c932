#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace readability {

inline constexpr double kMinMos = 1.0;
inline constexpr double kMaxMos = 7.0;

/// One labelled sentence. mos is the complexity Mean Opinion Score on the
/// 1..7 scale.
struct RatedSentence {
  std::string id;
  std::string text;
  double mos = 0.0;

  friend bool operator==(const RatedSentence&, const RatedSentence&) = default;
};

/// Unlabelled sentence, as accepted by prediction.
struct Sentence {
  std::string id;
  std::string text;
};

/// Strips one leading and one trailing double quote when both are present.
std::string clean_sentence(std::string_view raw);

/// Reads `id,sentence,mos` CSV. Throws FormatError naming the line of a
/// malformed row or the id of an out-of-range score.
std::vector<RatedSentence> read_corpus(std::istream& in);
std::vector<RatedSentence> load_corpus(const std::filesystem::path& path);

/// Accepts `id,sentence` or `id,sentence,mos`; the score column is ignored.
std::vector<Sentence> read_sentences(std::istream& in);
std::vector<Sentence> load_sentences(const std::filesystem::path& path);

/// Inverse of read_corpus: read_corpus(write_corpus(x)) == x.
void write_corpus(std::ostream& out, std::span<const RatedSentence> corpus);
void save_corpus(const std::filesystem::path& path, std::span<const RatedSentence> corpus);

struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> early_stop_ids;
  std::vector<std::string> validation_ids;

  friend bool operator==(const FoldSplit&, const FoldSplit&) = default;
};

struct FinalSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> early_stop_ids;

  friend bool operator==(const FinalSplit&, const FinalSplit&) = default;
};

/// k-fold cross validation with an early-stopping carve inside each
/// training part. Ids inside every set keep corpus order.
std::vector<FoldSplit> make_cv_splits(std::span<const RatedSentence> corpus, int k,
                                      double es_fraction, std::uint64_t seed);

FinalSplit carve_final_split(std::span<const RatedSentence> corpus, double es_fraction = 0.075,
                             std::uint64_t seed = 0);

/// Splits an arbitrary id pool into (train, early_stop). Used for the final
/// split and for per-member re-carving inside a fold.
FinalSplit carve_early_stop(std::span<const std::string> ids, double es_fraction,
                            std::uint64_t seed);

nlohmann::ordered_json split_manifest(const FoldSplit& split, std::uint64_t seed);
FoldSplit parse_split_manifest(const nlohmann::json& manifest);

}  // namespace readability
