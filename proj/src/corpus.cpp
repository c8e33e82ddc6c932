#include "readability/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "readability/csv.hpp"
#include "readability/error.hpp"
#include "readability/rng.hpp"

namespace readability {
namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::string line_prefix(const csv::Record& r) { return "line " + std::to_string(r.line) + ": "; }

void check_header(const std::vector<csv::Record>& records, bool mos_required) {
  if (records.empty()) throw FormatError("line 1: missing header row");
  const auto& h = records.front().fields;
  const bool with_mos = h == std::vector<std::string>{"id", "sentence", "mos"};
  const bool without_mos = h == std::vector<std::string>{"id", "sentence"};
  if (!(with_mos || (!mos_required && without_mos))) {
    throw FormatError(line_prefix(records.front()) + "header must be 'id,sentence,mos'");
  }
}

// Positions of the ids in shuffled order, each split back into corpus order.
std::vector<std::string> in_corpus_order(std::vector<std::size_t> positions,
                                         std::span<const std::string> ids) {
  std::sort(positions.begin(), positions.end());
  std::vector<std::string> out;
  out.reserve(positions.size());
  for (auto p : positions) out.push_back(ids[p]);
  return out;
}

std::size_t early_stop_count(std::size_t pool, double es_fraction) {
  auto n = static_cast<std::size_t>(std::llround(es_fraction * static_cast<double>(pool)));
  n = std::max<std::size_t>(n, 1);
  if (pool >= 2) n = std::min(n, pool - 1);
  return n;
}

void check_fraction(double es_fraction) {
  if (!(es_fraction > 0.0 && es_fraction < 1.0)) {
    throw ConfigError("early-stop fraction must lie in (0, 1), got " + csv::format_double(es_fraction));
  }
}

std::vector<std::string> ids_of(std::span<const RatedSentence> corpus) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& s : corpus) ids.push_back(s.id);
  return ids;
}

}  // namespace

std::string clean_sentence(std::string_view raw) {
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    raw.remove_prefix(1);
    raw.remove_suffix(1);
  }
  return std::string(raw);
}

std::vector<RatedSentence> read_corpus(std::istream& in) {
  const auto records = csv::read(in);
  check_header(records, true);
  std::vector<RatedSentence> corpus;
  corpus.reserve(records.size() - 1);
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 3) {
      throw FormatError(line_prefix(rec) + "expected 3 fields, found " + std::to_string(rec.fields.size()));
    }
    RatedSentence s;
    s.id = rec.fields[0];
    if (s.id.empty()) throw FormatError(line_prefix(rec) + "empty id");
    s.text = clean_sentence(rec.fields[1]);
    if (s.text.empty()) throw FormatError(line_prefix(rec) + "sentence '" + s.id + "' is empty");
    try {
      s.mos = csv::parse_double(rec.fields[2], "mos");
    } catch (const FormatError& e) {
      throw FormatError(line_prefix(rec) + e.what());
    }
    if (s.mos < kMinMos || s.mos > kMaxMos) {
      throw FormatError("sentence '" + s.id + "': mos " + rec.fields[2] + " outside [1, 7]");
    }
    if (!seen.insert(s.id).second) throw FormatError(line_prefix(rec) + "duplicate id '" + s.id + "'");
    corpus.push_back(std::move(s));
  }
  return corpus;
}

std::vector<RatedSentence> load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

std::vector<Sentence> read_sentences(std::istream& in) {
  const auto records = csv::read(in);
  check_header(records, false);
  const std::size_t width = records.front().fields.size();
  std::vector<Sentence> out;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      throw FormatError(line_prefix(rec) + "expected " + std::to_string(width) + " fields, found " +
                        std::to_string(rec.fields.size()));
    }
    Sentence s{rec.fields[0], clean_sentence(rec.fields[1])};
    if (s.id.empty()) throw FormatError(line_prefix(rec) + "empty id");
    if (s.text.empty()) throw FormatError(line_prefix(rec) + "sentence '" + s.id + "' is empty");
    if (!seen.insert(s.id).second) throw FormatError(line_prefix(rec) + "duplicate id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sentence> load_sentences(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sentences(in);
}

void write_corpus(std::ostream& out, std::span<const RatedSentence> corpus) {
  csv::write_row(out, {"id", "sentence", "mos"});
  for (const auto& s : corpus) {
    // A text that itself starts and ends with a quote gets one extra pair,
    // which clean_sentence removes again on reading.
    std::string text = s.text;
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = '"' + text + '"';
    csv::write_row(out, {s.id, text, csv::format_double(s.mos)});
  }
}

void save_corpus(const std::filesystem::path& path, std::span<const RatedSentence> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_corpus(out, corpus);
}

FinalSplit carve_early_stop(std::span<const std::string> ids, double es_fraction, std::uint64_t seed) {
  check_fraction(es_fraction);
  if (ids.empty()) throw ConfigError("cannot carve an early-stop set from an empty corpus");
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng(seed).derive("early-stop").shuffle(order);
  const std::size_t n_es = early_stop_count(ids.size(), es_fraction);
  FinalSplit split;
  split.early_stop_ids = in_corpus_order({order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_es)}, ids);
  split.train_ids = in_corpus_order({order.begin() + static_cast<std::ptrdiff_t>(n_es), order.end()}, ids);
  return split;
}

FinalSplit carve_final_split(std::span<const RatedSentence> corpus, double es_fraction, std::uint64_t seed) {
  const auto ids = ids_of(corpus);
  return carve_early_stop(ids, es_fraction, seed);
}

std::vector<FoldSplit> make_cv_splits(std::span<const RatedSentence> corpus, int k, double es_fraction,
                                      std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be at least 2, got " + std::to_string(k));
  check_fraction(es_fraction);
  const std::size_t n = corpus.size();
  if (static_cast<std::size_t>(k) > n) {
    throw ConfigError("k = " + std::to_string(k) + " exceeds corpus size " + std::to_string(n));
  }
  const auto ids = ids_of(corpus);
  const Rng root(seed);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  root.derive("cv-shuffle").shuffle(order);

  const auto folds = static_cast<std::size_t>(k);
  std::vector<FoldSplit> splits;
  std::size_t begin = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    // The first n % k folds take one extra sentence.
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    const std::size_t end = begin + size;
    std::vector<std::size_t> validation(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                        order.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<std::size_t> rest;
    rest.reserve(n - size);
    rest.insert(rest.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(begin));
    rest.insert(rest.end(), order.begin() + static_cast<std::ptrdiff_t>(end), order.end());

    root.derive("cv-early-stop").derive(f).shuffle(rest);
    const std::size_t n_es = early_stop_count(rest.size(), es_fraction);

    FoldSplit split;
    split.fold_index = static_cast<int>(f);
    split.validation_ids = in_corpus_order(std::move(validation), ids);
    split.early_stop_ids = in_corpus_order({rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_es)}, ids);
    split.train_ids = in_corpus_order({rest.begin() + static_cast<std::ptrdiff_t>(n_es), rest.end()}, ids);
    splits.push_back(std::move(split));
    begin = end;
  }
  return splits;
}

nlohmann::ordered_json split_manifest(const FoldSplit& split, std::uint64_t seed) {
  return nlohmann::ordered_json{{"fold", split.fold_index},
                        {"train", split.train_ids},
                        {"early_stop", split.early_stop_ids},
                        {"validation", split.validation_ids},
                        {"seed", seed}};
}

FoldSplit parse_split_manifest(const nlohmann::json& manifest) {
  try {
    FoldSplit split;
    split.fold_index = manifest.at("fold").get<int>();
    split.train_ids = manifest.at("train").get<std::vector<std::string>>();
    split.early_stop_ids = manifest.at("early_stop").get<std::vector<std::string>>();
    split.validation_ids = manifest.at("validation").get<std::vector<std::string>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("split manifest: ") + e.what());
  }
}

}  // namespace readability
