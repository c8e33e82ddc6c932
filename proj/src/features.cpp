#include "readability/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_set>

#include "readability/csv.hpp"
#include "readability/error.hpp"
#include "readability/rng.hpp"
#include "readability/tokenizer.hpp"

namespace readability {
namespace {

// Bump whenever an extraction rule changes.
constexpr int kRuleRevision = 1;

// Words whose log10 frequency is below this count as rare.
constexpr double kRareLogFrequency = 0.0;

constexpr std::array<std::size_t, 4> kLongWordThresholds = {6, 8, 10, 13};

const std::vector<FeatureDescriptor>& builtin_features() {
  static const std::vector<FeatureDescriptor> table = {
      {"token_count", "number of word tokens"},
      {"char_count", "code points in the sentence"},
      {"mean_word_length", "mean code points per word"},
      {"max_word_length", "longest word in code points"},
      {"std_word_length", "population std of word length"},
      {"words_gt6_count", "words longer than 6 characters"},
      {"words_gt6_ratio", "share of words longer than 6 characters"},
      {"words_gt8_count", "words longer than 8 characters"},
      {"words_gt8_ratio", "share of words longer than 8 characters"},
      {"words_gt10_count", "words longer than 10 characters"},
      {"words_gt10_ratio", "share of words longer than 10 characters"},
      {"words_gt13_count", "words longer than 13 characters"},
      {"words_gt13_ratio", "share of words longer than 13 characters"},
      {"punctuation_count", "punctuation characters"},
      {"comma_count", "commas"},
      {"digit_count", "decimal digits"},
      {"type_token_ratio", "distinct lowercased words / words"},
      {"mean_log_frequency", "mean log10 lexicon frequency of words"},
      {"min_log_frequency", "minimum log10 lexicon frequency of words"},
      {"oov_count", "words missing from the lexicon"},
      {"oov_ratio", "share of words missing from the lexicon"},
      {"rare_word_count", "words with log10 frequency below 0"},
      {"rare_word_ratio", "share of words with log10 frequency below 0"},
      {"mean_syllables", "mean vowel groups per word"},
      {"max_syllables", "maximum vowel groups in a word"},
      {"polysyllabic_count", "words with at least 3 vowel groups"},
      {"monosyllabic_ratio", "share of words with one vowel group"},
      {"uppercase_initial_ratio", "share of words starting with an uppercase letter"},
      {"subordinator_count", "subordinating conjunctions and relative pronouns"},
      {"flesch_amstad", "180 - words - 58.5 * mean syllables"},
      {"wiener_sachtextformel", "first Wiener Sachtextformel"},
  };
  return table;
}

const std::unordered_set<std::string>& subordinators() {
  static const std::unordered_set<std::string> words = {
      "als",    "bevor",  "bis",     "da",      "damit",   "dass",      "daß",     "ehe",
      "falls",  "indem",  "nachdem", "ob",      "obgleich", "obwohl",   "seit",    "seitdem",
      "sobald", "sofern", "solange", "sodass",  "während", "weil",      "wenn",    "wohingegen",
      "welche", "welcher", "welches", "welchen", "welchem", "wodurch",  "worauf",  "wobei",
  };
  return words;
}

bool is_vowel(char32_t cp) {
  switch (cp) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
    case U'ä': case U'ö': case U'ü': case U'é': case U'è': case U'à':
      return true;
    default:
      return false;
  }
}

std::size_t syllables(std::string_view lowered) {
  std::size_t groups = 0;
  bool in_group = false;
  for (std::size_t pos = 0; pos < lowered.size();) {
    const bool v = is_vowel(text::next_code_point(lowered, pos));
    if (v && !in_group) ++groups;
    in_group = v;
  }
  return std::max<std::size_t>(groups, 1);
}

double ratio(double count, double total) { return total > 0.0 ? count / total : 0.0; }

std::string catalog_version_for(const std::vector<FeatureDescriptor>& descriptors) {
  std::string joined;
  for (const auto& d : descriptors) {
    joined += d.name;
    joined += ',';
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
  return "rf" + std::to_string(kRuleRevision) + "-" + std::to_string(descriptors.size()) + "-" + buf;
}

// Every built-in feature, in builtin_features() order.
std::vector<double> compute_all(std::string_view sentence, const FrequencyLexicon& lexicon) {
  std::vector<std::string> words;
  double punct = 0, commas = 0, digits = 0;
  for (auto& tok : tokenize(sentence)) {
    std::size_t pos = 0;
    const char32_t first = text::next_code_point(tok, pos);
    if (text::classify(first) == text::CharClass::Punct) {
      punct += 1;
      if (first == ',') commas += 1;
    } else {
      words.push_back(std::move(tok));
    }
  }
  for (char c : sentence) {
    if (c >= '0' && c <= '9') digits += 1;
  }

  const double n = static_cast<double>(words.size());
  std::vector<double> lengths;
  std::array<double, kLongWordThresholds.size()> long_words{};
  std::set<std::string> types;
  double log_freq_sum = 0, min_log_freq = 0, oov = 0, rare = 0;
  double syllable_sum = 0, max_syl = 0, poly = 0, mono = 0, upper = 0, subord = 0;
  bool first_word = true;
  for (const auto& w : words) {
    const auto len = text::code_point_count(w);
    lengths.push_back(static_cast<double>(len));
    for (std::size_t t = 0; t < kLongWordThresholds.size(); ++t) {
      if (len > kLongWordThresholds[t]) long_words[t] += 1;
    }
    const auto lowered = text::to_lower(w);
    types.insert(lowered);
    const double lf = std::log10(lexicon.lookup(lowered));
    log_freq_sum += lf;
    min_log_freq = first_word ? lf : std::min(min_log_freq, lf);
    if (!lexicon.contains(lowered)) oov += 1;
    if (lf < kRareLogFrequency) rare += 1;
    const auto syl = static_cast<double>(syllables(lowered));
    syllable_sum += syl;
    max_syl = std::max(max_syl, syl);
    if (syl >= 3) poly += 1;
    if (syl == 1) mono += 1;
    std::size_t pos = 0;
    if (text::is_upper(text::next_code_point(w, pos))) upper += 1;
    if (subordinators().contains(lowered)) subord += 1;
    first_word = false;
  }

  const double mean_len = n > 0 ? std::accumulate(lengths.begin(), lengths.end(), 0.0) / n : 0.0;
  double var_len = 0;
  for (double l : lengths) var_len += (l - mean_len) * (l - mean_len);
  var_len = n > 0 ? var_len / n : 0.0;
  const double max_len = lengths.empty() ? 0.0 : *std::max_element(lengths.begin(), lengths.end());
  const double mean_syl = ratio(syllable_sum, n);

  // One sentence per input, so words per sentence equals the word count.
  const double flesch = n > 0 ? 180.0 - n - 58.5 * mean_syl : 0.0;
  const double wstf = n > 0 ? 0.1935 * 100.0 * ratio(poly, n) + 0.1672 * n + 0.1297 * 100.0 * ratio(long_words[0], n) -
                                  0.0327 * 100.0 * ratio(mono, n) - 0.875
                            : 0.0;

  return {
      n,
      static_cast<double>(text::code_point_count(sentence)),
      mean_len,
      max_len,
      std::sqrt(var_len),
      long_words[0], ratio(long_words[0], n),
      long_words[1], ratio(long_words[1], n),
      long_words[2], ratio(long_words[2], n),
      long_words[3], ratio(long_words[3], n),
      punct,
      commas,
      digits,
      ratio(static_cast<double>(types.size()), n),
      ratio(log_freq_sum, n),
      min_log_freq,
      oov, ratio(oov, n),
      rare, ratio(rare, n),
      mean_syl,
      max_syl,
      poly,
      ratio(mono, n),
      ratio(upper, n),
      subord,
      flesch,
      wstf,
  };
}

}  // namespace

FrequencyLexicon::FrequencyLexicon(double floor) : floor_(floor) {
  if (!(floor > 0.0) || !std::isfinite(floor)) throw ConfigError("lexicon floor frequency must be positive");
}

bool FrequencyLexicon::insert(std::string_view word, double frequency) {
  if (!(frequency > 0.0) || !std::isfinite(frequency)) {
    throw FormatError("frequency of '" + std::string(word) + "' must be positive");
  }
  return freq_.emplace(text::to_lower(word), frequency).second;
}

FrequencyLexicon FrequencyLexicon::read(std::istream& in, double floor) {
  FrequencyLexicon lexicon(floor);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("lexicon line " + std::to_string(line_no) + ": expected 'word<TAB>frequency'");
    }
    const std::string_view view(line);
    try {
      const double f = csv::parse_double(view.substr(tab + 1), "frequency");
      if (!(f > 0.0)) throw FormatError("frequency must be positive");
      lexicon.insert(view.substr(0, tab), f);
    } catch (const FormatError& e) {
      throw FormatError("lexicon line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lexicon;
}

FrequencyLexicon FrequencyLexicon::load(const std::filesystem::path& path, double floor) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read(in, floor);
}

double FrequencyLexicon::lookup(std::string_view word) const {
  const auto it = freq_.find(text::to_lower(word));
  return it == freq_.end() ? floor_ : it->second;
}

bool FrequencyLexicon::contains(std::string_view word) const { return freq_.contains(text::to_lower(word)); }

FeatureCatalog::FeatureCatalog(std::vector<FeatureDescriptor> descriptors, std::vector<std::size_t> slots)
    : descriptors_(std::move(descriptors)), slots_(std::move(slots)), version_(catalog_version_for(descriptors_)) {}

const FeatureCatalog& FeatureCatalog::standard() {
  static const FeatureCatalog catalog = [] {
    std::vector<std::size_t> slots(builtin_features().size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    return FeatureCatalog(builtin_features(), std::move(slots));
  }();
  return catalog;
}

FeatureCatalog FeatureCatalog::select(std::span<const std::string> names) {
  const auto& all = builtin_features();
  std::vector<FeatureDescriptor> descriptors;
  std::vector<std::size_t> slots;
  std::set<std::string> seen;
  for (const auto& name : names) {
    if (!seen.insert(name).second) throw ConfigError("duplicate feature '" + name + "'");
    const auto it = std::find_if(all.begin(), all.end(), [&](const auto& d) { return d.name == name; });
    if (it == all.end()) throw ConfigError("unknown feature '" + name + "'");
    descriptors.push_back(*it);
    slots.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  if (descriptors.empty()) throw ConfigError("feature catalog must not be empty");
  return FeatureCatalog(std::move(descriptors), std::move(slots));
}

std::vector<std::string> FeatureCatalog::names() const {
  std::vector<std::string> out;
  out.reserve(descriptors_.size());
  for (const auto& d : descriptors_) out.push_back(d.name);
  return out;
}

std::size_t FeatureCatalog::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < descriptors_.size(); ++i) {
    if (descriptors_[i].name == name) return i;
  }
  return descriptors_.size();
}

FeatureVector extract_features(std::string_view sentence, const FrequencyLexicon& lexicon,
                               const FeatureCatalog& catalog) {
  if (sentence.empty()) throw Error("cannot extract features from empty text");
  const auto all = compute_all(sentence, lexicon);
  FeatureVector v;
  v.catalog_version = catalog.version();
  v.values.reserve(catalog.size());
  for (auto slot : catalog.slots_) v.values.push_back(all[slot]);
  return v;
}

FeatureVector extract_features(std::string_view sentence, const FrequencyLexicon& lexicon) {
  return extract_features(sentence, lexicon, FeatureCatalog::standard());
}

FeatureScaler::FeatureScaler(std::vector<double> mean, std::vector<double> stddev, std::string catalog_version)
    : mean_(std::move(mean)), stddev_(std::move(stddev)), catalog_version_(std::move(catalog_version)), fitted_(true) {
  if (mean_.size() != stddev_.size()) throw FormatError("scaler mean/std length mismatch");
  for (double s : stddev_) {
    if (!(s >= 0.0)) throw FormatError("scaler std must be non-negative");
  }
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) throw Error("cannot fit a scaler on zero vectors");
  const std::size_t dim = vectors.front().values.size();
  std::vector<double> mean(dim, 0.0), var(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.values.size() != dim || v.catalog_version != vectors.front().catalog_version) {
      throw Error("scaler fit: vectors come from different catalogs");
    }
    for (std::size_t j = 0; j < dim; ++j) mean[j] += v.values[j];
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& m : mean) m /= n;
  for (const auto& v : vectors) {
    for (std::size_t j = 0; j < dim; ++j) var[j] += (v.values[j] - mean[j]) * (v.values[j] - mean[j]);
  }
  for (auto& s : var) s = std::sqrt(s / n);
  return FeatureScaler(std::move(mean), std::move(var), vectors.front().catalog_version);
}

FeatureVector FeatureScaler::apply(const FeatureVector& v) const {
  if (!fitted_) throw Error("scaler used before fitting");
  if (v.values.size() != mean_.size() || v.catalog_version != catalog_version_) {
    throw Error("scaler was fitted on catalog " + catalog_version_ + " but got " + v.catalog_version);
  }
  FeatureVector out;
  out.catalog_version = v.catalog_version;
  out.values.resize(v.values.size());
  for (std::size_t j = 0; j < v.values.size(); ++j) {
    out.values[j] = stddev_[j] < kMinStd ? 0.0 : (v.values[j] - mean_[j]) / stddev_[j];
  }
  return out;
}

void write_feature_dump(std::ostream& out, std::span<const std::string> ids, std::span<const FeatureVector> vectors,
                        const FeatureCatalog& catalog) {
  if (ids.size() != vectors.size()) throw Error("feature dump: id and vector counts differ");
  std::vector<std::string> header{"id"};
  for (const auto& name : catalog.names()) header.push_back(name);
  csv::write_row(out, header);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (vectors[i].catalog_version != catalog.version()) throw Error("feature dump: catalog version mismatch");
    std::vector<std::string> row{ids[i]};
    for (double x : vectors[i].values) row.push_back(csv::format_double(x));
    csv::write_row(out, row);
  }
}

nlohmann::json feature_sidecar(const FeatureCatalog& catalog) {
  return {{"catalog_version", catalog.version()}, {"feature_names", catalog.names()}};
}

FeatureTable read_feature_dump(std::istream& in) {
  const auto records = csv::read(in);
  if (records.empty() || records.front().fields.empty() || records.front().fields.front() != "id") {
    throw FormatError("feature dump: header must start with 'id'");
  }
  FeatureTable table;
  table.feature_names.assign(records.front().fields.begin() + 1, records.front().fields.end());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != table.feature_names.size() + 1) {
      throw FormatError("feature dump line " + std::to_string(rec.line) + ": wrong number of fields");
    }
    table.ids.push_back(rec.fields.front());
    std::vector<double> row;
    for (std::size_t j = 1; j < rec.fields.size(); ++j) {
      row.push_back(csv::parse_double(rec.fields[j], "feature dump line " + std::to_string(rec.line)));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace readability
