#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace readability {

/// Word -> relative frequency. Keys are lowercased; unknown words fall back
/// to the floor frequency.
class FrequencyLexicon {
 public:
  static constexpr double kDefaultFloor = 0.01;

  explicit FrequencyLexicon(double floor = kDefaultFloor);

  /// TSV `word<TAB>frequency`. Blank lines are skipped, duplicates keep the
  /// first occurrence, non-positive frequencies are rejected.
  static FrequencyLexicon read(std::istream& in, double floor = kDefaultFloor);
  static FrequencyLexicon load(const std::filesystem::path& path, double floor = kDefaultFloor);

  /// Returns false when the word was already present.
  bool insert(std::string_view word, double frequency);

  double lookup(std::string_view word) const;
  bool contains(std::string_view word) const;
  double floor() const { return floor_; }
  std::size_t size() const { return freq_.size(); }

 private:
  double floor_;
  std::unordered_map<std::string, double> freq_;
};

struct FeatureDescriptor {
  std::string name;
  std::string rule;
};

struct FeatureVector {
  std::vector<double> values;
  std::string catalog_version;
};

class FeatureCatalog;

/// Deterministic readability features of one sentence. Throws on empty text.
FeatureVector extract_features(std::string_view text, const FrequencyLexicon& lexicon,
                               const FeatureCatalog& catalog);
FeatureVector extract_features(std::string_view text, const FrequencyLexicon& lexicon);

/// Ordered list of features. The version string is derived from the names
/// and a rule revision, so any reordering or rule change alters it.
class FeatureCatalog {
 public:
  /// All built-in features in canonical order.
  static const FeatureCatalog& standard();

  /// Subset of the built-in features, in the given order.
  static FeatureCatalog select(std::span<const std::string> names);

  std::size_t size() const { return descriptors_.size(); }
  const std::vector<FeatureDescriptor>& descriptors() const { return descriptors_; }
  std::vector<std::string> names() const;
  const std::string& version() const { return version_; }
  /// Position of a feature, or size() when absent.
  std::size_t index_of(std::string_view name) const;

 private:
  FeatureCatalog(std::vector<FeatureDescriptor> descriptors, std::vector<std::size_t> slots);

  std::vector<FeatureDescriptor> descriptors_;
  std::vector<std::size_t> slots_;  // indices into the built-in table
  std::string version_;

  friend FeatureVector extract_features(std::string_view, const FrequencyLexicon&, const FeatureCatalog&);
};

/// Standardizer fitted on training rows (population standard deviation).
class FeatureScaler {
 public:
  static constexpr double kMinStd = 1e-12;

  FeatureScaler() = default;
  FeatureScaler(std::vector<double> mean, std::vector<double> stddev, std::string catalog_version);

  static FeatureScaler fit(std::span<const FeatureVector> vectors);

  /// (x - mean) / std; features whose std is below kMinStd map to 0.
  FeatureVector apply(const FeatureVector& v) const;

  bool fitted() const { return fitted_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  const std::string& catalog_version() const { return catalog_version_; }
  std::size_t dim() const { return mean_.size(); }

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
  std::string catalog_version_;
  bool fitted_ = false;
};

/// CSV with an `id` column followed by one column per catalog feature.
void write_feature_dump(std::ostream& out, std::span<const std::string> ids,
                        std::span<const FeatureVector> vectors, const FeatureCatalog& catalog);

/// JSON sidecar `{catalog_version, feature_names}`.
nlohmann::json feature_sidecar(const FeatureCatalog& catalog);

struct FeatureTable {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
};

/// Reads a feature dump; extra columns beyond the catalog are allowed.
FeatureTable read_feature_dump(std::istream& in);

}  // namespace readability
