#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "readability/encoder.hpp"
#include "readability/ensemble.hpp"
#include "readability/provider.hpp"
#include "readability/training.hpp"

namespace readability::cli {

/// Everything a command needs. Loaded from a key/value config file
/// (`key = value`, `[section]` headers, `#` comments); command-line flags
/// are applied on top.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;
  std::filesystem::path embeddings;
  std::filesystem::path output_dir = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;

  // [split]
  int k = 5;
  double es_fraction = 0.1;
  double final_es_fraction = 0.075;

  // [encoder]
  ProviderKind provider = ProviderKind::Transformer;
  ModelFamily family = ModelFamily::A;
  EncoderConfig encoder;
  std::size_t vocab_max_size = 8000;
  std::size_t projection_dim = 64;

  // [features]
  std::vector<std::string> feature_names;  // empty = full catalog
  double lexicon_floor = 0.01;

  // [training]
  TrainingConfig training;
  std::size_t n_members = 1;

  // [ensemble]
  std::vector<Composition> compositions{Composition::FamilyA, Composition::FamilyB, Composition::MixedEqual};
  std::vector<std::size_t> sizes = [] {
    std::vector<std::size_t> s;
    for (std::size_t i = 1; i <= 60; ++i) s.push_back(i);
    return s;
  }();
  std::size_t resamples = 1000;
  double floor = 1.0;

  std::uint64_t root_seed() const;
};

/// Throws ConfigError on unknown keys or bad values. Relative paths are
/// resolved against the config file's directory.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `key = value` setting (section-qualified, e.g. "training.batch_size").
void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir = {});

}  // namespace readability::cli
