#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "readability/ensemble.hpp"
#include "run_config.hpp"

namespace readability::cli {

/// Entry point of the `readability` tool. Returns the process exit code:
/// 0 success, 2 usage or config error, 1 runtime failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Writes `<output_dir>/splits/fold_<k>.json` for every fold.
std::vector<std::filesystem::path> cmd_split(const RunConfig& config);

/// Which data a `train` run uses: one CV fold or all of the corpus.
struct TrainTarget {
  std::optional<int> fold;  // empty = final mode
};

/// Trains config.n_members members of config.family. Writes one checkpoint
/// per member under `<output_dir>/models/`; in fold mode the validation
/// predictions also go to `<output_dir>/pool/`. Returns the manifest paths.
std::vector<std::filesystem::path> cmd_train(const RunConfig& config, TrainTarget target);

/// Checkpoint directories expand to their *.json manifests in name order.
std::vector<std::filesystem::path> expand_checkpoints(const std::vector<std::filesystem::path>& paths);

/// `id,member_0,...,member_{n-1},ensemble`, one row per input sentence in
/// input order.
void cmd_predict(const RunConfig& config, const std::vector<std::filesystem::path>& checkpoints,
                 const std::filesystem::path& input, std::ostream& out);

/// Scores the `ensemble` column of a predictions CSV against corpus labels.
nlohmann::ordered_json cmd_evaluate(const std::filesystem::path& predictions, const std::filesystem::path& labels);

/// Bootstrap study over a pool directory; labels come from config.corpus.
/// Odd sizes are skipped for the mixed composition.
BootstrapReport cmd_ensemble_study(const RunConfig& config, const std::filesystem::path& pool_dir);

/// Feature dump of a sentence CSV plus its JSON sidecar.
void cmd_features(const RunConfig& config, const std::filesystem::path& input, const std::filesystem::path& output);

/// Member seed for one (family, fold or final, index).
std::uint64_t member_seed(std::uint64_t root_seed, ModelFamily family, TrainTarget target, std::size_t index);

}  // namespace readability::cli
