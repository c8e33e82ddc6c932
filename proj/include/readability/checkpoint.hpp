#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "readability/precomputed.hpp"
#include "readability/training.hpp"

namespace readability {

inline constexpr const char* kCheckpointFormat = "readability-checkpoint/1";

nlohmann::ordered_json to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const TrainingConfig& config);

/// Writes `<stem>.json` (manifest: config, catalog_version, tensor_index)
/// and `<stem>.bin` (little-endian float32 tensors in name order).
/// `extra` is stored under "training" in the manifest.
void save_checkpoint(const std::filesystem::path& stem, const TrainedModel& model,
                     const nlohmann::ordered_json& extra = nlohmann::ordered_json::object());

/// Loads a checkpoint given its manifest path (or stem). Models using the
/// precomputed provider need the embedding table.
TrainedModel load_checkpoint(const std::filesystem::path& manifest,
                             std::shared_ptr<const PrecomputedEmbeddings> precomputed = nullptr);

}  // namespace readability
