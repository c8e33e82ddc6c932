#include "readability/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "readability/error.hpp"

namespace readability {
namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

Mat row_matrix(const std::vector<double>& v) {
  return Eigen::Map<const Mat>(v.data(), 1, static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_vector(const Mat& m) { return {m.data(), m.data() + m.size()}; }

std::filesystem::path manifest_path(std::filesystem::path p) {
  if (p.extension() != ".json") p += ".json";
  return p;
}

}  // namespace

nlohmann::ordered_json to_json(const EncoderConfig& c) {
  return nlohmann::ordered_json{{"vocab_size", c.vocab_size},
                                {"max_len", c.max_len},
                                {"model_dim", c.model_dim},
                                {"num_layers", c.num_layers},
                                {"num_heads", c.num_heads},
                                {"feedforward_dim", c.feedforward_dim},
                                {"pooling", c.pooling == Pooling::Cls ? "cls" : "eos"},
                                {"causal", c.causal}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.num_layers = j.at("num_layers").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.feedforward_dim = j.at("feedforward_dim").get<std::size_t>();
  const auto pooling = j.at("pooling").get<std::string>();
  if (pooling != "cls" && pooling != "eos") throw FormatError("unknown pooling '" + pooling + "'");
  c.pooling = pooling == "cls" ? Pooling::Cls : Pooling::Eos;
  c.causal = j.at("causal").get<bool>();
  c.validate();
  return c;
}

nlohmann::ordered_json to_json(const TrainingConfig& c) {
  return nlohmann::ordered_json{{"batch_size", c.batch_size},
                                {"phase1_lr", c.phase1_lr},
                                {"phase2_lr", c.phase2_lr},
                                {"warmup_fraction", c.warmup_fraction},
                                {"phase1_max_epochs", c.phase1_max_epochs},
                                {"phase1_patience", c.phase1_patience},
                                {"phase1_grace", c.phase1_grace},
                                {"phase2_max_epochs", c.phase2_max_epochs},
                                {"phase2_patience", c.phase2_patience},
                                {"eval_every", c.eval_every},
                                {"mlp_hidden", c.mlp_hidden},
                                {"init_std", c.init_std},
                                {"adamw",
                                 {{"beta1", c.adamw.beta1},
                                  {"beta2", c.adamw.beta2},
                                  {"eps", c.adamw.eps},
                                  {"weight_decay", c.adamw.weight_decay}}},
                                {"rmsprop", {{"alpha", c.rmsprop.alpha}, {"eps", c.rmsprop.eps}}},
                                {"seed", c.seed}};
}

void save_checkpoint(const std::filesystem::path& stem, const TrainedModel& model,
                     const nlohmann::ordered_json& extra) {
  model.validate();
  std::map<std::string, const Mat*> tensors;
  model.mlp.for_each_tensor([&](const std::string& name, const Mat& m) { tensors.emplace(name, &m); });
  const Mat scaler_mean = row_matrix(model.scaler.mean());
  const Mat scaler_std = row_matrix(model.scaler.stddev());
  tensors.emplace("scaler.mean", &scaler_mean);
  tensors.emplace("scaler.std", &scaler_std);

  nlohmann::ordered_json config;
  config["family"] = to_string(model.family);
  config["provider"] = to_string(provider_kind(model.encoder));
  if (const auto* t = std::get_if<TransformerProvider>(&model.encoder)) {
    config["encoder"] = to_json(t->config);
    config["vocab"] = t->vocab.tokens();
    t->weights.for_each_tensor([&](const std::string& name, const Mat& m) { tensors.emplace("encoder." + name, &m); });
  } else if (const auto* r = std::get_if<RandomProjectionProvider>(&model.encoder)) {
    config["projection"] = {{"seed", r->seed}, {"dim", r->dim}, {"max_len", r->max_len}};
    config["vocab"] = r->vocab.tokens();
  } else {
    config["precomputed_dim"] = embedding_dim(model.encoder);
  }
  config["mlp_hidden"] = model.mlp.hidden_dim();
  config["feature_dim"] = model.scaler.dim();

  const auto manifest_file = manifest_path(stem);
  auto tensor_file = manifest_file;
  tensor_file.replace_extension(".bin");

  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  std::ofstream bin(tensor_file, std::ios::binary);
  if (!bin) throw Error("cannot write " + tensor_file.string());
  std::uint64_t offset = 0;
  for (const auto& [name, m] : tensors) {
    index.push_back({{"name", name}, {"shape", {m->rows(), m->cols()}}, {"offset", offset}});
    for (Eigen::Index i = 0; i < m->size(); ++i) {
      const auto f = static_cast<float>(m->data()[i]);
      const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(f));
      bin.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
    offset += static_cast<std::uint64_t>(m->size());
  }
  if (!bin) throw Error("failed writing " + tensor_file.string());

  nlohmann::ordered_json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["config"] = std::move(config);
  manifest["catalog_version"] = model.catalog_version;
  manifest["tensor_file"] = tensor_file.filename().string();
  manifest["tensor_index"] = std::move(index);
  manifest["training"] = extra;
  std::ofstream out(manifest_file, std::ios::binary);
  if (!out) throw Error("cannot write " + manifest_file.string());
  out << manifest.dump(2) << '\n';
}

TrainedModel load_checkpoint(const std::filesystem::path& path, std::shared_ptr<const PrecomputedEmbeddings> precomputed) {
  const auto manifest_file = manifest_path(path);
  std::ifstream in(manifest_file, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + manifest_file.string());
  try {
    const auto manifest = nlohmann::json::parse(in);
    if (manifest.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("unsupported checkpoint format");
    }
    const auto tensor_file = manifest_file.parent_path() / manifest.at("tensor_file").get<std::string>();
    std::ifstream bin(tensor_file, std::ios::binary);
    if (!bin) throw Error("cannot open tensor file " + tensor_file.string());
    std::vector<char> raw{std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>()};
    if (raw.size() % 4 != 0) throw FormatError("tensor file size is not a multiple of 4");
    const std::size_t floats = raw.size() / 4;

    std::map<std::string, Mat> tensors;
    for (const auto& entry : manifest.at("tensor_index")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) throw FormatError("tensor '" + name + "' has a bad shape");
      const auto count = static_cast<std::size_t>(shape[0] * shape[1]);
      if (offset + count > floats) throw FormatError("tensor '" + name + "' runs past the end of the tensor file");
      Mat m(shape[0], shape[1]);
      for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t le = 0;
        std::memcpy(&le, raw.data() + 4 * (offset + i), 4);
        m.data()[i] = static_cast<double>(std::bit_cast<float>(to_little_endian(le)));
      }
      tensors.emplace(name, std::move(m));
    }
    auto take = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
      const auto it = tensors.find(name);
      if (it == tensors.end()) throw FormatError("checkpoint lacks tensor '" + name + "'");
      if (it->second.rows() != rows || it->second.cols() != cols) {
        throw FormatError("tensor '" + name + "' has the wrong shape");
      }
      return it->second;
    };

    const auto& config = manifest.at("config");
    TrainedModel model;
    model.family = parse_family(config.at("family").get<std::string>());
    model.catalog_version = manifest.at("catalog_version").get<std::string>();
    const auto kind = parse_provider_kind(config.at("provider").get<std::string>());
    switch (kind) {
      case ProviderKind::Transformer: {
        TransformerProvider p;
        p.config = encoder_config_from_json(config.at("encoder"));
        p.vocab = Vocabulary::from_tokens(config.at("vocab").get<std::vector<std::string>>());
        if (p.vocab.size() != p.config.vocab_size) throw FormatError("vocabulary size disagrees with encoder config");
        if (p.config.family() != model.family) throw FormatError("encoder pooling disagrees with model family");
        p.weights = EncoderWeights::zeros(p.config);
        p.weights.for_each_tensor(
            [&](const std::string& name, Mat& m) { m = take("encoder." + name, m.rows(), m.cols()); });
        model.encoder = std::move(p);
        break;
      }
      case ProviderKind::RandomProjection: {
        RandomProjectionProvider p;
        const auto& proj = config.at("projection");
        p.vocab = Vocabulary::from_tokens(config.at("vocab").get<std::vector<std::string>>());
        p.family = model.family;
        p.seed = proj.at("seed").get<std::uint64_t>();
        p.dim = proj.at("dim").get<std::size_t>();
        p.max_len = proj.at("max_len").get<std::size_t>();
        model.encoder = std::move(p);
        break;
      }
      case ProviderKind::Precomputed: {
        if (!precomputed) throw ConfigError("checkpoint uses precomputed embeddings but none were supplied");
        const auto dim = config.at("precomputed_dim").get<std::size_t>();
        if (precomputed->dim() != dim) {
          throw ConfigError("checkpoint expects embeddings of dimension " + std::to_string(dim) + ", file has " +
                            std::to_string(precomputed->dim()));
        }
        model.encoder = PrecomputedProvider{std::move(precomputed)};
        break;
      }
    }

    const auto hidden = static_cast<Eigen::Index>(config.at("mlp_hidden").get<std::size_t>());
    const auto feature_dim = static_cast<Eigen::Index>(config.at("feature_dim").get<std::size_t>());
    const auto input = static_cast<Eigen::Index>(embedding_dim(model.encoder)) + feature_dim;
    model.mlp = MlpWeights::zeros(static_cast<std::size_t>(input), static_cast<std::size_t>(hidden));
    model.mlp.for_each_tensor([&](const std::string& name, Mat& m) { m = take(name, m.rows(), m.cols()); });
    model.scaler = FeatureScaler(to_vector(take("scaler.mean", 1, feature_dim)),
                                 to_vector(take("scaler.std", 1, feature_dim)), model.catalog_version);
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_file.string() + ": " + e.what());
  }
}

}  // namespace readability
