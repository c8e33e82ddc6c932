#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "readability/csv.hpp"
#include "readability/error.hpp"

namespace readability::cli {
namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
  T v{};
  const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || r.ec != std::errc{} || r.ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return v;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value, key);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    auto item = trim(value.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  std::filesystem::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value,
                                  const std::filesystem::path& base)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto path = [](std::filesystem::path RunConfig::*member) {
      return [member](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path& base) {
        c.*member = resolve(base, v);
      };
    };
    auto size = [](auto getter) {
      return [getter](RunConfig& c, const std::string& k, const std::string& v, const std::filesystem::path&) {
        getter(c) = parse_integer<std::size_t>(k, v);
      };
    };
    auto integer = [](auto getter) {
      return [getter](RunConfig& c, const std::string& k, const std::string& v, const std::filesystem::path&) {
        getter(c) = parse_integer<std::remove_reference_t<decltype(getter(c))>>(k, v);
      };
    };
    auto real = [](auto getter) {
      return [getter](RunConfig& c, const std::string& k, const std::string& v, const std::filesystem::path&) {
        getter(c) = parse_real(k, v);
      };
    };

    t["corpus"] = path(&RunConfig::corpus);
    t["lexicon"] = path(&RunConfig::lexicon);
    t["embeddings"] = path(&RunConfig::embeddings);
    t["output_dir"] = path(&RunConfig::output_dir);
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v, const std::filesystem::path&) {
      c.seed = parse_integer<std::uint64_t>(k, v);
    };
    t["jobs"] = integer([](RunConfig& c) -> int& { return c.jobs; });

    t["split.k"] = integer([](RunConfig& c) -> int& { return c.k; });
    t["split.es_fraction"] = real([](RunConfig& c) -> double& { return c.es_fraction; });
    t["split.final_es_fraction"] = real([](RunConfig& c) -> double& { return c.final_es_fraction; });

    t["encoder.provider"] = [](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path&) {
      c.provider = parse_provider_kind(v);
    };
    t["encoder.family"] = [](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path&) {
      c.family = parse_family(v);
    };
    t["encoder.max_len"] = size([](RunConfig& c) -> std::size_t& { return c.encoder.max_len; });
    t["encoder.model_dim"] = size([](RunConfig& c) -> std::size_t& { return c.encoder.model_dim; });
    t["encoder.num_layers"] = size([](RunConfig& c) -> std::size_t& { return c.encoder.num_layers; });
    t["encoder.num_heads"] = size([](RunConfig& c) -> std::size_t& { return c.encoder.num_heads; });
    t["encoder.feedforward_dim"] = size([](RunConfig& c) -> std::size_t& { return c.encoder.feedforward_dim; });
    t["encoder.vocab_size"] = size([](RunConfig& c) -> std::size_t& { return c.vocab_max_size; });
    t["encoder.projection_dim"] = size([](RunConfig& c) -> std::size_t& { return c.projection_dim; });

    t["features.catalog"] = [](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path&) {
      c.feature_names = split_list(v);
    };
    t["features.lexicon_floor"] = real([](RunConfig& c) -> double& { return c.lexicon_floor; });

    t["training.batch_size"] = size([](RunConfig& c) -> std::size_t& { return c.training.batch_size; });
    t["training.phase1_lr"] = real([](RunConfig& c) -> double& { return c.training.phase1_lr; });
    t["training.phase2_lr"] = real([](RunConfig& c) -> double& { return c.training.phase2_lr; });
    t["training.warmup_fraction"] = real([](RunConfig& c) -> double& { return c.training.warmup_fraction; });
    t["training.phase1_max_epochs"] = integer([](RunConfig& c) -> int& { return c.training.phase1_max_epochs; });
    t["training.phase1_patience"] = integer([](RunConfig& c) -> int& { return c.training.phase1_patience; });
    t["training.phase1_grace"] = integer([](RunConfig& c) -> std::int64_t& { return c.training.phase1_grace; });
    t["training.phase2_max_epochs"] = integer([](RunConfig& c) -> int& { return c.training.phase2_max_epochs; });
    t["training.phase2_patience"] = integer([](RunConfig& c) -> int& { return c.training.phase2_patience; });
    t["training.eval_every"] = integer([](RunConfig& c) -> std::int64_t& { return c.training.eval_every; });
    t["training.mlp_hidden"] = size([](RunConfig& c) -> std::size_t& { return c.training.mlp_hidden; });
    t["training.init_std"] = real([](RunConfig& c) -> double& { return c.training.init_std; });
    t["training.adamw_beta1"] = real([](RunConfig& c) -> double& { return c.training.adamw.beta1; });
    t["training.adamw_beta2"] = real([](RunConfig& c) -> double& { return c.training.adamw.beta2; });
    t["training.adamw_eps"] = real([](RunConfig& c) -> double& { return c.training.adamw.eps; });
    t["training.weight_decay"] = real([](RunConfig& c) -> double& { return c.training.adamw.weight_decay; });
    t["training.rmsprop_alpha"] = real([](RunConfig& c) -> double& { return c.training.rmsprop.alpha; });
    t["training.rmsprop_eps"] = real([](RunConfig& c) -> double& { return c.training.rmsprop.eps; });
    t["training.n_members"] = size([](RunConfig& c) -> std::size_t& { return c.n_members; });

    t["ensemble.compositions"] = [](RunConfig& c, const std::string&, const std::string& v,
                                    const std::filesystem::path&) {
      c.compositions.clear();
      for (const auto& item : split_list(v)) c.compositions.push_back(parse_composition(item));
    };
    t["ensemble.sizes"] = [](RunConfig& c, const std::string&, const std::string& v, const std::filesystem::path&) {
      c.sizes = parse_sizes(v);
    };
    t["ensemble.resamples"] = size([](RunConfig& c) -> std::size_t& { return c.resamples; });
    t["ensemble.floor"] = real([](RunConfig& c) -> double& { return c.floor; });
    return t;
  }();
  return table;
}

}  // namespace

std::uint64_t RunConfig::root_seed() const {
  if (!seed) throw ConfigError("a seed is required (config key 'seed' or --seed)");
  return *seed;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value, base_dir);
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = unquote(trim(line.substr(eq + 1)));
    try {
      apply_setting(config, section.empty() ? key : section + "." + key, value, base_dir);
    } catch (const Error& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_run_config(in, path.parent_path());
}

}  // namespace readability::cli
