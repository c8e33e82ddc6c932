#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "readability/checkpoint.hpp"
#include "readability/corpus.hpp"
#include "readability/csv.hpp"
#include "readability/error.hpp"
#include "readability/features.hpp"
#include "readability/metrics.hpp"
#include "readability/parallel.hpp"
#include "readability/pipeline.hpp"
#include "readability/precomputed.hpp"
#include "readability/rng.hpp"

namespace readability::cli {
namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " path is not set");
  if (!fs::is_regular_file(path)) throw ConfigError(what + " not found: " + path.string());
}

void validate_common(const RunConfig& config) {
  config.root_seed();
  if (config.jobs < 1) throw ConfigError("jobs must be at least 1");
  if (!config.lexicon.empty()) require_file(config.lexicon, "lexicon");
  if (!config.embeddings.empty()) require_file(config.embeddings, "embeddings");
  if (config.provider == ProviderKind::Precomputed && config.embeddings.empty()) {
    throw ConfigError("the precomputed encoder needs an embeddings file");
  }
  if (!(config.lexicon_floor > 0.0)) throw ConfigError("lexicon_floor must be positive");
  try {
    config.training.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

FeatureCatalog catalog_for(const RunConfig& config) {
  if (config.feature_names.empty()) return FeatureCatalog::standard();
  try {
    return FeatureCatalog::select(config.feature_names);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

FrequencyLexicon lexicon_for(const RunConfig& config) {
  if (config.lexicon.empty()) return FrequencyLexicon(config.lexicon_floor);
  return FrequencyLexicon::load(config.lexicon, config.lexicon_floor);
}

std::shared_ptr<const PrecomputedEmbeddings> embeddings_for(const RunConfig& config) {
  if (config.embeddings.empty()) return nullptr;
  return std::make_shared<const PrecomputedEmbeddings>(load_precomputed(config.embeddings));
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<RatedSentence> pick(const std::unordered_map<std::string, const RatedSentence*>& by_id,
                                const std::vector<std::string>& ids) {
  std::vector<RatedSentence> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  return out;
}

std::string target_label(TrainTarget target) {
  return target.fold ? "fold" + std::to_string(*target.fold) : "final";
}

}  // namespace

std::uint64_t member_seed(std::uint64_t root_seed, ModelFamily family, TrainTarget target, std::size_t index) {
  return Rng(root_seed).derive("member").derive(to_string(family)).derive(target_label(target)).derive(index).seed();
}

std::vector<fs::path> cmd_split(const RunConfig& config) {
  const auto seed = config.root_seed();
  require_file(config.corpus, "corpus");
  const auto corpus = load_corpus(config.corpus);
  std::vector<FoldSplit> splits;
  try {
    splits = make_cv_splits(corpus, config.k, config.es_fraction, seed);
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::vector<fs::path> written;
  for (const auto& split : splits) {
    const auto path = config.output_dir / "splits" / ("fold_" + std::to_string(split.fold_index) + ".json");
    auto out = open_output(path);
    out << split_manifest(split, seed).dump(2) << '\n';
    written.push_back(path);
  }
  return written;
}

std::vector<fs::path> cmd_train(const RunConfig& config, TrainTarget target) {
  validate_common(config);
  require_file(config.corpus, "corpus");
  if (config.n_members == 0) throw ConfigError("n_members must be at least 1");
  const auto seed = config.root_seed();
  const auto corpus = load_corpus(config.corpus);
  std::unordered_map<std::string, const RatedSentence*> by_id;
  for (const auto& s : corpus) by_id.emplace(s.id, &s);

  std::vector<std::string> pool_ids;
  std::vector<std::string> validation_ids;
  if (target.fold) {
    std::vector<FoldSplit> splits;
    try {
      splits = make_cv_splits(corpus, config.k, config.es_fraction, seed);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (*target.fold < 0 || *target.fold >= static_cast<int>(splits.size())) {
      throw ConfigError("fold must be in [0, " + std::to_string(splits.size()) + ")");
    }
    const auto& split = splits[static_cast<std::size_t>(*target.fold)];
    std::vector<std::string> merged = split.train_ids;
    merged.insert(merged.end(), split.early_stop_ids.begin(), split.early_stop_ids.end());
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < corpus.size(); ++i) position.emplace(corpus[i].id, i);
    std::sort(merged.begin(), merged.end(),
              [&](const std::string& x, const std::string& y) { return position.at(x) < position.at(y); });
    pool_ids = std::move(merged);
    validation_ids = split.validation_ids;
  } else {
    for (const auto& s : corpus) pool_ids.push_back(s.id);
  }

  const auto lexicon = lexicon_for(config);
  const auto catalog = catalog_for(config);
  const auto precomputed = embeddings_for(config);
  const auto family_name = to_string(config.family);
  const auto model_dir = config.output_dir / "models" / target_label(target) / family_name;

  std::vector<fs::path> manifests(config.n_members);
  parallel_for(config.n_members, config.jobs, [&](std::size_t i) {
    const auto seed_i = member_seed(seed, config.family, target, i);
    const double es_fraction = target.fold ? config.es_fraction : config.final_es_fraction;
    const auto carve = carve_early_stop(pool_ids, es_fraction, seed_i);
    const auto train = pick(by_id, carve.train_ids);
    const auto early_stop = pick(by_id, carve.early_stop_ids);

    MemberOptions options;
    options.family = config.family;
    options.provider = config.provider;
    options.encoder = config.encoder;
    options.vocab_max_size = config.vocab_max_size;
    options.projection_dim = config.projection_dim;
    options.precomputed = precomputed;
    options.training = config.training;
    options.training.seed = seed_i;
    MemberReport report;
    const auto model = train_member(train, early_stop, options, lexicon, catalog, &report);

    nlohmann::ordered_json extra;
    extra["target"] = target_label(target);
    extra["member"] = i;
    extra["member_seed"] = seed_i;
    extra["train_size"] = train.size();
    extra["early_stop_size"] = early_stop.size();
    extra["phase1_ran"] = report.phase1_ran;
    if (report.phase1_ran) {
      extra["phase1_best_rmse"] = report.phase1_best_rmse;
      extra["phase1_updates"] = report.phase1_updates;
    }
    extra["phase2_best_rmse"] = report.phase2_best_rmse;
    extra["phase2_epochs"] = report.phase2_epochs;
    extra["config"] = to_json(options.training);

    const auto stem = model_dir / ("member_" + std::to_string(i));
    fs::create_directories(model_dir);
    save_checkpoint(stem, model, extra);
    manifests[i] = fs::path(stem.string() + ".json");

    if (target.fold) {
      PoolMember member;
      member.member_id = family_name + "-" + std::to_string(i);
      member.family = config.family;
      member.fold = *target.fold;
      for (const auto& id : validation_ids) {
        member.predictions.push_back(predict(model, id, by_id.at(id)->text, lexicon, catalog));
      }
      auto out = open_output(config.output_dir / "pool" /
                             (target_label(target) + "_" + family_name + "_member_" + std::to_string(i) + ".csv"));
      write_pool_csv(out, member, validation_ids);
    }
  });
  return manifests;
}

std::vector<fs::path> expand_checkpoints(const std::vector<fs::path>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw ConfigError("no checkpoints in " + p.string());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      auto manifest = p.extension() == ".json" ? p : fs::path(p.string() + ".json");
      if (!fs::is_regular_file(manifest)) throw ConfigError("checkpoint not found: " + p.string());
      out.push_back(std::move(manifest));
    }
  }
  if (out.empty()) throw ConfigError("no checkpoints given");
  return out;
}

void cmd_predict(const RunConfig& config, const std::vector<fs::path>& checkpoints, const fs::path& input,
                 std::ostream& out) {
  validate_common(config);
  require_file(input, "input");
  const auto manifests = expand_checkpoints(checkpoints);
  const auto lexicon = lexicon_for(config);
  const auto catalog = catalog_for(config);
  const auto precomputed = embeddings_for(config);
  std::vector<TrainedModel> models;
  models.reserve(manifests.size());
  for (const auto& m : manifests) models.push_back(load_checkpoint(m, precomputed));
  for (const auto& m : models) {
    if (m.catalog_version != catalog.version()) {
      throw ConfigError("checkpoint feature catalog " + m.catalog_version + " does not match " + catalog.version());
    }
  }

  const auto sentences = load_sentences(input);
  std::vector<std::vector<double>> scores(sentences.size(), std::vector<double>(models.size()));
  parallel_for(sentences.size(), config.jobs, [&](std::size_t r) {
    for (std::size_t m = 0; m < models.size(); ++m) {
      scores[r][m] = predict(models[m], sentences[r].id, sentences[r].text, lexicon, catalog);
    }
  });

  std::vector<std::string> header{"id"};
  for (std::size_t m = 0; m < models.size(); ++m) header.push_back("member_" + std::to_string(m));
  header.push_back("ensemble");
  csv::write_row(out, header);
  for (std::size_t r = 0; r < sentences.size(); ++r) {
    std::vector<std::string> row{sentences[r].id};
    for (double s : scores[r]) row.push_back(csv::format_double(s));
    row.push_back(csv::format_double(ensemble_predict(scores[r], config.floor)));
    csv::write_row(out, row);
  }
}

nlohmann::ordered_json cmd_evaluate(const fs::path& predictions, const fs::path& labels) {
  require_file(predictions, "predictions");
  require_file(labels, "labels");
  std::ifstream in(predictions, std::ios::binary);
  const auto records = csv::read(in);
  if (records.empty()) throw FormatError(predictions.string() + ": empty file");
  const auto& header = records.front().fields;
  const auto id_col = std::find(header.begin(), header.end(), "id") - header.begin();
  const auto score_col = std::find(header.begin(), header.end(), "ensemble") - header.begin();
  if (id_col == static_cast<std::ptrdiff_t>(header.size()) ||
      score_col == static_cast<std::ptrdiff_t>(header.size())) {
    throw FormatError(predictions.string() + ": header needs 'id' and 'ensemble' columns");
  }

  const auto corpus = load_corpus(labels);
  std::unordered_map<std::string, double> label_of;
  for (const auto& s : corpus) label_of.emplace(s.id, s.mos);

  std::vector<double> truth;
  std::vector<double> pred;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size()) {
      throw FormatError(predictions.string() + " line " + std::to_string(rec.line) + ": wrong number of fields");
    }
    const auto& id = rec.fields[static_cast<std::size_t>(id_col)];
    const auto it = label_of.find(id);
    if (it == label_of.end()) throw FormatError("prediction id '" + id + "' has no label");
    if (!seen.emplace(id, true).second) throw FormatError("duplicate prediction id '" + id + "'");
    truth.push_back(it->second);
    pred.push_back(csv::parse_double(rec.fields[static_cast<std::size_t>(score_col)], "prediction for " + id));
  }
  if (seen.size() != label_of.size()) {
    for (const auto& s : corpus) {
      if (!seen.count(s.id)) throw FormatError("label id '" + s.id + "' has no prediction");
    }
  }
  return to_json(score(truth, pred));
}

BootstrapReport cmd_ensemble_study(const RunConfig& config, const fs::path& pool_dir) {
  const auto seed = config.root_seed();
  require_file(config.corpus, "corpus");
  if (!fs::is_directory(pool_dir)) throw ConfigError("pool directory not found: " + pool_dir.string());
  if (config.sizes.empty()) throw ConfigError("no ensemble sizes given");
  if (config.compositions.empty()) throw ConfigError("no compositions given");
  if (config.resamples == 0) throw ConfigError("resamples must be at least 1");
  const auto corpus = load_corpus(config.corpus);
  const auto pool = load_pool_dir(pool_dir);
  const auto labels = pool_labels(pool, corpus);
  BootstrapReport report;
  for (const auto composition : config.compositions) {
    BootstrapOptions options;
    options.compositions = {composition};
    for (const auto size : config.sizes) {
      if (composition != Composition::MixedEqual || size % 2 == 0) options.sizes.push_back(size);
    }
    if (options.sizes.empty()) throw ConfigError("mixed ensembles need at least one even size");
    options.n_resamples = config.resamples;
    options.seed = seed;
    options.floor = config.floor;
    options.jobs = config.jobs;
    const auto rows = bootstrap_study(pool, labels, options);
    report.insert(report.end(), rows.begin(), rows.end());
  }
  return report;
}

void cmd_features(const RunConfig& config, const fs::path& input, const fs::path& output) {
  require_file(input, "input");
  if (!config.lexicon.empty()) require_file(config.lexicon, "lexicon");
  const auto lexicon = lexicon_for(config);
  const auto catalog = catalog_for(config);
  const auto sentences = load_sentences(input);
  std::vector<std::string> ids;
  std::vector<FeatureVector> vectors(sentences.size());
  for (const auto& s : sentences) ids.push_back(s.id);
  parallel_for(sentences.size(), config.jobs,
               [&](std::size_t i) { vectors[i] = extract_features(sentences[i].text, lexicon, catalog); });
  {
    auto out = open_output(output);
    write_feature_dump(out, ids, vectors, catalog);
  }
  auto sidecar = output;
  sidecar.replace_extension(".json");
  auto out = open_output(sidecar);
  out << feature_sidecar(catalog).dump(2) << '\n';
}

namespace {

template <typename Parse>
auto to_config(Parse parse, const std::string& text) {
  try {
    return parse(text);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> encoder;
  std::optional<std::string> family;
  std::optional<std::string> output_dir;
  std::vector<std::string> settings;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "Run config file");
    app.add_option("--seed", seed, "Root seed");
    app.add_option("--jobs", jobs, "Worker threads");
    app.add_option("--output-dir", output_dir, "Output directory");
    app.add_option("--set", settings, "Extra setting, e.g. training.batch_size=8");
  }

  void attach_model(CLI::App& app) {
    app.add_option("--encoder", encoder, "transformer | random-projection | precomputed");
    app.add_option("--family", family, "a | b");
  }

  RunConfig resolve() const {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) config.seed = *seed;
    if (jobs) config.jobs = *jobs;
    if (encoder) config.provider = to_config(parse_provider_kind, *encoder);
    if (family) config.family = to_config(parse_family, *family);
    if (output_dir) config.output_dir = *output_dir;
    for (const auto& s : settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    return config;
  }
};

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentence readability regression with transformer ensembles", "readability"};
  app.require_subcommand(1);

  Overrides split_o;
  auto* split = app.add_subcommand("split", "Write cross-validation split manifests");
  split_o.attach(*split);

  Overrides train_o;
  std::optional<int> fold;
  bool final_mode = false;
  std::optional<std::size_t> members;
  auto* train = app.add_subcommand("train", "Train ensemble members for one fold or the final model");
  train_o.attach(*train);
  train_o.attach_model(*train);
  auto* fold_opt = train->add_option("--fold", fold, "Cross-validation fold index");
  train->add_flag("--final", final_mode, "Train on the full corpus")->excludes(fold_opt);
  train->add_option("--members", members, "Number of members");

  Overrides predict_o;
  std::vector<std::string> checkpoints;
  std::string predict_input;
  std::string predict_out;
  std::optional<double> predict_floor;
  auto* predict_cmd = app.add_subcommand("predict", "Score sentences with trained members");
  predict_o.attach(*predict_cmd);
  predict_o.attach_model(*predict_cmd);
  predict_cmd->add_option("--checkpoint", checkpoints, "Checkpoint manifest or directory")->required();
  predict_cmd->add_option("--input", predict_input, "Sentence CSV")->required();
  predict_cmd->add_option("--out", predict_out, "Predictions CSV (default: stdout)");
  predict_cmd->add_option("--floor", predict_floor, "Ensemble score floor");

  std::string eval_predictions;
  std::string eval_labels;
  std::string eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "RMSE and mapped RMSE of a predictions CSV");
  evaluate->add_option("--predictions", eval_predictions, "Predictions CSV")->required();
  evaluate->add_option("--labels", eval_labels, "Labelled corpus CSV")->required();
  evaluate->add_option("--out", eval_out, "Evaluation JSON (default: stdout)");

  Overrides study_o;
  std::string pool_dir;
  std::string study_out;
  std::vector<std::string> compositions;
  std::optional<std::string> sizes;
  std::optional<std::size_t> resamples;
  std::optional<double> study_floor;
  auto* study = app.add_subcommand("ensemble-study", "Bootstrap study of ensemble size and composition");
  study_o.attach(*study);
  study->add_option("--pool", pool_dir, "Pool directory (default: <output_dir>/pool)");
  study->add_option("--out", study_out, "Report CSV (default: <output_dir>/study/report.csv)");
  study->add_option("--composition", compositions, "a | b | mixed (repeatable)")->delimiter(',');
  study->add_option("--sizes", sizes, "Ensemble sizes, e.g. 1..60");
  study->add_option("--resamples", resamples, "Bootstrap resamples per size");
  study->add_option("--floor", study_floor, "Ensemble score floor");

  Overrides features_o;
  std::string features_input;
  std::string features_out;
  auto* features = app.add_subcommand("features", "Dump readability features of a sentence CSV");
  features_o.attach(*features);
  features->add_option("--input", features_input, "Sentence CSV")->required();
  features->add_option("--out", features_out, "Feature CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  if (*split) {
    for (const auto& path : cmd_split(split_o.resolve())) out << path.string() << '\n';
  } else if (*train) {
    if (!fold && !final_mode) throw ConfigError("train needs --fold N or --final");
    auto config = train_o.resolve();
    if (members) config.n_members = *members;
    for (const auto& path : cmd_train(config, TrainTarget{fold})) out << path.string() << '\n';
  } else if (*predict_cmd) {
    auto config = predict_o.resolve();
    if (predict_floor) config.floor = *predict_floor;
    std::vector<fs::path> paths(checkpoints.begin(), checkpoints.end());
    if (predict_out.empty()) {
      cmd_predict(config, paths, predict_input, out);
    } else {
      std::ostringstream buffer;
      cmd_predict(config, paths, predict_input, buffer);
      auto file = open_output(predict_out);
      file << buffer.str();
    }
  } else if (*evaluate) {
    const auto text = cmd_evaluate(eval_predictions, eval_labels).dump(2) + "\n";
    if (eval_out.empty()) {
      out << text;
    } else {
      auto file = open_output(eval_out);
      file << text;
    }
  } else if (*study) {
    auto config = study_o.resolve();
    if (!compositions.empty()) {
      config.compositions.clear();
      for (const auto& c : compositions) config.compositions.push_back(to_config(parse_composition, c));
    }
    if (sizes) config.sizes = to_config(parse_sizes, *sizes);
    if (resamples) config.resamples = *resamples;
    if (study_floor) config.floor = *study_floor;
    const fs::path pool = pool_dir.empty() ? config.output_dir / "pool" : fs::path(pool_dir);
    const fs::path report_path = study_out.empty() ? config.output_dir / "study" / "report.csv" : fs::path(study_out);
    const auto report = cmd_ensemble_study(config, pool);
    {
      auto file = open_output(report_path);
      write_report_csv(file, report);
    }
    auto curve_path = report_path;
    curve_path.replace_extension(".dat");
    auto file = open_output(curve_path);
    write_curve_file(file, report);
    out << report_path.string() << '\n' << curve_path.string() << '\n';
  } else if (*features) {
    cmd_features(features_o.resolve(), features_input, features_out);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace readability::cli
