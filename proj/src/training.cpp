#include "readability/training.hpp"

#include <cmath>
#include <numeric>

#include "readability/error.hpp"
#include "readability/metrics.hpp"

namespace readability {
namespace {

template <typename Params>
Params zeros_like_params(const Params& p) {
  Params z = p;
  set_zero(z);
  return z;
}

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

void check_data(const Phase1Data& d, std::string_view what) {
  if (d.tokens.empty()) throw Error(std::string(what) + " set is empty");
  if (d.tokens.size() != d.labels.size()) throw Error(std::string(what) + " set: token and label counts differ");
}

void check_data(const Phase2Data& d, std::string_view what) {
  const auto n = static_cast<std::size_t>(d.embeddings.rows());
  if (n == 0) throw Error(std::string(what) + " set is empty");
  if (d.features.size() != n || d.labels.size() != n) {
    throw Error(std::string(what) + " set: embedding, feature and label counts differ");
  }
}

}  // namespace

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(phase1_lr > 0.0) || !(phase2_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in (0, 1)");
  if (phase1_max_epochs <= 0 || phase2_max_epochs <= 0) throw ConfigError("max epochs must be positive");
  if (phase1_patience <= 0 || phase2_patience <= 0) throw ConfigError("patience must be positive");
  if (phase1_grace < 0 || eval_every < 0) throw ConfigError("grace and eval_every must be non-negative");
  if (mlp_hidden == 0) throw ConfigError("mlp_hidden must be positive");
  if (!(init_std > 0.0)) throw ConfigError("init_std must be positive");
}

std::int64_t steps_per_epoch(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  return static_cast<std::int64_t>((n + batch_size - 1) / batch_size);
}

std::int64_t default_eval_every(std::size_t n, std::size_t batch_size) {
  return std::max<std::int64_t>(1, (steps_per_epoch(n, batch_size) + 1) / 2);
}

Phase1Model Phase1Model::zeros(const EncoderConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  return {EncoderWeights::zeros(config), {Mat::Zero(d, 1), Mat::Zero(1, 1)}};
}

std::vector<double> phase1_predict(const Phase1Model& model, const EncoderConfig& config,
                                   std::span<const TokenSequence> tokens) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& seq : tokens) {
    const RowVec pooled = encoder_forward(seq, model.encoder, config);
    out.push_back((pooled * model.head.w)(0, 0) + model.head.b(0, 0));
  }
  return out;
}

double phase1_loss_and_grad(const Phase1Model& model, const EncoderConfig& config,
                            std::span<const TokenSequence> tokens, std::span<const double> labels, Phase1Model& grads) {
  if (tokens.size() != labels.size() || tokens.empty()) throw Error("phase 1 batch: bad token/label counts");
  std::vector<EncoderTrace> traces(tokens.size());
  std::vector<RowVec> pooled(tokens.size());
  std::vector<double> preds(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    pooled[i] = encoder_forward(tokens[i], model.encoder, config, &traces[i]);
    preds[i] = (pooled[i] * model.head.w)(0, 0) + model.head.b(0, 0);
  }
  const auto loss = mse_loss(preds, labels);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double g = loss.grad[i];
    grads.head.w += g * pooled[i].transpose();
    grads.head.b(0, 0) += g;
    const RowVec d_pooled = g * model.head.w.col(0).transpose();
    encoder_backward(traces[i], model.encoder, config, d_pooled, grads.encoder);
  }
  return loss.loss;
}

Phase1Result train_phase1(const Phase1Data& train, const Phase1Data& early_stop, const EncoderConfig& config,
                          const TrainingConfig& training) {
  config.validate();
  training.validate();
  check_data(train, "phase 1 training");
  check_data(early_stop, "phase 1 early-stop");

  const Rng root = Rng(training.seed).derive("phase1");
  Phase1Model model;
  {
    Rng init = root.derive("init");
    model.encoder = EncoderWeights::init(config, init, training.init_std);
    Rng head_rng = root.derive("head");
    model.head.w = Mat(static_cast<Eigen::Index>(config.model_dim), 1);
    for (Eigen::Index i = 0; i < model.head.w.size(); ++i) model.head.w(i, 0) = training.init_std * head_rng.normal();
    // Head bias starts at the mean training label.
    model.head.b = Mat::Constant(1, 1, std::accumulate(train.labels.begin(), train.labels.end(), 0.0) /
                                           static_cast<double>(train.labels.size()));
  }

  const std::size_t n = train.tokens.size();
  const std::int64_t spe = steps_per_epoch(n, training.batch_size);
  const std::int64_t total_steps = spe * training.phase1_max_epochs;
  const std::int64_t eval_every = training.eval_every > 0 ? training.eval_every : default_eval_every(n, training.batch_size);

  AdamW optimizer(training.adamw);
  EarlyStopping<Phase1Model> stopper(training.phase1_patience, training.phase1_grace);
  Phase1Model grads = zeros_like_params(model);
  const auto params = tensor_pointers(model);
  const auto grad_ptrs = tensor_pointers(std::as_const(grads));

  auto evaluate = [&](std::int64_t updates) {
    const double score = rmse(early_stop.labels, phase1_predict(model, config, early_stop.tokens));
    return stopper.update(score, updates, model);
  };

  auto order = iota_indices(n);
  std::int64_t updates = 0;
  bool stopped = false;
  std::vector<TokenSequence> batch_tokens;
  std::vector<double> batch_labels;
  for (int epoch = 0; epoch < training.phase1_max_epochs && !stopped; ++epoch) {
    root.derive("shuffle").derive(static_cast<std::uint64_t>(epoch)).shuffle(order);
    for (std::size_t start = 0; start < n && !stopped; start += training.batch_size) {
      const std::size_t end = std::min(n, start + training.batch_size);
      batch_tokens.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_tokens.push_back(train.tokens[order[i]]);
        batch_labels.push_back(train.labels[order[i]]);
      }
      set_zero(grads);
      phase1_loss_and_grad(model, config, batch_tokens, batch_labels, grads);
      optimizer.step(params, grad_ptrs, warmup_lr(updates, total_steps, training.phase1_lr, training.warmup_fraction));
      ++updates;
      if (updates % eval_every == 0) stopped = evaluate(updates) == StopDecision::Stop;
    }
  }
  if (!stopper.has_best()) evaluate(updates);

  Phase1Result result;
  result.model = stopper.best_checkpoint();
  result.best_rmse = stopper.best_rmse();
  result.updates = updates;
  result.evaluations = stopper.state().evaluations;
  result.stopped_early = stopped;
  return result;
}

Mat phase2_inputs(const Mat& embeddings, std::span<const FeatureVector> features, const FeatureScaler& scaler) {
  if (static_cast<std::size_t>(embeddings.rows()) != features.size()) {
    throw Error("phase 2: embedding and feature row counts differ");
  }
  const auto emb_dim = embeddings.cols();
  const auto feat_dim = static_cast<Eigen::Index>(scaler.dim());
  Mat x(embeddings.rows(), emb_dim + feat_dim);
  x.leftCols(emb_dim) = embeddings;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto scaled = scaler.apply(features[i]);
    x.row(static_cast<Eigen::Index>(i)).tail(feat_dim) =
        Eigen::Map<const RowVec>(scaled.values.data(), feat_dim);
  }
  return x;
}

Phase2Result train_phase2(const Phase2Data& train, const Phase2Data& early_stop, const TrainingConfig& training) {
  training.validate();
  check_data(train, "phase 2 training");
  check_data(early_stop, "phase 2 early-stop");
  if (train.embeddings.cols() != early_stop.embeddings.cols()) {
    throw Error("phase 2: training and early-stop embeddings differ in dimension");
  }

  const Rng root = Rng(training.seed).derive("phase2");
  const auto scaler = FeatureScaler::fit(train.features);
  const Mat x_train = phase2_inputs(train.embeddings, train.features, scaler);
  const Mat x_es = phase2_inputs(early_stop.embeddings, early_stop.features, scaler);

  Rng init = root.derive("init");
  MlpWeights mlp = MlpWeights::init(static_cast<std::size_t>(x_train.cols()), training.mlp_hidden, init, training.init_std);
  MlpWeights grads = MlpWeights::zeros(mlp.input_dim(), mlp.hidden_dim());
  const auto params = tensor_pointers(mlp);
  const auto grad_ptrs = tensor_pointers(std::as_const(grads));

  RmsProp optimizer(training.rmsprop);
  EarlyStopping<MlpWeights> stopper(training.phase2_patience, 0);
  const std::size_t n = train.labels.size();
  auto order = iota_indices(n);
  std::int64_t updates = 0;
  int epochs = 0;
  bool stopped = false;
  MlpTrace trace;
  for (int epoch = 0; epoch < training.phase2_max_epochs && !stopped; ++epoch) {
    root.derive("shuffle").derive(static_cast<std::uint64_t>(epoch)).shuffle(order);
    for (std::size_t start = 0; start < n; start += training.batch_size) {
      const std::size_t end = std::min(n, start + training.batch_size);
      const auto rows = static_cast<Eigen::Index>(end - start);
      Mat xb(rows, x_train.cols());
      std::vector<double> yb(end - start);
      for (std::size_t i = start; i < end; ++i) {
        xb.row(static_cast<Eigen::Index>(i - start)) = x_train.row(static_cast<Eigen::Index>(order[i]));
        yb[i - start] = train.labels[order[i]];
      }
      const Eigen::VectorXd pred = mlp_forward(xb, mlp, &trace);
      const auto loss = mse_loss(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())), yb);
      set_zero(grads);
      mlp_backward(trace, mlp, Eigen::Map<const Eigen::VectorXd>(loss.grad.data(), rows), grads);
      optimizer.step(params, grad_ptrs, training.phase2_lr);
      ++updates;
    }
    ++epochs;
    const Eigen::VectorXd es_pred = mlp_forward(x_es, mlp);
    const double score =
        rmse(early_stop.labels, std::span<const double>(es_pred.data(), static_cast<std::size_t>(es_pred.size())));
    stopped = stopper.update(score, updates, mlp) == StopDecision::Stop;
  }

  Phase2Result result;
  result.mlp = stopper.best_checkpoint();
  result.scaler = scaler;
  result.best_rmse = stopper.best_rmse();
  result.epochs = epochs;
  result.stopped_early = stopped;
  return result;
}

void TrainedModel::validate() const {
  const std::size_t emb = embedding_dim(encoder);
  if (!scaler.fitted()) throw Error("trained model has no fitted feature scaler");
  if (emb + scaler.dim() != mlp.input_dim()) {
    throw Error("model input mismatch: embedding " + std::to_string(emb) + " + features " +
                std::to_string(scaler.dim()) + " != MLP input " + std::to_string(mlp.input_dim()));
  }
  if (scaler.catalog_version() != catalog_version) throw Error("scaler and model disagree on the feature catalog");
}

double predict(const TrainedModel& model, std::string_view id, std::string_view text, const FrequencyLexicon& lexicon,
               const FeatureCatalog& catalog) {
  if (catalog.version() != model.catalog_version) {
    throw Error("model expects feature catalog " + model.catalog_version + ", got " + catalog.version());
  }
  const RowVec embedding = embed(model.encoder, id, text);
  const FeatureVector features = extract_features(text, lexicon, catalog);
  const Mat x = phase2_inputs(embedding, std::span<const FeatureVector>(&features, 1), model.scaler);
  return mlp_forward(x, model.mlp)(0);
}

}  // namespace readability
