#include "readability/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "readability/error.hpp"

namespace readability {
namespace {

constexpr double kLayerNormEps = 1e-5;

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = stddev * rng.normal();
  return m;
}

Mat layer_norm(const Mat& x, const Mat& gamma, const Mat& beta, LayerNormCache& cache) {
  const auto d = static_cast<double>(x.cols());
  cache.normalized.resize(x.rows(), x.cols());
  cache.inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / d;
    const RowVec centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / d;
    cache.inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.normalized.row(r) = centered * cache.inv_std(r);
  }
  Mat y = cache.normalized.array().rowwise() * gamma.row(0).array();
  y.rowwise() += beta.row(0);
  return y;
}

Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache, const Mat& gamma, Mat& d_gamma, Mat& d_beta) {
  d_gamma.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  d_beta.row(0) += dy.colwise().sum();
  const auto d = static_cast<double>(dy.cols());
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const RowVec dxhat = dy.row(r).array() * gamma.row(0).array();
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dxhat_xhat = dxhat.dot(cache.normalized.row(r)) / d;
    dx.row(r) = cache.inv_std(r) * (dxhat.array() - mean_dxhat - cache.normalized.row(r).array() * mean_dxhat_xhat);
  }
  return dx;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Mat affine(const Mat& x, const Mat& w, const Mat& b) {
  Mat y = x * w;
  y.rowwise() += b.row(0);
  return y;
}

// Number of unpadded positions; rejects malformed sequences.
std::size_t checked_length(const TokenSequence& tokens, const EncoderConfig& config) {
  if (tokens.ids.size() != tokens.attention_mask.size()) {
    throw Error("token sequence: ids and attention mask differ in length");
  }
  std::size_t n = 0;
  while (n < tokens.attention_mask.size() && tokens.attention_mask[n] == 1) ++n;
  for (std::size_t i = n; i < tokens.attention_mask.size(); ++i) {
    if (tokens.attention_mask[i] != 0) throw Error("token sequence: padding must be contiguous at the tail");
  }
  if (n == 0) throw Error("token sequence has no unpadded positions");
  if (n > config.max_len) {
    throw Error("token sequence has " + std::to_string(n) + " tokens, encoder max_len is " +
                std::to_string(config.max_len));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = tokens.ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw Error("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                  std::to_string(config.vocab_size));
    }
  }
  return n;
}

}  // namespace

std::string to_string(ModelFamily family) { return family == ModelFamily::A ? "a" : "b"; }

ModelFamily parse_family(std::string_view text) {
  if (text == "a" || text == "A") return ModelFamily::A;
  if (text == "b" || text == "B") return ModelFamily::B;
  throw ConfigError("unknown model family '" + std::string(text) + "' (expected a or b)");
}

EncoderConfig EncoderConfig::for_family(ModelFamily family, std::size_t vocab_size) {
  EncoderConfig c;
  c.vocab_size = vocab_size;
  c.pooling = family == ModelFamily::A ? Pooling::Cls : Pooling::Eos;
  c.causal = family == ModelFamily::B;
  return c;
}

void EncoderConfig::validate() const {
  if (vocab_size == 0 || max_len == 0 || model_dim == 0 || num_layers == 0 || num_heads == 0 ||
      feedforward_dim == 0) {
    throw ConfigError("encoder sizes must all be positive");
  }
  if (model_dim % num_heads != 0) {
    throw ConfigError("model_dim " + std::to_string(model_dim) + " is not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if ((pooling == Pooling::Cls) == causal) {
    throw ConfigError("CLS pooling requires bidirectional attention and EOS pooling requires a causal mask");
  }
}

EncoderWeights EncoderWeights::zeros(const EncoderConfig& config) {
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto ff = static_cast<Eigen::Index>(config.feedforward_dim);
  EncoderWeights w;
  w.token_embedding = Mat::Zero(static_cast<Eigen::Index>(config.vocab_size), d);
  w.position_embedding = Mat::Zero(static_cast<Eigen::Index>(config.max_len), d);
  w.layers.resize(config.num_layers);
  for (auto& l : w.layers) {
    l.ln1_gamma = Mat::Zero(1, d);
    l.ln1_beta = Mat::Zero(1, d);
    l.wq = Mat::Zero(d, d);
    l.bq = Mat::Zero(1, d);
    l.wk = Mat::Zero(d, d);
    l.bk = Mat::Zero(1, d);
    l.wv = Mat::Zero(d, d);
    l.bv = Mat::Zero(1, d);
    l.wo = Mat::Zero(d, d);
    l.bo = Mat::Zero(1, d);
    l.ln2_gamma = Mat::Zero(1, d);
    l.ln2_beta = Mat::Zero(1, d);
    l.w1 = Mat::Zero(d, ff);
    l.b1 = Mat::Zero(1, ff);
    l.w2 = Mat::Zero(ff, d);
    l.b2 = Mat::Zero(1, d);
  }
  w.final_ln_gamma = Mat::Zero(1, d);
  w.final_ln_beta = Mat::Zero(1, d);
  return w;
}

EncoderWeights EncoderWeights::init(const EncoderConfig& config, Rng& rng, double init_std) {
  config.validate();
  EncoderWeights w = zeros(config);
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto ff = static_cast<Eigen::Index>(config.feedforward_dim);
  w.token_embedding = normal_matrix(w.token_embedding.rows(), d, rng, init_std);
  w.position_embedding = normal_matrix(w.position_embedding.rows(), d, rng, init_std);
  for (auto& l : w.layers) {
    l.ln1_gamma.setOnes();
    l.ln2_gamma.setOnes();
    l.wq = normal_matrix(d, d, rng, init_std);
    l.wk = normal_matrix(d, d, rng, init_std);
    l.wv = normal_matrix(d, d, rng, init_std);
    l.wo = normal_matrix(d, d, rng, init_std);
    l.w1 = normal_matrix(d, ff, rng, init_std);
    l.w2 = normal_matrix(ff, d, rng, init_std);
  }
  w.final_ln_gamma.setOnes();
  return w;
}

RowVec encoder_forward(const TokenSequence& tokens, const EncoderWeights& weights, const EncoderConfig& config,
                       EncoderTrace* trace) {
  config.validate();
  const std::size_t n = checked_length(tokens, config);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto heads = static_cast<Eigen::Index>(config.num_heads);
  const auto dh = static_cast<Eigen::Index>(config.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  EncoderTrace local;
  EncoderTrace& t = trace ? *trace : local;
  t.ids.assign(tokens.ids.begin(), tokens.ids.begin() + static_cast<std::ptrdiff_t>(n));
  t.layers.assign(weights.layers.size(), {});

  Mat x(rows, static_cast<Eigen::Index>(config.model_dim));
  for (Eigen::Index i = 0; i < rows; ++i) {
    x.row(i) = weights.token_embedding.row(t.ids[static_cast<std::size_t>(i)]) + weights.position_embedding.row(i);
  }

  for (std::size_t li = 0; li < weights.layers.size(); ++li) {
    const auto& w = weights.layers[li];
    auto& lt = t.layers[li];
    lt.input = x;
    lt.attn_in = layer_norm(x, w.ln1_gamma, w.ln1_beta, lt.ln1);
    lt.q = affine(lt.attn_in, w.wq, w.bq);
    lt.k = affine(lt.attn_in, w.wk, w.bk);
    lt.v = affine(lt.attn_in, w.wv, w.bv);
    lt.context.resize(rows, x.cols());
    lt.probs.resize(static_cast<std::size_t>(heads));
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto cols = Eigen::seqN(h * dh, dh);
      Mat scores = lt.q(Eigen::all, cols) * lt.k(Eigen::all, cols).transpose() * scale;
      Mat& p = lt.probs[static_cast<std::size_t>(h)];
      p.resize(rows, rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        // Causal rows only see keys 0..i.
        const Eigen::Index visible = config.causal ? i + 1 : rows;
        const double max = scores.row(i).head(visible).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index j = 0; j < visible; ++j) {
          p(i, j) = std::exp(scores(i, j) - max);
          sum += p(i, j);
        }
        for (Eigen::Index j = 0; j < visible; ++j) p(i, j) /= sum;
        for (Eigen::Index j = visible; j < rows; ++j) p(i, j) = 0.0;
      }
      lt.context(Eigen::all, cols) = p * lt.v(Eigen::all, cols);
    }
    lt.mid = x + affine(lt.context, w.wo, w.bo);
    lt.ffn_in = layer_norm(lt.mid, w.ln2_gamma, w.ln2_beta, lt.ln2);
    lt.ffn_pre = affine(lt.ffn_in, w.w1, w.b1);
    lt.ffn_act = lt.ffn_pre.unaryExpr([](double v) { return gelu(v); });
    x = lt.mid + affine(lt.ffn_act, w.w2, w.b2);
  }

  t.final_input = x;
  t.output = layer_norm(x, weights.final_ln_gamma, weights.final_ln_beta, t.final_ln);
  t.pooled_position = config.pooling == Pooling::Cls ? 0 : n - 1;
  return t.output.row(static_cast<Eigen::Index>(t.pooled_position));
}

void encoder_backward(const EncoderTrace& t, const EncoderWeights& weights, const EncoderConfig& config,
                      const RowVec& d_pooled, EncoderWeights& grads) {
  const auto rows = t.output.rows();
  const auto heads = static_cast<Eigen::Index>(config.num_heads);
  const auto dh = static_cast<Eigen::Index>(config.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (d_pooled.size() != t.output.cols()) throw Error("encoder_backward: gradient has wrong dimension");

  Mat d_out = Mat::Zero(rows, t.output.cols());
  d_out.row(static_cast<Eigen::Index>(t.pooled_position)) = d_pooled;
  Mat dx = layer_norm_backward(d_out, t.final_ln, weights.final_ln_gamma, grads.final_ln_gamma, grads.final_ln_beta);

  for (std::size_t li = weights.layers.size(); li-- > 0;) {
    const auto& w = weights.layers[li];
    auto& g = grads.layers[li];
    const auto& lt = t.layers[li];

    // Feed-forward block: x = mid + gelu(ln2(mid) W1 + b1) W2 + b2.
    g.w2 += lt.ffn_act.transpose() * dx;
    g.b2.row(0) += dx.colwise().sum();
    Mat d_pre = (dx * w.w2.transpose()).array() * lt.ffn_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
    g.w1 += lt.ffn_in.transpose() * d_pre;
    g.b1.row(0) += d_pre.colwise().sum();
    Mat d_mid = dx + layer_norm_backward(d_pre * w.w1.transpose(), lt.ln2, w.ln2_gamma, g.ln2_gamma, g.ln2_beta);

    // Attention block: mid = input + context Wo + bo.
    g.wo += lt.context.transpose() * d_mid;
    g.bo.row(0) += d_mid.colwise().sum();
    const Mat d_context = d_mid * w.wo.transpose();
    Mat dq(rows, dx.cols()), dk(rows, dx.cols()), dv(rows, dx.cols());
    for (Eigen::Index h = 0; h < heads; ++h) {
      const auto cols = Eigen::seqN(h * dh, dh);
      const Mat& p = lt.probs[static_cast<std::size_t>(h)];
      const Mat d_ctx_h = d_context(Eigen::all, cols);
      const Mat dp = d_ctx_h * lt.v(Eigen::all, cols).transpose();
      dv(Eigen::all, cols) = p.transpose() * d_ctx_h;
      const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
      Mat ds = p.array() * (dp.colwise() - row_dot).array();
      ds *= scale;
      dq(Eigen::all, cols) = ds * lt.k(Eigen::all, cols);
      dk(Eigen::all, cols) = ds.transpose() * lt.q(Eigen::all, cols);
    }
    g.wq += lt.attn_in.transpose() * dq;
    g.bq.row(0) += dq.colwise().sum();
    g.wk += lt.attn_in.transpose() * dk;
    g.bk.row(0) += dk.colwise().sum();
    g.wv += lt.attn_in.transpose() * dv;
    g.bv.row(0) += dv.colwise().sum();
    const Mat d_attn_in = dq * w.wq.transpose() + dk * w.wk.transpose() + dv * w.wv.transpose();
    dx = d_mid + layer_norm_backward(d_attn_in, lt.ln1, w.ln1_gamma, g.ln1_gamma, g.ln1_beta);
  }

  for (Eigen::Index i = 0; i < rows; ++i) {
    grads.token_embedding.row(t.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    grads.position_embedding.row(i) += dx.row(i);
  }
}

RowVec random_projection_encode(const TokenSequence& tokens, std::uint64_t seed, std::size_t dim) {
  if (dim == 0) throw ConfigError("random projection dimension must be positive");
  const Rng root = Rng(seed).derive("random-projection");
  RowVec sum = RowVec::Zero(static_cast<Eigen::Index>(dim));
  std::size_t count = 0;
  for (std::size_t i = 0; i < tokens.ids.size(); ++i) {
    if (tokens.attention_mask.at(i) == 0) continue;
    Rng rng = root.derive(static_cast<std::uint64_t>(tokens.ids[i]));
    RowVec v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    sum += v / v.norm();
    ++count;
  }
  if (count == 0) throw Error("token sequence has no unpadded positions");
  return sum / static_cast<double>(count);
}

}  // namespace readability
