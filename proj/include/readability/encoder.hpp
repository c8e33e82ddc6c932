#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "readability/family.hpp"
#include "readability/rng.hpp"
#include "readability/tensor.hpp"
#include "readability/tokenizer.hpp"

namespace readability {

enum class Pooling { Cls, Eos };

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = 128;
  std::size_t model_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t feedforward_dim = 128;
  Pooling pooling = Pooling::Cls;
  bool causal = false;

  /// CLS pooling with bidirectional attention (A) or EOS pooling with a
  /// causal mask (B).
  static EncoderConfig for_family(ModelFamily family, std::size_t vocab_size);

  ModelFamily family() const { return pooling == Pooling::Cls ? ModelFamily::A : ModelFamily::B; }
  std::size_t head_dim() const { return model_dim / num_heads; }

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct EncoderLayerWeights {
  Mat ln1_gamma, ln1_beta;
  Mat wq, bq, wk, bk, wv, bv, wo, bo;
  Mat ln2_gamma, ln2_beta;
  Mat w1, b1, w2, b2;

  template <typename Self, typename F>
  static void visit(Self& self, const std::string& prefix, F&& f) {
    f(prefix + "attn.bk", self.bk);
    f(prefix + "attn.bo", self.bo);
    f(prefix + "attn.bq", self.bq);
    f(prefix + "attn.bv", self.bv);
    f(prefix + "attn.wk", self.wk);
    f(prefix + "attn.wo", self.wo);
    f(prefix + "attn.wq", self.wq);
    f(prefix + "attn.wv", self.wv);
    f(prefix + "ffn.b1", self.b1);
    f(prefix + "ffn.b2", self.b2);
    f(prefix + "ffn.w1", self.w1);
    f(prefix + "ffn.w2", self.w2);
    f(prefix + "ln1.beta", self.ln1_beta);
    f(prefix + "ln1.gamma", self.ln1_gamma);
    f(prefix + "ln2.beta", self.ln2_beta);
    f(prefix + "ln2.gamma", self.ln2_gamma);
  }
};

struct EncoderWeights {
  Mat token_embedding;     // vocab x d
  Mat position_embedding;  // max_len x d
  std::vector<EncoderLayerWeights> layers;
  Mat final_ln_gamma, final_ln_beta;

  /// Normal(0, init_std) matrices and embeddings, zero biases, unit
  /// layer-norm gains.
  static EncoderWeights init(const EncoderConfig& config, Rng& rng, double init_std = 0.02);
  static EncoderWeights zeros(const EncoderConfig& config);

  /// Visits every tensor in name order.
  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f("embed.position", self.position_embedding);
    f("embed.token", self.token_embedding);
    f("final_ln.beta", self.final_ln_beta);
    f("final_ln.gamma", self.final_ln_gamma);
    // Zero-padded layer index keeps name order equal to layer order.
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      char prefix[32];
      std::snprintf(prefix, sizeof(prefix), "layer%03zu.", i);
      EncoderLayerWeights::visit(self.layers[i], prefix, f);
    }
  }
};

/// Per-row layer-norm statistics kept for the backward pass.
struct LayerNormCache {
  Mat normalized;            // (x - mean) * rstd
  Eigen::VectorXd inv_std;   // one per row
};

struct EncoderLayerTrace {
  Mat input;
  LayerNormCache ln1;
  Mat attn_in;  // ln1 output
  Mat q, k, v;
  std::vector<Mat> probs;  // one n x n matrix per head
  Mat context;
  Mat mid;  // residual stream after attention
  LayerNormCache ln2;
  Mat ffn_in;
  Mat ffn_pre;  // before GELU
  Mat ffn_act;
};

/// Activations of one forward pass over the unpadded prefix.
struct EncoderTrace {
  std::vector<TokenId> ids;  // unpadded prefix
  std::vector<EncoderLayerTrace> layers;
  Mat final_input;
  LayerNormCache final_ln;
  Mat output;  // n x d, after the final layer-norm
  std::size_t pooled_position = 0;
};

/// Pre-norm transformer encoder. Padding never influences the result:
/// only the unpadded prefix takes part in attention. Returns the hidden
/// state at position 0 (CLS pooling) or at the last unpadded position (EOS
/// pooling). With a trace pointer the activations needed by
/// encoder_backward are recorded.
RowVec encoder_forward(const TokenSequence& tokens, const EncoderWeights& weights, const EncoderConfig& config,
                       EncoderTrace* trace = nullptr);

/// Accumulates d(loss)/d(weights) into grads given d(loss)/d(pooled).
void encoder_backward(const EncoderTrace& trace, const EncoderWeights& weights, const EncoderConfig& config,
                      const RowVec& d_pooled, EncoderWeights& grads);

/// Mean of seeded pseudo-random unit vectors, one per unpadded token id.
RowVec random_projection_encode(const TokenSequence& tokens, std::uint64_t seed, std::size_t dim);

}  // namespace readability
