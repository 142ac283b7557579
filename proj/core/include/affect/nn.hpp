#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "affect/ltc.hpp"
#include "affect/ops.hpp"
#include "affect/rng.hpp"
#include "affect/tensor.hpp"

namespace affect::nn {

using autograd::Tensor;

// Fusion order is fixed: raw EEG embedding first, then the feature
// encoders, personality last.
enum class Modality {
  RawEEG = 0,
  PSD,
  DE,
  Stats,
  Asym,
  HRV,
  EDA,
  HR,
  Temp,
  Personality,
};
constexpr int kNumModalities = 10;

const std::array<Modality, kNumModalities>& fusion_order();
std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);

constexpr std::uint32_t modality_bit(Modality m) {
  return 1u << static_cast<int>(m);
}
constexpr std::uint32_t kAllModalities = (1u << kNumModalities) - 1;

struct ModelConfig {
  std::array<int, 3> cnn_filters{48, 64, 48};
  int kernel = 7;
  int padding = 3;
  int pool_window = 2;
  int pool_stride = 2;
  int lnn_hidden = 128;
  int lnn_layers = 1;
  int attention_dim = 32;
  int latent_dim = 128;  // D_z
  int ae_hidden = 256;
  std::vector<int> classifier_dims{256, 128};
  double dropout = 0.3;
  int eeg_channels = 14;
  int eeg_timesteps = 256;
  int n_classes = 7;
  std::uint32_t modality_mask = kAllModalities;
  // Hidden widths of the per-modality feature encoders (RawEEG entry unused).
  std::array<std::vector<int>, kNumModalities> encoder_dims = {
      std::vector<int>{},          // RawEEG (CNN+LNN+attention path)
      std::vector<int>{64, 32},    // PSD
      std::vector<int>{64, 32},    // DE
      std::vector<int>{128, 64, 32},  // Stats
      std::vector<int>{16, 8},     // Asym
      std::vector<int>{32, 16},    // HRV
      std::vector<int>{32, 16},    // EDA
      std::vector<int>{32, 16},    // HR
      std::vector<int>{32, 16},    // Temp
      std::vector<int>{32, 16},    // Personality
  };

  bool has(Modality m) const { return (modality_mask & modality_bit(m)) != 0; }
  // Input feature width per modality (PSD/DE/Stats depend on channel count).
  int feature_width(Modality m) const;
  // Encoder output width contributed to the fused vector.
  int encoded_width(Modality m) const;
  // D_fused = sum of enabled encoder outputs.
  int fused_width() const;
  // T' after the CNN pooling stages.
  int cnn_out_steps() const;

  void validate() const;
  // Miniature configuration used by the end-to-end gradient check.
  static ModelConfig miniature();
};

struct LinearLayer {
  Tensor w;  // (in, out)
  Tensor b;  // (out)
};

struct BatchNormLayer {
  Tensor gamma, beta;
  Tensor running_mean, running_var;  // state, not trainable
};

struct ConvBlock {
  Tensor w;  // (C_out, C_in, k)
  Tensor b;  // (C_out)
  BatchNormLayer bn;
};

struct TemporalAttention {
  Tensor w_a;  // (d_a, d_h)
  Tensor b_a;  // (d_a)
  Tensor v;    // (d_a)
};

struct FusionAutoencoder {
  LinearLayer enc_hidden, enc_out;  // D_fused -> H -> D_z
  LinearLayer dec_hidden, dec_out;  // D_z -> H -> D_fused
};

// Everything the full forward pass computes, kept for the loss and the
// post-hoc analyses.
struct ModelOutput {
  Tensor logits;          // (B, n_classes)
  Tensor attention;       // (B, T'), defined only when RawEEG is enabled
  Tensor latent;          // (B, D_z)
  Tensor fused;           // (B, D_fused)
  Tensor reconstruction;  // (B, D_fused)
};

// One minibatch of model inputs: raw EEG plus flattened feature blocks.
struct Batch {
  Tensor eeg_raw;                      // (B, C, T)
  std::map<Modality, Tensor> features; // (B, width) each
  std::vector<int> labels;
  int size = 0;
};

class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);

  ModelOutput forward(const Batch& batch, bool training);

  // Trainable parameters in a stable order with stable names.
  const std::vector<std::pair<std::string, Tensor>>& parameters() const { return params_; }
  // Parameters plus batchnorm running statistics (checkpoint contents).
  std::vector<std::pair<std::string, Tensor>> state() const;
  long long trainable_parameter_count() const;

  const ModelConfig& config() const { return cfg_; }
  ltc::LNNStack& lnn() { return lnn_; }
  const ltc::LNNStack& lnn() const { return lnn_; }
  const TemporalAttention& attention() const { return attention_; }

 private:
  Tensor encode_modality(Modality m, const Tensor& input, bool training);
  std::pair<Tensor, Tensor> attention_pool(const Tensor& hidden);
  std::pair<Tensor, Tensor> autoencode(const Tensor& fused, bool training);
  Tensor classify(const Tensor& latent, bool training);

  ModelConfig cfg_;
  Rng dropout_rng_;
  std::array<ConvBlock, 3> cnn_;
  ltc::LNNStack lnn_;
  TemporalAttention attention_;
  std::array<std::vector<LinearLayer>, kNumModalities> encoders_;
  FusionAutoencoder ae_;
  std::vector<LinearLayer> classifier_;
  std::vector<BatchNormLayer> classifier_bn_;
  LinearLayer classifier_out_;
  std::vector<std::pair<std::string, Tensor>> params_;
};

// Standalone pieces, exposed so tests can exercise them in isolation.
Tensor conv_block_forward(const ConvBlock& block, const Tensor& x, int padding,
                          int pool_window, int pool_stride, double dropout_p,
                          bool training, Rng& rng);
std::pair<Tensor, Tensor> attention_pool(const TemporalAttention& attn, const Tensor& hidden);

}  // namespace affect::nn
