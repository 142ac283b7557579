#include "affect/nn.hpp"

#include <cmath>

#include "affect/errors.hpp"

namespace affect::nn {

using namespace autograd;

const std::array<Modality, kNumModalities>& fusion_order() {
  static const std::array<Modality, kNumModalities> order = {
      Modality::RawEEG, Modality::PSD,  Modality::DE,   Modality::Stats,
      Modality::Asym,   Modality::HRV,  Modality::EDA,  Modality::HR,
      Modality::Temp,   Modality::Personality,
  };
  return order;
}

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::RawEEG: return "raw_eeg";
    case Modality::PSD: return "psd";
    case Modality::DE: return "de";
    case Modality::Stats: return "stats";
    case Modality::Asym: return "asym";
    case Modality::HRV: return "hrv";
    case Modality::EDA: return "eda";
    case Modality::HR: return "hr";
    case Modality::Temp: return "temp";
    case Modality::Personality: return "personality";
  }
  return "?";
}

Modality modality_from_name(const std::string& name) {
  for (Modality m : fusion_order()) {
    if (modality_name(m) == name) return m;
  }
  throw UsageError("unknown modality '" + name + "'");
}

int ModelConfig::feature_width(Modality m) const {
  switch (m) {
    case Modality::RawEEG: return eeg_channels * eeg_timesteps;
    case Modality::PSD: return eeg_channels * 5;
    case Modality::DE: return eeg_channels * 5;
    case Modality::Stats: return eeg_channels * 20;
    case Modality::Asym: return 3;
    case Modality::HRV: return 7;
    case Modality::EDA: return 8;
    case Modality::HR: return 7;
    case Modality::Temp: return 6;
    case Modality::Personality: return 5;
  }
  return 0;
}

int ModelConfig::encoded_width(Modality m) const {
  if (m == Modality::RawEEG) return lnn_hidden;
  const auto& dims = encoder_dims[static_cast<std::size_t>(m)];
  return dims.empty() ? 0 : dims.back();
}

int ModelConfig::fused_width() const {
  int total = 0;
  for (Modality m : fusion_order()) {
    if (has(m)) total += encoded_width(m);
  }
  return total;
}

int ModelConfig::cnn_out_steps() const {
  int t = eeg_timesteps;
  for (int i = 0; i < 3; ++i) t = (t - pool_window) / pool_stride + 1;
  return t;
}

void ModelConfig::validate() const {
  if (modality_mask == 0) throw DataError("model config: no modalities enabled");
  if ((modality_mask & ~kAllModalities) != 0) throw DataError("model config: bad modality mask");
  if (n_classes < 2) throw DataError("model config: need at least 2 classes");
  for (Modality m : fusion_order()) {
    if (m == Modality::RawEEG) continue;
    if (has(m) && encoder_dims[static_cast<std::size_t>(m)].empty()) {
      throw DataError("model config: modality " + modality_name(m) + " has no encoder dims");
    }
  }
  if (has(Modality::RawEEG) && cnn_out_steps() < 1) {
    throw DataError("model config: eeg_timesteps too small for three pooling stages");
  }
}

ModelConfig ModelConfig::miniature() {
  ModelConfig cfg;
  cfg.cnn_filters = {4, 4, 4};
  cfg.lnn_hidden = 8;
  cfg.attention_dim = 4;
  cfg.latent_dim = 8;
  cfg.ae_hidden = 12;
  cfg.classifier_dims = {12, 8};
  cfg.eeg_timesteps = 32;
  cfg.n_classes = 2;
  cfg.dropout = 0.0;  // keeps the loss differentiable for finite differences
  for (Modality m : fusion_order()) {
    if (m == Modality::RawEEG) continue;
    cfg.encoder_dims[static_cast<std::size_t>(m)] = {6, 4};
  }
  return cfg;
}

namespace {

LinearLayer make_linear(int in, int out, Rng& rng, double gain = 1.0) {
  LinearLayer l;
  l.w = Tensor::xavier_uniform({in, out}, in, out, gain, rng);
  l.b = Tensor::zeros({out}, true);
  return l;
}

BatchNormLayer make_batchnorm(int width) {
  BatchNormLayer bn;
  bn.gamma = Tensor::full({width}, 1.0, true);
  bn.beta = Tensor::zeros({width}, true);
  bn.running_mean = Tensor::zeros({width});
  bn.running_var = Tensor::full({width}, 1.0);
  return bn;
}

Tensor linear_forward(const LinearLayer& l, const Tensor& x) {
  return add(matmul(x, l.w), l.b);
}

}  // namespace

Tensor conv_block_forward(const ConvBlock& block, const Tensor& x, int padding,
                          int pool_window, int pool_stride, double dropout_p,
                          bool training, Rng& rng) {
  Tensor c = conv1d(x, block.w, block.b, 1, padding);
  Tensor bn = batchnorm(c, block.bn.gamma, block.bn.beta,
                        const_cast<Tensor&>(block.bn.running_mean),
                        const_cast<Tensor&>(block.bn.running_var), 0.1, 1e-5, training);
  Tensor act = relu(bn);
  Tensor pooled = maxpool1d(act, pool_window, pool_stride);
  return dropout(pooled, dropout_p, training, rng);
}

std::pair<Tensor, Tensor> attention_pool(const TemporalAttention& attn, const Tensor& hidden) {
  if (hidden.ndim() != 3) {
    throw DataError("attention_pool: expected (B, T, d_h), got " + shape_str(hidden.shape()));
  }
  const int batch = hidden.dim(0);
  const int steps = hidden.dim(1);
  const int d_a = attn.w_a.dim(0);

  Tensor waT = transpose(attn.w_a);                 // (d_h, d_a)
  Tensor v_col = reshape(attn.v, {d_a, 1});         // (d_a, 1)

  std::vector<Tensor> scores;
  std::vector<Tensor> states;
  scores.reserve(static_cast<std::size_t>(steps));
  states.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    Tensor h_t = select(hidden, 1, t);              // (B, d_h)
    Tensor e_t = matmul(tanh_t(add(matmul(h_t, waT), attn.b_a)), v_col);  // (B, 1)
    scores.push_back(e_t);
    states.push_back(h_t);
  }
  Tensor weights = softmax(concat(scores, 1), 1);   // (B, T)

  Tensor pooled;
  for (int t = 0; t < steps; ++t) {
    Tensor a_t = reshape(select(weights, 1, t), {batch, 1});
    Tensor term = mul(a_t, states[static_cast<std::size_t>(t)]);
    pooled = t == 0 ? term : add(pooled, term);
  }
  return {pooled, weights};
}

Model::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), dropout_rng_(Rng(seed).stream("dropout")) {
  cfg_.validate();
  Rng init = Rng(seed).stream("init");

  auto track = [this](const std::string& name, const Tensor& t) {
    params_.emplace_back(name, t);
  };

  if (cfg_.has(Modality::RawEEG)) {
    int c_in = cfg_.eeg_channels;
    for (int i = 0; i < 3; ++i) {
      const int c_out = cfg_.cnn_filters[static_cast<std::size_t>(i)];
      ConvBlock& blk = cnn_[static_cast<std::size_t>(i)];
      blk.w = Tensor::xavier_uniform({c_out, c_in, cfg_.kernel}, c_in * cfg_.kernel,
                                     c_out * cfg_.kernel, 1.0, init);
      blk.b = Tensor::zeros({c_out}, true);
      blk.bn = make_batchnorm(c_out);
      const std::string prefix = "nn.cnn.block" + std::to_string(i) + ".";
      track(prefix + "conv.w", blk.w);
      track(prefix + "conv.b", blk.b);
      track(prefix + "bn.gamma", blk.bn.gamma);
      track(prefix + "bn.beta", blk.bn.beta);
      c_in = c_out;
    }

    lnn_ = ltc::init_stack(cfg_.cnn_filters[2], cfg_.lnn_hidden, cfg_.lnn_layers, init,
                           cfg_.dropout);
    for (const auto& [name, t] : ltc::parameters(lnn_)) track(name, t);

    attention_.w_a = Tensor::xavier_uniform({cfg_.attention_dim, cfg_.lnn_hidden},
                                            cfg_.lnn_hidden, cfg_.attention_dim, 1.0, init);
    attention_.b_a = Tensor::zeros({cfg_.attention_dim}, true);
    attention_.v = Tensor::xavier_uniform({cfg_.attention_dim}, cfg_.attention_dim, 1, 1.0, init);
    track("nn.attention.W_a", attention_.w_a);
    track("nn.attention.b_a", attention_.b_a);
    track("nn.attention.v", attention_.v);
  }

  for (Modality m : fusion_order()) {
    if (m == Modality::RawEEG || !cfg_.has(m)) continue;
    auto& stack = encoders_[static_cast<std::size_t>(m)];
    int in = cfg_.feature_width(m);
    const auto& dims = cfg_.encoder_dims[static_cast<std::size_t>(m)];
    for (std::size_t i = 0; i < dims.size(); ++i) {
      stack.push_back(make_linear(in, dims[i], init));
      const std::string prefix = "nn.encoder." + modality_name(m) + "." + std::to_string(i) + ".";
      track(prefix + "w", stack.back().w);
      track(prefix + "b", stack.back().b);
      in = dims[i];
    }
  }

  const int fused = cfg_.fused_width();
  ae_.enc_hidden = make_linear(fused, cfg_.ae_hidden, init);
  ae_.enc_out = make_linear(cfg_.ae_hidden, cfg_.latent_dim, init);
  ae_.dec_hidden = make_linear(cfg_.latent_dim, cfg_.ae_hidden, init);
  ae_.dec_out = make_linear(cfg_.ae_hidden, fused, init);
  track("nn.ae.enc0.w", ae_.enc_hidden.w);
  track("nn.ae.enc0.b", ae_.enc_hidden.b);
  track("nn.ae.enc1.w", ae_.enc_out.w);
  track("nn.ae.enc1.b", ae_.enc_out.b);
  track("nn.ae.dec0.w", ae_.dec_hidden.w);
  track("nn.ae.dec0.b", ae_.dec_hidden.b);
  track("nn.ae.dec1.w", ae_.dec_out.w);
  track("nn.ae.dec1.b", ae_.dec_out.b);

  int in = cfg_.latent_dim;
  for (std::size_t i = 0; i < cfg_.classifier_dims.size(); ++i) {
    const int width = cfg_.classifier_dims[i];
    classifier_.push_back(make_linear(in, width, init));
    classifier_bn_.push_back(make_batchnorm(width));
    const std::string prefix = "nn.classifier." + std::to_string(i) + ".";
    track(prefix + "w", classifier_.back().w);
    track(prefix + "b", classifier_.back().b);
    track(prefix + "bn.gamma", classifier_bn_.back().gamma);
    track(prefix + "bn.beta", classifier_bn_.back().beta);
    in = width;
  }
  // final layer: Xavier with gain 0.1 keeps initial logits small
  classifier_out_ = make_linear(in, cfg_.n_classes, init, 0.1);
  track("nn.classifier.out.w", classifier_out_.w);
  track("nn.classifier.out.b", classifier_out_.b);
}

Tensor Model::encode_modality(Modality m, const Tensor& input, bool training) {
  const int want = cfg_.feature_width(m);
  if (input.ndim() != 2 || input.dim(1) != want) {
    throw DataError("encoder " + modality_name(m) + ": expected width " +
                    std::to_string(want) + ", got " + shape_str(input.shape()));
  }
  // PSD/DE/Stats carry dropout on every layer (deeper encoders); the small
  // vector encoders only on the hidden layer.
  const bool dropout_on_last =
      m == Modality::PSD || m == Modality::DE || m == Modality::Stats;
  const auto& stack = encoders_[static_cast<std::size_t>(m)];
  Tensor h = input;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    h = relu(linear_forward(stack[i], h));
    const bool last = i + 1 == stack.size();
    if (!last || dropout_on_last) h = dropout(h, cfg_.dropout, training, dropout_rng_);
  }
  return h;
}

std::pair<Tensor, Tensor> Model::attention_pool(const Tensor& hidden) {
  return nn::attention_pool(attention_, hidden);
}

std::pair<Tensor, Tensor> Model::autoencode(const Tensor& fused, bool training) {
  Tensor h = relu(linear_forward(ae_.enc_hidden, fused));
  h = dropout(h, cfg_.dropout, training, dropout_rng_);
  Tensor z = relu(linear_forward(ae_.enc_out, h));
  z = dropout(z, cfg_.dropout, training, dropout_rng_);
  Tensor d = relu(linear_forward(ae_.dec_hidden, z));
  d = dropout(d, cfg_.dropout, training, dropout_rng_);
  Tensor rec = linear_forward(ae_.dec_out, d);
  return {z, rec};
}

Tensor Model::classify(const Tensor& latent, bool training) {
  Tensor h = latent;
  for (std::size_t i = 0; i < classifier_.size(); ++i) {
    h = linear_forward(classifier_[i], h);
    h = batchnorm(h, classifier_bn_[i].gamma, classifier_bn_[i].beta,
                  classifier_bn_[i].running_mean, classifier_bn_[i].running_var,
                  0.1, 1e-5, training);
    h = relu(h);
    h = dropout(h, cfg_.dropout, training, dropout_rng_);
  }
  return linear_forward(classifier_out_, h);
}

ModelOutput Model::forward(const Batch& batch, bool training) {
  ModelOutput out;
  std::vector<Tensor> encoded;

  for (Modality m : fusion_order()) {
    if (!cfg_.has(m)) continue;
    if (m == Modality::RawEEG) {
      if (!batch.eeg_raw.defined()) throw DataError("model: batch missing raw EEG");
      if (batch.eeg_raw.ndim() != 3 || batch.eeg_raw.dim(1) != cfg_.eeg_channels ||
          batch.eeg_raw.dim(2) != cfg_.eeg_timesteps) {
        throw DataError("model: raw EEG shape " + shape_str(batch.eeg_raw.shape()) +
                        " does not match (B, " + std::to_string(cfg_.eeg_channels) + ", " +
                        std::to_string(cfg_.eeg_timesteps) + ")");
      }
      Tensor h = batch.eeg_raw;
      for (int i = 0; i < 3; ++i) {
        h = conv_block_forward(cnn_[static_cast<std::size_t>(i)], h, cfg_.padding,
                               cfg_.pool_window, cfg_.pool_stride, cfg_.dropout, training,
                               dropout_rng_);
      }
      Tensor seq = swap_last_two(h);  // (B, T', n3)
      Tensor hidden = ltc::ltc_forward(lnn_, seq, training, dropout_rng_);
      auto [pooled, weights] = attention_pool(hidden);
      out.attention = weights;
      encoded.push_back(pooled);
    } else {
      auto it = batch.features.find(m);
      if (it == batch.features.end()) {
        throw DataError("model: batch missing modality " + modality_name(m));
      }
      encoded.push_back(encode_modality(m, it->second, training));
    }
  }

  out.fused = encoded.size() == 1 ? encoded.front() : concat(encoded, 1);
  auto [z, rec] = autoencode(out.fused, training);
  out.latent = z;
  out.reconstruction = rec;
  out.logits = classify(z, training);
  return out;
}

std::vector<std::pair<std::string, Tensor>> Model::state() const {
  std::vector<std::pair<std::string, Tensor>> all = params_;
  if (cfg_.has(Modality::RawEEG)) {
    for (int i = 0; i < 3; ++i) {
      const std::string prefix = "nn.cnn.block" + std::to_string(i) + ".bn.";
      all.emplace_back(prefix + "running_mean", cnn_[static_cast<std::size_t>(i)].bn.running_mean);
      all.emplace_back(prefix + "running_var", cnn_[static_cast<std::size_t>(i)].bn.running_var);
    }
  }
  for (std::size_t i = 0; i < classifier_bn_.size(); ++i) {
    const std::string prefix = "nn.classifier." + std::to_string(i) + ".bn.";
    all.emplace_back(prefix + "running_mean", classifier_bn_[i].running_mean);
    all.emplace_back(prefix + "running_var", classifier_bn_[i].running_var);
  }
  return all;
}

long long Model::trainable_parameter_count() const {
  long long total = 0;
  for (const auto& [name, t] : params_) total += t.numel();
  return total;
}

}  // namespace affect::nn
