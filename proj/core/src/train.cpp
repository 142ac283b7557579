#include "affect/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "affect/errors.hpp"
#include "affect/ops.hpp"

namespace affect::train {

using namespace autograd;

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw DataError("train config: lr must be positive");
  if (batch_size < 1) throw DataError("train config: batch size must be >= 1");
  if (epochs < 1) throw DataError("train config: epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw DataError("train config: warmup must lie in [0, epochs]");
  }
  if (!(label_smoothing >= 0.0) || !(label_smoothing < 1.0)) {
    throw DataError("train config: label smoothing must lie in [0, 1)");
  }
  if (patience < 1 || patience > epochs) {
    throw DataError("train config: patience must lie in [1, epochs]");
  }
  if (!(grad_clip > 0.0)) throw DataError("train config: grad clip must be positive");
  if (!(weight_decay >= 0.0)) throw DataError("train config: weight decay must be >= 0");
  if (!(lambda0 >= 0.0)) throw DataError("train config: lambda0 must be >= 0");
}

Tensor smoothed_weighted_ce(const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<double>& weights, double epsilon) {
  if (logits.ndim() != 2 || static_cast<std::size_t>(logits.dim(0)) != labels.size()) {
    throw DataError("smoothed_weighted_ce: logits " + shape_str(logits.shape()) +
                    " do not match " + std::to_string(labels.size()) + " labels");
  }
  const int batch = logits.dim(0);
  const int k = logits.dim(1);
  for (int y : labels) {
    if (y < 0 || y >= k) throw DataError("smoothed_weighted_ce: label out of range");
  }
  if (!weights.empty() && static_cast<int>(weights.size()) != k) {
    throw DataError("smoothed_weighted_ce: weight vector width mismatch");
  }

  // per-sample target distribution scaled by the true-class weight
  std::vector<double> target(static_cast<std::size_t>(batch) * k);
  for (int i = 0; i < batch; ++i) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    for (int c = 0; c < k; ++c) {
      const double t = (c == labels[static_cast<std::size_t>(i)] ? 1.0 - epsilon : 0.0) + epsilon / k;
      target[static_cast<std::size_t>(i) * k + c] = w * t;
    }
  }
  Tensor t = Tensor::from_data({batch, k}, std::move(target));
  Tensor lsm = log_softmax(logits, 1);
  return mul_scalar(sum_all(mul(t, lsm)), -1.0 / batch);
}

double lambda_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch > cfg.epochs) throw DataError("lambda_at: epoch out of range");
  return cfg.lambda0 * (1.0 - static_cast<double>(epoch) / cfg.epochs);
}

Tensor composite_loss(const Tensor& ce, const Tensor& recon_mse, int epoch,
                      const TrainConfig& cfg) {
  return add(ce, mul_scalar(recon_mse, lambda_at(epoch, cfg)));
}

double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0 || epoch >= cfg.epochs) throw DataError("lr_at: epoch out of range");
  if (epoch < cfg.warmup_epochs) {
    return cfg.lr * static_cast<double>(epoch + 1) / cfg.warmup_epochs;
  }
  const int span = std::max(1, cfg.epochs - cfg.warmup_epochs);
  const double phase = static_cast<double>(epoch - cfg.warmup_epochs) / span;
  return cfg.lr * 0.5 * (1.0 + std::cos(kPi * phase));
}

double clip_gradients(const std::vector<std::pair<std::string, Tensor>>& params,
                      double max_norm) {
  double sq = 0.0;
  for (const auto& [name, p] : params) {
    for (double g : const_cast<Tensor&>(p).grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (const auto& [name, p] : params) {
      for (double& g : const_cast<Tensor&>(p).grad()) g *= scale;
    }
  }
  return norm;
}

AdamW::AdamW(std::vector<std::pair<std::string, Tensor>> params, double weight_decay,
             double beta1, double beta2, double eps)
    : params_(std::move(params)),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const auto& [name, p] : params_) {
    m_.emplace_back(p.data().size(), 0.0);
    v_.emplace_back(p.data().size(), 0.0);
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].second;
    const std::vector<double>& g = p.grad();
    std::vector<double>& value = p.data();
    std::vector<double>& m = m_[i];
    std::vector<double>& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= lr * (mhat / (std::sqrt(vhat) + eps_) + weight_decay_ * value[j]);
    }
  }
}

std::string history_csv(const std::vector<HistoryRow>& history) {
  std::string out = "epoch,lr,train_loss,ce,recon,test_macro_f1,test_accuracy\n";
  char buf[256];
  for (const HistoryRow& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.epoch, r.lr,
                  r.train_loss, r.ce, r.recon, r.test_macro_f1, r.test_accuracy);
    out += buf;
  }
  return out;
}

StateSnapshot snapshot_state(const nn::Model& model) {
  StateSnapshot snap;
  for (const auto& [name, t] : model.state()) snap.emplace_back(name, t.data());
  return snap;
}

void restore_state(nn::Model& model, const StateSnapshot& snapshot) {
  auto state = model.state();
  if (state.size() != snapshot.size()) {
    throw DataError("restore_state: snapshot entry count mismatch");
  }
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i].first != snapshot[i].first ||
        state[i].second.data().size() != snapshot[i].second.size()) {
      throw DataError("restore_state: mismatch at '" + state[i].first + "'");
    }
    state[i].second.data() = snapshot[i].second;
  }
}

nn::Batch make_batch(const features::Dataset& ds, const std::vector<int>& indices,
                     const nn::ModelConfig& cfg) {
  using nn::Modality;
  nn::Batch batch;
  batch.size = static_cast<int>(indices.size());
  const int b = batch.size;

  if (cfg.has(Modality::RawEEG)) {
    std::vector<double> eeg;
    eeg.reserve(static_cast<std::size_t>(b) * cfg.eeg_channels * cfg.eeg_timesteps);
    for (int idx : indices) {
      const auto& s = ds.samples[static_cast<std::size_t>(idx)];
      eeg.insert(eeg.end(), s.eeg_raw.begin(), s.eeg_raw.end());
    }
    batch.eeg_raw = Tensor::from_data({b, cfg.eeg_channels, cfg.eeg_timesteps}, std::move(eeg));
  }

  auto gather = [&](Modality m, auto getter) {
    if (!cfg.has(m)) return;
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(b) * cfg.feature_width(m));
    for (int idx : indices) {
      const auto block = getter(ds.samples[static_cast<std::size_t>(idx)]);
      data.insert(data.end(), block.begin(), block.end());
    }
    batch.features[m] = Tensor::from_data({b, cfg.feature_width(m)}, std::move(data));
  };

  gather(Modality::PSD, [](const features::Sample& s) { return std::span<const double>(s.eeg.psd); });
  gather(Modality::DE, [](const features::Sample& s) { return std::span<const double>(s.eeg.de); });
  gather(Modality::Stats, [](const features::Sample& s) { return std::span<const double>(s.eeg.stats); });
  gather(Modality::Asym, [](const features::Sample& s) { return std::span<const double>(s.eeg.asym); });
  gather(Modality::HRV, [](const features::Sample& s) { return std::span<const double>(s.peripheral.hrv); });
  gather(Modality::EDA, [](const features::Sample& s) { return std::span<const double>(s.peripheral.eda); });
  gather(Modality::HR, [](const features::Sample& s) { return std::span<const double>(s.peripheral.hr); });
  gather(Modality::Temp, [](const features::Sample& s) { return std::span<const double>(s.peripheral.temp); });
  if (cfg.has(Modality::Personality)) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(b) * 5);
    for (int idx : indices) {
      for (int v : ds.samples[static_cast<std::size_t>(idx)].personality.big5) data.push_back(v);
    }
    batch.features[Modality::Personality] = Tensor::from_data({b, 5}, std::move(data));
  }

  batch.labels.reserve(indices.size());
  for (int idx : indices) {
    batch.labels.push_back(static_cast<int>(ds.samples[static_cast<std::size_t>(idx)].label));
  }
  return batch;
}

EvalResult evaluate(nn::Model& model, const features::Dataset& ds, features::Split split,
                    int batch_size) {
  EvalResult result;
  const std::vector<int> indices = ds.indices(split);
  for (std::size_t start = 0; start < indices.size(); start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(indices.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<int> chunk(indices.begin() + static_cast<long>(start), indices.begin() + static_cast<long>(end));
    nn::Batch batch = make_batch(ds, chunk, model.config());
    nn::ModelOutput out = model.forward(batch, false);
    Tensor probs = softmax(out.logits, 1);
    const int k = probs.dim(1);
    for (int i = 0; i < probs.dim(0); ++i) {
      std::vector<double> row(static_cast<std::size_t>(k));
      for (int c = 0; c < k; ++c) row[static_cast<std::size_t>(c)] = probs.at({i, c});
      result.probs.push_back(std::move(row));
      result.labels.push_back(batch.labels[static_cast<std::size_t>(i)]);
    }
  }
  return result;
}

TrainResult train_loop(nn::Model& model, const features::Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<int> train_idx = ds.indices(features::Split::Train);
  const std::vector<int> test_idx = ds.indices(features::Split::Test);
  if (train_idx.empty() || test_idx.empty()) {
    throw DataError("train_loop: dataset must carry both train and test splits");
  }

  AdamW optimizer(model.parameters(), cfg.weight_decay);
  Rng shuffle_rng = Rng(cfg.seed).stream("train/shuffle");

  TrainResult result;
  int stale = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg);
    std::vector<int> order = train_idx;
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0, ce_sum = 0.0, recon_sum = 0.0;
    long long seen = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<int> chunk(order.begin() + static_cast<long>(start), order.begin() + static_cast<long>(end));
      nn::Batch batch = make_batch(ds, chunk, model.config());

      nn::ModelOutput out = model.forward(batch, true);
      Tensor ce = smoothed_weighted_ce(out.logits, batch.labels, cfg.class_weights,
                                       cfg.label_smoothing);
      Tensor rec_err = sub(out.reconstruction, out.fused);
      Tensor recon = mean_all(mul(rec_err, rec_err));
      Tensor loss = composite_loss(ce, recon, epoch, cfg);

      optimizer.zero_grad();
      backward(loss);
      clip_gradients(model.parameters(), cfg.grad_clip);
      optimizer.step(lr);

      const double bs = static_cast<double>(chunk.size());
      loss_sum += loss.item() * bs;
      ce_sum += ce.item() * bs;
      recon_sum += recon.item() * bs;
      seen += chunk.size();
    }

    EvalResult eval = evaluate(model, ds, features::Split::Test);
    MetricsReport metrics = compute_metrics(eval.probs, eval.labels, model.config().n_classes);

    HistoryRow row;
    row.epoch = epoch;
    row.lr = lr;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.ce = ce_sum / static_cast<double>(seen);
    row.recon = recon_sum / static_cast<double>(seen);
    row.test_macro_f1 = metrics.macro_f1;
    row.test_accuracy = metrics.accuracy;
    result.history.push_back(row);

    if (metrics.macro_f1 > result.best_macro_f1 || result.best_epoch < 0) {
      result.best_macro_f1 = metrics.macro_f1;
      result.best_epoch = epoch;
      result.best_state = snapshot_state(model);
      stale = 0;
    } else {
      ++stale;
      if (stale >= cfg.patience) break;
    }
  }
  return result;
}

}  // namespace affect::train
