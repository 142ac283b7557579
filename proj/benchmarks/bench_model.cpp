#include <benchmark/benchmark.h>

#include <affect/nn.hpp>
#include <affect/ops.hpp>
#include <affect/rng.hpp>
#include <affect/train.hpp>

using affect::Rng;
using affect::autograd::Tensor;

namespace {

affect::nn::Batch random_batch(const affect::nn::ModelConfig& cfg, int b, std::uint64_t seed) {
  Rng rng(seed);
  affect::nn::Batch batch;
  batch.size = b;
  std::vector<double> eeg(static_cast<std::size_t>(b) * cfg.eeg_channels * cfg.eeg_timesteps);
  for (double& v : eeg) v = rng.normal();
  batch.eeg_raw = Tensor::from_data({b, cfg.eeg_channels, cfg.eeg_timesteps}, std::move(eeg));
  for (affect::nn::Modality m : affect::nn::fusion_order()) {
    if (m == affect::nn::Modality::RawEEG || !cfg.has(m)) continue;
    std::vector<double> x(static_cast<std::size_t>(b) * cfg.feature_width(m));
    for (double& v : x) v = rng.normal();
    batch.features[m] = Tensor::from_data({b, cfg.feature_width(m)}, std::move(x));
  }
  for (int i = 0; i < b; ++i) batch.labels.push_back(i % cfg.n_classes);
  return batch;
}

}  // namespace

static void BM_model_forward_eval(benchmark::State& state) {
  affect::nn::ModelConfig cfg;
  affect::nn::Model model(cfg, 1);
  affect::nn::Batch batch = random_batch(cfg, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(batch, false));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_model_forward_eval)->Arg(1)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_model_train_step(benchmark::State& state) {
  affect::nn::ModelConfig cfg;
  affect::nn::Model model(cfg, 1);
  affect::nn::Batch batch = random_batch(cfg, static_cast<int>(state.range(0)), 3);
  affect::train::TrainConfig tcfg;
  tcfg.class_weights.assign(7, 1.0);
  affect::train::AdamW opt(model.parameters(), tcfg.weight_decay);
  for (auto _ : state) {
    affect::nn::ModelOutput out = model.forward(batch, true);
    Tensor ce = affect::train::smoothed_weighted_ce(out.logits, batch.labels, tcfg.class_weights,
                                                    tcfg.label_smoothing);
    Tensor err = affect::autograd::sub(out.reconstruction, out.fused);
    Tensor loss = affect::train::composite_loss(
        ce, affect::autograd::mean_all(affect::autograd::mul(err, err)), 0, tcfg);
    opt.zero_grad();
    affect::autograd::backward(loss);
    affect::train::clip_gradients(model.parameters(), tcfg.grad_clip);
    opt.step(1e-4);
    benchmark::DoNotOptimize(loss.item());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_model_train_step)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_ltc_forward(benchmark::State& state) {
  Rng rng(4);
  affect::ltc::LNNStack stack = affect::ltc::init_stack(48, 128, 1, rng, 0.0);
  const int b = static_cast<int>(state.range(0));
  std::vector<double> data(static_cast<std::size_t>(b) * 32 * 48);
  for (double& v : data) v = rng.normal();
  Tensor seq = Tensor::from_data({b, 32, 48}, std::move(data));
  Rng drop(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(affect::ltc::ltc_forward(stack, seq, false, drop));
  }
}
BENCHMARK(BM_ltc_forward)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);
