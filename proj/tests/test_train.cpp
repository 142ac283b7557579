#include <doctest.h>

#include <affect/errors.hpp>
#include <affect/ops.hpp>
#include <affect/train.hpp>

#include <cmath>

using namespace affect::train;
using affect::Rng;
using affect::autograd::Tensor;

TEST_CASE("cross entropy vanishes for a confident correct prediction") {
  Tensor logits = Tensor::from_data({1, 3}, {30.0, 0.0, 0.0});
  Tensor loss = smoothed_weighted_ce(logits, {0}, {}, 0.0);
  CHECK(loss.item() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("cross entropy of uniform logits is ln K") {
  Tensor logits = Tensor::zeros({4, 7});
  Tensor loss = smoothed_weighted_ce(logits, {0, 3, 5, 6}, std::vector<double>(7, 1.0), 0.0);
  CHECK(loss.item() == doctest::Approx(std::log(7.0)).epsilon(1e-9));
}

TEST_CASE("smoothed weighted cross entropy matches the hand computation") {
  // 2-class toy, eps = 0.1, weights (2, 0.5), logits known
  Tensor logits = Tensor::from_data({2, 2}, {1.0, -1.0, 0.5, 0.25});
  const std::vector<int> labels = {0, 1};
  const std::vector<double> weights = {2.0, 0.5};
  const double eps = 0.1;

  double expected = 0.0;
  const double rows[2][2] = {{1.0, -1.0}, {0.5, 0.25}};
  for (int i = 0; i < 2; ++i) {
    const double mx = std::max(rows[i][0], rows[i][1]);
    const double z = std::exp(rows[i][0] - mx) + std::exp(rows[i][1] - mx);
    double sample = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double logp = rows[i][c] - mx - std::log(z);
      const double target = (c == labels[static_cast<std::size_t>(i)] ? 1.0 - eps : 0.0) + eps / 2.0;
      sample -= target * logp;
    }
    expected += weights[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] * sample;
  }
  expected /= 2.0;

  Tensor loss = smoothed_weighted_ce(logits, labels, weights, eps);
  CHECK(loss.item() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("composite loss anneals the reconstruction term linearly") {
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.lambda0 = 0.001;
  CHECK(lambda_at(0, cfg) == doctest::Approx(0.001));
  CHECK(lambda_at(200, cfg) == doctest::Approx(0.0));
  CHECK(lambda_at(100, cfg) == doctest::Approx(0.0005));

  Tensor ce = Tensor::scalar(2.0);
  Tensor recon = Tensor::scalar(10.0);
  CHECK(composite_loss(ce, recon, 0, cfg).item() == doctest::Approx(2.0 + 0.001 * 10.0));

  // monotone non-increasing in the epoch for fixed terms
  double prev = 1e300;
  for (int e = 0; e <= 200; e += 20) {
    const double v = composite_loss(ce, recon, e, cfg).item();
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("learning rate warms up linearly then follows the cosine") {
  TrainConfig cfg;
  cfg.lr = 5e-4;
  cfg.epochs = 200;
  cfg.warmup_epochs = 15;
  CHECK(lr_at(0, cfg) == doctest::Approx(5e-4 / 15.0));
  CHECK(lr_at(14, cfg) == doctest::Approx(5e-4));
  CHECK(lr_at(15, cfg) == doctest::Approx(5e-4));
  CHECK(lr_at(199, cfg) < 1e-7);

  // continuity at the junction and non-negativity everywhere
  double prev = lr_at(14, cfg);
  CHECK(std::abs(lr_at(15, cfg) - prev) < 1e-9);
  for (int e = 0; e < 200; ++e) CHECK(lr_at(e, cfg) >= 0.0);
}

TEST_CASE("gradient clipping uses the global norm") {
  Tensor a = Tensor::zeros({2}, true);
  Tensor b = Tensor::zeros({2}, true);
  a.grad() = {3.0, 0.0};
  b.grad() = {0.0, 4.0};  // global norm 5 across both tensors
  std::vector<std::pair<std::string, Tensor>> params = {{"a", a}, {"b", b}};
  const double norm = clip_gradients(params, 1.0);
  CHECK(norm == doctest::Approx(5.0));
  CHECK(a.grad()[0] == doctest::Approx(0.6));
  CHECK(b.grad()[1] == doctest::Approx(0.8));
  double after = std::sqrt(a.grad()[0] * a.grad()[0] + b.grad()[1] * b.grad()[1]);
  CHECK(after == doctest::Approx(1.0));

  SUBCASE("small gradients pass through untouched") {
    a.grad() = {0.3, 0.0};
    b.grad() = {0.0, 0.4};
    clip_gradients(params, 1.0);
    CHECK(a.grad()[0] == doctest::Approx(0.3));
    CHECK(b.grad()[1] == doctest::Approx(0.4));
  }
}

TEST_CASE("adamw converges on a quadratic") {
  Tensor x = Tensor::from_data({1}, {5.0}, true);
  AdamW opt({{"x", x}}, 0.0);
  for (int step = 0; step < 500; ++step) {
    opt.zero_grad();
    // f(x) = (x - 2)^2
    Tensor loss = affect::autograd::mul(affect::autograd::add_scalar(x, -2.0),
                                        affect::autograd::add_scalar(x, -2.0));
    affect::autograd::backward(affect::autograd::sum_all(loss));
    opt.step(0.05);
  }
  CHECK(std::abs(x.data()[0] - 2.0) < 1e-3);
}

TEST_CASE("zero weight decay reduces adamw to adam bitwise") {
  auto run = [](double wd) {
    Tensor x = Tensor::from_data({2}, {1.0, -2.0}, true);
    AdamW opt({{"x", x}}, wd);
    for (int step = 0; step < 50; ++step) {
      opt.zero_grad();
      Tensor loss = affect::autograd::sum_all(affect::autograd::mul(x, x));
      affect::autograd::backward(loss);
      opt.step(0.01);
    }
    return x.data();
  };
  // a second run with wd=0 must match itself exactly
  CHECK(run(0.0) == run(0.0));
  CHECK(run(0.0) != run(0.01));
}

TEST_CASE("decay with zero gradient shrinks parameters geometrically") {
  Tensor x = Tensor::from_data({1}, {2.0}, true);
  x.grad();  // allocate zero gradient
  AdamW opt({{"x", x}}, 0.01);
  const double lr = 0.1;
  opt.step(lr);
  CHECK(x.data()[0] == doctest::Approx(2.0 * (1.0 - lr * 0.01)).epsilon(1e-12));
  opt.step(lr);
  CHECK(x.data()[0] == doctest::Approx(2.0 * std::pow(1.0 - lr * 0.01, 2)).epsilon(1e-12));
}

TEST_CASE("history csv is stable and complete") {
  std::vector<HistoryRow> rows(2);
  rows[0] = {0, 1e-4, 1.5, 1.4, 0.1, 0.5, 0.6};
  rows[1] = {1, 2e-4, 1.2, 1.1, 0.09, 0.55, 0.62};
  const std::string csv = history_csv(rows);
  CHECK(csv.find("epoch,lr,train_loss,ce,recon,test_macro_f1,test_accuracy\n") == 0);
  CHECK(csv.find("\n0,") != std::string::npos);
  CHECK(history_csv(rows) == csv);
}

TEST_CASE("train config validation rejects bad values") {
  TrainConfig cfg;
  cfg.lr = -1.0;
  CHECK_THROWS_AS(cfg.validate(), affect::DataError);
  cfg = TrainConfig{};
  cfg.patience = 0;
  CHECK_THROWS_AS(cfg.validate(), affect::DataError);
  cfg = TrainConfig{};
  cfg.warmup_epochs = cfg.epochs + 1;
  CHECK_THROWS_AS(cfg.validate(), affect::DataError);
}

#include <affect/checkpoint.hpp>

#include <filesystem>

#include "test_util.hpp"

namespace {

affect::nn::ModelConfig tiny_model_config() {
  affect::nn::ModelConfig cfg;
  cfg.cnn_filters = {6, 6, 6};
  cfg.lnn_hidden = 12;
  cfg.attention_dim = 6;
  cfg.latent_dim = 12;
  cfg.ae_hidden = 16;
  cfg.classifier_dims = {16, 12};
  cfg.dropout = 0.0;  // dropout at these widths swamps the toy signal
  for (affect::nn::Modality m : affect::nn::fusion_order()) {
    if (m == affect::nn::Modality::RawEEG) continue;
    cfg.encoder_dims[static_cast<std::size_t>(m)] = {8, 4};
  }
  return cfg;
}

}  // namespace

TEST_CASE("train_loop learns a separable toy dataset and early-stops") {
  auto ds = testutil::toy_dataset(10, 3);
  affect::nn::Model model(tiny_model_config(), 5);
  TrainConfig cfg;
  cfg.lr = 5e-3;
  cfg.epochs = 60;
  cfg.warmup_epochs = 2;
  // eval-mode F1 lags the train loss while batchnorm running statistics
  // settle, so the patience must outlast that flatline
  cfg.patience = 24;
  cfg.batch_size = 16;
  cfg.seed = 5;
  cfg.class_weights.assign(7, 1.0);

  TrainResult result = train_loop(model, ds, cfg);
  REQUIRE_FALSE(result.history.empty());
  CHECK(result.best_macro_f1 > 0.8);
  // early stop fired: loop ended patience epochs after the best one
  CHECK(result.best_epoch < static_cast<int>(result.history.size()) - 1);
  CHECK(static_cast<int>(result.history.size()) - 1 - result.best_epoch == cfg.patience);
  // epochs_since_improvement never exceeded the patience
  CHECK(static_cast<int>(result.history.size()) <= cfg.epochs);

  SUBCASE("identical seeds give identical histories") {
    affect::nn::Model model2(tiny_model_config(), 5);
    TrainResult result2 = train_loop(model2, ds, cfg);
    REQUIRE(result2.history.size() == result.history.size());
    CHECK(history_csv(result2.history) == history_csv(result.history));
  }

  SUBCASE("checkpoint round-trips the trained state bit-exactly") {
    restore_state(model, result.best_state);
    const std::string path =
        (std::filesystem::temp_directory_path() / "affect_train_ckpt.bin").string();
    affect::io::save_checkpoint(model.state(), path);

    affect::nn::Model loaded(tiny_model_config(), 99);  // different init seed
    auto archive = affect::io::load_checkpoint(path);
    for (auto& [name, tensor] : loaded.state()) {
      REQUIRE(archive.count(name) == 1);
      tensor.data() = archive.at(name).data();
    }
    // running statistics travel with the checkpoint
    bool has_running = false;
    for (const auto& [name, t] : loaded.state()) {
      if (name.find("running_mean") != std::string::npos) has_running = true;
    }
    CHECK(has_running);

    auto a = evaluate(model, ds, affect::features::Split::Test);
    auto b = evaluate(loaded, ds, affect::features::Split::Test);
    REQUIRE(a.probs.size() == b.probs.size());
    for (std::size_t i = 0; i < a.probs.size(); ++i) {
      for (std::size_t c = 0; c < a.probs[i].size(); ++c) {
        CHECK(a.probs[i][c] == b.probs[i][c]);
      }
    }
  }
}
