#include <doctest.h>

#include <affect/analysis.hpp>
#include <affect/errors.hpp>
#include <affect/rng.hpp>

#include <cmath>

using namespace affect::analysis;
using affect::Rng;
using affect::ltc::LTCCell;

namespace {

LTCCell cell_with(const std::vector<double>& wh, const std::vector<double>& wx, int d_h, int d_in) {
  Rng rng(1);
  LTCCell cell = affect::ltc::init_cell(d_in, d_h, rng);
  cell.w_h.data() = wh;
  cell.w_x.data() = wx;
  return cell;
}

}  // namespace

TEST_CASE("memory dominance is 0.5 for equal row norms and 0 for zero recurrence") {
  // 2 hidden, 2 inputs; rows of W_h and W_x with equal norms
  LTCCell cell = cell_with({1.0, 0.0, 0.0, 2.0}, {0.0, 1.0, 2.0, 0.0}, 2, 2);
  auto md = memory_dominance(cell);
  CHECK(md[0] == doctest::Approx(0.5));
  CHECK(md[1] == doctest::Approx(0.5));

  LTCCell zero_rec = cell_with({0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}, 2, 2);
  auto md0 = memory_dominance(zero_rec);
  CHECK(md0[0] == doctest::Approx(0.0));

  // both norms zero -> NaN flagged
  LTCCell dead = cell_with({0.0, 0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 1.0}, 2, 2);
  auto mdn = memory_dominance(dead);
  CHECK(std::isnan(mdn[0]));
  CHECK(mdn[1] == doctest::Approx(0.5));
}

TEST_CASE("memory dominance matches a direct norm computation on random weights") {
  Rng rng(5);
  LTCCell cell = affect::ltc::init_cell(4, 4, rng);
  auto md = memory_dominance(cell);
  for (int i = 0; i < 4; ++i) {
    double rec = 0.0, in = 0.0;
    for (int j = 0; j < 4; ++j) {
      rec += cell.w_h.data()[static_cast<std::size_t>(i * 4 + j)] * cell.w_h.data()[static_cast<std::size_t>(i * 4 + j)];
      in += cell.w_x.data()[static_cast<std::size_t>(i * 4 + j)] * cell.w_x.data()[static_cast<std::size_t>(i * 4 + j)];
    }
    const double expected = std::sqrt(rec) / (std::sqrt(rec) + std::sqrt(in));
    CHECK(md[static_cast<std::size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("memory dominance is invariant to common positive row scaling") {
  Rng rng(7);
  LTCCell cell = affect::ltc::init_cell(3, 3, rng);
  auto before = memory_dominance(cell);
  for (int j = 0; j < 3; ++j) {
    cell.w_h.data()[static_cast<std::size_t>(0 * 3 + j)] *= 7.5;
    cell.w_x.data()[static_cast<std::size_t>(0 * 3 + j)] *= 7.5;
  }
  auto after = memory_dominance(cell);
  CHECK(after[0] == doctest::Approx(before[0]).epsilon(1e-12));
}

TEST_CASE("neuron roles split synthetic tau populations by construction") {
  Rng rng(9);
  const int d_h = 30;
  const int d_in = 8;
  LTCCell cell = affect::ltc::init_cell(d_in, d_h, rng);
  // three disjoint neuron populations, separated in both tau and MD:
  // 10 fast (tau ~0.3, MD ~0.2), 12 mid (~3, ~0.5), 8 slow (~20, ~0.8)
  for (int i = 0; i < d_h; ++i) {
    const int g = i < 10 ? 0 : (i < 22 ? 1 : 2);
    const double tau = g == 0 ? 0.3 : (g == 1 ? 3.0 : 20.0);
    const double md = g == 0 ? 0.2 : (g == 1 ? 0.5 : 0.8);
    cell.theta_tau.data()[static_cast<std::size_t>(i)] = std::log(tau) + 0.02 * rng.normal();
    // set the row norms so MD_i = md exactly (plus tiny jitter via tau)
    for (int j = 0; j < d_h; ++j) {
      cell.w_h.data()[static_cast<std::size_t>(i) * d_h + j] = (j == 0) ? md : 0.0;
    }
    for (int j = 0; j < d_in; ++j) {
      cell.w_x.data()[static_cast<std::size_t>(i) * d_in + j] = (j == 0) ? 1.0 - md : 0.0;
    }
  }
  NeuronDynamics dyn = neuron_roles(cell, 3, 42);
  REQUIRE(dyn.table.size() == 3);
  CHECK(dyn.table[0].count == 10);
  CHECK(dyn.table[1].count == 12);
  CHECK(dyn.table[2].count == 8);
  CHECK(dyn.table[0].name == "fast");
  CHECK(dyn.table[2].name == "slow");
  CHECK(dyn.table[0].mean_tau < dyn.table[1].mean_tau);
  CHECK(dyn.table[1].mean_tau < dyn.table[2].mean_tau);
  // per-neuron role assignment matches the construction
  for (int i = 0; i < d_h; ++i) {
    const int expect = i < 10 ? 0 : (i < 22 ? 1 : 2);
    CHECK(dyn.role[static_cast<std::size_t>(i)] == expect);
  }
}

TEST_CASE("degenerate neuron populations are flagged") {
  Rng rng(11);
  LTCCell cell = affect::ltc::init_cell(4, 8, rng);
  for (auto& v : cell.theta_tau.data()) v = std::log(2.0);  // all tau equal
  for (auto& v : cell.w_h.data()) v = 0.5;                  // all MD equal
  for (auto& v : cell.w_x.data()) v = 0.5;
  NeuronDynamics dyn = neuron_roles(cell, 3, 1);
  CHECK(dyn.degenerate);
}

TEST_CASE("calibration is near zero for constructed calibrated predictions") {
  Rng rng(13);
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
  // predictions with confidence c are correct with probability c
  for (int i = 0; i < 20000; ++i) {
    const double conf = 0.55 + 0.4 * rng.uniform();
    const bool correct = rng.uniform() < conf;
    const int truth = static_cast<int>(rng.uniform_int(4));
    int pred = truth;
    if (!correct) pred = (truth + 1 + static_cast<int>(rng.uniform_int(3))) % 4;
    std::vector<double> row(4, (1.0 - conf) / 3.0);
    row[static_cast<std::size_t>(pred)] = conf;
    probs.push_back(row);
    labels.push_back(truth);
  }
  CalibrationReport rep = calibration(probs, labels, 10);
  CHECK(rep.ece < 0.01);
  CHECK(rep.ece <= rep.mce);
}

TEST_CASE("always-confident wrong predictions have maximal miscalibration") {
  // predict class 0 with certainty; labels uniform over 7
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
  for (int i = 0; i < 700; ++i) {
    std::vector<double> row(7, 0.0);
    row[0] = 1.0;
    probs.push_back(row);
    labels.push_back(i % 7);
  }
  CalibrationReport rep = calibration(probs, labels, 10);
  CHECK(rep.ece == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
  CHECK(rep.mce == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
  CHECK(rep.brier == doctest::Approx(2.0 * 6.0 / 7.0).epsilon(1e-9));
  CHECK(rep.mean_confidence == doctest::Approx(1.0));
}

TEST_CASE("perfect one-hot predictions have zero calibration error") {
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
  for (int i = 0; i < 70; ++i) {
    std::vector<double> row(7, 0.0);
    row[static_cast<std::size_t>(i % 7)] = 1.0;
    probs.push_back(row);
    labels.push_back(i % 7);
  }
  CalibrationReport rep = calibration(probs, labels, 10);
  CHECK(rep.ece == doctest::Approx(0.0).scale(1.0));
  CHECK(rep.mce == doctest::Approx(0.0).scale(1.0));
  CHECK(rep.brier == doctest::Approx(0.0).scale(1.0));
  CHECK(rep.mean_confidence == doctest::Approx(1.0));
}

TEST_CASE("merging all bins makes ece the global confidence-accuracy gap") {
  Rng rng(17);
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
  for (int i = 0; i < 500; ++i) {
    const double conf = 0.6 + 0.3 * rng.uniform();
    const int truth = static_cast<int>(rng.uniform_int(3));
    const int pred = rng.uniform() < 0.8 ? truth : (truth + 1) % 3;
    std::vector<double> row(3, (1.0 - conf) / 2.0);
    row[static_cast<std::size_t>(pred)] = conf;
    probs.push_back(row);
    labels.push_back(truth);
  }
  CalibrationReport one = calibration(probs, labels, 1);
  double acc = 0.0, conf = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    int arg = 0;
    for (int c = 1; c < 3; ++c) {
      if (probs[i][static_cast<std::size_t>(c)] > probs[i][static_cast<std::size_t>(arg)]) arg = c;
    }
    acc += arg == labels[i] ? 1.0 : 0.0;
    conf += probs[i][static_cast<std::size_t>(arg)];
  }
  acc /= static_cast<double>(probs.size());
  conf /= static_cast<double>(probs.size());
  CHECK(one.ece == doctest::Approx(std::abs(acc - conf)).epsilon(1e-12));
}

TEST_CASE("separability metrics behave on constructed blob geometry") {
  Rng rng(19);
  std::vector<std::vector<double>> latents;
  std::vector<int> labels;
  // two unit-variance blobs 10 sigma apart
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 60; ++i) {
      latents.push_back({10.0 * c + rng.normal(), rng.normal()});
      labels.push_back(c);
    }
  }
  SeparabilityReport rep = separability(latents, labels);
  CHECK(rep.calinski_harabasz > 100.0);
  CHECK(rep.davies_bouldin < 0.5);
  CHECK(rep.inter_centroid_euclidean == doctest::Approx(10.0).epsilon(0.1));
  CHECK(rep.inter_centroid_mahalanobis > 5.0);

  SUBCASE("random labels destroy separability") {
    Rng shuffle_rng(23);
    std::vector<int> shuffled = labels;
    shuffle_rng.shuffle(shuffled);
    SeparabilityReport rnd = separability(latents, shuffled);
    CHECK(rnd.calinski_harabasz < 5.0);
    CHECK(rnd.davies_bouldin > 2.0);
  }

  SUBCASE("shrinking points toward centroids raises CH") {
    std::vector<std::vector<double>> tight = latents;
    const double cx[2] = {0.0, 10.0};
    for (std::size_t i = 0; i < tight.size(); ++i) {
      tight[i][0] = cx[labels[i]] + 0.5 * (tight[i][0] - cx[labels[i]]);
      tight[i][1] *= 0.5;
    }
    SeparabilityReport tighter = separability(tight, labels);
    CHECK(tighter.calinski_harabasz > rep.calinski_harabasz);
  }
}

TEST_CASE("identical points per class give zero davies-bouldin") {
  std::vector<std::vector<double>> latents;
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 4; ++i) {
      latents.push_back({static_cast<double>(c), 2.0 * c});
      labels.push_back(c);
    }
  }
  SeparabilityReport rep = separability(latents, labels);
  CHECK(rep.davies_bouldin == doctest::Approx(0.0).scale(1.0));
  CHECK(std::isinf(rep.calinski_harabasz));
  CHECK(rep.ridge_applied);  // singular covariance handled by the ridge
}

TEST_CASE("separability validates inputs") {
  CHECK_THROWS_AS(separability({{1.0}, {2.0}}, {0, 0}), affect::DataError);
  CHECK_THROWS_AS(separability({{1.0}, {2.0}, {3.0}}, {0, 0, 1}), affect::DataError);
}

#include <affect/nn.hpp>
#include <affect/train.hpp>

#include "test_util.hpp"

TEST_CASE("attention profiles are uniform for an untrained model with v = 0") {
  auto ds = testutil::toy_dataset(3, 7);
  affect::nn::ModelConfig cfg;
  cfg.cnn_filters = {6, 6, 6};
  cfg.lnn_hidden = 12;
  cfg.attention_dim = 6;
  cfg.latent_dim = 12;
  cfg.ae_hidden = 16;
  cfg.classifier_dims = {16, 12};
  for (affect::nn::Modality m : affect::nn::fusion_order()) {
    if (m == affect::nn::Modality::RawEEG) continue;
    cfg.encoder_dims[static_cast<std::size_t>(m)] = {8, 4};
  }
  affect::nn::Model model(cfg, 3);
  // zero the attention context vector: constant scores, uniform weights
  auto params = model.parameters();
  for (auto& [name, t] : params) {
    if (name == "nn.attention.v") std::fill(t.data().begin(), t.data().end(), 0.0);
  }

  AttentionProfile profile = attention_profiles(model, ds, affect::features::Split::Test);
  const int steps = cfg.cnn_out_steps();
  REQUIRE(profile.mean_weights.size() == 7);
  for (const auto& row : profile.mean_weights) {
    REQUIRE(static_cast<int>(row.size()) == steps);
    for (double w : row) CHECK(w == doctest::Approx(1.0 / steps).epsilon(1e-9));
  }

  SUBCASE("single sample per class returns that sample's weights") {
    // toy_dataset(3) -> 3 per class, 80/20 split leaves 1 test sample per class
    auto test_idx = ds.indices(affect::features::Split::Test);
    REQUIRE(test_idx.size() == 7);
    // restore a non-degenerate v so weights vary across t
    affect::nn::Model fresh(cfg, 3);
    AttentionProfile single = attention_profiles(fresh, ds, affect::features::Split::Test);
    for (int idx : test_idx) {
      std::vector<int> one = {idx};
      auto batch = affect::train::make_batch(ds, one, cfg);
      auto out = fresh.forward(batch, false);
      const int cls = batch.labels[0];
      for (int t = 0; t < steps; ++t) {
        CHECK(single.mean_weights[static_cast<std::size_t>(cls)][static_cast<std::size_t>(t)] ==
              doctest::Approx(out.attention.at({0, t})).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("attention profiles reject datasets with an empty class") {
  auto ds = testutil::toy_dataset(3, 9);
  // drop every test sample of class 0
  affect::features::Dataset filtered;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    if (ds.split[i] == affect::features::Split::Test &&
        ds.samples[i].label == affect::features::EmotionLabel::Angry) {
      continue;
    }
    filtered.samples.push_back(ds.samples[i]);
    filtered.split.push_back(ds.split[i]);
  }
  filtered.recount();

  affect::nn::ModelConfig cfg;
  cfg.cnn_filters = {6, 6, 6};
  cfg.lnn_hidden = 12;
  cfg.attention_dim = 6;
  cfg.latent_dim = 12;
  cfg.ae_hidden = 16;
  cfg.classifier_dims = {16, 12};
  for (affect::nn::Modality m : affect::nn::fusion_order()) {
    if (m == affect::nn::Modality::RawEEG) continue;
    cfg.encoder_dims[static_cast<std::size_t>(m)] = {8, 4};
  }
  affect::nn::Model model(cfg, 1);
  CHECK_THROWS_AS(attention_profiles(model, filtered, affect::features::Split::Test),
                  affect::DataError);
}
