#include "affect/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affect/errors.hpp"
#include "affect/stats.hpp"
#include "affect/train.hpp"

namespace affect::analysis {

AttentionProfile attention_profiles(nn::Model& model, const features::Dataset& ds,
                                    features::Split split) {
  if (!model.config().has(nn::Modality::RawEEG)) {
    throw DataError("attention_profiles: model has no raw-EEG attention path");
  }
  const int steps = model.config().cnn_out_steps();
  const int k = model.config().n_classes;

  std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                        std::vector<double>(static_cast<std::size_t>(steps), 0.0));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);

  const std::vector<int> indices = ds.indices(split);
  const int chunk_size = 256;
  for (std::size_t start = 0; start < indices.size(); start += chunk_size) {
    const std::size_t end = std::min(indices.size(), start + chunk_size);
    std::vector<int> chunk(indices.begin() + static_cast<long>(start),
                           indices.begin() + static_cast<long>(end));
    nn::Batch batch = train::make_batch(ds, chunk, model.config());
    nn::ModelOutput out = model.forward(batch, false);
    for (int i = 0; i < static_cast<int>(chunk.size()); ++i) {
      const int label = batch.labels[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(label)];
      for (int t = 0; t < steps; ++t) {
        sums[static_cast<std::size_t>(label)][static_cast<std::size_t>(t)] += out.attention.at({i, t});
      }
    }
  }

  AttentionProfile profile;
  profile.mean_weights.resize(static_cast<std::size_t>(k));
  profile.heatmap.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw DataError("attention_profiles: class '" +
                      features::emotion_names()[static_cast<std::size_t>(c)] + "' has no samples");
    }
    auto& row = profile.mean_weights[static_cast<std::size_t>(c)];
    row = sums[static_cast<std::size_t>(c)];
    for (double& v : row) v /= counts[static_cast<std::size_t>(c)];

    double lo = *std::min_element(row.begin(), row.end());
    double hi = *std::max_element(row.begin(), row.end());
    auto& heat = profile.heatmap[static_cast<std::size_t>(c)];
    heat.resize(row.size());
    for (std::size_t t = 0; t < row.size(); ++t) {
      heat[t] = hi > lo ? (row[t] - lo) / (hi - lo) : 0.0;
    }
  }
  return profile;
}

std::vector<double> memory_dominance(const ltc::LTCCell& cell) {
  std::vector<double> md(static_cast<std::size_t>(cell.d_h), 0.0);
  for (int i = 0; i < cell.d_h; ++i) {
    double rec = 0.0, in = 0.0;
    for (int j = 0; j < cell.d_h; ++j) {
      const double w = cell.w_h.data()[static_cast<std::size_t>(i) * cell.d_h + j];
      rec += w * w;
    }
    for (int j = 0; j < cell.d_in; ++j) {
      const double w = cell.w_x.data()[static_cast<std::size_t>(i) * cell.d_in + j];
      in += w * w;
    }
    rec = std::sqrt(rec);
    in = std::sqrt(in);
    md[static_cast<std::size_t>(i)] =
        (rec + in) > 0.0 ? rec / (rec + in) : std::numeric_limits<double>::quiet_NaN();
  }
  return md;
}

NeuronDynamics neuron_roles(const ltc::LTCCell& cell, int k, std::uint64_t seed) {
  NeuronDynamics dyn;
  dyn.tau.resize(static_cast<std::size_t>(cell.d_h));
  for (int i = 0; i < cell.d_h; ++i) {
    dyn.tau[static_cast<std::size_t>(i)] = std::exp(cell.theta_tau.data()[static_cast<std::size_t>(i)]);
  }
  dyn.md = memory_dominance(cell);

  // standardize (tau, md) before clustering
  auto standardize = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double m = 0.0;
    for (double x : v) m += x;
    m /= n;
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= n;
    const double sd = std::sqrt(var);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = sd > 0.0 ? (v[i] - m) / sd : 0.0;
    return out;
  };
  const std::vector<double> zt = standardize(dyn.tau);
  const std::vector<double> zm = standardize(dyn.md);

  std::vector<std::vector<double>> points(static_cast<std::size_t>(cell.d_h));
  for (int i = 0; i < cell.d_h; ++i) {
    const double m = std::isnan(zm[static_cast<std::size_t>(i)]) ? 0.0 : zm[static_cast<std::size_t>(i)];
    points[static_cast<std::size_t>(i)] = {zt[static_cast<std::size_t>(i)], m};
  }

  stats::KMeansResult km = stats::kmeans(points, k, seed);
  dyn.degenerate = km.degenerate;

  // order clusters by ascending mean tau
  std::vector<double> mean_tau(static_cast<std::size_t>(k), 0.0);
  std::vector<double> mean_md(static_cast<std::size_t>(k), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int i = 0; i < cell.d_h; ++i) {
    const int c = km.assignment[static_cast<std::size_t>(i)];
    mean_tau[static_cast<std::size_t>(c)] += dyn.tau[static_cast<std::size_t>(i)];
    if (!std::isnan(dyn.md[static_cast<std::size_t>(i)])) mean_md[static_cast<std::size_t>(c)] += dyn.md[static_cast<std::size_t>(i)];
    ++counts[static_cast<std::size_t>(c)];
  }
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      mean_tau[static_cast<std::size_t>(c)] /= counts[static_cast<std::size_t>(c)];
      mean_md[static_cast<std::size_t>(c)] /= counts[static_cast<std::size_t>(c)];
    } else {
      mean_tau[static_cast<std::size_t>(c)] = std::numeric_limits<double>::infinity();
      dyn.degenerate = true;
    }
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return mean_tau[static_cast<std::size_t>(a)] < mean_tau[static_cast<std::size_t>(b)]; });

  static const char* kRoleNames[] = {"fast", "intermediate", "slow"};
  std::vector<int> cluster_to_role(static_cast<std::size_t>(k), 0);
  dyn.table.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    const int c = order[static_cast<std::size_t>(r)];
    cluster_to_role[static_cast<std::size_t>(c)] = r;
    NeuronRole role;
    role.name = r < 3 && k == 3 ? kRoleNames[r] : "role" + std::to_string(r);
    role.count = counts[static_cast<std::size_t>(c)];
    role.mean_tau = counts[static_cast<std::size_t>(c)] > 0 ? mean_tau[static_cast<std::size_t>(c)] : 0.0;
    role.mean_md = mean_md[static_cast<std::size_t>(c)];
    dyn.table[static_cast<std::size_t>(r)] = role;
  }
  dyn.role.resize(static_cast<std::size_t>(cell.d_h));
  for (int i = 0; i < cell.d_h; ++i) {
    dyn.role[static_cast<std::size_t>(i)] = cluster_to_role[static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(i)])];
  }
  return dyn;
}

CalibrationReport calibration(const std::vector<std::vector<double>>& probs,
                              const std::vector<int>& labels, int n_bins) {
  if (probs.size() != labels.size() || probs.empty() || n_bins < 1) {
    throw DataError("calibration: invalid inputs");
  }
  const int k = static_cast<int>(probs.front().size());

  CalibrationReport rep;
  rep.bins.assign(static_cast<std::size_t>(n_bins), {});
  std::vector<double> conf_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<int> correct(static_cast<std::size_t>(n_bins), 0);

  double brier = 0.0, conf_total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    int arg = 0;
    for (int c = 1; c < k; ++c) {
      if (probs[i][static_cast<std::size_t>(c)] > probs[i][static_cast<std::size_t>(arg)]) arg = c;
    }
    const double conf = probs[i][static_cast<std::size_t>(arg)];
    conf_total += conf;
    int bin = static_cast<int>(conf * n_bins);
    bin = std::clamp(bin, 0, n_bins - 1);
    ++rep.bins[static_cast<std::size_t>(bin)].count;
    conf_sum[static_cast<std::size_t>(bin)] += conf;
    if (arg == labels[i]) ++correct[static_cast<std::size_t>(bin)];

    for (int c = 0; c < k; ++c) {
      const double target = c == labels[i] ? 1.0 : 0.0;
      const double d = probs[i][static_cast<std::size_t>(c)] - target;
      brier += d * d;
    }
  }
  const double n = static_cast<double>(probs.size());
  rep.brier = brier / n;
  rep.mean_confidence = conf_total / n;

  for (int b = 0; b < n_bins; ++b) {
    auto& bin = rep.bins[static_cast<std::size_t>(b)];
    if (bin.count == 0) continue;
    bin.confidence = conf_sum[static_cast<std::size_t>(b)] / bin.count;
    bin.accuracy = static_cast<double>(correct[static_cast<std::size_t>(b)]) / bin.count;
    const double gap = std::abs(bin.accuracy - bin.confidence);
    rep.ece += (bin.count / n) * gap;
    rep.mce = std::max(rep.mce, gap);
  }
  return rep;
}

SeparabilityReport separability(const std::vector<std::vector<double>>& latents,
                                const std::vector<int>& labels) {
  if (latents.size() != labels.size() || latents.empty()) {
    throw DataError("separability: latents/labels mismatch");
  }
  const int n = static_cast<int>(latents.size());
  const int d = static_cast<int>(latents.front().size());
  const int k = 1 + *std::max_element(labels.begin(), labels.end());
  if (k < 2) throw DataError("separability: need at least two classes");

  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] < 2) {
      throw DataError("separability: every class needs at least 2 points");
    }
  }

  using EMat = Eigen::MatrixXd;
  using EVec = Eigen::VectorXd;
  EMat centroids = EMat::Zero(k, d);
  EVec global = EVec::Zero(d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      centroids(labels[static_cast<std::size_t>(i)], j) += latents[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      global(j) += latents[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  global /= static_cast<double>(n);
  for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

  double between = 0.0, within = 0.0;
  std::vector<double> spread(static_cast<std::size_t>(k), 0.0);  // mean distance to centroid
  EMat pooled = EMat::Zero(d, d);
  for (int c = 0; c < k; ++c) {
    between += counts[static_cast<std::size_t>(c)] * (centroids.row(c).transpose() - global).squaredNorm();
  }
  for (int i = 0; i < n; ++i) {
    EVec diff(d);
    for (int j = 0; j < d; ++j) diff(j) = latents[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    diff -= centroids.row(labels[static_cast<std::size_t>(i)]).transpose();
    within += diff.squaredNorm();
    spread[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] += diff.norm();
    pooled.noalias() += diff * diff.transpose();
  }
  for (int c = 0; c < k; ++c) spread[static_cast<std::size_t>(c)] /= counts[static_cast<std::size_t>(c)];

  SeparabilityReport rep;
  rep.calinski_harabasz = within > 0.0
                              ? (between / (k - 1)) / (within / (n - k))
                              : std::numeric_limits<double>::infinity();

  // Davies-Bouldin with mean-distance cluster spreads
  double db = 0.0;
  for (int i = 0; i < k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double dij = (centroids.row(i) - centroids.row(j)).norm();
      if (dij > 0.0) worst = std::max(worst, (spread[static_cast<std::size_t>(i)] + spread[static_cast<std::size_t>(j)]) / dij);
    }
    db += worst;
  }
  rep.davies_bouldin = db / k;

  double euclid = 0.0;
  int pairs = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      euclid += (centroids.row(i) - centroids.row(j)).norm();
      ++pairs;
    }
  }
  rep.inter_centroid_euclidean = euclid / pairs;

  // pooled within-class covariance, ridge-regularized
  pooled /= static_cast<double>(n - k);
  Eigen::LLT<EMat> plain(pooled);
  rep.ridge_applied = plain.info() != Eigen::Success;
  const double ridge = 1e-6 * std::max(pooled.trace(), 1e-12) / d;
  pooled.diagonal().array() += ridge;
  Eigen::LLT<EMat> llt(pooled);
  if (llt.info() != Eigen::Success) {
    throw NumericError("separability: covariance not positive definite after ridge");
  }
  double maha = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      EVec diff = (centroids.row(i) - centroids.row(j)).transpose();
      maha += std::sqrt(diff.dot(llt.solve(diff)));
    }
  }
  rep.inter_centroid_mahalanobis = maha / pairs;
  return rep;
}

std::pair<std::vector<std::vector<double>>, std::vector<int>> collect_latents(
    nn::Model& model, const features::Dataset& ds, features::Split split) {
  std::vector<std::vector<double>> latents;
  std::vector<int> labels;
  const std::vector<int> indices = ds.indices(split);
  const int chunk_size = 256;
  for (std::size_t start = 0; start < indices.size(); start += chunk_size) {
    const std::size_t end = std::min(indices.size(), start + chunk_size);
    std::vector<int> chunk(indices.begin() + static_cast<long>(start),
                           indices.begin() + static_cast<long>(end));
    nn::Batch batch = train::make_batch(ds, chunk, model.config());
    nn::ModelOutput out = model.forward(batch, false);
    const int dz = out.latent.dim(1);
    for (int i = 0; i < static_cast<int>(chunk.size()); ++i) {
      std::vector<double> row(static_cast<std::size_t>(dz));
      for (int j = 0; j < dz; ++j) row[static_cast<std::size_t>(j)] = out.latent.at({i, j});
      latents.push_back(std::move(row));
      labels.push_back(batch.labels[static_cast<std::size_t>(i)]);
    }
  }
  return {latents, labels};
}

}  // namespace affect::analysis
