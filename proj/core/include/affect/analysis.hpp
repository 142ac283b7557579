#pragma once

#include <string>
#include <utility>
#include <vector>

#include "affect/features.hpp"
#include "affect/ltc.hpp"
#include "affect/nn.hpp"

namespace affect::analysis {

struct AttentionProfile {
  std::vector<std::vector<double>> mean_weights;  // class x T', each row a mean simplex
  std::vector<std::vector<double>> heatmap;       // row min-max normalized to [0, 1]
};

// Mean attention weights per emotion over the given split (eval mode).
AttentionProfile attention_profiles(nn::Model& model, const features::Dataset& ds,
                                    features::Split split);

// Per-neuron recurrent-vs-input weight balance:
// MD_i = ||row_i(W_h)|| / (||row_i(W_h)|| + ||row_i(W_x)||).
// Neurons with both norms zero come back as NaN.
std::vector<double> memory_dominance(const ltc::LTCCell& cell);

struct NeuronRole {
  std::string name;  // fast / intermediate / slow, ordered by mean tau
  int count = 0;
  double mean_tau = 0.0;
  double mean_md = 0.0;
};

struct NeuronDynamics {
  std::vector<double> tau;
  std::vector<double> md;
  std::vector<int> role;  // index into table
  std::vector<NeuronRole> table;
  bool degenerate = false;
};

// K-means (k=3 by default) on standardized (tau, MD); role names ordered
// by ascending mean tau.
NeuronDynamics neuron_roles(const ltc::LTCCell& cell, int k = 3, std::uint64_t seed = 0);

struct CalibrationBin {
  double confidence = 0.0;  // mean max-prob in the bin
  double accuracy = 0.0;
  int count = 0;
};

struct CalibrationReport {
  double ece = 0.0;
  double mce = 0.0;
  double brier = 0.0;
  double mean_confidence = 0.0;
  std::vector<CalibrationBin> bins;
};

// Equal-width confidence bins on the max predicted probability.
CalibrationReport calibration(const std::vector<std::vector<double>>& probs,
                              const std::vector<int>& labels, int n_bins = 10);

struct SeparabilityReport {
  double calinski_harabasz = 0.0;
  double davies_bouldin = 0.0;
  double inter_centroid_euclidean = 0.0;    // mean pairwise
  double inter_centroid_mahalanobis = 0.0;  // pooled within-class covariance
  bool ridge_applied = false;
};

SeparabilityReport separability(const std::vector<std::vector<double>>& latents,
                                const std::vector<int>& labels);

// Latent vectors and labels for a split, eval mode.
std::pair<std::vector<std::vector<double>>, std::vector<int>> collect_latents(
    nn::Model& model, const features::Dataset& ds, features::Split split);

}  // namespace affect::analysis
