#pragma once

#include <cstdint>
#include <vector>

namespace affect::stats {

// Inverse standard normal CDF (Acklam's rational approximation with one
// Halley refinement step).
double normal_quantile(double p);
double normal_cdf(double z);

struct ShapiroWilkResult {
  double w = 0.0;
  double p_value = 0.0;
};

// Royston's AS R94 approximation; 3 <= n <= 5000. Throws NumericError on
// a constant (zero-spread) sample.
ShapiroWilkResult shapiro_wilk(const std::vector<double>& values);

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 0.0;
};

// Pearson correlation of average ranks; p from the t approximation.
SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta I_x(a, b); used for t-distribution tails.
double incomplete_beta(double a, double b, double x);

struct KMeansResult {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  double sse = 0.0;
  int iterations = 0;
  bool degenerate = false;  // a cluster emptied during Lloyd iterations
};

// Lloyd's algorithm with k-means++ seeding; `restarts` independent runs,
// best SSE kept. Deterministic under seed.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter = 100, int restarts = 10);

struct BootstrapResult {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> distribution;  // in resampling order
};

// Percentile bootstrap interval over resampled accuracies.
BootstrapResult bootstrap_ci(const std::vector<char>& correct, int n_boot = 1000,
                             double level = 0.95, std::uint64_t seed = 0);

}  // namespace affect::stats
