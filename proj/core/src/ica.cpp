#include "affect/ica.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "affect/errors.hpp"

namespace affect::dsp {

namespace {

using EMat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

// W <- (W W^T)^(-1/2) W via eigendecomposition of the symmetric product.
EMat symmetric_decorrelate(const EMat& w) {
  Eigen::SelfAdjointEigenSolver<EMat> es(w * w.transpose());
  const EVec d = es.eigenvalues();
  EVec dinv(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    dinv[i] = 1.0 / std::sqrt(std::max(d[i], 1e-18));
  }
  return es.eigenvectors() * dinv.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

IcaResult fastica(const Signal& eeg, int n_components, int max_iter, double tol) {
  eeg.validate("fastica");
  const int c = eeg.channels;
  const int t = eeg.length();
  if (c < 2 || n_components < 2 || n_components > c) {
    throw DataError("fastica: needs channels >= n_components >= 2");
  }
  if (t < 2 * c) throw DataError("fastica: too few samples");

  // Center.
  EMat x(c, t);
  std::vector<double> means(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < c; ++i) {
    auto ch = eeg.channel(i);
    const double m = std::accumulate(ch.begin(), ch.end(), 0.0) / t;
    means[static_cast<std::size_t>(i)] = m;
    for (int j = 0; j < t; ++j) x(i, j) = ch[static_cast<std::size_t>(j)] - m;
  }

  // Whiten with the top n_components eigenpairs of the covariance.
  const EMat cov = x * x.transpose() / static_cast<double>(t - 1);
  Eigen::SelfAdjointEigenSolver<EMat> es(cov);
  const EVec evals = es.eigenvalues();   // ascending
  const EMat evecs = es.eigenvectors();
  const double floor_ev = std::max(evals[c - 1], 0.0) * 1e-12;
  EMat wh(n_components, c);   // whitening: Z = wh * X
  EMat dewh(c, n_components); // de-whitening: X ~= dewh * Z
  for (int i = 0; i < n_components; ++i) {
    const int src = c - 1 - i;  // descending order
    const double ev = evals[src];
    if (!(ev > floor_ev) || !(ev > 1e-14)) {
      throw NumericError("fastica: rank-deficient input (eigenvalue " +
                         std::to_string(ev) + ")");
    }
    const double s = std::sqrt(ev);
    wh.row(i) = evecs.col(src).transpose() / s;
    dewh.col(i) = evecs.col(src) * s;
  }
  const EMat z = wh * x;

  // Fixed deterministic near-identity init, orthonormalized.
  EMat w(n_components, n_components);
  for (int i = 0; i < n_components; ++i) {
    for (int j = 0; j < n_components; ++j) {
      w(i, j) = (i == j ? 1.0 : 0.0) + 0.01 * std::sin(1.0 + i * n_components + j);
    }
  }
  w = symmetric_decorrelate(w);

  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    const EMat y = w * z;                       // n x t
    const EMat g = y.array().tanh().matrix();   // contrast
    EVec gprime(n_components);
    for (int i = 0; i < n_components; ++i) {
      gprime[i] = (1.0 - g.row(i).array().square()).mean();
    }
    EMat w_new = (g * z.transpose()) / static_cast<double>(t) -
                 gprime.asDiagonal() * w;
    w_new = symmetric_decorrelate(w_new);

    // max |1 - |<w_i_new, w_i>|| over rows
    double delta = 0.0;
    for (int i = 0; i < n_components; ++i) {
      delta = std::max(delta, std::abs(1.0 - std::abs(w_new.row(i).dot(w.row(i)))));
    }
    w = w_new;
    if (delta < tol) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("fastica: no convergence after " + std::to_string(iter) +
                           " iterations", iter);
  }

  IcaResult res;
  res.iterations = iter;
  res.channel_means = means;

  EMat unmix = w * wh;     // n x c
  EMat mix = dewh * w.transpose();  // c x n, pseudo-inverse of unmix

  // Fix the ICA scale ambiguity by normalizing mixing columns to unit
  // norm: a component's physical energy then lives in its source
  // variance, which is what the variance-ranking heuristic ranks.
  for (int j = 0; j < n_components; ++j) {
    const double norm = mix.col(j).norm();
    if (norm > 0.0) {
      mix.col(j) /= norm;
      unmix.row(j) *= norm;
    }
  }

  res.unmixing = Mat(n_components, c);
  res.mixing = Mat(c, n_components);
  for (int i = 0; i < n_components; ++i) {
    for (int j = 0; j < c; ++j) res.unmixing.at(i, j) = unmix(i, j);
  }
  for (int i = 0; i < c; ++i) {
    for (int j = 0; j < n_components; ++j) res.mixing.at(i, j) = mix(i, j);
  }

  const EMat s = unmix * x;
  res.sources = Signal::zeros(n_components, t, eeg.fs);
  for (int i = 0; i < n_components; ++i) {
    for (int j = 0; j < t; ++j) {
      res.sources.channel(i)[static_cast<std::size_t>(j)] = s(i, j);
    }
  }
  return res;
}

std::vector<double> component_variances(const Signal& sources) {
  std::vector<double> v(static_cast<std::size_t>(sources.channels), 0.0);
  const int t = sources.length();
  for (int i = 0; i < sources.channels; ++i) {
    auto ch = sources.channel(i);
    const double m = std::accumulate(ch.begin(), ch.end(), 0.0) / t;
    double acc = 0.0;
    for (double s : ch) acc += (s - m) * (s - m);
    v[static_cast<std::size_t>(i)] = t > 1 ? acc / (t - 1) : 0.0;
  }
  return v;
}

Signal remove_high_variance_components(const IcaResult& ica, int k) {
  const int n = ica.sources.channels;
  const int c = ica.mixing.rows;
  const int t = ica.sources.length();
  if (k < 0 || k >= n) {
    throw DataError("remove_high_variance_components: k=" + std::to_string(k) +
                    " out of range for " + std::to_string(n) + " components");
  }

  const std::vector<double> var = component_variances(ica.sources);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return var[static_cast<std::size_t>(a)] > var[static_cast<std::size_t>(b)]; });
  std::vector<bool> removed(static_cast<std::size_t>(n), false);
  for (int i = 0; i < k; ++i) removed[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;

  Signal out = Signal::zeros(c, t, ica.sources.fs);
  for (int i = 0; i < c; ++i) {
    auto dst = out.channel(i);
    for (int j = 0; j < n; ++j) {
      if (removed[static_cast<std::size_t>(j)]) continue;
      const double a = ica.mixing.at(i, j);
      auto src = ica.sources.channel(j);
      for (int s = 0; s < t; ++s) dst[static_cast<std::size_t>(s)] += a * src[static_cast<std::size_t>(s)];
    }
    const double m = ica.channel_means[static_cast<std::size_t>(i)];
    for (double& v : dst) v += m;
  }
  return out;
}

}  // namespace affect::dsp
