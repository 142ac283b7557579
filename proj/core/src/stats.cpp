#include "affect/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "affect/errors.hpp"
#include "affect/rng.hpp"

namespace affect::stats {

namespace {

constexpr double kPi = 3.14159265358979323846;

double poly(const double* c, int n, double x) {
  // c[0] + c[1] x + ... + c[n-1] x^(n-1)
  double acc = c[n - 1];
  for (int i = n - 2; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double betacf(double a, double b, double x) {
  // continued fraction for the incomplete beta (Lentz's method)
  const int max_iter = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw NumericError("normal_quantile: p must lie in (0, 1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

ShapiroWilkResult shapiro_wilk(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  if (n < 3 || n > 5000) {
    throw DataError("shapiro_wilk: sample size must lie in [3, 5000]");
  }
  std::vector<double> x = values;
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() <= 0.0) {
    throw NumericError("shapiro_wilk: degenerate constant sample");
  }

  const int n2 = n / 2;
  std::vector<double> a(static_cast<std::size_t>(n2) + 1, 0.0);
  const double an = static_cast<double>(n);

  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    std::vector<double> m(static_cast<std::size_t>(n2) + 1, 0.0);
    double summ2 = 0.0;
    for (int i = 1; i <= n2; ++i) {
      m[static_cast<std::size_t>(i)] = normal_quantile((i - 0.375) / (an + 0.25));
      summ2 += m[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    static const double c1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
    static const double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    const double a1 = poly(c1, 6, rsn) - m[1] / ssumm2;

    int i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 = -m[2] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (int i = i1; i <= n2; ++i) a[static_cast<std::size_t>(i)] = -m[static_cast<std::size_t>(i)] / fac;
  }

  // W = (sum a_i (x_(n+1-i) - x_(i)))^2 / sum (x - mean)^2
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  double sax = 0.0;
  for (int i = 1; i <= n2; ++i) {
    sax += a[static_cast<std::size_t>(i)] * (x[static_cast<std::size_t>(n - i)] - x[static_cast<std::size_t>(i - 1)]);
  }
  double w = sax * sax / ssq;
  if (w > 1.0) w = 1.0;

  ShapiroWilkResult result;
  result.w = w;

  if (n == 3) {
    const double pi6 = 6.0 / kPi;
    const double stqr = std::asin(std::sqrt(0.75));
    result.p_value = std::clamp(pi6 * (std::asin(std::sqrt(w)) - stqr), 0.0, 1.0);
    return result;
  }

  const double y = std::log1p(-w);  // log(1 - W)
  double mu, sigma, z;
  if (n <= 11) {
    static const double g[] = {-2.273, 0.459};
    static const double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static const double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      result.p_value = 1e-99;
      return result;
    }
    const double y1 = -std::log(gamma - y);
    mu = poly(c3, 4, an);
    sigma = std::exp(poly(c4, 4, an));
    z = (y1 - mu) / sigma;
  } else {
    static const double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static const double c6[] = {-0.4803, -0.082676, 0.0030302};
    const double ln_n = std::log(an);
    mu = poly(c5, 4, ln_n);
    sigma = std::exp(poly(c6, 3, ln_n));
    z = (y - mu) / sigma;
  }
  result.p_value = 1.0 - normal_cdf(z);  // upper tail
  return result;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) {
    throw DataError("spearman: need two equal-length samples with n >= 3");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (!(dx > 0.0) || !(dy > 0.0)) {
    throw NumericError("spearman: zero rank variance (constant input)");
  }
  SpearmanResult result;
  result.rho = num / std::sqrt(dx * dy);

  const double rho = std::clamp(result.rho, -1.0, 1.0);
  if (std::abs(rho) >= 1.0) {
    result.p_value = 0.0;
    return result;
  }
  const double df = n - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  result.p_value = incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return result;
}

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iter, int restarts) {
  const int n = static_cast<int>(points.size());
  if (n < k || k < 1) {
    throw DataError("kmeans: need at least k points");
  }
  const int dim = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != dim) throw DataError("kmeans: ragged point set");
  }

  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (int j = 0; j < dim; ++j) acc += (a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]) * (a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]);
    return acc;
  };

  KMeansResult best;
  best.sse = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt < restarts; ++attempt) {
    Rng rng = Rng(seed).stream("kmeans/" + std::to_string(attempt));

    // k-means++ seeding
    std::vector<std::vector<double>> centroids;
    centroids.push_back(points[static_cast<std::size_t>(rng.uniform_int(static_cast<std::uint64_t>(n)))]);
    std::vector<double> d2(static_cast<std::size_t>(n));
    while (static_cast<int>(centroids.size()) < k) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& c : centroids) m = std::min(m, dist2(points[static_cast<std::size_t>(i)], c));
        d2[static_cast<std::size_t>(i)] = m;
        total += m;
      }
      int chosen = 0;
      if (total > 0.0) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += d2[static_cast<std::size_t>(i)];
          if (acc >= target) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      }
      centroids.push_back(points[static_cast<std::size_t>(chosen)]);
    }

    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    bool degenerate = false;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        int bestc = 0;
        double bestd = dist2(points[static_cast<std::size_t>(i)], centroids[0]);
        for (int c = 1; c < k; ++c) {
          const double d = dist2(points[static_cast<std::size_t>(i)], centroids[static_cast<std::size_t>(c)]);
          if (d < bestd) {
            bestd = d;
            bestc = c;
          }
        }
        if (assign[static_cast<std::size_t>(i)] != bestc) {
          assign[static_cast<std::size_t>(i)] = bestc;
          changed = true;
        }
      }
      if (!changed) break;

      std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                            std::vector<double>(static_cast<std::size_t>(dim), 0.0));
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (int i = 0; i < n; ++i) {
        const int c = assign[static_cast<std::size_t>(i)];
        ++counts[static_cast<std::size_t>(c)];
        for (int j = 0; j < dim; ++j) sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] += points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          degenerate = true;  // keep the previous centroid
          continue;
        }
        for (int j = 0; j < dim; ++j) {
          centroids[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] =
              sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] / counts[static_cast<std::size_t>(c)];
        }
      }
    }

    double sse = 0.0;
    for (int i = 0; i < n; ++i) sse += dist2(points[static_cast<std::size_t>(i)], centroids[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])]);
    if (sse < best.sse) {
      best.assignment = assign;
      best.centroids = centroids;
      best.sse = sse;
      best.iterations = iter;
      best.degenerate = degenerate;
    }
  }
  return best;
}

BootstrapResult bootstrap_ci(const std::vector<char>& correct, int n_boot, double level,
                             std::uint64_t seed) {
  if (correct.empty()) throw DataError("bootstrap_ci: empty flag vector");
  if (n_boot < 1 || !(level > 0.0) || !(level < 1.0)) {
    throw DataError("bootstrap_ci: invalid n_boot or level");
  }
  const std::size_t n = correct.size();
  BootstrapResult result;
  double acc = 0.0;
  for (char c : correct) acc += c ? 1.0 : 0.0;
  result.point = acc / static_cast<double>(n);

  Rng rng = Rng(seed).stream("bootstrap");
  result.distribution.reserve(static_cast<std::size_t>(n_boot));
  for (int b = 0; b < n_boot; ++b) {
    long long hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      hits += correct[static_cast<std::size_t>(rng.uniform_int(n))] ? 1 : 0;
    }
    result.distribution.push_back(static_cast<double>(hits) / static_cast<double>(n));
  }

  std::vector<double> sorted = result.distribution;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double h = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(sorted.size() - 1, lo + 1);
    const double frac = h - std::floor(h);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  };
  result.lo = quantile(0.5 * (1.0 - level));
  result.hi = quantile(1.0 - 0.5 * (1.0 - level));
  return result;
}

}  // namespace affect::stats
