#include "affect/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "affect/errors.hpp"

namespace affect::train {

namespace {

// Mann-Whitney AUC with average ranks for ties.
double rank_auc(const std::vector<double>& scores, const std::vector<char>& positive) {
  const std::size_t n = scores.size();
  long long n_pos = std::count(positive.begin(), positive.end(), 1);
  long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (positive[order[k]]) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

MetricsReport compute_metrics(const std::vector<std::vector<double>>& probs,
                              const std::vector<int>& labels, int n_classes) {
  if (probs.size() != labels.size() || probs.empty()) {
    throw DataError("compute_metrics: probs/labels size mismatch or empty");
  }
  const int k = n_classes;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (static_cast<int>(probs[i].size()) != k) {
      throw DataError("compute_metrics: probability row has wrong width");
    }
    double acc = 0.0;
    for (double p : probs[i]) acc += p;
    if (std::abs(acc - 1.0) > 1e-5) {
      throw DataError("compute_metrics: probability row does not sum to 1");
    }
    if (labels[i] < 0 || labels[i] >= k) throw DataError("compute_metrics: label out of range");
  }

  std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw NumericError("compute_metrics: kappa/MCC undefined for a single-class label set");
  }

  MetricsReport r;
  r.n = static_cast<int>(labels.size());
  r.n_classes = k;
  r.confusion.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));

  std::vector<int> pred(labels.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    int arg = 0;
    for (int c = 1; c < k; ++c) {
      if (probs[i][static_cast<std::size_t>(c)] > probs[i][static_cast<std::size_t>(arg)]) arg = c;
    }
    pred[i] = arg;
    ++r.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(arg)];
  }

  const double n = static_cast<double>(r.n);
  double trace = 0.0;
  for (int c = 0; c < k; ++c) trace += r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
  r.accuracy = trace / n;

  std::vector<double> row_sum(static_cast<std::size_t>(k), 0.0), col_sum(static_cast<std::size_t>(k), 0.0);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      row_sum[static_cast<std::size_t>(a)] += r.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      col_sum[static_cast<std::size_t>(b)] += r.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
  }

  r.per_class.resize(static_cast<std::size_t>(k));
  double recall_sum = 0.0;
  int present = 0;
  double macro_f1 = 0.0, weighted_f1 = 0.0;
  for (int c = 0; c < k; ++c) {
    auto& pc = r.per_class[static_cast<std::size_t>(c)];
    pc.support = static_cast<int>(row_sum[static_cast<std::size_t>(c)]);
    const double tp = r.confusion[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    pc.precision = col_sum[static_cast<std::size_t>(c)] > 0 ? tp / col_sum[static_cast<std::size_t>(c)] : 0.0;
    pc.recall = row_sum[static_cast<std::size_t>(c)] > 0 ? tp / row_sum[static_cast<std::size_t>(c)] : 0.0;
    pc.f1 = (pc.precision + pc.recall) > 0.0
                ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                : 0.0;
    if (pc.support > 0) {
      recall_sum += pc.recall;
      ++present;
      macro_f1 += pc.f1;
      weighted_f1 += pc.f1 * pc.support;
    }
  }
  r.balanced_accuracy = present > 0 ? recall_sum / present : 0.0;
  r.macro_f1 = present > 0 ? macro_f1 / present : 0.0;
  r.weighted_f1 = weighted_f1 / n;

  // Cohen's kappa
  double pe = 0.0;
  for (int c = 0; c < k; ++c) pe += row_sum[static_cast<std::size_t>(c)] * col_sum[static_cast<std::size_t>(c)];
  pe /= n * n;
  r.cohens_kappa = pe < 1.0 ? (r.accuracy - pe) / (1.0 - pe) : 0.0;

  // multiclass MCC (R_k statistic)
  double sum_tp = trace;
  double sum_pt = 0.0, sum_p2 = 0.0, sum_t2 = 0.0;
  for (int c = 0; c < k; ++c) {
    sum_pt += col_sum[static_cast<std::size_t>(c)] * row_sum[static_cast<std::size_t>(c)];
    sum_p2 += col_sum[static_cast<std::size_t>(c)] * col_sum[static_cast<std::size_t>(c)];
    sum_t2 += row_sum[static_cast<std::size_t>(c)] * row_sum[static_cast<std::size_t>(c)];
  }
  const double denom = std::sqrt((n * n - sum_p2) * (n * n - sum_t2));
  r.mcc = denom > 0.0 ? (sum_tp * n - sum_pt) / denom : 0.0;

  double ll = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    ll -= std::log(std::max(probs[i][static_cast<std::size_t>(labels[i])], 1e-15));
  }
  r.log_loss = ll / n;

  // one-vs-rest AUC, per class and micro-pooled
  std::vector<double> micro_scores;
  std::vector<char> micro_pos;
  micro_scores.reserve(probs.size() * static_cast<std::size_t>(k));
  micro_pos.reserve(probs.size() * static_cast<std::size_t>(k));
  double macro_auc = 0.0;
  int auc_classes = 0;
  for (int c = 0; c < k; ++c) {
    std::vector<double> scores(probs.size());
    std::vector<char> pos(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
      scores[i] = probs[i][static_cast<std::size_t>(c)];
      pos[i] = labels[i] == c ? 1 : 0;
      micro_scores.push_back(scores[i]);
      micro_pos.push_back(pos[i]);
    }
    r.per_class[static_cast<std::size_t>(c)].auc = rank_auc(scores, pos);
    if (r.per_class[static_cast<std::size_t>(c)].support > 0 &&
        r.per_class[static_cast<std::size_t>(c)].support < r.n) {
      macro_auc += r.per_class[static_cast<std::size_t>(c)].auc;
      ++auc_classes;
    }
  }
  r.roc_macro_auc = auc_classes > 0 ? macro_auc / auc_classes : 0.5;
  r.roc_micro_auc = rank_auc(micro_scores, micro_pos);
  return r;
}

std::vector<Misclassification> top_misclassifications(const MetricsReport& report, int top_n) {
  std::vector<Misclassification> out;
  for (int a = 0; a < report.n_classes; ++a) {
    int support = 0;
    for (int b = 0; b < report.n_classes; ++b) support += report.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    for (int b = 0; b < report.n_classes; ++b) {
      if (a == b) continue;
      const int count = report.confusion[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      if (count > 0) {
        out.push_back({a, b, count, support > 0 ? static_cast<double>(count) / support : 0.0});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Misclassification& x, const Misclassification& y) {
    return x.count > y.count;
  });
  if (static_cast<int>(out.size()) > top_n) out.resize(static_cast<std::size_t>(top_n));
  return out;
}

std::string MetricsReport::to_json(const std::vector<std::string>& class_names) const {
  nlohmann::json j;
  j["n"] = n;
  j["accuracy"] = accuracy;
  j["balanced_accuracy"] = balanced_accuracy;
  j["macro_f1"] = macro_f1;
  j["weighted_f1"] = weighted_f1;
  j["cohens_kappa"] = cohens_kappa;
  j["mcc"] = mcc;
  j["log_loss"] = log_loss;
  j["roc_micro_auc"] = roc_micro_auc;
  j["roc_macro_auc"] = roc_macro_auc;
  j["confusion_matrix"] = confusion;

  nlohmann::json per;
  for (int c = 0; c < n_classes; ++c) {
    nlohmann::json e;
    e["class"] = class_names.empty() ? std::to_string(c) : class_names[static_cast<std::size_t>(c)];
    e["support"] = per_class[static_cast<std::size_t>(c)].support;
    e["precision"] = per_class[static_cast<std::size_t>(c)].precision;
    e["recall"] = per_class[static_cast<std::size_t>(c)].recall;
    e["f1"] = per_class[static_cast<std::size_t>(c)].f1;
    e["auc"] = per_class[static_cast<std::size_t>(c)].auc;
    per.push_back(e);
  }
  j["per_class"] = per;

  nlohmann::json mis;
  for (const auto& m : top_misclassifications(*this)) {
    nlohmann::json e;
    e["true"] = class_names.empty() ? std::to_string(m.true_class) : class_names[static_cast<std::size_t>(m.true_class)];
    e["predicted"] = class_names.empty() ? std::to_string(m.predicted_class)
                                         : class_names[static_cast<std::size_t>(m.predicted_class)];
    e["count"] = m.count;
    e["rate"] = m.rate;
    mis.push_back(e);
  }
  j["top_misclassifications"] = mis;
  return j.dump(2) + "\n";
}

}  // namespace affect::train
