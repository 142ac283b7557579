#pragma once

#include <string>
#include <vector>

namespace affect::train {

struct PerClassMetrics {
  int support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

struct MetricsReport {
  int n = 0;
  int n_classes = 0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double cohens_kappa = 0.0;
  double mcc = 0.0;
  double log_loss = 0.0;
  double roc_micro_auc = 0.0;
  double roc_macro_auc = 0.0;
  std::vector<std::vector<int>> confusion;  // [true][pred]
  std::vector<PerClassMetrics> per_class;

  std::string to_json(const std::vector<std::string>& class_names = {}) const;
};

// probs: one simplex row per sample. Throws NumericError when the labels
// contain a single class (kappa/MCC undefined).
MetricsReport compute_metrics(const std::vector<std::vector<double>>& probs,
                              const std::vector<int>& labels, int n_classes);

struct Misclassification {
  int true_class = 0;
  int predicted_class = 0;
  int count = 0;
  double rate = 0.0;  // count / support of the true class
};

// Off-diagonal confusion entries sorted by count descending.
std::vector<Misclassification> top_misclassifications(const MetricsReport& report, int top_n = 10);

}  // namespace affect::train
