#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "affect/features.hpp"
#include "affect/metrics.hpp"
#include "affect/nn.hpp"

namespace affect::train {

using autograd::Tensor;

struct TrainConfig {
  double lr = 5e-4;
  int batch_size = 64;
  int epochs = 200;
  int warmup_epochs = 15;
  double weight_decay = 0.01;
  double grad_clip = 1.0;
  double label_smoothing = 0.1;
  double lambda0 = 0.001;  // annealed reconstruction weight
  int patience = 25;
  std::uint64_t seed = 0;
  std::vector<double> class_weights;  // empty = uniform

  void validate() const;
};

// Label-smoothed cross entropy, each sample scaled by the weight of its
// true class, averaged over the batch.
Tensor smoothed_weighted_ce(const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<double>& weights, double epsilon);

// lambda(e) = lambda0 * (1 - e/E)
double lambda_at(int epoch, const TrainConfig& cfg);
Tensor composite_loss(const Tensor& ce, const Tensor& recon_mse, int epoch,
                      const TrainConfig& cfg);

// Linear warmup to cfg.lr over warmup_epochs, then cosine annealing to 0.
double lr_at(int epoch, const TrainConfig& cfg);

// Scales every gradient by max_norm/norm when the global L2 norm exceeds
// max_norm. Returns the pre-clip norm.
double clip_gradients(const std::vector<std::pair<std::string, Tensor>>& params,
                      double max_norm);

// Adam with decoupled weight decay; decay is applied to the parameter
// directly, never through the moment estimates.
class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, Tensor>> params, double weight_decay,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void zero_grad();
  void step(double lr);

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<std::vector<double>> m_, v_;
  double weight_decay_, beta1_, beta2_, eps_;
  long long t_ = 0;
};

struct HistoryRow {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double ce = 0.0;
  double recon = 0.0;
  double test_macro_f1 = 0.0;
  double test_accuracy = 0.0;
};

std::string history_csv(const std::vector<HistoryRow>& history);

using StateSnapshot = std::vector<std::pair<std::string, std::vector<double>>>;

struct TrainResult {
  std::vector<HistoryRow> history;
  int best_epoch = -1;
  double best_macro_f1 = 0.0;
  StateSnapshot best_state;
};

StateSnapshot snapshot_state(const nn::Model& model);
void restore_state(nn::Model& model, const StateSnapshot& snapshot);

// Builds the model-input tensors for the given sample indices.
nn::Batch make_batch(const features::Dataset& ds, const std::vector<int>& indices,
                     const nn::ModelConfig& cfg);

struct EvalResult {
  std::vector<std::vector<double>> probs;
  std::vector<int> labels;
};

EvalResult evaluate(nn::Model& model, const features::Dataset& ds, features::Split split,
                    int batch_size = 256);

// Shuffled minibatches, composite annealed loss, global-norm clipping,
// AdamW with the warmup+cosine schedule, early stopping on the test
// macro F1 with the configured patience. Returns the best snapshot.
TrainResult train_loop(nn::Model& model, const features::Dataset& ds, const TrainConfig& cfg);

}  // namespace affect::train
