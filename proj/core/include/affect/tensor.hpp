#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "affect/rng.hpp"

namespace affect::autograd {

using Shape = std::vector<int>;

long long shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

// One recorded value in the computation graph. backward_fn reads this
// node's grad and accumulates into the parents' grads.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated on demand
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";

  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
  }
};

// Value-semantic handle to a graph node. Copies share storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad = false);
  // Glorot/Xavier uniform: limit = gain * sqrt(6 / (fan_in + fan_out)).
  static Tensor xavier_uniform(Shape shape, int fan_in, int fan_out, double gain, Rng& rng);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  int dim(int i) const { return node_->shape[static_cast<std::size_t>(i)]; }
  long long numel() const { return static_cast<long long>(node_->value.size()); }

  std::vector<double>& data() { return node_->value; }
  const std::vector<double>& data() const { return node_->value; }
  std::vector<double>& grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad() {
    if (!node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
  }

  // Scalar access; throws DataError unless numel() == 1.
  double item() const;
  double at(std::initializer_list<int> idx) const;

  std::shared_ptr<Node>& node() { return node_; }
  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Topologically ordered view of the graph below a root; backward visits
// every node exactly once.
struct Tape {
  std::vector<Node*> order;  // leaves first, root last

  static Tape build(const Tensor& root);
  // Seeds the root with d(root)/d(root) = 1 and propagates.
  void run_backward();
};

// Reverse-mode differentiation of a scalar loss.
void backward(const Tensor& loss);

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double worst = 0.0;
  bool pass = true;
};

// Central finite differences of f against the analytic gradients of the
// named parameters. f must rebuild its graph on every call and return a
// scalar.
GradCheckReport gradcheck(const std::function<Tensor()>& f,
                          const std::vector<std::pair<std::string, Tensor>>& params,
                          double h = 1e-4, double tol = 1e-3);

}  // namespace affect::autograd
