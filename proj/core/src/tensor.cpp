#include "affect/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "affect/errors.hpp"

namespace affect::autograd {

long long shape_numel(const Shape& s) {
  long long n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.assign(static_cast<std::size_t>(shape_numel(n->shape)), value);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  if (static_cast<long long>(data.size()) != shape_numel(shape)) {
    throw DataError("tensor: data size " + std::to_string(data.size()) +
                    " does not match shape " + shape_str(shape));
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(data);
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_data({1}, {v}, requires_grad);
}

Tensor Tensor::uniform(Shape shape, double lo, double hi, Rng& rng, bool requires_grad) {
  std::vector<double> d(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : d) v = rng.uniform(lo, hi);
  return from_data(std::move(shape), std::move(d), requires_grad);
}

Tensor Tensor::xavier_uniform(Shape shape, int fan_in, int fan_out, double gain, Rng& rng) {
  const double limit = gain * std::sqrt(6.0 / (fan_in + fan_out));
  return uniform(std::move(shape), -limit, limit, rng, true);
}

double Tensor::item() const {
  if (!node_ || node_->value.size() != 1) {
    throw DataError("tensor: item() requires exactly one element");
  }
  return node_->value[0];
}

double Tensor::at(std::initializer_list<int> idx) const {
  const Shape& s = node_->shape;
  if (idx.size() != s.size()) throw DataError("tensor: at() rank mismatch");
  long long off = 0;
  std::size_t i = 0;
  for (int v : idx) {
    off = off * s[i] + v;
    ++i;
  }
  return node_->value[static_cast<std::size_t>(off)];
}

Tape Tape::build(const Tensor& root) {
  Tape tape;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (visited.count(node)) {
      stack.pop_back();
      continue;
    }
    if (next < node->parents.size()) {
      Node* parent = node->parents[next].get();
      ++next;
      if (!visited.count(parent)) stack.emplace_back(parent, 0);
    } else {
      visited.insert(node);
      tape.order.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

void Tape::run_backward() {
  if (order.empty()) return;
  Node* root = order.back();
  root->ensure_grad();
  std::fill(root->grad.begin(), root->grad.end(), 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->requires_grad) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw DataError("backward: loss must be a defined scalar tensor");
  }
  Tape tape = Tape::build(loss);
  tape.run_backward();
}

GradCheckReport gradcheck(const std::function<Tensor()>& f,
                          const std::vector<std::pair<std::string, Tensor>>& params,
                          double h, double tol) {
  for (const auto& [name, p] : params) {
    const_cast<Tensor&>(p).zero_grad();
  }
  Tensor loss = f();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, p] : params) {
    analytic.push_back(const_cast<Tensor&>(p).grad());
  }

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi].second;
    GradCheckEntry entry;
    entry.name = params[pi].first;
    for (std::size_t i = 0; i < p.data().size(); ++i) {
      const double orig = p.data()[i];
      p.data()[i] = orig + h;
      const double up = f().item();
      p.data()[i] = orig - h;
      const double down = f().item();
      p.data()[i] = orig;
      const double fd = (up - down) / (2.0 * h);
      const double an = analytic[pi][i];
      const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    entry.pass = entry.max_rel_err < tol;
    report.worst = std::max(report.worst, entry.max_rel_err);
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace affect::autograd
