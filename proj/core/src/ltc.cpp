#include "affect/ltc.hpp"

#include <cmath>

#include "affect/errors.hpp"
#include "affect/ops.hpp"

namespace affect::ltc {

using namespace autograd;

LTCCell init_cell(int d_in, int d_h, Rng& rng) {
  if (d_in <= 0 || d_h <= 0) throw DataError("ltc: dimensions must be positive");
  LTCCell cell;
  cell.d_in = d_in;
  cell.d_h = d_h;
  cell.w_x = Tensor::xavier_uniform({d_h, d_in}, d_in, d_h, 1.0, rng);
  cell.w_h = Tensor::xavier_uniform({d_h, d_h}, d_h, d_h, 1.0, rng);
  cell.b = Tensor::zeros({d_h}, true);
  cell.theta_tau = Tensor::uniform({d_h}, std::log(0.1), std::log(10.0), rng, true);
  return cell;
}

Tensor decay_factors(const LTCCell& cell) {
  // exp(-dt/tau) written as exp(-dt * exp(-theta_tau))
  return exp_t(mul_scalar(exp_t(neg(cell.theta_tau)), -cell.delta_t));
}

Tensor ltc_step(const LTCCell& cell, const Tensor& x_t, const Tensor& h_prev) {
  if (x_t.ndim() != 2 || x_t.dim(1) != cell.d_in || h_prev.ndim() != 2 ||
      h_prev.dim(1) != cell.d_h || x_t.dim(0) != h_prev.dim(0)) {
    throw DataError("ltc_step: shape mismatch, x " + shape_str(x_t.shape()) +
                    " h " + shape_str(h_prev.shape()) + " for cell (" +
                    std::to_string(cell.d_in) + " -> " + std::to_string(cell.d_h) + ")");
  }
  Tensor pre = add(add(matmul(x_t, transpose(cell.w_x)), matmul(h_prev, transpose(cell.w_h))), cell.b);
  Tensor drive = tanh_t(pre);
  Tensor d = decay_factors(cell);
  return add(drive, mul(d, sub(h_prev, drive)));
}

LNNStack init_stack(int d_in, int d_h, int n_layers, Rng& rng, double dropout) {
  LNNStack stack;
  stack.dropout = dropout;
  int in = d_in;
  for (int l = 0; l < n_layers; ++l) {
    stack.layers.push_back(init_cell(in, d_h, rng));
    in = d_h;
  }
  return stack;
}

Tensor ltc_forward(const LNNStack& stack, const Tensor& sequence, bool training, Rng& rng) {
  if (sequence.ndim() != 3 || sequence.dim(1) < 1) {
    throw DataError("ltc_forward: expected non-empty (B, T, d_in) sequence, got " +
                    shape_str(sequence.shape()));
  }
  const int batch = sequence.dim(0);
  const int steps = sequence.dim(1);

  Tensor input = sequence;
  Tensor hidden_seq;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const LTCCell& cell = stack.layers[l];
    if (l > 0) input = dropout(input, stack.dropout, training, rng);

    // hoist the constant pieces out of the time loop
    Tensor wxT = transpose(cell.w_x);
    Tensor whT = transpose(cell.w_h);
    Tensor d = decay_factors(cell);

    Tensor h = Tensor::zeros({batch, cell.d_h});
    std::vector<Tensor> states;
    states.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
      Tensor x_t = select(input, 1, t);
      Tensor pre = add(add(matmul(x_t, wxT), matmul(h, whT)), cell.b);
      Tensor drive = tanh_t(pre);
      h = add(drive, mul(d, sub(h, drive)));
      states.push_back(reshape(h, {batch, 1, cell.d_h}));
    }
    hidden_seq = concat(states, 1);
    input = hidden_seq;
  }
  return hidden_seq;
}

std::vector<std::vector<double>> time_constants(const LNNStack& stack) {
  std::vector<std::vector<double>> taus;
  for (const LTCCell& cell : stack.layers) {
    std::vector<double> t(cell.theta_tau.data().size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(cell.theta_tau.data()[i]);
    taus.push_back(std::move(t));
  }
  return taus;
}

std::vector<std::pair<std::string, Tensor>> parameters(const LNNStack& stack) {
  std::vector<std::pair<std::string, Tensor>> params;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const std::string prefix = "ltc.layer" + std::to_string(l) + ".";
    params.emplace_back(prefix + "Wx", stack.layers[l].w_x);
    params.emplace_back(prefix + "Wh", stack.layers[l].w_h);
    params.emplace_back(prefix + "b", stack.layers[l].b);
    params.emplace_back(prefix + "theta_tau", stack.layers[l].theta_tau);
  }
  return params;
}

}  // namespace affect::ltc
