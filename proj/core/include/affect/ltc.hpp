#pragma once

#include <string>
#include <utility>
#include <vector>

#include "affect/rng.hpp"
#include "affect/tensor.hpp"

namespace affect::ltc {

using autograd::Tensor;

// Liquid time-constant cell. Each hidden unit carries a learnable
// log-time-constant theta_tau; tau = exp(theta_tau) stays positive for
// any real parameter value, and the per-step decay d = exp(-dt/tau)
// stays inside (0,1).
struct LTCCell {
  Tensor w_x;        // (d_h, d_in)
  Tensor w_h;        // (d_h, d_h)
  Tensor b;          // (d_h)
  Tensor theta_tau;  // (d_h)
  double delta_t = 1.0;
  int d_in = 0;
  int d_h = 0;
};

// theta_tau ~ U[log 0.1, log 10] (tau in [0.1, 10]); W_x, W_h Xavier
// uniform; b zero.
LTCCell init_cell(int d_in, int d_h, Rng& rng);

// d = exp(-dt / exp(theta_tau)), elementwise.
Tensor decay_factors(const LTCCell& cell);

// h_t = d (.) h_prev + (1 - d) (.) tanh(W_x x_t + W_h h_prev + b).
// Computed as tanh + d (.) (h_prev - tanh) so |h_t| never exceeds
// max(|h_prev|, 1) even in floating point.
Tensor ltc_step(const LTCCell& cell, const Tensor& x_t, const Tensor& h_prev);

struct LNNStack {
  std::vector<LTCCell> layers;
  double dropout = 0.3;  // between layers, training only
};

LNNStack init_stack(int d_in, int d_h, int n_layers, Rng& rng, double dropout = 0.3);

// sequence: (B, T, d_in) -> top-layer states (B, T, d_h), h_0 = 0.
Tensor ltc_forward(const LNNStack& stack, const Tensor& sequence, bool training, Rng& rng);

// tau = exp(theta_tau) per neuron, one vector per layer.
std::vector<std::vector<double>> time_constants(const LNNStack& stack);

// ltc.layer{l}.{Wx|Wh|b|theta_tau}
std::vector<std::pair<std::string, Tensor>> parameters(const LNNStack& stack);

}  // namespace affect::ltc
