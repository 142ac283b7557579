#pragma once

#include <vector>

#include "affect/rng.hpp"
#include "affect/tensor.hpp"

namespace affect::autograd {

// Elementwise binary ops with numpy-style right-aligned broadcasting;
// gradients are sum-reduced over broadcast dimensions.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// 2-D matrix product (m,k)x(k,n).
Tensor matmul(const Tensor& a, const Tensor& b);

// x: (B, C_in, L), w: (C_out, C_in, k), bias: (C_out) or undefined.
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias,
              int stride = 1, int padding = 0);

// x: (B, C, L) -> (B, C, (L - window)/stride + 1)
Tensor maxpool1d(const Tensor& x, int window, int stride);

Tensor tanh_t(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp_t(const Tensor& a);
Tensor log_t(const Tensor& a);

Tensor softmax(const Tensor& a, int axis);
Tensor log_softmax(const Tensor& a, int axis);

Tensor sum_all(const Tensor& a);
Tensor mean_all(const Tensor& a);
Tensor sum_axis(const Tensor& a, int axis);
Tensor mean_axis(const Tensor& a, int axis);

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor transpose(const Tensor& a);        // 2-D
Tensor swap_last_two(const Tensor& a);    // 3-D (B, C, L) <-> (B, L, C)
Tensor select(const Tensor& a, int axis, int index);  // drops the axis
Tensor reshape(const Tensor& a, Shape shape);

// Inverted dropout: scales by 1/(1-p) during training, identity in eval.
Tensor dropout(const Tensor& a, double p, bool training, Rng& rng);

// Batch normalization over (B) for 2-D input (B, D) or over (B, L) for
// 3-D input (B, C, L). running_mean/var are plain state updated in
// training mode and used verbatim in eval mode.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 Tensor& running_mean, Tensor& running_var,
                 double momentum, double eps, bool training);

}  // namespace affect::autograd
