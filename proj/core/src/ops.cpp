#include "affect/ops.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>

#include "affect/errors.hpp"

namespace affect::autograd {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

Tensor make_result(Shape shape, std::vector<std::shared_ptr<Node>> parents, const char* op) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value.resize(static_cast<std::size_t>(shape_numel(n->shape)));
  n->parents = std::move(parents);
  n->op = op;
  for (const auto& p : n->parents) n->requires_grad = n->requires_grad || p->requires_grad;
  return Tensor(std::move(n));
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw DataError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

Shape broadcast_shape(const char* op, const Shape& a, const Shape& b) {
  const std::size_t rank = std::max(a.size(), b.size());
  Shape out(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const int da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const int db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) shape_error(op, a, b);
    out[i] = std::max(da, db);
  }
  return out;
}

// Row-major strides padded to `rank`, with zero stride on broadcast dims.
std::vector<long long> broadcast_strides(const Shape& s, const Shape& out) {
  std::vector<long long> strides(out.size(), 0);
  long long acc = 1;
  for (std::size_t i = s.size(); i-- > 0;) {
    const std::size_t oi = i + (out.size() - s.size());
    strides[oi] = (s[i] == 1 && out[oi] != 1) ? 0 : acc;
    acc *= s[i];
  }
  return strides;
}

// Walks every output element of a broadcast binary op, handing the
// callback the linear offsets (out, a, b).
template <class F>
void for_each_broadcast(const Shape& out, const std::vector<long long>& sa,
                        const std::vector<long long>& sb, F&& f) {
  const std::size_t rank = out.size();
  const long long total = shape_numel(out);
  std::vector<long long> coord(rank, 0);
  long long oa = 0, ob = 0;
  for (long long i = 0; i < total; ++i) {
    f(i, oa, ob);
    for (std::size_t d = rank; d-- > 0;) {
      ++coord[d];
      oa += sa[d];
      ob += sb[d];
      if (coord[d] < out[d]) break;
      oa -= sa[d] * out[d];
      ob -= sb[d] * out[d];
      coord[d] = 0;
    }
  }
}

enum class BinOp { Add, Sub, Mul };

Tensor binary_op(const Tensor& a, const Tensor& b, BinOp kind, const char* name) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  Tensor out = make_result(broadcast_shape(name, sa, sb), {a.node(), b.node()}, name);

  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  const std::size_t n = out.data().size();

  if (sa == sb) {
    switch (kind) {
      case BinOp::Add:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
        break;
      case BinOp::Sub:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
        break;
      case BinOp::Mul:
        for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
        break;
    }
  } else {
    const auto stra = broadcast_strides(sa, out.shape());
    const auto strb = broadcast_strides(sb, out.shape());
    for_each_broadcast(out.shape(), stra, strb, [&](long long i, long long ia, long long ib) {
      const double x = pa[ia], y = pb[ib];
      po[i] = kind == BinOp::Add ? x + y : (kind == BinOp::Sub ? x - y : x * y);
    });
  }

  if (out.requires_grad()) {
    auto an = a.node();
    auto bn = b.node();
    Shape out_shape = out.shape();
    out.node()->backward_fn = [an, bn, kind, out_shape](Node& self) {
      const double* g = self.grad.data();
      const std::size_t total = self.grad.size();
      const bool same = an->shape == bn->shape;
      if (an->requires_grad) {
        an->ensure_grad();
        double* ga = an->grad.data();
        if (same && kind != BinOp::Mul) {
          for (std::size_t i = 0; i < total; ++i) ga[i] += g[i];
        } else if (same) {
          const double* pb2 = bn->value.data();
          for (std::size_t i = 0; i < total; ++i) ga[i] += g[i] * pb2[i];
        } else {
          const auto stra = broadcast_strides(an->shape, out_shape);
          const auto strb = broadcast_strides(bn->shape, out_shape);
          const double* pb2 = bn->value.data();
          for_each_broadcast(out_shape, stra, strb, [&](long long i, long long ia, long long ib) {
            ga[ia] += kind == BinOp::Mul ? g[i] * pb2[ib] : g[i];
          });
        }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        double* gb = bn->grad.data();
        if (same && kind == BinOp::Add) {
          for (std::size_t i = 0; i < total; ++i) gb[i] += g[i];
        } else if (same && kind == BinOp::Sub) {
          for (std::size_t i = 0; i < total; ++i) gb[i] -= g[i];
        } else if (same) {
          const double* pa2 = an->value.data();
          for (std::size_t i = 0; i < total; ++i) gb[i] += g[i] * pa2[i];
        } else {
          const auto stra = broadcast_strides(an->shape, out_shape);
          const auto strb = broadcast_strides(bn->shape, out_shape);
          const double* pa2 = an->value.data();
          for_each_broadcast(out_shape, stra, strb, [&](long long i, long long ia, long long ib) {
            if (kind == BinOp::Mul) {
              gb[ib] += g[i] * pa2[ia];
            } else if (kind == BinOp::Sub) {
              gb[ib] -= g[i];
            } else {
              gb[ib] += g[i];
            }
          });
        }
      }
    };
  }
  return out;
}

template <class Fwd, class Bwd>
Tensor unary_op(const Tensor& a, const char* name, Fwd fwd, Bwd bwd) {
  Tensor out = make_result(a.shape(), {a.node()}, name);
  const double* pa = a.data().data();
  double* po = out.data().data();
  const std::size_t n = out.data().size();
  for (std::size_t i = 0; i < n; ++i) po[i] = fwd(pa[i]);
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, bwd](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      const double* x = an->value.data();
      const double* y = self.value.data();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += g[i] * bwd(x[i], y[i]);
    };
  }
  return out;
}

// axis decomposition: outer * n * inner with n = shape[axis]
struct AxisView {
  long long outer = 1, n = 1, inner = 1;
};

AxisView axis_view(const Shape& s, int axis) {
  AxisView v;
  v.n = s[static_cast<std::size_t>(axis)];
  for (int i = 0; i < axis; ++i) v.outer *= s[static_cast<std::size_t>(i)];
  for (std::size_t i = static_cast<std::size_t>(axis) + 1; i < s.size(); ++i) v.inner *= s[i];
  return v;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinOp::Add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinOp::Sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinOp::Mul, "mul"); }

Tensor add_scalar(const Tensor& a, double s) {
  return unary_op(a, "add_scalar", [s](double x) { return x + s; },
                  [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary_op(a, "mul_scalar", [s](double x) { return x * s; },
                  [s](double, double) { return s; });
}

Tensor neg(const Tensor& a) { return mul_scalar(a, -1.0); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(0)) {
    shape_error("matmul", a.shape(), b.shape());
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out = make_result({m, n}, {a.node(), b.node()}, "matmul");
  CMapMat A(a.data().data(), m, k);
  CMapMat B(b.data().data(), k, n);
  MapMat C(out.data().data(), m, n);
  C.noalias() = A * B;

  if (out.requires_grad()) {
    auto an = a.node();
    auto bn = b.node();
    out.node()->backward_fn = [an, bn, m, k, n](Node& self) {
      CMapMat G(self.grad.data(), m, n);
      if (an->requires_grad) {
        an->ensure_grad();
        MapMat GA(an->grad.data(), m, k);
        CMapMat B2(bn->value.data(), k, n);
        GA.noalias() += G * B2.transpose();
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        MapMat GB(bn->grad.data(), k, n);
        CMapMat A2(an->value.data(), m, k);
        GB.noalias() += A2.transpose() * G;
      }
    };
  }
  return out;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, int stride, int padding) {
  if (x.ndim() != 3 || w.ndim() != 3 || x.dim(1) != w.dim(1)) {
    shape_error("conv1d", x.shape(), w.shape());
  }
  const int batch = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const int cout = w.dim(0), k = w.dim(2);
  const int lout = (len + 2 * padding - k) / stride + 1;
  if (lout <= 0) shape_error("conv1d", x.shape(), w.shape());
  if (bias.defined() && (bias.ndim() != 1 || bias.dim(0) != cout)) {
    shape_error("conv1d bias", bias.shape(), w.shape());
  }

  // im2col: (cin*k) x (batch*lout), kept alive for the backward pass
  auto col = std::make_shared<std::vector<double>>(
      static_cast<std::size_t>(cin) * k * batch * lout, 0.0);
  const double* px = x.data().data();
  {
    double* pc = col->data();
    for (int c = 0; c < cin; ++c) {
      for (int j = 0; j < k; ++j) {
        double* row = pc + (static_cast<std::size_t>(c) * k + j) * batch * lout;
        for (int b = 0; b < batch; ++b) {
          const double* xb = px + (static_cast<std::size_t>(b) * cin + c) * len;
          for (int t = 0; t < lout; ++t) {
            const int src = t * stride + j - padding;
            row[static_cast<std::size_t>(b) * lout + t] =
                (src >= 0 && src < len) ? xb[src] : 0.0;
          }
        }
      }
    }
  }

  std::vector<std::shared_ptr<Node>> parents{x.node(), w.node()};
  if (bias.defined()) parents.push_back(bias.node());
  Tensor out = make_result({batch, cout, lout}, std::move(parents), "conv1d");

  std::vector<double> tmp(static_cast<std::size_t>(cout) * batch * lout);
  {
    CMapMat W(w.data().data(), cout, cin * k);
    CMapMat Col(col->data(), cin * k, batch * lout);
    MapMat O(tmp.data(), cout, batch * lout);
    O.noalias() = W * Col;
  }
  {
    double* po = out.data().data();
    const double* pb = bias.defined() ? bias.data().data() : nullptr;
    for (int b = 0; b < batch; ++b) {
      for (int o = 0; o < cout; ++o) {
        const double add = pb ? pb[o] : 0.0;
        const double* src = tmp.data() + static_cast<std::size_t>(o) * batch * lout + static_cast<std::size_t>(b) * lout;
        double* dst = po + (static_cast<std::size_t>(b) * cout + o) * lout;
        for (int t = 0; t < lout; ++t) dst[t] = src[t] + add;
      }
    }
  }

  if (out.requires_grad()) {
    auto xn = x.node();
    auto wn = w.node();
    auto bn = bias.defined() ? bias.node() : nullptr;
    out.node()->backward_fn = [xn, wn, bn, col, batch, cin, cout, len, lout, k, stride,
                               padding](Node& self) {
      // gather grad into (cout, batch*lout)
      std::vector<double> gmat(static_cast<std::size_t>(cout) * batch * lout);
      const double* pg = self.grad.data();
      for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < cout; ++o) {
          const double* src = pg + (static_cast<std::size_t>(b) * cout + o) * lout;
          double* dst = gmat.data() + static_cast<std::size_t>(o) * batch * lout + static_cast<std::size_t>(b) * lout;
          for (int t = 0; t < lout; ++t) dst[t] = src[t];
        }
      }
      CMapMat G(gmat.data(), cout, batch * lout);
      if (wn->requires_grad) {
        wn->ensure_grad();
        CMapMat Col(col->data(), cin * k, batch * lout);
        MapMat GW(wn->grad.data(), cout, cin * k);
        GW.noalias() += G * Col.transpose();
      }
      if (bn && bn->requires_grad) {
        bn->ensure_grad();
        for (int o = 0; o < cout; ++o) {
          double acc = 0.0;
          const double* row = gmat.data() + static_cast<std::size_t>(o) * batch * lout;
          for (int i = 0; i < batch * lout; ++i) acc += row[i];
          bn->grad[static_cast<std::size_t>(o)] += acc;
        }
      }
      if (xn->requires_grad) {
        xn->ensure_grad();
        std::vector<double> gcol(static_cast<std::size_t>(cin) * k * batch * lout);
        {
          CMapMat W(wn->value.data(), cout, cin * k);
          MapMat GC(gcol.data(), cin * k, batch * lout);
          GC.noalias() = W.transpose() * G;
        }
        double* gx = xn->grad.data();
        for (int c = 0; c < cin; ++c) {
          for (int j = 0; j < k; ++j) {
            const double* row = gcol.data() + (static_cast<std::size_t>(c) * k + j) * batch * lout;
            for (int b = 0; b < batch; ++b) {
              double* dst = gx + (static_cast<std::size_t>(b) * cin + c) * len;
              for (int t = 0; t < lout; ++t) {
                const int src = t * stride + j - padding;
                if (src >= 0 && src < len) dst[src] += row[static_cast<std::size_t>(b) * lout + t];
              }
            }
          }
        }
      }
    };
  }
  return out;
}

Tensor maxpool1d(const Tensor& x, int window, int stride) {
  if (x.ndim() != 3) shape_error("maxpool1d", x.shape(), {window});
  const int batch = x.dim(0), c = x.dim(1), len = x.dim(2);
  const int lout = (len - window) / stride + 1;
  if (lout <= 0) shape_error("maxpool1d", x.shape(), {window});
  Tensor out = make_result({batch, c, lout}, {x.node()}, "maxpool1d");

  auto argmax = std::make_shared<std::vector<int>>(static_cast<std::size_t>(batch) * c * lout);
  const double* px = x.data().data();
  double* po = out.data().data();
  for (int bc = 0; bc < batch * c; ++bc) {
    const double* src = px + static_cast<std::size_t>(bc) * len;
    double* dst = po + static_cast<std::size_t>(bc) * lout;
    int* am = argmax->data() + static_cast<std::size_t>(bc) * lout;
    for (int t = 0; t < lout; ++t) {
      int best = t * stride;
      for (int j = 1; j < window; ++j) {
        if (src[t * stride + j] > src[best]) best = t * stride + j;
      }
      dst[t] = src[best];
      am[t] = best;
    }
  }

  if (out.requires_grad()) {
    auto xn = x.node();
    out.node()->backward_fn = [xn, argmax, batch, c, len, lout](Node& self) {
      xn->ensure_grad();
      double* gx = xn->grad.data();
      const double* g = self.grad.data();
      for (int bc = 0; bc < batch * c; ++bc) {
        const int* am = argmax->data() + static_cast<std::size_t>(bc) * lout;
        for (int t = 0; t < lout; ++t) {
          gx[static_cast<std::size_t>(bc) * len + am[t]] += g[static_cast<std::size_t>(bc) * lout + t];
        }
      }
    };
  }
  return out;
}

Tensor tanh_t(const Tensor& a) {
  return unary_op(a, "tanh", [](double x) { return std::tanh(x); },
                  [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary_op(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
                  [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                  [](double, double y) { return y * (1.0 - y); });
}

Tensor exp_t(const Tensor& a) {
  return unary_op(a, "exp", [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Tensor log_t(const Tensor& a) {
  return unary_op(a, "log", [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Tensor softmax(const Tensor& a, int axis) {
  const AxisView v = axis_view(a.shape(), axis);
  Tensor out = make_result(a.shape(), {a.node()}, "softmax");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (long long o = 0; o < v.outer; ++o) {
    for (long long in = 0; in < v.inner; ++in) {
      const long long base = o * v.n * v.inner + in;
      double mx = -1e300;
      for (long long i = 0; i < v.n; ++i) mx = std::max(mx, pa[base + i * v.inner]);
      double z = 0.0;
      for (long long i = 0; i < v.n; ++i) {
        const double e = std::exp(pa[base + i * v.inner] - mx);
        po[base + i * v.inner] = e;
        z += e;
      }
      for (long long i = 0; i < v.n; ++i) po[base + i * v.inner] /= z;
    }
  }
  if (out.requires_grad()) {
    auto an = a.node();
    Shape s = a.shape();
    out.node()->backward_fn = [an, v](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      const double* y = self.value.data();
      for (long long o = 0; o < v.outer; ++o) {
        for (long long in = 0; in < v.inner; ++in) {
          const long long base = o * v.n * v.inner + in;
          double dot = 0.0;
          for (long long i = 0; i < v.n; ++i) dot += g[base + i * v.inner] * y[base + i * v.inner];
          for (long long i = 0; i < v.n; ++i) {
            ga[base + i * v.inner] += y[base + i * v.inner] * (g[base + i * v.inner] - dot);
          }
        }
      }
    };
  }
  return out;
}

Tensor log_softmax(const Tensor& a, int axis) {
  const AxisView v = axis_view(a.shape(), axis);
  Tensor out = make_result(a.shape(), {a.node()}, "log_softmax");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (long long o = 0; o < v.outer; ++o) {
    for (long long in = 0; in < v.inner; ++in) {
      const long long base = o * v.n * v.inner + in;
      double mx = -1e300;
      for (long long i = 0; i < v.n; ++i) mx = std::max(mx, pa[base + i * v.inner]);
      double z = 0.0;
      for (long long i = 0; i < v.n; ++i) z += std::exp(pa[base + i * v.inner] - mx);
      const double lse = mx + std::log(z);
      for (long long i = 0; i < v.n; ++i) po[base + i * v.inner] = pa[base + i * v.inner] - lse;
    }
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, v](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      const double* y = self.value.data();
      for (long long o = 0; o < v.outer; ++o) {
        for (long long in = 0; in < v.inner; ++in) {
          const long long base = o * v.n * v.inner + in;
          double gsum = 0.0;
          for (long long i = 0; i < v.n; ++i) gsum += g[base + i * v.inner];
          for (long long i = 0; i < v.n; ++i) {
            ga[base + i * v.inner] += g[base + i * v.inner] - std::exp(y[base + i * v.inner]) * gsum;
          }
        }
      }
    };
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  Tensor out = make_result({1}, {a.node()}, "sum");
  double acc = 0.0;
  for (double v : a.data()) acc += v;
  out.data()[0] = acc;
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an](Node& self) {
      an->ensure_grad();
      const double g = self.grad[0];
      for (double& v : an->grad) v += g;
    };
  }
  return out;
}

Tensor mean_all(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.numel());
  return mul_scalar(sum_all(a), inv);
}

Tensor sum_axis(const Tensor& a, int axis) {
  const AxisView v = axis_view(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + axis);
  if (out_shape.empty()) out_shape = {1};
  Tensor out = make_result(out_shape, {a.node()}, "sum_axis");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (long long o = 0; o < v.outer; ++o) {
    for (long long in = 0; in < v.inner; ++in) {
      double acc = 0.0;
      for (long long i = 0; i < v.n; ++i) acc += pa[o * v.n * v.inner + i * v.inner + in];
      po[o * v.inner + in] = acc;
    }
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, v](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      for (long long o = 0; o < v.outer; ++o) {
        for (long long in = 0; in < v.inner; ++in) {
          const double gv = g[o * v.inner + in];
          for (long long i = 0; i < v.n; ++i) ga[o * v.n * v.inner + i * v.inner + in] += gv;
        }
      }
    };
  }
  return out;
}

Tensor mean_axis(const Tensor& a, int axis) {
  const double inv = 1.0 / a.dim(axis);
  return mul_scalar(sum_axis(a, axis), inv);
}

Tensor concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw DataError("concat: no inputs");
  const Shape& first = parts.front().shape();
  Shape out_shape = first;
  int total_axis = 0;
  for (const Tensor& t : parts) {
    if (t.ndim() != static_cast<int>(first.size())) shape_error("concat", first, t.shape());
    for (int d = 0; d < t.ndim(); ++d) {
      if (d != axis && t.dim(d) != first[static_cast<std::size_t>(d)]) {
        shape_error("concat", first, t.shape());
      }
    }
    total_axis += t.dim(axis);
  }
  out_shape[static_cast<std::size_t>(axis)] = total_axis;

  std::vector<std::shared_ptr<Node>> parents;
  for (const Tensor& t : parts) parents.push_back(t.node());
  Tensor out = make_result(out_shape, std::move(parents), "concat");

  const AxisView vo = axis_view(out_shape, axis);
  double* po = out.data().data();
  long long offset = 0;
  for (const Tensor& t : parts) {
    const AxisView vt = axis_view(t.shape(), axis);
    const double* pt = t.data().data();
    for (long long o = 0; o < vt.outer; ++o) {
      for (long long i = 0; i < vt.n; ++i) {
        const double* src = pt + (o * vt.n + i) * vt.inner;
        double* dst = po + (o * vo.n + offset + i) * vo.inner;
        std::copy(src, src + vt.inner, dst);
      }
    }
    offset += vt.n;
  }

  if (out.requires_grad()) {
    std::vector<std::shared_ptr<Node>> nodes;
    for (const Tensor& t : parts) nodes.push_back(t.node());
    out.node()->backward_fn = [nodes, vo, axis](Node& self) {
      const double* g = self.grad.data();
      long long off = 0;
      for (const auto& nd : nodes) {
        const AxisView vt = axis_view(nd->shape, axis);
        if (nd->requires_grad) {
          nd->ensure_grad();
          double* gd = nd->grad.data();
          for (long long o = 0; o < vt.outer; ++o) {
            for (long long i = 0; i < vt.n; ++i) {
              const double* src = g + (o * vo.n + off + i) * vo.inner;
              double* dst = gd + (o * vt.n + i) * vt.inner;
              for (long long k = 0; k < vt.inner; ++k) dst[k] += src[k];
            }
          }
        }
        off += vt.n;
      }
    };
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  if (a.ndim() != 2) shape_error("transpose", a.shape(), {});
  const int m = a.dim(0), n = a.dim(1);
  Tensor out = make_result({n, m}, {a.node()}, "transpose");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) po[static_cast<std::size_t>(j) * m + i] = pa[static_cast<std::size_t>(i) * n + j];
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, m, n](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
      }
    };
  }
  return out;
}

Tensor swap_last_two(const Tensor& a) {
  if (a.ndim() != 3) shape_error("swap_last_two", a.shape(), {});
  const int b = a.dim(0), m = a.dim(1), n = a.dim(2);
  Tensor out = make_result({b, n, m}, {a.node()}, "swap_last_two");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (int bi = 0; bi < b; ++bi) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        po[(static_cast<std::size_t>(bi) * n + j) * m + i] = pa[(static_cast<std::size_t>(bi) * m + i) * n + j];
      }
    }
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, b, m, n](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      for (int bi = 0; bi < b; ++bi) {
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            ga[(static_cast<std::size_t>(bi) * m + i) * n + j] += g[(static_cast<std::size_t>(bi) * n + j) * m + i];
          }
        }
      }
    };
  }
  return out;
}

Tensor select(const Tensor& a, int axis, int index) {
  if (axis < 0 || axis >= a.ndim() || index < 0 || index >= a.dim(axis)) {
    throw DataError("select: axis/index out of range for " + shape_str(a.shape()));
  }
  const AxisView v = axis_view(a.shape(), axis);
  Shape out_shape = a.shape();
  out_shape.erase(out_shape.begin() + axis);
  if (out_shape.empty()) out_shape = {1};
  Tensor out = make_result(out_shape, {a.node()}, "select");
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (long long o = 0; o < v.outer; ++o) {
    const double* src = pa + (o * v.n + index) * v.inner;
    std::copy(src, src + v.inner, po + o * v.inner);
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, v, index](Node& self) {
      an->ensure_grad();
      double* ga = an->grad.data();
      const double* g = self.grad.data();
      for (long long o = 0; o < v.outer; ++o) {
        double* dst = ga + (o * v.n + index) * v.inner;
        for (long long k = 0; k < v.inner; ++k) dst[k] += g[o * v.inner + k];
      }
    };
  }
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    shape_error("reshape", a.shape(), shape);
  }
  Tensor out = make_result(std::move(shape), {a.node()}, "reshape");
  out.data() = a.data();
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an](Node& self) {
      an->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    };
  }
  return out;
}

Tensor dropout(const Tensor& a, double p, bool training, Rng& rng) {
  if (!training || p <= 0.0) return a;
  if (p >= 1.0) throw DataError("dropout: p must be < 1");
  Tensor out = make_result(a.shape(), {a.node()}, "dropout");
  auto mask = std::make_shared<std::vector<double>>(a.data().size());
  const double keep = 1.0 - p;
  const double scale = 1.0 / keep;
  const double* pa = a.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < mask->size(); ++i) {
    const double m = rng.uniform() < keep ? scale : 0.0;
    (*mask)[i] = m;
    po[i] = pa[i] * m;
  }
  if (out.requires_grad()) {
    auto an = a.node();
    out.node()->backward_fn = [an, mask](Node& self) {
      an->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        an->grad[i] += self.grad[i] * (*mask)[i];
      }
    };
  }
  return out;
}

Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                 Tensor& running_mean, Tensor& running_var,
                 double momentum, double eps, bool training) {
  if (x.ndim() != 2 && x.ndim() != 3) shape_error("batchnorm", x.shape(), gamma.shape());
  const int channels = x.dim(1);
  if (gamma.numel() != channels || beta.numel() != channels ||
      running_mean.numel() != channels || running_var.numel() != channels) {
    shape_error("batchnorm", x.shape(), gamma.shape());
  }
  const int batch = x.dim(0);
  const int inner = x.ndim() == 3 ? x.dim(2) : 1;
  const long long reduce_n = static_cast<long long>(batch) * inner;

  auto mean = std::make_shared<std::vector<double>>(static_cast<std::size_t>(channels), 0.0);
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(channels), 0.0);
  const double* px = x.data().data();

  if (training) {
    for (int c = 0; c < channels; ++c) {
      double m = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double* src = px + (static_cast<std::size_t>(b) * channels + c) * inner;
        for (int i = 0; i < inner; ++i) m += src[i];
      }
      m /= static_cast<double>(reduce_n);
      double var = 0.0;
      for (int b = 0; b < batch; ++b) {
        const double* src = px + (static_cast<std::size_t>(b) * channels + c) * inner;
        for (int i = 0; i < inner; ++i) var += (src[i] - m) * (src[i] - m);
      }
      var /= static_cast<double>(reduce_n);  // biased, used for normalization
      (*mean)[static_cast<std::size_t>(c)] = m;
      (*inv_std)[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(var + eps);
      // running stats keep the unbiased variance
      const double unbiased = reduce_n > 1 ? var * reduce_n / (reduce_n - 1.0) : var;
      running_mean.data()[static_cast<std::size_t>(c)] =
          (1.0 - momentum) * running_mean.data()[static_cast<std::size_t>(c)] + momentum * m;
      running_var.data()[static_cast<std::size_t>(c)] =
          (1.0 - momentum) * running_var.data()[static_cast<std::size_t>(c)] + momentum * unbiased;
    }
  } else {
    for (int c = 0; c < channels; ++c) {
      (*mean)[static_cast<std::size_t>(c)] = running_mean.data()[static_cast<std::size_t>(c)];
      (*inv_std)[static_cast<std::size_t>(c)] =
          1.0 / std::sqrt(running_var.data()[static_cast<std::size_t>(c)] + eps);
    }
  }

  Tensor out = make_result(x.shape(), {x.node(), gamma.node(), beta.node()}, "batchnorm");
  auto xhat = std::make_shared<std::vector<double>>(x.data().size());
  double* po = out.data().data();
  const double* pg = gamma.data().data();
  const double* pb = beta.data().data();
  for (int b = 0; b < batch; ++b) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
      const double m = (*mean)[static_cast<std::size_t>(c)];
      const double is = (*inv_std)[static_cast<std::size_t>(c)];
      for (int i = 0; i < inner; ++i) {
        const double xh = (px[base + i] - m) * is;
        (*xhat)[base + i] = xh;
        po[base + i] = pg[c] * xh + pb[c];
      }
    }
  }

  if (out.requires_grad()) {
    auto xn = x.node();
    auto gn = gamma.node();
    auto bn = beta.node();
    out.node()->backward_fn = [xn, gn, bn, xhat, inv_std, batch, channels, inner, reduce_n,
                               training](Node& self) {
      const double* g = self.grad.data();
      if (gn->requires_grad) {
        gn->ensure_grad();
        for (int c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (int b = 0; b < batch; ++b) {
            const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
            for (int i = 0; i < inner; ++i) acc += g[base + i] * (*xhat)[base + i];
          }
          gn->grad[static_cast<std::size_t>(c)] += acc;
        }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (int c = 0; c < channels; ++c) {
          double acc = 0.0;
          for (int b = 0; b < batch; ++b) {
            const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
            for (int i = 0; i < inner; ++i) acc += g[base + i];
          }
          bn->grad[static_cast<std::size_t>(c)] += acc;
        }
      }
      if (xn->requires_grad) {
        xn->ensure_grad();
        double* gx = xn->grad.data();
        const double* gv = gn->value.data();
        if (!training) {
          for (int b = 0; b < batch; ++b) {
            for (int c = 0; c < channels; ++c) {
              const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
              const double k = gv[c] * (*inv_std)[static_cast<std::size_t>(c)];
              for (int i = 0; i < inner; ++i) gx[base + i] += g[base + i] * k;
            }
          }
        } else {
          // dL/dx = gamma*inv_std/N * (N*g - sum(g) - xhat*sum(g*xhat))
          for (int c = 0; c < channels; ++c) {
            double gsum = 0.0, gxsum = 0.0;
            for (int b = 0; b < batch; ++b) {
              const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
              for (int i = 0; i < inner; ++i) {
                gsum += g[base + i];
                gxsum += g[base + i] * (*xhat)[base + i];
              }
            }
            const double k = gv[c] * (*inv_std)[static_cast<std::size_t>(c)] / static_cast<double>(reduce_n);
            for (int b = 0; b < batch; ++b) {
              const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * inner;
              for (int i = 0; i < inner; ++i) {
                gx[base + i] += k * (reduce_n * g[base + i] - gsum - (*xhat)[base + i] * gxsum);
              }
            }
          }
        }
      }
    };
  }
  return out;
}

}  // namespace affect::autograd
