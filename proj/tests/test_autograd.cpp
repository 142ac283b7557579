#include <doctest.h>

#include <affect/errors.hpp>
#include <affect/ops.hpp>
#include <affect/tensor.hpp>

#include "oracles.hpp"

using namespace affect::autograd;
using affect::Rng;

namespace {

Tensor randn(Shape shape, Rng& rng, bool rg = false) {
  std::vector<double> d(static_cast<std::size_t>(shape_numel(shape)));
  for (double& v : d) v = rng.normal();
  return Tensor::from_data(std::move(shape), std::move(d), rg);
}

}  // namespace

TEST_CASE("matmul of ones matches the scalar loop oracle") {
  Tensor a = Tensor::full({2, 3}, 1.0);
  Tensor b = Tensor::full({3, 2}, 1.0);
  Tensor c = matmul(a, b);
  for (double v : c.data()) CHECK(v == doctest::Approx(3.0));

  Rng rng(2);
  Tensor x = randn({4, 5}, rng), y = randn({5, 6}, rng);
  Tensor z = matmul(x, y);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k) acc += x.at({i, k}) * y.at({k, j});
      CHECK(z.at({i, j}) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("conv1d with a delta kernel is the identity") {
  Rng rng(3);
  Tensor x = randn({1, 1, 5}, rng);
  Tensor w = Tensor::from_data({1, 1, 1}, {1.0});
  Tensor out = conv1d(x, w, Tensor(), 1, 0);
  REQUIRE(out.shape() == Shape{1, 1, 5});
  for (int i = 0; i < 5; ++i) CHECK(out.at({0, 0, i}) == doctest::Approx(x.at({0, 0, i})));
}

TEST_CASE("conv1d matches a naive sliding dot product") {
  Rng rng(5);
  const int B = 2, Cin = 3, L = 10, Cout = 4, K = 3, pad = 1;
  Tensor x = randn({B, Cin, L}, rng);
  Tensor w = randn({Cout, Cin, K}, rng);
  Tensor bias = randn({Cout}, rng);
  Tensor out = conv1d(x, w, bias, 1, pad);
  REQUIRE(out.shape() == Shape{B, Cout, L});
  for (int b = 0; b < B; ++b) {
    for (int o = 0; o < Cout; ++o) {
      for (int t = 0; t < L; ++t) {
        double acc = bias.at({o});
        for (int c = 0; c < Cin; ++c) {
          for (int j = 0; j < K; ++j) {
            const int src = t + j - pad;
            if (src >= 0 && src < L) acc += w.at({o, c, j}) * x.at({b, c, src});
          }
        }
        CHECK(out.at({b, o, t}) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("softmax of equal logits is uniform and rows sum to one") {
  Tensor x = Tensor::zeros({1, 3});
  Tensor y = softmax(x, 1);
  for (int i = 0; i < 3; ++i) CHECK(y.at({0, i}) == doctest::Approx(1.0 / 3.0));

  Rng rng(7);
  Tensor z = randn({5, 9}, rng);
  Tensor s = softmax(z, 1);
  for (int r = 0; r < 5; ++r) {
    double acc = 0.0;
    for (int c = 0; c < 9; ++c) acc += s.at({r, c});
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
  }

  // invariance to a constant logit shift
  Tensor shifted = add_scalar(z, 3.7);
  Tensor s2 = softmax(shifted, 1);
  for (std::size_t i = 0; i < s.data().size(); ++i) {
    CHECK(s2.data()[i] == doctest::Approx(s.data()[i]).epsilon(1e-9));
  }
}

TEST_CASE("backward of sum gives all-ones gradient") {
  Tensor x = Tensor::from_data({3}, {1.0, 2.0, 3.0}, true);
  Tensor loss = sum_all(x);
  backward(loss);
  for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward of sum of squares doubles the input") {
  Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  Tensor loss = sum_all(mul(x, x));
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("shared subexpressions accumulate gradient") {
  Tensor x = Tensor::from_data({1}, {3.0}, true);
  // loss = x*x + x  => dloss/dx = 2x + 1 = 7
  Tensor loss = sum_all(add(mul(x, x), x));
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(7.0));
}

TEST_CASE("broadcast add reduces gradients over broadcast dims") {
  Rng rng(11);
  Tensor x = randn({4, 3}, rng, true);
  Tensor b = randn({3}, rng, true);
  Tensor loss = sum_all(add(x, b));
  backward(loss);
  for (double g : b.grad()) CHECK(g == doctest::Approx(4.0));
  for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("three-layer MLP gradients match central differences") {
  Rng rng(13);
  Tensor x = randn({4, 6}, rng);
  Tensor w1 = randn({6, 8}, rng, true);
  Tensor b1 = randn({8}, rng, true);
  Tensor w2 = randn({8, 5}, rng, true);
  Tensor b2 = randn({5}, rng, true);
  Tensor w3 = randn({5, 2}, rng, true);

  auto f = [&]() {
    Tensor h1 = tanh_t(add(matmul(x, w1), b1));
    Tensor h2 = relu(add(matmul(h1, w2), b2));
    Tensor out = sigmoid(matmul(h2, w3));
    return mean_all(mul(out, out));
  };
  auto report = gradcheck(f, {{"w1", w1}, {"b1", b1}, {"w2", w2}, {"b2", b2}, {"w3", w3}});
  CHECK(report.pass);
  CHECK(report.worst < 1e-3);
}

TEST_CASE("gradcheck covers conv, pool, batchnorm, attention-style ops") {
  Rng rng(17);
  Tensor x = randn({2, 3, 8}, rng);
  Tensor w = randn({4, 3, 3}, rng, true);
  Tensor bias = randn({4}, rng, true);
  Tensor gamma = Tensor::full({4}, 1.0, true);
  Tensor beta = Tensor::zeros({4}, true);
  Tensor rm = Tensor::zeros({4});
  Tensor rv = Tensor::full({4}, 1.0);
  Tensor wout = randn({4, 2}, rng, true);

  auto f = [&]() {
    Tensor c = conv1d(x, w, bias, 1, 1);
    Tensor bnorm = batchnorm(c, gamma, beta, rm, rv, 0.1, 1e-5, true);
    Tensor p = maxpool1d(relu(bnorm), 2, 2);       // (2,4,4)
    Tensor pooled = mean_axis(p, 2);               // (2,4)
    Tensor logits = matmul(pooled, wout);          // (2,2)
    Tensor lsm = log_softmax(logits, 1);
    return neg(mean_all(select(lsm, 1, 0)));
  };
  auto report = gradcheck(f, {{"w", w}, {"bias", bias}, {"gamma", gamma}, {"beta", beta}, {"wout", wout}});
  for (const auto& e : report.entries) {
    INFO(e.name, " rel err ", e.max_rel_err);
    CHECK(e.pass);
  }
}

TEST_CASE("gradcheck flags a deliberately wrong backward rule") {
  Tensor x = Tensor::from_data({3}, {0.5, -0.25, 1.5}, true);

  // square with a broken backward: claims d(x^2)/dx = x instead of 2x
  auto broken_square = [](const Tensor& a) {
    auto n = std::make_shared<Node>();
    n->shape = a.shape();
    n->value.resize(a.data().size());
    for (std::size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.data()[i] * a.data()[i];
    n->parents = {a.node()};
    n->requires_grad = a.requires_grad();
    auto an = a.node();
    n->backward_fn = [an](Node& self) {
      an->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        an->grad[i] += self.grad[i] * an->value[i];  // wrong on purpose
      }
    };
    return Tensor(std::move(n));
  };

  auto f = [&]() { return sum_all(broken_square(x)); };
  auto report = gradcheck(f, {{"x", x}});
  CHECK_FALSE(report.pass);
  CHECK(report.worst > 1e-3);

  // sanity: the honest square passes
  auto honest = [&]() { return sum_all(mul(x, x)); };
  CHECK(gradcheck(honest, {{"x", x}}).pass);
}

TEST_CASE("dropout is the identity in eval mode and scales in train mode") {
  Rng rng(19);
  Tensor x = randn({64, 16}, rng, true);
  Rng drop_rng(23);
  Tensor eval_out = dropout(x, 0.3, false, drop_rng);
  CHECK(eval_out.node().get() == x.node().get());

  Tensor train_out = dropout(x, 0.3, true, drop_rng);
  int zeros = 0;
  for (std::size_t i = 0; i < train_out.data().size(); ++i) {
    const double v = train_out.data()[i];
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(x.data()[i] / 0.7).epsilon(1e-12));
    }
  }
  const double frac = static_cast<double>(zeros) / static_cast<double>(train_out.data().size());
  CHECK(frac == doctest::Approx(0.3).epsilon(0.15));
}

TEST_CASE("batchnorm eval mode uses running statistics deterministically") {
  Rng rng(29);
  Tensor gamma = Tensor::full({3}, 1.5, true);
  Tensor beta = Tensor::full({3}, -0.5, true);
  Tensor rm = Tensor::from_data({3}, {1.0, 2.0, 3.0});
  Tensor rv = Tensor::from_data({3}, {4.0, 1.0, 0.25});
  Tensor x = randn({5, 3}, rng);
  Tensor y1 = batchnorm(x, gamma, beta, rm, rv, 0.1, 1e-5, false);
  Tensor y2 = batchnorm(x, gamma, beta, rm, rv, 0.1, 1e-5, false);
  for (std::size_t i = 0; i < y1.data().size(); ++i) {
    CHECK(y1.data()[i] == y2.data()[i]);
  }
  // eval mode must not touch the running stats
  CHECK(rm.data()[0] == 1.0);
  CHECK(rv.data()[2] == 0.25);
  // spot-check the normalization arithmetic
  const double expect = 1.5 * ((x.at({0, 0}) - 1.0) / std::sqrt(4.0 + 1e-5)) - 0.5;
  CHECK(y1.at({0, 0}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("tape visits each node exactly once even with diamonds") {
  Tensor x = Tensor::from_data({1}, {2.0}, true);
  Tensor y = mul(x, x);       // x^2
  Tensor z = add(y, y);       // 2x^2, y appears twice
  Tensor loss = sum_all(z);
  Tape tape = Tape::build(loss);
  // nodes: x, y, z, loss — each once
  CHECK(tape.order.size() == 4);
  tape.run_backward();
  CHECK(x.grad()[0] == doctest::Approx(8.0));  // d(2x^2)/dx = 4x
}

TEST_CASE("backward requires a scalar loss") {
  Tensor x = Tensor::from_data({2}, {1.0, 2.0}, true);
  CHECK_THROWS_AS(backward(mul(x, x)), affect::DataError);
}

TEST_CASE("shape errors name the operation") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 5});
  try {
    matmul(a, b);
    FAIL("expected shape error");
  } catch (const affect::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("(2, 3)") != std::string::npos);
  }
}

TEST_CASE("select, concat, reshape, transpose round-trip values and grads") {
  Rng rng(31);
  Tensor x = randn({3, 4}, rng, true);

  Tensor row = select(x, 0, 1);
  REQUIRE(row.shape() == Shape{4});
  for (int j = 0; j < 4; ++j) CHECK(row.at({j}) == x.at({1, j}));

  Tensor t = transpose(x);
  REQUIRE(t.shape() == Shape{4, 3});
  CHECK(t.at({2, 1}) == x.at({1, 2}));

  Tensor back = concat({select(x, 0, 0), select(x, 0, 1), select(x, 0, 2)}, 0);
  REQUIRE(back.shape() == Shape{12});
  Tensor reshaped = reshape(back, {3, 4});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(reshaped.at({i, j}) == x.at({i, j}));
  }

  auto f = [&]() { return mean_all(mul(reshape(concat({select(x, 0, 0), select(x, 0, 1), select(x, 0, 2)}, 0), {3, 4}), x)); };
  auto report = gradcheck(f, {{"x", x}});
  CHECK(report.pass);
}

TEST_CASE("swap_last_two transposes the trailing axes") {
  Rng rng(37);
  Tensor x = randn({2, 3, 5}, rng, true);
  Tensor y = swap_last_two(x);
  REQUIRE(y.shape() == Shape{2, 5, 3});
  for (int b = 0; b < 2; ++b) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 5; ++j) CHECK(y.at({b, j, i}) == x.at({b, i, j}));
    }
  }
  auto f = [&]() { return mean_all(mul(swap_last_two(x), swap_last_two(x))); };
  CHECK(gradcheck(f, {{"x", x}}).pass);
}
