#include <doctest.h>

#include <cmath>
#include <memory>

#include "oracle.hpp"
#include "vict/ops.hpp"
#include "vict/optim.hpp"

using namespace vict;
using testing::check_unary;
using testing::random_tensor;

TEST_CASE("tensor shape bookkeeping") {
  Tensor<float> t({2, 3}, 1.5f);
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.at(1, 2) == 1.5f);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeError);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>(3)), ShapeError);
}

TEST_CASE("tape gradients of elementwise ops") {
  Tape<double> tape;
  const auto a = tape.leaf(Tensor<double>({3}, {1.0, -2.0, 0.5}));
  const auto b = tape.leaf(Tensor<double>({3}, {4.0, 3.0, -1.0}));
  tape.backward(ops::sum(ops::mul(a, b)));
  CHECK(tape.grad(a) == b.value());
  CHECK(tape.grad(b) == a.value());
}

TEST_CASE("constants carry no gradient") {
  Tape<double> tape;
  const auto c = tape.constant(Tensor<double>({2}, 1.0));
  const auto x = tape.leaf(Tensor<double>({2}, 2.0));
  tape.backward(ops::sum(ops::mul(c, x)));
  CHECK_FALSE(c.requires_grad());
  CHECK(tape.grad(x) == Tensor<double>({2}, 1.0));
}

TEST_CASE("op gradients match finite differences") {
  const auto x = random_tensor({4, 6}, 1);
  const auto w = random_tensor({6, 5}, 2);
  const auto gain = random_tensor({6}, 3);
  const auto bias = random_tensor({6}, 4);
  CHECK(check_unary([&](const Var<double>& v) { return ops::matmul(v, v.tape()->constant(w)); }, x, 10) < 1e-7);
  CHECK(check_unary([&](const Var<double>& v) { return ops::matmul(v.tape()->constant(w.reshaped({5, 6})), ops::transpose(v)); }, x, 11) < 1e-7);
  CHECK(check_unary([](const Var<double>& v) { return ops::softmax_rows(v); }, x, 12) < 1e-6);
  CHECK(check_unary([&](const Var<double>& v) {
          auto* t = v.tape();
          return ops::layer_norm(v, t->constant(gain), t->constant(bias));
        }, x, 13) < 1e-6);
  CHECK(check_unary([](const Var<double>& v) { return ops::gelu(v); }, x, 14) < 1e-7);
  CHECK(check_unary([](const Var<double>& v) { return ops::sigmoid(v); }, x, 15) < 1e-7);
  CHECK(check_unary([](const Var<double>& v) { return ops::slice(v, 1, 2, 3); }, x, 16) < 1e-7);
  CHECK(check_unary([&](const Var<double>& v) { return ops::add_bias(v, v.tape()->constant(bias)); }, x, 17) < 1e-7);
  const auto index = std::make_shared<const ops::Index>(ops::Index{5, 0, 0, 23, 7, 7});
  CHECK(check_unary([&](const Var<double>& v) { return ops::gather(v, index, Shape{2, 3}); }, x, 18) < 1e-7);
  CHECK(check_unary([](const Var<double>& v) {
          const Var<double> parts[] = {v, ops::scale(v, 2.0)};
          return ops::concat<double>(parts, 0);
        }, x, 19) < 1e-7);
  const std::vector<std::uint8_t> rows{0, 1, 0, 1};
  CHECK(check_unary([&](const Var<double>& v) { return ops::replace_rows(v, rows, v.tape()->constant(gain)); }, x, 20) < 1e-7);
}

TEST_CASE("softmax rows sum to one") {
  Tape<double> tape;
  const auto s = ops::softmax_rows(tape.constant(random_tensor({3, 7}, 5, 10.0)));
  for (std::size_t r = 0; r < 3; ++r) {
    double sum = 0;
    for (std::size_t c = 0; c < 7; ++c) sum += s.value().at(r, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("smooth l1 reference values") {
  CHECK(std::abs(ops::smooth_l1_elem(0.0, 1.0) - 0.0) < 1e-12);
  CHECK(std::abs(ops::smooth_l1_elem(0.5, 1.0) - 0.125) < 1e-12);
  CHECK(std::abs(ops::smooth_l1_elem(2.0, 1.0) - 1.5) < 1e-12);
  CHECK(std::abs(ops::smooth_l1_elem(-2.0, 1.0) - 1.5) < 1e-12);
}

TEST_CASE("smooth l1 is continuously differentiable at the knee") {
  for (double beta : {1.0, 0.3}) {
    const double eps = 1e-12;
    auto slope_at = [&](double d) {
      Tape<double> tape;
      const auto p = tape.leaf(Tensor<double>({1}, d));
      tape.backward(ops::smooth_l1(p, tape.constant(Tensor<double>({1}, 0.0)), beta));
      return tape.grad(p)[0];
    };
    CHECK(std::abs(slope_at(beta - eps) - slope_at(beta + eps)) < 1e-8);
    CHECK(std::abs(slope_at(-beta - eps) - slope_at(-beta + eps)) < 1e-8);
    CHECK(std::abs(ops::smooth_l1_elem(beta - eps, beta) - ops::smooth_l1_elem(beta + eps, beta)) < 1e-8);
  }
}

TEST_CASE("smooth l1 masked mean and errors") {
  Tape<double> tape;
  const auto p = tape.constant(Tensor<double>({4}, {0.0, 0.5, 2.0, 9.0}));
  const auto t = tape.constant(Tensor<double>({4}, 0.0));
  const Tensor<double> mask({4}, {1, 1, 1, 0});
  CHECK(ops::smooth_l1(p, t, 1.0, std::optional<Tensor<double>>(mask)).value()[0] == doctest::Approx((0.0 + 0.125 + 1.5) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(ops::smooth_l1(p, t, 0.0), ValueError);
  CHECK_THROWS_AS(ops::smooth_l1(p, t, 1.0, std::optional<Tensor<double>>(Tensor<double>({4}, 0.0))), ValueError);
  CHECK_THROWS_AS(ops::smooth_l1(p, tape.constant(Tensor<double>({3}, 0.0)), 1.0), ShapeError);
}

namespace {

double adam_scalar_step(double theta, double grad, double lr) {
  Tensor<double> p({1}, theta);
  std::vector<Tensor<double>*> ps{&p};
  std::vector<Tensor<double>> gs{Tensor<double>({1}, grad)};
  AdamWState<double> st;
  st.hyper.lr = lr;
  adamw_step<double>(ps, gs, st);
  return p[0];
}

// Textbook AdamW written independently of the library's loop structure.
struct ReferenceAdamW {
  double lr, b1, b2, eps, wd;
  std::vector<double> m, v;
  int t = 0;
  void step(std::vector<double>& theta, const std::vector<double>& g) {
    if (m.empty()) m.assign(theta.size(), 0), v.assign(theta.size(), 0);
    ++t;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = b1 * m[i] + (1 - b1) * g[i];
      v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(b1, t));
      const double vh = v[i] / (1 - std::pow(b2, t));
      theta[i] = theta[i] - lr * wd * theta[i] - lr * mh / (std::sqrt(vh) + eps);
    }
  }
};

}  // namespace

TEST_CASE("adamw first step by hand") {
  // First bias-corrected step moves by lr * g / (|g| + eps).
  CHECK(std::abs(adam_scalar_step(1.0, 1.0, 0.1) - 0.9) < 1e-7);
  CHECK(std::abs(adam_scalar_step(1.0, -3.0, 0.1) - 1.1) < 1e-7);
  CHECK(adam_scalar_step(1.0, 5.0, 0.0) == 1.0);
  CHECK(adam_scalar_step(1.0, 0.0, 0.1) == 1.0);
}

TEST_CASE("adamw matches an independent implementation") {
  for (double wd : {0.0, 0.01}) {
    Tensor<double> p = random_tensor({8}, 30);
    std::vector<double> ref(p.data().begin(), p.data().end());
    AdamWState<double> st;
    st.hyper.lr = 0.01;
    st.hyper.weight_decay = wd;
    ReferenceAdamW oracle{0.01, 0.9, 0.999, 1e-8, wd, {}, {}};
    std::vector<Tensor<double>*> ps{&p};
    for (int s = 0; s < 25; ++s) {
      const auto g = random_tensor({8}, 100 + s);
      std::vector<Tensor<double>> gs{g};
      adamw_step<double>(ps, gs, st);
      oracle.step(ref, {g.data().begin(), g.data().end()});
    }
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(p[i] - ref[i]) < 1e-12);
    CHECK(st.t == 25);
  }
}

TEST_CASE("adamw rejects bad input") {
  Tensor<double> p({2}, 1.0);
  std::vector<Tensor<double>*> ps{&p};
  AdamWState<double> st;
  std::vector<Tensor<double>> wrong{Tensor<double>({3}, 0.0)};
  CHECK_THROWS_AS(adamw_step<double>(ps, wrong, st), ShapeError);
  std::vector<Tensor<double>> nan{Tensor<double>({2}, std::nan(""))};
  CHECK_THROWS_AS(adamw_step<double>(ps, nan, st), NumericError);
  st.hyper.lr = -1;
  std::vector<Tensor<double>> ok{Tensor<double>({2}, 0.0)};
  CHECK_THROWS_AS(adamw_step<double>(ps, ok, st), ValueError);
}
