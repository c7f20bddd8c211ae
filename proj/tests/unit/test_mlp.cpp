#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "auvlab/mlp.hpp"

using namespace auvlab;
using Catch::Approx;

TEST_CASE("single-layer net is exactly affine") {
  Rng rng(7);
  Mlp net = Mlp::make({2, 3}, rng);
  net.w[0] << 1.0, -2.0, 0.5, 0.25, -1.5, 3.0;
  net.b[0] << 0.1, -0.2, 0.3;

  Eigen::MatrixXd x(2, 1);
  x << 2.0, 1.0;
  const Eigen::MatrixXd y = mlp_forward(net, x);
  REQUIRE(y(0, 0) == Approx(1.0 * 2.0 - 2.0 * 1.0 + 0.1));
  REQUIRE(y(1, 0) == Approx(0.5 * 2.0 + 0.25 * 1.0 - 0.2));
  REQUIRE(y(2, 0) == Approx(-1.5 * 2.0 + 3.0 * 1.0 + 0.3));
}

TEST_CASE("scalar chain matches the closed form") {
  Rng rng(7);
  Mlp net = Mlp::make({1, 1, 1}, rng);
  net.w[0](0, 0) = 0.7;
  net.b[0](0) = -0.2;
  net.w[1](0, 0) = 1.3;
  net.b[1](0) = 0.4;

  for (double x : {-2.0, -0.5, 0.0, 0.9, 3.0}) {
    Eigen::MatrixXd in(1, 1);
    in(0, 0) = x;
    const double y = mlp_forward(net, in)(0, 0);
    REQUIRE(y == Approx(1.3 * std::tanh(0.7 * x - 0.2) + 0.4));
  }
}

TEST_CASE("forward rejects mis-sized input") {
  Rng rng(7);
  Mlp net = Mlp::make({4, 8, 2}, rng);
  REQUIRE_THROWS_AS(mlp_forward(net, Eigen::MatrixXd::Zero(3, 5)),
                    ShapeMismatch);
}

TEST_CASE("initialization is bounded, zero-biased, and head-scaled") {
  Rng rng(11);
  Mlp net = Mlp::make({6, 16, 16, 3}, rng, 0.01);
  REQUIRE(net.w.size() == 3);
  const double lim0 = std::sqrt(6.0 / (6 + 16));
  const double lim_head = std::sqrt(6.0 / (16 + 3)) * 0.01;
  REQUIRE(net.w[0].cwiseAbs().maxCoeff() <= lim0);
  REQUIRE(net.w[2].cwiseAbs().maxCoeff() <= lim_head);
  REQUIRE(net.w[2].cwiseAbs().maxCoeff() > 0.0);
  for (const auto& b : net.b) REQUIRE(b.isZero(0.0));

  Rng rng_b(11);
  Mlp twin = Mlp::make({6, 16, 16, 3}, rng_b, 0.01);
  REQUIRE(net.flatten() == twin.flatten());
}

TEST_CASE("flat parameter round trip") {
  Rng rng(3);
  Mlp net = Mlp::make({3, 5, 2}, rng);
  const Eigen::VectorXd flat = net.flatten();
  REQUIRE(flat.size() == net.parameter_count());
  REQUIRE(net.parameter_count() == 3 * 5 + 5 + 5 * 2 + 2);

  Mlp other = Mlp::make({3, 5, 2}, rng);
  REQUIRE(other.flatten() != flat);
  other.set_from_flat(flat);
  REQUIRE(other.flatten() == flat);
  REQUIRE(other.w[0] == net.w[0]);
  REQUIRE(other.b[1] == net.b[1]);

  REQUIRE_THROWS_AS(other.set_from_flat(Eigen::VectorXd::Zero(flat.size() + 1)),
                    ShapeMismatch);
}

namespace {

/// Loss L = sum(G .* f(x)) so that dL/dy = G, checked against central
/// finite differences in every parameter and every input coordinate.
void gradcheck(const std::vector<int>& sizes, int batch, std::uint64_t seed) {
  Rng rng(seed);
  Mlp net = Mlp::make(sizes, rng);
  Eigen::MatrixXd x(sizes.front(), batch);
  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) x(r, c) = rng.uniform(-1.5, 1.5);
  }
  Eigen::MatrixXd G(sizes.back(), batch);
  for (int r = 0; r < G.rows(); ++r) {
    for (int c = 0; c < G.cols(); ++c) G(r, c) = rng.uniform(-1.0, 1.0);
  }

  MlpCache cache;
  mlp_forward(net, x, &cache);
  MlpGrads grads = MlpGrads::zeros_like(net);
  const Eigen::MatrixXd dx = mlp_backward(net, cache, G, grads);
  const Eigen::VectorXd analytic = grads.flatten();

  const double h = 1e-5;
  const Eigen::VectorXd theta = net.flatten();
  Mlp probe = net;
  for (long k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(k) += h;
    tm(k) -= h;
    probe.set_from_flat(tp);
    const double lp = (G.array() * mlp_forward(probe, x).array()).sum();
    probe.set_from_flat(tm);
    const double lm = (G.array() * mlp_forward(probe, x).array()).sum();
    const double fd = (lp - lm) / (2.0 * h);
    const double err = std::abs(analytic(k) - fd) /
                       std::max({1.0, std::abs(analytic(k)), std::abs(fd)});
    REQUIRE(err < 1e-7);
  }

  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(r, c) += h;
      xm(r, c) -= h;
      const double lp = (G.array() * mlp_forward(net, xp).array()).sum();
      const double lm = (G.array() * mlp_forward(net, xm).array()).sum();
      const double fd = (lp - lm) / (2.0 * h);
      const double err = std::abs(dx(r, c) - fd) /
                         std::max({1.0, std::abs(dx(r, c)), std::abs(fd)});
      REQUIRE(err < 1e-7);
    }
  }
}

}  // namespace

TEST_CASE("backward gradients match finite differences") {
  gradcheck({3, 8, 8, 2}, 5, 21);
  gradcheck({2, 4, 1}, 1, 22);
  gradcheck({5, 6, 6, 6, 3}, 7, 23);
}

TEST_CASE("backward accumulates into the gradient buffers") {
  Rng rng(5);
  Mlp net = Mlp::make({3, 6, 2}, rng);
  Eigen::MatrixXd x(3, 4);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) x(r, c) = rng.uniform(-1.0, 1.0);
  }
  MlpCache cache;
  mlp_forward(net, x, &cache);
  const Eigen::MatrixXd dy = Eigen::MatrixXd::Ones(2, 4);

  MlpGrads once = MlpGrads::zeros_like(net);
  mlp_backward(net, cache, dy, once);
  MlpGrads twice = MlpGrads::zeros_like(net);
  mlp_backward(net, cache, dy, twice);
  mlp_backward(net, cache, dy, twice);
  REQUIRE(twice.flatten() == 2.0 * once.flatten());
}

TEST_CASE("first Adam step follows the closed form") {
  AdamOptimizer opt;
  opt.init(2);
  Eigen::VectorXd params(2);
  params << 1.0, -2.0;
  Eigen::VectorXd grad(2);
  grad << 0.3, -0.4;  // norm 0.5, exactly at the clip threshold

  const double lr = 3e-4, eps = 1e-8;
  opt.step(params, grad, lr, 0.5, 0.9, 0.999, eps);
  REQUIRE(opt.t == 1);
  REQUIRE(params(0) == Approx(1.0 - lr * 0.3 / (0.3 + eps)));
  REQUIRE(params(1) == Approx(-2.0 + lr * 0.4 / (0.4 + eps)));
}

TEST_CASE("gradients above the clip norm are rescaled") {
  AdamOptimizer opt;
  opt.init(2);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd grad(2);
  grad << 3.0, 4.0;  // norm 5, clipped to norm 0.5 -> (0.3, 0.4)

  const double lr = 1e-2, eps = 1e-8;
  opt.step(params, grad, lr, 0.5, 0.9, 0.999, eps);
  REQUIRE(params(0) == Approx(-lr * 0.3 / (0.3 + eps)));
  REQUIRE(params(1) == Approx(-lr * 0.4 / (0.4 + eps)));

  // The caller's gradient vector is passed by value and stays intact.
  REQUIRE(grad(0) == 3.0);
  REQUIRE(grad(1) == 4.0);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  AdamOptimizer opt;
  opt.init(3);
  Eigen::VectorXd params(3);
  params << 0.1, -0.7, 2.5;
  const Eigen::VectorXd before = params;
  Eigen::VectorXd grad(3);
  grad << 1.0, 2.0, -3.0;
  for (int k = 0; k < 5; ++k) {
    opt.step(params, grad, 0.0, 0.5, 0.9, 0.999, 1e-8);
  }
  REQUIRE(params == before);
  REQUIRE(opt.t == 5);
}

TEST_CASE("non-finite gradients are rejected before touching state") {
  AdamOptimizer opt;
  opt.init(2);
  Eigen::VectorXd params = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd grad(2);
  grad << 1.0, std::numeric_limits<double>::quiet_NaN();
  REQUIRE_THROWS_AS(opt.step(params, grad, 1e-3, 0.5, 0.9, 0.999, 1e-8),
                    NonFiniteGradient);
  REQUIRE(opt.t == 0);
  REQUIRE(params == Eigen::VectorXd::Ones(2));
}
