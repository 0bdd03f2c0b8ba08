#include <filesystem>

#include "doctest.h"
#include "edgesim/error.hpp"
#include "edgesim/nn.hpp"
#include "gradcheck.hpp"

using namespace edgesim;

TEST_CASE("zero network gives zero output") {
  std::mt19937_64 rng(1);
  Mlp net = Mlp::create({4, 8, 3}, Activation::Relu, Activation::Identity, rng);
  for (auto& w : net.W) w.setZero();
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(4, 2.5);
  CHECK(forward(net, x).isZero());
}

TEST_CASE("single identity layer applies the activation") {
  std::mt19937_64 rng(1);
  Mlp net = Mlp::create({3, 3}, Activation::Relu, Activation::Sigmoid, rng);
  net.W[0].setIdentity();
  Eigen::VectorXd x(3);
  x << -1.0, 0.0, 2.0;
  const Eigen::VectorXd y = forward(net, x);
  for (int i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(1.0 / (1.0 + std::exp(-x[i]))));
}

TEST_CASE("forward is deterministic and checks shapes") {
  std::mt19937_64 a(9), b(9);
  const Mlp n1 = Mlp::create({5, 64, 64, 64, 2}, Activation::Relu, Activation::Sigmoid, a);
  const Mlp n2 = Mlp::create({5, 64, 64, 64, 2}, Activation::Relu, Activation::Sigmoid, b);
  CHECK(n1 == n2);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1, 1);
  CHECK(forward(n1, x) == forward(n1, x));
  CHECK_THROWS_AS(forward(n1, Eigen::VectorXd(Eigen::VectorXd::Zero(4))), Error);
}

TEST_CASE("initialisation bound") {
  std::mt19937_64 rng(2);
  const Mlp net = Mlp::create({100, 50}, Activation::Relu, Activation::Identity, rng);
  CHECK(net.W[0].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 150.0));
  CHECK(net.b[0].isZero());
}

TEST_CASE("linear net under squared loss matches the closed form") {
  std::mt19937_64 rng(3);
  const Mlp net = Mlp::create({3, 2}, Activation::Relu, Activation::Identity, rng);
  Eigen::VectorXd x(3), y(2);
  x << 0.5, -1.0, 2.0;
  y << 0.1, 0.2;
  MlpCache cache;
  const Eigen::MatrixXd out = forward(net, Eigen::MatrixXd(x), &cache);
  MlpGrads g = MlpGrads::zeros_like(net);
  backward(net, cache, 2.0 * (out.col(0) - y), g);
  const Eigen::MatrixXd expect = 2.0 * (net.W[0] * x + net.b[0] - y) * x.transpose();
  CHECK((g.dW[0] - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  std::mt19937_64 rng(4);
  const Mlp net = Mlp::create({6, 16, 16, 2}, Activation::Relu, Activation::Sigmoid, rng);
  MlpCache cache;
  forward(net, Eigen::MatrixXd::Random(6, 4), &cache);
  MlpGrads g = MlpGrads::zeros_like(net);
  backward(net, cache, Eigen::MatrixXd::Zero(2, 4), g);
  for (const auto& d : g.dW) CHECK(d.isZero());
  for (const auto& d : g.db) CHECK(d.isZero());
}

TEST_CASE("finite-difference gradient check") {
  std::mt19937_64 rng(5);
  const Mlp actor = Mlp::create({20, 64, 64, 64, 2}, Activation::Relu, Activation::Sigmoid, rng);
  const Mlp critic = Mlp::create({28, 64, 64, 64, 1}, Activation::Relu, Activation::Identity, rng);
  for (const Mlp* net : {&actor, &critic}) {
    const auto r = testsupport::gradient_check(*net, 100, 17);
    CHECK(r.failures == 0);
    CHECK(r.worst <= 1e-4);
  }
}

TEST_CASE("adam step basics") {
  std::mt19937_64 rng(6);
  Mlp net = Mlp::create({2, 2}, Activation::Relu, Activation::Identity, rng);
  const Mlp before = net;
  AdamState opt = AdamState::for_net(net, 1e-2);
  MlpGrads zero = MlpGrads::zeros_like(net);
  adam_step(net, zero, opt);
  CHECK(net == before);
  CHECK(opt.step == 1);

  MlpGrads g = MlpGrads::zeros_like(net);
  g.dW[0].setConstant(0.7);
  double last = net.W[0](0, 0);
  for (int i = 0; i < 50; ++i) {
    adam_step(net, g, opt);
    CHECK(net.W[0](0, 0) < last);
    last = net.W[0](0, 0);
  }
}

TEST_CASE("adam converges on a scalar quadratic") {
  std::mt19937_64 rng(7);
  Mlp net = Mlp::create({1, 1}, Activation::Relu, Activation::Identity, rng);
  net.W[0](0, 0) = 0.0;
  AdamState opt = AdamState::for_net(net, 3e-4);
  MlpGrads g = MlpGrads::zeros_like(net);
  for (int i = 0; i < 100000; ++i) {
    g.dW[0](0, 0) = 2.0 * (net.W[0](0, 0) - 3.0);
    adam_step(net, g, opt);
  }
  CHECK(std::abs(net.W[0](0, 0) - 3.0) < 1e-2);
}

TEST_CASE("soft update") {
  std::mt19937_64 rng(8);
  const Mlp src = Mlp::create({4, 8, 2}, Activation::Relu, Activation::Sigmoid, rng);
  Mlp tgt = Mlp::create({4, 8, 2}, Activation::Relu, Activation::Sigmoid, rng);
  const Mlp orig = tgt;
  soft_update(tgt, src, 0.0);
  CHECK(tgt == orig);
  auto dist = [&](const Mlp& a) {
    double d = 0.0;
    for (std::size_t l = 0; l < a.W.size(); ++l) d += (a.W[l] - src.W[l]).squaredNorm() + (a.b[l] - src.b[l]).squaredNorm();
    return std::sqrt(d);
  };
  double last = dist(tgt);
  for (int i = 0; i < 100; ++i) {
    soft_update(tgt, src, 0.01);
    const double d = dist(tgt);
    CHECK(d == doctest::Approx(0.99 * last).epsilon(1e-9));
    last = d;
  }
  soft_update(tgt, src, 1.0);
  CHECK(tgt == src);
  Mlp other = Mlp::create({4, 9, 2}, Activation::Relu, Activation::Sigmoid, rng);
  try {
    soft_update(other, src, 0.5);
    FAIL("expected ArchMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ArchMismatch);
  }
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(10);
  const Mlp net = Mlp::create({7, 64, 64, 64, 2}, Activation::Relu, Activation::Sigmoid, rng);
  const auto path = std::filesystem::temp_directory_path() / "edgesim_nn_roundtrip.bin";
  save_mlp(net, path);
  CHECK(std::filesystem::file_size(path) == 8 + 4 + 5 * 4 + 2 + 8 * net.param_count());
  CHECK(load_mlp(path) == net);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_mlp(path), Error);
}
