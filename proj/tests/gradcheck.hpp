#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "edgesim/nn.hpp"

namespace testsupport {

struct GradCheck {
  int probes = 0;
  int failures = 0;
  double worst = 0.0;
};

// Loss = sum(P .* net(X)) for a fixed random projection P; compares analytic
// gradients with central differences at random parameter and input probes.
inline GradCheck gradient_check(edgesim::Mlp net, int n_probes, std::uint64_t seed, double tol = 1e-4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const int batch = 3;
  Eigen::MatrixXd x(net.in_dim(), batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  Eigen::MatrixXd proj(net.out_dim(), batch);
  for (Eigen::Index i = 0; i < proj.size(); ++i) proj.data()[i] = n01(rng);
  // Biases nudged off zero so ReLU units are not all at the same kink.
  for (auto& b : net.b) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 * n01(rng);
  }

  auto loss = [&](const edgesim::Mlp& m, const Eigen::MatrixXd& in) {
    return (edgesim::forward(m, in).array() * proj.array()).sum();
  };
  edgesim::MlpCache cache;
  edgesim::forward(net, x, &cache);
  edgesim::MlpGrads grads = edgesim::MlpGrads::zeros_like(net);
  const Eigen::MatrixXd dx = edgesim::backward(net, cache, proj, grads);

  GradCheck out;
  const double h = 1e-6;
  std::uniform_int_distribution<std::size_t> pick_layer(0, net.layers() - 1);
  for (int p = 0; p < n_probes; ++p) {
    double analytic = 0.0, numeric = 0.0;
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 2) {
      const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(x.size()));
      Eigen::MatrixXd xp = x, xm = x;
      xp.data()[i] += h;
      xm.data()[i] -= h;
      numeric = (loss(net, xp) - loss(net, xm)) / (2 * h);
      analytic = dx.data()[i];
    } else {
      const std::size_t l = pick_layer(rng);
      edgesim::Mlp plus = net, minus = net;
      if (kind == 0) {
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(net.W[l].size()));
        plus.W[l].data()[i] += h;
        minus.W[l].data()[i] -= h;
        analytic = grads.dW[l].data()[i];
      } else {
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(net.b[l].size()));
        plus.b[l].data()[i] += h;
        minus.b[l].data()[i] -= h;
        analytic = grads.db[l].data()[i];
      }
      numeric = (loss(plus, x) - loss(minus, x)) / (2 * h);
    }
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
    const double err = std::abs(analytic - numeric) / scale;
    out.worst = std::max(out.worst, err);
    ++out.probes;
    if (err > tol) ++out.failures;
  }
  return out;
}

}  // namespace testsupport
