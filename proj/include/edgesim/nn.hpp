#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace edgesim {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2 };

/// Fully connected network. Samples are columns: an input batch is
/// (in_dim x batch).
struct Mlp {
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> W;  // out x in
  std::vector<Eigen::VectorXd> b;
  Activation hidden = Activation::Relu;
  Activation output = Activation::Identity;

  /// Xavier-uniform weights, zero biases.
  static Mlp create(const std::vector<int>& dims, Activation hidden, Activation output,
                    std::mt19937_64& rng);

  int in_dim() const { return dims.front(); }
  int out_dim() const { return dims.back(); }
  std::size_t layers() const { return W.size(); }
  std::size_t param_count() const;
  bool same_shape(const Mlp& other) const;

  friend bool operator==(const Mlp& a, const Mlp& b);
};

struct MlpCache {
  /// Input to each layer (the batch itself first).
  std::vector<Eigen::MatrixXd> inputs;
  /// Pre-activation of each layer.
  std::vector<Eigen::MatrixXd> pre;
};

struct MlpGrads {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;

  static MlpGrads zeros_like(const Mlp& net);
};

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache = nullptr);
Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x);

/// Reverse pass for d(loss)/d(output) = dout. Gradients are summed over the
/// batch columns; returns d(loss)/d(input). `dpre_last`, if given, is an
/// extra gradient w.r.t. the last layer's pre-activation (for penalties on
/// the raw outputs).
Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout,
                         MlpGrads& grads, const Eigen::MatrixXd* dpre_last = nullptr);

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::VectorXd> mb, vb;
  std::int64_t step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_net(const Mlp& net, double lr);
};

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& opt);

/// target <- tau * source + (1 - tau) * target. Throws ArchMismatch.
void soft_update(Mlp& target, const Mlp& source, double tau);

/// Little-endian f64 parameters behind a short header holding the layer dims
/// and activations.
void save_mlp(const Mlp& net, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace edgesim
