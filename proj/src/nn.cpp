#include "edgesim/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "edgesim/error.hpp"

namespace edgesim {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

namespace {

constexpr char kMagic[8] = {'E', 'S', 'M', 'L', 'P', '0', '0', '1'};

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z.cwiseMax(0.0);
    case Activation::Sigmoid: return (1.0 + (-z.array()).exp()).inverse().matrix();
  }
  return z;
}

// dL/dz given dL/dy and z, for y = act(z).
Eigen::MatrixXd activation_grad(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& dy) {
  switch (a) {
    case Activation::Identity: return dy;
    case Activation::Relu: return (z.array() > 0.0).select(dy, 0.0);
    case Activation::Sigmoid: {
      const Eigen::ArrayXXd s = (1.0 + (-z.array()).exp()).inverse();
      return (dy.array() * s * (1.0 - s)).matrix();
    }
  }
  return dy;
}

}  // namespace

Mlp Mlp::create(const std::vector<int>& dims, Activation hidden, Activation output,
                std::mt19937_64& rng) {
  if (dims.size() < 2) throw Error(ErrorCode::ShapeMismatch, "an mlp needs input and output dims");
  Mlp net;
  net.dims = dims;
  net.hidden = hidden;
  net.output = output;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l], out = dims[l + 1];
    if (in <= 0 || out <= 0) throw Error(ErrorCode::ShapeMismatch, "layer dims must be positive");
    const double bound = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(out, in);
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) w(r, c) = u(rng);
    net.W.push_back(std::move(w));
    net.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return net;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) n += static_cast<std::size_t>(W[l].size() + b[l].size());
  return n;
}

bool Mlp::same_shape(const Mlp& o) const {
  return dims == o.dims && hidden == o.hidden && output == o.output;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t l = 0; l < a.W.size(); ++l) {
    if (a.W[l] != b.W[l] || a.b[l] != b.b[l]) return false;
  }
  return true;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
  }
  return g;
}

Eigen::MatrixXd forward(const Mlp& net, const Eigen::MatrixXd& x, MlpCache* cache) {
  if (x.rows() != net.in_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(x.rows()) + " rows, net expects " +
                                              std::to_string(net.in_dim()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    Eigen::MatrixXd z = net.W[l] * h;
    z.colwise() += net.b[l];
    const Activation a = l + 1 == net.W.size() ? net.output : net.hidden;
    Eigen::MatrixXd y = activate(a, z);
    if (cache) {
      cache->inputs.push_back(std::move(h));
      cache->pre.push_back(std::move(z));
    }
    h = std::move(y);
  }
  return h;
}

Eigen::VectorXd forward(const Mlp& net, const Eigen::VectorXd& x) {
  return forward(net, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd backward(const Mlp& net, const MlpCache& cache, const Eigen::MatrixXd& dout,
                         MlpGrads& grads, const Eigen::MatrixXd* dpre_last) {
  const std::size_t L = net.W.size();
  if (cache.pre.size() != L || dout.rows() != net.out_dim() || dout.cols() != cache.pre.back().cols()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient does not match the cached forward pass");
  }
  if (grads.dW.size() != L) grads = MlpGrads::zeros_like(net);
  Eigen::MatrixXd g = dout;
  for (std::size_t i = L; i-- > 0;) {
    const Activation a = i + 1 == L ? net.output : net.hidden;
    Eigen::MatrixXd dz = activation_grad(a, cache.pre[i], g);
    if (i + 1 == L && dpre_last) {
      if (dpre_last->rows() != dz.rows() || dpre_last->cols() != dz.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "pre-activation gradient has the wrong shape");
      }
      dz += *dpre_last;
    }
    grads.dW[i].noalias() += dz * cache.inputs[i].transpose();
    grads.db[i] += dz.rowwise().sum();
    g = net.W[i].transpose() * dz;
  }
  return g;
}

AdamState AdamState::for_net(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  const MlpGrads z = MlpGrads::zeros_like(net);
  s.mW = s.vW = z.dW;
  s.mb = s.vb = z.db;
  return s;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& opt) {
  if (grads.dW.size() != net.W.size() || opt.mW.size() != net.W.size()) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match the network");
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseAbs2();
    param.array() -= opt.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + opt.eps);
  };
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    update(net.W[l], grads.dW[l], opt.mW[l], opt.vW[l]);
    update(net.b[l], grads.db[l], opt.mb[l], opt.vb[l]);
  }
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (!target.same_shape(source)) throw Error(ErrorCode::ArchMismatch, "soft update between different nets");
  for (std::size_t l = 0; l < target.W.size(); ++l) {
    target.W[l] = tau * source.W[l] + (1.0 - tau) * target.W[l];
    target.b[l] = tau * source.b[l] + (1.0 - tau) * target.b[l];
  }
}

void save_mlp(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  const auto n = static_cast<std::uint32_t>(net.dims.size());
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (int d : net.dims) {
    const auto u = static_cast<std::uint32_t>(d);
    out.write(reinterpret_cast<const char*>(&u), sizeof u);
  }
  const std::uint8_t acts[2] = {static_cast<std::uint8_t>(net.hidden), static_cast<std::uint8_t>(net.output)};
  out.write(reinterpret_cast<const char*>(acts), 2);
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    // Row-major weights, then biases.
    for (Eigen::Index r = 0; r < net.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < net.W[l].cols(); ++c) {
        const double v = net.W[l](r, c);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
    }
    out.write(reinterpret_cast<const char*>(net.b[l].data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(net.b[l].size())));
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingCheckpoint, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::ParseError, path.string() + " is not a network checkpoint");
  }
  std::uint32_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || n < 2 || n > 64) throw Error(ErrorCode::ParseError, "bad layer count in " + path.string());
  std::vector<int> dims(n);
  for (auto& d : dims) {
    std::uint32_t u = 0;
    in.read(reinterpret_cast<char*>(&u), sizeof u);
    d = static_cast<int>(u);
  }
  std::uint8_t acts[2] = {0, 0};
  in.read(reinterpret_cast<char*>(acts), 2);
  if (!in || acts[0] > 2 || acts[1] > 2) throw Error(ErrorCode::ParseError, "bad header in " + path.string());
  std::mt19937_64 unused(0);
  Mlp net = Mlp::create(dims, static_cast<Activation>(acts[0]), static_cast<Activation>(acts[1]), unused);
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    for (Eigen::Index r = 0; r < net.W[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < net.W[l].cols(); ++c) {
        in.read(reinterpret_cast<char*>(&net.W[l](r, c)), sizeof(double));
      }
    }
    in.read(reinterpret_cast<char*>(net.b[l].data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(net.b[l].size())));
  }
  if (!in) throw Error(ErrorCode::ParseError, "truncated checkpoint " + path.string());
  return net;
}

}  // namespace edgesim
