#include "octafield/lip_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace octa::nets {

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double softplus_inverse(double x) {
  // y with softplus(y) = x; softplus is invertible on x > 0
  if (x > 30.0) return x;
  const double y = x <= 0.0 ? -1e300 : std::log(std::expm1(x));
  return std::max(y, -20.0);
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

int lip_block_offset(const LipNet& net, int layer, int which) {
  int off = 0;
  for (int k = 0; k < layer; ++k) {
    off += net.layer_in(k) * net.layer_out[k] + net.layer_out[k] + 1;
  }
  if (which >= 1) off += net.layer_in(layer) * net.layer_out[layer];
  if (which >= 2) off += net.layer_out[layer];
  return off;
}

}  // namespace

ParamBlock LipNet::weight_block(int k) const {
  return {lip_block_offset(*this, k, 0), layer_out[k], layer_in(k)};
}
ParamBlock LipNet::bias_block(int k) const {
  return {lip_block_offset(*this, k, 1), layer_out[k], 1};
}
ParamBlock LipNet::c_block(int k) const {
  return {lip_block_offset(*this, k, 2), 1, 1};
}

Eigen::Map<const Eigen::MatrixXd> LipNet::weight(int k) const {
  const ParamBlock b = weight_block(k);
  return {params.data() + b.offset, b.rows, b.cols};
}
Eigen::Map<const Eigen::VectorXd> LipNet::bias(int k) const {
  const ParamBlock b = bias_block(k);
  return {params.data() + b.offset, b.rows};
}
Eigen::Map<Eigen::MatrixXd> LipNet::weight(int k) {
  const ParamBlock b = weight_block(k);
  return {params.data() + b.offset, b.rows, b.cols};
}
Eigen::Map<Eigen::VectorXd> LipNet::bias(int k) {
  const ParamBlock b = bias_block(k);
  return {params.data() + b.offset, b.rows};
}

std::vector<ParamBlock> LipNet::blocks() const {
  std::vector<ParamBlock> out;
  for (int k = 0; k < layer_count(); ++k) {
    out.push_back(weight_block(k));
    out.push_back(bias_block(k));
    out.push_back(c_block(k));
  }
  return out;
}

Eigen::MatrixXd LipNet::normalized_weight(int k) const {
  const Eigen::MatrixXd w = weight(k);
  const double sp = softplus(c_raw(k));
  Eigen::MatrixXd out = w;
  for (int i = 0; i < w.rows(); ++i) {
    const double rs = w.row(i).cwiseAbs().sum();
    if (rs > sp) out.row(i) *= sp / rs;
  }
  return out;
}

double LipNet::lipschitz_bound() const {
  double p = 1.0;
  for (int k = 0; k < layer_count(); ++k) p *= softplus(c_raw(k));
  return p;
}

LipNet lipnet_init(int hidden_layers, int width, uint64_t seed,
                   double input_scale) {
  if (hidden_layers < 2 || width < 1) {
    throw std::invalid_argument("lipnet_init: need >= 2 hidden layers");
  }
  LipNet net;
  net.input_scale = input_scale;
  for (int k = 0; k < hidden_layers; ++k) net.layer_out.push_back(width);
  net.layer_out.push_back(net.output_dim);

  int total = 0;
  for (int k = 0; k < net.layer_count(); ++k) {
    total += net.layer_in(k) * net.layer_out[k] + net.layer_out[k] + 1;
  }
  net.params.resize(total);

  std::mt19937_64 rng(seed);
  for (int k = 0; k < net.layer_count(); ++k) {
    const int fan_in = net.layer_in(k);
    const int fan_out = net.layer_out[k];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weight(k);
    for (int j = 0; j < w.cols(); ++j) {
      for (int i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    auto b = net.bias(k);
    for (int i = 0; i < b.size(); ++i) b(i) = dist(rng);
  }
  net.weight(0) *= input_scale;
  for (int k = 0; k < net.layer_count(); ++k) {
    const double inf_norm = net.weight(k).cwiseAbs().rowwise().sum().maxCoeff();
    net.c_raw(k) = softplus_inverse(inf_norm);
  }
  return net;
}

void lip_forward(const LipNet& net, const Eigen::Matrix3Xd& points,
                 LipBatch& out) {
  const int layers = net.layer_count();
  out.input = points;
  if (static_cast<int>(out.wn.size()) != layers) {
    out.act.resize(layers - 1);
    out.wn.resize(layers);
    out.rowsum.resize(layers);
    out.scale.resize(layers);
  }

  const Eigen::MatrixXd* a = &out.input;
  for (int k = 0; k < layers; ++k) {
    const auto w = net.weight(k);
    const double sp = softplus(net.c_raw(k));
    Eigen::VectorXd& rowsum = out.rowsum[k];
    Eigen::VectorXd& scale = out.scale[k];
    Eigen::MatrixXd& wn = out.wn[k];
    rowsum = w.cwiseAbs().rowwise().sum();
    scale.resize(w.rows());
    wn = w;
    for (int i = 0; i < w.rows(); ++i) {
      scale(i) = rowsum(i) > sp ? sp / rowsum(i) : 1.0;
      if (scale(i) != 1.0) wn.row(i) *= scale(i);
    }

    Eigen::MatrixXd& z = k + 1 < layers ? out.act[k] : out.output;
    z.resize(w.rows(), points.cols());
    z.noalias() = wn * (*a);
    z.colwise() += net.bias(k);
    if (k + 1 < layers) {
      z.array() = z.array().tanh();
      a = &out.act[k];
    }
  }
}

Vec9 eval_u(const LipNet& net, const Vec3& x) {
  LipBatch b;
  lip_forward(net, x, b);
  return b.output.col(0);
}

void lip_backward(const LipNet& net, const LipBatch& fwd,
                  const Eigen::MatrixXd& rout, Eigen::VectorXd& grad_accum) {
  const int layers = net.layer_count();
  if (grad_accum.size() != net.param_count()) {
    grad_accum.setZero(net.param_count());
  }

  Eigen::MatrixXd zbar = rout;
  for (int k = layers - 1; k >= 0; --k) {
    const Eigen::MatrixXd a_in = k == 0 ? Eigen::MatrixXd(fwd.input)
                                        : fwd.act[k - 1];
    Eigen::MatrixXd wnbar = zbar * a_in.transpose();

    const ParamBlock bb = net.bias_block(k);
    Eigen::Map<Eigen::VectorXd> db(grad_accum.data() + bb.offset, bb.rows);
    db += zbar.rowwise().sum();

    // chain normalized weight -> raw weight and c
    const Eigen::MatrixXd w = net.weight(k);
    const double c_raw = net.c_raw(k);
    const double sp = softplus(c_raw);
    const ParamBlock wb = net.weight_block(k);
    Eigen::Map<Eigen::MatrixXd> dw(grad_accum.data() + wb.offset, wb.rows,
                                   wb.cols);
    double dc = 0.0;
    for (int i = 0; i < w.rows(); ++i) {
      if (fwd.scale[k](i) == 1.0) {
        dw.row(i) += wnbar.row(i);
        continue;
      }
      const double rs = fwd.rowsum[k](i);
      const double dot = w.row(i).dot(wnbar.row(i));
      dw.row(i) += (sp / rs) * wnbar.row(i) -
                   (sp * dot / (rs * rs)) * w.row(i).array().sign().matrix();
      dc += dot / rs;
    }
    grad_accum(net.c_block(k).offset) += dc * sigmoid(c_raw);

    if (k > 0) {
      Eigen::MatrixXd abar = fwd.wn[k].transpose() * zbar;
      // through tanh: d tanh = 1 - act^2
      zbar = abar.cwiseProduct(
          (1.0 - fwd.act[k - 1].array().square()).matrix());
    }
  }
}

Eigen::VectorXd lip_param_grad(const LipNet& net,
                               const Eigen::Matrix3Xd& points,
                               const Eigen::MatrixXd& rout) {
  LipBatch fwd;
  lip_forward(net, points, fwd);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  lip_backward(net, fwd, rout, grad);
  return grad;
}

}  // namespace octa::nets
