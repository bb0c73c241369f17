#include "octafield/sine_net.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace octa::nets {

namespace {

int block_offset(const SineNet& net, int layer, bool bias) {
  int off = 0;
  for (int k = 0; k < layer; ++k) {
    off += net.layer_in(k) * net.layer_out[k] + net.layer_out[k];
  }
  if (bias) off += net.layer_in(layer) * net.layer_out[layer];
  return off;
}

}  // namespace

ParamBlock SineNet::weight_block(int k) const {
  return {block_offset(*this, k, false), layer_out[k], layer_in(k)};
}

ParamBlock SineNet::bias_block(int k) const {
  return {block_offset(*this, k, true), layer_out[k], 1};
}

Eigen::Map<const Eigen::MatrixXd> SineNet::weight(int k) const {
  const ParamBlock b = weight_block(k);
  return {params.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::VectorXd> SineNet::bias(int k) const {
  const ParamBlock b = bias_block(k);
  return {params.data() + b.offset, b.rows};
}

Eigen::Map<Eigen::MatrixXd> SineNet::weight(int k) {
  const ParamBlock b = weight_block(k);
  return {params.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<Eigen::VectorXd> SineNet::bias(int k) {
  const ParamBlock b = bias_block(k);
  return {params.data() + b.offset, b.rows};
}

std::vector<ParamBlock> SineNet::blocks() const {
  std::vector<ParamBlock> out;
  for (int k = 0; k < layer_count(); ++k) {
    out.push_back(weight_block(k));
    out.push_back(bias_block(k));
  }
  return out;
}

SineNet siren_init(int hidden_layers, int width, uint64_t seed, double omega0,
                   double input_scale) {
  if (hidden_layers < 2 || width < 1) {
    throw std::invalid_argument("siren_init: need >= 2 hidden layers, width >= 1");
  }
  SineNet net;
  net.input_dim = 3;
  net.input_scale = input_scale;
  for (int k = 0; k < hidden_layers; ++k) {
    net.layer_out.push_back(width);
    net.omega.push_back(omega0);
  }
  net.layer_out.push_back(1);
  net.omega.push_back(1.0);  // final layer is linear

  int total = 0;
  for (int k = 0; k < net.layer_count(); ++k) {
    total += net.layer_in(k) * net.layer_out[k] + net.layer_out[k];
  }
  net.params.resize(total);

  std::mt19937_64 rng(seed);
  for (int k = 0; k < net.layer_count(); ++k) {
    const int fan_in = net.layer_in(k);
    const double bound =
        k == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / omega0;
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto w = net.weight(k);
    for (int j = 0; j < w.cols(); ++j) {
      for (int i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    auto b = net.bias(k);
    for (int i = 0; i < b.size(); ++i) b(i) = dist(rng);
  }
  net.weight(0) *= input_scale;
  return net;
}

void sine_forward(const SineNet& net, const Eigen::Matrix3Xd& points,
                  bool need_grad, bool need_hess, SineBatch& out) {
  const int batch = static_cast<int>(points.cols());
  const int hidden = net.layer_count() - 1;
  need_grad = need_grad || need_hess;
  out.with_grad = need_grad;
  out.with_hess = need_hess;
  out.input = points;
  if (static_cast<int>(out.act.size()) != hidden) {
    out.act.resize(hidden);
    out.d1.resize(hidden);
    out.jpre.resize(hidden);
    out.hpre.resize(hidden);
    out.g.resize(hidden);
    out.h.resize(hidden);
  }

  // identity Jacobian of the input layer
  if (need_grad &&
      (out.g0.rows() != 3 || out.g0.cols() != 3 * batch)) {
    out.g0.setZero(3, 3 * batch);
    for (int b = 0; b < batch; ++b) out.g0.block<3, 3>(0, 3 * b).setIdentity();
  }

  const Eigen::MatrixXd* a_prev = nullptr;  // n_prev x B
  const Eigen::MatrixXd* g_prev = nullptr;  // n_prev x 3B
  const Eigen::MatrixXd* h_prev = nullptr;  // n_prev x 9B

  for (int k = 0; k < hidden; ++k) {
    const auto w = net.weight(k);
    const auto bias = net.bias(k);
    const int n = net.layer_out[k];
    const double om = net.omega[k];
    const bool sine = net.activation == Activation::kSine;

    Eigen::MatrixXd& act = out.act[k];
    Eigen::MatrixXd& d1 = out.d1[k];
    act.resize(n, batch);
    d1.resize(n, batch);
    act.noalias() = w * (k == 0 ? out.input : *a_prev);
    act.colwise() += bias;
    if (sine) {
      d1.array() = om * (om * act.array()).cos();
      act.array() = (om * act.array()).sin();
    } else {
      d1.setOnes();
    }

    if (need_grad) {
      Eigen::MatrixXd& jpre = out.jpre[k];
      Eigen::MatrixXd& g = out.g[k];
      jpre.resize(n, 3 * batch);
      jpre.noalias() = w * (k == 0 ? out.g0 : *g_prev);
      g.resize(n, 3 * batch);
      {
        const double* dp = d1.data();
        const double* jp = jpre.data();
        double* gp = g.data();
        for (int b = 0; b < batch; ++b) {
          const double* dcol = dp + static_cast<long>(b) * n;
          for (int c = 0; c < 3; ++c) {
            const long col = (3L * b + c) * n;
            for (int i = 0; i < n; ++i) gp[col + i] = dcol[i] * jp[col + i];
          }
        }
      }
      if (need_hess) {
        Eigen::MatrixXd& hpre = out.hpre[k];
        Eigen::MatrixXd& h = out.h[k];
        hpre.resize(n, 9 * batch);
        if (k == 0) {
          hpre.setZero();
        } else {
          hpre.noalias() = w * (*h_prev);
        }
        h.resize(n, 9 * batch);
        const double d2f = sine ? -om * om : 0.0;
        const double* ap = act.data();
        const double* dp = d1.data();
        const double* jp = jpre.data();
        const double* hp = hpre.data();
        double* ho = h.data();
        for (int b = 0; b < batch; ++b) {
          const double* acol = ap + static_cast<long>(b) * n;
          const double* dcol = dp + static_cast<long>(b) * n;
          const double* j3 = jp + 3L * b * n;
          for (int c2 = 0; c2 < 3; ++c2) {
            for (int c1 = 0; c1 < 3; ++c1) {
              const long col = (9L * b + 3 * c2 + c1) * n;
              const double* j1 = j3 + static_cast<long>(c1) * n;
              const double* j2 = j3 + static_cast<long>(c2) * n;
              const double* hcol = hp + col;
              double* hout = ho + col;
              for (int i = 0; i < n; ++i) {
                hout[i] = d2f * acol[i] * j1[i] * j2[i] + dcol[i] * hcol[i];
              }
            }
          }
        }
        h_prev = &out.h[k];
      }
      g_prev = &out.g[k];
    }
    a_prev = &out.act[k];
  }

  // final linear layer, width -> 1
  const int last = hidden;
  const auto w = net.weight(last);
  const double bias = net.bias(last)(0);
  out.value = (w * (*a_prev)).transpose();
  out.value.array() += bias;
  if (need_grad) {
    Eigen::RowVectorXd flat = w.row(0) * (*g_prev);  // 1 x 3B
    out.grad = Eigen::Map<const Eigen::MatrixXd>(flat.data(), 3, batch);
  }
  if (need_hess) {
    Eigen::RowVectorXd flat = w.row(0) * (*h_prev);  // 1 x 9B
    out.hess = Eigen::Map<const Eigen::MatrixXd>(flat.data(), 9, batch);
  }
}

SineEval eval_f(const SineNet& net, const Vec3& x) {
  SineBatch batch;
  sine_forward(net, x, true, true, batch);
  SineEval e;
  e.value = batch.value(0);
  e.gradient = batch.grad.col(0);
  e.hessian = Eigen::Map<const Mat3>(batch.hess.data());
  return e;
}

void sine_backward(const SineNet& net, const SineBatch& fwd,
                   const Eigen::VectorXd* rf, const Eigen::MatrixXd* rg,
                   const Eigen::MatrixXd* rh, Eigen::VectorXd& grad_accum) {
  const int batch = static_cast<int>(fwd.input.cols());
  const int hidden = net.layer_count() - 1;
  if (grad_accum.size() != net.param_count()) {
    grad_accum.setZero(net.param_count());
  }
  const bool use_g = rg != nullptr || rh != nullptr;
  const bool use_h = rh != nullptr;
  if (use_g && !fwd.with_grad) {
    throw std::logic_error("sine_backward: forward pass lacked gradients");
  }
  if (use_h && !fwd.with_hess) {
    throw std::logic_error("sine_backward: forward pass lacked Hessians");
  }

  auto layer_input = [&](int k) -> const Eigen::MatrixXd& {
    return k == 0 ? fwd.input_as_matrix() : fwd.act[k - 1];
  };
  auto layer_g = [&](int k) -> const Eigen::MatrixXd& {
    return k == 0 ? fwd.g0 : fwd.g[k - 1];
  };

  // Final linear layer adjoints.
  const int last = hidden;
  const auto w_last = net.weight(last);
  {
    const ParamBlock wb = net.weight_block(last);
    const ParamBlock bb = net.bias_block(last);
    Eigen::Map<Eigen::MatrixXd> dw(grad_accum.data() + wb.offset, wb.rows,
                                   wb.cols);
    if (rf != nullptr) {
      dw.row(0) += (layer_input(last) * (*rf)).transpose();
      grad_accum(bb.offset) += rf->sum();
    }
    if (rg != nullptr) {
      Eigen::Map<const Eigen::VectorXd> rg_flat(rg->data(), 3 * batch);
      dw.row(0) += (layer_g(last) * rg_flat).transpose();
    }
    if (rh != nullptr) {
      Eigen::Map<const Eigen::VectorXd> rh_flat(rh->data(), 9 * batch);
      dw.row(0) += (fwd.h[last - 1] * rh_flat).transpose();
    }
  }

  // Adjoints flowing into the top hidden layer outputs.
  static thread_local Eigen::MatrixXd abar, gbar, hbar;
  {
    const int n = net.layer_in(last);
    const Eigen::VectorXd wv = w_last.row(0).transpose();
    if (rf != nullptr) {
      abar.resize(n, batch);
      abar.noalias() = wv * rf->transpose();  // n x B
    } else {
      abar.setZero(n, batch);
    }
    const double* wp = wv.data();
    if (use_g) {
      gbar.resize(n, 3 * batch);
      if (rg != nullptr) {
        const double* rgp = rg->data();
        double* gb = gbar.data();
        for (long col = 0; col < 3L * batch; ++col) {
          const double r = rgp[col];
          double* dst = gb + col * n;
          for (int i = 0; i < n; ++i) dst[i] = wp[i] * r;
        }
      } else {
        gbar.setZero();
      }
    }
    if (use_h) {
      hbar.resize(n, 9 * batch);
      const double* rhp = rh->data();
      double* hb = hbar.data();
      for (long col = 0; col < 9L * batch; ++col) {
        const double r = rhp[col];
        double* dst = hb + col * n;
        for (int i = 0; i < n; ++i) dst[i] = wp[i] * r;
      }
    }
  }

  static thread_local Eigen::MatrixXd zbar, jbar, hpbar;
  for (int k = hidden - 1; k >= 0; --k) {
    const int n = net.layer_out[k];
    const double om = net.omega[k];
    const bool sine = net.activation == Activation::kSine;
    const Eigen::MatrixXd& act = fwd.act[k];
    const Eigen::MatrixXd& d1 = fwd.d1[k];
    const Eigen::MatrixXd& jpre = fwd.jpre[k];

    const double omsq = sine ? -om * om : 0.0;  // d2 = omsq*act, d3 = omsq*d1
    zbar = abar.cwiseProduct(d1);
    if (use_g) {
      jbar.resize(n, 3 * batch);
      const double* ap = act.data();
      const double* dp = d1.data();
      const double* jp = jpre.data();
      const double* gb = gbar.data();
      double* zb = zbar.data();
      double* jb = jbar.data();
      for (int b = 0; b < batch; ++b) {
        const double* acol = ap + static_cast<long>(b) * n;
        const double* dcol = dp + static_cast<long>(b) * n;
        double* zcol = zb + static_cast<long>(b) * n;
        for (int c = 0; c < 3; ++c) {
          const long col = (3L * b + c) * n;
          for (int i = 0; i < n; ++i) {
            zcol[i] += omsq * acol[i] * gb[col + i] * jp[col + i];
            jb[col + i] = dcol[i] * gb[col + i];
          }
        }
      }
    }
    if (use_h) {
      const Eigen::MatrixXd& hpre = fwd.hpre[k];
      hpbar.resize(n, 9 * batch);
      const double* ap = act.data();
      const double* dp = d1.data();
      const double* jp = jpre.data();
      const double* hp = hpre.data();
      const double* hb = hbar.data();
      double* zb = zbar.data();
      double* jb = jbar.data();
      double* hpb = hpbar.data();
      for (int b = 0; b < batch; ++b) {
        const double* acol = ap + static_cast<long>(b) * n;
        const double* dcol = dp + static_cast<long>(b) * n;
        const double* j3 = jp + 3L * b * n;
        double* zcol = zb + static_cast<long>(b) * n;
        double* jb3 = jb + 3L * b * n;
        for (int c2 = 0; c2 < 3; ++c2) {
          for (int c1 = 0; c1 < 3; ++c1) {
            const long col = (9L * b + 3 * c2 + c1) * n;
            const double* j1 = j3 + static_cast<long>(c1) * n;
            const double* j2 = j3 + static_cast<long>(c2) * n;
            const double* hcol = hp + col;
            const double* hbc = hb + col;
            double* jb1 = jb3 + static_cast<long>(c1) * n;
            double* jb2 = jb3 + static_cast<long>(c2) * n;
            double* hpc = hpb + col;
            for (int i = 0; i < n; ++i) {
              const double hbv = hbc[i];
              zcol[i] += omsq * hbv * (dcol[i] * j1[i] * j2[i] +
                                       acol[i] * hcol[i]);
              jb1[i] += omsq * acol[i] * hbv * j2[i];
              jb2[i] += omsq * acol[i] * hbv * j1[i];
              hpc[i] = dcol[i] * hbv;
            }
          }
        }
      }
    }

    const ParamBlock wb = net.weight_block(k);
    const ParamBlock bb = net.bias_block(k);
    Eigen::Map<Eigen::MatrixXd> dw(grad_accum.data() + wb.offset, wb.rows,
                                   wb.cols);
    Eigen::Map<Eigen::VectorXd> db(grad_accum.data() + bb.offset, bb.rows);
    dw.noalias() += zbar * layer_input(k).transpose();
    db += zbar.rowwise().sum();
    if (use_g) dw.noalias() += jbar * layer_g(k).transpose();
    if (use_h && k > 0) dw.noalias() += hpbar * fwd.h[k - 1].transpose();

    if (k > 0) {
      const auto w = net.weight(k);
      abar.noalias() = w.transpose() * zbar;
      if (use_g) gbar.noalias() = w.transpose() * jbar;
      if (use_h) hbar.noalias() = w.transpose() * hpbar;
    }
  }
}

Eigen::VectorXd sine_param_grad(const SineNet& net,
                                const Eigen::Matrix3Xd& points,
                                const Eigen::VectorXd* rf,
                                const Eigen::MatrixXd* rg,
                                const Eigen::MatrixXd* rh) {
  SineBatch fwd;
  sine_forward(net, points, rg != nullptr || rh != nullptr, rh != nullptr, fwd);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
  sine_backward(net, fwd, rf, rg, rh, grad);
  return grad;
}

}  // namespace octa::nets
