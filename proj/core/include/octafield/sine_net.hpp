#pragma once

#include <cstdint>
#include <vector>

#include "octafield/types.hpp"

// Sine-activated coordinate MLP f: R^3 -> R with closed-form propagation of
// value, input gradient and input Hessian, and reverse accumulation of
// parameter gradients through all three outputs.

namespace octa::nets {

enum class Activation { kSine, kIdentity };

// Offsets of one parameter block inside a flat parameter vector.
struct ParamBlock {
  int offset = 0;
  int rows = 0;
  int cols = 0;  // 1 for vectors
  int size() const { return rows * cols; }
};

struct SineNet {
  int input_dim = 3;
  std::vector<int> layer_out;      // output width per layer; last is 1
  std::vector<double> omega;       // frequency per layer (last layer linear)
  Activation activation = Activation::kSine;
  double input_scale = 1.0;        // folded into the first weight matrix
  Eigen::VectorXd params;          // [W0 col-major, b0, W1, b1, ...]

  int layer_count() const { return static_cast<int>(layer_out.size()); }
  int layer_in(int k) const { return k == 0 ? input_dim : layer_out[k - 1]; }
  ParamBlock weight_block(int k) const;
  ParamBlock bias_block(int k) const;
  Eigen::Map<const Eigen::MatrixXd> weight(int k) const;
  Eigen::Map<const Eigen::VectorXd> bias(int k) const;
  Eigen::Map<Eigen::MatrixXd> weight(int k);
  Eigen::Map<Eigen::VectorXd> bias(int k);
  std::vector<ParamBlock> blocks() const;
  int param_count() const { return static_cast<int>(params.size()); }
};

// Sine-network initialization: first layer U(-1/in, 1/in), hidden layers
// U(-sqrt(6/in)/omega0, sqrt(6/in)/omega0); the input scale premultiplies
// the first weight matrix.
SineNet siren_init(int hidden_layers, int width, uint64_t seed,
                   double omega0 = 30.0, double input_scale = 1.0);

struct SineEval {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

SineEval eval_f(const SineNet& net, const Vec3& x);

// Batched forward pass. Points are columns of X. Gradients are stored as a
// 3 x B matrix and Hessians as 9 x B (column-major 3x3 per point). The
// struct doubles as a reusable workspace: repeated calls with the same batch
// size reuse every buffer.
struct SineBatch {
  bool with_grad = false;
  bool with_hess = false;
  Eigen::MatrixXd input;  // 3 x B
  Eigen::VectorXd value;  // B
  Eigen::MatrixXd grad;   // 3 x B
  Eigen::MatrixXd hess;   // 9 x B
  // per hidden layer caches for the reverse pass
  std::vector<Eigen::MatrixXd> act;    // sigma(omega z), n x B
  std::vector<Eigen::MatrixXd> d1;     // d act / d z, n x B
  std::vector<Eigen::MatrixXd> jpre;   // W G_prev, n x 3B
  std::vector<Eigen::MatrixXd> hpre;   // W H_prev, n x 9B
  std::vector<Eigen::MatrixXd> g;      // G_k = d1 . jpre, n x 3B
  std::vector<Eigen::MatrixXd> h;      // H_k, n x 9B
  Eigen::MatrixXd g0;                  // identity blocks, 3 x 3B

  const Eigen::MatrixXd& input_as_matrix() const { return input; }
};

void sine_forward(const SineNet& net, const Eigen::Matrix3Xd& points,
                  bool need_grad, bool need_hess, SineBatch& out);

// Accumulates d(sum_b rf_b f_b + <rg, grad> + <rh, hess>)/d params into
// grad_accum (sized net.param_count()). Null adjoints are treated as zero;
// rh may be present only if the forward pass cached Hessian terms.
void sine_backward(const SineNet& net, const SineBatch& fwd,
                   const Eigen::VectorXd* rf, const Eigen::MatrixXd* rg,
                   const Eigen::MatrixXd* rh, Eigen::VectorXd& grad_accum);

// Convenience single-batch parameter gradient (used by tests and oracles).
Eigen::VectorXd sine_param_grad(const SineNet& net,
                                const Eigen::Matrix3Xd& points,
                                const Eigen::VectorXd* rf,
                                const Eigen::MatrixXd* rg,
                                const Eigen::MatrixXd* rh);

}  // namespace octa::nets
