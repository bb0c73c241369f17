#pragma once

#include <cstdint>
#include <vector>

#include "octafield/types.hpp"
#include "octafield/sine_net.hpp"  // ParamBlock

// tanh MLP u: R^3 -> R^9 with per-layer Lipschitz bound constants. Weight
// rows are rescaled so the effective infinity norm of each weight matrix
// stays below softplus(c_i); the rescaling is part of the forward function
// and gradients flow through it to both W and c.

namespace octa::nets {

double softplus(double x);
double softplus_inverse(double x);  // clamped to >= -20 for x near 0

struct LipNet {
  int input_dim = 3;
  int output_dim = 9;
  std::vector<int> layer_out;  // per layer; last is output_dim
  double input_scale = 1.0;
  Eigen::VectorXd params;      // per layer: [W col-major, b, c_raw]

  int layer_count() const { return static_cast<int>(layer_out.size()); }
  int layer_in(int k) const { return k == 0 ? input_dim : layer_out[k - 1]; }
  ParamBlock weight_block(int k) const;
  ParamBlock bias_block(int k) const;
  ParamBlock c_block(int k) const;
  Eigen::Map<const Eigen::MatrixXd> weight(int k) const;
  Eigen::Map<const Eigen::VectorXd> bias(int k) const;
  double c_raw(int k) const { return params(c_block(k).offset); }
  Eigen::Map<Eigen::MatrixXd> weight(int k);
  Eigen::Map<Eigen::VectorXd> bias(int k);
  double& c_raw(int k) { return params(c_block(k).offset); }
  std::vector<ParamBlock> blocks() const;
  int param_count() const { return static_cast<int>(params.size()); }

  // Row-rescaled weight matrix actually applied in the forward pass.
  Eigen::MatrixXd normalized_weight(int k) const;
  // Product of softplus(c_i): the end-to-end Lipschitz bound wrt the
  // infinity norm (in unscaled input coordinates times input_scale).
  double lipschitz_bound() const;
};

// Glorot-uniform init; c_i chosen so softplus(c_i) equals the infinity norm
// of the freshly drawn (input-scaled) weight matrix.
LipNet lipnet_init(int hidden_layers, int width, uint64_t seed,
                   double input_scale = 1.0);

Vec9 eval_u(const LipNet& net, const Vec3& x);

struct LipBatch {
  Eigen::MatrixXd input;  // 3 x B
  Eigen::MatrixXd output;  // 9 x B
  std::vector<Eigen::MatrixXd> act;      // tanh outputs per hidden layer
  std::vector<Eigen::MatrixXd> wn;       // normalized weights per layer
  std::vector<Eigen::VectorXd> rowsum;   // abs row sums of raw W
  std::vector<Eigen::VectorXd> scale;    // applied row scales
};

void lip_forward(const LipNet& net, const Eigen::Matrix3Xd& points,
                 LipBatch& out);

// Accumulates d(<rout, output>)/d params into grad_accum, including the
// normalization paths into W and c_raw.
void lip_backward(const LipNet& net, const LipBatch& fwd,
                  const Eigen::MatrixXd& rout, Eigen::VectorXd& grad_accum);

Eigen::VectorXd lip_param_grad(const LipNet& net,
                               const Eigen::Matrix3Xd& points,
                               const Eigen::MatrixXd& rout);

}  // namespace octa::nets
