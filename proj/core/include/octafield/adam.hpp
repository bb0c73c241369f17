#pragma once

#include <vector>

#include "octafield/sine_net.hpp"  // ParamBlock
#include "octafield/types.hpp"

namespace octa::train {

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
  long skipped_blocks = 0;  // blocks with non-finite gradients

  explicit AdamState(int param_count)
      : m(Eigen::VectorXd::Zero(param_count)),
        v(Eigen::VectorXd::Zero(param_count)) {}
};

// Standard bias-corrected Adam update. A parameter block whose gradient
// contains a non-finite entry is left untouched for this step and counted.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const std::vector<nets::ParamBlock>& blocks, AdamState& state,
               const AdamConfig& config);

}  // namespace octa::train
