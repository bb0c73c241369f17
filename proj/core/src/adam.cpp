#include "octafield/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace octa::train {

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               const std::vector<nets::ParamBlock>& blocks, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(config.beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.beta2, state.step);
  for (const nets::ParamBlock& blk : blocks) {
    const auto g = grad.segment(blk.offset, blk.size());
    if (!g.allFinite()) {
      ++state.skipped_blocks;
      continue;
    }
    auto m = state.m.segment(blk.offset, blk.size());
    auto v = state.v.segment(blk.offset, blk.size());
    auto p = params.segment(blk.offset, blk.size());
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    const Eigen::VectorXd denom =
        ((v / bc2).array().sqrt() + config.eps).matrix();
    p -= config.lr * (m / bc1).cwiseQuotient(denom);
  }
}

}  // namespace octa::train
