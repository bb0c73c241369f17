#pragma once

#include <functional>
#include <string>
#include <vector>

#include "octafield/adam.hpp"
#include "octafield/lip_net.hpp"
#include "octafield/losses.hpp"
#include "octafield/point_cloud.hpp"
#include "octafield/sine_net.hpp"

namespace octa::train {

// Loss scheduling: backbone terms run from iteration zero, the NSH weight
// steps down at the anneal milestone, alignment and smoothing join at
// align_fraction, regularization at regularize_fraction. A term is active
// when iteration >= floor(fraction * iterations).
struct Schedule {
  double lambda_positional = 7000.0;
  double lambda_nsh_initial = 3.0;
  double lambda_nsh_annealed = 3e-4;
  double anneal_fraction = 0.1;
  double align_fraction = 0.4;
  double regularize_fraction = 0.6;

  static Schedule low_noise();   // 7000 / 3e-4 / 10% / 40% / 60%
  static Schedule high_noise();  // 3500 / 3e-3 / 10% / 20% / 40%
};

enum class NoiseRegime { kLow, kHigh };

struct TrainConfig {
  long iterations = 10000;
  int batch_input = 15000;
  int batch_close = 15000;
  int batch_off = 15000;
  double learning_rate = 5e-5;
  uint64_t seed = 0;
  NoiseRegime noise = NoiseRegime::kLow;
  int knn_k = 51;
  int mc_resolution = 512;

  int f_hidden_layers = 4;
  int f_width = 256;
  int u_hidden_layers = 4;
  int u_width = 256;
  double omega0 = 30.0;
  double input_scale_f = 1.0;    // geometry net: standard sine-net scaling
  double input_scale_u = 100.0;  // field net: premultiplied first layer

  losses::LossWeights weights;  // alpha and the fixed lambdas live here
  Schedule schedule;            // positional/NSH schedule values

  // paper-scale defaults as above; the desk profile trades size for time
  static TrainConfig paper_scale(NoiseRegime noise = NoiseRegime::kLow);
  static TrainConfig desk_scale(NoiseRegime noise = NoiseRegime::kLow);

  void apply_noise_regime();  // sets schedule from the noise member
  long milestone(double fraction) const {
    return static_cast<long>(fraction * static_cast<double>(iterations));
  }
};

struct FitResult {
  nets::SineNet f;
  nets::LipNet u;
  geom::NormalizeTransform transform;
  std::vector<losses::LossReport> log;
  bool diverged = false;
  long diverged_iteration = -1;
  long adam_skipped_blocks = 0;
};

using IterationCallback =
    std::function<void(long iteration, const losses::LossReport& report,
                       const nets::SineNet& f, const nets::LipNet& u)>;

// Joint fit of geometry and octahedral field on a normalized cloud.
FitResult fit(const geom::PointCloud& cloud, const TrainConfig& config,
              const IterationCallback& on_iteration = {});

// Term activity and weights at one iteration (exposed for gating tests).
losses::TermMask schedule_mask(const TrainConfig& config, long iteration);
losses::LossWeights schedule_weights(const TrainConfig& config,
                                     long iteration);

}  // namespace octa::train
