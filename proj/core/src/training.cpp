#include "octafield/training.hpp"

#include <cmath>

#include "octafield/sampling.hpp"

namespace octa::train {

Schedule Schedule::low_noise() { return Schedule{}; }

Schedule Schedule::high_noise() {
  Schedule s;
  s.lambda_positional = 3500.0;
  s.lambda_nsh_annealed = 3e-3;
  s.align_fraction = 0.2;
  s.regularize_fraction = 0.4;
  return s;
}

TrainConfig TrainConfig::paper_scale(NoiseRegime noise) {
  TrainConfig c;
  c.noise = noise;
  c.apply_noise_regime();
  return c;
}

TrainConfig TrainConfig::desk_scale(NoiseRegime noise) {
  TrainConfig c;
  c.iterations = 2000;
  c.batch_input = 2048;
  c.batch_close = 2048;
  c.batch_off = 2048;
  c.mc_resolution = 128;
  c.f_hidden_layers = 2;
  c.f_width = 128;
  c.u_hidden_layers = 2;
  c.u_width = 128;
  c.noise = noise;
  c.apply_noise_regime();
  return c;
}

void TrainConfig::apply_noise_regime() {
  schedule = noise == NoiseRegime::kLow ? Schedule::low_noise()
                                        : Schedule::high_noise();
}

losses::TermMask schedule_mask(const TrainConfig& config, long iteration) {
  losses::TermMask m;
  const bool align_on = iteration >= config.milestone(config.schedule.align_fraction);
  m.align = align_on;
  m.lip = align_on;  // smoothing starts with alignment
  m.regularize =
      iteration >= config.milestone(config.schedule.regularize_fraction);
  return m;
}

losses::LossWeights schedule_weights(const TrainConfig& config,
                                     long iteration) {
  losses::LossWeights w = config.weights;
  w.positional = config.schedule.lambda_positional;
  w.nsh = iteration < config.milestone(config.schedule.anneal_fraction)
              ? config.schedule.lambda_nsh_initial
              : config.schedule.lambda_nsh_annealed;
  return w;
}

FitResult fit(const geom::PointCloud& cloud, const TrainConfig& config,
              const IterationCallback& on_iteration) {
  Rng rng(config.seed);
  const Eigen::VectorXd sigma = knn_sigma(cloud.points, config.knn_k);

  FitResult res;
  res.transform = cloud.transform;
  res.f = nets::siren_init(config.f_hidden_layers, config.f_width,
                           config.seed ^ 0x9e3779b97f4a7c15ull, config.omega0,
                           config.input_scale_f);
  res.u = nets::lipnet_init(config.u_hidden_layers, config.u_width,
                            config.seed ^ 0xc2b2ae3d27d4eb4full,
                            config.input_scale_u);

  AdamConfig adam_cfg;
  adam_cfg.lr = config.learning_rate;
  AdamState f_state(res.f.param_count());
  AdamState u_state(res.u.param_count());
  const auto f_blocks = res.f.blocks();
  const auto u_blocks = res.u.blocks();

  res.log.reserve(config.iterations);
  for (long iter = 0; iter < config.iterations; ++iter) {
    losses::Batches batches;
    batches.surface = sample_subset(cloud.points, config.batch_input, rng);
    batches.close =
        sample_close(cloud.points, sigma, config.batch_close, rng);
    batches.off = sample_off(config.batch_off, rng);

    const losses::TermMask mask = schedule_mask(config, iter);
    const losses::LossWeights weights = schedule_weights(config, iter);
    losses::TotalLossResult step =
        losses::total_loss(res.f, res.u, batches, weights, mask, true);
    step.report.iteration = iter;
    res.log.push_back(step.report);
    if (on_iteration) on_iteration(iter, step.report, res.f, res.u);

    if (!std::isfinite(step.report.total)) {
      res.diverged = true;
      res.diverged_iteration = iter;
      return res;
    }

    adam_step(res.f.params, step.f_grad, f_blocks, f_state, adam_cfg);
    adam_step(res.u.params, step.u_grad, u_blocks, u_state, adam_cfg);
  }
  res.adam_skipped_blocks = f_state.skipped_blocks + u_state.skipped_blocks;
  return res;
}

}  // namespace octa::train
