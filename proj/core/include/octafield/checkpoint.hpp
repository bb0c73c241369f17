#pragma once

#include <string>

#include "octafield/lip_net.hpp"
#include "octafield/point_cloud.hpp"
#include "octafield/sine_net.hpp"

namespace octa::io {

// Versioned binary dump of both networks, the normalization transform and
// run identity. Round trips are bit exact.
struct Checkpoint {
  nets::SineNet f;
  nets::LipNet u;
  geom::NormalizeTransform transform;
  uint64_t seed = 0;
  std::string noise_scheme = "low";
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace octa::io
