#pragma once

#include <array>
#include <functional>
#include <vector>

#include "octafield/point_cloud.hpp"
#include "octafield/types.hpp"

namespace octa::geom {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return faces.empty(); }
  double total_area() const;
};

// Batched scalar field: given 3xN query points, return N values.
using FieldBatchEval = std::function<Eigen::VectorXd(const Eigen::Matrix3Xd&)>;

// Zero-isosurface extraction over [-1,1]^3 sampled at resolution^3 grid
// points, linear edge interpolation, shared vertices across cells. A grid
// value exactly at iso counts as the negative side. Output vertices are
// mapped through the transform back to original coordinates. If the field
// never changes sign the mesh is empty.
TriangleMesh marching_cubes(const FieldBatchEval& field, int resolution,
                            double iso = 0.0,
                            const NormalizeTransform& transform = {});

}  // namespace octa::geom
