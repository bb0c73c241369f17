#include "octafield/point_cloud.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "octafield/mesh_io.hpp"

namespace octa::geom {

PointCloud normalize(const Eigen::Matrix3Xd& raw, double margin) {
  if (raw.cols() == 0) {
    throw std::invalid_argument("normalize: empty point cloud");
  }
  const Vec3 lo = raw.rowwise().minCoeff();
  const Vec3 hi = raw.rowwise().maxCoeff();
  PointCloud out;
  out.transform.center = 0.5 * (lo + hi);
  const double longest = (hi - lo).maxCoeff();
  out.transform.scale =
      longest > 1e-12 ? 2.0 * (1.0 - margin) / longest : 1.0;
  out.points.resize(3, raw.cols());
  for (int i = 0; i < raw.cols(); ++i) {
    out.points.col(i) = out.transform.to_normalized(raw.col(i));
  }
  return out;
}

Eigen::Matrix3Xd read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point cloud: " + path);
  std::vector<Vec3> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (ls >> x >> y >> z) pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw std::runtime_error("no points in " + path);
  Eigen::Matrix3Xd out(3, pts.size());
  for (size_t i = 0; i < pts.size(); ++i) out.col(i) = pts[i];
  return out;
}

Eigen::Matrix3Xd read_point_cloud(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "ply") {
    const TriangleMesh mesh = read_ply(path);
    Eigen::Matrix3Xd out(3, mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      out.col(i) = mesh.vertices[i];
    }
    return out;
  }
  return read_xyz(path);
}

void write_xyz(const std::string& path, const Eigen::Matrix3Xd& points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[128];
  for (int i = 0; i < points.cols(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", points(0, i),
                  points(1, i), points(2, i));
    out << buf;
  }
}

}  // namespace octa::geom
