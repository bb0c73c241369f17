#pragma once

#include <string>

#include "octafield/marching_cubes.hpp"

namespace octa::geom {

// OBJ: ascii vertices/faces. PLY: ascii or binary little endian on read,
// ascii on write. All writers use fixed formatting so repeated runs are
// byte identical.
void write_obj(const std::string& path, const TriangleMesh& mesh);
void write_ply(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::string& path);
TriangleMesh read_ply(const std::string& path);  // faces optional
TriangleMesh read_mesh(const std::string& path);  // by extension
void write_mesh(const std::string& path, const TriangleMesh& mesh);

}  // namespace octa::geom
