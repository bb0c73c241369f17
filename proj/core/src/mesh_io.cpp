#include "octafield/mesh_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace octa::geom {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

}  // namespace

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[160];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

void write_ply(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";
  char buf[160];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  }
}

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh: " + path);
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (ls >> x >> y >> z) mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::array<int, 3> f{};
      std::string tok;
      int got = 0;
      while (got < 3 && ls >> tok) {
        f[got++] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      if (got == 3) mesh.faces.push_back(f);
    }
  }
  return mesh;
}

namespace {

struct PlyProperty {
  std::string type;
  std::string name;
  bool is_list = false;
  std::string count_type, item_type;
};

size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32") {
    return 4;
  }
  if (t == "double" || t == "float64") return 8;
  throw std::runtime_error("ply: unknown type " + t);
}

double read_binary_scalar(std::istream& in, const std::string& t) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), type_size(t));
  if (t == "float" || t == "float32") {
    float f;
    std::memcpy(&f, buf, 4);
    return f;
  }
  if (t == "double" || t == "float64") {
    double d;
    std::memcpy(&d, buf, 8);
    return d;
  }
  if (t == "char" || t == "int8") return static_cast<int8_t>(buf[0]);
  if (t == "uchar" || t == "uint8") return buf[0];
  if (t == "short" || t == "int16") {
    int16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (t == "ushort" || t == "uint16") {
    uint16_t v;
    std::memcpy(&v, buf, 2);
    return v;
  }
  if (t == "int" || t == "int32") {
    int32_t v;
    std::memcpy(&v, buf, 4);
    return v;
  }
  uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

}  // namespace

TriangleMesh read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open mesh: " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw std::runtime_error("not a ply file: " + path);

  bool binary = false;
  struct Element {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> props;
  };
  std::vector<Element> elements;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "binary_little_endian") {
        binary = true;
      } else if (fmt != "ascii") {
        throw std::runtime_error("ply: unsupported format " + fmt);
      }
    } else if (tag == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      PlyProperty p;
      ls >> p.type;
      if (p.type == "list") {
        p.is_list = true;
        ls >> p.count_type >> p.item_type >> p.name;
      } else {
        ls >> p.name;
      }
      if (elements.empty()) throw std::runtime_error("ply: property before element");
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  TriangleMesh mesh;
  for (const auto& elem : elements) {
    const bool is_vertex = elem.name == "vertex";
    const bool is_face = elem.name == "face";
    for (size_t i = 0; i < elem.count; ++i) {
      double x = 0, y = 0, z = 0;
      std::vector<int> face;
      if (binary) {
        for (const auto& p : elem.props) {
          if (p.is_list) {
            const int cnt = static_cast<int>(read_binary_scalar(in, p.count_type));
            for (int j = 0; j < cnt; ++j) {
              const int v = static_cast<int>(read_binary_scalar(in, p.item_type));
              if (is_face && p.name.rfind("vertex_ind", 0) == 0) face.push_back(v);
            }
          } else {
            const double v = read_binary_scalar(in, p.type);
            if (p.name == "x") x = v;
            if (p.name == "y") y = v;
            if (p.name == "z") z = v;
          }
        }
      } else {
        std::getline(in, line);
        std::istringstream ls(line);
        for (const auto& p : elem.props) {
          if (p.is_list) {
            int cnt;
            ls >> cnt;
            for (int j = 0; j < cnt; ++j) {
              int v;
              ls >> v;
              if (is_face && p.name.rfind("vertex_ind", 0) == 0) face.push_back(v);
            }
          } else {
            double v;
            ls >> v;
            if (p.name == "x") x = v;
            if (p.name == "y") y = v;
            if (p.name == "z") z = v;
          }
        }
      }
      if (is_vertex) mesh.vertices.emplace_back(x, y, z);
      if (is_face && face.size() >= 3) {
        for (size_t j = 2; j < face.size(); ++j) {
          mesh.faces.push_back({face[0], face[j - 1], face[j]});
        }
      }
    }
  }
  return mesh;
}

TriangleMesh read_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") return read_obj(path);
  if (ext == "ply") return read_ply(path);
  throw std::runtime_error("unsupported mesh format: " + path);
}

void write_mesh(const std::string& path, const TriangleMesh& mesh) {
  const std::string ext = lower_ext(path);
  if (ext == "obj") {
    write_obj(path, mesh);
  } else if (ext == "ply") {
    write_ply(path, mesh);
  } else {
    throw std::runtime_error("unsupported mesh format: " + path);
  }
}

}  // namespace octa::geom
