#include "octafield/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace octa::io {

namespace {

constexpr uint32_t kMagic = 0x4F435446;  // "OCTF"
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put<uint64_t>(out, static_cast<uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& in) {
  const auto n = get<uint64_t>(in);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  put(out, kMagic);
  put(out, kVersion);

  // geometry net
  put<uint32_t>(out, static_cast<uint32_t>(ckpt.f.layer_out.size()));
  for (int w : ckpt.f.layer_out) put<uint32_t>(out, static_cast<uint32_t>(w));
  for (double om : ckpt.f.omega) put(out, om);
  put<uint8_t>(out, ckpt.f.activation == nets::Activation::kSine ? 0 : 1);
  put(out, ckpt.f.input_scale);
  put_vector(out, ckpt.f.params);

  // field net
  put<uint32_t>(out, static_cast<uint32_t>(ckpt.u.layer_out.size()));
  for (int w : ckpt.u.layer_out) put<uint32_t>(out, static_cast<uint32_t>(w));
  put(out, ckpt.u.input_scale);
  put_vector(out, ckpt.u.params);

  put(out, ckpt.transform.center.x());
  put(out, ckpt.transform.center.y());
  put(out, ckpt.transform.center.z());
  put(out, ckpt.transform.scale);
  put(out, ckpt.seed);
  put<uint32_t>(out, static_cast<uint32_t>(ckpt.noise_scheme.size()));
  out.write(ckpt.noise_scheme.data(),
            static_cast<std::streamsize>(ckpt.noise_scheme.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  if (get<uint32_t>(in) != kMagic) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  if (get<uint32_t>(in) != kVersion) {
    throw std::runtime_error("unsupported checkpoint version: " + path);
  }
  Checkpoint ckpt;

  const auto f_layers = get<uint32_t>(in);
  ckpt.f.layer_out.resize(f_layers);
  ckpt.f.omega.resize(f_layers);
  for (auto& w : ckpt.f.layer_out) w = static_cast<int>(get<uint32_t>(in));
  for (auto& om : ckpt.f.omega) om = get<double>(in);
  ckpt.f.activation = get<uint8_t>(in) == 0 ? nets::Activation::kSine
                                            : nets::Activation::kIdentity;
  ckpt.f.input_scale = get<double>(in);
  ckpt.f.params = get_vector(in);

  const auto u_layers = get<uint32_t>(in);
  ckpt.u.layer_out.resize(u_layers);
  for (auto& w : ckpt.u.layer_out) w = static_cast<int>(get<uint32_t>(in));
  ckpt.u.input_scale = get<double>(in);
  ckpt.u.params = get_vector(in);

  ckpt.transform.center.x() = get<double>(in);
  ckpt.transform.center.y() = get<double>(in);
  ckpt.transform.center.z() = get<double>(in);
  ckpt.transform.scale = get<double>(in);
  ckpt.seed = get<uint64_t>(in);
  const auto len = get<uint32_t>(in);
  ckpt.noise_scheme.resize(len);
  in.read(ckpt.noise_scheme.data(), len);
  return ckpt;
}

}  // namespace octa::io
