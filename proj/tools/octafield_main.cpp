#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "octafield/checkpoint.hpp"
#include "octafield/manifold.hpp"
#include "octafield/marching_cubes.hpp"
#include "octafield/mesh_io.hpp"
#include "octafield/metrics.hpp"
#include "octafield/point_cloud.hpp"
#include "octafield/selftest.hpp"
#include "octafield/sh_octahedral.hpp"
#include "octafield/training.hpp"

namespace {

using json = nlohmann::json;
using namespace octa;

constexpr const char* kVersion = "octafield 0.1.0";

// ----- config file: '#' comments, key = value ------------------------------

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

struct FitOverrides {
  std::optional<std::string> profile, noise;
  std::optional<long> iterations, checkpoint_every;
  std::optional<int> batch_input, batch_close, batch_off, knn_k,
      mc_resolution, f_hidden_layers, f_width, u_hidden_layers, u_width;
  std::optional<double> learning_rate, omega0, input_scale_f, input_scale_u,
      alpha;
  std::optional<double> lambda_align, lambda_regularize, lambda_lip,
      lambda_eikonal, lambda_off, lambda_positional, lambda_nsh,
      lambda_nsh_annealed;
  std::optional<double> anneal_fraction, align_fraction, regularize_fraction;
  std::optional<uint64_t> seed;
};

void apply_file_overrides(const std::map<std::string, std::string>& kv,
                          FitOverrides& o) {
  auto want_d = [&](const char* k, std::optional<double>& slot) {
    auto it = kv.find(k);
    if (it != kv.end() && !slot.has_value()) slot = std::stod(it->second);
  };
  auto want_i = [&](const char* k, auto& slot) {
    auto it = kv.find(k);
    if (it != kv.end() && !slot.has_value()) {
      slot = static_cast<typename std::decay_t<decltype(slot)>::value_type>(
          std::stoll(it->second));
    }
  };
  auto want_s = [&](const char* k, std::optional<std::string>& slot) {
    auto it = kv.find(k);
    if (it != kv.end() && !slot.has_value()) slot = it->second;
  };
  want_s("profile", o.profile);
  want_s("noise", o.noise);
  want_i("iterations", o.iterations);
  want_i("checkpoint_every", o.checkpoint_every);
  want_i("batch_input", o.batch_input);
  want_i("batch_close", o.batch_close);
  want_i("batch_off", o.batch_off);
  want_i("knn_k", o.knn_k);
  want_i("mc_resolution", o.mc_resolution);
  want_i("f_hidden_layers", o.f_hidden_layers);
  want_i("f_width", o.f_width);
  want_i("u_hidden_layers", o.u_hidden_layers);
  want_i("u_width", o.u_width);
  want_i("seed", o.seed);
  want_d("learning_rate", o.learning_rate);
  want_d("omega0", o.omega0);
  want_d("input_scale_f", o.input_scale_f);
  want_d("input_scale_u", o.input_scale_u);
  want_d("alpha", o.alpha);
  want_d("lambda_align", o.lambda_align);
  want_d("lambda_regularize", o.lambda_regularize);
  want_d("lambda_lip", o.lambda_lip);
  want_d("lambda_eikonal", o.lambda_eikonal);
  want_d("lambda_off", o.lambda_off);
  want_d("lambda_positional", o.lambda_positional);
  want_d("lambda_nsh", o.lambda_nsh);
  want_d("lambda_nsh_annealed", o.lambda_nsh_annealed);
  want_d("anneal_fraction", o.anneal_fraction);
  want_d("align_fraction", o.align_fraction);
  want_d("regularize_fraction", o.regularize_fraction);

  static const std::set<std::string> known = {
      "profile", "noise", "iterations", "checkpoint_every", "batch_input",
      "batch_close", "batch_off", "knn_k", "mc_resolution", "f_hidden_layers",
      "f_width", "u_hidden_layers", "u_width", "seed", "learning_rate",
      "omega0", "input_scale_f", "input_scale_u", "alpha", "lambda_align", "lambda_regularize",
      "lambda_lip", "lambda_eikonal", "lambda_off", "lambda_positional",
      "lambda_nsh", "lambda_nsh_annealed", "anneal_fraction", "align_fraction",
      "regularize_fraction"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw std::runtime_error("unknown config key: " + k);
  }
}

train::TrainConfig build_config(const FitOverrides& o, json& meta) {
  train::TrainConfig cfg =
      o.profile.value_or("desk") == "paper"
          ? train::TrainConfig::paper_scale()
          : train::TrainConfig::desk_scale();
  if (o.profile && *o.profile != "desk" && *o.profile != "paper") {
    throw std::runtime_error("profile must be desk or paper");
  }
  if (o.noise) {
    if (*o.noise == "low") {
      cfg.noise = train::NoiseRegime::kLow;
    } else if (*o.noise == "high") {
      cfg.noise = train::NoiseRegime::kHigh;
    } else {
      throw std::runtime_error("noise must be low or high");
    }
  }
  cfg.apply_noise_regime();

  json overrides = json::object();
  auto set = [&](const char* name, auto& field, const auto& opt) {
    if (opt.has_value()) {
      field = static_cast<std::decay_t<decltype(field)>>(*opt);
      overrides[name] = *opt;
    }
  };
  set("iterations", cfg.iterations, o.iterations);
  set("batch_input", cfg.batch_input, o.batch_input);
  set("batch_close", cfg.batch_close, o.batch_close);
  set("batch_off", cfg.batch_off, o.batch_off);
  set("knn_k", cfg.knn_k, o.knn_k);
  set("mc_resolution", cfg.mc_resolution, o.mc_resolution);
  set("f_hidden_layers", cfg.f_hidden_layers, o.f_hidden_layers);
  set("f_width", cfg.f_width, o.f_width);
  set("u_hidden_layers", cfg.u_hidden_layers, o.u_hidden_layers);
  set("u_width", cfg.u_width, o.u_width);
  set("seed", cfg.seed, o.seed);
  set("learning_rate", cfg.learning_rate, o.learning_rate);
  set("omega0", cfg.omega0, o.omega0);
  set("input_scale_f", cfg.input_scale_f, o.input_scale_f);
  set("input_scale_u", cfg.input_scale_u, o.input_scale_u);
  set("alpha", cfg.weights.alpha, o.alpha);
  set("lambda_align", cfg.weights.align, o.lambda_align);
  set("lambda_regularize", cfg.weights.regularize, o.lambda_regularize);
  set("lambda_lip", cfg.weights.lip, o.lambda_lip);
  set("lambda_eikonal", cfg.weights.eikonal, o.lambda_eikonal);
  set("lambda_off", cfg.weights.off, o.lambda_off);
  set("lambda_positional", cfg.schedule.lambda_positional,
      o.lambda_positional);
  set("lambda_nsh", cfg.schedule.lambda_nsh_initial, o.lambda_nsh);
  set("lambda_nsh_annealed", cfg.schedule.lambda_nsh_annealed,
      o.lambda_nsh_annealed);
  set("anneal_fraction", cfg.schedule.anneal_fraction, o.anneal_fraction);
  set("align_fraction", cfg.schedule.align_fraction, o.align_fraction);
  set("regularize_fraction", cfg.schedule.regularize_fraction,
      o.regularize_fraction);
  meta["overrides"] = overrides;
  return cfg;
}

json config_to_json(const train::TrainConfig& cfg) {
  json j;
  j["iterations"] = cfg.iterations;
  j["batch_input"] = cfg.batch_input;
  j["batch_close"] = cfg.batch_close;
  j["batch_off"] = cfg.batch_off;
  j["learning_rate"] = cfg.learning_rate;
  j["seed"] = cfg.seed;
  j["noise"] = cfg.noise == train::NoiseRegime::kLow ? "low" : "high";
  j["knn_k"] = cfg.knn_k;
  j["mc_resolution"] = cfg.mc_resolution;
  j["f_hidden_layers"] = cfg.f_hidden_layers;
  j["f_width"] = cfg.f_width;
  j["u_hidden_layers"] = cfg.u_hidden_layers;
  j["u_width"] = cfg.u_width;
  j["omega0"] = cfg.omega0;
  j["input_scale_f"] = cfg.input_scale_f;
  j["input_scale_u"] = cfg.input_scale_u;
  j["alpha"] = cfg.weights.alpha;
  j["lambda_align"] = cfg.weights.align;
  j["lambda_regularize"] = cfg.weights.regularize;
  j["lambda_lip"] = cfg.weights.lip;
  j["lambda_eikonal"] = cfg.weights.eikonal;
  j["lambda_off"] = cfg.weights.off;
  j["lambda_positional"] = cfg.schedule.lambda_positional;
  j["lambda_nsh"] = cfg.schedule.lambda_nsh_initial;
  j["lambda_nsh_annealed"] = cfg.schedule.lambda_nsh_annealed;
  j["anneal_fraction"] = cfg.schedule.anneal_fraction;
  j["align_fraction"] = cfg.schedule.align_fraction;
  j["regularize_fraction"] = cfg.schedule.regularize_fraction;
  return j;
}

geom::FieldBatchEval sdf_evaluator(const nets::SineNet& f) {
  return [&f](const Eigen::Matrix3Xd& pts) {
    nets::SineBatch batch;
    sine_forward(f, pts, false, false, batch);
    return batch.value;
  };
}

int cmd_fit(const std::string& cloud_path, const std::string& out_dir,
            const FitOverrides& overrides, bool quiet) {
  json meta;
  const train::TrainConfig cfg = build_config(overrides, meta);
  const Eigen::Matrix3Xd raw = geom::read_point_cloud(cloud_path);
  const geom::PointCloud cloud = geom::normalize(raw);

  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir + "/loss_log.csv");
  if (!log) throw std::runtime_error("cannot write " + out_dir + "/loss_log.csv");
  log << losses::LossReport::csv_header() << "\n";

  const long report_every = std::max<long>(1, cfg.iterations / 20);
  const long snapshot_every = overrides.checkpoint_every.value_or(0);
  const std::string noise_name =
      cfg.noise == train::NoiseRegime::kLow ? "low" : "high";
  const auto result = train::fit(
      cloud, cfg,
      [&](long iter, const losses::LossReport& rep, const nets::SineNet& f,
          const nets::LipNet& u) {
        log << rep.csv_row() << "\n";
        if (snapshot_every > 0 && (iter + 1) % snapshot_every == 0 &&
            iter + 1 < cfg.iterations) {
          io::Checkpoint snap{f, u, cloud.transform, cfg.seed, noise_name};
          io::save_checkpoint(
              out_dir + "/checkpoint_" + std::to_string(iter + 1) + ".bin",
              snap);
        }
        if (!quiet && (iter % report_every == 0 || iter + 1 == cfg.iterations)) {
          std::fprintf(stderr, "iter %6ld  total %.6g\n", iter, rep.total);
        }
      });

  io::Checkpoint ckpt;
  ckpt.f = result.f;
  ckpt.u = result.u;
  ckpt.transform = result.transform;
  ckpt.seed = cfg.seed;
  ckpt.noise_scheme = cfg.noise == train::NoiseRegime::kLow ? "low" : "high";

  meta["version"] = kVersion;
  meta["input"] = cloud_path;
  meta["n_points"] = raw.cols();
  meta["config"] = config_to_json(cfg);
  meta["diverged"] = result.diverged;
  meta["adam_skipped_blocks"] = result.adam_skipped_blocks;

  if (result.diverged) {
    meta["diverged_iteration"] = result.diverged_iteration;
    io::save_checkpoint(out_dir + "/checkpoint_diverged.bin", ckpt);
    std::ofstream(out_dir + "/run_meta.json") << meta.dump(2) << "\n";
    std::fprintf(stderr,
                 "error: training diverged at iteration %ld; diagnostic "
                 "checkpoint written to %s/checkpoint_diverged.bin\n",
                 result.diverged_iteration, out_dir.c_str());
    return 1;
  }
  io::save_checkpoint(out_dir + "/checkpoint.bin", ckpt);
  std::ofstream(out_dir + "/run_meta.json") << meta.dump(2) << "\n";
  if (!quiet) {
    std::fprintf(stderr, "checkpoint written to %s/checkpoint.bin\n",
                 out_dir.c_str());
  }
  return 0;
}

int cmd_extract(const std::string& ckpt_path, int resolution, double iso,
                const std::string& out_path) {
  const io::Checkpoint ckpt = io::load_checkpoint(ckpt_path);
  const geom::TriangleMesh mesh = geom::marching_cubes(
      sdf_evaluator(ckpt.f), resolution, iso, ckpt.transform);
  if (mesh.empty()) {
    std::fprintf(stderr,
                 "warning: no sign change at resolution %d, refusing to "
                 "write an empty mesh\n",
                 resolution);
    return 1;
  }
  geom::write_mesh(out_path, mesh);
  std::fprintf(stderr, "mesh: %zu vertices, %zu faces -> %s\n",
               mesh.vertices.size(), mesh.faces.size(), out_path.c_str());
  return 0;
}

Eigen::Matrix3Xd load_as_samples(const std::string& path, int n,
                                 std::mt19937_64& rng) {
  const auto dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "obj" || ext == "ply") {
    const geom::TriangleMesh mesh = geom::read_mesh(path);
    if (!mesh.faces.empty()) return geom::sample_mesh(mesh, n, rng);
    Eigen::Matrix3Xd pts(3, mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
      pts.col(i) = mesh.vertices[i];
    }
    return pts;
  }
  return geom::read_xyz(path);
}

int cmd_eval(const std::string& path_a, const std::string& path_b, int samples,
             uint64_t seed, double tau_pct, const std::string& out_path) {
  // identical inputs must yield identical samples, so each side gets its own
  // generator with the same seed
  std::mt19937_64 rng_a(seed), rng_b(seed);
  const Eigen::Matrix3Xd a = load_as_samples(path_a, samples, rng_a);
  const Eigen::Matrix3Xd b = load_as_samples(path_b, samples, rng_b);
  const geom::MetricReport report =
      geom::evaluate_metrics(a, b, tau_pct / 100.0);
  const std::string text = report.to_json();
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
  }
  return 0;
}

int cmd_manifold(const std::string& loss_name, int resolution,
                 const std::string& out_path) {
  losses::ManifoldLoss kind;
  if (loss_name == "l1") {
    kind = losses::ManifoldLoss::kL1;
  } else if (loss_name == "l2") {
    kind = losses::ManifoldLoss::kL2;
  } else if (loss_name == "cosine") {
    kind = losses::ManifoldLoss::kCosine;
  } else {
    throw CLI::ValidationError("--loss must be l1, l2 or cosine");
  }
  const auto sweep = losses::loss_manifold(kind, resolution);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    out = &file;
  }
  char buf[160];
  (*out) << "# x y z loss\n";
  for (const auto& s : sweep) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n",
                  s.direction.x(), s.direction.y(), s.direction.z(), s.loss);
    (*out) << buf;
  }
  return 0;
}

int cmd_frames(const std::string& ckpt_path, const std::string& cloud_path,
               int stride, double glyph_scale, double residual_threshold,
               const std::string& out_path) {
  const io::Checkpoint ckpt = io::load_checkpoint(ckpt_path);
  const Eigen::Matrix3Xd raw = geom::read_point_cloud(cloud_path);

  std::vector<Vec3> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<int> flagged;
  for (int i = 0; i < raw.cols(); i += stride) {
    const Vec3 p = ckpt.transform.to_normalized(raw.col(i));
    Vec9 q = eval_u(ckpt.u, p);
    const double qn = q.norm();
    if (qn < 1e-9) {
      flagged.push_back(i);
      continue;
    }
    q /= qn;
    const double residual = sh::variety_residual(q);
    if (residual > residual_threshold) flagged.push_back(i);
    const sh::AxesResult axes = sh::recover_axes(q);
    const int base = static_cast<int>(vertices.size());
    for (int a = 0; a < 3; ++a) {
      const Vec3 dir = glyph_scale * axes.axes.col(a);
      vertices.push_back(raw.col(i) - dir / ckpt.transform.scale);
      vertices.push_back(raw.col(i) + dir / ckpt.transform.scale);
      edges.push_back({base + 2 * a, base + 2 * a + 1});
    }
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << "ply\nformat ascii 1.0\n";
  out << "comment octahedral frame glyphs, 3 segments per point\n";
  if (!flagged.empty()) {
    out << "comment flagged points (variety residual > "
        << residual_threshold << "):";
    for (int i : flagged) out << ' ' << i;
    out << "\n";
  }
  out << "element vertex " << vertices.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "element edge " << edges.size() << "\n";
  out << "property int vertex1\nproperty int vertex2\n";
  out << "end_header\n";
  char buf[160];
  for (const Vec3& v : vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(),
                  v.z());
    out << buf;
  }
  for (const auto& e : edges) out << e[0] << ' ' << e[1] << '\n';
  std::fprintf(stderr, "%zu glyphs (%zu flagged) -> %s\n", edges.size() / 3,
               flagged.size(), out_path.c_str());
  return 0;
}

int cmd_selftest(bool corrupt_x90) {
  const SelfTestResult result = run_selftest(corrupt_x90);
  size_t width = 0;
  for (const auto& c : result.checks) width = std::max(width, c.name.size());
  for (const auto& c : result.checks) {
    std::printf("%-*s  %s  (err %.3g, tol %.3g)\n", static_cast<int>(width),
                c.name.c_str(), c.passed ? "pass" : "FAIL", c.error,
                c.tolerance);
  }
  if (!result.all_passed()) {
    std::printf("selftest: FAILURE\n");
    return 1;
  }
  std::printf("selftest: all checks passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - octahedral-field surface reconstruction"};
  app.require_subcommand(1);

#ifdef _OPENMP
  if (const char* threads = std::getenv("OCTAFIELD_THREADS")) {
    omp_set_num_threads(std::max(1, std::atoi(threads)));
  }
#endif

  // fit ----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "fit geometry and octahedral field");
  std::string fit_cloud, fit_config, fit_out = ".";
  bool fit_quiet = false;
  FitOverrides ov;
  fit->add_option("cloud", fit_cloud, "input point cloud (.xyz or .ply)")
      ->required();
  fit->add_option("--config", fit_config, "key = value config file");
  fit->add_option("--out", fit_out, "output directory (default .)");
  fit->add_flag("--quiet", fit_quiet, "suppress progress output");
  fit->add_option("--profile", ov.profile, "desk or paper preset");
  fit->add_option("--noise", ov.noise, "low or high noise schedule");
  fit->add_option("--seed", ov.seed, "random seed");
  fit->add_option("--iterations", ov.iterations, "training iterations");
  fit->add_option("--checkpoint-every", ov.checkpoint_every,
                  "write an intermediate checkpoint every n iterations");
  fit->add_option("--batch-input", ov.batch_input, "input batch size");
  fit->add_option("--batch-close", ov.batch_close, "close-sample batch size");
  fit->add_option("--batch-off", ov.batch_off, "off-surface batch size");
  fit->add_option("--knn-k", ov.knn_k, "KNN count for the sigma radius");
  fit->add_option("--learning-rate", ov.learning_rate, "Adam learning rate");
  fit->add_option("--f-hidden-layers", ov.f_hidden_layers,
                  "geometry net hidden layers");
  fit->add_option("--f-width", ov.f_width, "geometry net width");
  fit->add_option("--u-hidden-layers", ov.u_hidden_layers,
                  "field net hidden layers");
  fit->add_option("--u-width", ov.u_width, "field net width");
  fit->add_option("--omega0", ov.omega0, "sine frequency scale");
  fit->add_option("--input-scale-f", ov.input_scale_f,
                  "geometry-net input premultiplication");
  fit->add_option("--input-scale-u", ov.input_scale_u,
                  "field-net input premultiplication");
  fit->add_option("--alpha", ov.alpha, "off-surface sharpness");
  fit->add_option("--lambda-align", ov.lambda_align, "alignment weight");
  fit->add_option("--lambda-regularize", ov.lambda_regularize,
                  "regularization weight");
  fit->add_option("--lambda-lip", ov.lambda_lip, "Lipschitz weight");
  fit->add_option("--lambda-eikonal", ov.lambda_eikonal, "eikonal weight");
  fit->add_option("--lambda-off", ov.lambda_off, "off-surface weight");
  fit->add_option("--lambda-positional", ov.lambda_positional,
                  "positional weight (overrides the noise schedule)");
  fit->add_option("--lambda-nsh", ov.lambda_nsh, "initial NSH weight");
  fit->add_option("--lambda-nsh-annealed", ov.lambda_nsh_annealed,
                  "NSH weight after the anneal milestone");
  fit->add_option("--anneal-fraction", ov.anneal_fraction,
                  "NSH anneal milestone as a fraction of training");
  fit->add_option("--align-fraction", ov.align_fraction,
                  "alignment/smoothing start fraction");
  fit->add_option("--regularize-fraction", ov.regularize_fraction,
                  "regularization start fraction");

  // extract --------------------------------------------------------------
  auto* extract = app.add_subcommand("extract", "marching-cubes isosurface");
  std::string ex_ckpt, ex_out = "mesh.obj";
  int ex_res = 128;
  double ex_iso = 0.0;
  extract->add_option("checkpoint", ex_ckpt, "checkpoint file")->required();
  extract->add_option("--resolution", ex_res, "grid samples per axis")
      ->check(CLI::Range(8, 2048));
  extract->add_option("--iso", ex_iso, "iso level (default 0)");
  extract->add_option("--out", ex_out, "output mesh (.obj or .ply)");

  // eval -----------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "chamfer/hausdorff/f-score report");
  std::string ev_a, ev_b, ev_out;
  int ev_samples = 100000;
  uint64_t ev_seed = 0;
  double ev_tau_pct = 0.5;
  eval->add_option("a", ev_a, "mesh or point cloud")->required();
  eval->add_option("b", ev_b, "mesh or point cloud")->required();
  eval->add_option("--samples", ev_samples, "surface samples per mesh");
  eval->add_option("--seed", ev_seed, "sampling seed");
  eval->add_option("--tau-pct", ev_tau_pct,
                   "f-score threshold, percent of the bbox diagonal");
  eval->add_option("--out", ev_out, "also write the report to this file");

  // manifold ---------------------------------------------------------------
  auto* manifold =
      app.add_subcommand("manifold", "loss landscape over sphere directions");
  std::string mf_loss = "l1", mf_out;
  int mf_res = 100000;
  manifold->add_option("--loss", mf_loss, "l1, l2 or cosine");
  manifold->add_option("--resolution", mf_res, "number of directions");
  manifold->add_option("--out", mf_out, "output table (default stdout)");

  // frames -----------------------------------------------------------------
  auto* frames =
      app.add_subcommand("frames", "frame glyphs from a trained field");
  std::string fr_ckpt, fr_cloud, fr_out = "glyphs.ply";
  int fr_stride = 1;
  double fr_scale = 0.02, fr_thresh = 1e-2;
  frames->add_option("checkpoint", fr_ckpt, "checkpoint file")->required();
  frames->add_option("cloud", fr_cloud, "point cloud")->required();
  frames->add_option("--stride", fr_stride, "emit every n-th point")
      ->check(CLI::PositiveNumber);
  frames->add_option("--glyph-scale", fr_scale,
                     "glyph half-length in normalized units");
  frames->add_option("--residual-threshold", fr_thresh,
                     "variety residual above which a glyph is flagged");
  frames->add_option("--out", fr_out, "output PLY with line segments");

  // selftest -----------------------------------------------------------------
  auto* selftest =
      app.add_subcommand("selftest", "run the embedded oracle suite");
  bool st_corrupt = false;
  selftest->add_flag("--corrupt-rx90", st_corrupt,
                     "perturb the x-rotation constant (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) {
      if (!fit_config.empty()) {
        apply_file_overrides(parse_config_file(fit_config), ov);
      }
      return cmd_fit(fit_cloud, fit_out, ov, fit_quiet);
    }
    if (*extract) return cmd_extract(ex_ckpt, ex_res, ex_iso, ex_out);
    if (*eval) return cmd_eval(ev_a, ev_b, ev_samples, ev_seed, ev_tau_pct, ev_out);
    if (*manifold) return cmd_manifold(mf_loss, mf_res, mf_out);
    if (*frames) {
      return cmd_frames(fr_ckpt, fr_cloud, fr_stride, fr_scale, fr_thresh,
                        fr_out);
    }
    if (*selftest) return cmd_selftest(st_corrupt);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    const std::string msg = e.what();
    if (msg.find("cannot open") != std::string::npos) return 2;
    return 1;
  }
  return 0;
}
