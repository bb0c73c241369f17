#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

std::string cli() {
  const char* path = std::getenv("OCTAFIELD_CLI");
  REQUIRE(path != nullptr);
  return path;
}

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string out_file = "/tmp/octa_cli_out.txt";
  const std::string cmd = cli() + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::string output((std::istreambuf_iterator<char>(in)), {});
  return {WEXITSTATUS(status), output};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_sphere_cloud(const std::string& path, int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::ofstream out(path);
  for (int i = 0; i < n; ++i) {
    double x = gauss(rng), y = gauss(rng), z = gauss(rng);
    const double r = std::sqrt(x * x + y * y + z * z);
    out << x / r << ' ' << y / r << ' ' << z / r << "\n";
  }
}

const char* kTinyFit =
    " --iterations 30 --batch-input 128 --batch-close 64 --batch-off 64"
    " --f-width 16 --f-hidden-layers 2 --u-width 16 --u-hidden-layers 2"
    " --knn-k 8 --quiet";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
  CHECK(run("fit").exit_code == 2);                  // missing required arg
  CHECK(run("fit cloud.xyz --bogus-flag").exit_code == 2);
  CHECK(run("extract ckpt.bin --resolution 4").exit_code == 2);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("fit --help").exit_code == 0);
}

TEST_CASE("missing input file exits 2 and names the path") {
  const RunResult r = run("fit /tmp/no_such_cloud_here.xyz" +
                          std::string(kTinyFit));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/tmp/no_such_cloud_here.xyz") != std::string::npos);
}

TEST_CASE("fit, extract, eval, frames round trip") {
  write_sphere_cloud("/tmp/octa_cli_sphere.xyz", 400, 11);
  const RunResult fit = run("fit /tmp/octa_cli_sphere.xyz --out /tmp/octa_run"
                            " --seed 3" + std::string(kTinyFit));
  CHECK(fit.exit_code == 0);
  CHECK(!slurp("/tmp/octa_run/checkpoint.bin").empty());
  CHECK(!slurp("/tmp/octa_run/run_meta.json").empty());
  {
    std::ifstream log("/tmp/octa_run/loss_log.csv");
    int lines = 0;
    std::string line;
    while (std::getline(log, line)) ++lines;
    CHECK(lines == 31);  // header + one row per iteration
  }

  SUBCASE("extract twice gives identical bytes") {
    CHECK(run("extract /tmp/octa_run/checkpoint.bin --resolution 24"
              " --out /tmp/octa_a.obj").exit_code == 0);
    CHECK(run("extract /tmp/octa_run/checkpoint.bin --resolution 24"
              " --out /tmp/octa_b.obj").exit_code == 0);
    const std::string a = slurp("/tmp/octa_a.obj");
    CHECK(!a.empty());
    CHECK(a == slurp("/tmp/octa_b.obj"));
  }

  SUBCASE("eval of identical meshes") {
    REQUIRE(run("extract /tmp/octa_run/checkpoint.bin --resolution 24"
                " --out /tmp/octa_bench.obj").exit_code == 0);
    const RunResult ev = run(
        "eval /tmp/octa_bench.obj /tmp/octa_bench.obj --samples 4000 --seed 1");
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("\"fscore_pct\": 100") != std::string::npos);
    CHECK(ev.output.find("\"chamfer_x1e3\": 0") != std::string::npos);
  }

  SUBCASE("frames emits glyph segments") {
    const RunResult fr = run(
        "frames /tmp/octa_run/checkpoint.bin /tmp/octa_cli_sphere.xyz"
        " --stride 40 --out /tmp/octa_glyphs.ply");
    CHECK(fr.exit_code == 0);
    const std::string ply = slurp("/tmp/octa_glyphs.ply");
    CHECK(ply.find("element edge 30") != std::string::npos);  // 10 points x 3
    CHECK(ply.find("element vertex 60") != std::string::npos);
  }

  SUBCASE("deterministic fits") {
    const RunResult again = run(
        "fit /tmp/octa_cli_sphere.xyz --out /tmp/octa_run2 --seed 3" +
        std::string(kTinyFit));
    CHECK(again.exit_code == 0);
    CHECK(slurp("/tmp/octa_run2/checkpoint.bin")
          == slurp("/tmp/octa_run/checkpoint.bin"));
    CHECK(slurp("/tmp/octa_run2/loss_log.csv")
          == slurp("/tmp/octa_run/loss_log.csv"));
  }
}

TEST_CASE("config file with CLI override precedence") {
  write_sphere_cloud("/tmp/octa_cli_sphere2.xyz", 300, 13);
  {
    std::ofstream cfg("/tmp/octa_cfg.txt");
    cfg << "# test config\n"
        << "iterations = 25\n"
        << "batch_input = 96\n"
        << "batch_close = 64\n"
        << "batch_off = 64\n"
        << "f_width = 16\nf_hidden_layers = 2\n"
        << "u_width = 16\nu_hidden_layers = 2\n"
        << "knn_k = 8\n"
        << "noise = low\n"
        << "lambda_positional = 1234\n";
  }
  const RunResult r = run(
      "fit /tmp/octa_cli_sphere2.xyz --config /tmp/octa_cfg.txt"
      " --out /tmp/octa_run3 --quiet --lambda-positional 3500");
  CHECK(r.exit_code == 0);
  const std::string meta = slurp("/tmp/octa_run3/run_meta.json");
  // the flag wins over both the config file and the noise schedule
  CHECK(meta.find("\"lambda_positional\": 3500") != std::string::npos);
  CHECK(meta.find("\"noise\": \"low\"") != std::string::npos);
  {
    std::ifstream log("/tmp/octa_run3/loss_log.csv");
    int lines = 0;
    std::string line;
    while (std::getline(log, line)) ++lines;
    CHECK(lines == 26);
  }

  // unknown config keys are rejected
  {
    std::ofstream cfg("/tmp/octa_cfg_bad.txt");
    cfg << "iterations = 10\nnot_a_key = 7\n";
  }
  const RunResult bad = run(
      "fit /tmp/octa_cli_sphere2.xyz --config /tmp/octa_cfg_bad.txt --quiet");
  CHECK(bad.exit_code != 0);
  CHECK(bad.output.find("not_a_key") != std::string::npos);
}

TEST_CASE("manifold table") {
  const RunResult r =
      run("manifold --loss cosine --resolution 500 --out /tmp/octa_mani.txt");
  CHECK(r.exit_code == 0);
  std::ifstream in("/tmp/octa_mani.txt");
  std::string header;
  std::getline(in, header);
  CHECK(header == "# x y z loss");
  int rows = 0;
  double x, y, z, loss;
  double max_loss = 0.0;
  while (in >> x >> y >> z >> loss) {
    ++rows;
    CHECK(std::abs(x * x + y * y + z * z - 1.0) < 1e-9);
    CHECK(loss >= -1e-12);
    max_loss = std::max(max_loss, loss);
  }
  CHECK(rows == 500);
  CHECK(max_loss <= 2.0 + 1e-12);
  CHECK(run("manifold --loss bogus").exit_code == 2);
}

TEST_CASE("selftest") {
  CHECK(run("selftest").exit_code == 0);
  const RunResult corrupt = run("selftest --corrupt-rx90");
  CHECK(corrupt.exit_code == 1);
  CHECK(corrupt.output.find("wigner-homomorphism") != std::string::npos);
  CHECK(corrupt.output.find("FAIL") != std::string::npos);
}
