#include <cmath>
#include <random>

#include "doctest.h"
#include "octafield/lip_net.hpp"
#include "octafield/losses.hpp"
#include "octafield/sine_net.hpp"
#include "test_util.hpp"

using namespace octa;
using nets::Activation;
using nets::LipNet;
using nets::SineNet;

namespace {

// central finite differences of an arbitrary scalar-of-parameters function
template <typename Net, typename Fn>
Eigen::VectorXd fd_param_grad(Net net, Fn loss, double h = 1e-6) {
  Eigen::VectorXd g(net.param_count());
  for (int i = 0; i < net.param_count(); ++i) {
    const double save = net.params(i);
    net.params(i) = save + h;
    const double fp = loss(net);
    net.params(i) = save - h;
    const double fm = loss(net);
    net.params(i) = save;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

}  // namespace

TEST_CASE("siren_init determinism and ranges") {
  const SineNet a = nets::siren_init(4, 32, 99, 30.0, 1.0);
  const SineNet b = nets::siren_init(4, 32, 99, 30.0, 1.0);
  CHECK(a.params == b.params);
  const SineNet c = nets::siren_init(4, 32, 100, 30.0, 1.0);
  CHECK(a.params != c.params);

  // first layer U(-1/3, 1/3) for input dimension 3
  CHECK(a.weight(0).cwiseAbs().maxCoeff() <= 1.0 / 3.0);
  CHECK(a.weight(0).cwiseAbs().maxCoeff() > 0.25);  // not degenerate
  // hidden layers U(+-sqrt(6/width)/omega0)
  const double hidden_bound = std::sqrt(6.0 / 32.0) / 30.0;
  CHECK(a.weight(1).cwiseAbs().maxCoeff() <= hidden_bound);
  CHECK(a.weight(2).cwiseAbs().maxCoeff() <= hidden_bound);

  // the input scale premultiplies the first weight matrix only
  const SineNet s = nets::siren_init(4, 32, 99, 30.0, 100.0);
  CHECK((s.weight(0) - 100.0 * a.weight(0)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s.weight(1) - a.weight(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.input_scale == 100.0);
}

TEST_CASE("identity-activation net is exactly linear") {
  SineNet net = nets::siren_init(2, 4, 7, 1.0, 1.0);
  net.activation = Activation::kIdentity;
  // effective linear map: w_last * W2 * W1, bias terms aside
  const Eigen::MatrixXd m =
      net.weight(2) * net.weight(1) * net.weight(0);  // 1x3
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    const nets::SineEval e = eval_f(net, x);
    CHECK((e.gradient - m.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(e.hessian.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("analytic gradient and hessian match finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-0.8, 0.8);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const SineNet net = nets::siren_init(3, 24, seed, 30.0, 1.0);
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    const nets::SineEval e = eval_f(net, x);

    CHECK((e.hessian - e.hessian.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    const double h = 1e-4;
    for (int c = 0; c < 3; ++c) {
      Vec3 xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const nets::SineEval ep = eval_f(net, xp);
      const nets::SineEval em = eval_f(net, xm);
      const double fd_g = (ep.value - em.value) / (2 * h);
      CHECK(std::abs(fd_g - e.gradient[c]) /
                std::max(1.0, std::abs(e.gradient[c])) < 1e-4);
      for (int r = 0; r < 3; ++r) {
        const double fd_h = (ep.gradient[r] - em.gradient[r]) / (2 * h);
        CHECK(std::abs(fd_h - e.hessian(r, c)) /
                  std::max(1.0, std::abs(e.hessian(r, c))) < 1e-3);
      }
    }
  }
}

TEST_CASE("parameter gradients: value path") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-0.8, 0.8);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const SineNet net = nets::siren_init(2, 10, seed, 30.0, 1.0);
    Eigen::Matrix3Xd x(3, 3);
    for (int i = 0; i < 9; ++i) x(i % 3, i / 3) = uni(rng);

    // loss = sum_b f(x_b)^2
    nets::SineBatch fwd;
    sine_forward(net, x, false, false, fwd);
    Eigen::VectorXd rf = 2.0 * fwd.value;
    const Eigen::VectorXd ana =
        nets::sine_param_grad(net, x, &rf, nullptr, nullptr);
    const Eigen::VectorXd fd = fd_param_grad(net, [&](const SineNet& n) {
      nets::SineBatch b;
      sine_forward(n, x, false, false, b);
      return b.value.squaredNorm();
    });
    CHECK(rel_err(ana, fd) < 1e-4);
  }
}

TEST_CASE("parameter gradients: gradient path") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-0.8, 0.8);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const SineNet net = nets::siren_init(2, 10, seed, 30.0, 1.0);
    Eigen::Matrix3Xd x(3, 2);
    for (int i = 0; i < 6; ++i) x(i % 3, i / 3) = uni(rng);

    // loss = sum_b |grad f(x_b)|^2
    nets::SineBatch fwd;
    sine_forward(net, x, true, false, fwd);
    Eigen::MatrixXd rg = 2.0 * fwd.grad;
    const Eigen::VectorXd ana =
        nets::sine_param_grad(net, x, nullptr, &rg, nullptr);
    const Eigen::VectorXd fd = fd_param_grad(net, [&](const SineNet& n) {
      nets::SineBatch b;
      sine_forward(n, x, true, false, b);
      return b.grad.squaredNorm();
    });
    CHECK(rel_err(ana, fd) < 1e-3);
  }
}

TEST_CASE("parameter gradients: hessian determinant path") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-0.8, 0.8);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const SineNet net = nets::siren_init(2, 10, seed, 30.0, 1.0);
    Eigen::Matrix3Xd x(3, 2);
    for (int i = 0; i < 6; ++i) x(i % 3, i / 3) = uni(rng);

    Eigen::VectorXd fgrad;
    losses::nsh_loss(net, x, &fgrad);
    const Eigen::VectorXd fd = fd_param_grad(
        net,
        [&](const SineNet& n) { return losses::nsh_loss(n, x, nullptr); },
        1e-5);
    CHECK(rel_err(fgrad, fd) < 1e-2);
  }
}

TEST_CASE("lipnet_init ties bound constants to the weight infinity norm") {
  const LipNet net = nets::lipnet_init(4, 32, 123, 1.0);
  for (int k = 0; k < net.layer_count(); ++k) {
    const double inf = net.weight(k).cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(std::abs(nets::softplus(net.c_raw(k)) - inf) < 1e-9);
  }
  const LipNet again = nets::lipnet_init(4, 32, 123, 1.0);
  CHECK(net.params == again.params);
  // softplus preimage of zero clamps instead of hitting -inf
  CHECK(nets::softplus_inverse(0.0) == -20.0);
  CHECK(std::isfinite(nets::softplus(nets::softplus_inverse(0.0))));
}

TEST_CASE("eval_u basics") {
  LipNet net = nets::lipnet_init(2, 8, 3, 1.0);
  // zero weights: output equals the final bias
  for (int k = 0; k < net.layer_count(); ++k) net.weight(k).setZero();
  const Vec9 out = eval_u(net, Vec3(0.3, -0.2, 0.9));
  CHECK((out - Eigen::VectorXd(net.bias(net.layer_count() - 1)))
            .cwiseAbs()
            .maxCoeff() < 1e-15);

  // no normalization of the output itself
  const LipNet rnd = nets::lipnet_init(2, 16, 77, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  bool any_nonunit = false;
  for (int i = 0; i < 10; ++i) {
    const Vec9 u = eval_u(rnd, Vec3(uni(rng), uni(rng), uni(rng)));
    if (std::abs(u.norm() - 1.0) > 1e-3) any_nonunit = true;
  }
  CHECK(any_nonunit);
}

TEST_CASE("lipschitz bound holds on random pairs") {
  const LipNet net = nets::lipnet_init(3, 32, 15, 1.0);
  const double bound = net.lipschitz_bound();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 a(uni(rng), uni(rng), uni(rng));
    const Vec3 b(uni(rng), uni(rng), uni(rng));
    const double dx = (a - b).cwiseAbs().maxCoeff();
    if (dx < 1e-12) continue;
    const double du = (eval_u(net, a) - eval_u(net, b)).cwiseAbs().maxCoeff();
    if (du > bound * dx * (1.0 + 1e-12)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("weight normalization is idempotent and bounded") {
  const LipNet net = nets::lipnet_init(3, 16, 33, 1.0);
  for (int k = 0; k < net.layer_count(); ++k) {
    const Eigen::MatrixXd wn = net.normalized_weight(k);
    const double sp = nets::softplus(net.c_raw(k));
    CHECK(wn.cwiseAbs().rowwise().sum().maxCoeff() <= sp + 1e-9);
    // applying the normalization to an already-normalized matrix is a no-op
    LipNet copy = net;
    copy.weight(k) = wn;
    const Eigen::MatrixXd wn2 = copy.normalized_weight(k);
    CHECK(wn == wn2);
  }
}

TEST_CASE("lip parameter gradients match finite differences") {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    LipNet net = nets::lipnet_init(2, 8, seed, 1.0);
    // init puts the largest row exactly at the bound where the row scale is
    // not differentiable; move every bound strictly inside so the rescale
    // path is active and smooth for the finite differences
    for (int k = 0; k < net.layer_count(); ++k) {
      net.c_raw(k) = nets::softplus_inverse(
          0.6 * nets::softplus(net.c_raw(k)));
    }
    Eigen::Matrix3Xd x(3, 3);
    for (int i = 0; i < 9; ++i) x(i % 3, i / 3) = uni(rng);

    nets::LipBatch fwd;
    lip_forward(net, x, fwd);
    const Eigen::MatrixXd rout = 2.0 * fwd.output;  // loss = |u|^2 summed
    const Eigen::VectorXd ana = nets::lip_param_grad(net, x, rout);
    const Eigen::VectorXd fd = fd_param_grad(net, [&](const LipNet& n) {
      nets::LipBatch b;
      lip_forward(n, x, b);
      return b.output.squaredNorm();
    });
    CHECK(rel_err(ana, fd) < 1e-5);
  }
}

TEST_CASE("shrinking the bound constants shrinks empirical variation") {
  // constants set below every row sum so the rescale is active for each row;
  // shrinking c then scales every effective weight matrix by exactly s
  LipNet base = nets::lipnet_init(3, 24, 51, 1.0);
  for (int k = 0; k < base.layer_count(); ++k) {
    const double min_rowsum =
        base.weight(k).cwiseAbs().rowwise().sum().minCoeff();
    base.c_raw(k) = nets::softplus_inverse(0.9 * min_rowsum);
  }
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Matrix3Xd xs(3, 200);
  for (int i = 0; i < xs.size(); ++i) xs(i % 3, i / 3) = uni(rng);

  auto empirical = [&](const LipNet& net) {
    double sup = 0.0;
    for (int i = 0; i < xs.cols(); ++i) {
      for (int j = i + 1; j < xs.cols(); j += 7) {
        const double dx =
            (xs.col(i) - xs.col(j)).cwiseAbs().maxCoeff();
        if (dx < 1e-9) continue;
        const double du = (eval_u(net, xs.col(i)) - eval_u(net, xs.col(j)))
                              .cwiseAbs()
                              .maxCoeff();
        sup = std::max(sup, du / dx);
      }
    }
    return sup;
  };

  const double s = 0.5;
  LipNet shrunk = base;
  for (int k = 0; k < shrunk.layer_count(); ++k) {
    shrunk.c_raw(k) =
        nets::softplus_inverse(s * nets::softplus(base.c_raw(k)));
  }
  const double sup_base = empirical(base);
  const double sup_shrunk = empirical(shrunk);
  CHECK(sup_shrunk <= s * sup_base + 1e-9);
}
