#include "octafield/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "octafield/sh_octahedral.hpp"

namespace octa::losses {

namespace {

constexpr double kGradEps = 1e-8;   // degenerate SDF gradient cutoff
constexpr double kBeta = 100.0;     // distance weighting exp(-100 |f|)
constexpr int kChunk = 256;         // fixed chunk size, reduction in order

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Mat3 cofactor(const Mat3& h) {
  Mat3 c;
  c(0, 0) = h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
  c(0, 1) = -(h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0));
  c(0, 2) = h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0);
  c(1, 0) = -(h(0, 1) * h(2, 2) - h(0, 2) * h(2, 1));
  c(1, 1) = h(0, 0) * h(2, 2) - h(0, 2) * h(2, 0);
  c(1, 2) = -(h(0, 0) * h(2, 1) - h(0, 1) * h(2, 0));
  c(2, 0) = h(0, 1) * h(1, 2) - h(0, 2) * h(1, 1);
  c(2, 1) = -(h(0, 0) * h(1, 2) - h(0, 2) * h(1, 0));
  c(2, 2) = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  return c;
}

struct ChunkSums {
  double align = 0, regularize = 0, nsh = 0, eikonal = 0, positional = 0,
         off = 0;
  int skipped_align = 0, skipped_regularize = 0, skipped_eikonal = 0;
  Eigen::VectorXd f_grad, u_grad;
};

struct Needs {
  bool surface_f = false;      // f value+grad on surface batch
  bool surface_u = false;      // u value on surface batch
  bool close_f = false;        // f hessian on close batch
  bool off_f = false;          // f value+grad on off batch
};

// Everything below operates on one chunk of one batch and accumulates into
// ChunkSums; total_loss stitches chunks together in fixed order.

void surface_chunk(const nets::SineNet& f, const nets::LipNet& u,
                   const Eigen::Matrix3Xd& pts, const LossWeights& w,
                   const TermMask& mask, bool with_grads, int denom_surface,
                   int denom_eikonal, ChunkSums& out) {
  const int b = static_cast<int>(pts.cols());
  if (b == 0) return;
  const bool need_u = mask.align || mask.regularize;

  static thread_local nets::SineBatch ff;
  sine_forward(f, pts, /*need_grad=*/true, /*need_hess=*/false, ff);
  static thread_local nets::LipBatch uf;
  if (need_u) lip_forward(u, pts, uf);

  Eigen::VectorXd rf;
  Eigen::MatrixXd rg;
  Eigen::MatrixXd ru;
  if (with_grads) {
    rf.setZero(b);
    rg.setZero(3, b);
    if (mask.align) ru.setZero(9, b);
  }

  for (int i = 0; i < b; ++i) {
    const double fv = ff.value(i);
    const Vec3 g = ff.grad.col(i);
    const double gn = g.norm();
    const bool grad_ok = gn >= kGradEps;

    if (mask.positional) {
      out.positional += std::abs(fv) / denom_surface;
      if (with_grads) rf(i) += w.positional * sgn(fv) / denom_surface;
    }
    if (mask.eikonal) {
      if (grad_ok) {
        out.eikonal += std::abs(gn - 1.0) / denom_eikonal;
        if (with_grads) {
          rg.col(i) += (w.eikonal * sgn(gn - 1.0) / denom_eikonal) * (g / gn);
        }
      } else {
        ++out.skipped_eikonal;
      }
    }
    if (!need_u) continue;
    const Vec9 uv = uf.output.col(i);
    const Vec3 n = grad_ok ? Vec3(g / gn) : Vec3::UnitZ();

    if (mask.align) {
      if (grad_ok) {
        const double beta = std::exp(-kBeta * std::abs(fv));
        const sh::AlignmentInner inner = sh::alignment_inner(uv, n);
        if (inner.degenerate) {
          ++out.skipped_align;
        } else {
          out.align += beta * (1.0 - inner.value) / denom_surface;
          if (with_grads) {
            ru.col(i) -=
                (w.align * beta / denom_surface) * inner.gradient;
          }
        }
      } else {
        ++out.skipped_align;
      }
    }

    if (mask.regularize) {
      const double un = uv.norm();
      if (grad_ok && un >= kGradEps) {
        const Vec9 qhat = uv / un;
        const sh::ProjectionJacobian proj =
            sh::project_normal_jacobian(uv, n);
        const Vec9 diff = qhat - proj.value;
        out.regularize += diff.cwiseAbs().sum() / denom_surface;
        if (with_grads) {
          // d|diff|_1 / dn, then n = g/|g| back to g
          const Vec9 sign_diff = diff.cwiseSign();
          const Vec3 dn = -proj.jacobian.transpose() * sign_diff;
          const Vec3 dg = (dn - n * n.dot(dn)) / gn;
          rg.col(i) += (w.regularize / denom_surface) * dg;
        }
      } else {
        ++out.skipped_regularize;
      }
    }
  }

  if (with_grads) {
    if (mask.positional || mask.eikonal || mask.regularize) {
      sine_backward(f, ff, &rf, &rg, nullptr, out.f_grad);
    }
    if (mask.align) lip_backward(u, uf, ru, out.u_grad);
  }
}

void close_chunk(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                 const LossWeights& w, bool with_grads, int denom,
                 ChunkSums& out) {
  const int b = static_cast<int>(pts.cols());
  if (b == 0) return;
  static thread_local nets::SineBatch ff;
  sine_forward(f, pts, true, true, ff);
  Eigen::MatrixXd rh;
  if (with_grads) rh.setZero(9, b);
  for (int i = 0; i < b; ++i) {
    const Mat3 h = Eigen::Map<const Mat3>(ff.hess.col(i).data());
    const double det = h.determinant();
    out.nsh += std::abs(det) / denom;
    if (with_grads) {
      const Mat3 c = cofactor(h);  // d det / d H
      Eigen::Map<Mat3>(rh.col(i).data()) = (w.nsh * sgn(det) / denom) * c;
    }
  }
  if (with_grads) sine_backward(f, ff, nullptr, nullptr, &rh, out.f_grad);
}

void off_chunk(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
               const LossWeights& w, const TermMask& mask, bool with_grads,
               int denom_off, int denom_eikonal, ChunkSums& out) {
  const int b = static_cast<int>(pts.cols());
  if (b == 0) return;
  static thread_local nets::SineBatch ff;
  sine_forward(f, pts, true, false, ff);
  Eigen::VectorXd rf;
  Eigen::MatrixXd rg;
  if (with_grads) {
    rf.setZero(b);
    rg.setZero(3, b);
  }
  for (int i = 0; i < b; ++i) {
    const double fv = ff.value(i);
    if (mask.off) {
      const double e = std::exp(-w.alpha * std::abs(fv));
      out.off += e / denom_off;
      if (with_grads) {
        rf(i) += w.off * (-w.alpha * sgn(fv) * e) / denom_off;
      }
    }
    if (mask.eikonal) {
      const Vec3 g = ff.grad.col(i);
      const double gn = g.norm();
      if (gn >= kGradEps) {
        out.eikonal += std::abs(gn - 1.0) / denom_eikonal;
        if (with_grads) {
          rg.col(i) += (w.eikonal * sgn(gn - 1.0) / denom_eikonal) * (g / gn);
        }
      } else {
        ++out.skipped_eikonal;
      }
    }
  }
  if (with_grads) sine_backward(f, ff, &rf, &rg, nullptr, out.f_grad);
}

}  // namespace

std::string LossReport::csv_header() {
  return "iteration,align,regularize,lip,nsh,eikonal,positional,off,total,"
         "align_active,regularize_active,skipped_align,skipped_regularize,"
         "skipped_eikonal";
}

std::string LossReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << iteration << ',' << align << ',' << regularize << ',' << lip << ','
     << nsh << ',' << eikonal << ',' << positional << ',' << off << ','
     << total << ',' << (align_active ? 1 : 0) << ','
     << (regularize_active ? 1 : 0) << ',' << skipped_align << ','
     << skipped_regularize << ',' << skipped_eikonal;
  return os.str();
}

double LossReport::recompute_total(const LossWeights& w) const {
  return w.align * align + w.regularize * regularize + w.lip * lip +
         w.nsh * nsh + w.eikonal * eikonal + w.positional * positional +
         w.off * off;
}

TotalLossResult total_loss(const nets::SineNet& f, const nets::LipNet& u,
                           const Batches& batches, const LossWeights& weights,
                           const TermMask& mask, bool with_grads) {
  TotalLossResult res;
  const int n_surface = static_cast<int>(batches.surface.cols());
  const int n_close = static_cast<int>(batches.close.cols());
  const int n_off = static_cast<int>(batches.off.cols());
  const int denom_eik = std::max(1, n_surface + n_off);

  struct Job {
    int batch;  // 0 surface, 1 close, 2 off
    int begin, end;
  };
  std::vector<Job> jobs;
  auto add_jobs = [&](int batch, int total) {
    for (int s = 0; s < total; s += kChunk) {
      jobs.push_back({batch, s, std::min(total, s + kChunk)});
    }
  };
  add_jobs(0, n_surface);
  if (mask.nsh) add_jobs(1, n_close);
  if (mask.off || mask.eikonal) add_jobs(2, n_off);

  std::vector<ChunkSums> sums(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < static_cast<int>(jobs.size()); ++j) {
    const Job& job = jobs[j];
    ChunkSums& cs = sums[j];
    if (with_grads) {
      cs.f_grad.setZero(f.param_count());
      cs.u_grad.setZero(u.param_count());
    }
    if (job.batch == 0) {
      surface_chunk(f, u, batches.surface.middleCols(job.begin,
                                                     job.end - job.begin),
                    weights, mask, with_grads, std::max(1, n_surface),
                    denom_eik, cs);
    } else if (job.batch == 1) {
      close_chunk(f, batches.close.middleCols(job.begin, job.end - job.begin),
                  weights, with_grads, std::max(1, n_close), cs);
    } else {
      off_chunk(f, batches.off.middleCols(job.begin, job.end - job.begin),
                weights, mask, with_grads, std::max(1, n_off), denom_eik, cs);
    }
  }

  LossReport& rep = res.report;
  if (with_grads) {
    res.f_grad.setZero(f.param_count());
    res.u_grad.setZero(u.param_count());
  }
  for (const ChunkSums& cs : sums) {
    rep.align += cs.align;
    rep.regularize += cs.regularize;
    rep.nsh += cs.nsh;
    rep.eikonal += cs.eikonal;
    rep.positional += cs.positional;
    rep.off += cs.off;
    rep.skipped_align += cs.skipped_align;
    rep.skipped_regularize += cs.skipped_regularize;
    rep.skipped_eikonal += cs.skipped_eikonal;
    if (with_grads) {
      if (cs.f_grad.size() > 0) res.f_grad += cs.f_grad;
      if (cs.u_grad.size() > 0) res.u_grad += cs.u_grad;
    }
  }
  if (mask.align && n_surface > 0 && rep.skipped_align == n_surface) {
    throw std::runtime_error("align_loss: every sample has a degenerate SDF gradient");
  }
  if (mask.lip) {
    Eigen::VectorXd* ug = with_grads ? &res.u_grad : nullptr;
    double lip = lip_loss(u, nullptr);
    rep.lip = lip;
    if (ug != nullptr) {
      // d prod softplus(c_i) / d c_raw_k
      for (int k = 0; k < u.layer_count(); ++k) {
        double prod = 1.0;
        for (int j = 0; j < u.layer_count(); ++j) {
          if (j != k) prod *= nets::softplus(u.c_raw(j));
        }
        const double sig = 1.0 / (1.0 + std::exp(-u.c_raw(k)));
        (*ug)(u.c_block(k).offset) += weights.lip * prod * sig;
      }
    }
  }
  rep.align_active = mask.align;
  rep.regularize_active = mask.regularize;
  rep.lip_active = mask.lip;
  rep.nsh_active = mask.nsh;
  rep.eikonal_active = mask.eikonal;
  rep.positional_active = mask.positional;
  rep.off_active = mask.off;
  rep.total = rep.recompute_total(weights);
  return res;
}

namespace {

TermMask single_term(const char* name) {
  TermMask m{false, false, false, false, false, false, false};
  std::string s(name);
  if (s == "align") m.align = true;
  if (s == "regularize") m.regularize = true;
  if (s == "lip") m.lip = true;
  if (s == "nsh") m.nsh = true;
  if (s == "eikonal") m.eikonal = true;
  if (s == "positional") m.positional = true;
  if (s == "off") m.off = true;
  return m;
}

}  // namespace

double align_loss(const nets::LipNet& u, const nets::SineNet& f,
                  const Eigen::Matrix3Xd& pts, Eigen::VectorXd* u_grad,
                  int* skipped) {
  LossWeights w;
  w.align = 1.0;
  Batches b;
  b.surface = pts;
  TotalLossResult r =
      total_loss(f, u, b, w, single_term("align"), u_grad != nullptr);
  if (u_grad != nullptr) *u_grad = r.u_grad;
  if (skipped != nullptr) *skipped = r.report.skipped_align;
  return r.report.align;
}

double regularize_loss(const nets::LipNet& u, const nets::SineNet& f,
                       const Eigen::Matrix3Xd& pts, Eigen::VectorXd* f_grad,
                       int* skipped) {
  LossWeights w;
  w.regularize = 1.0;
  Batches b;
  b.surface = pts;
  TotalLossResult r =
      total_loss(f, u, b, w, single_term("regularize"), f_grad != nullptr);
  if (f_grad != nullptr) *f_grad = r.f_grad;
  if (skipped != nullptr) *skipped = r.report.skipped_regularize;
  return r.report.regularize;
}

double lip_loss(const nets::LipNet& u, Eigen::VectorXd* u_grad) {
  double prod = 1.0;
  for (int k = 0; k < u.layer_count(); ++k) prod *= nets::softplus(u.c_raw(k));
  if (u_grad != nullptr) {
    if (u_grad->size() != u.param_count()) u_grad->setZero(u.param_count());
    for (int k = 0; k < u.layer_count(); ++k) {
      double rest = 1.0;
      for (int j = 0; j < u.layer_count(); ++j) {
        if (j != k) rest *= nets::softplus(u.c_raw(j));
      }
      const double sig = 1.0 / (1.0 + std::exp(-u.c_raw(k)));
      (*u_grad)(u.c_block(k).offset) += rest * sig;
    }
  }
  return prod;
}

double nsh_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                Eigen::VectorXd* f_grad) {
  LossWeights w;
  w.nsh = 1.0;
  nets::LipNet dummy = nets::lipnet_init(2, 2, 0);
  Batches b;
  b.close = pts;
  TotalLossResult r =
      total_loss(f, dummy, b, w, single_term("nsh"), f_grad != nullptr);
  if (f_grad != nullptr) *f_grad = r.f_grad;
  return r.report.nsh;
}

double eikonal_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                    Eigen::VectorXd* f_grad, int* skipped) {
  LossWeights w;
  w.eikonal = 1.0;
  nets::LipNet dummy = nets::lipnet_init(2, 2, 0);
  Batches b;
  b.surface = pts;
  TotalLossResult r =
      total_loss(f, dummy, b, w, single_term("eikonal"), f_grad != nullptr);
  if (f_grad != nullptr) *f_grad = r.f_grad;
  if (skipped != nullptr) *skipped = r.report.skipped_eikonal;
  return r.report.eikonal;
}

double positional_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                       Eigen::VectorXd* f_grad) {
  LossWeights w;
  w.positional = 1.0;
  nets::LipNet dummy = nets::lipnet_init(2, 2, 0);
  Batches b;
  b.surface = pts;
  TotalLossResult r =
      total_loss(f, dummy, b, w, single_term("positional"), f_grad != nullptr);
  if (f_grad != nullptr) *f_grad = r.f_grad;
  return r.report.positional;
}

double off_surface_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                        double alpha, Eigen::VectorXd* f_grad) {
  LossWeights w;
  w.off = 1.0;
  w.alpha = alpha;
  nets::LipNet dummy = nets::lipnet_init(2, 2, 0);
  Batches b;
  b.off = pts;
  TotalLossResult r =
      total_loss(f, dummy, b, w, single_term("off"), f_grad != nullptr);
  if (f_grad != nullptr) *f_grad = r.f_grad;
  return r.report.off;
}

}  // namespace octa::losses
