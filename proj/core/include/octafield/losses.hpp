#pragma once

#include <string>

#include "octafield/lip_net.hpp"
#include "octafield/sine_net.hpp"
#include "octafield/types.hpp"

// The seven training losses. Alignment updates only the field network u and
// regularization updates only the geometry network f; the cross-network
// quantities (surface normals in align, frame coefficients in regularize)
// enter as constants. All terms are means over their batch; samples with a
// degenerate gradient or coefficient norm contribute zero and are counted.

namespace octa::losses {

struct LossWeights {
  double align = 100.0;
  double regularize = 10.0;
  double lip = 1e-6;
  double nsh = 3.0;
  double eikonal = 50.0;
  double positional = 7000.0;
  double off = 100.0;
  double alpha = 100.0;  // off-surface sharpness
};

struct TermMask {
  bool align = true;
  bool regularize = true;
  bool lip = true;
  bool nsh = true;
  bool eikonal = true;
  bool positional = true;
  bool off = true;
};

struct LossReport {
  long iteration = 0;
  double align = 0, regularize = 0, lip = 0, nsh = 0;
  double eikonal = 0, positional = 0, off = 0;
  double total = 0;
  bool align_active = false, regularize_active = false, lip_active = false;
  bool nsh_active = false, eikonal_active = false, positional_active = false;
  bool off_active = false;
  int skipped_align = 0, skipped_regularize = 0, skipped_eikonal = 0;

  static std::string csv_header();
  std::string csv_row() const;
  // weighted sum of the active terms; LossReport.total must equal this
  double recompute_total(const LossWeights& w) const;
};

struct Batches {
  Eigen::Matrix3Xd surface;  // noisy input samples p
  Eigen::Matrix3Xd close;    // near-surface samples p_close
  Eigen::Matrix3Xd off;      // uniform box samples p_off
};

struct TotalLossResult {
  LossReport report;
  Eigen::VectorXd f_grad;  // empty unless gradients requested
  Eigen::VectorXd u_grad;
};

TotalLossResult total_loss(const nets::SineNet& f, const nets::LipNet& u,
                           const Batches& batches, const LossWeights& weights,
                           const TermMask& mask, bool with_grads);

// Individual terms (unit-test surface; same kernels as total_loss).
double align_loss(const nets::LipNet& u, const nets::SineNet& f,
                  const Eigen::Matrix3Xd& pts,
                  Eigen::VectorXd* u_grad = nullptr, int* skipped = nullptr);
double regularize_loss(const nets::LipNet& u, const nets::SineNet& f,
                       const Eigen::Matrix3Xd& pts,
                       Eigen::VectorXd* f_grad = nullptr,
                       int* skipped = nullptr);
double lip_loss(const nets::LipNet& u, Eigen::VectorXd* u_grad = nullptr);
double nsh_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                Eigen::VectorXd* f_grad = nullptr);
double eikonal_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                    Eigen::VectorXd* f_grad = nullptr, int* skipped = nullptr);
double positional_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                       Eigen::VectorXd* f_grad = nullptr);
double off_surface_loss(const nets::SineNet& f, const Eigen::Matrix3Xd& pts,
                        double alpha, Eigen::VectorXd* f_grad = nullptr);

}  // namespace octa::losses
