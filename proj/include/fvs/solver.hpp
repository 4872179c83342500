// Anisotropic TGV-L1 primal-dual machinery for one linearisation of the
// data term.
//
// Energy minimised per warp:
//
//   lambda * |rho(u)| + alpha1 * |T grad u - v| + alpha0 * |grad v|
//
// with rho linearised along the epipolar direction around the disparity
// u_w of the current warp. Duals: p (2 channels) for the first-order term,
// q (4 channels, full Jacobian of v) for the second-order term. Step sizes
// come from diagonal preconditioning (row / column absolute sums of the
// linear operator).
#pragma once

#include "fvs/image.hpp"

#include <functional>

namespace fvs {

struct SolverParams {
  double lambda = 5.0;
  double alpha0 = 17.0;
  double alpha1 = 1.2;
  double beta = 9.0;
  double eta = 0.85;
  int warp_iters = 50;
  int pd_iters = 10;
  double du_max = 0.2;
  int levels = 5;
  double scale = 2.0;
  int min_width = 50;
  /// Gaussian pre-smoothing of I0 before the tensor is built, px.
  double tensor_sigma = 1.0;
  /// Over-relaxation parameter.
  double theta = 1.0;
  /// Largest probe flow used to build trajectory fields, px.
  double epsilon_scale = 0.1;

  /// Throws std::invalid_argument when a weight or count is out of range.
  void validate() const;
};

/// T = exp(-beta |g|^eta) n n^T + n_perp n_perp^T with g the masked central
/// gradient of `smoothed_i0` and n = g / |g|. Identity where g = 0.
SymTensorField compute_tensor(const ScalarField& smoothed_i0, double beta, double eta,
                              const Mask& mask);

/// Resolvent of the linearised L1 data term (soft threshold along I_u).
/// `rho_at_u_hat` is rho_bar evaluated at u_hat. I_u = 0 returns u_hat.
double thresholding_step(double u_hat, double rho_at_u_hat, double i_u, double tau_u,
                         double lambda);

/// Data term of one warp: rho_bar(u) = rho0 + (u - u0) * i_u where valid.
struct LinearizedData {
  ScalarField i_u;
  ScalarField rho0;
  ScalarField u0;
  Mask valid;
};

/// Per-pixel, per-row preconditioned step sizes.
struct StepSizes {
  ScalarField tau_u;
  ScalarField tau_v;
  VectorField2 sigma_p;
  Field<Vec4> sigma_q;
};

StepSizes compute_step_sizes(const SymTensorField& tensor, const Mask& mask, double alpha0,
                             double alpha1);

struct SolverState {
  ScalarField u;
  ScalarField u_bar;
  VectorField2 v;
  VectorField2 v_bar;
  VectorField2 p;
  Field<Vec4> q;

  static SolverState zeros(int width, int height);
  /// Starts from a given disparity with v = 0 and zero duals.
  static SolverState from_disparity(const ScalarField& u);
};

/// One full primal-dual cycle: dual ascent on p and q with projection onto
/// the unit ball, primal descent on u through the thresholding resolvent
/// and on v, then over-relaxation of u_bar and v_bar.
void primal_dual_iterate(SolverState& state, const SymTensorField& tensor,
                         const LinearizedData& data, const StepSizes& steps,
                         const SolverParams& params, const Mask& mask);

// Linear operator K(u, v) = (alpha1 (T grad u - v), alpha0 grad v) and its
// adjoint, exposed for verification.
struct DualPair {
  VectorField2 p;
  Field<Vec4> q;
};
struct PrimalPair {
  ScalarField u;
  VectorField2 v;
};
DualPair apply_operator(const PrimalPair& x, const SymTensorField& tensor, const Mask& mask,
                        double alpha0, double alpha1);
PrimalPair apply_adjoint(const DualPair& y, const SymTensorField& tensor, const Mask& mask,
                         double alpha0, double alpha1);

/// lambda |rho| + alpha1 |T grad u - v| + alpha0 |grad v| summed over the
/// mask. `residual` is the (non-linearised) photometric residual per pixel;
/// pixels outside `residual_valid` contribute no data cost.
double tgv_energy(const ScalarField& residual, const Mask& residual_valid, const ScalarField& u,
                  const VectorField2& v, const SymTensorField& tensor, const Mask& mask,
                  const SolverParams& params);

}  // namespace fvs
