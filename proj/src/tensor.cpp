#include "fvs/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace fvs {

void SolverParams::validate() const {
  if (!(lambda > 0.0) || !(alpha0 > 0.0) || !(alpha1 > 0.0)) {
    throw std::invalid_argument("solver: lambda, alpha0 and alpha1 must be > 0");
  }
  if (!(beta >= 0.0) || !(eta > 0.0)) throw std::invalid_argument("solver: beta >= 0 and eta > 0 required");
  if (warp_iters < 1 || pd_iters < 1) throw std::invalid_argument("solver: iteration counts must be >= 1");
  if (!(du_max > 0.0)) throw std::invalid_argument("solver: du_max must be > 0");
  if (levels < 1 || !(scale > 1.0) || min_width < 1) {
    throw std::invalid_argument("solver: invalid pyramid configuration");
  }
  if (!(tensor_sigma >= 0.0) || !(theta >= 0.0) || theta > 1.0 || !(epsilon_scale > 0.0)) {
    throw std::invalid_argument("solver: invalid tensor_sigma, theta or epsilon_scale");
  }
}

namespace {

double masked_central(const ScalarField& f, const Mask& m, int x, int y, int dx, int dy) {
  const int xp = x + dx, yp = y + dy, xm = x - dx, ym = y - dy;
  const bool has_p = f.in_bounds(xp, yp) && m(xp, yp);
  const bool has_m = f.in_bounds(xm, ym) && m(xm, ym);
  if (has_p && has_m) return 0.5 * (f(xp, yp) - f(xm, ym));
  if (has_p) return f(xp, yp) - f(x, y);
  if (has_m) return f(x, y) - f(xm, ym);
  return 0.0;
}

}  // namespace

SymTensorField compute_tensor(const ScalarField& smoothed_i0, double beta, double eta,
                              const Mask& mask) {
  require_same_shape(smoothed_i0, mask, "compute_tensor");
  SymTensorField out(smoothed_i0.width(), smoothed_i0.height(), SymTensor{});
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      const Vec2 g(masked_central(smoothed_i0, mask, x, y, 1, 0),
                   masked_central(smoothed_i0, mask, x, y, 0, 1));
      const double mag = g.norm();
      if (mag == 0.0) continue;
      const Vec2 n = g / mag;
      // T = I + (e - 1) n n^T, eigenvalue e along n and 1 along n_perp.
      const double e = std::exp(-beta * std::pow(mag, eta));
      out(x, y) = {1.0 + (e - 1.0) * n.x() * n.x(), (e - 1.0) * n.x() * n.y(),
                   1.0 + (e - 1.0) * n.y() * n.y()};
    }
  }
  return out;
}

double thresholding_step(double u_hat, double rho_at_u_hat, double i_u, double tau_u,
                         double lambda) {
  if (i_u == 0.0) return u_hat;
  const double bound = tau_u * lambda * i_u * i_u;
  if (rho_at_u_hat < -bound) return u_hat + tau_u * lambda * i_u;
  if (rho_at_u_hat > bound) return u_hat - tau_u * lambda * i_u;
  return u_hat - rho_at_u_hat / i_u;
}

}  // namespace fvs
