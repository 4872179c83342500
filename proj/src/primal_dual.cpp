#include "fvs/solver.hpp"

#include <cmath>

namespace fvs {

namespace {

// Masked forward-difference edges: both endpoints must be inside the mask.
struct Edges {
  const Mask& m;
  int w, h;
  bool ex(int x, int y) const { return x >= 0 && x + 1 < w && m(x, y) && m(x + 1, y); }
  bool ey(int x, int y) const { return y >= 0 && y + 1 < h && m(x, y) && m(x, y + 1); }
};

Vec2 project_unit(const Vec2& v) { return v / std::max(1.0, v.norm()); }
Vec4 project_unit(const Vec4& v) { return v / std::max(1.0, v.norm()); }

Vec2 grad_at(const ScalarField& f, const Edges& e, int x, int y) {
  return {e.ex(x, y) ? f(x + 1, y) - f(x, y) : 0.0, e.ey(x, y) ? f(x, y + 1) - f(x, y) : 0.0};
}

Vec4 jacobian_at(const VectorField2& f, const Edges& e, int x, int y) {
  Vec4 j = Vec4::Zero();
  if (e.ex(x, y)) {
    j[0] = f(x + 1, y).x() - f(x, y).x();
    j[2] = f(x + 1, y).y() - f(x, y).y();
  }
  if (e.ey(x, y)) {
    j[1] = f(x, y + 1).x() - f(x, y).x();
    j[3] = f(x, y + 1).y() - f(x, y).y();
  }
  return j;
}

double div_at(const VectorField2& f, const Edges& e, int x, int y) {
  double d = 0.0;
  if (e.ex(x, y)) d += f(x, y).x();
  if (e.ex(x - 1, y)) d -= f(x - 1, y).x();
  if (e.ey(x, y)) d += f(x, y).y();
  if (e.ey(x, y - 1)) d -= f(x, y - 1).y();
  return d;
}

Vec2 div_q_at(const Field<Vec4>& q, const Edges& e, int x, int y) {
  Vec2 d = Vec2::Zero();
  if (e.ex(x, y)) {
    d.x() += q(x, y)[0];
    d.y() += q(x, y)[2];
  }
  if (e.ex(x - 1, y)) {
    d.x() -= q(x - 1, y)[0];
    d.y() -= q(x - 1, y)[2];
  }
  if (e.ey(x, y)) {
    d.x() += q(x, y)[1];
    d.y() += q(x, y)[3];
  }
  if (e.ey(x, y - 1)) {
    d.x() -= q(x, y - 1)[1];
    d.y() -= q(x, y - 1)[3];
  }
  return d;
}

VectorField2 tensor_times(const SymTensorField& t, const VectorField2& p, const Mask& mask) {
  VectorField2 out(p.width(), p.height());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (mask[i]) out[i] = t[i].apply(p[i]);
  }
  return out;
}

}  // namespace

SolverState SolverState::zeros(int width, int height) {
  return from_disparity(ScalarField(width, height));
}

SolverState SolverState::from_disparity(const ScalarField& u) {
  const int w = u.width();
  const int h = u.height();
  return {u, u, VectorField2(w, h), VectorField2(w, h), VectorField2(w, h), Field<Vec4>(w, h)};
}

StepSizes compute_step_sizes(const SymTensorField& t, const Mask& mask, double alpha0,
                             double alpha1) {
  require_same_shape(t, mask, "compute_step_sizes");
  const int w = mask.width();
  const int h = mask.height();
  const Edges e{mask, w, h};
  StepSizes s{ScalarField(w, h), ScalarField(w, h), VectorField2(w, h), Field<Vec4>(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const SymTensor& tk = t(x, y);
      const double ex = e.ex(x, y) ? 1.0 : 0.0;
      const double ey = e.ey(x, y) ? 1.0 : 0.0;

      // Rows of K: p1, p2, q1..q4.
      const double row_p1 =
          alpha1 * (std::abs(tk.a) * ex + std::abs(tk.b) * ey + std::abs(tk.a * ex + tk.b * ey) + 1.0);
      const double row_p2 =
          alpha1 * (std::abs(tk.b) * ex + std::abs(tk.c) * ey + std::abs(tk.b * ex + tk.c * ey) + 1.0);
      s.sigma_p(x, y) = Vec2(1.0 / row_p1, 1.0 / row_p2);
      const double qx = ex > 0.0 ? 1.0 / (2.0 * alpha0) : 0.0;
      const double qy = ey > 0.0 ? 1.0 / (2.0 * alpha0) : 0.0;
      s.sigma_q(x, y) = Vec4(qx, qy, qx, qy);

      // Columns of K: u and v (v1, v2 share the same pattern).
      double col_u = std::abs(tk.a * ex + tk.b * ey) + std::abs(tk.b * ex + tk.c * ey);
      if (e.ex(x - 1, y)) col_u += std::abs(t(x - 1, y).a) + std::abs(t(x - 1, y).b);
      if (e.ey(x, y - 1)) col_u += std::abs(t(x, y - 1).b) + std::abs(t(x, y - 1).c);
      col_u *= alpha1;
      s.tau_u(x, y) = col_u > 0.0 ? 1.0 / col_u : 1.0 / alpha1;

      const double links = ex + ey + (e.ex(x - 1, y) ? 1.0 : 0.0) + (e.ey(x, y - 1) ? 1.0 : 0.0);
      s.tau_v(x, y) = 1.0 / (alpha1 + alpha0 * links);
    }
  }
  return s;
}

void primal_dual_iterate(SolverState& st, const SymTensorField& t, const LinearizedData& data,
                         const StepSizes& steps, const SolverParams& params, const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const Edges e{mask, w, h};
  const double a0 = params.alpha0;
  const double a1 = params.alpha1;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const Vec2 tg = t(x, y).apply(grad_at(st.u_bar, e, x, y));
      const Vec2 dp = a1 * (tg - st.v_bar(x, y));
      st.p(x, y) = project_unit(Vec2(st.p(x, y) + steps.sigma_p(x, y).cwiseProduct(dp)));
      const Vec4 dq = a0 * jacobian_at(st.v_bar, e, x, y);
      st.q(x, y) = project_unit(Vec4(st.q(x, y) + steps.sigma_q(x, y).cwiseProduct(dq)));
    }
  }

  const VectorField2 tp = tensor_times(t, st.p, mask);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      const double tau_u = steps.tau_u(x, y);
      const double u_old = st.u(x, y);
      const double u_hat = u_old + tau_u * a1 * div_at(tp, e, x, y);
      double u_new = u_hat;
      if (data.valid(x, y)) {
        const double i_u = data.i_u(x, y);
        const double rho = data.rho0(x, y) + (u_hat - data.u0(x, y)) * i_u;
        u_new = thresholding_step(u_hat, rho, i_u, tau_u, params.lambda);
      }
      st.u(x, y) = u_new;
      st.u_bar(x, y) = u_new + params.theta * (u_new - u_old);

      const Vec2 v_old = st.v(x, y);
      const Vec2 v_new = v_old + steps.tau_v(x, y) * (a1 * st.p(x, y) + a0 * div_q_at(st.q, e, x, y));
      st.v(x, y) = v_new;
      st.v_bar(x, y) = v_new + params.theta * (v_new - v_old);
    }
  }
}

DualPair apply_operator(const PrimalPair& xin, const SymTensorField& t, const Mask& mask,
                        double alpha0, double alpha1) {
  const int w = mask.width();
  const int h = mask.height();
  const Edges e{mask, w, h};
  DualPair out{VectorField2(w, h), Field<Vec4>(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      out.p(x, y) = alpha1 * (t(x, y).apply(grad_at(xin.u, e, x, y)) - xin.v(x, y));
      out.q(x, y) = alpha0 * jacobian_at(xin.v, e, x, y);
    }
  }
  return out;
}

PrimalPair apply_adjoint(const DualPair& yin, const SymTensorField& t, const Mask& mask,
                         double alpha0, double alpha1) {
  const int w = mask.width();
  const int h = mask.height();
  const Edges e{mask, w, h};
  const VectorField2 tp = tensor_times(t, yin.p, mask);
  PrimalPair out{ScalarField(w, h), VectorField2(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      out.u(x, y) = -alpha1 * div_at(tp, e, x, y);
      out.v(x, y) = -alpha1 * yin.p(x, y) - alpha0 * div_q_at(yin.q, e, x, y);
    }
  }
  return out;
}

double tgv_energy(const ScalarField& residual, const Mask& residual_valid, const ScalarField& u,
                  const VectorField2& v, const SymTensorField& t, const Mask& mask,
                  const SolverParams& params) {
  const int w = mask.width();
  const int h = mask.height();
  const Edges e{mask, w, h};
  double energy = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      if (residual_valid(x, y)) energy += params.lambda * std::abs(residual(x, y));
      energy += params.alpha1 * (t(x, y).apply(grad_at(u, e, x, y)) - v(x, y)).norm();
      energy += params.alpha0 * jacobian_at(v, e, x, y).norm();
    }
  }
  return energy;
}

}  // namespace fvs
