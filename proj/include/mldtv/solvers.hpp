#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mldtv/image.hpp"
#include "mldtv/noise.hpp"

namespace mldtv {

struct SolverConfig {
  double alpha = 0.5;      // regularization weight
  double beta = 0.5;       // sub-relaxation
  double tol = 1e-5;       // inf-norm stopping tolerance on the iterate step
  int max_iter = 5000;
  double grad_eps = 1e-8;  // gradient-magnitude smoothing
  int trace_every = 0;     // record the energy every n iterations (0 = off)

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("SolverConfig: alpha must be positive");
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("SolverConfig: beta must be in [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
    if (!(grad_eps > 0.0)) throw std::invalid_argument("SolverConfig: grad_eps must be positive");
  }
};

template <typename Scalar>
struct DenoiseResult {
  Image<Scalar> image;
  int iterations = 0;
  Scalar final_step_inf_norm = Scalar(0);
  Scalar final_energy = Scalar(0);
  bool converged = false;
  std::vector<Scalar> energy_trace;  // sampled every trace_every iterations
};

/// Iterates stop early (reported as converged=false) once the iterate leaves
/// this band; the exponential data term can blow up for bad parameter combos.
inline constexpr double kDivergenceGuard = 1e6;

namespace detail {

/// Smoothed TV of the forward-difference gradient with edge replication:
/// sum over pixels of sqrt(|G|^2 + grad_eps^2).
template <typename Scalar>
Scalar smoothed_tv(const Image<Scalar>& img, Scalar grad_eps) {
  const Eigen::Index h = img.height(), w = img.width();
  const auto p = replicate_pad(img);
  const auto dxp = (p.block(1, 2, h, w) - p.block(1, 1, h, w)) / img.dx;
  const auto dyp = (p.block(2, 1, h, w) - p.block(1, 1, h, w)) / img.dy;
  return (dxp.square() + dyp.square() + grad_eps * grad_eps).sqrt().sum();
}

template <typename Scalar>
Scalar unsmoothed_tv(const Image<Scalar>& img) {
  const Eigen::Index h = img.height(), w = img.width();
  const auto p = replicate_pad(img);
  const auto dxp = (p.block(1, 2, h, w) - p.block(1, 1, h, w)) / img.dx;
  const auto dyp = (p.block(2, 1, h, w) - p.block(1, 1, h, w)) / img.dy;
  return (dxp.square() + dyp.square()).sqrt().sum();
}

}  // namespace detail

/// Discrete MLD functional for GG noise: data part of Eq. (8) plus
/// alpha * smoothed TV (forward differences, edge replication).
template <typename Scalar>
Scalar mld_energy(const Image<Scalar>& I, const Image<Scalar>& J, const GGParams& p,
                  Scalar alpha, Scalar grad_eps = Scalar(1e-8)) {
  require_same_shape(I, J, "mld_energy");
  return -mld_data_term_gg(I, J, p) + alpha * detail::smoothed_tv(J, grad_eps);
}

/// Gaussian-MLD functional (Eq. 20): sum (I-J-mu)^2 + alpha * smoothed TV.
template <typename Scalar>
Scalar gaussian_mld_energy(const Image<Scalar>& I, const Image<Scalar>& J,
                           const GaussianParams& p, Scalar alpha,
                           Scalar grad_eps = Scalar(1e-8)) {
  require_same_shape(I, J, "gaussian_mld_energy");
  return -mld_data_term_gaussian(I, J, p) + alpha * detail::smoothed_tv(J, grad_eps);
}

/// TV-L1 functional (Eq. 1): sum |I-J| + alpha * unsmoothed TV.
template <typename Scalar>
Scalar tvl1_energy(const Image<Scalar>& I, const Image<Scalar>& J, Scalar alpha) {
  require_same_shape(I, J, "tvl1_energy");
  return (I.values - J.values).abs().sum() + alpha * detail::unsmoothed_tv(J);
}

namespace detail {

/// Shared staggered-magnitude machinery for the fixed-point scheme, the
/// Euler-Lagrange residual and the divergence identity test. The smoothed
/// magnitude of the edge (x+1/2, y) is the forward-difference magnitude of
/// pixel (x, y), the one at (x-1/2, y) is that of pixel (x-1, y), and
/// likewise in y; with this placement -f + s J is the exact gradient of the
/// smoothed forward-difference TV term.
template <typename Scalar>
struct TvStencil {
  using Plane = typename Image<Scalar>::Plane;
  Eigen::Index h = 0, w = 0;
  Scalar dx = 1, dy = 1;
  Plane p;        // (h+2) x (w+2) replicated pad of J
  Plane dxf, dyf; // (h+1) x (w+1) forward differences, entry (r,c) = pixel (r-1, c-1)
  Plane rmag;     // (h+1) x (w+1) reciprocal smoothed magnitudes

  void resize(Eigen::Index h_, Eigen::Index w_, Scalar dx_, Scalar dy_) {
    h = h_; w = w_; dx = dx_; dy = dy_;
    p.resize(h + 2, w + 2);
    dxf.resize(h + 1, w + 1);
    dyf.resize(h + 1, w + 1);
    rmag.resize(h + 1, w + 1);
  }

  void compute(const Plane& J, Scalar grad_eps) {
    p.block(1, 1, h, w) = J;
    p.row(0) = p.row(1);
    p.row(h + 1) = p.row(h);
    p.col(0) = p.col(1);
    p.col(w + 1) = p.col(w);
    dxf = (p.block(0, 1, h + 1, w + 1) - p.block(0, 0, h + 1, w + 1)) / dx;
    dyf = (p.block(1, 0, h + 1, w + 1) - p.block(0, 0, h + 1, w + 1)) / dy;
    rmag = (dxf.square() + dyf.square() + grad_eps * grad_eps).sqrt().inverse();
  }

  // reciprocal magnitudes at the four edges of each pixel
  auto re() const { return rmag.block(1, 1, h, w); }  // (x+1/2, y) and (x, y+1/2)
  auto rw() const { return rmag.block(1, 0, h, w); }  // (x-1/2, y)
  auto rn() const { return rmag.block(0, 1, h, w); }  // (x, y-1/2)
  // neighbour values
  auto je() const { return p.block(1, 2, h, w); }
  auto jw() const { return p.block(1, 0, h, w); }
  auto js() const { return p.block(2, 1, h, w); }
  auto jn() const { return p.block(0, 1, h, w); }

  // f and s exactly as printed (single 1/dx, 1/dy prefactors)
  auto f() const {
    return -(je() * re() + jw() * rw()) / dx - (js() * re() + jn() * rn()) / dy;
  }
  auto s() const { return -(re() + rw()) / dx - (re() + rn()) / dy; }
};

}  // namespace detail

/// The paper's f/s stencils for an iterate J (see TvStencil for the edge
/// magnitude placement).
template <typename Scalar>
std::pair<typename Image<Scalar>::Plane, typename Image<Scalar>::Plane> fs_stencils(
    const Image<Scalar>& J, Scalar grad_eps) {
  detail::TvStencil<Scalar> st;
  st.resize(J.height(), J.width(), J.dx, J.dy);
  st.compute(J.values, grad_eps);
  return {st.f(), st.s()};
}

/// div(grad J / |grad J|) assembled from the normalized edge fluxes; for
/// dx = dy = 1 this is algebraically identical to -f + s J.
template <typename Scalar>
typename Image<Scalar>::Plane normalized_gradient_divergence(const Image<Scalar>& J,
                                                             Scalar grad_eps) {
  detail::TvStencil<Scalar> st;
  const Eigen::Index h = J.height(), w = J.width();
  st.resize(h, w, J.dx, J.dy);
  st.compute(J.values, grad_eps);
  typename Image<Scalar>::Plane div =
      (st.dxf.block(1, 1, h, w) * st.re() - st.dxf.block(1, 0, h, w) * st.rw()) / J.dx +
      (st.dyf.block(1, 1, h, w) * st.re() - st.dyf.block(0, 1, h, w) * st.rn()) / J.dy;
  return div;
}

/// Pixel-wise residual of the smoothed Euler-Lagrange operator of Eq. (9):
/// gamma nu - (gamma/delta^gamma) e^{gamma (I-J)} - alpha (-f + s J).
template <typename Scalar>
Image<Scalar> el_residual_mld(const Image<Scalar>& I, const Image<Scalar>& J, const GGParams& p,
                              Scalar alpha, Scalar grad_eps) {
  p.validate();
  require_same_shape(I, J, "el_residual_mld");
  detail::TvStencil<Scalar> st;
  const Eigen::Index h = J.height(), w = J.width();
  st.resize(h, w, J.dx, J.dy);
  st.compute(J.values, grad_eps);
  const Scalar g = Scalar(p.gamma);
  const Scalar c = Scalar(p.gamma * std::pow(p.delta, -p.gamma));
  Image<Scalar> out(h, w, Scalar(0), J.dx, J.dy);
  out.values = Scalar(p.gamma * p.nu) - c * (g * (I.values - J.values)).min(Scalar(kExpClamp)).exp() -
               alpha * (-st.f() + st.s() * J.values);
  return out;
}

namespace detail {

/// Fixed-point iteration with sub-relaxation shared by the GG and Gaussian
/// solvers: J^{n+1} = beta J^n + (1-beta) (c'(J^n) + alpha f^n) / (alpha s^n),
/// Jacobi-style (the previous iterate is read-only within an update).
template <typename Scalar, typename DataDeriv, typename EnergyFn>
DenoiseResult<Scalar> fixed_point_denoise(const Image<Scalar>& in, const SolverConfig& cfg,
                                          DataDeriv&& data_deriv, EnergyFn&& energy) {
  cfg.validate();
  if (!in.values.isFinite().all())
    throw std::invalid_argument("denoise: input image must be finite-valued");

  using Plane = typename Image<Scalar>::Plane;
  const Eigen::Index h = in.height(), w = in.width();
  const Scalar alpha = Scalar(cfg.alpha), beta = Scalar(cfg.beta);
  const Scalar eps = Scalar(cfg.grad_eps);

  DenoiseResult<Scalar> res;
  res.image = in;
  Plane& J = res.image.values;
  Plane Jn(h, w), num(h, w), den(h, w);
  TvStencil<Scalar> st;
  st.resize(h, w, in.dx, in.dy);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    st.compute(J, eps);
    data_deriv(J, num);                 // c'(J^n)
    num += alpha * st.f();              // + alpha f^n
    den = alpha * st.s();
    Jn = beta * J + (Scalar(1) - beta) * num / den;
    const Scalar step = (Jn - J).abs().maxCoeff();
    J.swap(Jn);
    res.iterations = it;
    res.final_step_inf_norm = step;
    if (!(J.abs().maxCoeff() <= Scalar(kDivergenceGuard))) {
      res.converged = false;
      break;
    }
    if (cfg.trace_every > 0 && it % cfg.trace_every == 0)
      res.energy_trace.push_back(energy(res.image));
    if (step < Scalar(cfg.tol)) {
      res.converged = true;
      break;
    }
  }
  res.final_energy = energy(res.image);
  return res;
}

}  // namespace detail

/// MLD denoiser for log-compressed GG speckle (the fixed-point scheme of
/// Section 2.3, initialized at J^0 = I).
template <typename Scalar>
DenoiseResult<Scalar> denoise_mld_gg(const Image<Scalar>& I, const GGParams& p,
                                     const SolverConfig& cfg) {
  p.validate();
  const Scalar g = Scalar(p.gamma);
  const Scalar gn = Scalar(p.gamma * p.nu);
  const Scalar c = Scalar(p.gamma * std::pow(p.delta, -p.gamma));
  return detail::fixed_point_denoise(
      I, cfg,
      [&](const auto& J, auto& out) {
        out = gn - c * (g * (I.values - J)).min(Scalar(kExpClamp)).exp();
      },
      [&](const Image<Scalar>& J) {
        return mld_energy(I, J, p, Scalar(cfg.alpha), Scalar(cfg.grad_eps));
      });
}

/// Gaussian-MLD denoiser (Eq. 20); mu = 0 is the ROF model with the TV-L1
/// regularizer of Appendix B.
template <typename Scalar>
DenoiseResult<Scalar> denoise_mld_gaussian(const Image<Scalar>& I, const GaussianParams& p,
                                           const SolverConfig& cfg) {
  p.validate();
  const Scalar mu = Scalar(p.mu);
  return detail::fixed_point_denoise(
      I, cfg,
      [&](const auto& J, auto& out) { out = Scalar(-2) * (I.values - J - mu); },
      [&](const Image<Scalar>& J) {
        return gaussian_mld_energy(I, J, p, Scalar(cfg.alpha), Scalar(cfg.grad_eps));
      });
}

/// TV-L1 denoiser (Eq. 1) by the first-order primal-dual scheme: dual ascent
/// with projection onto the per-pixel unit Euclidean ball, primal soft
/// shrinkage toward I with threshold tau/alpha, over-relaxation theta = 1.
/// Step sizes sit at the stability bound tau = sigma = 1/||grad||.
template <typename Scalar>
DenoiseResult<Scalar> denoise_tvl1(const Image<Scalar>& I, const SolverConfig& cfg) {
  cfg.validate();
  if (!I.values.isFinite().all())
    throw std::invalid_argument("denoise_tvl1: input image must be finite-valued");

  using Plane = typename Image<Scalar>::Plane;
  const Eigen::Index h = I.height(), w = I.width();
  const Scalar dx = I.dx, dy = I.dy;
  const Scalar opnorm = std::sqrt(Scalar(4) / (dx * dx) + Scalar(4) / (dy * dy));
  const Scalar tau = Scalar(1) / opnorm, sigma = Scalar(1) / opnorm;
  const Scalar shrink = tau / Scalar(cfg.alpha);

  DenoiseResult<Scalar> res;
  res.image = I;
  Plane& J = res.image.values;
  Plane Jbar = J, Jn(h, w);
  Plane px = Plane::Zero(h, w), py = Plane::Zero(h, w);
  Plane gx = Plane::Zero(h, w), gy = Plane::Zero(h, w);
  Plane div(h, w), v(h, w), norm(h, w);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // dual ascent + projection
    gx.leftCols(w - 1) = (Jbar.rightCols(w - 1) - Jbar.leftCols(w - 1)) / dx;
    gy.topRows(h - 1) = (Jbar.bottomRows(h - 1) - Jbar.topRows(h - 1)) / dy;
    px += sigma * gx;
    py += sigma * gy;
    norm = (px.square() + py.square()).sqrt().max(Scalar(1));
    px /= norm;
    py /= norm;
    // primal: L1 proximal map (soft shrinkage toward I)
    div = px / dx;
    div.rightCols(w - 1) -= px.leftCols(w - 1) / dx;
    div += py / dy;
    div.bottomRows(h - 1) -= py.topRows(h - 1) / dy;
    v = J + tau * div - I.values;
    Jn = I.values + v.sign() * (v.abs() - shrink).max(Scalar(0));
    const Scalar step = (Jn - J).abs().maxCoeff();
    Jbar = Scalar(2) * Jn - J;
    J.swap(Jn);
    res.iterations = it;
    res.final_step_inf_norm = step;
    if (!(J.abs().maxCoeff() <= Scalar(kDivergenceGuard))) {
      res.converged = false;
      break;
    }
    if (cfg.trace_every > 0 && it % cfg.trace_every == 0)
      res.energy_trace.push_back(tvl1_energy(I, res.image, Scalar(cfg.alpha)));
    if (step < Scalar(cfg.tol)) {
      res.converged = true;
      break;
    }
  }
  res.final_energy = tvl1_energy(I, res.image, Scalar(cfg.alpha));
  return res;
}

/// Second directional difference [F(J+tau eta) - 2F(J) + F(J-tau eta)]/tau^2
/// of the discrete smoothed MLD energy at tau = 1e-4 (the Appendix A
/// positivity probe).
template <typename Scalar>
Scalar second_variation_check(const Image<Scalar>& I, const Image<Scalar>& J,
                              const Image<Scalar>& eta, const GGParams& p, Scalar alpha,
                              Scalar grad_eps = Scalar(1e-8)) {
  require_same_shape(I, J, "second_variation_check");
  require_same_shape(I, eta, "second_variation_check");
  if ((eta.values == Scalar(0)).all())
    throw std::invalid_argument("second_variation_check: eta must not be identically zero");
  const Scalar tau = Scalar(1e-4);
  Image<Scalar> Jp = J, Jm = J;
  Jp.values += tau * eta.values;
  Jm.values -= tau * eta.values;
  const Scalar fp = mld_energy(I, Jp, p, alpha, grad_eps);
  const Scalar f0 = mld_energy(I, J, p, alpha, grad_eps);
  const Scalar fm = mld_energy(I, Jm, p, alpha, grad_eps);
  return (fp - Scalar(2) * f0 + fm) / (tau * tau);
}

}  // namespace mldtv
