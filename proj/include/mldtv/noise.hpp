#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mldtv/image.hpp"
#include "mldtv/rng.hpp"

namespace mldtv {

/// Generalized gamma triple (gamma, nu, delta), all positive.
struct GGParams {
  double gamma = 1.0;
  double nu = 1.0;
  double delta = 1.0;

  void validate() const {
    if (!(gamma > 0.0) || !(nu > 0.0) || !(delta > 0.0))
      throw std::invalid_argument("GGParams: gamma, nu, delta must be positive");
  }
};

struct GaussianParams {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("GaussianParams: sigma must be positive");
  }
};

/// Largest exponent fed to exp() in the data terms; fixed-point iterates can
/// transiently overshoot and the clamp turns overflow into a finite penalty.
inline constexpr double kExpClamp = 700.0;

/// Generalized gamma density gamma/(delta^(gamma nu) Gamma(nu)) *
/// eps^(gamma nu - 1) * exp(-(eps/delta)^gamma), eps > 0.
inline double gg_pdf(double eps, const GGParams& p) {
  p.validate();
  if (!(eps > 0.0)) throw std::domain_error("gg_pdf: eps must be positive");
  const double log_pdf = std::log(p.gamma) - p.gamma * p.nu * std::log(p.delta) -
                         std::lgamma(p.nu) + (p.gamma * p.nu - 1.0) * std::log(eps) -
                         std::pow(eps / p.delta, p.gamma);
  return std::exp(log_pdf);
}

/// Density of the log-compressed generalized gamma variable
/// (gamma/Gamma(nu)) exp(gamma nu (t - ln delta) - e^{gamma (t - ln delta)}),
/// defined on all of R; underflow returns 0.
inline double log_gg_pdf(double eps_tilde, const GGParams& p) {
  p.validate();
  const double z = p.gamma * (eps_tilde - std::log(p.delta));
  if (z > kExpClamp) return 0.0;
  return std::exp(std::log(p.gamma) - std::lgamma(p.nu) + p.nu * z - std::exp(z));
}

namespace detail {

/// Regularized lower incomplete gamma P(a, x): series for x < a+1, Lentz
/// continued fraction otherwise (Numerical Recipes gammp).
inline double reg_lower_gamma(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("reg_lower_gamma: bad arguments");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

/// CDF of the generalized gamma: P(nu, (eps/delta)^gamma).
inline double gg_cdf(double eps, const GGParams& p) {
  p.validate();
  if (eps <= 0.0) return 0.0;
  return detail::reg_lower_gamma(p.nu, std::pow(eps / p.delta, p.gamma));
}

/// CDF of the log-compressed variable: P(nu, e^{gamma(t - ln delta)}).
/// Deep in the lower tail e^z underflows, so the leading series term
/// P(a, w) ~ w^a / Gamma(a+1) is evaluated in log space instead.
inline double log_gg_cdf(double eps_tilde, const GGParams& p) {
  p.validate();
  const double z = p.gamma * (eps_tilde - std::log(p.delta));
  if (z > kExpClamp) return 1.0;
  if (z < -30.0)
    return std::exp(p.nu * z - std::lgamma(p.nu + 1.0)) * (1.0 - p.nu * std::exp(z) / (p.nu + 1.0));
  return detail::reg_lower_gamma(p.nu, std::exp(z));
}

/// n i.i.d. generalized gamma variates: eps = delta * W^(1/gamma) with
/// W ~ Gamma(nu, 1), one splitmix64 stream per index (order-independent).
inline Eigen::ArrayXd sample_gg(const GGParams& p, Eigen::Index n, Seed seed) {
  p.validate();
  if (n < 1) throw std::invalid_argument("sample_gg: n must be >= 1");
  Eigen::ArrayXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    SplitMix64 rng = stream_rng(seed, std::uint64_t(i));
    out[i] = p.delta * std::exp(sample_log_gamma(rng, p.nu) / p.gamma);
  }
  return out;
}

/// Pixel-wise product of v with i.i.d. GG speckle; stream index = y*width+x,
/// so any pixel partition reproduces the same field.
template <typename Scalar>
Image<Scalar> apply_speckle(const Image<Scalar>& v, const GGParams& p, Seed seed) {
  p.validate();
  if ((v.values < Scalar(0)).any())
    throw std::invalid_argument("apply_speckle: input pixels must be nonnegative");
  Image<Scalar> out = v;
  const Eigen::Index h = v.height(), w = v.width();
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      SplitMix64 rng = stream_rng(seed, std::uint64_t(y) * std::uint64_t(w) + std::uint64_t(x));
      const double eps = p.delta * std::exp(sample_log_gamma(rng, p.nu) / p.gamma);
      out(y, x) = v(y, x) * Scalar(eps);
    }
  }
  return out;
}

/// Pixel-wise ln(max(u, floor)); speckle samples can be arbitrarily small,
/// hence the explicit positive floor.
template <typename Scalar>
Image<Scalar> log_compress(const Image<Scalar>& u, Scalar floor = Scalar(1e-6)) {
  if (!(floor > Scalar(0))) throw std::domain_error("log_compress: floor must be positive");
  Image<Scalar> out = u;
  out.values = u.values.max(floor).log();
  return out;
}

/// MLE data term for log-compressed GG noise, Eq.-(7) form with the constant
/// dropped: sum of gamma nu (I-J) - delta^-gamma e^{gamma (I-J)}.
template <typename Scalar>
Scalar mld_data_term_gg(const Image<Scalar>& I, const Image<Scalar>& J, const GGParams& p) {
  p.validate();
  require_same_shape(I, J, "mld_data_term_gg");
  const Scalar g = Scalar(p.gamma), nu = Scalar(p.nu);
  const Scalar inv_dg = Scalar(std::pow(p.delta, -p.gamma));
  const auto diff = I.values - J.values;
  return (g * nu * diff - inv_dg * (g * diff).min(Scalar(kExpClamp)).exp()).sum();
}

/// MLE data term for additive Gaussian noise: -sum (I-J-mu)^2 (Appendix-B
/// form with constants dropped).
template <typename Scalar>
Scalar mld_data_term_gaussian(const Image<Scalar>& I, const Image<Scalar>& J,
                              const GaussianParams& p) {
  p.validate();
  require_same_shape(I, J, "mld_data_term_gaussian");
  return -(I.values - J.values - Scalar(p.mu)).square().sum();
}

}  // namespace mldtv
