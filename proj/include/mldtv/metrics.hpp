#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "mldtv/image.hpp"

namespace mldtv {

struct MetricsReport {
  double eps_b = 0.0;
  double eps_d = 0.0;
  double eps_e = 0.0;
  double pearson_lowpass = 0.0;
  bool has_pearson = false;
};

/// Mean intensity bias (Eq. 13): sqrt(sum (ref-J)^2 / sum ref^2).
template <typename Scalar>
Scalar eps_b(const Image<Scalar>& ref, const Image<Scalar>& J) {
  require_same_shape(ref, J, "eps_b");
  const Scalar den = ref.values.square().sum();
  if (!(den > Scalar(0))) throw std::invalid_argument("eps_b: reference is identically zero");
  return std::sqrt((ref.values - J.values).square().sum() / den);
}

/// A posteriori noise dispersion (Eq. 14): population standard deviation of
/// ref - J with the bias mu_D removed.
template <typename Scalar>
Scalar eps_d(const Image<Scalar>& ref, const Image<Scalar>& J) {
  require_same_shape(ref, J, "eps_d");
  const auto diff = (ref.values - J.values).eval();
  const Scalar mu = diff.mean();
  return std::sqrt((diff - mu).square().sum() / Scalar(diff.size()));
}

/// Edge pattern recovery (Eq. 15). The default is the normalized Laplacian
/// correlation sum(L_ref L_J) / (||L_ref|| ||L_J||), which meets the paper's
/// "should be close to one" target; literal=true evaluates the printed
/// formula with its squared numerator instead.
template <typename Scalar>
Scalar eps_e(const Image<Scalar>& ref, const Image<Scalar>& J, bool literal = false) {
  require_same_shape(ref, J, "eps_e");
  const auto lr = laplacian(ref).values;
  const auto lj = laplacian(J).values;
  const Scalar nr = lr.square().sum();
  const Scalar nj = lj.square().sum();
  if (!(nr > Scalar(0)) || !(nj > Scalar(0)))
    throw std::invalid_argument("eps_e: undefined for a flat image (zero Laplacian)");
  if (literal) return (lr * lj).square().sum() / (std::sqrt(nr) * std::sqrt(nj));
  return (lr * lj).sum() / (std::sqrt(nr) * std::sqrt(nj));
}

namespace detail {

template <typename Scalar>
using ComplexMatrix =
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
ComplexMatrix<Scalar> dft_matrix(Eigen::Index n, int sign) {
  ComplexMatrix<Scalar> m(n, n);
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) {
      const Scalar ph = Scalar(sign) * two_pi * Scalar((r * c) % n) / Scalar(n);
      m(r, c) = std::complex<Scalar>(std::cos(ph), std::sin(ph));
    }
  return m;
}

}  // namespace detail

/// Low-pass by zeroing the upper half of the centered DFT band: coefficients
/// with |k| > n/4 in either axis are dropped ("higher half frequencies"),
/// then the real part of the inverse transform is returned.
template <typename Scalar>
Image<Scalar> lowpass_half_band(const Image<Scalar>& img) {
  const Eigen::Index h = img.height(), w = img.width();
  using CM = detail::ComplexMatrix<Scalar>;
  const CM fr = detail::dft_matrix<Scalar>(h, -1);
  const CM fc = detail::dft_matrix<Scalar>(w, -1);
  CM spec = fr * img.values.matrix().template cast<std::complex<Scalar>>() * fc;
  for (Eigen::Index u = 0; u < h; ++u) {
    const double ku = (u <= h / 2) ? double(u) : double(u) - double(h);
    for (Eigen::Index v = 0; v < w; ++v) {
      const double kv = (v <= w / 2) ? double(v) : double(v) - double(w);
      if (std::abs(ku) > h / 4.0 || std::abs(kv) > w / 4.0) spec(u, v) = std::complex<Scalar>(0);
    }
  }
  const CM br = detail::dft_matrix<Scalar>(h, +1);
  const CM bc = detail::dft_matrix<Scalar>(w, +1);
  Image<Scalar> out(h, w, Scalar(0), img.dx, img.dy);
  out.values = (br * spec * bc).real().array() / Scalar(h * w);
  return out;
}

/// Pearson correlation coefficient over all pixels.
template <typename Scalar>
Scalar pearson(const Image<Scalar>& a, const Image<Scalar>& b) {
  require_same_shape(a, b, "pearson");
  if (a.values.minCoeff() == a.values.maxCoeff() || b.values.minCoeff() == b.values.maxCoeff())
    throw std::invalid_argument("pearson: undefined for a constant image");
  const Scalar ma = a.values.mean(), mb = b.values.mean();
  const auto da = (a.values - ma).eval();
  const auto db = (b.values - mb).eval();
  const Scalar va = da.square().sum(), vb = db.square().sum();
  return (da * db).sum() / std::sqrt(va * vb);
}

/// Pearson correlation between the half-band low-pass of I and J (the
/// Table 2 structural preservation measure).
template <typename Scalar>
Scalar pearson_lowpass(const Image<Scalar>& I, const Image<Scalar>& J) {
  require_same_shape(I, J, "pearson_lowpass");
  return pearson(lowpass_half_band(I), J);
}

inline MetricsReport compute_metrics(const ImageXd& ref, const ImageXd& test,
                                     const ImageXd* pearson_base = nullptr,
                                     bool literal_eps_e = false) {
  MetricsReport r;
  r.eps_b = eps_b(ref, test);
  r.eps_d = eps_d(ref, test);
  r.eps_e = eps_e(ref, test, literal_eps_e);
  if (pearson_base) {
    r.pearson_lowpass = pearson_lowpass(*pearson_base, test);
    r.has_pearson = true;
  }
  return r;
}

/// CSV row `frame_id,eps_b,eps_d,eps_e,pearson_lowpass`, 12 significant digits.
inline std::string metrics_csv_row(const std::string& frame_id, const MetricsReport& r) {
  char buf[256];
  if (r.has_pearson)
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g", frame_id.c_str(), r.eps_b,
                  r.eps_d, r.eps_e, r.pearson_lowpass);
  else
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,", frame_id.c_str(), r.eps_b, r.eps_d,
                  r.eps_e);
  return std::string(buf);
}

inline constexpr const char* kMetricsCsvHeader = "frame_id,eps_b,eps_d,eps_e,pearson_lowpass";

}  // namespace mldtv
