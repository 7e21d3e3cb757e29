#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mldtv {

/// Dense 2D grayscale field with grid spacing. Row-major storage,
/// top-left origin: values(y, x), y in [0, height), x in [0, width).
template <typename Scalar>
struct Image {
  using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Plane values;
  Scalar dx = Scalar(1);
  Scalar dy = Scalar(1);

  Image() = default;

  Image(Eigen::Index height, Eigen::Index width, Scalar fill = Scalar(0),
        Scalar dx_ = Scalar(1), Scalar dy_ = Scalar(1))
      : values(Plane::Constant(height, width, fill)), dx(dx_), dy(dy_) {
    check_spacing();
  }

  explicit Image(Plane v, Scalar dx_ = Scalar(1), Scalar dy_ = Scalar(1))
      : values(std::move(v)), dx(dx_), dy(dy_) {
    check_spacing();
  }

  Eigen::Index width() const { return values.cols(); }
  Eigen::Index height() const { return values.rows(); }
  Eigen::Index size() const { return values.size(); }

  Scalar& operator()(Eigen::Index y, Eigen::Index x) { return values(y, x); }
  Scalar operator()(Eigen::Index y, Eigen::Index x) const { return values(y, x); }

  bool same_shape(const Image& other) const {
    return width() == other.width() && height() == other.height();
  }

 private:
  void check_spacing() const {
    if (!(dx > Scalar(0)) || !(dy > Scalar(0)))
      throw std::invalid_argument("Image: grid spacing must be positive");
  }
};

using ImageXd = Image<double>;
using ImageXf = Image<float>;

template <typename Scalar>
void require_same_shape(const Image<Scalar>& a, const Image<Scalar>& b, const char* who) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(who) + ": image dimensions do not match");
}

/// Affine map of the intensities onto [0,1]; constant images map to zeros.
template <typename Scalar>
Image<Scalar> normalize(const Image<Scalar>& img) {
  if (img.size() == 0) throw std::invalid_argument("normalize: empty image");
  const Scalar lo = img.values.minCoeff();
  const Scalar hi = img.values.maxCoeff();
  Image<Scalar> out = img;
  if (hi > lo)
    out.values = (img.values - lo) / (hi - lo);
  else
    out.values.setZero();
  return out;
}

/// One ghost layer of edge replication (the discrete Neumann boundary).
template <typename Scalar>
typename Image<Scalar>::Plane replicate_pad(const Image<Scalar>& img) {
  const Eigen::Index h = img.height(), w = img.width();
  typename Image<Scalar>::Plane p(h + 2, w + 2);
  p.block(1, 1, h, w) = img.values;
  p.row(0) = p.row(1);
  p.row(h + 1) = p.row(h);
  p.col(0) = p.col(1);
  p.col(w + 1) = p.col(w);
  return p;
}

/// 5-point Laplacian (J_{x+1,y}+J_{x-1,y}+J_{x,y+1}+J_{x,y-1}-4J_{x,y})/dx^2,
/// boundary by edge replication. Assumes dx == dy.
template <typename Scalar>
Image<Scalar> laplacian(const Image<Scalar>& img) {
  const Eigen::Index h = img.height(), w = img.width();
  if (h < 3 || w < 3) throw std::invalid_argument("laplacian: image must be at least 3x3");
  const auto p = replicate_pad(img);
  Image<Scalar> out(h, w, Scalar(0), img.dx, img.dy);
  out.values = (p.block(1, 2, h, w) + p.block(1, 0, h, w) + p.block(2, 1, h, w) +
                p.block(0, 1, h, w) - Scalar(4) * p.block(1, 1, h, w)) /
               (img.dx * img.dx);
  return out;
}

/// Gradient estimates at the pixel edges. gxp_* live on the (x+1/2, y) edges
/// (height x (width-1)), gyp_* on the (x, y+1/2) edges ((height-1) x width).
template <typename Scalar>
struct HalfPixelGradients {
  using Plane = typename Image<Scalar>::Plane;
  Plane gxp_x, gxp_y;
  Plane gyp_x, gyp_y;
};

template <typename Scalar>
HalfPixelGradients<Scalar> half_pixel_gradients(const Image<Scalar>& img) {
  const Eigen::Index h = img.height(), w = img.width();
  if (h < 3 || w < 3)
    throw std::invalid_argument("half_pixel_gradients: image must be at least 3x3");
  const auto p = replicate_pad(img);
  HalfPixelGradients<Scalar> g;
  // G_{x+1/2,y} = ((J_{x+1,y}-J_{x,y})/dx,
  //               (J_{x+1,y+1}+J_{x,y+1}-J_{x+1,y-1}-J_{x,y-1})/(4 dy))
  g.gxp_x = (p.block(1, 2, h, w - 1) - p.block(1, 1, h, w - 1)) / img.dx;
  g.gxp_y = (p.block(2, 2, h, w - 1) + p.block(2, 1, h, w - 1) -
             p.block(0, 2, h, w - 1) - p.block(0, 1, h, w - 1)) /
            (Scalar(4) * img.dy);
  // G_{x,y+1/2} = ((J_{x+1,y+1}+J_{x+1,y}-J_{x-1,y+1}-J_{x-1,y})/(4 dx),
  //               (J_{x,y+1}-J_{x,y})/dy)
  g.gyp_x = (p.block(2, 2, h - 1, w) + p.block(1, 2, h - 1, w) -
             p.block(2, 0, h - 1, w) - p.block(1, 0, h - 1, w)) /
            (Scalar(4) * img.dx);
  g.gyp_y = (p.block(2, 1, h - 1, w) - p.block(1, 1, h - 1, w)) / img.dy;
  return g;
}

namespace detail {

template <typename Scalar>
Scalar sample_clamped(const typename Image<Scalar>::Plane& v, Scalar r, Scalar c) {
  const Scalar rr = std::clamp(r, Scalar(0), Scalar(v.rows() - 1));
  const Scalar cc = std::clamp(c, Scalar(0), Scalar(v.cols() - 1));
  const Eigen::Index r0 = static_cast<Eigen::Index>(std::floor(rr));
  const Eigen::Index c0 = static_cast<Eigen::Index>(std::floor(cc));
  const Eigen::Index r1 = std::min<Eigen::Index>(r0 + 1, v.rows() - 1);
  const Eigen::Index c1 = std::min<Eigen::Index>(c0 + 1, v.cols() - 1);
  const Scalar fr = rr - Scalar(r0), fc = cc - Scalar(c0);
  return (Scalar(1) - fr) * ((Scalar(1) - fc) * v(r0, c0) + fc * v(r0, c1)) +
         fr * ((Scalar(1) - fc) * v(r1, c0) + fc * v(r1, c1));
}

}  // namespace detail

/// Inverse-mapped scan conversion of a polar image (rows = angle, columns =
/// radius) onto a cartesian grid. Pixels outside the disk of radius
/// radial_extent around (center_x, center_y) are set to 0. Bilinear
/// interpolation, periodic across the angle seam.
template <typename Scalar>
Image<Scalar> polar_to_cartesian(const Image<Scalar>& polar, Scalar center_x, Scalar center_y,
                                 Scalar radial_extent, Eigen::Index out_height = 0,
                                 Eigen::Index out_width = 0) {
  if (!(radial_extent > Scalar(0)))
    throw std::invalid_argument("polar_to_cartesian: radial_extent must be positive");
  if (out_height <= 0) out_height = static_cast<Eigen::Index>(std::lround(2 * radial_extent));
  if (out_width <= 0) out_width = out_height;
  const Eigen::Index na = polar.height(), nr = polar.width();
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  Image<Scalar> out(out_height, out_width, Scalar(0), polar.dx, polar.dy);
  for (Eigen::Index y = 0; y < out_height; ++y) {
    for (Eigen::Index x = 0; x < out_width; ++x) {
      const Scalar ox = Scalar(x) - center_x;
      const Scalar oy = Scalar(y) - center_y;
      const Scalar r = std::hypot(ox, oy);
      if (r > radial_extent) continue;
      Scalar th = std::atan2(oy, ox);
      if (th < Scalar(0)) th += two_pi;
      // fractional angle row with wraparound; radius column clamped at ends
      Scalar u = th / two_pi * Scalar(na);
      const Scalar v = r / radial_extent * Scalar(nr) - Scalar(0.5);
      const Eigen::Index u0 = static_cast<Eigen::Index>(std::floor(u)) % na;
      const Eigen::Index u1 = (u0 + 1) % na;
      const Scalar fu = u - std::floor(u);
      const Scalar vv = std::clamp(v, Scalar(0), Scalar(nr - 1));
      const Eigen::Index v0 = static_cast<Eigen::Index>(std::floor(vv));
      const Eigen::Index v1 = std::min<Eigen::Index>(v0 + 1, nr - 1);
      const Scalar fv = vv - Scalar(v0);
      out(y, x) = (Scalar(1) - fu) * ((Scalar(1) - fv) * polar(u0, v0) + fv * polar(u0, v1)) +
                  fu * ((Scalar(1) - fv) * polar(u1, v0) + fv * polar(u1, v1));
    }
  }
  return out;
}

/// Resample a cartesian image onto a polar grid (rows = angle at 2*pi*i/n_angles,
/// columns = radius at (j+1/2)/n_radii * radial_extent).
template <typename Scalar>
Image<Scalar> cartesian_to_polar(const Image<Scalar>& cart, Scalar center_x, Scalar center_y,
                                 Scalar radial_extent, Eigen::Index n_angles,
                                 Eigen::Index n_radii) {
  if (!(radial_extent > Scalar(0)))
    throw std::invalid_argument("cartesian_to_polar: radial_extent must be positive");
  if (n_angles <= 0 || n_radii <= 0)
    throw std::invalid_argument("cartesian_to_polar: empty polar grid");
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  Image<Scalar> out(n_angles, n_radii, Scalar(0), cart.dx, cart.dy);
  for (Eigen::Index i = 0; i < n_angles; ++i) {
    const Scalar th = two_pi * Scalar(i) / Scalar(n_angles);
    const Scalar ct = std::cos(th), st = std::sin(th);
    for (Eigen::Index j = 0; j < n_radii; ++j) {
      const Scalar r = (Scalar(j) + Scalar(0.5)) / Scalar(n_radii) * radial_extent;
      out(i, j) = detail::sample_clamped<Scalar>(cart.values, center_y + r * st, center_x + r * ct);
    }
  }
  return out;
}

}  // namespace mldtv
