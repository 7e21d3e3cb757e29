#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mldtv/metrics.hpp"
#include "test_support.hpp"

using namespace mldtv;
using test_support::random_image;

namespace {

double naive_eps_b(const ImageXd& ref, const ImageXd& J) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index y = 0; y < ref.height(); ++y)
    for (Eigen::Index x = 0; x < ref.width(); ++x) {
      const double d = ref(y, x) - J(y, x);
      num += d * d;
      den += ref(y, x) * ref(y, x);
    }
  return std::sqrt(num / den);
}

double naive_eps_d(const ImageXd& ref, const ImageXd& J) {
  const double n = double(ref.size());
  double mu = 0.0;
  for (Eigen::Index y = 0; y < ref.height(); ++y)
    for (Eigen::Index x = 0; x < ref.width(); ++x) mu += ref(y, x) - J(y, x);
  mu /= n;
  double acc = 0.0;
  for (Eigen::Index y = 0; y < ref.height(); ++y)
    for (Eigen::Index x = 0; x < ref.width(); ++x) {
      const double d = ref(y, x) - J(y, x) - mu;
      acc += d * d;
    }
  return std::sqrt(acc / n);
}

double naive_eps_e(const ImageXd& ref, const ImageXd& J) {
  const auto lr = laplacian(ref), lj = laplacian(J);
  double num = 0.0, nr = 0.0, nj = 0.0;
  for (Eigen::Index y = 0; y < ref.height(); ++y)
    for (Eigen::Index x = 0; x < ref.width(); ++x) {
      num += lr(y, x) * lj(y, x);
      nr += lr(y, x) * lr(y, x);
      nj += lj(y, x) * lj(y, x);
    }
  return num / (std::sqrt(nr) * std::sqrt(nj));
}

// quadruple-loop DFT low pass plus textbook Pearson
double naive_pearson_lowpass(const ImageXd& I, const ImageXd& J) {
  const Eigen::Index h = I.height(), w = I.width();
  using cd = std::complex<double>;
  std::vector<cd> spec(std::size_t(h * w));
  for (Eigen::Index u = 0; u < h; ++u)
    for (Eigen::Index v = 0; v < w; ++v) {
      cd acc = 0.0;
      for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
          acc += I(y, x) * std::exp(cd(0.0, -2.0 * EIGEN_PI * (double(u * y) / h + double(v * x) / w)));
      const double ku = (u <= h / 2) ? double(u) : double(u) - double(h);
      const double kv = (v <= w / 2) ? double(v) : double(v) - double(w);
      spec[std::size_t(u * w + v)] = (std::abs(ku) > h / 4.0 || std::abs(kv) > w / 4.0) ? cd(0) : acc;
    }
  ImageXd low(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      cd acc = 0.0;
      for (Eigen::Index u = 0; u < h; ++u)
        for (Eigen::Index v = 0; v < w; ++v)
          acc += spec[std::size_t(u * w + v)] *
                 std::exp(cd(0.0, 2.0 * EIGEN_PI * (double(u * y) / h + double(v * x) / w)));
      low(y, x) = acc.real() / double(h * w);
    }
  const double ml = low.values.mean(), mj = J.values.mean();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      sxy += (low(y, x) - ml) * (J(y, x) - mj);
      sxx += (low(y, x) - ml) * (low(y, x) - ml);
      syy += (J(y, x) - mj) * (J(y, x) - mj);
    }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("eps_b basics") {
  const auto ref = random_image(6, 6, 1, 0.1, 1.0);
  CHECK(eps_b(ref, ref) == 0.0);

  ImageXd twice = ref;
  twice.values *= 2.0;
  CHECK(eps_b(ref, twice) == doctest::Approx(1.0).epsilon(1e-14));

  ImageXd r22(2, 2, 1.0), j22(2, 2, 1.0);
  j22(1, 1) = 0.0;
  CHECK(eps_b(r22, j22) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(eps_b(ImageXd(2, 2, 0.0), j22), std::invalid_argument);
  CHECK_THROWS_AS(eps_b(ref, ImageXd(3, 3)), std::invalid_argument);
}

TEST_CASE("eps_b is linear in the interpolation parameter") {
  const auto ref = random_image(8, 8, 2, 0.1, 1.0);
  const auto J = random_image(8, 8, 3);
  const double base = eps_b(ref, J);
  for (double t : {0.25, 0.5, 2.0}) {
    ImageXd interp = ref;
    interp.values = ref.values + t * (J.values - ref.values);
    CHECK(eps_b(ref, interp) == doctest::Approx(t * base).epsilon(1e-12));
  }
}

TEST_CASE("eps_d basics and shift invariance") {
  const auto ref = random_image(7, 5, 4);
  CHECK(eps_d(ref, ref) == 0.0);

  ImageXd shifted = ref;
  shifted.values += 0.37;
  CHECK(eps_d(ref, shifted) == doctest::Approx(0.0).epsilon(1e-12));

  ImageXd r(1, 2), j(1, 2, 0.0);
  r(0, 0) = 1.0;
  r(0, 1) = -1.0;
  CHECK(eps_d(r, j) == doctest::Approx(1.0).epsilon(1e-15));

  const auto J = random_image(7, 5, 5);
  ImageXd J2 = J;
  J2.values += 1.234;
  CHECK(eps_d(ref, J) == doctest::Approx(eps_d(ref, J2)).epsilon(1e-12));
}

TEST_CASE("eps_e: correlation form and the literal printed form") {
  const auto ref = random_image(6, 6, 6);
  CHECK(eps_e(ref, ref) == doctest::Approx(1.0).epsilon(1e-12));

  ImageXd neg = ref;
  neg.values = -ref.values;
  CHECK(eps_e(ref, neg) == doctest::Approx(-1.0).epsilon(1e-12));

  // 3x3 spike: the printed squared-numerator form is sum L^4 / sum L^2 != 1
  ImageXd spike(3, 3, 0.0);
  spike(1, 1) = 1.0;
  const auto l = laplacian(spike).values;
  const double expect_literal = l.square().square().sum() / l.square().sum();
  CHECK(eps_e(spike, spike, true) == doctest::Approx(expect_literal).epsilon(1e-12));
  CHECK(eps_e(spike, spike, true) != doctest::Approx(1.0));
  CHECK(eps_e(spike, spike, false) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(eps_e(ImageXd(4, 4, 0.5), ref.same_shape(ref) ? ImageXd(4, 4, 0.2) : ref),
                  std::invalid_argument);  // flat images have zero Laplacian
}

TEST_CASE("eps_e is invariant to positive scaling and bounded") {
  const auto ref = random_image(8, 8, 7);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto J = random_image(8, 8, 50 + s);
    const double e = eps_e(ref, J);
    CHECK(e <= 1.0 + 1e-12);
    CHECK(e >= -1.0 - 1e-12);
    ImageXd scaled = J;
    scaled.values *= 3.7;
    CHECK(eps_e(ref, scaled) == doctest::Approx(e).epsilon(1e-12));
    ImageXd ref_scaled = ref;
    ref_scaled.values *= 0.21;
    CHECK(eps_e(ref_scaled, J) == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("pearson_lowpass is exactly one for a band-limited image") {
  const Eigen::Index n = 32;
  ImageXd I(n, n);
  for (Eigen::Index y = 0; y < n; ++y)
    for (Eigen::Index x = 0; x < n; ++x)
      I(y, x) = 0.5 + 0.3 * std::cos(2.0 * EIGEN_PI * 3.0 * x / n) *
                          std::cos(2.0 * EIGEN_PI * 2.0 * y / n) +
                0.1 * std::sin(2.0 * EIGEN_PI * 5.0 * x / n);
  CHECK(pearson_lowpass(I, I) == doctest::Approx(1.0).epsilon(1e-10));

  ImageXd J = lowpass_half_band(I);
  J.values += 0.7;
  CHECK(pearson_lowpass(I, J) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("pearson_lowpass is invariant to positive affine maps of J") {
  const auto I = random_image(12, 12, 8);
  const auto J = random_image(12, 12, 9);
  const double base = pearson_lowpass(I, J);
  ImageXd mapped = J;
  mapped.values = 2.5 * J.values + 0.3;
  CHECK(pearson_lowpass(I, mapped) == doctest::Approx(base).epsilon(1e-12));
  CHECK_THROWS_AS(pearson_lowpass(I, ImageXd(12, 12, 0.4)), std::invalid_argument);
}

TEST_CASE("all four metrics match the double-loop oracles") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto ref = random_image(8, 8, 100 + s, 0.1, 1.0);
    const auto J = random_image(8, 8, 200 + s);
    CHECK(eps_b(ref, J) == doctest::Approx(naive_eps_b(ref, J)).epsilon(1e-10));
    CHECK(eps_d(ref, J) == doctest::Approx(naive_eps_d(ref, J)).epsilon(1e-10));
    CHECK(eps_e(ref, J) == doctest::Approx(naive_eps_e(ref, J)).epsilon(1e-10));
    CHECK(pearson_lowpass(ref, J) ==
          doctest::Approx(naive_pearson_lowpass(ref, J)).epsilon(1e-10));
  }
}

TEST_CASE("metrics CSV row formatting") {
  MetricsReport r;
  r.eps_b = 0.04;
  r.eps_d = 0.0266;
  r.eps_e = 0.51;
  CHECK(metrics_csv_row("frame0", r) == "frame0,0.04,0.0266,0.51,");
  r.pearson_lowpass = 0.946;
  r.has_pearson = true;
  CHECK(metrics_csv_row("frame0", r) == "frame0,0.04,0.0266,0.51,0.946");
  CHECK(std::string(kMetricsCsvHeader) == "frame_id,eps_b,eps_d,eps_e,pearson_lowpass");
}
