#pragma once

// Test-only numerical oracles, kept independent of the library code paths
// they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

namespace detail {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int depth = 48) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Splits [a, b] at interior breakpoints so narrow features are not missed.
inline double piecewise_simpson(const std::function<double(double)>& f,
                                const std::vector<double>& knots, double tol = 1e-10) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    total += adaptive_simpson(f, knots[i], knots[i + 1], tol);
  return total;
}

/// Golden-section maximizer on [a, b]. Pure golden section bottoms out at
/// the sqrt(machine eps) noise floor (~1.5e-8 in x), so the bracket result
/// is polished with one parabolic vertex fit at a step where the function
/// differences still dominate rounding.
inline double golden_section_max(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-6) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b), h = 1e-4 * std::max(1.0, std::abs(x));
  const double fm = f(x - h), f0 = f(x), fp = f(x + h);
  const double denom = fm - 2.0 * f0 + fp;
  if (denom < 0.0) return x + 0.5 * h * (fm - fp) / denom;
  return x;
}

/// Cumulative trapezoid CDF table of a density on a dense grid plus linear
/// interpolation; KS statistic of a sorted sample against it.
class QuadratureCdf {
 public:
  QuadratureCdf(const std::function<double(double)>& pdf, double lo, double hi, int n = 32769)
      : lo_(lo), hi_(hi), cdf_(n) {
    const double h = (hi - lo) / (n - 1);
    double acc = 0.0;
    double prev = pdf(lo);
    cdf_[0] = 0.0;
    for (int i = 1; i < n; ++i) {
      const double cur = pdf(lo + i * h);
      acc += 0.5 * (prev + cur) * h;
      cdf_[i] = acc;
      prev = cur;
    }
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return cdf_.back();
    const double pos = (x - lo_) / (hi_ - lo_) * (cdf_.size() - 1);
    const std::size_t i = std::size_t(pos);
    const double fr = pos - double(i);
    return cdf_[i] * (1.0 - fr) + cdf_[std::min(i + 1, cdf_.size() - 1)] * fr;
  }

 private:
  double lo_, hi_;
  std::vector<double> cdf_;
};

inline double ks_statistic(std::vector<double> sample, const QuadratureCdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max(d, std::abs(F - double(i) / n));
    d = std::max(d, std::abs(F - double(i + 1) / n));
  }
  return d;
}

/// Pearson chi-square statistic against equiprobable bins given by edges
/// (edges.size() + 1 bins over (-inf, inf)).
inline double chi_square_equiprobable(const std::vector<double>& sample,
                                      const std::vector<double>& edges) {
  const std::size_t k = edges.size() + 1;
  std::vector<double> counts(k, 0.0);
  for (double x : sample) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    counts[std::size_t(it - edges.begin())] += 1.0;
  }
  const double expected = double(sample.size()) / double(k);
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

}  // namespace oracles
