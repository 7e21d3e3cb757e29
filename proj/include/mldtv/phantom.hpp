#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mldtv/image.hpp"

namespace mldtv {

/// Calcium deposit as an angular arc inset in the intima; radii are
/// fractions of the half-size, angles in radians in [0, 2*pi).
struct CalciumArc {
  double theta_start = 0.0;
  double theta_end = 0.0;  // empty arc when theta_end <= theta_start
  double inner_radius = 0.0;
  double outer_radius = 0.0;
};

struct PhantomIntensities {
  double background = 0.05;
  double lumen = 0.10;
  double intima = 0.45;
  double adventitia = 0.30;
  double calcium = 0.95;
};

/// Parametric cross-section vessel phantom. All radii are fractions of the
/// half-size; the lumen center is offset by `eccentricity` along +x.
struct PhantomSpec {
  int size = 512;
  int polar_angles = 256;
  int polar_radii = 256;
  double lumen_radius = 0.25;
  double intima_outer_radius = 0.55;
  double adventitia_outer_radius = 0.95;
  CalciumArc calcium{0.52, 1.40, 0.32, 0.50};
  PhantomIntensities intensity;
  double eccentricity = 0.08;

  bool has_calcium() const { return calcium.theta_end > calcium.theta_start; }

  void validate() const {
    if (size < 3 || polar_angles < 3 || polar_radii < 3)
      throw std::invalid_argument("PhantomSpec: grid too small");
    if (!(0.0 < lumen_radius && lumen_radius < intima_outer_radius &&
          intima_outer_radius < adventitia_outer_radius && adventitia_outer_radius <= 1.0))
      throw std::invalid_argument(
          "PhantomSpec: need 0 < lumen_radius < intima_outer_radius < adventitia_outer_radius <= 1");
    const double vals[] = {intensity.background, intensity.lumen, intensity.intima,
                           intensity.adventitia, intensity.calcium};
    for (double v : vals)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("PhantomSpec: intensities must lie in [0,1]");
    if (!(intensity.calcium > intensity.intima && intensity.intima > intensity.lumen))
      throw std::invalid_argument("PhantomSpec: need calcium > intima > lumen intensity");
    if (has_calcium()) {
      if (!(calcium.inner_radius >= 0.0 && calcium.inner_radius < calcium.outer_radius &&
            calcium.outer_radius <= 1.0))
        throw std::invalid_argument("PhantomSpec: bad calcium radii");
    }
  }
};

/// The repository's canonical phantom (the in-silico geometry is not
/// published, so these constants define the reference experiment).
inline PhantomSpec default_phantom_spec() { return PhantomSpec{}; }

/// Analytic region membership at a point given in half-size units relative
/// to the image center.
inline double phantom_value_at(const PhantomSpec& spec, double xr, double yr) {
  const double r = std::hypot(xr, yr);
  if (std::hypot(xr - spec.eccentricity, yr) < spec.lumen_radius) return spec.intensity.lumen;
  if (spec.has_calcium() && r >= spec.calcium.inner_radius && r < spec.calcium.outer_radius) {
    double th = std::atan2(yr, xr);
    if (th < 0.0) th += 2.0 * EIGEN_PI;
    if (th >= spec.calcium.theta_start && th < spec.calcium.theta_end)
      return spec.intensity.calcium;
  }
  if (r < spec.intima_outer_radius) return spec.intensity.intima;
  if (r < spec.adventitia_outer_radius) return spec.intensity.adventitia;
  return spec.intensity.background;
}

template <typename Scalar>
struct PhantomPair {
  Image<Scalar> cartesian;
  Image<Scalar> polar;  // rows = angle, columns = radius in [0, 1] half-units
};

/// Evaluates the analytic membership per pixel on both grids (the polar form
/// is rendered directly, not resampled from the cartesian one).
template <typename Scalar = double>
PhantomPair<Scalar> generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  PhantomPair<Scalar> out;
  const int n = spec.size;
  const double c = (n - 1) / 2.0;
  const double half = n / 2.0;
  out.cartesian = Image<Scalar>(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      out.cartesian(y, x) = Scalar(phantom_value_at(spec, (x - c) / half, (y - c) / half));

  out.polar = Image<Scalar>(spec.polar_angles, spec.polar_radii);
  for (int i = 0; i < spec.polar_angles; ++i) {
    const double th = 2.0 * EIGEN_PI * i / spec.polar_angles;
    for (int j = 0; j < spec.polar_radii; ++j) {
      const double r = (j + 0.5) / spec.polar_radii;
      out.polar(i, j) = Scalar(phantom_value_at(spec, r * std::cos(th), r * std::sin(th)));
    }
  }
  return out;
}

/// Flat key=value serialization for experiment reproducibility.
inline void write_phantom_spec(const PhantomSpec& spec, std::ostream& os) {
  os.precision(17);
  os << "size=" << spec.size << "\n"
     << "polar_angles=" << spec.polar_angles << "\n"
     << "polar_radii=" << spec.polar_radii << "\n"
     << "lumen_radius=" << spec.lumen_radius << "\n"
     << "intima_outer_radius=" << spec.intima_outer_radius << "\n"
     << "adventitia_outer_radius=" << spec.adventitia_outer_radius << "\n"
     << "calcium_theta_start=" << spec.calcium.theta_start << "\n"
     << "calcium_theta_end=" << spec.calcium.theta_end << "\n"
     << "calcium_inner_radius=" << spec.calcium.inner_radius << "\n"
     << "calcium_outer_radius=" << spec.calcium.outer_radius << "\n"
     << "intensity_background=" << spec.intensity.background << "\n"
     << "intensity_lumen=" << spec.intensity.lumen << "\n"
     << "intensity_intima=" << spec.intensity.intima << "\n"
     << "intensity_adventitia=" << spec.intensity.adventitia << "\n"
     << "intensity_calcium=" << spec.intensity.calcium << "\n"
     << "eccentricity=" << spec.eccentricity << "\n";
}

inline void write_phantom_spec(const PhantomSpec& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_phantom_spec: cannot open " + path);
  write_phantom_spec(spec, os);
}

inline PhantomSpec read_phantom_spec(std::istream& is) {
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("read_phantom_spec: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
  }
  PhantomSpec spec;
  auto get = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  spec.size = int(get("size", spec.size));
  spec.polar_angles = int(get("polar_angles", spec.polar_angles));
  spec.polar_radii = int(get("polar_radii", spec.polar_radii));
  spec.lumen_radius = get("lumen_radius", spec.lumen_radius);
  spec.intima_outer_radius = get("intima_outer_radius", spec.intima_outer_radius);
  spec.adventitia_outer_radius = get("adventitia_outer_radius", spec.adventitia_outer_radius);
  spec.calcium.theta_start = get("calcium_theta_start", spec.calcium.theta_start);
  spec.calcium.theta_end = get("calcium_theta_end", spec.calcium.theta_end);
  spec.calcium.inner_radius = get("calcium_inner_radius", spec.calcium.inner_radius);
  spec.calcium.outer_radius = get("calcium_outer_radius", spec.calcium.outer_radius);
  spec.intensity.background = get("intensity_background", spec.intensity.background);
  spec.intensity.lumen = get("intensity_lumen", spec.intensity.lumen);
  spec.intensity.intima = get("intensity_intima", spec.intensity.intima);
  spec.intensity.adventitia = get("intensity_adventitia", spec.intensity.adventitia);
  spec.intensity.calcium = get("intensity_calcium", spec.intensity.calcium);
  spec.eccentricity = get("eccentricity", spec.eccentricity);
  spec.validate();
  return spec;
}

inline PhantomSpec read_phantom_spec(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_phantom_spec: cannot open " + path);
  return read_phantom_spec(is);
}

}  // namespace mldtv
