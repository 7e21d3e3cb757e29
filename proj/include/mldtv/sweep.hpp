#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mldtv/metrics.hpp"
#include "mldtv/solvers.hpp"

namespace mldtv {

enum class Method { mld_gg, tvl1, mld_gaussian };
enum class Objective { eps_b, eps_d, eps_e, pearson_lowpass };
enum class Direction { minimize, maximize };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::mld_gg: return "mld_gg";
    case Method::tvl1: return "tvl1";
    case Method::mld_gaussian: return "mld_gaussian";
  }
  return "?";
}

inline const char* to_string(Objective o) {
  switch (o) {
    case Objective::eps_b: return "eps_b";
    case Objective::eps_d: return "eps_d";
    case Objective::eps_e: return "eps_e";
    case Objective::pearson_lowpass: return "pearson_lowpass";
  }
  return "?";
}

/// The conventional optimization sense of each error function.
inline Direction canonical_direction(Objective o) {
  return (o == Objective::eps_b || o == Objective::eps_d) ? Direction::minimize
                                                          : Direction::maximize;
}

struct ParamGrid {
  Method method = Method::tvl1;
  std::vector<double> alpha_values;
  std::vector<double> gamma_values;  // mld_gg only
  std::vector<double> nu_values;
  std::vector<double> delta_values;
  Objective objective = Objective::eps_b;
  Direction direction = Direction::minimize;

  void validate() const {
    if (alpha_values.empty()) throw std::invalid_argument("ParamGrid: empty alpha list");
    const bool has_gg = !gamma_values.empty() || !nu_values.empty() || !delta_values.empty();
    if (method == Method::mld_gg) {
      if (gamma_values.empty() || nu_values.empty() || delta_values.empty())
        throw std::invalid_argument("ParamGrid: mld_gg needs gamma/nu/delta lists");
    } else if (has_gg) {
      throw std::invalid_argument("ParamGrid: gamma/nu/delta lists only apply to mld_gg");
    }
    for (double v : alpha_values)
      if (!(v > 0)) throw std::invalid_argument("ParamGrid: alpha values must be positive");
    for (const auto* list : {&gamma_values, &nu_values, &delta_values})
      for (double v : *list)
        if (!(v > 0)) throw std::invalid_argument("ParamGrid: grid values must be positive");
  }
};

struct SweepRow {
  double alpha = 0;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double nu = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double eps_b = std::numeric_limits<double>::quiet_NaN();
  double eps_d = std::numeric_limits<double>::quiet_NaN();
  double eps_e = std::numeric_limits<double>::quiet_NaN();
  double pearson = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  int iterations = 0;

  double objective_value(Objective o) const {
    switch (o) {
      case Objective::eps_b: return eps_b;
      case Objective::eps_d: return eps_d;
      case Objective::eps_e: return eps_e;
      case Objective::pearson_lowpass: return pearson;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }
};

struct SweepReport {
  Method method = Method::tvl1;
  std::vector<SweepRow> rows;           // lexicographic over (alpha, gamma, nu, delta)
  std::optional<std::size_t> best;      // per the grid's objective/direction

  bool all_diverged() const {
    return std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
  }

  /// Extremal converged row with a finite objective; ties go to the
  /// lexicographically smallest parameter tuple (i.e. the earliest row).
  std::optional<std::size_t> best_row(Objective o, Direction dir) const {
    std::optional<std::size_t> best_idx;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].converged) continue;
      const double v = rows[i].objective_value(o);
      if (!std::isfinite(v)) continue;
      if (!best_idx) {
        best_idx = i;
        continue;
      }
      const double b = rows[*best_idx].objective_value(o);
      if (dir == Direction::minimize ? v < b : v > b) best_idx = i;
    }
    return best_idx;
  }
};

/// Runs the selected denoiser at every grid point and evaluates all metrics:
/// eps_* against ref, pearson against the half-band low-pass of the noisy
/// input (computed once). Grid points are independent tasks over a pool of
/// `jobs` workers; rows land at fixed lexicographic indices, so the report
/// does not depend on scheduling.
inline SweepReport run_sweep(const ImageXd& ref, const ImageXd& noisy, const ParamGrid& grid,
                             const SolverConfig& cfg, int jobs = 1) {
  grid.validate();
  cfg.validate();
  require_same_shape(ref, noisy, "run_sweep");
  if (jobs < 1) jobs = 1;

  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const std::vector<double> alphas = sorted(grid.alpha_values);
  const std::vector<double> gammas = grid.method == Method::mld_gg ? sorted(grid.gamma_values)
                                                                   : std::vector<double>{0.0};
  const std::vector<double> nus = grid.method == Method::mld_gg ? sorted(grid.nu_values)
                                                                : std::vector<double>{0.0};
  const std::vector<double> deltas = grid.method == Method::mld_gg ? sorted(grid.delta_values)
                                                                   : std::vector<double>{0.0};

  struct Task {
    double alpha, gamma, nu, delta;
  };
  std::vector<Task> tasks;
  tasks.reserve(alphas.size() * gammas.size() * nus.size() * deltas.size());
  for (double a : alphas)
    for (double g : gammas)
      for (double n : nus)
        for (double d : deltas) tasks.push_back({a, g, n, d});

  const ImageXd noisy_lowpass = lowpass_half_band(noisy);

  SweepReport report;
  report.method = grid.method;
  report.rows.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      SolverConfig c = cfg;
      c.alpha = t.alpha;
      DenoiseResult<double> res;
      switch (grid.method) {
        case Method::mld_gg:
          res = denoise_mld_gg(noisy, GGParams{t.gamma, t.nu, t.delta}, c);
          break;
        case Method::tvl1:
          res = denoise_tvl1(noisy, c);
          break;
        case Method::mld_gaussian:
          res = denoise_mld_gaussian(noisy, GaussianParams{0.0, 1.0}, c);
          break;
      }
      SweepRow row;
      row.alpha = t.alpha;
      if (grid.method == Method::mld_gg) {
        row.gamma = t.gamma;
        row.nu = t.nu;
        row.delta = t.delta;
      }
      row.converged = res.converged;
      row.iterations = res.iterations;
      // flat outputs make eps_e/pearson undefined; keep the row, leave NaN
      try {
        row.eps_b = eps_b(ref, res.image);
        row.eps_d = eps_d(ref, res.image);
        row.eps_e = eps_e(ref, res.image);
      } catch (const std::invalid_argument&) {
      }
      try {
        row.pearson = pearson(noisy_lowpass, res.image);
      } catch (const std::invalid_argument&) {
      }
      report.rows[i] = row;
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.best = report.best_row(grid.objective, grid.direction);
  return report;
}

/// The exact parameter discretizations of Section 3.2:
/// MLD: A = {0.5, 0.75, 1, 2}, gamma, nu, delta in B = {0.1 i, i = 1..20};
/// TV-L1: alpha in {0.01 i, i = 1..100}.
inline std::pair<ParamGrid, ParamGrid> paper_grids() {
  ParamGrid mld;
  mld.method = Method::mld_gg;
  mld.alpha_values = {0.5, 0.75, 1.0, 2.0};
  for (int i = 1; i <= 20; ++i) mld.gamma_values.push_back(i / 10.0);
  mld.nu_values = mld.gamma_values;
  mld.delta_values = mld.gamma_values;

  ParamGrid tvl1;
  tvl1.method = Method::tvl1;
  for (int i = 1; i <= 100; ++i) tvl1.alpha_values.push_back(i / 100.0);
  return {mld, tvl1};
}

/// Keeps every stride-th value of the gamma/nu/delta axes, starting with the
/// first (stride 2 keeps {0.1, 0.3, ..., 1.9}, which contains the true 1.5).
inline ParamGrid strided(ParamGrid grid, int stride) {
  if (stride < 1) throw std::invalid_argument("strided: stride must be >= 1");
  auto thin = [stride](std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); i += std::size_t(stride)) out.push_back(v[i]);
    v = std::move(out);
  };
  thin(grid.gamma_values);
  thin(grid.nu_values);
  thin(grid.delta_values);
  return grid;
}

namespace detail {

inline std::string csv_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return std::string(buf);
}

}  // namespace detail

inline constexpr const char* kSweepCsvHeader =
    "method,alpha,gamma,nu,delta,eps_b,eps_d,eps_e,converged,iterations";

/// One row per grid point plus a `# best:<objective>=<row>` trailer per
/// objective (canonical directions, converged rows only).
inline void write_sweep_csv(std::ostream& os, const SweepReport& report) {
  os << kSweepCsvHeader << "\n";
  for (const SweepRow& r : report.rows) {
    os << to_string(report.method) << ',' << detail::csv_num(r.alpha) << ','
       << detail::csv_num(r.gamma) << ',' << detail::csv_num(r.nu) << ','
       << detail::csv_num(r.delta) << ',' << detail::csv_num(r.eps_b) << ','
       << detail::csv_num(r.eps_d) << ',' << detail::csv_num(r.eps_e) << ','
       << (r.converged ? 1 : 0) << ',' << r.iterations << "\n";
  }
  for (Objective o : {Objective::eps_b, Objective::eps_d, Objective::eps_e,
                      Objective::pearson_lowpass}) {
    const auto idx = report.best_row(o, canonical_direction(o));
    os << "# best:" << to_string(o) << "=" << (idx ? std::to_string(*idx) : "none") << "\n";
  }
}

inline void write_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_sweep_csv: cannot open " + path);
  write_sweep_csv(os, report);
}

}  // namespace mldtv
