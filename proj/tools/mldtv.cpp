// Command-line front end: phantom/noise synthesis, denoising, error metrics
// and parameter sweeps over reproducible manifests.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mldtv/image_io.hpp"
#include "mldtv/manifest.hpp"
#include "mldtv/metrics.hpp"
#include "mldtv/noise.hpp"
#include "mldtv/phantom.hpp"
#include "mldtv/solvers.hpp"
#include "mldtv/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitUsage = 64;

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

struct SolverFlags {
  double beta = 0.8;
  double tol = 1e-5;
  int max_iter = 5000;
  double grad_eps = 1e-2;

  void attach(CLI::App* cmd) {
    cmd->add_option("--beta", beta, "sub-relaxation in [0,1)")->capture_default_str();
    cmd->add_option("--tol", tol, "inf-norm stopping tolerance")->capture_default_str();
    cmd->add_option("--max-iter", max_iter, "iteration cap")->capture_default_str();
    cmd->add_option("--grad-eps", grad_eps, "gradient magnitude smoothing")->capture_default_str();
  }

  mldtv::SolverConfig config(double alpha) const {
    mldtv::SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.grad_eps = grad_eps;
    return cfg;
  }

  void record(mldtv::RunManifest& m) const {
    m.set("beta", beta);
    m.set("tol", tol);
    m.set("max_iter", max_iter);
    m.set("grad_eps", grad_eps);
  }
};

int run_synth(const std::string& cmdline, const std::optional<std::string>& spec_path,
              std::optional<int> size, double gamma, double nu, double delta,
              std::optional<std::uint64_t> seed_opt, double floor, const std::string& prefix,
              bool write_polar) {
  mldtv::PhantomSpec spec =
      spec_path ? mldtv::read_phantom_spec(*spec_path) : mldtv::default_phantom_spec();
  if (size) spec.size = *size;
  spec.validate();
  const mldtv::GGParams p{gamma, nu, delta};
  p.validate();

  std::uint64_t seed;
  if (seed_opt) {
    seed = *seed_opt;
  } else {
    std::random_device rd;
    seed = (std::uint64_t(rd()) << 32) ^ rd();
  }

  const auto phantom = mldtv::generate_phantom(spec);
  const auto speckled = mldtv::apply_speckle(phantom.cartesian, p, mldtv::Seed{seed});
  const auto logged = mldtv::log_compress(speckled, floor);

  mldtv::write_image(phantom.cartesian, prefix + "_ref.pgm");
  // log-domain reference: the right --ref for metrics on denoised log images
  mldtv::write_image(mldtv::log_compress(phantom.cartesian, floor), prefix + "_logref.pgm");
  mldtv::write_image(speckled, prefix + "_speckled.pgm");
  mldtv::write_image(logged, prefix + "_log.pgm");
  if (write_polar) mldtv::write_image(phantom.polar, prefix + "_polar.pgm");
  mldtv::write_phantom_spec(spec, prefix + "_spec.txt");

  mldtv::RunManifest m;
  m.stamp(cmdline);
  m.set("seed", (unsigned long long)seed);
  m.set("gamma", gamma);
  m.set("nu", nu);
  m.set("delta", delta);
  m.set("log_floor", floor);
  m.set("spec_file", prefix + "_spec.txt");
  m.set("out_ref", prefix + "_ref.pgm");
  m.set("out_logref", prefix + "_logref.pgm");
  m.set("out_speckled", prefix + "_speckled.pgm");
  m.set("out_log", prefix + "_log.pgm");
  if (write_polar) m.set("out_polar", prefix + "_polar.pgm");
  m.write(prefix + ".manifest");

  std::printf("seed=%llu ref=%s_ref.pgm speckled=%s_speckled.pgm log=%s_log.pgm\n",
              (unsigned long long)seed, prefix.c_str(), prefix.c_str(), prefix.c_str());
  return kExitOk;
}

int run_denoise(const std::string& cmdline, const std::string& in_path,
                const std::string& out_path, const std::string& method, double alpha,
                double gamma, double nu, double delta, double mu, const SolverFlags& flags) {
  const auto input = mldtv::read_image(in_path);
  const auto cfg = flags.config(alpha);

  mldtv::DenoiseResult<double> res;
  if (method == "mld_gg")
    res = mldtv::denoise_mld_gg(input, mldtv::GGParams{gamma, nu, delta}, cfg);
  else if (method == "tvl1")
    res = mldtv::denoise_tvl1(input, cfg);
  else
    res = mldtv::denoise_mld_gaussian(input, mldtv::GaussianParams{mu, 1.0}, cfg);

  mldtv::write_image(res.image, out_path);

  mldtv::RunManifest m;
  m.stamp(cmdline);
  m.set("method", method);
  m.set("input", in_path);
  m.set("output", out_path);
  m.set("alpha", alpha);
  if (method == "mld_gg") {
    m.set("gamma", gamma);
    m.set("nu", nu);
    m.set("delta", delta);
  }
  if (method == "mld_gaussian") m.set("mu", mu);
  flags.record(m);
  m.set("iterations", res.iterations);
  m.set("final_step_inf_norm", res.final_step_inf_norm);
  m.set("final_energy", res.final_energy);
  m.set("converged", res.converged ? 1 : 0);
  m.write(out_path + ".manifest");

  std::printf("method=%s iterations=%d final_step=%.12g energy=%.12g converged=%d\n",
              method.c_str(), res.iterations, res.final_step_inf_norm, res.final_energy,
              res.converged ? 1 : 0);
  return res.converged ? kExitOk : kExitNoConvergence;
}

int run_metrics(const std::string& ref_path, const std::string& test_path, bool literal_eps_e,
                std::string frame_id) {
  const auto ref = mldtv::read_image(ref_path);
  const auto test = mldtv::read_image(test_path);
  if (frame_id.empty()) frame_id = stem_of(test_path);
  const auto report = mldtv::compute_metrics(ref, test, &ref, literal_eps_e);
  std::printf("%s\n%s\n", mldtv::kMetricsCsvHeader,
              mldtv::metrics_csv_row(frame_id, report).c_str());
  return kExitOk;
}

void print_best_rows(const mldtv::SweepReport& rep) {
  using mldtv::Objective;
  for (Objective o : {Objective::eps_b, Objective::eps_d, Objective::eps_e,
                      Objective::pearson_lowpass}) {
    const auto idx = rep.best_row(o, mldtv::canonical_direction(o));
    if (!idx) {
      std::printf("best %s/%s: none (no converged rows)\n", mldtv::to_string(rep.method),
                  mldtv::to_string(o));
      continue;
    }
    const auto& r = rep.rows[*idx];
    std::printf("best %s/%s: row=%zu value=%.12g alpha=%.4g", mldtv::to_string(rep.method),
                mldtv::to_string(o), *idx, r.objective_value(o), r.alpha);
    if (rep.method == mldtv::Method::mld_gg)
      std::printf(" gamma=%.4g nu=%.4g delta=%.4g", r.gamma, r.nu, r.delta);
    std::printf(" iterations=%d\n", r.iterations);
  }
}

int run_sweep_cmd(const std::string& cmdline, const std::string& ref_path,
                  const std::string& noisy_path, bool paper, const std::string& method,
                  std::vector<double> alphas, std::vector<double> gammas,
                  std::vector<double> nus, std::vector<double> deltas,
                  const std::string& objective, int stride, int jobs, const std::string& out,
                  const SolverFlags& flags) {
  const auto ref = mldtv::read_image(ref_path);
  const auto noisy = mldtv::read_image(noisy_path);
  const auto cfg = flags.config(1.0);

  mldtv::Objective obj = mldtv::Objective::eps_b;
  if (objective == "eps_d") obj = mldtv::Objective::eps_d;
  else if (objective == "eps_e") obj = mldtv::Objective::eps_e;
  else if (objective == "pearson_lowpass") obj = mldtv::Objective::pearson_lowpass;

  std::vector<std::pair<std::string, mldtv::ParamGrid>> grids;
  if (paper) {
    auto [mld, tvl1] = mldtv::paper_grids();
    grids.emplace_back(out + "_mld.csv", mldtv::strided(mld, stride));
    grids.emplace_back(out + "_tvl1.csv", tvl1);
  } else {
    mldtv::ParamGrid grid;
    grid.method = method == "mld_gg"
                      ? mldtv::Method::mld_gg
                      : method == "tvl1" ? mldtv::Method::tvl1 : mldtv::Method::mld_gaussian;
    grid.alpha_values = std::move(alphas);
    grid.gamma_values = std::move(gammas);
    grid.nu_values = std::move(nus);
    grid.delta_values = std::move(deltas);
    grids.emplace_back(out, mldtv::strided(grid, stride));
  }

  bool any_all_diverged = false;
  mldtv::RunManifest m;
  m.stamp(cmdline);
  m.set("ref", ref_path);
  m.set("noisy", noisy_path);
  m.set("objective", objective);
  m.set("stride", stride);
  m.set("jobs", jobs);
  flags.record(m);

  for (auto& [path, grid] : grids) {
    grid.objective = obj;
    grid.direction = mldtv::canonical_direction(obj);
    const auto rep = mldtv::run_sweep(ref, noisy, grid, cfg, jobs);
    mldtv::write_sweep_csv(path, rep);
    print_best_rows(rep);
    m.set(std::string("csv_") + mldtv::to_string(grid.method), path);
    if (rep.all_diverged()) any_all_diverged = true;
  }
  m.write((paper ? out : out + "") + ".manifest");
  return any_all_diverged ? kExitError : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cmdline = join_args(argc, argv);

  CLI::App app{"Variational despeckling toolkit for log-compressed ultrasound images"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate phantom, speckle it, log-compress");
  std::optional<std::string> spec_path;
  std::optional<int> synth_size;
  double sg = 1.5, sn = 1.5, sd = 1.5, floor = 1e-6;
  std::optional<std::uint64_t> seed_opt;
  std::string prefix = "synth";
  bool write_polar = false;
  synth->add_option("--spec", spec_path, "phantom spec file (key=value)");
  synth->add_option("--size", synth_size, "override cartesian phantom size");
  synth->add_option("--gamma", sg, "GG gamma")->capture_default_str();
  synth->add_option("--nu", sn, "GG nu")->capture_default_str();
  synth->add_option("--delta", sd, "GG delta")->capture_default_str();
  synth->add_option("--seed", seed_opt, "64-bit seed (drawn and recorded when omitted)");
  synth->add_option("--floor", floor, "log-compression floor")->capture_default_str();
  synth->add_option("--out-prefix", prefix, "output path prefix")->capture_default_str();
  synth->add_flag("--polar", write_polar, "also write the analytic polar rendering");

  // denoise
  auto* den = app.add_subcommand("denoise", "run one denoiser on an image");
  std::string in_path, out_path, method;
  double alpha = 0.5, dg = 1.5, dn = 1.5, dd = 1.5, mu = 0.0;
  SolverFlags den_flags;
  den->add_option("--in", in_path, "input image")->required();
  den->add_option("--out", out_path, "output image")->required();
  den->add_option("--method", method, "mld_gg | tvl1 | mld_gaussian")
      ->required()
      ->check(CLI::IsMember({"mld_gg", "tvl1", "mld_gaussian"}));
  den->add_option("--alpha", alpha, "regularization weight")->required();
  den->add_option("--gamma", dg, "GG gamma (mld_gg)")->capture_default_str();
  den->add_option("--nu", dn, "GG nu (mld_gg)")->capture_default_str();
  den->add_option("--delta", dd, "GG delta (mld_gg)")->capture_default_str();
  den->add_option("--mu", mu, "noise mean (mld_gaussian)")->capture_default_str();
  den_flags.attach(den);

  // metrics
  auto* met = app.add_subcommand("metrics", "error metrics between two images");
  std::string ref_path, test_path, frame_id;
  bool literal = false;
  met->add_option("--ref", ref_path, "reference image")->required();
  met->add_option("--test", test_path, "image under test")->required();
  met->add_flag("--literal-eps-e", literal, "use the printed squared-numerator edge metric");
  met->add_option("--frame-id", frame_id, "identifier for the CSV row");

  // sweep
  auto* swp = app.add_subcommand("sweep", "brute-force parameter grid search");
  std::string sw_ref, sw_noisy, sw_method = "tvl1", sw_obj = "eps_b", sw_out = "sweep";
  std::vector<double> sw_alphas, sw_gammas, sw_nus, sw_deltas;
  bool paper = false;
  int stride = 1, jobs = 1;
  SolverFlags sw_flags;
  swp->add_option("--ref", sw_ref, "noiseless reference image")->required();
  swp->add_option("--noisy", sw_noisy, "image to denoise")->required();
  swp->add_flag("--paper-grids", paper, "run the published MLD and TV-L1 grids");
  swp->add_option("--method", sw_method, "mld_gg | tvl1 | mld_gaussian")
      ->check(CLI::IsMember({"mld_gg", "tvl1", "mld_gaussian"}));
  swp->add_option("--alphas", sw_alphas, "alpha grid values")->delimiter(',');
  swp->add_option("--gammas", sw_gammas, "gamma grid values (mld_gg)")->delimiter(',');
  swp->add_option("--nus", sw_nus, "nu grid values (mld_gg)")->delimiter(',');
  swp->add_option("--deltas", sw_deltas, "delta grid values (mld_gg)")->delimiter(',');
  swp->add_option("--objective", sw_obj, "eps_b | eps_d | eps_e | pearson_lowpass")
      ->check(CLI::IsMember({"eps_b", "eps_d", "eps_e", "pearson_lowpass"}))
      ->capture_default_str();
  swp->add_option("--stride", stride, "keep every stride-th gamma/nu/delta value")
      ->capture_default_str();
  swp->add_option("--jobs", jobs, "worker pool width")->capture_default_str();
  swp->add_option("--out", sw_out, "CSV path (or prefix with --paper-grids)")
      ->capture_default_str();
  sw_flags.attach(swp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed())
      return run_synth(cmdline, spec_path, synth_size, sg, sn, sd, seed_opt, floor, prefix,
                       write_polar);
    if (den->parsed())
      return run_denoise(cmdline, in_path, out_path, method, alpha, dg, dn, dd, mu, den_flags);
    if (met->parsed()) return run_metrics(ref_path, test_path, literal, frame_id);
    if (swp->parsed())
      return run_sweep_cmd(cmdline, sw_ref, sw_noisy, paper, sw_method, sw_alphas, sw_gammas,
                           sw_nus, sw_deltas, sw_obj, stride, jobs, sw_out, sw_flags);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mldtv: %s\n", e.what());
    return kExitError;
  }
  return kExitUsage;
}
