#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "mldtv/image_io.hpp"
#include "mldtv/noise.hpp"
#include "mldtv/phantom.hpp"
#include "test_support.hpp"

#ifndef MLDTV_CLI_PATH
#error "MLDTV_CLI_PATH must point at the mldtv binary"
#endif

using namespace mldtv;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const test_support::TempDir& tmp) {
  const std::string out_file = tmp.path("stdout.txt");
  const std::string cmd =
      std::string(MLDTV_CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out_file);
  std::stringstream ss;
  ss << is.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("synth is bitwise reproducible for a fixed seed") {
  test_support::TempDir tmp("cli_synth");
  const std::string base = "synth --size 48 --seed 42 --out-prefix ";
  auto r1 = run_cli(base + tmp.path("a"), tmp);
  auto r2 = run_cli(base + tmp.path("b"), tmp);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(tmp.path("a_log.pgm")) == slurp(tmp.path("b_log.pgm")));
  CHECK(slurp(tmp.path("a_ref.pgm")) == slurp(tmp.path("b_ref.pgm")));
  const std::string manifest = slurp(tmp.path("a.manifest"));
  CHECK(manifest.find("seed=42") != std::string::npos);
  CHECK(manifest.find("version=") != std::string::npos);
}

TEST_CASE("synth rejects invalid GG parameters") {
  test_support::TempDir tmp("cli_badgg");
  const auto r = run_cli("synth --size 32 --gamma 0 --out-prefix " + tmp.path("x"), tmp);
  CHECK(r.exit_code != 0);
}

TEST_CASE("synth draws and records a seed when omitted") {
  test_support::TempDir tmp("cli_noseed");
  const auto r = run_cli("synth --size 32 --out-prefix " + tmp.path("x"), tmp);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(tmp.path("x.manifest")).find("seed=") != std::string::npos);
}

TEST_CASE("denoise tvl1 on a constant image returns the input and exit 0") {
  test_support::TempDir tmp("cli_const");
  write_image(ImageXd(24, 24, 0.5), tmp.path("c.pgm"));
  const auto r = run_cli("denoise --in " + tmp.path("c.pgm") + " --out " + tmp.path("d.pgm") +
                             " --method tvl1 --alpha 0.3",
                         tmp);
  CHECK(r.exit_code == 0);
  const auto back = read_image(tmp.path("d.pgm"));
  CHECK((back.values - 0.5).abs().maxCoeff() < 1e-3);
  CHECK(r.out.find("converged=1") != std::string::npos);
}

TEST_CASE("unknown method is a usage error (64)") {
  test_support::TempDir tmp("cli_badmethod");
  write_image(ImageXd(8, 8, 0.5), tmp.path("c.pgm"));
  const auto r = run_cli("denoise --in " + tmp.path("c.pgm") + " --out " + tmp.path("d.pgm") +
                             " --method rof2000 --alpha 0.3",
                         tmp);
  CHECK(r.exit_code == 64);
}

TEST_CASE("non-convergence exits 2 and still writes the iterate") {
  test_support::TempDir tmp("cli_noconv");
  PhantomSpec spec = default_phantom_spec();
  spec.size = 32;
  spec.polar_angles = spec.polar_radii = 32;
  const auto noisy =
      log_compress(apply_speckle(generate_phantom(spec).cartesian, GGParams{1.5, 1.5, 1.5}, Seed{1}));
  write_image(noisy, tmp.path("n.pgm"));
  const auto r = run_cli("denoise --in " + tmp.path("n.pgm") + " --out " + tmp.path("d.pgm") +
                             " --method mld_gg --alpha 0.5 --max-iter 2",
                         tmp);
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("converged=0") != std::string::npos);
  CHECK_NOTHROW(read_image(tmp.path("d.pgm")));
}

TEST_CASE("metrics on identical files prints the identity row") {
  test_support::TempDir tmp("cli_metrics");
  PhantomSpec spec = default_phantom_spec();
  spec.size = 32;
  spec.polar_angles = spec.polar_radii = 32;
  write_image(generate_phantom(spec).cartesian, tmp.path("p.pgm"));
  const auto r = run_cli(
      "metrics --ref " + tmp.path("p.pgm") + " --test " + tmp.path("p.pgm") + " --frame-id f0",
      tmp);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("frame_id,eps_b,eps_d,eps_e,pearson_lowpass") != std::string::npos);
  CHECK(r.out.find("f0,0,0,1,") != std::string::npos);

  const auto rl = run_cli("metrics --ref " + tmp.path("p.pgm") + " --test " + tmp.path("p.pgm") +
                              " --frame-id f0 --literal-eps-e",
                          tmp);
  REQUIRE(rl.exit_code == 0);
  CHECK(rl.out.find("f0,0,0,1,") == std::string::npos);  // literal form is not 1 here
}

TEST_CASE("metrics with a missing file fails") {
  test_support::TempDir tmp("cli_missing");
  write_image(ImageXd(8, 8, 0.5), tmp.path("a.pgm"));
  const auto r =
      run_cli("metrics --ref " + tmp.path("a.pgm") + " --test " + tmp.path("nope.pgm"), tmp);
  CHECK(r.exit_code == 1);
}

TEST_CASE("sweep CSV is identical across worker counts") {
  test_support::TempDir tmp("cli_sweep");
  PhantomSpec spec = default_phantom_spec();
  spec.size = 32;
  spec.polar_angles = spec.polar_radii = 32;
  const auto ph = generate_phantom(spec).cartesian;
  write_image(log_compress(ph), tmp.path("ref.pgm"));
  write_image(log_compress(apply_speckle(ph, GGParams{1.5, 1.5, 1.5}, Seed{3})),
              tmp.path("noisy.pgm"));
  const std::string common = "sweep --ref " + tmp.path("ref.pgm") + " --noisy " +
                             tmp.path("noisy.pgm") + " --method tvl1 --alphas 0.2,0.4,0.6";
  const auto r1 = run_cli(common + " --jobs 1 --out " + tmp.path("s1.csv"), tmp);
  const auto r8 = run_cli(common + " --jobs 8 --out " + tmp.path("s8.csv"), tmp);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r8.exit_code == 0);
  CHECK(slurp(tmp.path("s1.csv")) == slurp(tmp.path("s8.csv")));
  CHECK(r1.out.find("best tvl1/eps_b: row=") != std::string::npos);
  CHECK(slurp(tmp.path("s1.csv")).find("method,alpha,gamma,nu,delta,eps_b,eps_d,eps_e,"
                                       "converged,iterations") != std::string::npos);
}

TEST_CASE("sweep --objective eps_b echoes the Table-1-style best row") {
  test_support::TempDir tmp("cli_sweepobj");
  PhantomSpec spec = default_phantom_spec();
  spec.size = 32;
  spec.polar_angles = spec.polar_radii = 32;
  const auto ph = generate_phantom(spec).cartesian;
  write_image(log_compress(ph), tmp.path("ref.pgm"));
  write_image(log_compress(apply_speckle(ph, GGParams{1.5, 1.5, 1.5}, Seed{4})),
              tmp.path("noisy.pgm"));
  const auto r = run_cli("sweep --ref " + tmp.path("ref.pgm") + " --noisy " + tmp.path("noisy.pgm") +
                             " --method mld_gg --alphas 0.5 --gammas 1.5 --nus 1.5"
                             " --deltas 1.3,1.5 --objective eps_b --out " +
                             tmp.path("m.csv"),
                         tmp);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("best mld_gg/eps_b: row=") != std::string::npos);
  CHECK(r.out.find("gamma=1.5") != std::string::npos);
}
