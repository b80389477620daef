#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(FREQLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(FREQLAB_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli oracle") {
  auto r = cli("oracle --curve sigma --h 3 --dl 2 --alpha 0.5 --b 1");
  CHECK(r.code == 0);
  CHECK(r.out == "0.316228\n");
  r = cli("oracle --curve var0 --dl 0.1");
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  r = cli("oracle --curve var --t-max 0");
  CHECK(r.code == 0);
  CHECK(r.out == "t,value\n0,0\n");
  r = cli("oracle --curve var0 --dl 0 --t-max 2000 --t-step 1000");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("t,value\n0,0\n1000,", 0) == 0);
  r = cli("oracle --curve mean --rho 0.01 --psi 0.1 --t-max 10");
  CHECK(r.code == 0);
  r = cli("oracle --curve mean --rho 0.01");
  CHECK(r.code == 2);
  r = cli("oracle --curve sigma --dl 0");
  CHECK(r.code == 2);
  r = cli("oracle --curve nonsense");
  CHECK(r.code == 2);
}

TEST_CASE("cli simulate: artifacts, determinism and exit codes") {
  const auto d1 = scratch("sim1"), d2 = scratch("sim2");
  auto r = cli("simulate --scenario b --seed 42 --duration-override 3600 --out-dir " + d1.string());
  CHECK(r.code == 0);
  for (const char* f : {"samples.csv", "histogram.csv", "modality.txt", "report.txt"})
    CHECK(fs::exists(d1 / f));
  r = cli("simulate --scenario b --seed 42 --duration-override 3600 --out-dir " + d2.string());
  CHECK(r.code == 0);
  for (const char* f : {"samples.csv", "histogram.csv", "modality.txt", "report.txt", "report.json"})
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  CHECK(slurp(d1 / "samples.csv").rfind("t_s,delta_f_hz\n", 0) == 0);
  CHECK(slurp(d1 / "report.txt").find("seed=42") != std::string::npos);

  CHECK(cli("simulate --scenario missing.cfg --out-dir " + d1.string()).code == 2);
  CHECK(cli("simulate --scenario b --duration-override 10 --out-dir " + d1.string()).code == 2);
  CHECK(cli("simulate").code == 2);
}

TEST_CASE("cli simulate reports divergence with exit 3") {
  const auto dir = scratch("diverge");
  std::ofstream(dir / "boom.cfg") << "base = c\n[stochastic_load]\np_l0_mw = 100000\n[run]\nduration_s = 3600\n";
  CHECK(cli("simulate --scenario " + (dir / "boom.cfg").string() + " --out-dir " + dir.string()).code == 3);
}

TEST_CASE("cli simulate accepts scenario files") {
  const auto dir = scratch("file");
  std::ofstream(dir / "s.cfg") << "base = a\nlabel = short\n[run]\nduration_s = 3600\n";
  CHECK(cli("simulate --scenario " + (dir / "s.cfg").string() + " --out-dir " + dir.string()).code == 0);
  CHECK(slurp(dir / "report.txt").find("scenario=short") != std::string::npos);
  std::ofstream(dir / "bad.cfg") << "base = a\n[run]\ndurashun_s = 3600\n";
  CHECK(cli("simulate --scenario " + (dir / "bad.cfg").string() + " --out-dir " + dir.string()).code == 2);
}

TEST_CASE("cli analyze") {
  const auto dir = scratch("analyze");
  {
    std::ofstream f(dir / "drift.csv");
    f << "timestamp,frequency_hz\n";
    const auto x = freqlab::test::normals(12, 86400);
    for (std::size_t i = 0; i < x.size(); ++i)
      f << 1700006400 + i << "," << 60.0 + 0.015 * x[i] + 0.08 * std::sin(2 * M_PI * static_cast<double>(i) / 86400.0)
        << "\n";
  }
  auto r = cli("analyze --input " + (dir / "drift.csv").string() + " --window hourly --out-dir " + (dir / "o").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("windows=24\n") != std::string::npos);
  CHECK(r.out.find("combined_verdict=bimodal") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "histogram_hourly_0023.csv"));
  CHECK(fs::exists(dir / "o" / "drift.csv"));

  {
    std::ofstream f(dir / "flat.csv");
    for (int i = 0; i < 7200; ++i) f << 1700006400 + i << ",60.000\n";
  }
  r = cli("analyze --input " + (dir / "flat.csv").string() + " --d-za-mhz 36 --out-dir " + (dir / "f").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("windows_unimodal=2") != std::string::npos);
  CHECK(r.out.find("combined_verdict=unimodal") != std::string::npos);
  CHECK(r.out.find("deadband_fraction_outside=0\n") != std::string::npos);

  std::ofstream(dir / "header.csv") << "timestamp,frequency_hz\n";
  CHECK(cli("analyze --input " + (dir / "header.csv").string() + " --out-dir " + dir.string()).code == 2);
  std::ofstream(dir / "junk.csv") << "0,60\n1,x\n2,y\n3,z\n";
  CHECK(cli("analyze --input " + (dir / "junk.csv").string() + " --out-dir " + dir.string()).code == 2);
  CHECK(cli("analyze --input /nonexistent.csv").code == 2);
  CHECK(cli("analyze --input " + (dir / "flat.csv").string() + " --window weekly").code == 2);
}
