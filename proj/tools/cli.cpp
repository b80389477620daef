#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "CLI11.hpp"
#include "freqlab/errors.hpp"
#include "freqlab/measured.hpp"
#include "freqlab/oracle.hpp"
#include "freqlab/scenario.hpp"

namespace freqlab::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write " + p.string());
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InvalidArgument("cannot create output directory " + dir.string());
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<double> duration;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  GridScenario sc = load_scenario(a.scenario);
  if (a.seed) sc.seed = *a.seed;
  if (a.duration) sc.duration_s = *a.duration;
  sc.validate();
  const RunResult r = run(sc);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  {
    auto os = open_out(dir / "samples.csv");
    write_series_csv(os, r.series);
  }
  {
    auto os = open_out(dir / "histogram.csv");
    write_histogram_csv(os, r.histogram);
  }
  {
    auto os = open_out(dir / "modality.txt");
    write_modality_text(os, r.modality);
  }
  {
    auto os = open_out(dir / "report.txt");
    write_report_text(os, r);
  }
  {
    auto os = open_out(dir / "report.json");
    write_report_json(os, r);
  }
  out << "scenario " << sc.label << ": " << r.series.count() << " samples, verdict "
      << verdict_name(r.modality.verdict) << ", artifacts in " << dir.string() << "\n";
  return kOk;
}

struct OracleArgs {
  double h = 3.0, dl = 2.0, alpha = 0.5, b = 1.0, mu = 0.0, eta0 = 0.0;
  std::optional<double> rho, psi;
  std::string curve = "sigma";
  double t_max = 100.0, t_step = 1.0;
  bool asymptotic = false;
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  SimplifiedSystem sys;
  sys.h = a.h;
  sys.d_l = a.dl;
  sys.ou = OuParams{a.mu, a.alpha, a.b, a.eta0};
  if (a.rho || a.psi) {
    if (!a.rho || !a.psi) throw InvalidArgument("--rho and --psi must be given together");
    sys.drive = Sinusoid{*a.rho, *a.psi};
  }
  sys.validate();
  if (a.curve == "sigma") {
    out << fmt(stationary_sigma(sys), "%.6g") << "\n";
    return kOk;
  }
  if (!(a.t_max >= 0.0)) throw InvalidArgument("--t-max must be >= 0");
  if (!(a.t_step > 0.0)) throw InvalidArgument("--t-step must be > 0");
  std::function<double(double)> f;
  if (a.curve == "var")
    f = [&](double t) { return var_delta_omega(t, sys); };
  else if (a.curve == "var0")
    f = [&](double t) { return var_zero_damping(t, sys); };
  else if (a.curve == "mean")
    f = [&](double t) { return mean_delta_omega(t, sys, a.asymptotic ? MeanMode::Asymptotic : MeanMode::Transient); };
  else
    throw InvalidArgument("unknown curve '" + a.curve + "'");
  // Evaluate everything first so a domain error leaves stdout empty.
  std::string body = "t,value\n";
  const auto n = static_cast<long long>(std::floor(a.t_max / a.t_step * (1.0 + 1e-12)));
  for (long long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * a.t_step;
    body += fmt(t) + "," + fmt(f(t), "%.12g") + "\n";
  }
  out << body;
  return kOk;
}

struct AnalyzeArgs {
  std::string input;
  std::string window = "hourly";
  std::optional<double> d_za_mhz;
  double f0 = 60.0;
  std::size_t bins = 101;
  std::string out_dir = ".";
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const Window window = parse_window(a.window);
  if (a.bins < 2) throw InvalidArgument("--bins must be >= 2");
  std::ifstream in(a.input);
  if (!in) throw InvalidArgument("cannot open input " + a.input);
  const MeasuredSeries m = parse_measured(in, a.input, a.f0);
  if (m.data_rows == 0) {
    err << "analyze: " << a.input << " has no data rows\n";
    return kValidation;
  }
  if (m.bad_fraction() > 0.5) {
    err << "analyze: " << m.bad_rows << " of " << m.data_rows << " rows unparseable (> 50%)\n";
    return kValidation;
  }
  std::optional<double> d_za;
  if (a.d_za_mhz) {
    if (!(*a.d_za_mhz >= 0.0)) throw InvalidArgument("--d-za-mhz must be >= 0");
    d_za = *a.d_za_mhz / 1000.0;
  }
  const MeasuredAnalysis res = analyze_measured(m, window, a.f0, a.bins, d_za);

  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  for (std::size_t w = 0; w < res.windows.size(); ++w) {
    char name[64];
    std::snprintf(name, sizeof name, "histogram_%s_%04zu.csv", window_name(window), w);
    auto os = open_out(dir / name);
    write_histogram_csv(os, normalize_density(res.histograms.windows[w]));
  }
  {
    auto os = open_out(dir / "histogram_combined.csv");
    write_histogram_csv(os, normalize_density(res.histograms.combined));
  }
  {
    auto os = open_out(dir / "modality.csv");
    os << "window,start_epoch_s,count,peak_count,bimodality_coefficient,verdict\n";
    for (std::size_t w = 0; w < res.windows.size(); ++w) {
      const auto& v = res.windows[w];
      os << w << "," << fmt(v.start) << "," << v.count << "," << v.modality.peak_count << ","
         << fmt(v.modality.bimodality_coefficient) << "," << verdict_name(v.modality.verdict) << "\n";
    }
    os << "combined," << fmt(res.histograms.window_start.front()) << "," << m.timestamps.size() << ","
       << res.combined.peak_count << "," << fmt(res.combined.bimodality_coefficient) << ","
       << verdict_name(res.combined.verdict) << "\n";
  }
  {
    auto os = open_out(dir / "drift.csv");
    os << "start_epoch_s,mean_deviation_hz,count\n";
    for (const auto& v : res.windows) os << fmt(v.start) << "," << fmt(v.mean_hz) << "," << v.count << "\n";
  }
  std::string summary;
  summary += "input=" + a.input + "\n";
  summary += "window=" + std::string(window_name(window)) + "\n";
  summary += "data_rows=" + std::to_string(m.data_rows) + "\n";
  summary += "bad_rows=" + std::to_string(m.bad_rows) + "\n";
  summary += "sanity_violations=" + std::to_string(m.sanity_violations) + "\n";
  summary += "samples=" + std::to_string(m.timestamps.size()) + "\n";
  summary += "cadence_s=" + fmt(m.cadence) + "\n";
  summary += "gaps=" + std::to_string(m.gaps.size()) + "\n";
  for (const auto& g : m.gaps) summary += "gap=" + fmt(g.from) + ".." + fmt(g.to) + "\n";
  summary += "windows=" + std::to_string(res.windows.size()) + "\n";
  std::size_t uni = 0, bi = 0;
  for (const auto& v : res.windows) {
    uni += v.modality.verdict == Verdict::Unimodal;
    bi += v.modality.verdict == Verdict::Bimodal;
  }
  summary += "windows_unimodal=" + std::to_string(uni) + "\n";
  summary += "windows_bimodal=" + std::to_string(bi) + "\n";
  summary += "combined_verdict=" + std::string(verdict_name(res.combined.verdict)) + "\n";
  if (res.fraction_outside) summary += "deadband_fraction_outside=" + fmt(*res.fraction_outside) + "\n";
  {
    auto os = open_out(dir / "summary.txt");
    os << summary;
  }
  out << summary;
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"freqlab: stochastic power-system frequency simulator and analyzer"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write samples, histogram and reports");
  simulate->add_option("--scenario", sim.scenario, "Scenario file or builtin name (a..i, si)")->required();
  simulate->add_option("--seed", sim.seed, "Override the scenario seed");
  simulate->add_option("--out-dir", sim.out_dir, "Output directory");
  simulate->add_option("--duration-override", sim.duration, "Override the sampled duration (s)");

  OracleArgs ora;
  auto* oracle = app.add_subcommand("oracle", "Evaluate closed-form moment curves as CSV t,value");
  oracle->set_help_flag("--help", "Print this help message and exit");
  oracle->add_option("--h", ora.h, "Inertia constant H (s)");
  oracle->add_option("--dl", ora.dl, "Load damping D_L (pu)");
  oracle->add_option("--alpha", ora.alpha, "OU mean-reversion rate (1/s)");
  oracle->add_option("--b", ora.b, "OU noise intensity (pu/sqrt(s))");
  oracle->add_option("--mu", ora.mu, "OU drift offset (pu/s)");
  oracle->add_option("--eta0", ora.eta0, "Initial load level (pu)");
  oracle->add_option("--rho", ora.rho, "Sinusoidal drive amplitude (pu/s)");
  oracle->add_option("--psi", ora.psi, "Sinusoidal drive angular frequency (rad/s)");
  oracle->add_option("--curve", ora.curve, "sigma | var | var0 | mean")
      ->check(CLI::IsMember({"sigma", "var", "var0", "mean"}));
  oracle->add_option("--t-max", ora.t_max, "Last time point (s)");
  oracle->add_option("--t-step", ora.t_step, "Time step (s)");
  oracle->add_flag("--asymptotic", ora.asymptotic, "Mean curve without transient terms");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Window histograms and modality of measured frequency data");
  analyze->add_option("--input", ana.input, "CSV with timestamp,frequency_hz")->required();
  analyze->add_option("--window", ana.window, "hourly | daily | full");
  analyze->add_option("--d-za-mhz", ana.d_za_mhz, "Dead-band half-width (mHz)");
  analyze->add_option("--f0-hz", ana.f0, "Nominal frequency (Hz)");
  analyze->add_option("--bins", ana.bins, "Histogram bins");
  analyze->add_option("--out-dir", ana.out_dir, "Output directory");

  auto* list = app.add_subcommand("list", "List the builtin scenarios");
  std::string show_name;
  auto* show = app.add_subcommand("show", "Print a scenario in file format");
  show->add_option("--scenario", show_name, "Scenario file or builtin name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (oracle->parsed()) return cmd_oracle(ora, out);
    if (analyze->parsed()) return cmd_analyze(ana, out, err);
    if (list->parsed()) {
      for (const auto& sc : builtin_scenarios())
        out << sc.label << "\tduration_s=" << sc.duration_s << "\tdt_s=" << sc.dt_s << "\n";
      return kOk;
    }
    if (show->parsed()) {
      out << serialize_scenario(load_scenario(show_name));
      return kOk;
    }
  } catch (const SimulationDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const InvariantViolation& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace freqlab::cli
