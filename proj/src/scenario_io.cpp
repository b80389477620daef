// Scenario files: flat `key = value` lines grouped in [sections], with the
// unit spelled in every dimensional key name. `#` starts a comment.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "freqlab/errors.hpp"
#include "freqlab/scenario.hpp"

namespace freqlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  const std::string& source;
  int line;
  std::string field;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source + ":" + std::to_string(line) + ": field '" + field + "': " + what, line, field);
  }
  double number(const std::string& v) const {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end) fail("expected a number, got '" + v + "'");
    return x;
  }
  std::uint64_t integer(const std::string& v) const {
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto res = std::from_chars(v.data(), end, x);
    if (res.ec != std::errc() || res.ptr != end) fail("expected a non-negative integer, got '" + v + "'");
    return x;
  }
  bool boolean(const std::string& v) const {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail("expected true or false, got '" + v + "'");
  }
};

using Setter = std::function<void(GridScenario&, const std::string& value, const Ctx&)>;

// One accepted spelling of a field: stem plus unit suffix ("" when unitless).
struct Field {
  std::string stem;
  std::string unit;
  Setter set;
  std::string key() const { return unit.empty() ? stem : stem + "_" + unit; }
};

std::vector<Field> fields_for(const std::string& section) {
  std::vector<Field> f;
  auto num = [](auto member) {
    return [member](GridScenario& sc, const std::string& v, const Ctx& c) { member(sc) = c.number(v); };
  };
  if (section.empty()) {
    f.push_back({"label", "", [](GridScenario& sc, const std::string& v, const Ctx&) { sc.label = v; }});
  } else if (section == "run") {
    f.push_back({"duration", "s", num([](GridScenario& s) -> double& { return s.duration_s; })});
    f.push_back({"dt", "s", num([](GridScenario& s) -> double& { return s.dt_s; })});
    f.push_back({"warmup", "s", num([](GridScenario& s) -> double& { return s.warmup_s; })});
    f.push_back({"cadence", "s", num([](GridScenario& s) -> double& { return s.cadence_s; })});
    f.push_back({"inertia_multiplier", "", num([](GridScenario& s) -> double& { return s.inertia_multiplier; })});
    f.push_back({"seed", "", [](GridScenario& sc, const std::string& v, const Ctx& c) { sc.seed = c.integer(v); }});
  } else if (section == "system") {
    f.push_back({"s_base", "mva", num([](GridScenario& s) -> double& { return s.s_base_mva; })});
    f.push_back({"f0", "hz", num([](GridScenario& s) -> double& { return s.f0_hz; })});
    f.push_back({"d_l", "pu", num([](GridScenario& s) -> double& { return s.d_l_pu; })});
  } else if (section == "governor") {
    f.push_back({"droop", "pu", num([](GridScenario& s) -> double& { return s.governor.droop; })});
    f.push_back({"t_servo", "s", num([](GridScenario& s) -> double& { return s.governor.t_servo; })});
    f.push_back({"d_za", "hz", num([](GridScenario& s) -> double& { return s.governor.d_za_hz; })});
    f.push_back({"d_za", "mhz", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   sc.governor.d_za_hz = c.number(v) / 1000.0;
                 }});
    // pu on the frequency base in effect when the file is resolved (f0 below).
    f.push_back({"d_za", "pu", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   sc.governor.d_za_hz = c.number(v) * sc.f0_hz;
                 }});
    f.push_back({"p_ref", "pu", num([](GridScenario& s) -> double& { return s.governor.p_ref; })});
    f.push_back({"p_max", "pu", num([](GridScenario& s) -> double& { return s.governor.p_max; })});
    f.push_back({"limits_enabled", "", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   sc.governor.limits_enabled = c.boolean(v);
                 }});
  } else if (section == "agc") {
    f.push_back({"enabled", "", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   if (!c.boolean(v)) sc.agc.reset();
                 }});
    f.push_back({"k_agc", "pu", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   if (sc.agc) sc.agc->k_agc = c.number(v);
                 }});
    f.push_back({"p_agc0", "pu", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   if (sc.agc) sc.agc->p_agc = c.number(v);
                 }});
    f.push_back({"unit", "", [](GridScenario& sc, const std::string& v, const Ctx&) { sc.agc_unit = v; }});
  } else if (section == "stochastic_load") {
    f.push_back({"p_l0", "mw", num([](GridScenario& s) -> double& { return s.stochastic_load.p_l0_mw; })});
    f.push_back({"mu", "pu", num([](GridScenario& s) -> double& { return s.stochastic_load.ou.mu; })});
    f.push_back({"alpha", "per_s", num([](GridScenario& s) -> double& { return s.stochastic_load.ou.alpha; })});
    f.push_back({"b", "pu", num([](GridScenario& s) -> double& { return s.stochastic_load.ou.b; })});
    f.push_back({"eta0", "pu", num([](GridScenario& s) -> double& { return s.stochastic_load.ou.eta0; })});
    f.push_back({"gamma", "", num([](GridScenario& s) -> double& { return s.stochastic_load.gamma; })});
  } else if (section == "drifting_load") {
    f.push_back({"enabled", "", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   if (!c.boolean(v)) sc.drifting_load.reset();
                 }});
    auto dl = [](auto member) {
      return [member](GridScenario& sc, const std::string& v, const Ctx& c) {
        if (sc.drifting_load) member(*sc.drifting_load) = c.number(v);
      };
    };
    f.push_back({"p_d0", "mw", dl([](DriftingLoad& d) -> double& { return d.p_d0_mw; })});
    f.push_back({"amplitude", "pu", dl([](DriftingLoad& d) -> double& { return d.amplitude; })});
    f.push_back({"timescale", "s", dl([](DriftingLoad& d) -> double& { return d.timescale_s; })});
  } else if (section == "synthetic_inertia") {
    f.push_back({"enabled", "", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   if (!c.boolean(v)) sc.synthetic_inertia.reset();
                 }});
    auto si = [](auto member) {
      return [member](GridScenario& sc, const std::string& v, const Ctx& c) {
        if (sc.synthetic_inertia) member(*sc.synthetic_inertia) = c.number(v);
      };
    };
    f.push_back({"p_max", "mw", si([](SyntheticInertia& s) -> double& { return s.p_max_mw; })});
    f.push_back({"e_cap", "mj", si([](SyntheticInertia& s) -> double& { return s.e_cap_mj; })});
    f.push_back({"e0", "mj", si([](SyntheticInertia& s) -> double& { return s.e_state_mj; })});
    f.push_back({"k_derivative", "mw_s_per_hz", si([](SyntheticInertia& s) -> double& { return s.k_derivative; })});
    f.push_back({"k_proportional", "mw_per_hz", si([](SyntheticInertia& s) -> double& { return s.k_proportional; })});
    f.push_back({"filter_fc", "hz", si([](SyntheticInertia& s) -> double& { return s.filter_fc_hz; })});
    f.push_back({"pv_mean", "mw", si([](SyntheticInertia& s) -> double& { return s.pv_mean_mw; })});
  } else if (section == "histogram") {
    f.push_back({"bins", "", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   sc.histogram.bins = static_cast<std::size_t>(c.integer(v));
                 }});
    f.push_back({"half_range", "hz", num([](GridScenario& s) -> double& { return s.histogram.half_range_hz; })});
    f.push_back({"half_range", "mhz", [](GridScenario& sc, const std::string& v, const Ctx& c) {
                   sc.histogram.half_range_hz = c.number(v) / 1000.0;
                 }});
  }
  return f;
}

std::vector<Field> machine_fields(std::size_t index) {
  std::vector<Field> f;
  f.push_back({"h", "s", [index](GridScenario& sc, const std::string& v, const Ctx& c) {
                 sc.machines[index].h_s = c.number(v);
               }});
  f.push_back({"rating", "mva", [index](GridScenario& sc, const std::string& v, const Ctx& c) {
                 sc.machines[index].rating_mva = c.number(v);
               }});
  f.push_back({"governor", "", [index](GridScenario& sc, const std::string& v, const Ctx& c) {
                 sc.machines[index].governor = c.boolean(v);
               }});
  return f;
}

bool known_section(const std::string& s) {
  static const char* names[] = {"run", "system", "governor", "agc", "stochastic_load",
                                "drifting_load", "synthetic_inertia", "histogram"};
  for (const char* n : names)
    if (s == n) return true;
  return false;
}

void apply_field(const std::vector<Field>& fields, GridScenario& sc, const std::string& key,
                 const std::string& value, const Ctx& ctx) {
  for (const auto& f : fields)
    if (f.key() == key) return f.set(sc, value, ctx);
  // Same quantity under a different unit suffix is a unit error, not a typo.
  for (const auto& f : fields) {
    if (f.unit.empty() || key.rfind(f.stem + "_", 0) != 0) continue;
    std::string accepted;
    for (const auto& g : fields)
      if (g.stem == f.stem) accepted += (accepted.empty() ? "" : ", ") + g.key();
    throw UnitMismatch(ctx.source + ":" + std::to_string(ctx.line) + ": field '" + key +
                       "' has an unsupported unit; accepted: " + accepted);
  }
  ctx.fail("unknown key");
}

}  // namespace

GridScenario parse_scenario(std::istream& in, const std::string& source) {
  GridScenario sc;
  sc.machines = ieee14_machines();
  sc.governor.d_za_hz = 0.036;

  std::string section;
  std::string line;
  int lineno = 0;
  bool any_key = false;
  bool machines_reset = false;
  std::size_t machine = 0;
  // d_za_pu depends on f0, which may come later in the file: resolve at the end.
  std::optional<std::pair<std::string, Ctx>> deferred_dza_pu;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source + ":" + std::to_string(lineno) + ": unterminated section header", lineno, line);
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("machine.", 0) == 0) {
        const std::string name = section.substr(8);
        if (name.empty()) throw ParseError(source + ":" + std::to_string(lineno) + ": machine section needs a name", lineno, section);
        if (!machines_reset) {
          sc.machines.clear();
          machines_reset = true;
        }
        for (const auto& m : sc.machines)
          if (m.name == name) throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate machine '" + name + "'", lineno, section);
        sc.machines.push_back({name, 5.0, 100.0, true});
        machine = sc.machines.size() - 1;
      } else if (!known_section(section)) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": unknown section [" + section + "]", lineno, section);
      }
      if (section == "agc" && !sc.agc) sc.agc = Agc{0.01, 0.0, true, 1};
      if (section == "drifting_load" && !sc.drifting_load) sc.drifting_load = DriftingLoad{};
      if (section == "synthetic_inertia" && !sc.synthetic_inertia) sc.synthetic_inertia = SyntheticInertia{};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'", lineno, line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Ctx ctx{source, lineno, key};
    if (value.empty()) ctx.fail("missing value");

    if (section.empty() && key == "base") {
      if (any_key) ctx.fail("'base' must be the first key of the file");
      try {
        sc = builtin_scenario(value);
      } catch (const InvalidArgument& e) {
        ctx.fail(e.what());
      }
      any_key = true;
      continue;
    }
    any_key = true;
    if (section == "governor" && key == "d_za_pu") {
      deferred_dza_pu.emplace(value, ctx);
      continue;
    }
    if (section.rfind("machine.", 0) == 0)
      apply_field(machine_fields(machine), sc, key, value, ctx);
    else
      apply_field(fields_for(section), sc, key, value, ctx);
  }
  if (deferred_dza_pu) sc.governor.d_za_hz = deferred_dza_pu->second.number(deferred_dza_pu->first) * sc.f0_hz;
  sc.validate();
  return sc;
}

GridScenario load_scenario(const std::string& path_or_builtin) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(path_or_builtin, ec)) {
    std::ifstream in(path_or_builtin);
    if (!in) throw InvalidArgument("cannot open scenario file '" + path_or_builtin + "'");
    return parse_scenario(in, path_or_builtin);
  }
  try {
    return builtin_scenario(path_or_builtin);
  } catch (const InvalidArgument&) {
    throw InvalidArgument("'" + path_or_builtin + "' is neither a scenario file nor a builtin scenario");
  }
}

std::string serialize_scenario(const GridScenario& sc) {
  std::ostringstream os;
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto boolean = [](bool b) { return b ? "true" : "false"; };
  os << "label = " << sc.label << "\n\n[run]\n"
     << "duration_s = " << num(sc.duration_s) << "\n"
     << "dt_s = " << num(sc.dt_s) << "\n"
     << "warmup_s = " << num(sc.warmup_s) << "\n"
     << "cadence_s = " << num(sc.cadence_s) << "\n"
     << "seed = " << sc.seed << "\n"
     << "inertia_multiplier = " << num(sc.inertia_multiplier) << "\n\n[system]\n"
     << "s_base_mva = " << num(sc.s_base_mva) << "\n"
     << "f0_hz = " << num(sc.f0_hz) << "\n"
     << "d_l_pu = " << num(sc.d_l_pu) << "\n\n[governor]\n"
     << "droop_pu = " << num(sc.governor.droop) << "\n"
     << "t_servo_s = " << num(sc.governor.t_servo) << "\n"
     << "d_za_hz = " << num(sc.governor.d_za_hz) << "\n"
     << "p_ref_pu = " << num(sc.governor.p_ref) << "\n"
     << "limits_enabled = " << boolean(sc.governor.limits_enabled) << "\n"
     << "p_max_pu = " << num(sc.governor.p_max) << "\n";
  for (const auto& m : sc.machines)
    os << "\n[machine." << m.name << "]\n"
       << "h_s = " << num(m.h_s) << "\n"
       << "rating_mva = " << num(m.rating_mva) << "\n"
       << "governor = " << boolean(m.governor) << "\n";
  if (sc.agc)
    os << "\n[agc]\n"
       << "k_agc_pu = " << num(sc.agc->k_agc) << "\n"
       << "p_agc0_pu = " << num(sc.agc->p_agc) << "\n"
       << "unit = " << sc.agc_unit << "\n";
  const auto& sl = sc.stochastic_load;
  os << "\n[stochastic_load]\n"
     << "p_l0_mw = " << num(sl.p_l0_mw) << "\n"
     << "mu_pu = " << num(sl.ou.mu) << "\n"
     << "alpha_per_s = " << num(sl.ou.alpha) << "\n"
     << "b_pu = " << num(sl.ou.b) << "\n"
     << "eta0_pu = " << num(sl.ou.eta0) << "\n"
     << "gamma = " << num(sl.gamma) << "\n";
  if (sc.drifting_load)
    os << "\n[drifting_load]\n"
       << "p_d0_mw = " << num(sc.drifting_load->p_d0_mw) << "\n"
       << "amplitude_pu = " << num(sc.drifting_load->amplitude) << "\n"
       << "timescale_s = " << num(sc.drifting_load->timescale_s) << "\n";
  if (sc.synthetic_inertia) {
    const auto& si = *sc.synthetic_inertia;
    os << "\n[synthetic_inertia]\n"
       << "p_max_mw = " << num(si.p_max_mw) << "\n"
       << "e_cap_mj = " << num(si.e_cap_mj) << "\n"
       << "e0_mj = " << num(si.e_state_mj) << "\n"
       << "k_derivative_mw_s_per_hz = " << num(si.k_derivative) << "\n"
       << "k_proportional_mw_per_hz = " << num(si.k_proportional) << "\n"
       << "filter_fc_hz = " << num(si.filter_fc_hz) << "\n"
       << "pv_mean_mw = " << num(si.pv_mean_mw) << "\n";
  }
  os << "\n[histogram]\n"
     << "bins = " << sc.histogram.bins << "\n"
     << "half_range_hz = " << num(sc.histogram.half_range_hz) << "\n";
  return os.str();
}

}  // namespace freqlab
