#pragma once

// Experiment configuration: a JSON document describing one scenario.
// docs/config-schema.md lists every key. Unknown keys are errors, and
// validation reports every problem found rather than the first.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oamx/conversion.hpp"
#include "oamx/measurement.hpp"
#include "oamx/metrics.hpp"
#include "oamx/states.hpp"
#include "oamx/tomography.hpp"

namespace oamx::harness {

using json = nlohmann::json;

enum class Scenario {
  QubitTomography,
  HybridFringes,
  HybridTomography,
  HybridWitness,
  OamFringes,
  OamChsh,
  EfficiencyBudget,
  ModeCapacity,
};

enum class Mode { Analytic, Sampled };

inline const std::vector<std::pair<Scenario, std::string_view>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string_view>> names{
      {Scenario::QubitTomography, "qubit-tomography"},
      {Scenario::HybridFringes, "hybrid-fringes"},
      {Scenario::HybridTomography, "hybrid-tomography"},
      {Scenario::HybridWitness, "hybrid-witness"},
      {Scenario::OamFringes, "oam-fringes"},
      {Scenario::OamChsh, "oam-chsh"},
      {Scenario::EfficiencyBudget, "efficiency-budget"},
      {Scenario::ModeCapacity, "mode-capacity"},
  };
  return names;
}

inline std::string_view to_string(Scenario s) {
  for (const auto& [k, v] : scenario_names())
    if (k == s) return v;
  return "unknown";
}

inline std::optional<Scenario> parse_scenario(std::string_view name) {
  for (const auto& [k, v] : scenario_names())
    if (v == name) return k;
  return std::nullopt;
}

inline std::string_view to_string(Mode m) { return m == Mode::Analytic ? "analytic" : "sampled"; }

inline std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "analytic") return Mode::Analytic;
  if (name == "sampled") return Mode::Sampled;
  return std::nullopt;
}

struct QubitEntry {
  std::string label;
  QubitSpec spec;
  std::optional<double> werner_v;
};

// One fringe: side a held at `fixed`, side b scanned over the config angles.
struct FringeScanSpec {
  std::string label;
  ProjectorSpec fixed = ProjectorSpec::label("R");
  std::optional<double> werner_v;
  std::optional<double> crosstalk_eps;
};

struct ConversionSpec {
  double xi_t = std::numbers::pi / 2.0;
  double eta = 1.0;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::QubitTomography;
  std::string description;
  Mode mode = Mode::Analytic;
  std::uint64_t seed = 1;
  int resamples = 500;

  NoiseModel noise{0.0, 0.0, 1.6e-9, 1.0, 0.0};
  double pair_rate = 0.0;   // coincidences/s reaching the analyzers before conversion loss
  double duration_s = 0.0;  // per setting
  ConversionSpec conversion;
  MultiStartOptions mle;

  std::string state;                 // Bell state name for two-photon scenarios
  std::vector<QubitEntry> states;    // qubit-tomography
  std::vector<double> angles;        // scanned side-b angles
  std::vector<FringeScanSpec> scans;
  std::array<ProjectorSpec, 4> bases_a = polarization_tomography_bases();
  std::array<ProjectorSpec, 4> bases_b = oam_tomography_bases();
  ChshSettings chsh;

  std::vector<EfficiencyStage> signal_stages;
  std::vector<EfficiencyStage> idler_stages;
  SpectralWindows spectral;
  double laser_conversion_efficiency = 0.0;
  double xi_t = std::numbers::pi / 2.0;

  std::vector<BeamGeometry> geometries;

  json source;  // the document as parsed, with CLI overrides applied
};

namespace detail {

class ConfigReader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
      if (!allowed.count(key)) fail(path + key, "unknown key");
  }

  const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    const json* v = find(obj, key);
    if (!v) {
      if (required) fail(path + key, "required field missing");
      return std::nullopt;
    }
    if (!v->is_number()) {
      fail(path + key, "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      fail(path + key, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<double> nonneg(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    auto d = number(obj, key, path, required);
    if (d && *d < 0.0) {
      fail(path + key, "must be >= 0");
      return std::nullopt;
    }
    return d;
  }

  std::optional<double> unit(const json& obj, const std::string& key, const std::string& path,
                             bool required) {
    auto d = number(obj, key, path, required);
    if (d && !(*d >= 0.0 && *d <= 1.0)) {
      fail(path + key, "must lie in [0,1]");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::string> string(const json& obj, const std::string& key,
                                    const std::string& path, bool required) {
    const json* v = find(obj, key);
    if (!v) {
      if (required) fail(path + key, "required field missing");
      return std::nullopt;
    }
    if (!v->is_string()) {
      fail(path + key, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  const json* object(const json& obj, const std::string& key, const std::string& path,
                     bool required) {
    const json* v = find(obj, key);
    if (!v) {
      if (required) fail(path + key, "required field missing");
      return nullptr;
    }
    if (!v->is_object()) {
      fail(path + key, "must be an object");
      return nullptr;
    }
    return v;
  }

  const json* array(const json& obj, const std::string& key, const std::string& path,
                    bool required) {
    const json* v = find(obj, key);
    if (!v) {
      if (required) fail(path + key, "required field missing");
      return nullptr;
    }
    if (!v->is_array()) {
      fail(path + key, "must be an array");
      return nullptr;
    }
    return v;
  }

  std::optional<complex> complex_value(const json& obj, const std::string& key,
                                       const std::string& path) {
    const json* v = find(obj, key);
    if (!v) {
      fail(path + key, "required field missing");
      return std::nullopt;
    }
    if (v->is_number()) return complex(v->get<double>(), 0.0);
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number())
      return complex((*v)[0].get<double>(), (*v)[1].get<double>());
    fail(path + key, "must be a number or [re, im]");
    return std::nullopt;
  }

  // "R" / "h" / ... or {"theta": rad}
  std::optional<ProjectorSpec> projector(const json& v, const std::string& path) {
    if (v.is_string()) {
      const auto name = v.get<std::string>();
      if (!named_qubit(name)) {
        fail(path, "unknown basis label '" + name + "'");
        return std::nullopt;
      }
      return ProjectorSpec::label(name);
    }
    if (v.is_object()) {
      check_keys(v, path + ".", {"theta"});
      if (auto t = number(v, "theta", path + ".", true)) return ProjectorSpec::theta(*t);
      return std::nullopt;
    }
    fail(path, "projector must be a basis label or {\"theta\": radians}");
    return std::nullopt;
  }

  // [a, b, ...] or {"start": a, "stop": b, "count": n}, endpoints inclusive.
  std::vector<double> angles(const json& obj, const std::string& key, const std::string& path) {
    std::vector<double> out;
    const json* v = find(obj, key);
    if (!v) {
      fail(path + key, "required field missing");
      return out;
    }
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
          fail(path + key + "[" + std::to_string(i) + "]", "must be a finite number");
          continue;
        }
        out.push_back(e.get<double>());
      }
      return out;
    }
    if (v->is_object()) {
      const std::string p = path + key + ".";
      check_keys(*v, p, {"start", "stop", "count"});
      auto start = number(*v, "start", p, true);
      auto stop = number(*v, "stop", p, true);
      auto count = number(*v, "count", p, true);
      if (count && (*count < 2 || std::floor(*count) != *count)) {
        fail(p + "count", "must be an integer >= 2");
        count.reset();
      }
      if (start && stop && count) {
        const int n = static_cast<int>(*count);
        for (int i = 0; i < n; ++i)
          out.push_back(*start + (*stop - *start) * static_cast<double>(i) / (n - 1));
      }
      return out;
    }
    fail(path + key, "must be an array or {start, stop, count}");
    return out;
  }

  std::vector<EfficiencyStage> stages(const json& obj, const std::string& key) {
    std::vector<EfficiencyStage> out;
    const json* arr = array(obj, key, "", true);
    if (!arr) return out;
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string p = key + "[" + std::to_string(i) + "].";
      const auto& e = (*arr)[i];
      if (!e.is_object()) {
        fail(p, "stage must be an object");
        continue;
      }
      check_keys(e, p, {"name", "eta"});
      auto name = string(e, "name", p, true);
      auto eta = unit(e, "eta", p, true);
      if (name && eta) out.push_back({*name, *eta});
    }
    return out;
  }
};

inline bool is_counting(Scenario s) {
  return s != Scenario::EfficiencyBudget && s != Scenario::ModeCapacity;
}

inline bool is_oam_label(std::string_view label) {
  return label == "R" || label == "L" || label == "H" || label == "V" || label == "A" ||
         label == "D";
}

inline bool is_fringe(Scenario s) {
  return s == Scenario::HybridFringes || s == Scenario::OamFringes || s == Scenario::HybridWitness;
}

}  // namespace detail

// Throws ValidationError listing every issue found.
inline ExperimentConfig parse_config(const json& doc) {
  detail::ConfigReader rd;
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");

  const auto scenario_name = rd.string(doc, "scenario", "", true);
  std::optional<Scenario> scenario;
  if (scenario_name) {
    scenario = parse_scenario(*scenario_name);
    if (!scenario) rd.fail("scenario", "unknown scenario '" + *scenario_name + "'");
  }
  if (!scenario) throw ValidationError(rd.issues);
  cfg.scenario = *scenario;
  const Scenario s = *scenario;

  std::set<std::string> allowed{"scenario", "description", "mode", "seed", "resamples"};
  if (detail::is_counting(s)) allowed.insert({"noise", "pair_rate", "duration", "conversion"});
  switch (s) {
    case Scenario::QubitTomography: allowed.insert({"states", "mle"}); break;
    case Scenario::HybridFringes:
    case Scenario::OamFringes:
    case Scenario::HybridWitness: allowed.insert({"state", "angles", "scans"}); break;
    case Scenario::HybridTomography: allowed.insert({"state", "bases_a", "bases_b", "mle"}); break;
    case Scenario::OamChsh: allowed.insert({"state", "chsh"}); break;
    case Scenario::EfficiencyBudget:
      allowed.insert(
          {"signal_stages", "idler_stages", "spectral", "laser_conversion_efficiency", "xi_t"});
      break;
    case Scenario::ModeCapacity: allowed.insert("geometries"); break;
  }
  rd.check_keys(doc, "", allowed);

  if (auto d = rd.string(doc, "description", "", false)) cfg.description = *d;
  if (auto m = rd.string(doc, "mode", "", false)) {
    if (auto mode = parse_mode(*m))
      cfg.mode = *mode;
    else
      rd.fail("mode", "must be 'analytic' or 'sampled'");
  }
  if (const json* seed = rd.find(doc, "seed")) {
    if (seed->is_number_unsigned())
      cfg.seed = seed->get<std::uint64_t>();
    else if (seed->is_number_integer() && seed->get<std::int64_t>() >= 0)
      cfg.seed = static_cast<std::uint64_t>(seed->get<std::int64_t>());
    else
      rd.fail("seed", "must be a non-negative integer");
  }
  if (auto r = rd.number(doc, "resamples", "", false)) {
    if (*r < kMinResamples || std::floor(*r) != *r)
      rd.fail("resamples", "must be an integer >= 100");
    else
      cfg.resamples = static_cast<int>(*r);
  }

  if (detail::is_counting(s)) {
    if (auto r = rd.nonneg(doc, "pair_rate", "", true)) cfg.pair_rate = *r;
    if (auto d = rd.nonneg(doc, "duration", "", true)) cfg.duration_s = *d;
    if (const json* n = rd.object(doc, "noise", "", false)) {
      rd.check_keys(*n, "noise.",
                    {"singles_a", "singles_b", "coincidence_window", "werner_v", "crosstalk_eps"});
      if (auto v = rd.nonneg(*n, "singles_a", "noise.", false)) cfg.noise.singles_a = *v;
      if (auto v = rd.nonneg(*n, "singles_b", "noise.", false)) cfg.noise.singles_b = *v;
      if (auto v = rd.nonneg(*n, "coincidence_window", "noise.", false))
        cfg.noise.coincidence_window = *v;
      if (auto v = rd.unit(*n, "werner_v", "noise.", false)) cfg.noise.werner_v = *v;
      if (auto v = rd.unit(*n, "crosstalk_eps", "noise.", false)) cfg.noise.crosstalk_eps = *v;
    }
    if (const json* c = rd.object(doc, "conversion", "", false)) {
      rd.check_keys(*c, "conversion.", {"xi_t", "eta"});
      if (auto v = rd.nonneg(*c, "xi_t", "conversion.", false)) cfg.conversion.xi_t = *v;
      if (auto v = rd.unit(*c, "eta", "conversion.", false)) cfg.conversion.eta = *v;
    }
  }

  if (s == Scenario::QubitTomography || s == Scenario::HybridTomography) {
    if (const json* m = rd.object(doc, "mle", "", false)) {
      rd.check_keys(*m, "mle.", {"starts", "seed", "max_evaluations"});
      if (auto v = rd.number(*m, "starts", "mle.", false)) {
        if (*v < 1 || std::floor(*v) != *v)
          rd.fail("mle.starts", "must be an integer >= 1");
        else
          cfg.mle.starts = static_cast<int>(*v);
      }
      if (auto v = rd.nonneg(*m, "seed", "mle.", false))
        cfg.mle.seed = static_cast<std::uint64_t>(*v);
      if (auto v = rd.number(*m, "max_evaluations", "mle.", false)) {
        if (*v < 100)
          rd.fail("mle.max_evaluations", "must be >= 100");
        else
          cfg.mle.local.max_evaluations = static_cast<std::size_t>(*v);
      }
    }
  }

  auto read_state = [&](std::string_view fallback) {
    cfg.state = std::string(fallback);
    if (auto st = rd.string(doc, "state", "", false)) {
      if (parse_bell_kind(*st))
        cfg.state = *st;
      else
        rd.fail("state", "unknown Bell state '" + *st + "'");
    }
  };

  switch (s) {
    case Scenario::QubitTomography: {
      const json* arr = rd.array(doc, "states", "", true);
      if (arr && arr->empty()) rd.fail("states", "must not be empty");
      for (std::size_t i = 0; arr && i < arr->size(); ++i) {
        const std::string p = "states[" + std::to_string(i) + "]";
        const auto& e = (*arr)[i];
        QubitEntry q;
        bool explicit_amplitudes = false;
        if (e.is_string()) {
          q.label = e.get<std::string>();
        } else if (e.is_object()) {
          rd.check_keys(e, p + ".", {"label", "alpha", "beta", "l", "werner_v"});
          if (auto l = rd.string(e, "label", p + ".", true)) q.label = *l;
          if (e.contains("alpha") || e.contains("beta")) {
            explicit_amplitudes = true;
            auto a = rd.complex_value(e, "alpha", p + ".");
            auto b = rd.complex_value(e, "beta", p + ".");
            if (a && b) {
              // Residual rounding within the input tolerance is renormalized away.
              const double n2 = std::norm(*a) + std::norm(*b);
              if (std::abs(n2 - 1.0) > tol::kInputNorm) {
                rd.fail(p, "|alpha|^2 + |beta|^2 must equal 1");
              } else {
                q.spec.alpha = *a / std::sqrt(n2);
                q.spec.beta = *b / std::sqrt(n2);
              }
            }
          }
          if (auto l = rd.number(e, "l", p + ".", false)) q.spec.l = static_cast<int>(*l);
          q.werner_v = rd.unit(e, "werner_v", p + ".", false);
        } else {
          rd.fail(p, "must be a basis label or an object");
          continue;
        }
        if (!explicit_amplitudes) {
          if (!detail::is_oam_label(q.label)) {
            rd.fail(p, "unknown OAM qubit '" + q.label + "' (use R, L, H, V, A, D or give alpha, beta)");
            continue;
          }
          const auto k = qubit_by_name(q.label);
          q.spec.alpha = k[0];
          q.spec.beta = k[1];
        }
        cfg.states.push_back(q);
      }
      break;
    }
    case Scenario::HybridFringes:
    case Scenario::OamFringes:
    case Scenario::HybridWitness: {
      read_state(s == Scenario::OamFringes ? "oam-minus" : "hybrid-plus");
      cfg.angles = rd.angles(doc, "angles", "");
      if (!cfg.angles.empty()) {
        const auto [lo, hi] = std::minmax_element(cfg.angles.begin(), cfg.angles.end());
        if (cfg.angles.size() < 5) rd.fail("angles", "need at least 5 angles");
        if (!(*hi - *lo >= std::numbers::pi - 1e-9))
          rd.fail("angles", "must span a full period of pi");
      }
      const json* arr = rd.array(doc, "scans", "", true);
      if (arr) {
        if (arr->empty()) rd.fail("scans", "must not be empty");
        if (s == Scenario::HybridWitness && arr->size() != 2)
          rd.fail("scans", "witness needs exactly two scans (d/a basis, then r/l basis)");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < arr->size(); ++i) {
          const std::string p = "scans[" + std::to_string(i) + "].";
          const auto& e = (*arr)[i];
          if (!e.is_object()) {
            rd.fail(p, "scan must be an object");
            continue;
          }
          rd.check_keys(e, p, {"label", "fixed", "werner_v", "crosstalk_eps"});
          FringeScanSpec sc;
          auto label = rd.string(e, "label", p, true);
          if (label) {
            if (!seen.insert(*label).second) rd.fail(p + "label", "duplicate scan label");
            sc.label = *label;
          }
          std::optional<ProjectorSpec> fixed;
          if (const json* f = rd.find(e, "fixed"))
            fixed = rd.projector(*f, p + "fixed");
          else
            rd.fail(p + "fixed", "required field missing");
          sc.werner_v = rd.unit(e, "werner_v", p, false);
          sc.crosstalk_eps = rd.unit(e, "crosstalk_eps", p, false);
          if (label && fixed) {
            sc.fixed = *fixed;
            cfg.scans.push_back(sc);
          }
        }
      }
      break;
    }
    case Scenario::HybridTomography: {
      read_state("hybrid-plus");
      auto read_bases = [&](const char* key, std::array<ProjectorSpec, 4>& into) {
        const json* arr = rd.array(doc, key, "", false);
        if (!arr) return;
        if (arr->size() != 4) {
          rd.fail(key, "must list exactly 4 bases");
          return;
        }
        std::vector<ProjectorSpec> tmp;
        for (std::size_t i = 0; i < 4; ++i)
          if (auto p = rd.projector((*arr)[i], std::string(key) + "[" + std::to_string(i) + "]"))
            tmp.push_back(*p);
        if (tmp.size() == 4) into = {tmp[0], tmp[1], tmp[2], tmp[3]};
      };
      read_bases("bases_a", cfg.bases_a);
      read_bases("bases_b", cfg.bases_b);
      break;
    }
    case Scenario::OamChsh: {
      read_state("oam-minus");
      if (const json* c = rd.object(doc, "chsh", "", false)) {
        rd.check_keys(*c, "chsh.", {"theta_a", "theta_a_prime", "theta_b", "theta_b_prime"});
        if (auto v = rd.number(*c, "theta_a", "chsh.", true)) cfg.chsh.theta_a = *v;
        if (auto v = rd.number(*c, "theta_a_prime", "chsh.", true)) cfg.chsh.theta_a_prime = *v;
        if (auto v = rd.number(*c, "theta_b", "chsh.", true)) cfg.chsh.theta_b = *v;
        if (auto v = rd.number(*c, "theta_b_prime", "chsh.", true)) cfg.chsh.theta_b_prime = *v;
      }
      break;
    }
    case Scenario::EfficiencyBudget: {
      cfg.signal_stages = rd.stages(doc, "signal_stages");
      cfg.idler_stages = rd.stages(doc, "idler_stages");
      if (const json* sp = rd.object(doc, "spectral", "", true)) {
        rd.check_keys(*sp, "spectral.", {"bw_source_nm", "bw_sfg_nm"});
        auto src = rd.number(*sp, "bw_source_nm", "spectral.", true);
        auto sfg = rd.number(*sp, "bw_sfg_nm", "spectral.", true);
        if (src && !(*src > 0.0)) rd.fail("spectral.bw_source_nm", "must be > 0");
        if (sfg && !(*sfg > 0.0)) rd.fail("spectral.bw_sfg_nm", "must be > 0");
        if (src && sfg) cfg.spectral = {*src, *sfg};
      }
      if (auto v = rd.unit(doc, "laser_conversion_efficiency", "", true))
        cfg.laser_conversion_efficiency = *v;
      if (auto v = rd.nonneg(doc, "xi_t", "", false)) cfg.xi_t = *v;
      break;
    }
    case Scenario::ModeCapacity: {
      const json* arr = rd.array(doc, "geometries", "", true);
      if (arr) {
        if (arr->empty()) rd.fail("geometries", "must not be empty");
        for (std::size_t i = 0; i < arr->size(); ++i) {
          const std::string p = "geometries[" + std::to_string(i) + "].";
          const auto& e = (*arr)[i];
          if (!e.is_object()) {
            rd.fail(p, "geometry must be an object");
            continue;
          }
          rd.check_keys(e, p, {"w0_um", "w_max_um"});
          auto w0 = rd.number(e, "w0_um", p, true);
          auto wm = rd.number(e, "w_max_um", p, true);
          if (w0 && !(*w0 > 0.0)) rd.fail(p + "w0_um", "must be > 0");
          if (w0 && wm && *wm < *w0) rd.fail(p + "w_max_um", "must be >= w0_um");
          if (w0 && wm) cfg.geometries.push_back({*w0, *wm});
        }
      }
      break;
    }
  }

  if (!rd.issues.empty()) throw ValidationError(rd.issues);
  return cfg;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config", path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_json_file(path));
}

}  // namespace oamx::harness
