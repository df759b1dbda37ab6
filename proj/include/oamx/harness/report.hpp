#pragma once

// Structured scenario results and their JSON / CSV serializations.
// docs/report-format.md documents the schema and every CSV header.

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "oamx/core.hpp"
#include "oamx/measurement.hpp"
#include "oamx/metrics.hpp"
#include "oamx/version.hpp"

namespace oamx::harness {

using ojson = nlohmann::ordered_json;

struct ReportMetric {
  std::string name;
  MetricWithError raw;
  MetricWithError net;

  friend bool operator==(const ReportMetric&, const ReportMetric&) = default;
};

struct ReportMatrix {
  std::string label;
  std::vector<std::vector<double>> real;
  std::vector<std::vector<double>> imag;

  friend bool operator==(const ReportMatrix&, const ReportMatrix&) = default;
};

// kind is "fringe", "tomography" or "chsh".
struct RecordGroup {
  std::string label;
  std::string kind;
  std::vector<CoincidenceRecord> records;

  friend bool operator==(const RecordGroup&, const RecordGroup&) = default;
};

struct ResultsReport {
  std::string toolkit = kToolkitName;
  std::string version = kVersion;
  std::string scenario;
  std::string mode;
  std::uint64_t seed = 0;
  std::string description;
  nlohmann::json config;
  std::vector<ReportMetric> metrics;
  std::vector<ReportMatrix> density_matrices;
  std::vector<RecordGroup> record_groups;
  std::vector<std::string> notes;
  std::string generated_at;  // UTC; the only field allowed to differ between identical runs

  const ReportMetric* metric(std::string_view name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }

  friend bool operator==(const ResultsReport&, const ResultsReport&) = default;
};

template <int N>
ReportMatrix to_report_matrix(std::string label, const DensityMatrix<N>& rho) {
  ReportMatrix m{std::move(label), {}, {}};
  for (int i = 0; i < N; ++i) {
    m.real.emplace_back();
    m.imag.emplace_back();
    for (int j = 0; j < N; ++j) {
      m.real.back().push_back(rho(i, j).real());
      m.imag.back().push_back(rho(i, j).imag());
    }
  }
  return m;
}

namespace detail {

template <int N>
void check_physical_matrix(const ReportMatrix& m) {
  CMatrix<N> c;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      c(i, j) = complex(m.real[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                        m.imag[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  DensityMatrix<N> validated(c);
  (void)validated;
}

}  // namespace detail

// Throws ValidationError unless the matrix is a 2x2 or 4x4 density matrix.
inline void check_physical(const ReportMatrix& m) {
  const std::size_t n = m.real.size();
  bool square = (n == 2 || n == 4) && m.imag.size() == n;
  for (std::size_t i = 0; square && i < n; ++i)
    square = m.real[i].size() == n && m.imag[i].size() == n;
  if (!square) throw ValidationError("density matrix '" + m.label + "' must be 2x2 or 4x4");
  if (n == 2)
    detail::check_physical_matrix<2>(m);
  else
    detail::check_physical_matrix<4>(m);
}

// ---- JSON ----------------------------------------------------------------

inline ojson to_json(const ProjectorSpec& p) {
  if (auto t = p.theta_value()) return ojson{{"theta", *t}};
  return ojson(*p.label_value());
}

inline ProjectorSpec projector_from_json(const nlohmann::json& j) {
  if (j.is_string()) return ProjectorSpec::label(j.get<std::string>());
  if (j.is_object() && j.contains("theta")) return ProjectorSpec::theta(j.at("theta").get<double>());
  throw ValidationError("bad projector in report");
}

inline ojson to_json(const MetricWithError& m) {
  return ojson{{"value", m.value}, {"sigma", m.sigma}, {"resamples", m.resamples},
               {"dropped", m.dropped}};
}

inline MetricWithError metric_from_json(const nlohmann::json& j) {
  return {j.at("value").get<double>(), j.at("sigma").get<double>(), j.at("resamples").get<int>(),
          j.at("dropped").get<int>()};
}

inline ojson to_json(const CoincidenceRecord& r) {
  const auto net = r.net();
  ojson j;
  j["side_a"] = to_json(r.setting.side_a);
  j["side_b"] = r.setting.side_b ? to_json(*r.setting.side_b) : ojson(nullptr);
  j["duration_s"] = r.duration_s;
  j["expected"] = r.expected;
  j["sampled"] = r.sampled ? ojson(*r.sampled) : ojson(nullptr);
  j["accidental"] = r.accidental;
  j["raw"] = r.raw();
  j["net"] = net.value;
  j["clamped"] = net.clamped;
  return j;
}

inline CoincidenceRecord record_from_json(const nlohmann::json& j) {
  CoincidenceRecord r{{projector_from_json(j.at("side_a")), std::nullopt}, 0.0, 0.0, std::nullopt,
                      0.0};
  if (!j.at("side_b").is_null()) r.setting.side_b = projector_from_json(j.at("side_b"));
  r.duration_s = j.at("duration_s").get<double>();
  r.expected = j.at("expected").get<double>();
  if (!j.at("sampled").is_null()) r.sampled = j.at("sampled").get<std::int64_t>();
  r.accidental = j.at("accidental").get<double>();
  return r;
}

inline ojson to_json(const ResultsReport& r) {
  ojson j;
  j["toolkit"] = r.toolkit;
  j["version"] = r.version;
  j["scenario"] = r.scenario;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["description"] = r.description;
  j["generated_at"] = r.generated_at;
  ojson metrics = ojson::array();
  for (const auto& m : r.metrics)
    metrics.push_back(ojson{{"name", m.name}, {"raw", to_json(m.raw)}, {"net", to_json(m.net)}});
  j["metrics"] = std::move(metrics);
  ojson mats = ojson::array();
  for (const auto& m : r.density_matrices)
    mats.push_back(ojson{{"label", m.label}, {"real", m.real}, {"imag", m.imag}});
  j["density_matrices"] = std::move(mats);
  ojson groups = ojson::array();
  for (const auto& g : r.record_groups) {
    ojson recs = ojson::array();
    for (const auto& rec : g.records) recs.push_back(to_json(rec));
    groups.push_back(ojson{{"label", g.label}, {"kind", g.kind}, {"records", std::move(recs)}});
  }
  j["record_groups"] = std::move(groups);
  j["notes"] = r.notes;
  j["config"] = ojson::parse(r.config.dump());
  return j;
}

// Inverse of to_json. Every density matrix is re-validated.
inline ResultsReport report_from_json(const nlohmann::json& j) {
  try {
    ResultsReport r;
    r.toolkit = j.at("toolkit").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.scenario = j.at("scenario").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.description = j.at("description").get<std::string>();
    r.generated_at = j.at("generated_at").get<std::string>();
    for (const auto& m : j.at("metrics"))
      r.metrics.push_back({m.at("name").get<std::string>(), metric_from_json(m.at("raw")),
                           metric_from_json(m.at("net"))});
    for (const auto& m : j.at("density_matrices")) {
      ReportMatrix rm{m.at("label").get<std::string>(),
                      m.at("real").get<std::vector<std::vector<double>>>(),
                      m.at("imag").get<std::vector<std::vector<double>>>()};
      check_physical(rm);
      r.density_matrices.push_back(std::move(rm));
    }
    for (const auto& g : j.at("record_groups")) {
      RecordGroup rg{g.at("label").get<std::string>(), g.at("kind").get<std::string>(), {}};
      for (const auto& rec : g.at("records")) rg.records.push_back(record_from_json(rec));
      r.record_groups.push_back(std::move(rg));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.config = j.at("config");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

// ---- CSV -----------------------------------------------------------------

inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string describe(const ProjectorSpec& p) {
  if (auto t = p.theta_value()) return "theta=" + format_number(*t);
  return *p.label_value();
}

enum class Format { Json, Csv };

struct EmittedFile {
  std::string name;
  std::string content;
};

namespace detail {

inline std::string csv_fringe(const RecordGroup& g) {
  std::string out = "theta_rad,expected,sampled,accidental,duration_s\n";
  for (const auto& r : g.records) {
    const auto theta = r.setting.side_b ? r.setting.side_b->theta_value() : std::nullopt;
    out += (theta ? format_number(*theta) : std::string()) + ",";
    out += format_number(r.expected) + ",";
    out += (r.sampled ? std::to_string(*r.sampled) : std::string()) + ",";
    out += format_number(r.accidental) + "," + format_number(r.duration_s) + "\n";
  }
  return out;
}

inline std::string csv_settings(const RecordGroup& g) {
  std::string out = "side_a,side_b,expected,sampled,accidental,net,duration_s\n";
  for (const auto& r : g.records) {
    out += describe(r.setting.side_a) + ",";
    out += (r.setting.side_b ? describe(*r.setting.side_b) : std::string()) + ",";
    out += format_number(r.expected) + ",";
    out += (r.sampled ? std::to_string(*r.sampled) : std::string()) + ",";
    out += format_number(r.accidental) + "," + format_number(r.net().value) + ",";
    out += format_number(r.duration_s) + "\n";
  }
  return out;
}

inline std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return s;
}

}  // namespace detail

// JSON: one file, report.json. CSV: metrics.csv, one file per record group,
// one per density matrix, and fidelities.csv for qubit tomography.
inline std::vector<EmittedFile> emit_report(const ResultsReport& r, Format format) {
  std::vector<EmittedFile> files;
  if (format == Format::Json) {
    files.push_back({"report.json", to_json(r).dump(2) + "\n"});
    return files;
  }
  std::string metrics = "name,raw_value,raw_sigma,net_value,net_sigma,resamples\n";
  for (const auto& m : r.metrics)
    metrics += m.name + "," + format_number(m.raw.value) + "," + format_number(m.raw.sigma) + "," +
               format_number(m.net.value) + "," + format_number(m.net.sigma) + "," +
               std::to_string(m.raw.resamples) + "\n";
  files.push_back({"metrics.csv", std::move(metrics)});

  if (r.scenario == "qubit-tomography") {
    std::string table = "state,raw_fidelity,raw_sigma,net_fidelity,net_sigma\n";
    for (const auto& m : r.metrics) {
      if (m.name.rfind("fidelity/", 0) != 0) continue;
      table += m.name.substr(9) + "," + format_number(m.raw.value) + "," +
               format_number(m.raw.sigma) + "," + format_number(m.net.value) + "," +
               format_number(m.net.sigma) + "\n";
    }
    files.push_back({"fidelities.csv", std::move(table)});
  }
  for (const auto& g : r.record_groups) {
    const std::string name = g.kind + "_" + detail::file_safe(g.label) + ".csv";
    files.push_back({name, g.kind == "fringe" ? detail::csv_fringe(g) : detail::csv_settings(g)});
  }
  for (const auto& m : r.density_matrices) {
    std::string out = "row,col,real,imag\n";
    for (std::size_t i = 0; i < m.real.size(); ++i)
      for (std::size_t k = 0; k < m.real[i].size(); ++k)
        out += std::to_string(i) + "," + std::to_string(k) + "," + format_number(m.real[i][k]) +
               "," + format_number(m.imag[i][k]) + "\n";
    files.push_back({"density_" + detail::file_safe(m.label) + ".csv", std::move(out)});
  }
  return files;
}

// Writes every emitted file under `dir` (created if missing). Returns the paths.
inline std::vector<std::string> write_report(const ResultsReport& r, Format format,
                                             const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory", dir);
  std::vector<std::string> paths;
  for (const auto& f : emit_report(r, format)) {
    const auto path = (std::filesystem::path(dir) / f.name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report", path);
    out << f.content;
    if (!out) throw IoError("write failed", path);
    paths.push_back(path);
  }
  return paths;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace oamx::harness
