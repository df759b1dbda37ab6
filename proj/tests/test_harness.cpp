#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "oamx/harness/config.hpp"
#include "oamx/harness/report.hpp"
#include "oamx/harness/run.hpp"

using namespace oamx;
using namespace oamx::harness;
using Catch::Approx;

namespace {

json golden(const std::string& name) {
  return read_json_file(std::string(OAMX_CONFIG_DIR) + "/" + name);
}

ResultsReport run_doc(const json& doc) { return run_scenario(parse_config(doc)); }

const ReportMetric& metric(const ResultsReport& r, const std::string& name) {
  const auto* m = r.metric(name);
  REQUIRE(m != nullptr);
  return *m;
}

std::string stable_json(ResultsReport r) {
  r.generated_at.clear();
  return emit_report(r, Format::Json).front().content;
}

}  // namespace

TEST_CASE("noiseless qubit tomography of R has unit fidelity", "[harness]") {
  const auto r = run_doc(json::parse(R"({
    "scenario": "qubit-tomography", "pair_rate": 50, "duration": 100, "states": ["R"]
  })"));
  CHECK(metric(r, "fidelity/R").raw.value == Approx(1.0).margin(1e-6));
  CHECK(metric(r, "fidelity/R").raw.sigma == 0.0);
  REQUIRE(r.record_groups.size() == 1);
  CHECK(r.record_groups[0].records.size() == 4);
  CHECK(r.record_groups[0].records[0].expected == Approx(5000.0));
  CHECK_FALSE(r.record_groups[0].records[0].sampled.has_value());
  CHECK(r.density_matrices.size() == 2);
}

TEST_CASE("hybrid witness golden config gives W = 1.805", "[harness]") {
  const auto r = run_doc(golden("hybrid-witness.json"));
  CHECK(metric(r, "witness").raw.value == Approx(1.805).margin(1e-9));
  CHECK(metric(r, "visibility/d").raw.value == Approx(0.949).margin(1e-9));
  CHECK(metric(r, "visibility/r").raw.value == Approx(0.856).margin(1e-9));
}

TEST_CASE("background subtraction raises CHSH toward the net preset", "[harness]") {
  const auto r = run_doc(golden("oam-chsh-fitted.json"));
  const auto& s = metric(r, "abs_S");
  CHECK(s.raw.value == Approx(2.39).margin(0.01));
  CHECK(s.net.value == Approx(2.50).margin(0.01));
  CHECK(metric(r, "S").raw.value < 0.0);
}

TEST_CASE("conversion loss scales counts but not fidelity", "[harness]") {
  auto doc = json::parse(R"({
    "scenario": "qubit-tomography", "pair_rate": 50, "duration": 100, "states": ["H"],
    "conversion": {"xi_t": 0.7853981633974483, "eta": 0.002}
  })");
  const auto r = run_doc(doc);
  CHECK(r.record_groups[0].records[0].expected == Approx(5000.0 * 0.5 * 0.002 * 0.5));
  CHECK(metric(r, "fidelity/H").raw.value == Approx(1.0).margin(1e-6));
}

TEST_CASE("sampled runs are reproducible and seed dependent", "[harness]") {
  auto doc = golden("oam-chsh.json");
  const auto a = run_doc(doc);
  const auto b = run_doc(doc);
  CHECK(stable_json(a) == stable_json(b));
  doc["seed"] = 6;
  const auto c = run_doc(doc);
  CHECK(stable_json(a) != stable_json(c));
  for (const auto& rec : a.record_groups[0].records) CHECK(rec.sampled.has_value());
  CHECK(metric(a, "abs_S").raw.sigma > 0.0);
  CHECK(metric(a, "abs_S").raw.resamples + metric(a, "abs_S").raw.dropped == 500);
}

TEST_CASE("analytic metrics match sampled means across 20 seeds", "[harness][statistics]") {
  auto doc = golden("hybrid-fringes.json");
  doc["resamples"] = 100;
  doc["mode"] = "analytic";
  const auto exact = run_doc(doc);
  doc["mode"] = "sampled";
  for (const std::string name : {"visibility/d", "visibility/r"}) {
    double sum = 0.0;
    double sigma = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      doc["seed"] = seed;
      const auto r = run_doc(doc);
      sum += metric(r, name).raw.value;
      sigma += metric(r, name).raw.sigma;
    }
    const double mean = sum / 20;
    const double per_run_sigma = sigma / 20;
    INFO(name << " mean " << mean << " exact " << metric(exact, name).raw.value);
    CHECK(std::abs(mean - metric(exact, name).raw.value) < 3 * per_run_sigma);
  }
}

TEST_CASE("every golden config round-trips through JSON", "[harness]") {
  for (const auto& entry : std::filesystem::directory_iterator(OAMX_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    auto doc = read_json_file(entry.path().string());
    doc["mode"] = "analytic";
    if (doc.contains("mle")) doc["mle"]["starts"] = 2;
    const auto r = run_doc(doc);
    const auto text = emit_report(r, Format::Json).front().content;
    CHECK(report_from_json(json::parse(text)) == r);
    for (const auto& m : r.density_matrices) CHECK_NOTHROW(check_physical(m));
  }
}

TEST_CASE("module errors carry the scenario name", "[harness]") {
  const auto doc = json::parse(R"({"scenario": "oam-chsh", "pair_rate": 0, "duration": 900})");
  try {
    run_doc(doc);
    FAIL("expected UndefinedCorrelation");
  } catch (const UndefinedCorrelation& e) {
    CHECK(std::string(e.what()).rfind("scenario oam-chsh: ", 0) == 0);
  }
}

TEST_CASE("efficiency and capacity scenarios report exact values", "[harness]") {
  const auto eff = run_doc(golden("efficiency-budget.json"));
  CHECK(metric(eff, "signal_efficiency").raw.value == Approx(9.984e-5));
  CHECK(metric(eff, "idler_efficiency").raw.value == Approx(0.0104));
  CHECK(metric(eff, "spectral_acceptance").raw.value == 0.2);
  CHECK(metric(eff, "quantum_conversion_efficiency").raw.value == Approx(0.002));
  CHECK(metric(eff, "conversion_efficiency").raw.value == Approx(1.0));

  const auto cap = run_doc(golden("mode-capacity.json"));
  CHECK(metric(cap, "mode_count/0").raw.value == 49.0);
  CHECK(metric(cap, "l_max/0").raw.value == 24.0);
  CHECK(metric(cap, "mode_count/1").raw.value == 1249.0);
}

TEST_CASE("hybrid tomography reconstructs the Werner fidelity", "[harness]") {
  auto doc = golden("hybrid-tomography.json");
  doc["mode"] = "analytic";
  doc.erase("noise");
  doc["noise"] = json{{"werner_v", 0.815}};
  const auto r = run_doc(doc);
  CHECK(metric(r, "fidelity").raw.value == Approx((1 + 3 * 0.815) / 4).margin(2e-3));
  CHECK(metric(r, "fidelity").net.value == metric(r, "fidelity").raw.value);
}

TEST_CASE("clamped net counts are noted", "[harness]") {
  const auto r = run_doc(json::parse(R"({
    "scenario": "qubit-tomography", "mode": "sampled", "pair_rate": 1, "duration": 10,
    "resamples": 100, "states": ["R"],
    "noise": {"singles_a": 3e4, "singles_b": 3e4, "coincidence_window": 1.6e-9}
  })"));
  REQUIRE_FALSE(r.notes.empty());
  CHECK(r.notes.front().find("clamped") != std::string::npos);
}
