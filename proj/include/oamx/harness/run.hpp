#pragma once

// Scenario driver: turns an ExperimentConfig into coincidence records and
// derived metrics, raw and background-subtracted.
//
// Counting scenarios share one pipeline. The source state passes through
// heralded conversion (rate scaled by eta * sin^2(xi_t)), Werner noise and
// projective measurement. In sampled mode every raw count is a Poisson draw
// around signal + accidentals; in analytic mode the raw count is the
// expectation itself and metrics carry no error bar.

#include <algorithm>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "oamx/conversion.hpp"
#include "oamx/harness/config.hpp"
#include "oamx/harness/report.hpp"
#include "oamx/measurement.hpp"
#include "oamx/metrics.hpp"
#include "oamx/random.hpp"
#include "oamx/states.hpp"
#include "oamx/tomography.hpp"

namespace oamx::harness {

using CountMetric = std::function<double(std::span<const double>)>;

namespace detail {

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {
    report_.scenario = std::string(to_string(cfg.scenario));
    report_.mode = std::string(to_string(cfg.mode));
    report_.seed = cfg.seed;
    report_.description = cfg.description;
    report_.config = cfg.source;
  }

  ResultsReport run() {
    switch (cfg_.scenario) {
      case Scenario::QubitTomography: qubit_tomography(); break;
      case Scenario::HybridFringes:
      case Scenario::OamFringes:
      case Scenario::HybridWitness: fringes(); break;
      case Scenario::HybridTomography: hybrid_tomography(); break;
      case Scenario::OamChsh: chsh(); break;
      case Scenario::EfficiencyBudget: efficiency_budget_metrics(); break;
      case Scenario::ModeCapacity: mode_capacity_metrics(); break;
    }
    if (clamped_ > 0)
      report_.notes.push_back(std::to_string(clamped_) +
                              " net count(s) clamped at zero after background subtraction");
    report_.generated_at = utc_timestamp();
    return std::move(report_);
  }

 private:
  const ExperimentConfig& cfg_;
  ResultsReport report_;
  std::uint64_t record_index_ = 0;
  int clamped_ = 0;
  double rate_ = 0.0;

  // Converts one photon of the source state and sets the heralded pair rate.
  template <int N>
  DensityMatrix<N> convert(const DensityMatrix<N>& rho) {
    const double eta = cfg_.conversion.eta * conversion_efficiency({cfg_.conversion.xi_t, 1});
    const auto converted = apply_conversion(rho, eta);
    rate_ = cfg_.pair_rate * converted.success_probability;
    return converted.state;
  }

  NoiseModel noise_with(std::optional<double> werner_v, std::optional<double> eps) const {
    NoiseModel n = cfg_.noise;
    if (werner_v) n.werner_v = *werner_v;
    if (eps) n.crosstalk_eps = *eps;
    return n;
  }

  CoincidenceRecord make_record(const MeasurementSetting& setting, double prob,
                                const NoiseModel& noise) {
    CoincidenceRecord r{setting, cfg_.duration_s, 0.0, std::nullopt, 0.0};
    r.expected = expected_counts(prob, rate_, cfg_.duration_s);
    r.accidental = accidental_coincidences(noise, cfg_.duration_s);
    if (cfg_.mode == Mode::Sampled)
      r.sampled = sample_counts(r.expected + r.accidental, derive_seed(cfg_.seed, "records"),
                                record_index_);
    ++record_index_;
    if (r.net().clamped) ++clamped_;
    return r;
  }

  static std::vector<double> raw_counts(const std::vector<CoincidenceRecord>& recs) {
    std::vector<double> out;
    for (const auto& r : recs) out.push_back(r.raw());
    return out;
  }

  static std::vector<double> accidentals(const std::vector<CoincidenceRecord>& recs) {
    std::vector<double> out;
    for (const auto& r : recs) out.push_back(r.accidental);
    return out;
  }

  MetricWithError evaluate(const CountMetric& metric, const std::vector<double>& counts,
                           const std::string& seed_label) const {
    if (cfg_.mode == Mode::Analytic) return {metric(counts), 0.0, 0, 0};
    return poisson_error(metric, counts, cfg_.resamples, derive_seed(cfg_.seed, seed_label));
  }

  // Raw and net versions of a metric over the same raw counts. The net
  // version subtracts accidentals inside the metric so resampling perturbs
  // the measured counts rather than the subtracted ones.
  void add_metric(const std::string& name, const CountMetric& metric,
                  const std::vector<CoincidenceRecord>& recs) {
    add_metric(name, metric, metric, recs);
  }

  void add_metric(const std::string& name, const CountMetric& raw_metric,
                  const CountMetric& net_source_metric,
                  const std::vector<CoincidenceRecord>& recs) {
    const auto counts = raw_counts(recs);
    const auto acc = accidentals(recs);
    CountMetric net_metric = [acc, net_source_metric](std::span<const double> raw) {
      std::vector<double> net(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) net[i] = std::max(raw[i] - acc[i], 0.0);
      return net_source_metric(net);
    };
    report_.metrics.push_back({name, evaluate(raw_metric, counts, "bootstrap/" + name + "/raw"),
                               evaluate(net_metric, counts, "bootstrap/" + name + "/net")});
  }

  void add_exact(const std::string& name, double value) {
    report_.metrics.push_back({name, {value, 0.0, 0, 0}, {value, 0.0, 0, 0}});
  }

  MleOptions resample_options(const std::vector<double>& warm) const {
    MleOptions o;
    o.search = cfg_.mle;
    o.search.starts = 1;
    o.warm_start = warm;
    return o;
  }

  void qubit_tomography() {
    const auto& labels = qubit_basis_labels();
    for (const auto& entry : cfg_.states) {
      const Ket<2> ideal = make_qubit(entry.spec);
      const NoiseModel noise = noise_with(entry.werner_v, std::nullopt);
      const auto rho = apply_noise_state(convert(density_from_ket(ideal)), noise);
      RecordGroup group{entry.label, "tomography", {}};
      for (const auto& l : labels) {
        const auto spec = ProjectorSpec::label(l);
        group.records.push_back(
            make_record({spec, std::nullopt}, single_probability(rho, spec, noise.crosstalk_eps),
                        noise));
      }

      auto fit = [this](std::span<const double> c) {
        QubitTomographyCounts data;
        std::copy(c.begin(), c.end(), data.counts.begin());
        MleOptions o;
        o.search = cfg_.mle;
        return qubit_mle(data, o);
      };
      const auto counts = raw_counts(group.records);
      const auto acc = accidentals(group.records);
      std::vector<double> net(4);
      for (std::size_t i = 0; i < 4; ++i) net[i] = std::max(counts[i] - acc[i], 0.0);
      const auto central_raw = fit(counts);
      const auto central_net = fit(net);

      auto metric_from = [this, ideal](const MleResult<2>& central) -> CountMetric {
        const auto opts = resample_options(central.params);
        return [opts, ideal](std::span<const double> c) {
          QubitTomographyCounts data;
          std::copy(c.begin(), c.end(), data.counts.begin());
          return fidelity(qubit_mle(data, opts).rho, ideal);
        };
      };
      // Central values come from the full multi-start fit; resamples refine
      // from it with a single start.
      auto raw_metric = metric_from(central_raw);
      auto net_metric = metric_from(central_net);
      const std::string name = "fidelity/" + entry.label;
      add_metric(name, raw_metric, net_metric, group.records);
      auto& m = report_.metrics.back();
      m.raw.value = fidelity(central_raw.rho, ideal);
      m.net.value = fidelity(central_net.rho, ideal);
      report_.density_matrices.push_back(to_report_matrix(entry.label + "/raw", central_raw.rho));
      report_.density_matrices.push_back(to_report_matrix(entry.label + "/net", central_net.rho));
      report_.record_groups.push_back(std::move(group));
    }
  }

  void fringes() {
    const auto source = convert(density_from_ket(bell_state(cfg_.state)));
    std::vector<CoincidenceRecord> all;
    for (const auto& scan : cfg_.scans) {
      const NoiseModel noise = noise_with(scan.werner_v, scan.crosstalk_eps);
      const auto rho = apply_noise_state(source, noise);
      RecordGroup group{scan.label, "fringe", {}};
      for (double theta : cfg_.angles) {
        MeasurementSetting s{scan.fixed, ProjectorSpec::theta(theta)};
        group.records.push_back(
            make_record(s, coincidence_probability(rho, s, noise.crosstalk_eps), noise));
      }
      add_metric("visibility/" + scan.label, visibility_metric(), group.records);
      all.insert(all.end(), group.records.begin(), group.records.end());
      report_.record_groups.push_back(std::move(group));
    }
    if (cfg_.scenario == Scenario::HybridWitness) {
      const std::size_t n = cfg_.angles.size();
      const auto vis = visibility_metric();
      CountMetric w = [n, vis](std::span<const double> c) {
        return witness(vis(c.subspan(0, n)), vis(c.subspan(n, n)));
      };
      add_metric("witness", w, all);
    }
  }

  CountMetric visibility_metric() const {
    return [angles = cfg_.angles, t = cfg_.duration_s](std::span<const double> c) {
      return fit_fringe({angles, std::vector<double>(c.begin(), c.end()), t}).visibility;
    };
  }

  void hybrid_tomography() {
    const Ket<4> ideal = bell_state(cfg_.state);
    const auto rho = apply_noise_state(convert(density_from_ket(ideal)), cfg_.noise);
    oamx::detail::validate_two_qubit_bases(cfg_.bases_a, cfg_.bases_b);
    RecordGroup group{"tomography", "tomography", {}};
    for (std::size_t i = 0; i < 16; ++i) {
      MeasurementSetting s{cfg_.bases_a[i / 4], cfg_.bases_b[i % 4]};
      group.records.push_back(
          make_record(s, coincidence_probability(rho, s, cfg_.noise.crosstalk_eps), cfg_.noise));
    }
    auto data_from = [this](std::span<const double> c) {
      TwoQubitTomographyCounts d{cfg_.bases_a, cfg_.bases_b, {}};
      std::copy(c.begin(), c.end(), d.counts.begin());
      return d;
    };
    const auto counts = raw_counts(group.records);
    const auto acc = accidentals(group.records);
    std::vector<double> net(16);
    for (std::size_t i = 0; i < 16; ++i) net[i] = std::max(counts[i] - acc[i], 0.0);
    MleOptions central_opts;
    central_opts.search = cfg_.mle;
    const auto central_raw = two_qubit_mle(data_from(counts), central_opts);
    const auto central_net = two_qubit_mle(data_from(net), central_opts);

    auto metric_from = [&](const MleResult<4>& central) -> CountMetric {
      return [opts = resample_options(central.params), ideal, data_from](std::span<const double> c) {
        return fidelity(two_qubit_mle(data_from(c), opts).rho, ideal);
      };
    };
    add_metric("fidelity", metric_from(central_raw), metric_from(central_net), group.records);
    auto& m = report_.metrics.back();
    m.raw.value = fidelity(central_raw.rho, ideal);
    m.net.value = fidelity(central_net.rho, ideal);
    report_.density_matrices.push_back(to_report_matrix("raw", central_raw.rho));
    report_.density_matrices.push_back(to_report_matrix("net", central_net.rho));
    report_.record_groups.push_back(std::move(group));
  }

  void chsh() {
    const auto rho = apply_noise_state(convert(density_from_ket(bell_state(cfg_.state))), cfg_.noise);
    RecordGroup group{"chsh", "chsh", {}};
    for (const auto& s : chsh_measurements(cfg_.chsh))
      group.records.push_back(
          make_record(s, coincidence_probability(rho, s, cfg_.noise.crosstalk_eps), cfg_.noise));
    add_metric("S", [](std::span<const double> c) { return chsh_S(c).s; }, group.records);
    add_metric("abs_S", [](std::span<const double> c) { return chsh_S(c).abs_s; }, group.records);
    const std::array<const char*, 4> names{"E(a,b)", "E(a,b')", "E(a',b)", "E(a',b')"};
    for (std::size_t k = 0; k < 4; ++k)
      add_metric(names[k], [k](std::span<const double> c) { return chsh_S(c).correlations[k]; },
                 group.records);
    report_.record_groups.push_back(std::move(group));
  }

  void efficiency_budget_metrics() {
    const double acceptance = spectral_acceptance(cfg_.spectral);
    add_exact("signal_efficiency", oamx::efficiency_budget(cfg_.signal_stages));
    add_exact("idler_efficiency", oamx::efficiency_budget(cfg_.idler_stages));
    add_exact("spectral_acceptance", acceptance);
    add_exact("quantum_conversion_efficiency", cfg_.laser_conversion_efficiency * acceptance);
    add_exact("conversion_efficiency", conversion_efficiency({cfg_.xi_t, 1}));
  }

  void mode_capacity_metrics() {
    for (std::size_t i = 0; i < cfg_.geometries.size(); ++i) {
      const auto& g = cfg_.geometries[i];
      add_exact("l_max/" + std::to_string(i), max_supported_charge(g));
      add_exact("mode_count/" + std::to_string(i), mode_capacity(g));
    }
  }
};

}  // namespace detail

// Deterministic for a fixed config (including seed); only generated_at varies.
// Module errors are rethrown with the scenario name prefixed.
inline ResultsReport run_scenario(const ExperimentConfig& cfg) {
  const std::string where = "scenario " + std::string(to_string(cfg.scenario)) + ": ";
  try {
    return detail::Runner(cfg).run();
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(where + e.what(), e.best_params(), e.best_value());
  } catch (const UndefinedCorrelation& e) {
    throw UndefinedCorrelation(where + e.what());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
}

}  // namespace oamx::harness
