// Copyright 2026 The weakmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//=========================================================================
// Scenario execution: s-grid scans of the exact dynamics, closed-form
// growth reports with their finite-difference oracle values attached, and
// the decomposition comparison table. Emits a bit-stable CSV (17
// significant digits, '.' decimal separator, '\n' line endings) and a
// "weakmeter-report/1" JSON document.
//=========================================================================

#ifndef WEAKMETER_SCAN_HPP
#define WEAKMETER_SCAN_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakmeter/config.hpp"
#include "weakmeter/formulas.hpp"
#include "weakmeter/numdiff.hpp"

namespace weakmeter {

using Json = nlohmann::ordered_json;

inline constexpr const char *kReportSchema = "weakmeter-report/1";

/// |total - oracle| above this (relative to max(1, |total|)) flips the
/// decomposition-comparison verdict to inconsistent.
inline constexpr double kDecompositionTol = 1e-4;

struct ScanRow {
    double s = 0.0;
    std::optional<double> p_f;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> conditional_mean;
    std::optional<double> conditional_variance;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    SymmetryReport symmetry;
    double k_mb = 0.0;
    double response_mean = 0.0;
    GrowthReport unconditioned_growth; // oracle filled
    double unconditioned_shift = 0.0;
    double unconditioned_shift_oracle = 0.0;
    std::optional<GrowthReport> conditional_growth; // oracle filled
    std::optional<double> conditional_shift;
    std::optional<double> conditional_shift_oracle;
    std::optional<WeakStatistics> weak_stats;
    std::optional<DerivativeEstimate> curvature_oracle;
    std::vector<std::string> advisories;
};

namespace scan_detail {

inline unsigned thread_budget(std::size_t work_items) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) {
        n = 1;
    }
    if (const char *env = std::getenv("WEAKMETER_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) {
            n = std::min<unsigned>(n, static_cast<unsigned>(cap));
        }
    }
    return std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(work_items, 1)));
}

/// Runs f(i) for i in [0, n), striped over the thread budget. Exceptions
/// from workers are rethrown on the caller thread.
template <class F>
void parallel_for(std::size_t n, F &&f) {
    const unsigned workers = thread_budget(n);
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += workers) {
                    f(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread &t : pool) {
        t.join();
    }
    for (const std::exception_ptr &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

inline std::string csv_cell(const std::optional<double> &v) {
    return v ? cfg_detail::format_double(*v) : std::string();
}

inline Json json_or_null(const std::optional<double> &v) {
    return v ? Json(*v) : Json(nullptr);
}

inline Json growth_json(const GrowthReport &g) {
    Json j;
    j["term_linear_response"] = g.term_linear_response;
    j["term_response_fluctuation"] = g.term_response_fluctuation;
    j["term_saturation"] = g.term_saturation;
    j["term_bayesian_update"] = g.term_bayesian_update;
    j["total"] = g.total;
    j["oracle"] = json_or_null(g.oracle);
    j["abs_error"] = g.oracle ? Json(std::abs(g.total - *g.oracle)) : Json(nullptr);
    return j;
}

inline Json symmetry_json(const SymmetryReport &r) {
    auto residual = [](double v) { return std::isnan(v) ? Json(nullptr) : Json(v); };
    Json j;
    j["inversion_present"] = r.inversion_present;
    j["spectrum_symmetric"] = r.inversion_present ? Json(r.spectrum_symmetric) : Json(nullptr);
    j["state_parity_ok"] = r.inversion_present ? Json(r.state_parity_ok) : Json(nullptr);
    j["generator_odd_ok"] = r.inversion_present ? Json(r.generator_odd_ok) : Json(nullptr);
    j["unbiased_mb_ok"] = r.unbiased_mb_ok;
    j["residuals"] = Json{{"spectrum", residual(r.spectrum_residual)},
                          {"state", residual(r.state_residual)},
                          {"generator", residual(r.generator_residual)},
                          {"mb", residual(r.mb_residual)}};
    return j;
}

inline Json complex_json(Complex z) {
    return Json{{"re", z.real()}, {"im", z.imag()}};
}

inline Json estimate_json(const DerivativeEstimate &e) {
    Json j;
    j["value"] = e.value;
    j["step"] = e.step;
    j["order"] = e.order == DerivativeOrder::first ? "first" : "second";
    j["richardson_levels"] = e.richardson_levels;
    j["error_estimate"] = e.error_estimate;
    return j;
}

inline std::vector<std::string> symmetry_advisories(const SymmetryReport &r) {
    std::vector<std::string> out;
    if (!r.inversion_present) {
        out.push_back("meter has no inversion unitary; symmetry conditions unverified");
    } else {
        if (!r.spectrum_symmetric) {
            out.push_back("meter readout spectrum is not inversion symmetric (residual " +
                          cfg_detail::format_double(r.spectrum_residual) + ")");
        }
        if (!r.state_parity_ok) {
            out.push_back("meter state is not inversion symmetric (residual " +
                          cfg_detail::format_double(r.state_residual) + ")");
        }
        if (!r.generator_odd_ok) {
            out.push_back("meter generator is not inversion odd (residual " +
                          cfg_detail::format_double(r.generator_residual) + ")");
        }
    }
    if (!r.unbiased_mb_ok) {
        out.push_back("meter state violates <BM+MB> = 0 (residual " +
                      cfg_detail::format_double(r.mb_residual) + ")");
    }
    return out;
}

} // namespace scan_detail

//-------------------------------------------------------------------------
// run_scan
//-------------------------------------------------------------------------

inline ScanResult run_scan(const ScenarioConfig &cfg) {
    if (cfg.scan.s_values.empty()) {
        throw ConfigError("scan.s_values: at least one interaction strength is required");
    }
    const Scenario sc = make_scenario(cfg);
    const double h = cfg.numdiff.h;
    const int levels = cfg.numdiff.richardson_levels;

    ScanResult out;
    out.rows.resize(cfg.scan.s_values.size());
    scan_detail::parallel_for(cfg.scan.s_values.size(), [&](std::size_t i) {
        const double s = cfg.scan.s_values[i];
        ScanRow row;
        row.s = s;
        const MomentSet m = sc.unconditioned_moments(s);
        row.mean = m.mean;
        row.variance = m.variance;
        if (sc.has_postselection()) {
            const MomentSet c = sc.conditional_moments(s);
            row.p_f = c.postselection_probability;
            row.conditional_mean = c.mean;
            row.conditional_variance = c.variance;
        }
        out.rows[i] = row;
    });

    out.symmetry = validate_meter_symmetry(sc.meter());
    out.k_mb = sc.meter().correlation_kmb();
    out.response_mean = sc.meter().response_mean();
    out.advisories = scan_detail::symmetry_advisories(out.symmetry);

    out.unconditioned_growth = variance_growth_decomposition(sc);
    out.unconditioned_growth.oracle = fd_unconditioned_variance_growth(sc, h, levels).value;
    out.unconditioned_shift = unconditioned_shift_rate(sc);
    out.unconditioned_shift_oracle =
        central_derivative([&](double s) { return sc.unconditioned_moments(s).mean; }, 0.0, h,
                           DerivativeOrder::first, levels)
            .value;

    if (sc.has_postselection()) {
        GrowthReport cond = conditional_variance_growth(sc);
        cond.oracle = fd_variance_growth(sc, h, levels).value;
        out.conditional_growth = std::move(cond);
        out.conditional_shift = conditional_shift_rate(sc);
        out.conditional_shift_oracle =
            central_derivative([&](double s) { return sc.conditional_moments(s).mean; }, 0.0, h,
                               DerivativeOrder::first, levels)
                .value;
        out.weak_stats =
            weak_statistics(sc.system_state(), sc.system_observable(), *sc.postselection(),
                            sc.hbar());
        out.curvature_oracle = fd_postselection_curvature(sc, h, levels);
    }
    return out;
}

inline std::string scan_csv(const ScanResult &result) {
    std::string out = "s,p_f,mean,variance,conditional_mean,conditional_variance\n";
    for (const ScanRow &row : result.rows) {
        out += cfg_detail::format_double(row.s);
        out += ',';
        out += scan_detail::csv_cell(row.p_f);
        out += ',';
        out += cfg_detail::format_double(row.mean);
        out += ',';
        out += cfg_detail::format_double(row.variance);
        out += ',';
        out += scan_detail::csv_cell(row.conditional_mean);
        out += ',';
        out += scan_detail::csv_cell(row.conditional_variance);
        out += '\n';
    }
    return out;
}

inline Json scan_report_json(const ScenarioConfig &cfg, const ScanResult &result) {
    using namespace scan_detail;
    Json j;
    j["schema"] = kReportSchema;
    j["hbar"] = cfg.hbar;
    j["meter"] = Json{{"kind", cfg.meter.kind},
                      {"k_mb", result.k_mb},
                      {"response_mean", result.response_mean}};
    j["symmetry"] = symmetry_json(result.symmetry);
    j["advisories"] = result.advisories;
    j["unconditioned"] = Json{
        {"growth", growth_json(result.unconditioned_growth)},
        {"shift_rate", result.unconditioned_shift},
        {"shift_rate_oracle", result.unconditioned_shift_oracle},
        {"shift_rate_abs_error",
         std::abs(result.unconditioned_shift - result.unconditioned_shift_oracle)}};
    if (result.conditional_growth) {
        j["conditional"] = Json{
            {"growth", growth_json(*result.conditional_growth)},
            {"shift_rate", *result.conditional_shift},
            {"shift_rate_oracle", *result.conditional_shift_oracle},
            {"shift_rate_abs_error",
             std::abs(*result.conditional_shift - *result.conditional_shift_oracle)}};
    } else {
        j["conditional"] = nullptr;
    }
    if (result.weak_stats) {
        const WeakStatistics &w = *result.weak_stats;
        j["weak_statistics"] = Json{{"weak_value", complex_json(w.weak_value)},
                                    {"sandwiched_second_moment", w.sandwiched_second_moment},
                                    {"weak_value_of_a2", complex_json(w.weak_value_of_a2)},
                                    {"ozawa", w.ozawa},
                                    {"curvature", w.curvature},
                                    {"curvature_oracle", result.curvature_oracle->value},
                                    {"curvature_abs_error",
                                     std::abs(w.curvature - result.curvature_oracle->value)},
                                    {"v_dyn", w.v_dyn},
                                    {"weak_variance", json_or_null(w.weak_variance)}};
    } else {
        j["weak_statistics"] = nullptr;
    }
    return j;
}

/// Writes scan.csv and report.json into out_dir. The CSV never survives a
/// failed run: content is fully assembled before anything is opened, and a
/// partially written file is removed.
inline void write_scan_outputs(const ScenarioConfig &cfg, const ScanResult &result,
                               const std::filesystem::path &out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path csv_path = out_dir / "scan.csv";
    const std::filesystem::path json_path = out_dir / "report.json";
    const std::string csv = scan_csv(result);
    const std::string json = scan_report_json(cfg, result).dump(2) + "\n";
    {
        std::ofstream f(csv_path, std::ios::binary | std::ios::trunc);
        if (!f || !(f << csv) || !f.flush()) {
            f.close();
            std::filesystem::remove(csv_path);
            throw Error("write_scan_outputs: cannot write " + csv_path.string());
        }
    }
    {
        std::ofstream f(json_path, std::ios::binary | std::ios::trunc);
        if (!f || !(f << json) || !f.flush()) {
            f.close();
            std::filesystem::remove(json_path);
            std::filesystem::remove(csv_path);
            throw Error("write_scan_outputs: cannot write " + json_path.string());
        }
    }
}

//-------------------------------------------------------------------------
// compare_decompositions
//-------------------------------------------------------------------------

struct DecompositionComparison {
    GrowthReport growth;                         // conditional, oracle filled
    std::optional<double> weak_variance_reading; // pure system states only
    DerivativeEstimate oracle;
    double abs_error = 0.0;
    bool consistent = false;
    std::vector<std::string> advisories;
};

inline DecompositionComparison compare_decompositions(const ScenarioConfig &cfg) {
    const Scenario sc = make_scenario(cfg);
    if (!sc.has_postselection()) {
        throw ConfigError("postselection.amplitudes: required by the decomposition comparison");
    }
    DecompositionComparison out;
    out.oracle = fd_variance_growth(sc, cfg.numdiff.h, cfg.numdiff.richardson_levels);
    out.growth = conditional_variance_growth(sc);
    out.growth.oracle = out.oracle.value;
    if (sc.system_state().is_pure()) {
        out.weak_variance_reading =
            weak_variance(sc.system_state(), sc.system_observable(), *sc.postselection());
    }
    out.abs_error = std::abs(out.growth.total - out.oracle.value);
    out.consistent = out.abs_error <= kDecompositionTol * std::max(1.0, std::abs(out.growth.total));
    out.advisories = scan_detail::symmetry_advisories(validate_meter_symmetry(sc.meter()));
    return out;
}

inline std::string decomposition_table(const DecompositionComparison &c) {
    auto line = [](const std::string &label, const std::string &value) {
        std::string out = label;
        out.resize(34, ' ');
        return out + value + "\n";
    };
    auto num = [](double v) { return cfg_detail::format_double(v); };
    std::string out;
    out += line("term", "value");
    out += line("ozawa (2<G>^2 e2)", num(c.growth.term_linear_response));
    out += line("response fluctuation", num(c.growth.term_response_fluctuation));
    out += line("saturation", num(c.growth.term_saturation));
    out += line("bayesian update (K_MB * curv)", num(c.growth.term_bayesian_update));
    out += line("total", num(c.growth.total));
    out += line("weak-variance reading",
                c.weak_variance_reading ? num(*c.weak_variance_reading) : std::string("n/a"));
    out += line("fd oracle", num(c.oracle.value));
    out += line("fd error estimate", num(c.oracle.error_estimate));
    out += line("|total - oracle|", num(c.abs_error));
    out += line("verdict", c.consistent ? "consistent" : "INCONSISTENT");
    for (const std::string &a : c.advisories) {
        out += "advisory: " + a + "\n";
    }
    return out;
}

inline Json decomposition_json(const DecompositionComparison &c) {
    using namespace scan_detail;
    Json j;
    j["schema"] = kReportSchema;
    j["decomposition"] = growth_json(c.growth);
    j["weak_variance_reading"] = json_or_null(c.weak_variance_reading);
    j["fd_oracle"] = estimate_json(c.oracle);
    j["abs_error"] = c.abs_error;
    j["consistent"] = c.consistent;
    j["advisories"] = c.advisories;
    return j;
}

//-------------------------------------------------------------------------
// validate
//-------------------------------------------------------------------------

inline Json validate_report_json(const ScenarioConfig &cfg) {
    using namespace scan_detail;
    const MeterModel meter = make_meter(cfg);
    const SymmetryReport report = validate_meter_symmetry(meter);
    Json j;
    j["schema"] = kReportSchema;
    j["meter"] = Json{{"kind", cfg.meter.kind},
                      {"dim", meter.dim()},
                      {"hbar", meter.hbar()},
                      {"k_mb", meter.correlation_kmb()},
                      {"response_mean", meter.response_mean()},
                      {"response_variance", meter.response_variance()},
                      {"readout_variance", meter.readout_variance()}};
    j["symmetry"] = symmetry_json(report);
    j["advisories"] = symmetry_advisories(report);
    return j;
}

} // namespace weakmeter

#endif // WEAKMETER_SCAN_HPP
