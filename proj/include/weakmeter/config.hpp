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
// Declarative scenario files. Sections [system], [postselection], [meter],
// [scan], [numdiff] plus a top-level hbar; scalar keys, lists in brackets
// (nested for matrices, multi-line allowed), complex numbers as "re+imj",
// comments with '#'. Errors carry the file line and the field path.
//=========================================================================

#ifndef WEAKMETER_CONFIG_HPP
#define WEAKMETER_CONFIG_HPP

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "weakmeter/dynamics.hpp"
#include "weakmeter/numdiff.hpp"

namespace weakmeter {

struct SystemConfig {
    int dimension = 0;
    std::string observable_name;                   // "pauli_x|y|z", "spin_j"; empty when explicit
    std::optional<ComplexMatrix> observable_matrix;
    std::optional<ComplexVector> state_amplitudes; // pure
    std::optional<ComplexMatrix> state_density;    // mixed
};

struct MeterConfig {
    std::string kind;                              // "qubit" | "gaussian_cv" | "custom"
    std::optional<double> sigma_x2;
    std::optional<int> cutoff;
    std::optional<ComplexVector> state_amplitudes; // custom: Fock or explicit-basis amplitudes
    std::optional<ComplexMatrix> state_density;
    std::optional<ComplexMatrix> readout_matrix;   // custom, explicit form
    std::optional<ComplexMatrix> generator_matrix;
    std::optional<ComplexMatrix> inversion_matrix;
};

struct ScanConfig {
    std::vector<double> s_values;
};

struct NumdiffConfig {
    double h = kDefaultStep;
    int richardson_levels = kDefaultRichardsonLevels;
};

struct ScenarioConfig {
    double hbar = 1.0;
    SystemConfig system;
    std::optional<ComplexVector> postselection;
    MeterConfig meter;
    ScanConfig scan;
    NumdiffConfig numdiff;
};

/// Amplitude vectors are renormalized only when the drift is below this;
/// larger drift is rejected as a config error.
inline constexpr double kNormalizationDriftTol = 1e-6;

namespace cfg_detail {

[[noreturn]] inline void fail(const std::string &where, const std::string &field,
                              const std::string &message) {
    throw ConfigError(where + ": " + field + ": " + message);
}

inline std::string trim(const std::string &s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_complex(Complex z) {
    std::string out = format_double(z.real());
    out += std::signbit(z.imag()) ? "-" : "+";
    out += format_double(std::abs(z.imag()));
    out += "j";
    return out;
}

inline double parse_double(const std::string &raw, const std::string &where,
                           const std::string &field) {
    const std::string s = trim(raw);
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
        fail(where, field, "expected a finite real number, got '" + s + "'");
    }
    return v;
}

inline int parse_int(const std::string &raw, const std::string &where, const std::string &field) {
    const double v = parse_double(raw, where, field);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        fail(where, field, "expected an integer, got '" + trim(raw) + "'");
    }
    return i;
}

/// "re+imj" | "re-imj" | "re" | "imj".
inline Complex parse_complex(const std::string &raw, const std::string &where,
                             const std::string &field) {
    std::string s = trim(raw);
    if (s.empty()) {
        fail(where, field, "empty complex literal");
    }
    const bool has_j = (s.back() == 'j' || s.back() == 'J');
    if (!has_j) {
        return Complex(parse_double(s, where, field), 0.0);
    }
    s.pop_back();
    // split at the last +/- that is not a leading sign or an exponent sign
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string::npos) {
        return Complex(0.0, parse_double(s, where, field)); // pure imaginary
    }
    const double re = parse_double(s.substr(0, split), where, field);
    const std::string im_part = s.substr(split + 1);
    double im = parse_double(im_part.empty() ? "1" : im_part, where, field);
    if (s[split] == '-') {
        im = -im;
    }
    return Complex(re, im);
}

/// Splits "[a, b, [c, d]]" into its top-level elements.
inline std::vector<std::string> split_list(const std::string &raw, const std::string &where,
                                           const std::string &field) {
    const std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
        fail(where, field, "expected a bracketed list, got '" + s + "'");
    }
    std::vector<std::string> items;
    int depth = 0;
    std::string current;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const char c = s[i];
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (depth < 0) {
            fail(where, field, "unbalanced brackets");
        }
        if (c == ',' && depth == 0) {
            items.push_back(trim(current));
            current.clear();
        } else {
            current += c;
        }
    }
    if (depth != 0) {
        fail(where, field, "unbalanced brackets");
    }
    const std::string last = trim(current);
    if (!last.empty()) {
        items.push_back(last);
    } else if (!items.empty()) {
        fail(where, field, "trailing comma");
    }
    return items;
}

inline bool looks_like_matrix(const std::string &raw) {
    const std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[') {
        return false;
    }
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (std::isspace(static_cast<unsigned char>(s[i]))) continue;
        return s[i] == '[';
    }
    return false;
}

inline ComplexVector parse_complex_vector(const std::string &raw, const std::string &where,
                                          const std::string &field) {
    const std::vector<std::string> items = split_list(raw, where, field);
    if (items.empty()) {
        fail(where, field, "empty list");
    }
    ComplexVector v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = parse_complex(items[i], where, field);
    }
    return v;
}

inline ComplexMatrix parse_complex_matrix(const std::string &raw, const std::string &where,
                                          const std::string &field) {
    const std::vector<std::string> rows = split_list(raw, where, field);
    if (rows.empty()) {
        fail(where, field, "empty matrix");
    }
    ComplexMatrix m;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const ComplexVector row = parse_complex_vector(rows[r], where, field);
        if (r == 0) {
            m.resize(static_cast<Eigen::Index>(rows.size()), row.size());
        } else if (row.size() != m.cols()) {
            fail(where, field, "ragged matrix rows");
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    if (m.rows() != m.cols()) {
        fail(where, field, "matrix must be square");
    }
    return m;
}

inline std::vector<double> parse_real_vector(const std::string &raw, const std::string &where,
                                             const std::string &field) {
    const std::vector<std::string> items = split_list(raw, where, field);
    std::vector<double> out;
    out.reserve(items.size());
    for (const std::string &item : items) {
        out.push_back(parse_double(item, where, field));
    }
    return out;
}

struct RawEntry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

using RawConfig = std::map<std::string, RawEntry>; // "section.key" -> entry

inline RawConfig read_raw(std::istream &in, const std::string &where) {
    RawConfig raw;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t.front() == '[' && t.back() == ']' && t.find('=') == std::string::npos) {
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ConfigError(where + ":" + std::to_string(lineno) + ": empty section name");
            }
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ":" + std::to_string(lineno) +
                              ": expected 'key = value' or '[section]', got '" + t + "'");
        }
        const std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(where + ":" + std::to_string(lineno) + ": empty key");
        }
        // multi-line lists: keep reading until brackets balance
        const int start_line = lineno;
        auto bracket_balance = [](const std::string &s) {
            int d = 0;
            for (char c : s) {
                if (c == '[') ++d;
                if (c == ']') --d;
            }
            return d;
        };
        int balance = bracket_balance(value);
        while (balance > 0 && std::getline(in, line)) {
            ++lineno;
            const std::size_t h = line.find('#');
            if (h != std::string::npos) {
                line = line.substr(0, h);
            }
            value += " " + trim(line);
            balance = bracket_balance(value);
        }
        if (balance != 0) {
            throw ConfigError(where + ":" + std::to_string(start_line) + ": unbalanced brackets in '" +
                              key + "'");
        }
        const std::string path = section.empty() ? key : section + "." + key;
        if (raw.count(path) != 0) {
            throw ConfigError(where + ":" + std::to_string(start_line) + ": duplicate key '" + path +
                              "'");
        }
        raw[path] = RawEntry{value, start_line, false};
    }
    return raw;
}

inline std::optional<std::string> take(RawConfig &raw, const std::string &path) {
    auto it = raw.find(path);
    if (it == raw.end()) {
        return std::nullopt;
    }
    it->second.consumed = true;
    return it->second.value;
}

inline std::string where_of(const RawConfig &raw, const std::string &path,
                            const std::string &file) {
    auto it = raw.find(path);
    return it == raw.end() ? file : file + ":" + std::to_string(it->second.line);
}

/// Validates an amplitude vector's normalization and returns the exactly
/// normalized copy.
inline ComplexVector normalized_amplitudes(ComplexVector v, const std::string &where,
                                           const std::string &field) {
    const double n = v.norm();
    if (std::abs(n - 1.0) > kNormalizationDriftTol) {
        fail(where, field,
             "normalization drift " + format_double(std::abs(n - 1.0)) + " exceeds 1e-06");
    }
    return v / n;
}

inline ComplexMatrix normalized_density(ComplexMatrix rho, const std::string &where,
                                        const std::string &field) {
    if (!is_hermitian(rho)) {
        fail(where, field, "density matrix is not Hermitian within 1e-10");
    }
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > kNormalizationDriftTol) {
        fail(where, field, "trace drift " + format_double(std::abs(tr - 1.0)) + " exceeds 1e-06");
    }
    rho /= tr;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -QuantumState::kEigenvalueTol) {
        fail(where, field,
             "density matrix has eigenvalue " + format_double(eig.eigenvalues().minCoeff()));
    }
    return rho;
}

} // namespace cfg_detail

//-------------------------------------------------------------------------
// Loading.
//-------------------------------------------------------------------------

inline ScenarioConfig parse_scenario(std::istream &in, const std::string &file = "<config>") {
    using namespace cfg_detail;
    RawConfig raw = read_raw(in, file);
    ScenarioConfig cfg;

    if (auto v = take(raw, "hbar")) {
        cfg.hbar = parse_double(*v, where_of(raw, "hbar", file), "hbar");
        if (cfg.hbar <= 0.0) {
            fail(where_of(raw, "hbar", file), "hbar", "must be positive");
        }
    }

    // [system]
    {
        auto dim = take(raw, "system.dimension");
        if (!dim) {
            fail(file, "system.dimension", "missing");
        }
        cfg.system.dimension = parse_int(*dim, where_of(raw, "system.dimension", file),
                                         "system.dimension");
        if (cfg.system.dimension < 1) {
            fail(where_of(raw, "system.dimension", file), "system.dimension", "must be >= 1");
        }
        auto obs = take(raw, "system.observable");
        if (!obs) {
            fail(file, "system.observable", "missing");
        }
        const std::string obs_where = where_of(raw, "system.observable", file);
        const std::string obs_val = trim(*obs);
        if (!obs_val.empty() && obs_val.front() == '[') {
            ComplexMatrix m = parse_complex_matrix(obs_val, obs_where, "system.observable");
            if (m.rows() != cfg.system.dimension) {
                fail(obs_where, "system.observable", "matrix dimension " +
                                                         std::to_string(m.rows()) +
                                                         " does not match system.dimension");
            }
            if (!is_hermitian(m)) {
                fail(obs_where, "system.observable", "matrix is not Hermitian within 1e-10");
            }
            cfg.system.observable_matrix = std::move(m);
        } else {
            std::string name = obs_val;
            if (name.size() >= 2 && name.front() == '"' && name.back() == '"') {
                name = name.substr(1, name.size() - 2);
            }
            if (name != "pauli_x" && name != "pauli_y" && name != "pauli_z" && name != "spin_j") {
                fail(obs_where, "system.observable",
                     "unknown observable '" + name + "' (use pauli_x, pauli_y, pauli_z, spin_j, "
                     "or an explicit matrix)");
            }
            if (name.rfind("pauli_", 0) == 0 && cfg.system.dimension != 2) {
                fail(obs_where, "system.observable", "Pauli observables need system.dimension = 2");
            }
            cfg.system.observable_name = name;
        }
        auto st = take(raw, "system.state");
        if (!st) {
            fail(file, "system.state", "missing");
        }
        const std::string st_where = where_of(raw, "system.state", file);
        if (looks_like_matrix(*st)) {
            ComplexMatrix rho = parse_complex_matrix(*st, st_where, "system.state");
            if (rho.rows() != cfg.system.dimension) {
                fail(st_where, "system.state", "density dimension does not match system.dimension");
            }
            cfg.system.state_density = normalized_density(std::move(rho), st_where, "system.state");
        } else {
            ComplexVector amp = parse_complex_vector(*st, st_where, "system.state");
            if (amp.size() != cfg.system.dimension) {
                fail(st_where, "system.state", "amplitude count does not match system.dimension");
            }
            cfg.system.state_amplitudes =
                normalized_amplitudes(std::move(amp), st_where, "system.state");
        }
    }

    // [postselection]
    if (auto ps = take(raw, "postselection.amplitudes")) {
        const std::string ps_where = where_of(raw, "postselection.amplitudes", file);
        ComplexVector amp = parse_complex_vector(*ps, ps_where, "postselection.amplitudes");
        if (amp.size() != cfg.system.dimension) {
            fail(ps_where, "postselection.amplitudes", "amplitude count does not match system");
        }
        cfg.postselection = normalized_amplitudes(std::move(amp), ps_where,
                                                  "postselection.amplitudes");
    }

    // [meter]
    {
        auto kind = take(raw, "meter.kind");
        if (!kind) {
            fail(file, "meter.kind", "missing");
        }
        std::string k = trim(*kind);
        if (k.size() >= 2 && k.front() == '"' && k.back() == '"') {
            k = k.substr(1, k.size() - 2);
        }
        const std::string kind_where = where_of(raw, "meter.kind", file);
        if (k != "qubit" && k != "gaussian_cv" && k != "custom") {
            fail(kind_where, "meter.kind", "unknown kind '" + k + "'");
        }
        cfg.meter.kind = k;
        if (auto v = take(raw, "meter.sigma_x2")) {
            cfg.meter.sigma_x2 = parse_double(*v, where_of(raw, "meter.sigma_x2", file),
                                              "meter.sigma_x2");
            if (*cfg.meter.sigma_x2 <= 0.0) {
                fail(where_of(raw, "meter.sigma_x2", file), "meter.sigma_x2", "must be positive");
            }
        }
        if (auto v = take(raw, "meter.cutoff")) {
            cfg.meter.cutoff = parse_int(*v, where_of(raw, "meter.cutoff", file), "meter.cutoff");
            if (*cfg.meter.cutoff < 2) {
                fail(where_of(raw, "meter.cutoff", file), "meter.cutoff", "must be at least 2");
            }
        }
        if (auto v = take(raw, "meter.state")) {
            const std::string w = where_of(raw, "meter.state", file);
            if (looks_like_matrix(*v)) {
                cfg.meter.state_density =
                    normalized_density(parse_complex_matrix(*v, w, "meter.state"), w, "meter.state");
            } else {
                cfg.meter.state_amplitudes =
                    normalized_amplitudes(parse_complex_vector(*v, w, "meter.state"), w,
                                          "meter.state");
            }
        }
        if (auto v = take(raw, "meter.m")) {
            const std::string w = where_of(raw, "meter.m", file);
            ComplexMatrix m = parse_complex_matrix(*v, w, "meter.m");
            if (!is_hermitian(m)) {
                fail(w, "meter.m", "readout is not Hermitian within 1e-10");
            }
            cfg.meter.readout_matrix = std::move(m);
        }
        if (auto v = take(raw, "meter.b")) {
            const std::string w = where_of(raw, "meter.b", file);
            ComplexMatrix m = parse_complex_matrix(*v, w, "meter.b");
            if (!is_hermitian(m)) {
                fail(w, "meter.b", "generator is not Hermitian within 1e-10");
            }
            cfg.meter.generator_matrix = std::move(m);
        }
        if (auto v = take(raw, "meter.inversion")) {
            const std::string w = where_of(raw, "meter.inversion", file);
            ComplexMatrix m = parse_complex_matrix(*v, w, "meter.inversion");
            if (!is_unitary(m)) {
                fail(w, "meter.inversion", "inversion is not unitary within 1e-10");
            }
            cfg.meter.inversion_matrix = std::move(m);
        }

        // per-kind shape checks
        auto forbid = [&](const char *field, bool present) {
            if (present) {
                fail(file, std::string("meter.") + field,
                     "not applicable for meter.kind = " + cfg.meter.kind);
            }
        };
        if (cfg.meter.kind == "qubit") {
            forbid("sigma_x2", cfg.meter.sigma_x2.has_value());
            forbid("cutoff", cfg.meter.cutoff.has_value());
            forbid("state", cfg.meter.state_amplitudes || cfg.meter.state_density);
            forbid("m", cfg.meter.readout_matrix.has_value());
            forbid("b", cfg.meter.generator_matrix.has_value());
            forbid("inversion", cfg.meter.inversion_matrix.has_value());
        } else if (cfg.meter.kind == "gaussian_cv") {
            if (!cfg.meter.sigma_x2) fail(file, "meter.sigma_x2", "required for gaussian_cv");
            if (!cfg.meter.cutoff) fail(file, "meter.cutoff", "required for gaussian_cv");
            forbid("state", cfg.meter.state_amplitudes || cfg.meter.state_density);
            forbid("m", cfg.meter.readout_matrix.has_value());
            forbid("b", cfg.meter.generator_matrix.has_value());
            forbid("inversion", cfg.meter.inversion_matrix.has_value());
        } else { // custom
            const bool explicit_form = cfg.meter.readout_matrix.has_value();
            const bool cv_form = cfg.meter.sigma_x2.has_value() || cfg.meter.cutoff.has_value();
            if (explicit_form == cv_form) {
                fail(file, "meter.kind",
                     "custom meters need either explicit operators (m, b, state) or x/p "
                     "quadratures (sigma_x2, cutoff, state)");
            }
            if (!cfg.meter.state_amplitudes && !cfg.meter.state_density) {
                fail(file, "meter.state", "required for custom meters");
            }
            if (explicit_form) {
                if (!cfg.meter.generator_matrix) {
                    fail(file, "meter.b", "required with meter.m");
                }
            } else {
                if (!cfg.meter.sigma_x2) fail(file, "meter.sigma_x2", "required for x/p form");
                if (!cfg.meter.cutoff) fail(file, "meter.cutoff", "required for x/p form");
                forbid("b", cfg.meter.generator_matrix.has_value());
            }
        }
    }

    // [scan]
    if (auto v = take(raw, "scan.s_values")) {
        cfg.scan.s_values = parse_real_vector(*v, where_of(raw, "scan.s_values", file),
                                              "scan.s_values");
    }

    // [numdiff]
    if (auto v = take(raw, "numdiff.h")) {
        cfg.numdiff.h = parse_double(*v, where_of(raw, "numdiff.h", file), "numdiff.h");
        if (cfg.numdiff.h <= 0.0) {
            fail(where_of(raw, "numdiff.h", file), "numdiff.h", "must be positive");
        }
    }
    if (auto v = take(raw, "numdiff.richardson_levels")) {
        cfg.numdiff.richardson_levels =
            parse_int(*v, where_of(raw, "numdiff.richardson_levels", file),
                      "numdiff.richardson_levels");
        if (cfg.numdiff.richardson_levels < 0) {
            fail(where_of(raw, "numdiff.richardson_levels", file), "numdiff.richardson_levels",
                 "must be >= 0");
        }
    }

    for (const auto &[path, entry] : raw) {
        if (!entry.consumed) {
            throw ConfigError(file + ":" + std::to_string(entry.line) + ": unknown key '" + path +
                              "'");
        }
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open scenario file");
    }
    return parse_scenario(in, path);
}

//-------------------------------------------------------------------------
// Writing (canonical form; load(write(cfg)) is the identity).
//-------------------------------------------------------------------------

namespace cfg_detail {

inline std::string format_complex_vector(const ComplexVector &v) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_complex(v(i));
    }
    return out + "]";
}

inline std::string format_complex_matrix(const ComplexMatrix &m) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += ", ";
        out += format_complex_vector(m.row(r).transpose());
    }
    return out + "]";
}

} // namespace cfg_detail

inline std::string write_scenario(const ScenarioConfig &cfg) {
    using namespace cfg_detail;
    std::string out;
    out += "hbar = " + format_double(cfg.hbar) + "\n\n";
    out += "[system]\n";
    out += "dimension = " + std::to_string(cfg.system.dimension) + "\n";
    out += "observable = " + (cfg.system.observable_matrix
                                  ? format_complex_matrix(*cfg.system.observable_matrix)
                                  : cfg.system.observable_name) +
           "\n";
    out += "state = " + (cfg.system.state_density
                             ? format_complex_matrix(*cfg.system.state_density)
                             : format_complex_vector(*cfg.system.state_amplitudes)) +
           "\n";
    if (cfg.postselection) {
        out += "\n[postselection]\n";
        out += "amplitudes = " + format_complex_vector(*cfg.postselection) + "\n";
    }
    out += "\n[meter]\n";
    out += "kind = " + cfg.meter.kind + "\n";
    if (cfg.meter.sigma_x2) out += "sigma_x2 = " + format_double(*cfg.meter.sigma_x2) + "\n";
    if (cfg.meter.cutoff) out += "cutoff = " + std::to_string(*cfg.meter.cutoff) + "\n";
    if (cfg.meter.readout_matrix)
        out += "m = " + format_complex_matrix(*cfg.meter.readout_matrix) + "\n";
    if (cfg.meter.generator_matrix)
        out += "b = " + format_complex_matrix(*cfg.meter.generator_matrix) + "\n";
    if (cfg.meter.state_amplitudes)
        out += "state = " + format_complex_vector(*cfg.meter.state_amplitudes) + "\n";
    if (cfg.meter.state_density)
        out += "state = " + format_complex_matrix(*cfg.meter.state_density) + "\n";
    if (cfg.meter.inversion_matrix)
        out += "inversion = " + format_complex_matrix(*cfg.meter.inversion_matrix) + "\n";
    out += "\n[scan]\n";
    out += "s_values = [";
    for (std::size_t i = 0; i < cfg.scan.s_values.size(); ++i) {
        if (i) out += ", ";
        out += format_double(cfg.scan.s_values[i]);
    }
    out += "]\n";
    out += "\n[numdiff]\n";
    out += "h = " + format_double(cfg.numdiff.h) + "\n";
    out += "richardson_levels = " + std::to_string(cfg.numdiff.richardson_levels) + "\n";
    return out;
}

//-------------------------------------------------------------------------
// Materializing configs into models.
//-------------------------------------------------------------------------

inline ComplexMatrix make_system_observable(const ScenarioConfig &cfg) {
    if (cfg.system.observable_matrix) {
        return *cfg.system.observable_matrix;
    }
    const std::string &name = cfg.system.observable_name;
    if (name == "pauli_x") return pauli_x();
    if (name == "pauli_y") return pauli_y();
    if (name == "pauli_z") return pauli_z();
    // spin_j: diag(j, j-1, ..., -j) with j = (d-1)/2
    const int d = cfg.system.dimension;
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    const double j = (d - 1) / 2.0;
    for (int k = 0; k < d; ++k) {
        m(k, k) = j - k;
    }
    return m;
}

inline QuantumState make_system_state(const ScenarioConfig &cfg) {
    if (cfg.system.state_density) {
        return QuantumState::mixed(*cfg.system.state_density);
    }
    return QuantumState::pure(*cfg.system.state_amplitudes);
}

inline MeterModel make_meter(const ScenarioConfig &cfg) {
    const MeterConfig &mc = cfg.meter;
    if (mc.kind == "qubit") {
        return build_qubit_meter(cfg.hbar);
    }
    if (mc.kind == "gaussian_cv") {
        return build_gaussian_cv_meter(std::sqrt(*mc.sigma_x2), *mc.cutoff, cfg.hbar);
    }
    if (mc.readout_matrix) {
        const Eigen::Index dim = mc.readout_matrix->rows();
        if (mc.generator_matrix->rows() != dim) {
            throw ConfigError("meter.b: dimension does not match meter.m");
        }
        QuantumState state = mc.state_density ? QuantumState::mixed(*mc.state_density)
                                              : QuantumState::pure(*mc.state_amplitudes);
        if (state.dim() != dim) {
            throw ConfigError("meter.state: dimension does not match meter.m");
        }
        std::optional<ComplexMatrix> inversion = mc.inversion_matrix;
        if (inversion && inversion->rows() != dim) {
            throw ConfigError("meter.inversion: dimension does not match meter.m");
        }
        return build_custom_meter(*mc.readout_matrix, *mc.generator_matrix, std::move(state),
                                  std::move(inversion), cfg.hbar);
    }
    // custom x/p form: quadratures in a truncated Fock space, caller-chosen state
    const Eigen::Index dim = *mc.cutoff + 4;
    const double sigma_x = std::sqrt(*mc.sigma_x2);
    QuantumState state = [&]() {
        if (mc.state_density) {
            if (mc.state_density->rows() > dim) {
                throw ConfigError("meter.state: more Fock levels than cutoff + 4");
            }
            ComplexMatrix padded = ComplexMatrix::Zero(dim, dim);
            padded.topLeftCorner(mc.state_density->rows(), mc.state_density->rows()) =
                *mc.state_density;
            return QuantumState::mixed(std::move(padded));
        }
        if (mc.state_amplitudes->size() > dim) {
            throw ConfigError("meter.state: more Fock levels than cutoff + 4");
        }
        ComplexVector padded = ComplexVector::Zero(dim);
        padded.head(mc.state_amplitudes->size()) = *mc.state_amplitudes;
        return QuantumState::pure(std::move(padded));
    }();
    const double tail = fock_tail_probability(state, *mc.cutoff);
    if (tail > kTruncationLeakTol) {
        throw TruncationError("meter.state: occupation above the cutoff level is " +
                              cfg_detail::format_double(tail));
    }
    std::optional<ComplexMatrix> inversion =
        mc.inversion_matrix ? *mc.inversion_matrix : std::optional<ComplexMatrix>(fock_parity(dim));
    MeterModel meter(position_quadrature(sigma_x, dim), momentum_quadrature(sigma_x, dim, cfg.hbar),
                     std::move(state), std::move(inversion), cfg.hbar, "custom");
    return meter;
}

inline Scenario make_scenario(const ScenarioConfig &cfg) {
    try {
        return Scenario(make_system_observable(cfg), make_system_state(cfg), cfg.postselection,
                        make_meter(cfg), cfg.hbar);
    } catch (const Error &) {
        throw;
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("scenario construction failed: ") + e.what());
    }
}

} // namespace weakmeter

#endif // WEAKMETER_CONFIG_HPP
