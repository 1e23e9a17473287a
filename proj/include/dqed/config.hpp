// config.hpp: Run configuration: flat `key = value` documents and the initial-state grammar
//
//   # comment
//   experiment    = fig1a
//   g_list        = 0.25, 0.4, 0.5
//   initial_state = ge0               # or phi_minus, or 0.6*ge0 - 0.8*eg0 + gg2
//
// Every key is optional except `experiment`; unknown keys are errors.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/hilbert.hpp"
#include "dqed/model.hpp"
#include "dqed/policy.hpp"

namespace dqed {

enum class Experiment { spectrum, evolve, steady, ground_eof_sweep, fig1a, fig1b };
enum class DissipatorKind { standard, improved };
enum class HamiltonianKind { jc, rabi };

inline std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::spectrum: return "spectrum";
    case Experiment::evolve: return "evolve";
    case Experiment::steady: return "steady";
    case Experiment::ground_eof_sweep: return "ground_eof_sweep";
    case Experiment::fig1a: return "fig1a";
    case Experiment::fig1b: return "fig1b";
    }
    return "?";
}

inline std::string to_string(DissipatorKind k) { return k == DissipatorKind::standard ? "standard" : "improved"; }
inline std::string to_string(HamiltonianKind k) { return k == HamiltonianKind::jc ? "jc" : "rabi"; }

// One term of an initial-state superposition: coefficient * |a b n>, or
// coefficient * |Phi-> (x) |n>.
struct StateTerm {
    double coefficient = 1.0;
    bool phi_minus = false;
    Qubit a = Qubit::g;
    Qubit b = Qubit::g;
    std::size_t n = 0;
};

struct InitialState {
    std::string text = "ge0";
    std::vector<StateTerm> terms{{1.0, false, Qubit::g, Qubit::e, 0}};

    std::size_t max_photon() const {
        std::size_t m = 0;
        for (const auto& t : terms) m = std::max(m, t.n);
        return m;
    }

    // Normalized state vector on the given layout.
    Vector ket(const SpaceLayout& layout) const {
        Vector v(layout.total_dim(), 0.0);
        for (const auto& t : terms) {
            if (t.phi_minus) {
                const auto pm = phi_minus_ket(layout, t.n);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] += t.coefficient * pm[i];
            } else {
                v[layout.index(t.a, t.b, t.n)] += t.coefficient;
            }
        }
        const double nv = norm(v);
        if (!(nv > 1e-12)) throw ConfigError("initial_state '" + text + "' has zero norm");
        for (auto& z : v) z /= nv;
        return v;
    }
};

// state  := term (('+' | '-') term)*
// term   := [number '*'] token
// token  := ('e'|'g') ('e'|'g') digits  |  'phi_minus' [digits]
inline InitialState parse_initial_state(std::string_view text) {
    auto fail = [&](const std::string& why) {
        return ConfigError("invalid state token '" + std::string(text) + "': " + why);
    };
    auto is_ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };

    // Split on '+'/'-' that are not the sign of a coefficient exponent (1e-3).
    std::vector<std::pair<double, std::string>> pieces;
    double sign = 1.0;
    std::string cur;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const bool exponent_sign = i >= 2 && (text[i - 1] == 'e' || text[i - 1] == 'E') &&
                                   (std::isdigit(static_cast<unsigned char>(text[i - 2])) || text[i - 2] == '.') &&
                                   cur.find('*') == std::string::npos &&
                                   cur.find_first_not_of("0123456789.eE \t") == std::string::npos;
        if ((c == '+' || c == '-') && !exponent_sign) {
            if (cur.find_first_not_of(" \t") != std::string::npos) pieces.emplace_back(sign, cur);
            else if (!pieces.empty() || i != 0) throw fail("dangling operator");
            sign = c == '-' ? -1.0 : 1.0;
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (cur.find_first_not_of(" \t") == std::string::npos) throw fail("empty term");
    pieces.emplace_back(sign, cur);

    InitialState st;
    st.text = std::string(text);
    st.terms.clear();
    for (auto& [sgn, raw] : pieces) {
        StateTerm term;
        term.coefficient = sgn;
        std::string body = raw;
        if (const auto star = body.find('*'); star != std::string::npos) {
            std::string num = body.substr(0, star);
            while (!num.empty() && is_ws(num.back())) num.pop_back();
            while (!num.empty() && is_ws(num.front())) num.erase(num.begin());
            double c = 0.0;
            const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), c);
            if (num.empty() || ec != std::errc() || ptr != num.data() + num.size())
                throw fail("bad coefficient '" + num + "'");
            term.coefficient *= c;
            body = body.substr(star + 1);
        }
        while (!body.empty() && is_ws(body.back())) body.pop_back();
        while (!body.empty() && is_ws(body.front())) body.erase(body.begin());
        std::size_t pos = 0;
        if (body.rfind("phi_minus", 0) == 0) {
            term.phi_minus = true;
            pos = 9;
        } else {
            if (body.size() < 3) throw fail("expected two qubit labels from {e,g} and a Fock index");
            for (int k = 0; k < 2; ++k) {
                const char ch = body[static_cast<std::size_t>(k)];
                if (ch != 'e' && ch != 'g') throw fail(std::string("qubit label '") + ch + "' not in {e,g}");
                (k == 0 ? term.a : term.b) = ch == 'e' ? Qubit::e : Qubit::g;
            }
            pos = 2;
            if (!std::isdigit(static_cast<unsigned char>(body[pos])))
                throw fail("expected a Fock index after the qubit labels");
        }
        std::size_t n = 0;
        for (; pos < body.size(); ++pos) {
            if (!std::isdigit(static_cast<unsigned char>(body[pos])))
                throw fail("unexpected '" + std::string(1, body[pos]) + "'");
            n = n * 10 + static_cast<std::size_t>(body[pos] - '0');
        }
        term.n = n;
        st.terms.push_back(term);
    }
    return st;
}

struct Sweep {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.025;

    // start, start + step, ..., up to stop inclusive (within step/1000).
    std::vector<double> points() const {
        std::vector<double> out;
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-3)) + 1;
        for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
};

struct RunConfig {
    Experiment experiment = Experiment::steady;
    RabiParams params{1.0, 1.0, 0.1, 0.2, 4};
    InitialState initial_state;
    DissipatorKind dissipator = DissipatorKind::standard;
    HamiltonianKind hamiltonian = HamiltonianKind::jc;
    Sweep sweep;
    std::vector<double> g_list{0.25, 0.4, 0.5};
    double t_end = 200.0;
    double dt = 0.005;
    double record_interval = 0.5;
    bool auto_fock = false;  // choose d per point with converge_fock
    double t_max = 0.0;      // steady-state horizon; <= 0 means 500/kappa
    std::string output_path;
    NumericPolicy tolerances;

    // Keys that were present in the document, for reporting.
    std::set<std::string> explicit_keys;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

inline double parse_number(const std::string& v, const std::string& key) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(x))
        throw ConfigError("malformed number '" + v + "' for key '" + key + "'");
    return x;
}

inline std::size_t parse_count(const std::string& v, const std::string& key) {
    const double x = parse_number(v, key);
    if (x < 0.0 || std::floor(x) != x) throw ConfigError("key '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(x);
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), key));
    if (out.empty()) throw ConfigError("key '" + key + "' needs at least one value");
    return out;
}

} // namespace detail

// Experiment-dependent defaults for keys the document did not set.
inline void apply_experiment_defaults(RunConfig& cfg) {
    auto unset = [&](const char* k) { return cfg.explicit_keys.count(k) == 0; };
    switch (cfg.experiment) {
    case Experiment::fig1a:
        if (unset("kappa")) cfg.params.kappa = 0.2;
        if (unset("dissipator")) cfg.dissipator = DissipatorKind::improved;
        if (unset("initial_state")) cfg.initial_state = parse_initial_state("ge0");
        if (unset("d")) cfg.auto_fock = true;
        break;
    case Experiment::fig1b:
        if (unset("d")) cfg.auto_fock = true;
        break;
    case Experiment::spectrum:
        if (unset("dissipator") && unset("hamiltonian")) cfg.hamiltonian = HamiltonianKind::rabi;
        break;
    default: break;
    }
    if (unset("hamiltonian") && cfg.experiment != Experiment::spectrum)
        cfg.hamiltonian = cfg.dissipator == DissipatorKind::improved ? HamiltonianKind::rabi : HamiltonianKind::jc;
}

inline void validate(const RunConfig& cfg) {
    cfg.params.validate();
    if (!(cfg.sweep.step > 0.0)) throw ConfigError("sweep_step must be > 0");
    if (!(cfg.sweep.start < cfg.sweep.stop)) throw ConfigError("sweep_start must be < sweep_stop");
    if (cfg.sweep.start < 0.0) throw ConfigError("sweep_start must be >= 0 (g >= 0)");
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(cfg.t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
    if (!(cfg.record_interval > 0.0)) throw ConfigError("record_interval must be > 0");
    for (double g : cfg.g_list)
        if (!(g >= 0.0)) throw ConfigError("g_list entries must be >= 0");
    if (cfg.dissipator == DissipatorKind::improved && cfg.hamiltonian != HamiltonianKind::rabi)
        throw ConfigError("the improved dissipator is built from the Rabi spectrum; use hamiltonian = rabi");
    if (!cfg.auto_fock && cfg.initial_state.max_photon() >= cfg.params.d)
        throw ConfigError("initial_state uses Fock index " + std::to_string(cfg.initial_state.max_photon()) +
                          " but d = " + std::to_string(cfg.params.d));
    // Normalizability: zero vectors are rejected here rather than mid-run.
    (void)cfg.initial_state.ket(SpaceLayout(std::max<std::size_t>(cfg.initial_state.max_photon() + 1, 2)));
}

// Parse, apply defaults, validate. Errors carry the 1-based line number.
inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::map<std::string, std::pair<std::string, int>> entries;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = detail::trim(line);
        if (body.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (entries.count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        entries[key] = {value, line_no};
        if (end == text.size()) break;
    }

    auto at_line = [](int ln, const std::exception& e) {
        return ConfigError("line " + std::to_string(ln) + ": " + e.what());
    };

    if (!entries.count("experiment")) throw ConfigError("missing required key 'experiment'");

    for (const auto& [key, vl] : entries) {
        const auto& [v, ln] = vl;
        try {
            auto& p = cfg.params;
            auto& t = cfg.tolerances;
            if (key == "experiment") {
                static const std::map<std::string, Experiment> names{
                    {"spectrum", Experiment::spectrum},   {"evolve", Experiment::evolve},
                    {"steady", Experiment::steady},       {"ground_eof_sweep", Experiment::ground_eof_sweep},
                    {"fig1a", Experiment::fig1a},         {"fig1b", Experiment::fig1b}};
                const auto it = names.find(v);
                if (it == names.end()) throw ConfigError("unknown experiment '" + v + "'");
                cfg.experiment = it->second;
            } else if (key == "omega") {
                p.omega_a = p.omega_f = detail::parse_number(v, key);
            } else if (key == "omega_a") {
                p.omega_a = detail::parse_number(v, key);
            } else if (key == "omega_f") {
                p.omega_f = detail::parse_number(v, key);
            } else if (key == "g") {
                p.g = detail::parse_number(v, key);
                if (!(p.g >= 0.0)) throw ConfigError("g must be >= 0, got " + v);
            } else if (key == "kappa") {
                p.kappa = detail::parse_number(v, key);
                if (!(p.kappa >= 0.0)) throw ConfigError("kappa must be >= 0, got " + v);
            } else if (key == "d") {
                if (v == "auto") {
                    cfg.auto_fock = true;
                } else {
                    p.d = detail::parse_count(v, key);
                    if (p.d < 2) throw ConfigError("d must be >= 2, got " + v);
                    cfg.auto_fock = false;
                }
            } else if (key == "initial_state") {
                cfg.initial_state = parse_initial_state(v);
            } else if (key == "dissipator") {
                if (v == "standard") cfg.dissipator = DissipatorKind::standard;
                else if (v == "improved") cfg.dissipator = DissipatorKind::improved;
                else throw ConfigError("dissipator must be 'standard' or 'improved'");
            } else if (key == "hamiltonian") {
                if (v == "jc") cfg.hamiltonian = HamiltonianKind::jc;
                else if (v == "rabi") cfg.hamiltonian = HamiltonianKind::rabi;
                else throw ConfigError("hamiltonian must be 'jc' or 'rabi'");
            } else if (key == "sweep_start") {
                cfg.sweep.start = detail::parse_number(v, key);
            } else if (key == "sweep_stop") {
                cfg.sweep.stop = detail::parse_number(v, key);
            } else if (key == "sweep_step") {
                cfg.sweep.step = detail::parse_number(v, key);
            } else if (key == "g_list") {
                cfg.g_list = detail::parse_list(v, key);
            } else if (key == "t_end") {
                cfg.t_end = detail::parse_number(v, key);
            } else if (key == "dt") {
                cfg.dt = detail::parse_number(v, key);
            } else if (key == "record_interval") {
                cfg.record_interval = detail::parse_number(v, key);
            } else if (key == "t_max") {
                cfg.t_max = detail::parse_number(v, key);
            } else if (key == "output_path") {
                cfg.output_path = v;
            } else if (key == "tol.steady") {
                t.steady_tol = detail::parse_number(v, key);
            } else if (key == "tol.fock") {
                t.fock_tol = detail::parse_number(v, key);
            } else if (key == "tol.fock_max_d") {
                t.fock_max_d = static_cast<int>(detail::parse_count(v, key));
            } else if (key == "tol.rate_floor") {
                t.rate_floor = detail::parse_number(v, key);
            } else if (key == "tol.positivity_abort") {
                t.positivity_abort = detail::parse_number(v, key);
            } else if (key == "tol.discord_grid") {
                t.discord_grid = static_cast<int>(detail::parse_count(v, key));
            } else if (key == "tol.jacobi_offdiag") {
                t.jacobi_offdiag = detail::parse_number(v, key);
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const std::exception& e) {
            throw at_line(ln, e);
        }
        cfg.explicit_keys.insert(key);
    }
    if (cfg.explicit_keys.count("omega") &&
        (cfg.explicit_keys.count("omega_a") || cfg.explicit_keys.count("omega_f")))
        throw ConfigError("line " + std::to_string(entries["omega"].second) +
                          ": 'omega' conflicts with 'omega_a'/'omega_f'");
    apply_experiment_defaults(cfg);
    validate(cfg);
    return cfg;
}

} // namespace dqed
