// invariants.hpp: Self-checks run by `dqed check`. Each returns a pass flag and a
// short detail string; none of them need external data.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dqed/dynamics.hpp"
#include "dqed/entanglement.hpp"
#include "dqed/experiments.hpp"
#include "dqed/model.hpp"

namespace dqed {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline CheckResult make_check(std::string name, double value, double limit) {
    return {std::move(name), value <= limit, "value " + format_number(value) + " (limit " + format_number(limit) + ")"};
}

} // namespace detail

inline std::vector<CheckResult> run_invariant_checks(const NumericPolicy& pol = default_policy()) {
    std::vector<CheckResult> out;
    auto guarded = [&](const std::string& name, const std::function<CheckResult()>& fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };

    const RabiParams p{1.0, 1.0, 0.3, 0.2, 6};
    const auto layout = p.layout();

    guarded("rabi hamiltonian is hermitian", [&] {
        return detail::make_check("rabi hamiltonian is hermitian", max_asymmetry(rabi_hamiltonian(p)), pol.hermiticity);
    });

    guarded("jc conserves excitations", [&] {
        const auto h = jc_hamiltonian(p);
        return detail::make_check("jc conserves excitations",
                                  commutator(h, excitation_number(layout)).max_abs(), 1e-12);
    });

    guarded("improved rates are non-negative", [&] {
        const auto spec = dressed_spectrum(rabi_hamiltonian(p), pol);
        double worst = 0.0;
        for (const auto& c : improved_channels(spec, p, pol)) worst = std::min(worst, c.rate);
        return detail::make_check("improved rates are non-negative", std::max(0.0, -worst), 0.0);
    });

    guarded("liouvillian is trace preserving", [&] {
        const auto rho = pure_state(basis_ket(layout, Qubit::e, Qubit::g, 1));
        const auto gen = improved_generator(p, pol);
        const auto lab = standard_generator(p);
        const double t1 = std::abs(gen.apply(gen.to_frame(rho)).trace());
        const double t2 = std::abs(lab.apply(rho).trace());
        return detail::make_check("liouvillian is trace preserving", std::max(t1, t2), 1e-12);
    });

    guarded("dressed frame matches lab frame", [&] {
        const auto gen = improved_generator(p, pol);
        const auto spec = gen.spectrum();
        const auto channels = improved_channels(spec, p, pol);
        const auto rho = pure_state(basis_ket(layout, Qubit::g, Qubit::e, 0));
        const auto fast = gen.to_lab(gen.apply(gen.to_frame(rho)));
        const auto slow = liouvillian_apply(rho, rabi_hamiltonian(p), channels);
        return detail::make_check("dressed frame matches lab frame", (fast - slow).max_abs(), 1e-10);
    });

    guarded("bell state lower bound is 1", [&] {
        const auto rho = ComplexMatrix::projector(phi_minus_2q());
        return detail::make_check("bell state lower bound is 1", std::abs(eof_lower_bound(rho, 2, pol).bound - 1.0),
                                  1e-9);
    });

    guarded("product state has no entanglement", [&] {
        const auto rho = pure_state(basis_ket(layout, Qubit::e, Qubit::g, 2));
        const auto r = entanglement_report(rho, layout, pol);
        const double worst = std::max({r.eof_lower_bound, r.concurrence, r.discord, r.eof_monogamy.value_or(0.0)});
        return detail::make_check("product state has no entanglement", worst, 1e-9);
    });

    guarded("short evolution stays physical", [&] {
        EvolveOptions opt;
        opt.t_end = 5.0;
        opt.store_states = false;
        const auto rho0 = pure_state(basis_ket(layout, Qubit::e, Qubit::g, 0));
        const auto traj = evolve(rho0, improved_generator(p, pol), opt, pol);
        return detail::make_check("short evolution stays physical", -traj.min_eigenvalue(), pol.positivity_warn);
    });

    return out;
}

} // namespace dqed
