// model.hpp: Two-qubit Rabi and Jaynes-Cummings Hamiltonians, dressed spectrum,
// and the standard / dressed-state dissipation channels

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/hilbert.hpp"
#include "dqed/linalg.hpp"
#include "dqed/policy.hpp"

namespace dqed {

struct RabiParams {
    double omega_a = 1.0;  // qubit transition frequency
    double omega_f = 1.0;  // cavity frequency
    double g = 0.0;        // qubit-cavity coupling
    double kappa = 0.0;    // photon leakage rate
    std::size_t d = 4;     // Fock truncation

    void validate() const {
        auto bad = [](const std::string& what) { throw ConfigError("RabiParams: " + what); };
        if (!(omega_a > 0.0)) bad("omega_a must be > 0");
        if (!(omega_f > 0.0)) bad("omega_f must be > 0");
        if (!(g >= 0.0)) bad("g must be >= 0");
        if (!(kappa >= 0.0)) bad("kappa must be >= 0");
        if (d < 2) bad("d must be >= 2");
    }

    SpaceLayout layout() const { return SpaceLayout(d); }

    RabiParams with_d(std::size_t new_d) const {
        RabiParams p = *this;
        p.d = new_d;
        return p;
    }

    RabiParams with_g(double new_g) const {
        RabiParams p = *this;
        p.g = new_g;
        return p;
    }
};

namespace detail {

inline ComplexMatrix bare_hamiltonian(const RabiParams& p, const SpaceLayout& layout) {
    ComplexMatrix h = embed(ops::sigma_z(), Slot::A, layout);
    h += embed(ops::sigma_z(), Slot::B, layout);
    h *= 0.5 * p.omega_a;
    h.add_scaled(embed(number_operator(layout.fock_dim()), Slot::F, layout), p.omega_f);
    return h;
}

} // namespace detail

// (omega_a/2)(sz_A + sz_B) + omega_f a^dag a + g (sx_A + sx_B)(a + a^dag)
inline ComplexMatrix rabi_hamiltonian(const RabiParams& p) {
    p.validate();
    const auto layout = p.layout();
    ComplexMatrix h = detail::bare_hamiltonian(p, layout);
    const std::size_t d = layout.fock_dim();
    const auto field = embed(annihilation(d) + creation(d), Slot::F, layout);
    const auto sx = embed(ops::sigma_x(), Slot::A, layout) + embed(ops::sigma_x(), Slot::B, layout);
    h.add_scaled(sx * field, p.g);
    return h;
}

// (omega_a/2)(sz_A + sz_B) + omega_f a^dag a + g sum_j (s+_j a + s-_j a^dag)
inline ComplexMatrix jc_hamiltonian(const RabiParams& p) {
    p.validate();
    const auto layout = p.layout();
    ComplexMatrix h = detail::bare_hamiltonian(p, layout);
    const std::size_t d = layout.fock_dim();
    const auto a = embed(annihilation(d), Slot::F, layout);
    const auto ad = embed(creation(d), Slot::F, layout);
    for (Slot s : {Slot::A, Slot::B}) {
        h.add_scaled(embed(ops::sigma_plus(), s, layout) * a, p.g);
        h.add_scaled(embed(ops::sigma_minus(), s, layout) * ad, p.g);
    }
    return h;
}

// a^dag a + |e><e|_A + |e><e|_B
inline ComplexMatrix excitation_number(const SpaceLayout& layout) {
    ComplexMatrix n = embed(number_operator(layout.fock_dim()), Slot::F, layout);
    n += embed(ops::excited_projector(), Slot::A, layout);
    n += embed(ops::excited_projector(), Slot::B, layout);
    return n;
}

// Energy-ordered eigenpairs of a Hamiltonian.
struct DressedSpectrum {
    std::vector<double> energies;  // ascending
    ComplexMatrix states;          // column j is |j>

    std::size_t dim() const noexcept { return energies.size(); }
    Vector state(std::size_t j) const { return states.column(j); }
    Vector ground_state() const { return states.column(0); }
};

inline DressedSpectrum dressed_spectrum(const ComplexMatrix& h,
                                        const NumericPolicy& pol = default_policy()) {
    auto eig = hermitian_eig(h, pol);
    return {std::move(eig.values), std::move(eig.vectors)};
}

struct Transition {
    std::size_t lower;  // j
    std::size_t upper;  // k > j
};

// |ket><bra| between two dressed levels.
struct RankOneOperator {
    Vector ket;
    Vector bra;
    Transition levels;
};

struct JumpChannel {
    std::variant<ComplexMatrix, RankOneOperator> op;
    double rate = 0.0;

    std::size_t dim() const {
        if (const auto* m = std::get_if<ComplexMatrix>(&op)) return m->rows();
        return std::get<RankOneOperator>(op).ket.size();
    }

    ComplexMatrix matrix() const {
        if (const auto* m = std::get_if<ComplexMatrix>(&op)) return *m;
        const auto& r = std::get<RankOneOperator>(op);
        return ComplexMatrix::outer(r.ket, r.bra);
    }

    std::optional<Transition> transition() const {
        if (const auto* r = std::get_if<RankOneOperator>(&op)) return r->levels;
        return std::nullopt;
    }
};

// kappa D[a]
inline JumpChannel standard_channel(const RabiParams& p) {
    p.validate();
    const auto layout = p.layout();
    return {embed(annihilation(layout.fock_dim()), Slot::F, layout), p.kappa};
}

// <j|(a + a^dag)|k> for every pair of dressed levels.
inline ComplexMatrix field_quadrature_elements(const DressedSpectrum& spec, const RabiParams& p) {
    const auto layout = p.layout();
    if (spec.dim() != layout.total_dim())
        throw ConfigError("field_quadrature_elements: spectrum dimension " +
                          std::to_string(spec.dim()) + " does not match 4d=" +
                          std::to_string(layout.total_dim()));
    const std::size_t d = layout.fock_dim();
    const auto x = embed(annihilation(d) + creation(d), Slot::F, layout);
    return spec.states.adjoint() * (x * spec.states);
}

// One channel |j><k| per pair k > j with
// rate = kappa (w_k - w_j)/omega_f |<j|(a + a^dag)|k>|^2 above rate_floor * kappa.
inline std::vector<JumpChannel> improved_channels(const DressedSpectrum& spec, const RabiParams& p,
                                                  const NumericPolicy& pol = default_policy()) {
    p.validate();
    const auto x = field_quadrature_elements(spec, p);
    const double floor = pol.rate_floor * p.kappa;
    std::vector<JumpChannel> out;
    for (std::size_t k = 0; k < spec.dim(); ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            const double rate =
                p.kappa * (spec.energies[k] - spec.energies[j]) / p.omega_f * std::norm(x(j, k));
            if (rate < 0.0)
                throw PhysicsError("improved_channels: negative rate " + std::to_string(rate) +
                                   " for " + std::to_string(k) + "->" + std::to_string(j));
            if (rate <= floor) continue;
            out.push_back({RankOneOperator{spec.state(j), spec.state(k), {j, k}}, rate});
        }
    }
    return out;
}

} // namespace dqed
