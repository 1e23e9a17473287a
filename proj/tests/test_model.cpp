#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"

using namespace dqed;
using dqed::testing::Rng;
using dqed::testing::max_diff;

namespace {

RabiParams params(double g, std::size_t d, double kappa = 0.2) { return {1.0, 1.0, g, kappa, d}; }

} // namespace

TEST(RabiParams, Validation) {
    EXPECT_NO_THROW(params(0.1, 4).validate());
    EXPECT_THROW(params(-0.1, 4).validate(), ConfigError);
    EXPECT_THROW(params(0.1, 1).validate(), ConfigError);
    EXPECT_THROW((RabiParams{0.0, 1.0, 0.1, 0.2, 4}).validate(), ConfigError);
    EXPECT_THROW(params(0.1, 4, -1.0).validate(), ConfigError);
}

TEST(RabiHamiltonian, MatrixElements) {
    const auto p = params(0.3, 4);
    const auto layout = p.layout();
    const auto h = rabi_hamiltonian(p);
    const auto gg0 = layout.index(Qubit::g, Qubit::g, 0);
    EXPECT_NEAR(h(gg0, gg0).real(), -1.0, 1e-15);
    EXPECT_NEAR(h(layout.index(Qubit::g, Qubit::g, 1), layout.index(Qubit::e, Qubit::g, 0)).real(), 0.3, 1e-15);
    // counter-rotating: |ee1> from |eg0>
    EXPECT_NEAR(h(layout.index(Qubit::e, Qubit::e, 1), layout.index(Qubit::e, Qubit::g, 0)).real(), 0.3, 1e-15);
    EXPECT_TRUE(is_hermitian(h));
}

TEST(RabiHamiltonian, DecoupledSpectrum) {
    const auto p = RabiParams{0.7, 1.3, 0.0, 0.0, 3};
    const auto e = dressed_spectrum(rabi_hamiltonian(p));
    std::vector<double> expected;
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            for (int n = 0; n < 3; ++n) expected.push_back(0.5 * 0.7 * (sa + sb) + n * 1.3);
    std::sort(expected.begin(), expected.end());
    for (std::size_t j = 0; j < expected.size(); ++j) EXPECT_NEAR(e.energies[j], expected[j], 1e-12);
}

TEST(JcHamiltonian, MatrixElements) {
    const auto p = params(0.3, 4);
    const auto layout = p.layout();
    const auto h = jc_hamiltonian(p);
    EXPECT_EQ(h(layout.index(Qubit::e, Qubit::e, 1), layout.index(Qubit::e, Qubit::g, 0)), Complex(0.0));
    EXPECT_EQ(h(layout.index(Qubit::g, Qubit::g, 1), layout.index(Qubit::g, Qubit::e, 2)), Complex(0.0));
    EXPECT_NEAR(h(layout.index(Qubit::e, Qubit::g, 0), layout.index(Qubit::g, Qubit::g, 1)).real(), 0.3, 1e-15);
}

TEST(JcHamiltonian, ConservesExcitations) {
    const auto p = params(0.37, 5);
    EXPECT_EQ(commutator(jc_hamiltonian(p), excitation_number(p.layout())).max_abs(), 0.0);
}

TEST(JcHamiltonian, SingleExcitationSplitting) {
    // {|eg0>, |ge0>, |gg1>} at resonance: 0 and +-sqrt(2) g
    const double g = 0.05;
    const auto spec = dressed_spectrum(jc_hamiltonian(params(g, 4)));
    const auto has = [&](double target) {
        return std::any_of(spec.energies.begin(), spec.energies.end(),
                           [&](double e) { return std::abs(e - target) < 1e-12; });
    };
    EXPECT_TRUE(has(std::sqrt(2.0) * g));
    EXPECT_TRUE(has(-std::sqrt(2.0) * g));
    EXPECT_TRUE(has(0.0));
}

TEST(RabiMinusJc, OnlyChangesExcitationsByTwo) {
    const auto p = params(0.4, 4);
    const auto layout = p.layout();
    const auto diff = rabi_hamiltonian(p) - jc_hamiltonian(p);
    for (std::size_t u = 0; u < layout.total_dim(); ++u)
        for (std::size_t v = 0; v < layout.total_dim(); ++v) {
            if (std::abs(diff(u, v)) == 0.0) continue;
            const long du = static_cast<long>(layout.excitations(u)) - static_cast<long>(layout.excitations(v));
            EXPECT_EQ(std::abs(du), 2) << u << "," << v;
        }
}

TEST(DressedSpectrum, BareGroundStateAtZeroCoupling) {
    const auto p = params(0.0, 4);
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    EXPECT_NEAR(spec.energies[0], -1.0, 1e-14);
    EXPECT_NEAR(std::abs(spec.ground_state()[p.layout().index(Qubit::g, Qubit::g, 0)]), 1.0, 1e-14);
}

TEST(DressedSpectrum, GroundStateHasCounterRotatingAdmixture) {
    const auto p = params(0.5, 12);
    const auto layout = p.layout();
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    double ee = 0.0;
    for (std::size_t n = 0; n < p.d; ++n) ee += std::norm(spec.ground_state()[layout.index(Qubit::e, Qubit::e, n)]);
    EXPECT_GT(ee, 1e-3);
    EXPECT_GT(mean_photon_number(ComplexMatrix::projector(spec.ground_state()), layout), 1e-2);
}

TEST(DressedSpectrum, OrthonormalAndAscending) {
    const auto p = params(0.8, 8);
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    EXPECT_LT(max_diff(spec.states.adjoint() * spec.states, ComplexMatrix::identity(spec.dim())), 1e-10);
    EXPECT_TRUE(std::is_sorted(spec.energies.begin(), spec.energies.end()));
}

TEST(StandardChannel, Basics) {
    const auto p = params(0.1, 3, 0.37);
    const auto layout = p.layout();
    const auto c = standard_channel(p);
    EXPECT_DOUBLE_EQ(c.rate, 0.37);
    const auto gg0 = basis_ket(layout, Qubit::g, Qubit::g, 0);
    for (const auto& z : c.matrix() * std::span<const Complex>(gg0)) EXPECT_EQ(z, Complex(0.0));
}

TEST(StandardChannel, PopulationFlowFromOnePhoton) {
    const auto p = params(0.0, 3, 0.37);
    const auto layout = p.layout();
    const auto rho = pure_state(basis_ket(layout, Qubit::g, Qubit::g, 1));
    const std::vector<JumpChannel> ch{standard_channel(p)};
    const auto drho = liouvillian_apply(rho, ComplexMatrix(layout.total_dim(), layout.total_dim()), ch);
    ComplexMatrix expected(layout.total_dim(), layout.total_dim());
    expected(layout.index(Qubit::g, Qubit::g, 0), layout.index(Qubit::g, Qubit::g, 0)) = 0.37;
    expected(layout.index(Qubit::g, Qubit::g, 1), layout.index(Qubit::g, Qubit::g, 1)) = -0.37;
    EXPECT_LT(max_diff(drho, expected), 1e-15);
}

TEST(ImprovedChannels, BareRatesAtZeroCoupling) {
    const auto p = params(0.0, 3, 0.3);
    const auto layout = p.layout();
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    const auto channels = improved_channels(spec, p);
    EXPECT_EQ(channels.size(), 8u);
    for (const auto& c : channels) {
        const auto tr = *c.transition();
        // eigenvectors are bare basis vectors at g = 0
        auto bare = [&](std::size_t j) {
            const auto v = spec.state(j);
            std::size_t best = 0;
            for (std::size_t i = 0; i < v.size(); ++i)
                if (std::abs(v[i]) > std::abs(v[best])) best = i;
            EXPECT_NEAR(std::abs(v[best]), 1.0, 1e-12);
            return layout.labels(best);
        };
        const auto lo = bare(tr.lower), hi = bare(tr.upper);
        EXPECT_EQ(lo.a, hi.a);
        EXPECT_EQ(lo.b, hi.b);
        EXPECT_EQ(lo.n + 1, hi.n);
        EXPECT_NEAR(c.rate, 0.3 * static_cast<double>(hi.n), 1e-12);
    }
}

TEST(ImprovedChannels, DegenerateLevelsGetNoChannel) {
    const auto p = params(0.0, 3, 0.3);
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    for (const auto& c : improved_channels(spec, p)) {
        const auto tr = *c.transition();
        EXPECT_GT(spec.energies[tr.upper] - spec.energies[tr.lower], 1e-9);
        EXPECT_GT(tr.upper, tr.lower);
    }
}

TEST(ImprovedChannels, RatesAreNonNegativeAndPhaseFree) {
    Rng rng(41);
    const auto p = params(0.6, 6, 0.2);
    auto spec = dressed_spectrum(rabi_hamiltonian(p));
    const auto base = improved_channels(spec, p);
    for (const auto& c : base) EXPECT_GE(c.rate, 0.0);
    for (std::size_t j = 0; j < spec.dim(); ++j) {
        const Complex ph = std::polar(1.0, rng.uniform(0.0, 6.283185307179586));
        for (std::size_t i = 0; i < spec.dim(); ++i) spec.states(i, j) *= ph;
    }
    const auto rephased = improved_channels(spec, p);
    ASSERT_EQ(base.size(), rephased.size());
    for (std::size_t k = 0; k < base.size(); ++k) EXPECT_NEAR(base[k].rate, rephased[k].rate, 1e-14);
}

TEST(ImprovedChannels, RateFloorDropsTinyChannels) {
    const auto p = params(1e-3, 4, 0.2);
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    NumericPolicy loose = default_policy();
    loose.rate_floor = 1e-3;
    const auto all = improved_channels(spec, p);
    const auto some = improved_channels(spec, p, loose);
    EXPECT_LT(some.size(), all.size());
    for (const auto& c : some) EXPECT_GT(c.rate, 1e-3 * 0.2);
}

TEST(ImprovedChannels, RejectsMismatchedSpectrum) {
    const auto spec = dressed_spectrum(rabi_hamiltonian(params(0.1, 3)));
    EXPECT_THROW(improved_channels(spec, params(0.1, 4)), ConfigError);
}

// Weak coupling: each dressed level's total decay rate tends to kappa <k|a^dag a|k>,
// the value the standard dissipator assigns to the same state.
TEST(ImprovedChannels, WeakCouplingDecayRatesMatchPhotonNumber) {
    const auto p = params(1e-6, 4, 0.2);
    const auto layout = p.layout();
    const auto spec = dressed_spectrum(rabi_hamiltonian(p));
    std::vector<double> decay(spec.dim(), 0.0);
    for (const auto& c : improved_channels(spec, p)) decay[c.transition()->upper] += c.rate;
    const auto n_op = embed(number_operator(p.d), Slot::F, layout);
    for (std::size_t k = 0; k < spec.dim(); ++k) {
        const double n = std::real(expectation(n_op, ComplexMatrix::projector(spec.state(k))));
        EXPECT_NEAR(decay[k], 0.2 * n, 1e-6) << "level " << k;
    }
}
