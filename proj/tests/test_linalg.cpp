#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "test_support.hpp"

using namespace dqed;
using dqed::testing::Rng;
using dqed::testing::max_diff;

namespace {

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

} // namespace

TEST(ComplexMatrix, EntryCountMustMatchShape) {
    EXPECT_THROW(ComplexMatrix(2, 2, std::vector<Complex>(3)), ConfigError);
    EXPECT_NO_THROW(ComplexMatrix(2, 3, std::vector<Complex>(6)));
}

TEST(ComplexMatrix, DoubleAdjointIsExact) {
    Rng rng(11);
    const auto m = rng.matrix(5, 3);
    EXPECT_TRUE(m.adjoint().adjoint() == m);
}

TEST(Kron, IdentityTimesIdentity) {
    EXPECT_TRUE(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)) == ComplexMatrix::identity(4));
}

TEST(Kron, SigmaZWithIdentity) {
    const std::vector<double> d{1, 1, -1, -1};
    EXPECT_TRUE(kron(ops::sigma_z(), ops::identity2()) == ComplexMatrix::diagonal(d));
}

TEST(Kron, DoubleBitFlip) {
    const Vector v{1.0, 0.0, 0.0, 0.0};
    const auto out = kron(ops::sigma_x(), ops::sigma_x()) * std::span<const Complex>(v);
    EXPECT_EQ(out, (Vector{0.0, 0.0, 0.0, 1.0}));
}

TEST(Kron, AssociativeOnRandomMatrices) {
    // Gaussian-integer entries keep every product exact, so equality is bitwise.
    Rng rng(12);
    auto integral = [&](std::size_t r, std::size_t c) {
        ComplexMatrix m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                m(i, j) = Complex(std::round(rng.uniform(-9, 9)), std::round(rng.uniform(-9, 9)));
        return m;
    };
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = integral(2, 3), b = integral(3, 2), c = integral(2, 2);
        EXPECT_TRUE(kron(kron(a, b), c) == kron(a, kron(b, c)));
    }
}

TEST(HermitianEig, PauliX) {
    const auto e = hermitian_eig(ops::sigma_x());
    EXPECT_NEAR(e.values[0], -1.0, 1e-14);
    EXPECT_NEAR(e.values[1], 1.0, 1e-14);
}

TEST(HermitianEig, IdentityHasUnitSpectrumAndOrthonormalBasis) {
    const auto e = hermitian_eig(ComplexMatrix::identity(5));
    for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_LT(max_diff(e.vectors.adjoint() * e.vectors, ComplexMatrix::identity(5)), 1e-14);
}

TEST(HermitianEig, TwoByTwoCharacteristicPolynomial) {
    const ComplexMatrix m{{2.0, Complex(1, 1)}, {Complex(1, -1), 3.0}};
    const auto e = hermitian_eig(m);
    EXPECT_NEAR(e.values[0], 1.0, 1e-12);
    EXPECT_NEAR(e.values[1], 4.0, 1e-12);
}

TEST(HermitianEig, RejectsNonHermitianWithAsymmetry) {
    const ComplexMatrix m{{0.0, 1.0}, {0.5, 0.0}};
    try {
        hermitian_eig(m);
        FAIL() << "expected NotHermitianError";
    } catch (const NotHermitianError& e) {
        EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
    }
}

TEST(HermitianEig, RandomMatricesAgainstEigen) {
    Rng rng(13);
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u, 16u}) {
        const auto m = rng.hermitian(n);
        const auto e = hermitian_eig(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(to_eigen(m));
        const double scale = m.frobenius_norm();
        for (std::size_t j = 0; j < n; ++j) {
            EXPECT_NEAR(e.values[j], oracle.eigenvalues()(static_cast<Eigen::Index>(j)), 1e-10 * scale);
            if (j > 0) EXPECT_LE(e.values[j - 1], e.values[j]);
            const auto v = e.vector(j);
            const auto mv = m * std::span<const Complex>(v);
            double res = 0.0;
            for (std::size_t i = 0; i < n; ++i) res += std::norm(mv[i] - e.values[j] * v[i]);
            EXPECT_LE(std::sqrt(res), 1e-10 * scale);
        }
        std::vector<double> vals(e.values.begin(), e.values.end());
        const auto rebuilt = e.vectors * (ComplexMatrix::diagonal(vals) * e.vectors.adjoint());
        EXPECT_LE(max_diff(rebuilt, m), 1e-9 * scale);
        EXPECT_LE(max_diff(e.vectors.adjoint() * e.vectors, ComplexMatrix::identity(n)), 1e-10);
    }
}

TEST(HermitianEig, DegenerateEigenvectorsAreReproducible) {
    // Same input twice gives identical output, and the degenerate pair is canonical.
    const std::vector<double> d{1.0, 1.0, 2.0};
    const auto a = hermitian_eig(ComplexMatrix::diagonal(d));
    const auto b = hermitian_eig(ComplexMatrix::diagonal(d));
    EXPECT_TRUE(a.vectors == b.vectors);
    EXPECT_NEAR(std::abs(a.vectors(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(a.vectors(1, 1)), 1.0, 1e-12);
}

TEST(TraceNorm, Examples) {
    EXPECT_NEAR(trace_norm(ComplexMatrix::identity(2)), 2.0, 1e-14);
    const std::vector<double> d{3.0, -4.0};
    EXPECT_NEAR(trace_norm(ComplexMatrix::diagonal(d)), 7.0, 1e-14);
    EXPECT_NEAR(trace_norm(ComplexMatrix{{0.0, 2.0}, {0.0, 0.0}}), 2.0, 1e-12);
}

TEST(TraceNorm, MatchesSingularValuesFromEigen) {
    Rng rng(14);
    for (auto [r, c] : {std::pair{3u, 3u}, std::pair{4u, 9u}, std::pair{4u, 16u}, std::pair{6u, 2u}}) {
        const auto m = rng.matrix(r, c);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
        EXPECT_NEAR(trace_norm(m), svd.singularValues().sum(), 1e-9);
    }
}

TEST(TraceNorm, UnitarilyInvariant) {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
        const auto m = rng.matrix(n, n);
        const auto u = rng.unitary(n), w = rng.unitary(n);
        EXPECT_NEAR(trace_norm(u * (m * w)), trace_norm(m), 1e-8);
    }
}

TEST(Entropy, PureStateIsZero) {
    Rng rng(16);
    EXPECT_NEAR(von_neumann_entropy(ComplexMatrix::projector(rng.ket(6))), 0.0, 1e-10);
}

TEST(Entropy, MaximallyMixedQubitIsOne) {
    const auto rho = ComplexMatrix::identity(2) * Complex(0.5);
    EXPECT_NEAR(von_neumann_entropy(rho), 1.0, 1e-14);
}

TEST(Entropy, ThreeQuartersOneQuarter) {
    const std::vector<double> d{0.75, 0.25};
    EXPECT_NEAR(von_neumann_entropy(ComplexMatrix::diagonal(d)), 0.811278124459, 1e-9);
}

TEST(Entropy, RejectsNegativeEigenvalue) {
    const std::vector<double> d{1.1, -0.1};
    EXPECT_THROW(von_neumann_entropy(ComplexMatrix::diagonal(d)), PositivityError);
}

TEST(Entropy, ClampsTinyNegativeEigenvalue) {
    const std::vector<double> d{1.0 + 1e-10, -1e-10};
    EXPECT_NEAR(von_neumann_entropy(ComplexMatrix::diagonal(d)), 0.0, 1e-8);
}

TEST(Entropy, BasisIndependent) {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rho = rng.density(6);
        const auto u = rng.unitary(6);
        EXPECT_NEAR(von_neumann_entropy(u * (rho * u.adjoint())), von_neumann_entropy(rho), 1e-9);
    }
}
