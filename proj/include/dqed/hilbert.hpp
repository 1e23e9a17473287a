// hilbert.hpp: The 2 (x) 2 (x) d atoms-field space: basis ordering, operator embedding,
// partial trace, partial transpose and realignment

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/linalg.hpp"

namespace dqed {

// Qubit basis code: excited first, so ee, eg, ge, gg is the natural row order.
enum class Qubit : std::size_t { e = 0, g = 1 };

enum class Slot { A, B, F };

// Basis |i j n> with index (2 i + j) d + n.
class SpaceLayout {
public:
    explicit SpaceLayout(std::size_t fock_dim) : d_(fock_dim) {
        if (fock_dim < 2)
            throw ConfigError("SpaceLayout: Fock dimension must be >= 2, got " +
                              std::to_string(fock_dim));
    }

    std::size_t fock_dim() const noexcept { return d_; }
    std::size_t total_dim() const noexcept { return 4 * d_; }

    std::size_t index(Qubit a, Qubit b, std::size_t n) const {
        if (n >= d_)
            throw ConfigError("SpaceLayout: Fock index " + std::to_string(n) +
                              " outside truncation d=" + std::to_string(d_));
        return (2 * static_cast<std::size_t>(a) + static_cast<std::size_t>(b)) * d_ + n;
    }

    struct Labels {
        Qubit a;
        Qubit b;
        std::size_t n;
    };

    Labels labels(std::size_t idx) const {
        return {static_cast<Qubit>(idx / (2 * d_)), static_cast<Qubit>((idx / d_) % 2), idx % d_};
    }

    // Photon number plus the number of excited qubits.
    std::size_t excitations(std::size_t idx) const {
        const auto l = labels(idx);
        return l.n + (l.a == Qubit::e ? 1 : 0) + (l.b == Qubit::e ? 1 : 0);
    }

    std::array<std::size_t, 3> dims() const noexcept { return {2, 2, d_}; }

    friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

private:
    std::size_t d_;
};

namespace ops {

inline ComplexMatrix identity2() { return ComplexMatrix::identity(2); }
inline ComplexMatrix sigma_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline ComplexMatrix sigma_y() { return {{0.0, -kI}, {kI, 0.0}}; }
// +1 on |e>, -1 on |g>
inline ComplexMatrix sigma_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
// |e><g|
inline ComplexMatrix sigma_plus() { return {{0.0, 1.0}, {0.0, 0.0}}; }
// |g><e|
inline ComplexMatrix sigma_minus() { return {{0.0, 0.0}, {1.0, 0.0}}; }
// |e><e|
inline ComplexMatrix excited_projector() { return {{1.0, 0.0}, {0.0, 0.0}}; }

} // namespace ops

// <n-1|a|n> = sqrt(n)
inline ComplexMatrix annihilation(std::size_t d) {
    if (d < 2) throw ConfigError("annihilation: d must be >= 2, got " + std::to_string(d));
    ComplexMatrix a(d, d);
    for (std::size_t n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline ComplexMatrix creation(std::size_t d) { return annihilation(d).adjoint(); }

inline ComplexMatrix number_operator(std::size_t d) {
    if (d < 2) throw ConfigError("number_operator: d must be >= 2, got " + std::to_string(d));
    ComplexMatrix m(d, d);
    for (std::size_t n = 0; n < d; ++n) m(n, n) = static_cast<double>(n);
    return m;
}

// Lift a single-factor operator to the full A (x) B (x) F space.
inline ComplexMatrix embed(const ComplexMatrix& op, Slot slot, const SpaceLayout& layout) {
    const std::size_t d = layout.fock_dim();
    const std::size_t want = slot == Slot::F ? d : 2;
    if (op.rows() != want || op.cols() != want)
        throw ConfigError("embed: operator is " + std::to_string(op.rows()) + "x" +
                          std::to_string(op.cols()) + ", slot needs " + std::to_string(want) +
                          "x" + std::to_string(want));
    const auto id2 = ComplexMatrix::identity(2);
    const auto idf = ComplexMatrix::identity(d);
    switch (slot) {
    case Slot::A: return kron(kron(op, id2), idf);
    case Slot::B: return kron(kron(id2, op), idf);
    case Slot::F: return kron(ComplexMatrix::identity(4), op);
    }
    return {};
}

// General partial trace over a tensor product with factor dimensions `dims`.
// Factors with keep[k] == true survive, in their original order.
inline ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const std::size_t> dims,
                                   std::span<const bool> keep) {
    if (dims.size() != keep.size()) throw ConfigError("partial_trace: dims/keep size mismatch");
    std::size_t total = 1, kept = 1;
    bool any = false;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        total *= dims[k];
        if (keep[k]) {
            kept *= dims[k];
            any = true;
        }
    }
    if (!any) throw ConfigError("partial_trace: keep set is empty");
    if (rho.rows() != total || rho.cols() != total)
        throw ConfigError("partial_trace: matrix is " + std::to_string(rho.rows()) +
                          "-dimensional, factors multiply to " + std::to_string(total));
    const std::size_t traced = total / kept;

    // full index -> (kept index, traced index)
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_traced(traced);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t rem = idx, stride = total, ki = 0, ti = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            stride /= dims[k];
            const std::size_t digit = rem / stride;
            rem %= stride;
            if (keep[k])
                ki = ki * dims[k] + digit;
            else
                ti = ti * dims[k] + digit;
        }
        by_traced[ti].emplace_back(idx, ki);
    }

    ComplexMatrix out(kept, kept);
    for (const auto& group : by_traced)
        for (const auto& [i, ki] : group)
            for (const auto& [j, kj] : group) out(ki, kj) += rho(i, j);
    return out;
}

// Reduced state on the kept factors, in A, B, F order.
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<Slot> keep,
                                   const SpaceLayout& layout) {
    std::array<bool, 3> mask{false, false, false};
    for (Slot s : keep) mask[static_cast<std::size_t>(s)] = true;
    const auto dims = layout.dims();
    return partial_trace(rho, dims, mask);
}

// rho_{(i,m),(j,n)} -> rho_{(j,m),(i,n)} on 2 (x) d.
inline ComplexMatrix partial_transpose_a(const ComplexMatrix& rho_af, std::size_t d) {
    if (rho_af.rows() != 2 * d || rho_af.cols() != 2 * d)
        throw ConfigError("partial_transpose_a: expected a " + std::to_string(2 * d) +
                          "-dimensional qubit-qudit matrix, got " + std::to_string(rho_af.rows()));
    ComplexMatrix out(2 * d, 2 * d);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t m = 0; m < d; ++m)
                for (std::size_t n = 0; n < d; ++n)
                    out(i * d + m, j * d + n) = rho_af(j * d + m, i * d + n);
    return out;
}

// R_{(i,j),(m,n)} = rho_{(i,m),(j,n)}: 4 x d^2.
inline ComplexMatrix realign(const ComplexMatrix& rho_af, std::size_t d) {
    if (rho_af.rows() != 2 * d || rho_af.cols() != 2 * d)
        throw ConfigError("realign: expected a " + std::to_string(2 * d) +
                          "-dimensional qubit-qudit matrix, got " + std::to_string(rho_af.rows()));
    ComplexMatrix r(4, d * d);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t m = 0; m < d; ++m)
                for (std::size_t n = 0; n < d; ++n)
                    r(i * 2 + j, m * d + n) = rho_af(i * d + m, j * d + n);
    return r;
}

inline Vector basis_ket(const SpaceLayout& layout, Qubit a, Qubit b, std::size_t n) {
    Vector v(layout.total_dim(), 0.0);
    v[layout.index(a, b, n)] = 1.0;
    return v;
}

// (|eg> - |ge>)/sqrt(2) (x) |n>
inline Vector phi_minus_ket(const SpaceLayout& layout, std::size_t n = 0) {
    Vector v(layout.total_dim(), 0.0);
    const double h = 1.0 / std::sqrt(2.0);
    v[layout.index(Qubit::e, Qubit::g, n)] = h;
    v[layout.index(Qubit::g, Qubit::e, n)] = -h;
    return v;
}

// Two-qubit (|eg> - |ge>)/sqrt(2) in the (ee, eg, ge, gg) basis.
inline Vector phi_minus_2q() {
    const double h = 1.0 / std::sqrt(2.0);
    return {0.0, h, -h, 0.0};
}

} // namespace dqed
