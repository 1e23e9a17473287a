// linalg.hpp: Dense complex matrices, Kronecker products, Hermitian eigensolver, norms, entropy

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/policy.hpp"

namespace dqed {

using Complex = std::complex<double>;
using Vector = std::vector<Complex>;

inline constexpr Complex kI{0.0, 1.0};

// Row-major dense complex matrix with value semantics.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw ConfigError("ComplexMatrix: entry count " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw ConfigError("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const double> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    // |ket><bra|
    static ComplexMatrix outer(std::span<const Complex> ket, std::span<const Complex> bra) {
        ComplexMatrix m(ket.size(), bra.size());
        for (std::size_t i = 0; i < ket.size(); ++i)
            for (std::size_t j = 0; j < bra.size(); ++j) m(i, j) = ket[i] * std::conj(bra[j]);
        return m;
    }

    static ComplexMatrix projector(std::span<const Complex> ket) { return outer(ket, ket); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const noexcept {
        return data_[i * cols_ + j];
    }

    std::span<Complex> entries() noexcept { return data_; }
    std::span<const Complex> entries() const noexcept { return data_; }
    std::span<const Complex> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    Vector column(std::size_t j) const {
        Vector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    ComplexMatrix conjugate() const {
        ComplexMatrix m = *this;
        for (auto& z : m.data_) z = std::conj(z);
        return m;
    }

    Complex trace() const {
        Complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }

    ComplexMatrix& operator*=(Complex s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    // this += s * o
    ComplexMatrix& add_scaled(const ComplexMatrix& o, Complex s) {
        require_same_shape(o, "add_scaled");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= Complex(s); }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_)
            throw ConfigError("matrix product: inner dimensions " + std::to_string(a.cols_) +
                              " and " + std::to_string(b.rows_) + " differ");
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            Complex* crow = c.data_.data() + i * c.cols_;
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex(0.0)) continue;
                const Complex* brow = b.data_.data() + k * b.cols_;
                for (std::size_t j = 0; j < b.cols_; ++j) crow[j] += aik * brow[j];
            }
        }
        return c;
    }

    friend Vector operator*(const ComplexMatrix& a, std::span<const Complex> v) {
        if (a.cols_ != v.size()) throw ConfigError("matrix-vector product: dimension mismatch");
        Vector out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            Complex s = 0.0;
            for (std::size_t j = 0; j < a.cols_; ++j) s += a(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    void require_same_shape(const ComplexMatrix& o, const char* what) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw ConfigError(std::string(what) + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

// Hermitian, unit-trace, positive-semidefinite matrix. Kept as a plain alias;
// `check_density_matrix` validates on demand.
using DensityMatrix = ComplexMatrix;

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex(0.0)) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    k(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return k;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm(std::span<const Complex> v) { return std::sqrt(std::real(inner(v, v))); }

// Tr(op * rho)
inline Complex expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
    if (op.cols() != rho.rows() || op.rows() != rho.cols())
        throw ConfigError("expectation: dimension mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < op.rows(); ++i)
        for (std::size_t k = 0; k < op.cols(); ++k) s += op(i, k) * rho(k, i);
    return s;
}

inline double max_asymmetry(const ComplexMatrix& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
    return worst;
}

inline bool is_hermitian(const ComplexMatrix& m, const NumericPolicy& pol = default_policy()) {
    return m.is_square() && max_asymmetry(m) <= pol.hermiticity * std::max(1.0, m.max_abs());
}

// (m + m^dagger) / 2
inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
    ComplexMatrix h(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return h;
}

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // orthonormal columns, vectors.column(j) pairs with values[j]

    Vector vector(std::size_t j) const { return vectors.column(j); }
};

namespace detail {

inline double offdiag_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p, q). The unitary acting on columns
// (p, q) is U = diag(1, e^{-i alpha}) * [[c, s], [-s, c]], alpha = arg a(p, q).
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const Complex apq = a(p, q);
    const double mag = std::abs(apq);
    const Complex phase = apq / mag;  // e^{i alpha}
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();

    const double theta = (aqq - app) / (2.0 * mag);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const std::size_t n = a.rows();
    const Complex upp = c, upq = s;
    const Complex uqp = -s * std::conj(phase), uqq = c * std::conj(phase);

    // A <- A U
    for (std::size_t r = 0; r < n; ++r) {
        const Complex arp = a(r, p), arq = a(r, q);
        a(r, p) = arp * upp + arq * uqp;
        a(r, q) = arp * upq + arq * uqq;
    }
    // A <- U^dagger A
    for (std::size_t r = 0; r < n; ++r) {
        const Complex apr = a(p, r), aqr = a(q, r);
        a(p, r) = std::conj(upp) * apr + std::conj(uqp) * aqr;
        a(q, r) = std::conj(upq) * apr + std::conj(uqq) * aqr;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = app - t * mag;
    a(q, q) = aqq + t * mag;

    // V <- V U
    for (std::size_t r = 0; r < n; ++r) {
        const Complex vrp = v(r, p), vrq = v(r, q);
        v(r, p) = vrp * upp + vrq * uqp;
        v(r, q) = vrp * upq + vrq * uqq;
    }
}

// Replace the columns [first, last) of `vecs` (a degenerate group) by the
// Gram-Schmidt orthonormalization of the group projector applied to the
// standard basis vectors e_0, e_1, ... in index order. The result depends only
// on the eigenspace, not on the rotation sequence that produced it.
inline void canonicalize_group(ComplexMatrix& vecs, std::size_t first, std::size_t last) {
    const std::size_t n = vecs.rows();
    const std::size_t k = last - first;
    std::vector<Vector> basis;
    basis.reserve(k);
    for (std::size_t e = 0; e < n && basis.size() < k; ++e) {
        // w = P e_e with P = sum_j v_j v_j^dagger
        Vector w(n, 0.0);
        for (std::size_t j = first; j < last; ++j) {
            const Complex coeff = std::conj(vecs(e, j));
            for (std::size_t r = 0; r < n; ++r) w[r] += vecs(r, j) * coeff;
        }
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) {
                const Complex ov = inner(b, w);
                for (std::size_t r = 0; r < n; ++r) w[r] -= ov * b[r];
            }
        const double nw = norm(w);
        if (nw < 1e-4) continue;
        for (auto& z : w) z /= nw;
        basis.push_back(std::move(w));
    }
    // Numerical rank fell short (should not happen for a genuine eigenspace);
    // keep the solver's own vectors in that case.
    if (basis.size() < k) return;
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t r = 0; r < n; ++r) vecs(r, first + j) = basis[j][r];
}

// Rotate the column so its dominant component (first one within 1e-6 of the
// maximum magnitude) is real and positive.
inline void fix_phase(ComplexMatrix& vecs, std::size_t j) {
    const std::size_t n = vecs.rows();
    double big = 0.0;
    for (std::size_t r = 0; r < n; ++r) big = std::max(big, std::abs(vecs(r, j)));
    for (std::size_t r = 0; r < n; ++r) {
        if (std::abs(vecs(r, j)) >= big - 1e-6) {
            const Complex ph = std::conj(vecs(r, j)) / std::abs(vecs(r, j));
            for (std::size_t s = 0; s < n; ++s) vecs(s, j) *= ph;
            vecs(r, j) = std::abs(vecs(r, j));
            return;
        }
    }
}

} // namespace detail

// Cyclic complex Jacobi. Eigenvalues ascending; degenerate groups get a
// deterministic basis; every eigenvector has its dominant component real positive.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& m,
                                        const NumericPolicy& pol = default_policy()) {
    if (!m.is_square()) throw ConfigError("hermitian_eig: matrix is not square");
    const double asym = max_asymmetry(m);
    if (asym > pol.hermiticity * std::max(1.0, m.max_abs()))
        throw NotHermitianError("hermitian_eig", asym);

    const std::size_t n = m.rows();
    ComplexMatrix a = hermitian_part(m);
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = a.frobenius_norm();
    const double stop = pol.jacobi_offdiag * scale;

    int sweep = 0;
    while (detail::offdiag_norm(a) > stop) {
        if (++sweep > pol.jacobi_max_sweeps)
            throw ConvergenceError("hermitian_eig: Jacobi did not converge in " +
                                   std::to_string(pol.jacobi_max_sweeps) + " sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > 1e-300) detail::jacobi_rotate(a, v, p, q);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
    }

    const double gap = pol.degeneracy * std::max(1.0, scale);
    for (std::size_t first = 0; first < n;) {
        std::size_t last = first + 1;
        while (last < n && out.values[last] - out.values[last - 1] <= gap) ++last;
        if (last - first > 1) detail::canonicalize_group(out.vectors, first, last);
        first = last;
    }
    for (std::size_t j = 0; j < n; ++j) detail::fix_phase(out.vectors, j);
    return out;
}

// Sum of singular values. Hermitian input uses sum |lambda|; otherwise the
// eigenvalues of the smaller Gram matrix (G G^dagger or G^dagger G).
inline double trace_norm(const ComplexMatrix& g, const NumericPolicy& pol = default_policy()) {
    if (g.size() == 0) return 0.0;
    if (is_hermitian(g, pol)) {
        double s = 0.0;
        for (double l : hermitian_eig(g, pol).values) s += std::abs(l);
        return s;
    }
    const ComplexMatrix gram = g.rows() <= g.cols() ? g * g.adjoint() : g.adjoint() * g;
    const auto values = hermitian_eig(gram, pol).values;
    // Gram eigenvalues at rounding level would add sqrt(noise) to the sum.
    const double floor = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon() * values.back();
    double s = 0.0;
    for (double l : values)
        if (l > floor) s += std::sqrt(l);
    return s;
}

// (1/2) ||a - b||_1 for Hermitian a, b.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b,
                             const NumericPolicy& pol = default_policy()) {
    return 0.5 * trace_norm(hermitian_part(a - b), pol);
}

inline double min_eigenvalue(const ComplexMatrix& m, const NumericPolicy& pol = default_policy()) {
    return hermitian_eig(m, pol).values.front();
}

// -sum lambda log2 lambda with 0 log 0 = 0.
inline double entropy_of_spectrum(std::span<const double> values,
                                  const NumericPolicy& pol = default_policy()) {
    double s = 0.0;
    for (double l : values) {
        if (l < -pol.entropy_negativity) throw PositivityError("von_neumann_entropy", l);
        if (l > 0.0) s -= l * std::log2(l);
    }
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho,
                                  const NumericPolicy& pol = default_policy()) {
    const auto eig = hermitian_eig(rho, pol);
    return entropy_of_spectrum(eig.values, pol);
}

// Throws unless rho is square, Hermitian, unit trace (within trace_tol) and
// has no eigenvalue below -pol.positivity_warn.
inline void check_density_matrix(const ComplexMatrix& rho, const std::string& where,
                                  const NumericPolicy& pol = default_policy()) {
    if (!rho.is_square()) throw ConfigError(where + ": density matrix must be square");
    const double asym = max_asymmetry(rho);
    if (asym > pol.hermiticity * std::max(1.0, rho.max_abs()))
        throw NotHermitianError(where, asym);
    const Complex tr = rho.trace();
    if (std::abs(tr - 1.0) > pol.trace_tolerance)
        throw PhysicsError(where + ": trace " + std::to_string(tr.real()) + " is not 1");
    const double lmin = min_eigenvalue(rho, pol);
    if (lmin < -pol.positivity_warn) throw PositivityError(where, lmin);
}

} // namespace dqed
