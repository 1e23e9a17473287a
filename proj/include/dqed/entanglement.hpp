// entanglement.hpp: Concurrence, two-qubit EOF, the PPT/realignment lower bound on
// qubit-qudit EOF, quantum discord, conditional entropy and the monogamy EOF

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/hilbert.hpp"
#include "dqed/linalg.hpp"
#include "dqed/policy.hpp"

namespace dqed {

// H2(x) = -x log2 x - (1-x) log2(1-x)
inline double binary_entropy(double x) {
    constexpr double slack = 1e-12;
    if (!(x >= -slack && x <= 1.0 + slack))
        throw ConfigError("binary_entropy: argument " + std::to_string(x) + " outside [0,1]");
    x = std::clamp(x, 0.0, 1.0);
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

namespace detail {

inline void require_two_qubit(const ComplexMatrix& rho, const char* where) {
    if (rho.rows() != 4 || rho.cols() != 4)
        throw ConfigError(std::string(where) + ": expected a 2x2-qubit (4x4) state, got " +
                          std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()));
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& rho, const NumericPolicy& pol) {
    const auto eig = hermitian_eig(rho, pol);
    std::vector<double> s(eig.values.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sqrt(std::max(eig.values[i], 0.0));
    return eig.vectors * (ComplexMatrix::diagonal(s) * eig.vectors.adjoint());
}

// Eigenvalues of a 2x2 Hermitian [[a, b], [conj b, c]].
inline std::array<double, 2> eig2(double a, Complex b, double c) {
    const double mean = 0.5 * (a + c);
    const double r = std::hypot(0.5 * (a - c), std::abs(b));
    return {mean - r, mean + r};
}

} // namespace detail

// Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the descending square
// roots of the eigenvalues of rho (sy (x) sy) rho* (sy (x) sy), taken from the
// Hermitian form sqrt(rho) rho~ sqrt(rho).
inline double concurrence(const DensityMatrix& rho_ab, const NumericPolicy& pol = default_policy()) {
    detail::require_two_qubit(rho_ab, "concurrence");
    const auto yy = kron(ops::sigma_y(), ops::sigma_y());
    const auto tilde = yy * rho_ab.conjugate() * yy;
    const auto root = detail::psd_sqrt(rho_ab, pol);
    auto vals = hermitian_eig(hermitian_part(root * tilde * root), pol).values;
    std::array<double, 4> l{};
    for (std::size_t i = 0; i < 4; ++i) l[i] = std::sqrt(std::max(vals[i], 0.0));
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

inline double eof_from_concurrence(double c) {
    c = std::clamp(c, 0.0, 1.0);
    return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

inline double eof_two_qubit(const DensityMatrix& rho_ab, const NumericPolicy& pol = default_policy()) {
    return eof_from_concurrence(concurrence(rho_ab, pol));
}

struct LowerBound {
    double lambda = 1.0;        // max(||rho^{T_A}||, ||R(rho)||), after clamping
    double bound = 0.0;
    double ppt_norm = 1.0;
    double realignment_norm = 1.0;
    bool clamped = false;       // lambda exceeded 2 by numerical noise and was clamped
};

// EOF(rho_AF) >= 0 for Lambda <= 1, H2((1 + sqrt(1 - (Lambda - 1)^2))/2) for Lambda in [1, 2].
inline LowerBound eof_lower_bound(const DensityMatrix& rho_af, std::size_t d,
                                  const NumericPolicy& pol = default_policy()) {
    LowerBound out;
    out.ppt_norm = trace_norm(partial_transpose_a(rho_af, d), pol);
    out.realignment_norm = trace_norm(realign(rho_af, d), pol);
    double lambda = std::max(out.ppt_norm, out.realignment_norm);
    if (lambda > 2.0 + pol.lambda_excess)
        throw PhysicsError("eof_lower_bound: Lambda = " + std::to_string(lambda) +
                           " exceeds 2, impossible for a qubit-qudit state");
    if (lambda > 2.0) {
        lambda = 2.0;
        out.clamped = true;
    }
    out.lambda = lambda;
    if (lambda > 1.0) {
        const double e = lambda - 1.0;
        out.bound = binary_entropy(0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - e * e))));
    }
    return out;
}

// S(rho_AB) - S(rho_B)
inline double conditional_entropy(const DensityMatrix& rho_ab, std::size_t dim_a = 2,
                                  std::size_t dim_b = 2, const NumericPolicy& pol = default_policy()) {
    const std::array<std::size_t, 2> dims{dim_a, dim_b};
    const std::array<bool, 2> keep_b{false, true};
    return von_neumann_entropy(rho_ab, pol) - von_neumann_entropy(partial_trace(rho_ab, dims, keep_b), pol);
}

// ---------------------------------------------------------------------------
// Quantum discord with projective measurements on B

struct Measurement {
    double theta = 0.0;  // |m0> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
    double phi = 0.0;
    double conditional_entropy = 0.0;  // sum_k p_k S(rho_{A|k})
};

// sum_k p_k S(rho_{A|k}) after measuring B in the basis given by (theta, phi).
inline double measured_conditional_entropy(const DensityMatrix& rho_ab, double theta, double phi) {
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    const Complex e = std::polar(1.0, phi);
    const std::array<std::array<Complex, 2>, 2> basis{{{c, e * s}, {-std::conj(e) * s, c}}};
    double total = 0.0;
    for (const auto& m : basis) {
        // sigma_k(a, a') = sum_{b b'} conj(m_b) rho_{(a b),(a' b')} m_b'
        std::array<std::array<Complex, 2>, 2> sig{};
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t ap = 0; ap < 2; ++ap) {
                Complex acc = 0.0;
                for (std::size_t b = 0; b < 2; ++b)
                    for (std::size_t bp = 0; bp < 2; ++bp)
                        acc += std::conj(m[b]) * rho_ab(2 * a + b, 2 * ap + bp) * m[bp];
                sig[a][ap] = acc;
            }
        const double p = sig[0][0].real() + sig[1][1].real();
        if (p <= 1e-15) continue;
        const auto mu = detail::eig2(sig[0][0].real(), sig[0][1], sig[1][1].real());
        for (double v : mu)
            if (v > 0.0) total -= v * std::log2(v / p);
    }
    return total;
}

namespace detail {

struct Point {
    double theta, phi, f;
};

// Nelder-Mead on (theta, phi); stops when both the spread of f over the
// simplex is below f_tol and the simplex diameter is below x_tol.
template <class F>
Point nelder_mead_2d(F&& f, double theta0, double phi0, double step, double f_tol, double x_tol,
                     int max_iter = 2000) {
    std::array<Point, 3> s{Point{theta0, phi0, 0.0}, Point{theta0 + step, phi0, 0.0},
                           Point{theta0, phi0 + step, 0.0}};
    for (auto& p : s) p.f = f(p.theta, p.phi);
    auto eval = [&](double t, double ph) { return Point{t, ph, f(t, ph)}; };
    for (int it = 0; it < max_iter; ++it) {
        std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
        double diam = 0.0;
        for (int i = 1; i < 3; ++i)
            diam = std::max(diam, std::hypot(s[i].theta - s[0].theta, s[i].phi - s[0].phi));
        if (s[2].f - s[0].f < f_tol && diam < x_tol) break;
        const double ct = 0.5 * (s[0].theta + s[1].theta), cp = 0.5 * (s[0].phi + s[1].phi);
        const Point r = eval(2 * ct - s[2].theta, 2 * cp - s[2].phi);
        if (r.f < s[0].f) {
            const Point x = eval(3 * ct - 2 * s[2].theta, 3 * cp - 2 * s[2].phi);
            s[2] = x.f < r.f ? x : r;
        } else if (r.f < s[1].f) {
            s[2] = r;
        } else {
            const bool outside = r.f < s[2].f;
            const Point c = outside ? eval(ct + 0.5 * (r.theta - ct), cp + 0.5 * (r.phi - cp))
                                    : eval(ct + 0.5 * (s[2].theta - ct), cp + 0.5 * (s[2].phi - cp));
            if (c.f < (outside ? r.f : s[2].f)) {
                s[2] = c;
            } else {
                for (int i = 1; i < 3; ++i)
                    s[i] = eval(s[0].theta + 0.5 * (s[i].theta - s[0].theta),
                                s[0].phi + 0.5 * (s[i].phi - s[0].phi));
            }
        }
    }
    std::sort(s.begin(), s.end(), [](const Point& a, const Point& b) { return a.f < b.f; });
    return s[0];
}

} // namespace detail

// Minimize the measured conditional entropy over rank-1 projective
// measurements on B: a theta x phi grid (theta in [0, pi], phi in [0, 2 pi))
// followed by Nelder-Mead from the three best grid points. Ties go to the
// lowest theta, then the lowest phi.
inline Measurement optimal_measurement(const DensityMatrix& rho_ab,
                                       const NumericPolicy& pol = default_policy()) {
    detail::require_two_qubit(rho_ab, "optimal_measurement");
    const int n = std::max(2, pol.discord_grid);
    const double dtheta = std::numbers::pi / (n - 1);
    const double dphi = 2.0 * std::numbers::pi / n;

    std::vector<detail::Point> grid;
    grid.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double t = i * dtheta, p = j * dphi;
            grid.push_back({t, p, measured_conditional_entropy(rho_ab, t, p)});
        }
    std::stable_sort(grid.begin(), grid.end(),
                     [](const detail::Point& a, const detail::Point& b) { return a.f < b.f; });

    auto objective = [&](double t, double p) { return measured_conditional_entropy(rho_ab, t, p); };
    detail::Point best = grid.front();
    for (std::size_t k = 0; k < std::min<std::size_t>(3, grid.size()); ++k) {
        const auto r = detail::nelder_mead_2d(objective, grid[k].theta, grid[k].phi, 0.5 * dtheta,
                                              pol.discord_refine, pol.discord_angle_tol);
        if (r.f < best.f) best = r;
    }
    return {best.theta, best.phi, best.f};
}

// D = S(rho_B) - S(rho_AB) + min_{Pi on B} sum_k p_k S(rho_{A|k})
inline double quantum_discord(const DensityMatrix& rho_ab, const NumericPolicy& pol = default_policy()) {
    detail::require_two_qubit(rho_ab, "quantum_discord");
    const std::array<std::size_t, 2> dims{2, 2};
    const std::array<bool, 2> keep_b{false, true};
    const double s_b = von_neumann_entropy(partial_trace(rho_ab, dims, keep_b), pol);
    const double s_ab = von_neumann_entropy(rho_ab, pol);
    return s_b - s_ab + optimal_measurement(rho_ab, pol).conditional_entropy;
}

inline double purity(const DensityMatrix& rho) {
    const double f = rho.frobenius_norm();
    return f * f;
}

struct MonogamyEof {
    double value = 0.0;
    double discord = 0.0;
    double conditional_entropy = 0.0;
    bool clamped = false;  // a small negative sum was clamped to 0
};

// E(rho_AF) = D(rho_AB) + S_{A|B} for a pure state on 2 (x) 2 (x) d.
inline MonogamyEof eof_via_monogamy_terms(const DensityMatrix& psi_abf, const SpaceLayout& layout,
                                          const NumericPolicy& pol = default_policy()) {
    const double pur = purity(psi_abf);
    if (pur < 1.0 - pol.purity)
        throw ConfigError("eof_via_monogamy: state is not pure, Tr(rho^2) = " + std::to_string(pur));
    const auto rho_ab = partial_trace(psi_abf, {Slot::A, Slot::B}, layout);
    MonogamyEof out;
    out.discord = quantum_discord(rho_ab, pol);
    out.conditional_entropy = conditional_entropy(rho_ab, 2, 2, pol);
    out.value = out.discord + out.conditional_entropy;
    if (out.value < 0.0) {
        if (out.value < -pol.monogamy_floor)
            throw PhysicsError("eof_via_monogamy: negative sum " + std::to_string(out.value));
        out.value = 0.0;
        out.clamped = true;
    }
    return out;
}

inline double eof_via_monogamy(const DensityMatrix& psi_abf, const SpaceLayout& layout,
                               const NumericPolicy& pol = default_policy()) {
    return eof_via_monogamy_terms(psi_abf, layout, pol).value;
}

inline double eof_via_monogamy(std::span<const Complex> psi, const SpaceLayout& layout,
                               const NumericPolicy& pol = default_policy()) {
    Vector v(psi.begin(), psi.end());
    const double n = norm(v);
    for (auto& z : v) z /= n;
    return eof_via_monogamy(ComplexMatrix::projector(v), layout, pol);
}

// ---------------------------------------------------------------------------

struct EntanglementReport {
    double lambda = 1.0;                // A-F
    double eof_lower_bound = 0.0;       // A-F
    double concurrence = 0.0;           // A-B
    double eof_two_qubit = 0.0;         // A-B
    double discord = 0.0;               // A-B, measured on B
    double conditional_entropy = 0.0;   // S_{A|B}
    std::optional<double> eof_monogamy; // A-F, pure global states only
    bool lambda_clamped = false;
    bool monogamy_clamped = false;
};

// Every quantifier for a state on 2 (x) 2 (x) d. The monogamy EOF is filled
// in only when the global state is pure.
inline EntanglementReport entanglement_report(const DensityMatrix& rho, const SpaceLayout& layout,
                                              const NumericPolicy& pol = default_policy()) {
    EntanglementReport r;
    const auto rho_ab = partial_trace(rho, {Slot::A, Slot::B}, layout);
    const auto rho_af = partial_trace(rho, {Slot::A, Slot::F}, layout);
    const auto lb = eof_lower_bound(rho_af, layout.fock_dim(), pol);
    r.lambda = lb.lambda;
    r.eof_lower_bound = lb.bound;
    r.lambda_clamped = lb.clamped;
    r.concurrence = concurrence(rho_ab, pol);
    r.eof_two_qubit = eof_from_concurrence(r.concurrence);
    r.discord = quantum_discord(rho_ab, pol);
    r.conditional_entropy = conditional_entropy(rho_ab, 2, 2, pol);
    if (purity(rho) >= 1.0 - pol.purity) {
        const auto m = eof_via_monogamy_terms(rho, layout, pol);
        r.eof_monogamy = m.value;
        r.monogamy_clamped = m.clamped;
    }
    return r;
}

} // namespace dqed
