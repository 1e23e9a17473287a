// dynamics.hpp: Lindblad evolution: Liouvillian action, RK4 trajectories, steady states,
// steady-state ansatz builders and Fock-truncation convergence

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqed/errors.hpp"
#include "dqed/hilbert.hpp"
#include "dqed/linalg.hpp"
#include "dqed/model.hpp"
#include "dqed/policy.hpp"

namespace dqed {

namespace detail {

// rate * D[|u><v|] rho = rate (|u><v|rho|v><u| - 1/2 <u|u> {|v><v|, rho}), O(n^2).
inline void add_rank_one_dissipator(ComplexMatrix& out, const ComplexMatrix& rho,
                                    const RankOneOperator& m, double rate) {
    const std::size_t n = rho.rows();
    const auto& u = m.ket;
    const auto& v = m.bra;
    Vector rho_v(n, 0.0), v_rho(n, 0.0);  // rho|v>, <v|rho
    for (std::size_t i = 0; i < n; ++i) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += rho(i, j) * v[j];
        rho_v[i] = s;
    }
    for (std::size_t j = 0; j < n; ++j) {
        Complex s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::conj(v[i]) * rho(i, j);
        v_rho[j] = s;
    }
    const Complex vrv = inner(v, rho_v);
    const double uu = std::real(inner(u, u));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Complex term = u[i] * vrv * std::conj(u[j]);
            term -= 0.5 * uu * (v[i] * v_rho[j] + rho_v[i] * std::conj(v[j]));
            out(i, j) += rate * term;
        }
}

inline void add_dense_dissipator(ComplexMatrix& out, const ComplexMatrix& rho,
                                 const ComplexMatrix& m, double rate) {
    const auto md = m.adjoint();
    const auto mdm = md * m;
    out.add_scaled(m * rho * md, rate);
    out.add_scaled(mdm * rho + rho * mdm, -0.5 * rate);
}

} // namespace detail

// -i[H, rho] + sum_c rate_c D[m_c] rho, D[m]rho = m rho m^dag - 1/2 {m^dag m, rho}.
inline ComplexMatrix liouvillian_apply(const ComplexMatrix& rho, const ComplexMatrix& h,
                                       std::span<const JumpChannel> channels) {
    if (!rho.is_square() || h.rows() != rho.rows() || h.cols() != rho.cols())
        throw ConfigError("liouvillian_apply: state is " + std::to_string(rho.rows()) +
                          "-dimensional, Hamiltonian " + std::to_string(h.rows()));
    ComplexMatrix out = commutator(h, rho);
    out *= -kI;
    for (const auto& c : channels) {
        if (c.dim() != rho.rows())
            throw ConfigError("liouvillian_apply: channel dimension " + std::to_string(c.dim()) +
                              " does not match state dimension " + std::to_string(rho.rows()));
        if (c.rate == 0.0) continue;
        if (const auto* r = std::get_if<RankOneOperator>(&c.op))
            detail::add_rank_one_dissipator(out, rho, *r, c.rate);
        else
            detail::add_dense_dissipator(out, rho, std::get<ComplexMatrix>(c.op), c.rate);
    }
    return out;
}

// A generator evolves states in its own working frame. to_frame/to_lab are
// unitary, so trace, Hermiticity, spectrum and Frobenius norms agree in both.
template <class G>
concept Generator = requires(const G& g, const ComplexMatrix& m) {
    { g.dim() } -> std::convertible_to<std::size_t>;
    { g.apply(m) } -> std::same_as<ComplexMatrix>;
    { g.to_frame(m) } -> std::same_as<ComplexMatrix>;
    { g.to_lab(m) } -> std::same_as<ComplexMatrix>;
    { g.reference_rate() } -> std::convertible_to<double>;  // sets the default steady-state horizon
};

// Works in the bare product basis with any channel list.
class LabFrameGenerator {
public:
    LabFrameGenerator(ComplexMatrix h, std::vector<JumpChannel> channels)
        : h_(std::move(h)), channels_(std::move(channels)) {
        if (!h_.is_square()) throw ConfigError("LabFrameGenerator: Hamiltonian not square");
        for (const auto& c : channels_) {
            if (c.dim() != h_.rows())
                throw ConfigError("LabFrameGenerator: channel dimension mismatch");
            if (c.rate < 0.0) throw ConfigError("LabFrameGenerator: negative channel rate");
            // Dense channels: cache m^dag and m^dag m
            if (const auto* m = std::get_if<ComplexMatrix>(&c.op)) {
                dense_.push_back({*m, m->adjoint(), m->adjoint() * *m, c.rate});
            } else {
                rank_one_.push_back({std::get<RankOneOperator>(c.op), c.rate});
            }
        }
    }

    std::size_t dim() const noexcept { return h_.rows(); }
    const ComplexMatrix& hamiltonian() const noexcept { return h_; }
    const std::vector<JumpChannel>& channels() const noexcept { return channels_; }

    double reference_rate() const noexcept {
        double r = 0.0;
        for (const auto& c : channels_) r = std::max(r, c.rate);
        return r;
    }

    ComplexMatrix apply(const ComplexMatrix& rho) const {
        ComplexMatrix out = commutator(h_, rho);
        out *= -kI;
        for (const auto& c : dense_) {
            out.add_scaled(c.m * rho * c.md, c.rate);
            out.add_scaled(c.mdm * rho + rho * c.mdm, -0.5 * c.rate);
        }
        for (const auto& [op, rate] : rank_one_) detail::add_rank_one_dissipator(out, rho, op, rate);
        return out;
    }

    ComplexMatrix to_frame(const ComplexMatrix& m) const { return m; }
    ComplexMatrix to_lab(const ComplexMatrix& m) const { return m; }

private:
    struct Dense {
        ComplexMatrix m, md, mdm;
        double rate;
    };
    ComplexMatrix h_;
    std::vector<JumpChannel> channels_;
    std::vector<Dense> dense_;
    std::vector<std::pair<RankOneOperator, double>> rank_one_;
};

// Works in the eigenbasis of the Hamiltonian whose spectrum produced the
// dressed channels. There H is diagonal and each channel |j><k| is an
// elementary matrix, so one Liouvillian application is O(n^2):
//   drho_mn = (-i(w_m - w_n) - (R_m + R_n)/2) rho_mn + delta_mn sum_k G_mk rho_kk,
// with G_jk the rate of |j><k| and R_k = sum_j G_jk.
class DressedFrameGenerator {
public:
    // kappa <= 0 falls back to the largest channel rate as the reference rate.
    DressedFrameGenerator(DressedSpectrum spectrum, std::span<const JumpChannel> channels,
                          double kappa = 0.0)
        : spec_(std::move(spectrum)),
          basis_adj_(spec_.states.adjoint()),
          gamma_(spec_.dim(), std::vector<double>(spec_.dim(), 0.0)),
          decay_(spec_.dim(), 0.0) {
        const std::size_t n = spec_.dim();
        for (const auto& c : channels) {
            const auto tr = c.transition();
            if (!tr)
                throw ConfigError("DressedFrameGenerator: every channel must be a dressed transition");
            if (tr->upper >= n || tr->lower >= n || c.dim() != n)
                throw ConfigError("DressedFrameGenerator: channel does not belong to this spectrum");
            gamma_[tr->lower][tr->upper] += c.rate;
            decay_[tr->upper] += c.rate;
            reference_rate_ = std::max(reference_rate_, c.rate);
        }
        if (kappa > 0.0) reference_rate_ = kappa;
    }

    std::size_t dim() const noexcept { return spec_.dim(); }
    const DressedSpectrum& spectrum() const noexcept { return spec_; }
    double reference_rate() const noexcept { return reference_rate_; }

    ComplexMatrix apply(const ComplexMatrix& rho) const {
        const std::size_t n = dim();
        const auto& w = spec_.energies;
        ComplexMatrix out(n, n);
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t k = 0; k < n; ++k)
                out(m, k) = Complex(-0.5 * (decay_[m] + decay_[k]), -(w[m] - w[k])) * rho(m, k);
        for (std::size_t j = 0; j < n; ++j) {
            double feed = 0.0;
            for (std::size_t k = j + 1; k < n; ++k) feed += gamma_[j][k] * rho(k, k).real();
            out(j, j) += feed;
        }
        return out;
    }

    ComplexMatrix to_frame(const ComplexMatrix& lab) const {
        return basis_adj_ * (lab * spec_.states);
    }
    ComplexMatrix to_lab(const ComplexMatrix& frame) const {
        return spec_.states * (frame * basis_adj_);
    }

private:
    DressedSpectrum spec_;
    ComplexMatrix basis_adj_;
    std::vector<std::vector<double>> gamma_;
    std::vector<double> decay_;
    double reference_rate_ = 0.0;
};

// Improved master equation: H_R with the dressed channels, in the dressed frame.
inline DressedFrameGenerator improved_generator(const RabiParams& p,
                                                const NumericPolicy& pol = default_policy()) {
    auto spec = dressed_spectrum(rabi_hamiltonian(p), pol);
    const auto channels = improved_channels(spec, p, pol);
    return DressedFrameGenerator(std::move(spec), channels, p.kappa);
}

// Standard master equation: H_JC with kappa D[a].
inline LabFrameGenerator standard_generator(const RabiParams& p) {
    return LabFrameGenerator(jc_hamiltonian(p), {standard_channel(p)});
}

struct Observable {
    std::string name;
    std::function<double(const DensityMatrix&)> evaluate;  // receives the lab-frame state
};

struct EvolveOptions {
    double t_end = 0.0;
    double dt = 0.005;
    double record_interval = 0.5;  // in time units; rounded to a whole number of steps
    bool store_states = true;
    std::vector<Observable> observables;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;  // lab frame; empty if store_states was false
    std::vector<std::pair<std::string, std::vector<double>>> observables;
    std::vector<double> min_eigenvalues;  // per recorded state
    std::vector<double> traces;           // per recorded state, after renormalization
    double max_trace_correction = 0.0;    // max |Tr rho - 1| seen before any per-step renormalization
    double max_hermiticity_defect = 0.0;  // max asymmetry seen before any per-step re-Hermitization

    const std::vector<double>& series(const std::string& name) const {
        for (const auto& [n, s] : observables)
            if (n == name) return s;
        throw ConfigError("Trajectory: no observable named '" + name + "'");
    }

    double min_eigenvalue() const {
        double m = std::numeric_limits<double>::infinity();
        for (double v : min_eigenvalues) m = std::min(m, v);
        return m;
    }
};

namespace detail {

template <Generator G>
ComplexMatrix rk4_step(const G& gen, const ComplexMatrix& rho, double dt) {
    const auto k1 = gen.apply(rho);
    ComplexMatrix tmp = rho;
    tmp.add_scaled(k1, 0.5 * dt);
    const auto k2 = gen.apply(tmp);
    tmp = rho;
    tmp.add_scaled(k2, 0.5 * dt);
    const auto k3 = gen.apply(tmp);
    tmp = rho;
    tmp.add_scaled(k3, dt);
    const auto k4 = gen.apply(tmp);
    ComplexMatrix next = rho;
    next.add_scaled(k1, dt / 6.0);
    next.add_scaled(k2, dt / 3.0);
    next.add_scaled(k3, dt / 3.0);
    next.add_scaled(k4, dt / 6.0);
    return next;
}

struct StepStats {
    double trace_correction;
    double hermiticity_defect;
};

// (rho + rho^dag)/2 followed by trace renormalization.
inline StepStats restore_state(ComplexMatrix& rho) {
    const double asym = max_asymmetry(rho);
    rho = hermitian_part(rho);
    const double tr = rho.trace().real();
    rho *= Complex(1.0 / tr);
    return {std::abs(tr - 1.0), asym};
}

inline std::size_t steps_for(double span, double dt) {
    return static_cast<std::size_t>(std::llround(span / dt));
}

} // namespace detail

// Fixed-step RK4. After every step the state is re-Hermitized and its trace
// renormalized; positivity is checked at every recorded state and a minimum
// eigenvalue below -positivity_abort aborts the run.
template <Generator G>
Trajectory evolve(const DensityMatrix& rho0, const G& gen, const EvolveOptions& opt,
                  const NumericPolicy& pol = default_policy()) {
    if (rho0.rows() != gen.dim() || rho0.cols() != gen.dim())
        throw ConfigError("evolve: initial state dimension " + std::to_string(rho0.rows()) +
                          " does not match generator dimension " + std::to_string(gen.dim()));
    if (!(opt.dt > 0.0) || !(opt.t_end >= 0.0))
        throw ConfigError("evolve: need dt > 0 and t_end >= 0");
    check_density_matrix(rho0, "evolve", pol);

    const std::size_t total = detail::steps_for(opt.t_end, opt.dt);
    const std::size_t stride = std::max<std::size_t>(1, detail::steps_for(opt.record_interval, opt.dt));

    Trajectory traj;
    for (const auto& o : opt.observables) traj.observables.push_back({o.name, {}});

    ComplexMatrix rho = gen.to_frame(rho0);
    auto record = [&](std::size_t step) {
        const double lmin = min_eigenvalue(rho, pol);
        if (lmin < -pol.positivity_abort) throw PositivityError("evolve at t=" + std::to_string(step * opt.dt), lmin);
        traj.times.push_back(static_cast<double>(step) * opt.dt);
        traj.min_eigenvalues.push_back(lmin);
        traj.traces.push_back(rho.trace().real());
        if (opt.store_states || !opt.observables.empty()) {
            const auto lab = gen.to_lab(rho);
            for (std::size_t k = 0; k < opt.observables.size(); ++k)
                traj.observables[k].second.push_back(opt.observables[k].evaluate(lab));
            if (opt.store_states) traj.states.push_back(lab);
        }
    };

    record(0);
    for (std::size_t step = 1; step <= total; ++step) {
        rho = detail::rk4_step(gen, rho, opt.dt);
        const auto stats = detail::restore_state(rho);
        traj.max_trace_correction = std::max(traj.max_trace_correction, stats.trace_correction);
        traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, stats.hermiticity_defect);
        if (step % stride == 0 || step == total) record(step);
    }
    return traj;
}

template <Generator G>
Trajectory evolve(const DensityMatrix& rho0, const G& gen, double t_end, double dt,
                  const NumericPolicy& pol = default_policy()) {
    EvolveOptions opt;
    opt.t_end = t_end;
    opt.dt = dt;
    return evolve(rho0, gen, opt, pol);
}

inline Trajectory evolve(const DensityMatrix& rho0, const ComplexMatrix& h,
                         std::vector<JumpChannel> channels, const EvolveOptions& opt,
                         const NumericPolicy& pol = default_policy()) {
    return evolve(rho0, LabFrameGenerator(h, std::move(channels)), opt, pol);
}

struct SteadyStateOptions {
    double dt = 0.005;
    double tol = 1e-7;  // ||L(rho)||_F < tol ||rho||_F
    double t_max = 0.0; // <= 0: steady_t_max_kappa / generator reference rate (kappa)
    double check_interval = 1.0;
};

struct SteadyStateResult {
    DensityMatrix state;  // lab frame
    bool converged = false;
    double time = 0.0;
    double residual = 0.0;  // ||L(rho)||_F / ||rho||_F at `time`
    double min_eigenvalue = 0.0;
    double max_trace_correction = 0.0;
};

// Integrate until the relative Liouvillian residual drops below tol. A run
// that reaches t_max first comes back with converged == false.
template <Generator G>
SteadyStateResult steady_state(const DensityMatrix& rho0, const G& gen, SteadyStateOptions opt = {},
                               const NumericPolicy& pol = default_policy()) {
    if (rho0.rows() != gen.dim()) throw ConfigError("steady_state: dimension mismatch");
    check_density_matrix(rho0, "steady_state", pol);
    if (opt.t_max <= 0.0) {
        const double r = gen.reference_rate();
        opt.t_max = r > 0.0 ? pol.steady_t_max_kappa / r : pol.steady_t_max_kappa;
    }
    const std::size_t check = std::max<std::size_t>(1, detail::steps_for(opt.check_interval, opt.dt));
    const std::size_t total = detail::steps_for(opt.t_max, opt.dt);

    SteadyStateResult res;
    ComplexMatrix rho = gen.to_frame(rho0);
    auto residual = [&] { return gen.apply(rho).frobenius_norm() / rho.frobenius_norm(); };

    std::size_t step = 0;
    res.residual = residual();
    while (res.residual >= opt.tol && step < total) {
        const std::size_t upto = std::min(total, step + check);
        for (; step < upto; ++step) {
            rho = detail::rk4_step(gen, rho, opt.dt);
            const auto stats = detail::restore_state(rho);
            res.max_trace_correction = std::max(res.max_trace_correction, stats.trace_correction);
        }
        res.residual = residual();
    }
    res.converged = res.residual < opt.tol;
    res.time = static_cast<double>(step) * opt.dt;
    res.min_eigenvalue = min_eigenvalue(rho, pol);
    if (res.min_eigenvalue < -pol.positivity_abort) throw PositivityError("steady_state", res.min_eigenvalue);
    res.state = gen.to_lab(rho);
    return res;
}

inline SteadyStateResult steady_state(const DensityMatrix& rho0, const ComplexMatrix& h,
                                      std::vector<JumpChannel> channels, double tol,
                                      const NumericPolicy& pol = default_policy()) {
    SteadyStateOptions opt;
    opt.tol = tol;
    return steady_state(rho0, LabFrameGenerator(h, std::move(channels)), opt, pol);
}

// ---------------------------------------------------------------------------
// Steady-state ansatz: (1-b) P_ground + b |Phi- 0><Phi- 0|

enum class AnsatzForm { rwa, non_rwa };

struct SteadyStateAnsatz {
    double b = 0.0;
    AnsatzForm form = AnsatzForm::rwa;
    DensityMatrix state;
};

// b = <Phi-|rho_AB|Phi->. Rejects initial atomic states with coherence
// between |gg> and |Phi->. The non-RWA form needs the Rabi spectrum for its
// ground state; the RWA form uses the bare |gg0>.
inline SteadyStateAnsatz build_ansatz(const DensityMatrix& rho_ab_initial, AnsatzForm form,
                                      const SpaceLayout& layout,
                                      const DressedSpectrum* spectrum = nullptr,
                                      const NumericPolicy& pol = default_policy()) {
    if (rho_ab_initial.rows() != 4 || rho_ab_initial.cols() != 4)
        throw ConfigError("build_ansatz: initial atomic state must be 4x4");
    const auto pm = phi_minus_2q();
    const Vector gg{0.0, 0.0, 0.0, 1.0};
    const Complex coherence = inner(gg, rho_ab_initial * std::span<const Complex>(pm));
    if (std::abs(coherence) > pol.coherence_condition)
        throw ConfigError("build_ansatz: initial state has |<gg|rho_AB|Phi->| = " +
                          std::to_string(std::abs(coherence)) + ", ansatz requires 0");
    const double b = std::real(inner(pm, rho_ab_initial * std::span<const Complex>(pm)));
    if (b < -pol.positivity_warn || b > 1.0 + pol.positivity_warn)
        throw PhysicsError("build_ansatz: subradiant population " + std::to_string(b) + " outside [0,1]");

    Vector ground;
    if (form == AnsatzForm::rwa) {
        ground = basis_ket(layout, Qubit::g, Qubit::g, 0);
    } else {
        if (spectrum == nullptr) throw ConfigError("build_ansatz: non-RWA form needs a dressed spectrum");
        if (spectrum->dim() != layout.total_dim())
            throw ConfigError("build_ansatz: spectrum dimension does not match layout");
        ground = spectrum->ground_state();
    }
    const double bc = std::clamp(b, 0.0, 1.0);
    ComplexMatrix state = ComplexMatrix::projector(ground) * (1.0 - bc);
    state.add_scaled(ComplexMatrix::projector(phi_minus_ket(layout, 0)), bc);
    return {bc, form, std::move(state)};
}

// ---------------------------------------------------------------------------
// Fock truncation convergence

struct FockConvergence {
    std::size_t d_star = 0;
    double value = 0.0;                                   // observable at d_star
    std::vector<std::pair<std::size_t, double>> history;  // every d evaluated
};

// Raise d in steps of fock_step until |value(d + step) - value(d)| < tol and
// return the first such d with value(d). Throws ConvergenceError when d + step
// would exceed fock_max_d.
template <class Fn>
    requires std::invocable<Fn&, const RabiParams&>
FockConvergence converge_fock(const RabiParams& p, Fn&& observable, double tol,
                              const NumericPolicy& pol = default_policy()) {
    p.validate();
    FockConvergence out;
    const auto step = static_cast<std::size_t>(pol.fock_step);
    const auto cap = static_cast<std::size_t>(pol.fock_max_d);
    std::size_t d = static_cast<std::size_t>(std::max(2, pol.fock_start_d));
    double value = observable(p.with_d(d));
    out.history.emplace_back(d, value);
    while (true) {
        if (d + step > cap)
            throw ConvergenceError("converge_fock: no convergence to " + std::to_string(tol) +
                                   " up to d=" + std::to_string(cap) + " (g=" + std::to_string(p.g) + ")");
        const double next = observable(p.with_d(d + step));
        out.history.emplace_back(d + step, next);
        if (std::abs(next - value) < tol) {
            out.d_star = d;
            out.value = value;
            return out;
        }
        d += step;
        value = next;
    }
}

// ---------------------------------------------------------------------------
// Small state helpers

inline DensityMatrix pure_state(std::span<const Complex> psi) {
    const double n = norm(psi);
    if (!(n > 0.0)) throw ConfigError("pure_state: zero vector");
    Vector v(psi.begin(), psi.end());
    for (auto& z : v) z /= n;
    return ComplexMatrix::projector(v);
}

// <a^dag a>
inline double mean_photon_number(const DensityMatrix& rho, const SpaceLayout& layout) {
    double s = 0.0;
    for (std::size_t i = 0; i < layout.total_dim(); ++i)
        s += static_cast<double>(layout.labels(i).n) * rho(i, i).real();
    return s;
}

// <a^dag a + |e><e|_A + |e><e|_B>
inline double mean_excitation(const DensityMatrix& rho, const SpaceLayout& layout) {
    double s = 0.0;
    for (std::size_t i = 0; i < layout.total_dim(); ++i)
        s += static_cast<double>(layout.excitations(i)) * rho(i, i).real();
    return s;
}

} // namespace dqed
