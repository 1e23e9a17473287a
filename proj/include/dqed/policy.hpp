// policy.hpp: Numeric tolerances shared by every module

#pragma once

namespace dqed {

// All tunable tolerances in one place. Functions take a policy by const
// reference and default to `default_policy()`; tests tighten individual
// fields by copying and editing.
struct NumericPolicy {
    // linalg
    double hermiticity = 1e-10;         // max |m_ij - conj(m_ji)|, scaled by max(1, max|m|)
    double jacobi_offdiag = 1e-12;      // stop when off-diagonal Frobenius mass < this * ||M||_F
    int jacobi_max_sweeps = 100;
    double degeneracy = 1e-9;           // eigenvalues closer than this * max(1, ||M||_F) form a group
    double entropy_negativity = 1e-8;   // eigenvalues below -this are a positivity violation

    // model
    double rate_floor = 1e-12;          // dressed channels with rate < rate_floor * kappa are dropped

    // dynamics
    double positivity_warn = 1e-6;
    double positivity_abort = 1e-4;
    double trace_tolerance = 1e-6;
    double steady_tol = 1e-7;           // ||L(rho)||_F < steady_tol * ||rho||_F
    double steady_t_max_kappa = 500.0;  // t_max = steady_t_max_kappa / kappa
    double steady_check_interval = 1.0; // in units of 1/omega
    double fock_tol = 1e-4;
    int fock_start_d = 2;
    int fock_step = 2;
    int fock_max_d = 40;
    double coherence_condition = 1e-8;  // max |<gg|rho_AB|Phi->| accepted by the ansatz builder

    // entanglement
    double lambda_excess = 1e-6;        // Lambda > 2 + this is a consistency error
    double monogamy_floor = 1e-6;       // negative monogamy sums down to -this clamp to 0
    double purity = 1e-8;               // Tr(rho^2) >= 1 - purity for pure-state inputs
    int discord_grid = 64;
    double discord_refine = 1e-6;       // Nelder-Mead stops when the simplex spread in f is below this
    double discord_angle_tol = 1e-9;    // ... and the simplex diameter in radians is below this
};

inline const NumericPolicy& default_policy() {
    static const NumericPolicy p{};
    return p;
}

} // namespace dqed
