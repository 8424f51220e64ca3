#pragma once

#include <array>
#include <cstdint>

namespace susym {

/// Numerical policy shared by every construction and verification routine.
/// All thresholds are relative to a local scale unless stated otherwise.
struct Config {
    /// Acceptance tolerance for operator identities tested on probes.
    double tol_accept = 1e-7;
    /// Relative threshold deciding "identically zero" for functions.
    double tol_zero = 1e-9;
    /// Relative pivot threshold for jet reciprocals and elimination.
    double eps_pivot = 1e-12;
    /// Condition-number ceiling for constant-term matrices in jet solves.
    double cond_threshold = 1e10;
    /// Margin used by falsification sweeps (remainders must stay above it).
    double falsify_margin = 1e-4;

    /// Number of sample points for residual verification.
    int sample_points = 12;
    /// Number of sample points for zero-testing of Wronskians.
    int zero_test_points = 7;
    /// Grid size of the axis scan backing "does not vanish on the real axis".
    int axis_scan_points = 512;
    /// Retries when a sample point collides with a pole.
    int resample_retries = 16;

    /// Sampling interval on the real axis.
    std::array<double, 2> window = {-5.0, 5.0};
    /// Seed for every pseudo-random draw (sample points, generators).
    std::uint64_t seed = 2024;

    /// Taylor-stepping order for ODE-backed chain members.
    int ode_taylor_order = 12;
    /// Local error target of one Taylor step.
    double ode_local_tol = 1e-12;
    /// Smallest admissible step before IntegrationFailure.
    double ode_min_step = 1e-8;
};

} // namespace susym
