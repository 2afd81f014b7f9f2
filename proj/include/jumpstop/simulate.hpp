#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jumpstop/charpoly.hpp"
#include "jumpstop/valuefn.hpp"

namespace jumpstop {

/// Inputs of a Monte Carlo run estimating E^x[ e^{-r tau} g(X_tau) ] under
/// the threshold policy tau = first time X >= x_star.
struct SimConfig {
    ModelParams params;
    Payoff payoff;
    double x_star = 0.0;
    double x0 = 0.0;          ///< initial state, > 0
    std::int64_t n_paths = 0; ///< > 0
    double dt = 0.0;          ///< diffusion monitoring step; <= min(0.01/lambda, 0.01/sigma^2)
    double t_max = 0.0;       ///< censoring horizon; >= 10/r
    std::uint64_t seed = 0;

    /// Throws ValidationError naming the violated constraint.
    void validate() const;
};

/// Aggregate of a Monte Carlo run. Censored paths (no stop by t_max)
/// contribute zero payoff; n_stopped + n_censored = n_paths. mean_stop_time
/// averages tau over stopped paths only, and fraction_jump_crossings is the
/// share of stops caused by a jump crossing the threshold rather than the
/// diffusion reaching it.
struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_stopped = 0;
    std::int64_t n_censored = 0;
    double mean_stop_time = 0.0;
    double fraction_jump_crossings = 0.0;
};

/// Simulates n_paths independent paths. Jump times are exact exponential
/// arrivals; between monitoring epochs the continuous part advances by its
/// exact lognormal increment. The path stops at the first grid or jump epoch
/// with X >= x_star (post-jump states may overshoot; the payoff is taken at
/// the realized state, never clamped). Per-path RNG streams derive from
/// (seed, path index) and results fold in path order, so the outcome is
/// bit-identical for any n_threads.
SimResult simulate_paths(const SimConfig& cfg, int n_threads = 1);

struct SweepRow {
    double dt = 0.0;
    std::int64_t n_paths = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_censored = 0;
    double fraction_jump_crossings = 0.0;
};

/// One simulate_paths run per dt (strictly decreasing, nonempty), used to
/// check estimate stabilization in the monitoring step.
std::vector<SweepRow> convergence_sweep(const SimConfig& cfg, std::span<const double> dts,
                                        int n_threads = 1);

} // namespace jumpstop
