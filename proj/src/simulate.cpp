#include "jumpstop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace jumpstop {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t path_seed(std::uint64_t seed, std::int64_t path) {
    std::uint64_t s = seed ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(path + 1));
    std::uint64_t mixed = splitmix64(s);
    return mixed ^ splitmix64(s);
}

/// Self-contained normal/exponential sampling so that streams do not depend
/// on the standard library's distribution implementations.
class PathRng {
public:
    explicit PathRng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { // (0, 1)
        for (;;) {
            const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct PathOut {
    double payoff = 0.0;
    double tau = 0.0;
    bool stopped = false;
    bool jump_cross = false;
};

void run_path(const SimConfig& cfg, std::uint64_t seed, PathOut& out) {
    PathRng rng(seed);
    const double sigma = cfg.params.sigma;
    const double lambda = cfg.params.lambda;
    const double drift = cfg.params.mu - 0.5 * sigma * sigma - lambda * cfg.params.kappa;
    const double jump_factor = 1.0 + cfg.params.kappa;
    const double drift_dt = drift * cfg.dt;
    const double sig_sqrt_dt = sigma * std::sqrt(cfg.dt);

    double x = cfg.x0;
    double t = 0.0;
    double next_jump = rng.exponential(lambda);
    // Epochs are dt-ladders re-anchored at each jump; they do not depend on
    // t_max, so raising the horizon extends paths without altering them.
    for (;;) {
        const bool jump_next = next_jump <= t + cfg.dt;
        const double epoch = jump_next ? next_jump : t + cfg.dt;
        if (epoch > cfg.t_max) break;
        if (jump_next) {
            const double d = epoch - t;
            if (d > 0.0)
                x *= std::exp(drift * d + sigma * std::sqrt(d) * rng.normal());
            x *= jump_factor;
            t = epoch;
            next_jump = t + rng.exponential(lambda);
            if (x >= cfg.x_star) {
                out.stopped = true;
                out.jump_cross = true;
                break;
            }
        } else {
            x *= std::exp(drift_dt + sig_sqrt_dt * rng.normal());
            t = epoch;
            if (x >= cfg.x_star) {
                out.stopped = true;
                break;
            }
        }
    }
    out.tau = t;
    out.payoff = out.stopped ? std::exp(-cfg.params.r * t) * evaluate(cfg.payoff.g, x) : 0.0;
}

} // namespace

void SimConfig::validate() const {
    params.validate();
    if (!(x_star > 0.0)) throw ValidationError("x_star must be > 0");
    if (!(x0 > 0.0)) throw ValidationError("x0 must be > 0");
    if (n_paths < 1) throw ValidationError("n_paths must be >= 1");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double dt_cap = std::min(0.01 / params.lambda, 0.01 / (params.sigma * params.sigma));
    if (dt > dt_cap)
        throw ValidationError("dt must be <= min(0.01/lambda, 0.01/sigma^2) = " +
                              std::to_string(dt_cap));
    if (!(t_max >= 10.0 / params.r))
        throw ValidationError("t_max must be >= 10/r = " + std::to_string(10.0 / params.r) +
                              " to keep the censored mass negligible");
}

SimResult simulate_paths(const SimConfig& cfg, int n_threads) {
    cfg.validate();
    if (n_threads < 1) throw ValidationError("n_threads must be >= 1");
    const std::int64_t n = cfg.n_paths;

    if (cfg.x0 >= cfg.x_star) { // immediate exercise
        SimResult r;
        r.estimate = evaluate(cfg.payoff.g, cfg.x0);
        r.std_error = 0.0;
        r.n_stopped = n;
        r.n_censored = 0;
        r.mean_stop_time = 0.0;
        r.fraction_jump_crossings = 0.0;
        return r;
    }

    std::vector<PathOut> out(static_cast<std::size_t>(n));
    const auto worker = [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p)
            run_path(cfg, path_seed(cfg.seed, p), out[static_cast<std::size_t>(p)]);
    };
    if (n_threads == 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const std::int64_t lo = w * chunk;
            const std::int64_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // fold in path-index order: identical for every n_threads
    SimResult r;
    double sum = 0.0, tau_sum = 0.0;
    std::int64_t jump_stops = 0;
    for (const auto& p : out) {
        sum += p.payoff;
        if (p.stopped) {
            ++r.n_stopped;
            tau_sum += p.tau;
            if (p.jump_cross) ++jump_stops;
        }
    }
    r.n_censored = n - r.n_stopped;
    r.estimate = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : out) {
        const double d = p.payoff - r.estimate;
        ss += d * d;
    }
    r.std_error = n > 1 ? std::sqrt(ss / (static_cast<double>(n) * (static_cast<double>(n) - 1.0)))
                        : 0.0;
    r.mean_stop_time = r.n_stopped > 0 ? tau_sum / static_cast<double>(r.n_stopped) : 0.0;
    r.fraction_jump_crossings =
        r.n_stopped > 0 ? static_cast<double>(jump_stops) / static_cast<double>(r.n_stopped) : 0.0;
    return r;
}

std::vector<SweepRow> convergence_sweep(const SimConfig& cfg, std::span<const double> dts,
                                        int n_threads) {
    if (dts.empty()) throw ValidationError("convergence_sweep: empty dt list");
    for (std::size_t i = 1; i < dts.size(); ++i)
        if (!(dts[i] < dts[i - 1]))
            throw ValidationError("convergence_sweep: dts must be strictly decreasing");
    std::vector<SweepRow> rows;
    rows.reserve(dts.size());
    for (double dt : dts) {
        SimConfig c = cfg;
        c.dt = dt;
        const SimResult r = simulate_paths(c, n_threads);
        rows.push_back({dt, cfg.n_paths, r.estimate, r.std_error, r.n_censored,
                        r.fraction_jump_crossings});
    }
    return rows;
}

} // namespace jumpstop
