#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jumpstop/charpoly.hpp"
#include "jumpstop/model_io.hpp"
#include "jumpstop/particular.hpp"
#include "jumpstop/simulate.hpp"
#include "jumpstop/valuefn.hpp"

using namespace jumpstop;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitClassification = 3;
constexpr int kExitDepth = 4;
constexpr int kExitResidual = 5;
constexpr int kExitFit = 6;

struct SolveOutcome {
    SolvedModel model;
    std::optional<BoundaryFit> fit;
    ConstantsMode mode = ConstantsMode::Shared;
};

SolveOutcome solve_from_config(const RunConfig& cfg) {
    const OdeCoeffs coeffs = derive_coeffs(cfg.params);
    const CharPoly poly = q_roots(coeffs);
    const ConstantsMode mode =
        cfg.per_segment_constants ? ConstantsMode::PerSegmentC1 : ConstantsMode::Shared;

    double xs = 0.0, d1 = 0.0, d2 = 0.0;
    std::optional<BoundaryFit> fit;
    if (cfg.x_star && cfg.delta1) {
        xs = *cfg.x_star;
        d1 = *cfg.delta1;
        d2 = cfg.delta2.value_or(0.0);
    } else {
        FitOptions opt;
        opt.delta2_zero = cfg.delta2_zero;
        opt.mode = mode;
        if (cfg.x_star) {
            opt.x_star = *cfg.x_star;
            // with a fixed threshold and delta2 pinned, value matching alone
            // determines delta1 (a linear solve)
            opt.smooth_pasting = cfg.delta2_zero ? false : cfg.smooth_pasting;
        } else {
            opt.smooth_pasting = cfg.smooth_pasting;
        }
        fit = fit_boundary(poly, coeffs, cfg.payoff, cfg.params.kappa, cfg.depth, opt);
        xs = fit->x_star;
        d1 = fit->delta1;
        d2 = fit->delta2;
    }
    SolvedModel model{poly, coeffs, cfg.payoff,
                      build_backward(poly, coeffs, cfg.payoff, cfg.params.kappa, xs, cfg.depth,
                                     d1, d2, mode)};
    return SolveOutcome{std::move(model), std::move(fit), mode};
}

void print_fit_report(std::ostream& out, const BoundaryFit& fit, const RunConfig& cfg) {
    out << "x_star = " << format_double(fit.x_star) << "\n";
    out << "delta1 = " << format_double(fit.delta1) << "\n";
    out << "delta2 = " << format_double(fit.delta2) << "\n";
    out << "value_matching_residual = " << format_double(fit.value_matching_residual) << "\n";
    out << "smooth_pasting_residual = " << format_double(fit.smooth_pasting_residual) << "\n";
    out << "convention: delta2 " << (cfg.delta2_zero ? "pinned to 0" : "solved")
        << ", smooth pasting " << (cfg.smooth_pasting ? "on" : "off") << ", constants "
        << (cfg.per_segment_constants ? "per segment (C1 at knots)" : "shared across segments")
        << "\n";
    for (std::size_t i = 0; i < fit.knot_gaps.size(); ++i)
        out << "knot_gap[" << (i + 1) << "] = " << format_double(fit.knot_gaps[i]) << "\n";
    out << "note: interior-knot continuity is reported, not enforced; see README\n";
}

std::string default_out(const RunConfig& cfg, const std::string& flag_out) {
    if (!flag_out.empty()) return flag_out;
    if (cfg.model_path) return *cfg.model_path;
    return "model.txt";
}

int cmd_solve(const std::string& config_path, const std::string& out_path, int depth_override,
              bool require_free_threshold) {
    RunConfig cfg = parse_config_file(config_path);
    if (depth_override > 0) cfg.depth = depth_override;
    if (require_free_threshold && cfg.x_star)
        throw ValidationError("fit-boundary expects a config without x_star (found x_star = " +
                              format_double(*cfg.x_star) + "); use solve instead");
    const SolveOutcome outcome = solve_from_config(cfg);
    const std::string path = default_out(cfg, out_path);
    write_model_file(path, outcome.model);
    if (outcome.fit) print_fit_report(std::cout, *outcome.fit, cfg);
    std::cout << "model: " << path << " (depth " << outcome.model.value.depth() << ", x_star "
              << format_double(outcome.model.value.x_star) << ")\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& points_arg,
             const std::string& grid_arg, const std::string& out_path) {
    const SolvedModel m = read_model_file(model_path);
    std::vector<double> xs;
    if (!points_arg.empty() && !grid_arg.empty())
        throw ValidationError("give either --points or --grid, not both");
    if (!points_arg.empty()) xs = parse_points(points_arg);
    else if (!grid_arg.empty()) xs = parse_grid(grid_arg);
    else throw ValidationError("eval needs --points or --grid");

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ValidationError("cannot open '" + out_path + "' for writing");
    }
    std::ostream& out = out_path.empty() ? std::cout : file;

    bool depth_exceeded = false;
    out << "x,V,segment_index,region\n";
    for (double x : xs) {
        if (!(x > 0.0)) throw ValidationError("eval points must be > 0");
        if (x >= m.value.x_star) {
            out << format_double(x) << "," << format_double(evaluate(m.payoff.g, x))
                << ",0,stopping\n";
            continue;
        }
        const int i = segment_index(x, m.value.x_star, m.value.jump_factor);
        if (i > m.value.depth()) {
            depth_exceeded = true;
            out << format_double(x) << ",nan," << i << ",depth-exceeded\n";
            continue;
        }
        out << format_double(x) << ","
            << format_double(evaluate(m.value.segments[static_cast<std::size_t>(i) - 1], x)) << ","
            << i << ",continuation\n";
    }
    if (depth_exceeded) {
        std::cerr << "error: some points lie below the built depth; rebuild with a larger depth\n";
        return kExitDepth;
    }
    return 0;
}

int cmd_check(const std::string& model_path) {
    const SolvedModel m = read_model_file(model_path);
    const double jf = m.value.jump_factor;
    double worst = 0.0;

    for (double beta : {m.poly.beta1, m.poly.beta2}) {
        const double res = std::fabs(q_eval(m.poly, beta)) / std::max(1.0, beta * beta);
        std::cout << "root beta = " << format_double(beta)
                  << " residual = " << format_double(res) << "\n";
        worst = std::max(worst, res);
    }

    const LogPowerSum* prev = &m.payoff.g;
    for (int i = 1; i <= m.value.depth(); ++i) {
        const LogPowerSum rhs = shift_scale_argument(*prev, jf, m.coeffs.c);
        const LogPowerSum& seg = m.value.segments[static_cast<std::size_t>(i) - 1];
        const std::vector<double> pts = log_spaced(m.value.knot(i), m.value.knot(i - 1), 50);
        const double res = residual(m.poly, seg, rhs, pts);
        std::cout << "segment " << i << " residual = " << format_double(res) << "\n";
        worst = std::max(worst, res);
        prev = &seg;
    }

    const std::vector<double> gaps = knot_gaps(m.value, 10);
    for (std::size_t i = 0; i < gaps.size(); ++i)
        std::cout << "knot_gap[" << (i + 1) << "] = " << format_double(gaps[i])
                  << " (diagnostic, not gated)\n";

    if (worst >= 1e-9) {
        std::cerr << "error: max residual " << format_double(worst) << " >= 1e-9\n";
        return kExitResidual;
    }
    std::cout << "ok: max residual " << format_double(worst) << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& model_path,
                 const std::string& out_path, int threads, std::optional<std::uint64_t> seed,
                 const std::string& dts_arg) {
    const RunConfig cfg = parse_config_file(config_path);
    const SolvedModel m = read_model_file(model_path);

    SimConfig sc;
    sc.params = cfg.params;
    sc.payoff = m.payoff;
    sc.x_star = m.value.x_star;
    sc.x0 = cfg.x0;
    sc.n_paths = cfg.n_paths;
    sc.dt = cfg.dt;
    sc.t_max = cfg.t_max;
    sc.seed = seed.value_or(cfg.seed);

    const double analytic = evaluate_value(m.value, m.payoff, cfg.x0);

    std::vector<SweepRow> rows;
    if (!dts_arg.empty()) {
        const std::vector<double> dts = parse_points(dts_arg);
        rows = convergence_sweep(sc, dts, threads);
    } else {
        const SimResult r = simulate_paths(sc, threads);
        rows.push_back({sc.dt, sc.n_paths, r.estimate, r.std_error, r.n_censored,
                        r.fraction_jump_crossings});
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ValidationError("cannot open '" + out_path + "' for writing");
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "dt,n_paths,estimate,std_error,n_censored,fraction_jump_crossings\n";
    for (const auto& row : rows)
        out << format_double(row.dt) << "," << row.n_paths << "," << format_double(row.estimate)
            << "," << format_double(row.std_error) << "," << row.n_censored << ","
            << format_double(row.fraction_jump_crossings) << "\n";

    const SweepRow& last = rows.back();
    const double z = last.std_error > 0.0 ? (last.estimate - analytic) / last.std_error : 0.0;
    std::cout << "estimate=" << format_double(last.estimate)
              << " std_error=" << format_double(last.std_error)
              << " analytic=" << format_double(analytic) << " z=" << format_double(z) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise closed-form solver and Monte Carlo checker for optimal stopping of "
                 "a jump-diffusion"};
    app.require_subcommand(1);

    std::string config_path, model_path, out_path, points_arg, grid_arg, dts_arg;
    int depth_override = 0;
    int threads = 1;
    std::optional<std::uint64_t> seed;

    auto* solve = app.add_subcommand("solve", "build the piecewise value function");
    solve->add_option("--config", config_path, "config file")->required();
    solve->add_option("--out", out_path, "model output path");
    solve->add_option("--depth", depth_override, "override the configured depth");

    auto* fitb = app.add_subcommand("fit-boundary",
                                    "fit the threshold and constants, then build the model");
    fitb->add_option("--config", config_path, "config file (without x_star)")->required();
    fitb->add_option("--out", out_path, "model output path");
    fitb->add_option("--depth", depth_override, "override the configured depth");

    auto* eval = app.add_subcommand("eval", "evaluate a solved model on points or a grid");
    eval->add_option("--model", model_path, "model file")->required();
    eval->add_option("--points", points_arg, "comma-separated evaluation points");
    eval->add_option("--grid", grid_arg, "lo:hi:n, lo:hi:n:log or lo:hi:n(log)");
    eval->add_option("--out", out_path, "CSV output path (default stdout)");

    auto* check = app.add_subcommand("check", "verify a solved model against its equations");
    check->add_option("--model", model_path, "model file")->required();

    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate vs the analytic value");
    sim->add_option("--config", config_path, "config file")->required();
    sim->add_option("--model", model_path, "model file")->required();
    sim->add_option("--out", out_path, "CSV output path (default stdout)");
    sim->add_option("--threads", threads, "worker threads (default 1)");
    sim->add_option("--seed", seed, "override the configured seed");
    sim->add_option("--dts", dts_arg, "comma-separated decreasing dt sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path, out_path, depth_override, false);
        if (fitb->parsed()) return cmd_solve(config_path, out_path, depth_override, true);
        if (eval->parsed()) return cmd_eval(model_path, points_arg, grid_arg, out_path);
        if (check->parsed()) return cmd_check(model_path);
        if (sim->parsed())
            return cmd_simulate(config_path, model_path, out_path, threads, seed, dts_arg);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ClassificationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitClassification;
    } catch (const DepthError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDepth;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFit;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
