#include "jumpstop/valuefn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace jumpstop {
namespace {

constexpr int kMaxDepth = 500;

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double threshold_knot(double x_star, double jump_factor, int i) {
    return x_star / std::pow(jump_factor, static_cast<double>(i));
}

/// Classic Brent root refinement on a bracketing interval.
template <typename F>
double brent_root(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 1e-300;
        const double m = 0.5 * (c - b);
        if (std::fabs(m) <= tol || fb == 0.0) return b;
        if (std::fabs(e) < tol || std::fabs(fa) <= std::fabs(fb)) {
            d = m; e = m;
        } else {
            double p, q_;
            double s = fb / fa;
            if (a == c) {
                p = 2.0 * m * s;
                q_ = 1.0 - s;
            } else {
                const double q0 = fa / fc, r0 = fb / fc;
                p = s * (2.0 * m * q0 * (q0 - r0) - (b - a) * (r0 - 1.0));
                q_ = (q0 - 1.0) * (r0 - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q_ = -q_; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q_ - std::fabs(tol * q_), std::fabs(e * q_))) {
                e = d; d = p / q_;
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol) ? d : std::copysign(tol, m);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; e = d = b - a; }
    }
    return b;
}

} // namespace

double PiecewiseValue::knot(int i) const { return threshold_knot(x_star, jump_factor, i); }

int segment_index(double x, double x_star, double jump_factor) {
    if (!(x_star > 0.0)) throw ValidationError("x_star must be > 0");
    if (!(jump_factor > 1.0)) throw ValidationError("jump factor 1 + kappa must be > 1");
    if (!(x > 0.0) || !(x < x_star))
        throw ValidationError("segment_index: x = " + num(x) + " outside (0, x_star = " +
                              num(x_star) + ")");
    const double t = std::log(x_star / x) / std::log(jump_factor);
    int i = static_cast<int>(std::floor(t)) + 1;
    if (i < 1) i = 1;
    // resolve knots exactly: a knot belongs to the shallower segment
    while (i > 1 && x >= threshold_knot(x_star, jump_factor, i - 1)) --i;
    while (x < threshold_knot(x_star, jump_factor, i)) ++i;
    return i;
}

PiecewiseValue build_backward(const CharPoly& poly, const OdeCoeffs& coeffs, const Payoff& g,
                              double kappa, double x_star, int depth, double delta1,
                              double delta2, ConstantsMode mode) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    if (!(x_star > 0.0)) throw ValidationError("x_star must be > 0");
    if (depth < 1) throw ValidationError("depth must be >= 1");
    if (depth > kMaxDepth)
        throw ValidationError("depth " + std::to_string(depth) + " exceeds the supported maximum " +
                              std::to_string(kMaxDepth) +
                              " (per-segment term count grows with depth)");
    for (const auto& t : g.g.terms) (void)classify_exponent(poly, t.exponent);

    const double jf = 1.0 + kappa;
    PiecewiseValue v;
    v.x_star = x_star;
    v.jump_factor = jf;
    v.delta1 = delta1;
    v.delta2 = delta2;
    v.segments.reserve(static_cast<std::size_t>(depth));

    const LogPowerSum hom = canonicalize({{delta1, poly.beta1, 0}, {delta2, poly.beta2, 0}});
    const LogPowerSum* prev = &g.g;
    for (int i = 1; i <= depth; ++i) {
        const LogPowerSum forcing = shift_scale_argument(*prev, jf, coeffs.c);
        LogPowerSum part = particular_sum(poly, forcing);
        LogPowerSum seg;
        if (mode == ConstantsMode::Shared || i == 1) {
            seg = add(hom, part);
        } else {
            // match value and slope of the previous segment at the knot
            const double k = v.knot(i - 1);
            const LogPowerSum& prior = v.segments[static_cast<std::size_t>(i) - 2];
            const double r1 = evaluate(prior, k) - evaluate(part, k);
            const double r2 = evaluate(differentiate(prior), k) - evaluate(differentiate(part), k);
            const double t1 = std::pow(k, poly.beta1);
            const double t2 = std::pow(k, poly.beta2);
            const double s1 = poly.beta1 * t1 / k;
            const double s2 = poly.beta2 * t2 / k;
            const double det = t1 * s2 - t2 * s1;
            if (!std::isfinite(det) || det == 0.0)
                throw FitError("singular homogeneous system at knot " + num(k));
            const double d1 = (r1 * s2 - r2 * t2) / det;
            const double d2 = (t1 * r2 - s1 * r1) / det;
            seg = add(canonicalize({{d1, poly.beta1, 0}, {d2, poly.beta2, 0}}), part);
        }
        v.segments.push_back(std::move(seg));
        prev = &v.segments.back();
    }
    return v;
}

double evaluate_value(const PiecewiseValue& v, const Payoff& g, double x) {
    if (!(x > 0.0)) throw ValidationError("evaluate_value: x must be > 0");
    if (x >= v.x_star) return evaluate(g.g, x);
    const int i = segment_index(x, v.x_star, v.jump_factor);
    if (i > v.depth())
        throw DepthError("x = " + num(x) + " lies in segment " + std::to_string(i) +
                         " below the built depth " + std::to_string(v.depth()) +
                         "; rebuild with a larger depth");
    return evaluate(v.segments[static_cast<std::size_t>(i) - 1], x);
}

std::vector<double> knot_gaps(const PiecewiseValue& v, int max_count) {
    std::vector<double> gaps;
    const int m = std::min(v.depth() - 1, max_count);
    for (int i = 1; i <= m; ++i) {
        const double k = v.knot(i);
        gaps.push_back(std::fabs(evaluate(v.segments[static_cast<std::size_t>(i)], k) -
                                 evaluate(v.segments[static_cast<std::size_t>(i) - 1], k)));
    }
    return gaps;
}

namespace {

struct FitContext {
    const CharPoly& poly;
    const OdeCoeffs& coeffs;
    const Payoff& g;
    double kappa;
    int depth;
    const FitOptions& opt;
    LogPowerSum p1;  // segment-1 particular part, independent of the constants
    LogPowerSum p1d;
    LogPowerSum gd;
};

struct Constants {
    double delta1 = 0.0;
    double delta2 = 0.0;
};

double deep_value(const FitContext& ctx, double x_star, double d1, double d2) {
    const PiecewiseValue v = build_backward(ctx.poly, ctx.coeffs, ctx.g, ctx.kappa, x_star,
                                            ctx.depth, d1, d2, ctx.opt.mode);
    return evaluate(v.segments.back(), v.knot(ctx.depth));
}

Constants solve_constants(const FitContext& ctx, double x_star) {
    const double gv = evaluate(ctx.g.g, x_star);
    const double p1v = evaluate(ctx.p1, x_star);
    const double t1 = std::pow(x_star, ctx.poly.beta1);
    const double t2 = std::pow(x_star, ctx.poly.beta2);
    if (!std::isfinite(t1) || t1 == 0.0)
        throw FitError("singular elimination: x*^beta1 is " + num(t1) + " at x* = " + num(x_star));
    if (ctx.opt.delta2_zero) return Constants{(gv - p1v) / t1, 0.0};

    const double r1 = gv - p1v;
    double a21 = 0.0, a22 = 0.0, r2 = 0.0;
    if (ctx.opt.x_star) {
        // fixed threshold: value matching plus smooth pasting pin the pair
        a21 = ctx.poly.beta1 * t1 / x_star;
        a22 = ctx.poly.beta2 * t2 / x_star;
        r2 = evaluate(ctx.gd, x_star) - evaluate(ctx.p1d, x_star);
    } else {
        // free threshold: close the pair with V(deepest knot) = 0 instead.
        // The deep value is affine in the pair, so three probes determine it.
        const double base = deep_value(ctx, x_star, 0.0, 0.0);
        a21 = deep_value(ctx, x_star, 1.0, 0.0) - base;
        a22 = deep_value(ctx, x_star, 0.0, 1.0) - base;
        r2 = -base;
        if (!std::isfinite(base) || !std::isfinite(a21) || !std::isfinite(a22))
            throw FitError("deep-boundary probe overflowed at x* = " + num(x_star));
    }
    const double det = t1 * a22 - t2 * a21;
    if (!std::isfinite(det) || det == 0.0)
        throw FitError("singular elimination solving (delta1, delta2) at x* = " + num(x_star));
    return Constants{(r1 * a22 - r2 * t2) / det, (t1 * r2 - a21 * r1) / det};
}

double pasting_defect(const FitContext& ctx, double x_star, const Constants& c) {
    const double v1d = c.delta1 * ctx.poly.beta1 * std::pow(x_star, ctx.poly.beta1 - 1.0) +
                       c.delta2 * ctx.poly.beta2 * std::pow(x_star, ctx.poly.beta2 - 1.0) +
                       evaluate(ctx.p1d, x_star);
    return v1d - evaluate(ctx.gd, x_star);
}

double find_threshold(const FitContext& ctx) {
    const auto defect = [&](double x) -> double {
        try {
            return pasting_defect(ctx, x, solve_constants(ctx, x));
        } catch (const FitError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    const auto feasible = [&](double x) { return evaluate(ctx.g.g, x) > 0.0; };

    const std::vector<double> grid =
        log_spaced(ctx.opt.bracket_lo, ctx.opt.bracket_hi, ctx.opt.bracket_points);
    double best = 0.0;
    bool found = false;
    bool have_prev = false;
    double xp = 0.0, fp = 0.0;
    int n_feasible = 0;
    for (double x : grid) {
        if (!feasible(x)) {
            have_prev = false;
            continue;
        }
        ++n_feasible;
        const double fx = defect(x);
        if (!std::isfinite(fx)) {
            have_prev = false;
            continue;
        }
        if (fx == 0.0) {
            best = x;
            found = true;
        } else if (have_prev && (fp > 0.0) != (fx > 0.0)) {
            const double root = brent_root(defect, xp, x, fp, fx);
            const double at_root = defect(root);
            // accept genuine roots only, not noise-induced sign flips
            if (feasible(root) && std::isfinite(at_root) &&
                std::fabs(at_root) <= 1e-6 * std::max(1.0, std::fabs(evaluate(ctx.gd, root)))) {
                best = root;
                found = true;
            }
        }
        have_prev = true;
        xp = x;
        fp = fx;
    }
    if (!found)
        throw FitError("no threshold bracketed in [" + num(ctx.opt.bracket_lo) + ", " +
                       num(ctx.opt.bracket_hi) + "]: " + std::to_string(n_feasible) + " of " +
                       std::to_string(ctx.opt.bracket_points) +
                       " scan points had positive payoff and the pasting defect never changed sign");
    return best;
}

} // namespace

BoundaryFit fit_boundary(const CharPoly& poly, const OdeCoeffs& coeffs, const Payoff& g,
                         double kappa, int depth, const FitOptions& options) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    if (depth < 1) throw ValidationError("depth must be >= 1");
    if (!options.x_star && !options.smooth_pasting)
        throw ValidationError("a free threshold needs smooth pasting to be determined");
    if (!options.delta2_zero && options.x_star && !options.smooth_pasting)
        throw ValidationError("a free delta2 with a fixed threshold needs smooth pasting as the "
                              "second equation");
    if (options.x_star && !(*options.x_star > 0.0))
        throw ValidationError("x_star must be > 0");

    FitContext ctx{poly, coeffs, g, kappa, depth, options, {}, {}, {}};
    ctx.p1 = particular_sum(poly, shift_scale_argument(g.g, 1.0 + kappa, coeffs.c));
    ctx.p1d = differentiate(ctx.p1);
    ctx.gd = differentiate(g.g);

    const double xs = options.x_star ? *options.x_star : find_threshold(ctx);
    const Constants c = solve_constants(ctx, xs);

    BoundaryFit fit;
    fit.x_star = xs;
    fit.delta1 = c.delta1;
    fit.delta2 = c.delta2;

    const double gv = evaluate(g.g, xs);
    const double v1 = c.delta1 * std::pow(xs, poly.beta1) + c.delta2 * std::pow(xs, poly.beta2) +
                      evaluate(ctx.p1, xs);
    fit.value_matching_residual = std::fabs(v1 - gv) / std::max(1.0, std::fabs(gv));
    const double gdv = evaluate(ctx.gd, xs);
    fit.smooth_pasting_residual =
        std::fabs(pasting_defect(ctx, xs, c)) / std::max(1.0, std::fabs(gdv));

    const PiecewiseValue v = build_backward(poly, coeffs, g, kappa, xs, depth, c.delta1, c.delta2,
                                            options.mode);
    fit.knot_gaps = knot_gaps(v, options.max_knot_gaps);
    return fit;
}

} // namespace jumpstop
