#pragma once

#include <optional>
#include <vector>

#include "jumpstop/charpoly.hpp"
#include "jumpstop/logpower.hpp"
#include "jumpstop/particular.hpp"

namespace jumpstop {

/// Running payoff g collected when stopping.
struct Payoff {
    LogPowerSum g;
};

/// The piecewise value function. Segment i (1-based) is valid on
/// [x_star/jump_factor^i, x_star/jump_factor^{i-1}) and stores the full
/// per-segment sum including its homogeneous part; on [x_star, inf) the
/// function equals the payoff.
struct PiecewiseValue {
    double x_star = 0.0;
    double jump_factor = 0.0; ///< 1 + kappa, > 1
    double delta1 = 0.0;      ///< segment-1 homogeneous constants
    double delta2 = 0.0;
    std::vector<LogPowerSum> segments;

    int depth() const { return static_cast<int>(segments.size()); }
    double knot(int i) const; ///< x_star / jump_factor^i
};

/// How the homogeneous constants of segments i >= 2 are chosen. Shared keeps
/// one (delta1, delta2) pair in every segment. PerSegmentC1 re-solves the
/// pair at each interior knot so that value and first derivative match the
/// previous segment (the knot gaps then vanish by construction).
enum class ConstantsMode { Shared, PerSegmentC1 };

/// The unique i with x in [x_star/f^i, x_star/f^{i-1}); a knot belongs to the
/// shallower segment (left-closed intervals). Throws ValidationError unless
/// 0 < x < x_star and f > 1.
int segment_index(double x, double x_star, double jump_factor);

/// Backward construction: segment 1 solves the equation against c g(x(1+k));
/// segment i against c V_{i-1}(x(1+k)). Every segment carries its homogeneous
/// part; in Shared mode the coefficients do not depend on x_star (only the
/// interval map does).
PiecewiseValue build_backward(const CharPoly& poly, const OdeCoeffs& coeffs, const Payoff& g,
                              double kappa, double x_star, int depth, double delta1,
                              double delta2, ConstantsMode mode = ConstantsMode::Shared);

/// g(x) for x >= x_star, otherwise the segment containing x. Throws
/// DepthError when x lies below the deepest built segment.
double evaluate_value(const PiecewiseValue& v, const Payoff& g, double x);

/// |V_{i+1} - V_i| at interior knots x_star/f^i, i = 1..min(depth-1, max_count).
std::vector<double> knot_gaps(const PiecewiseValue& v, int max_count);

struct FitOptions {
    /// Pin delta2 = 0 on segment 1 (the classic convention that suppresses
    /// the x^{beta2} component). With delta2_zero = false the pair is closed
    /// by a second equation: smooth pasting when x_star is fixed, otherwise
    /// the deep-boundary condition V(deepest built knot) = 0, which stands in
    /// for decay at 0 (its truncation error shrinks geometrically in depth).
    bool delta2_zero = true;
    bool smooth_pasting = true; ///< also match V'(x_star) = g'(x_star)
    std::optional<double> x_star; ///< fixed threshold: solve constants only
    ConstantsMode mode = ConstantsMode::Shared;
    int max_knot_gaps = 10;
    double bracket_lo = 1e-6; ///< scan range for the threshold search
    double bracket_hi = 1e6;
    int bracket_points = 481;
};

struct BoundaryFit {
    double x_star = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double value_matching_residual = 0.0; ///< |V1(x*) - g(x*)| / max(1, |g(x*)|)
    double smooth_pasting_residual = 0.0; ///< |V1'(x*) - g'(x*)| / max(1, |g'(x*)|)
    std::vector<double> knot_gaps;        ///< diagnostics only, never asserted
};

/// Pins down (x_star, delta1, delta2) by value matching plus, per options,
/// smooth pasting; with a free threshold delta1 is eliminated in closed form
/// and x_star found by a safeguarded 1-D root search over a bracket scan.
/// Throws FitError when no bracket holds a feasible root (the payoff must be
/// positive at the threshold) or an elimination is singular.
BoundaryFit fit_boundary(const CharPoly& poly, const OdeCoeffs& coeffs, const Payoff& g,
                         double kappa, int depth, const FitOptions& options = {});

} // namespace jumpstop
