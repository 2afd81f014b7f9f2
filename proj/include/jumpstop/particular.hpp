#pragma once

#include <span>
#include <vector>

#include "jumpstop/charpoly.hpp"
#include "jumpstop/logpower.hpp"

namespace jumpstop {

/// Inputs of a single-term solve: find y with
///   x^2 y''(x) + a x y'(x) + b y(x) = A x^alpha (ln x)^n.
struct ParticularRequest {
    CharPoly poly;
    LogPowerTerm term;
};

/// Particular solution of the single-term equation. coefficients[i] = c_i for
/// i = 0..n; where c_i lands in the solution depends on the multiplicity m of
/// alpha as a root of Q:
///   m = 0: y = x^a sum_i c_i (ln x)^i        (log powers 0..n)
///   m = 1: y = x^a sum_i c_i (ln x)^{i+1}    (log powers 1..n+1)
///   m = 2: y = x^a c_n (ln x)^{n+2}, all lower c_i zero.
struct ParticularSolution {
    LogPowerSum solution;
    int multiplicity_used = 0;
    std::vector<double> coefficients;
};

/// Edge of the "certainly a root" region: |Q(alpha)| <= kExactRootTol * scale
/// (scale = max(1, alpha^2)) is treated as a root. Between this and
/// kRootClassTol lies the ambiguity band, which is an error: there the
/// coefficients of a non-root solve blow up as Q(alpha)^{-(n+1)} while the
/// root branch is not yet trustworthy either.
inline constexpr double kExactRootTol = 1e-12;

/// Multiplicity of alpha as a root of Q with the ambiguity band enforced.
/// Exponents bit-equal to poly.beta1/beta2 short-circuit as roots. Throws
/// ClassificationError inside the band.
int classify_exponent(const CharPoly& poly, double alpha);

/// Coefficient recurrence route:
///   m = 0: c_n = A/Q(a); c_{n-1} = -n A Q'(a)/Q(a)^2;
///          c_i = -(i+1)/Q(a) [Q'(a) c_{i+1} + (i+2) c_{i+2}]
///   m = 1: c_n = A/((n+1) Q'(a)); c_i = -(i+2)/Q'(a) c_{i+1}
///   m = 2: c_n = A/((n+1)(n+2))
/// For n <= 1 the seeds alone are the complete coefficient set.
ParticularSolution particular_recursive(const ParticularRequest& req);

/// Explicit (non-recursive) route:
///   m = 0: c_i = (-1)^{n-i} n!/i! A/Q(a)^{n-i+1} *
///          sum_{j=0}^{floor((n-i)/2)} (-1)^j C(n-i-j, j) Q'(a)^{n-i-2j} Q(a)^j
///   m = 1: c_i = (-1)^{n-i} n!/(i+1)! A/Q'(a)^{n-i+1}
///   m = 2: as the recurrence route.
/// Factorial ratios are accumulated as running products; for n > 12 the
/// multiplicity-zero case falls back to the recurrence internally to keep the
/// factorial growth out of the arithmetic.
ParticularSolution particular_closed(const ParticularRequest& req);

/// n = 0 special case: y = phi x^alpha (ln x)^m with phi = A / Q^{(m)}(alpha),
/// m the multiplicity of alpha. Coincides exactly with particular_closed at
/// n = 0.
ParticularSolution particular_n0(const CharPoly& poly, double A, double alpha);

/// Superposition over the terms of rhs; canonical sum of the per-term
/// solutions. Classification errors are rethrown with the offending term
/// identified.
LogPowerSum particular_sum(const CharPoly& poly, const LogPowerSum& rhs);

/// max over points of |x^2 y'' + a x y' + b y - rhs| / max(1, |rhs|, |b y|),
/// with y', y'' taken symbolically. Throws ValidationError on points <= 0.
double residual(const CharPoly& poly, const LogPowerSum& candidate, const LogPowerSum& rhs,
                std::span<const double> points);

/// n geometrically spaced points spanning [lo, hi] (endpoints included).
std::vector<double> log_spaced(double lo, double hi, int n);

} // namespace jumpstop
