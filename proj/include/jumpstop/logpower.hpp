#pragma once

#include <vector>

#include "jumpstop/errors.hpp"

namespace jumpstop {

/// One term A x^alpha (ln x)^n.
struct LogPowerTerm {
    double coeff = 0.0;    ///< A (payoff units)
    double exponent = 0.0; ///< alpha
    int log_power = 0;     ///< n >= 0

    friend bool operator==(const LogPowerTerm&, const LogPowerTerm&) = default;
};

/// Canonical finite sum  sum_k A_k x^{alpha_k} (ln x)^{n_k}, the closed class
/// in which payoffs, forcings and particular solutions all live.
///
/// Canonical form: no zero coefficients, no duplicate (exponent, log_power)
/// keys, terms sorted by (exponent, log_power). The empty sum is the zero
/// function. Exponents merge on exact floating-point equality; exponents that
/// must coincide (e.g. the roots beta1/beta2 reused across the backward
/// construction) are identical doubles by construction, so no epsilon merge
/// is applied.
struct LogPowerSum {
    std::vector<LogPowerTerm> terms;

    bool empty() const { return terms.empty(); }
    friend bool operator==(const LogPowerSum&, const LogPowerSum&) = default;
};

/// Merges duplicate (exponent, log_power) keys, drops zero coefficients,
/// sorts. Idempotent.
LogPowerSum canonicalize(std::vector<LogPowerTerm> terms);

/// Sum of the terms at x. Throws ValidationError for x <= 0.
double evaluate(const LogPowerSum& sum, double x);

/// Exact symbolic derivative:
///   d/dx [A x^a (ln x)^n] = A a x^{a-1} (ln x)^n + A n x^{a-1} (ln x)^{n-1}.
LogPowerSum differentiate(const LogPowerSum& sum);

/// premultiplier * sum(factor * x), expanded back into the class via
/// x^a -> factor^a x^a and (ln(factor x))^n = sum_m C(n,m) (ln factor)^{n-m} (ln x)^m.
/// Throws ValidationError for factor <= 0.
LogPowerSum shift_scale_argument(const LogPowerSum& sum, double factor, double premultiplier);

LogPowerSum add(const LogPowerSum& lhs, const LogPowerSum& rhs);
LogPowerSum scale(const LogPowerSum& sum, double factor);

} // namespace jumpstop
