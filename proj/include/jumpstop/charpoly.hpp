#pragma once

#include "jumpstop/errors.hpp"

namespace jumpstop {

/// Economic and stochastic inputs of the stopping problem. The state follows
/// dX/X = mu dt + sigma dW + kappa dN with N a Poisson process of intensity
/// lambda, and payoffs are discounted at rate r.
struct ModelParams {
    double mu = 0.0;     ///< drift (per unit time)
    double sigma = 0.0;  ///< volatility (per sqrt-time), > 0
    double lambda = 0.0; ///< jump intensity (per unit time), > 0
    double kappa = 0.0;  ///< multiplicative jump size, > 0
    double r = 0.0;      ///< discount rate (per unit time), > 0 and > mu

    /// Throws ValidationError naming the violated constraint.
    void validate() const;
};

/// Coefficients of the continuation-region equation
///   x^2 V''(x) + a x V'(x) + b V(x) = c V(x (1 + kappa)).
/// For any valid ModelParams, b < 0 and c < 0.
struct OdeCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Characteristic polynomial Q(beta) = beta (beta - 1) + a beta + b of the
/// homogeneous Euler-Cauchy equation, with its real roots beta1 >= beta2.
/// Whenever b < 0 the roots are distinct and beta1 > 0 > beta2.
struct CharPoly {
    double a = 0.0;
    double b = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// Default relative tolerance for root classification, applied at scale
/// max(1, alpha^2).
inline constexpr double kRootClassTol = 1e-9;

/// a = 2(mu - lambda kappa)/sigma^2, b = -2(r + lambda)/sigma^2,
/// c = -2 lambda / sigma^2. Validates the parameters first.
OdeCoeffs derive_coeffs(const ModelParams& params);

/// Roots of Q for coefficients produced by derive_coeffs (b < 0 guaranteed).
CharPoly q_roots(const OdeCoeffs& coeffs);

/// Standalone root solve; admits b >= 0 as long as the discriminant
/// (1-a)^2 - 4b is nonnegative (double roots cannot arise from valid model
/// parameters and exist here for testing the multiplicity-two branches).
/// Throws ValidationError when the roots are complex.
CharPoly q_roots(double a, double b);

double q_eval(const CharPoly& poly, double beta);

/// Derivative of Q of the given order: 0 -> Q(beta), 1 -> 2 beta - 1 + a,
/// 2 -> 2. Throws ValidationError for any other order.
double q_derivative(const CharPoly& poly, double beta, int order);

/// Multiplicity of alpha as a root of Q: 0 if |Q(alpha)| > tol*scale,
/// 2 if additionally |Q'(alpha)| <= tol*scale, else 1; scale = max(1, alpha^2).
int root_multiplicity(const CharPoly& poly, double alpha, double tol = kRootClassTol);

} // namespace jumpstop
