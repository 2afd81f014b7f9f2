#include "jumpstop/charpoly.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jumpstop {

void ModelParams::validate() const {
    if (!(sigma > 0.0)) throw ValidationError("sigma must be > 0");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be > 0");
    if (!(r > 0.0)) throw ValidationError("r must be > 0");
    if (!(kappa > 0.0))
        throw ValidationError("kappa must be > 0 (jumps must be able to cross the threshold)");
    if (!(r > mu)) throw ValidationError("r must exceed mu");
}

OdeCoeffs derive_coeffs(const ModelParams& params) {
    params.validate();
    const double s2 = params.sigma * params.sigma;
    return OdeCoeffs{2.0 * (params.mu - params.lambda * params.kappa) / s2,
                     -2.0 * (params.r + params.lambda) / s2,
                     -2.0 * params.lambda / s2};
}

double q_eval(const CharPoly& poly, double beta) {
    return beta * (beta - 1.0) + poly.a * beta + poly.b;
}

double q_derivative(const CharPoly& poly, double beta, int order) {
    switch (order) {
        case 0: return q_eval(poly, beta);
        case 1: return 2.0 * beta - 1.0 + poly.a;
        case 2: return 2.0;
        default:
            throw ValidationError("q_derivative: unsupported order " + std::to_string(order) +
                                  " (Q is quadratic; order must be 0, 1 or 2)");
    }
}

CharPoly q_roots(double a, double b) {
    // Monic form Q(beta) = beta^2 + B beta + b with B = a - 1.
    const double B = a - 1.0;
    const double disc = B * B - 4.0 * b;
    if (disc < 0.0)
        throw ValidationError("q_roots: complex roots, discriminant (1-a)^2 - 4b = " +
                              std::to_string(disc) + " < 0");
    CharPoly poly{a, b, 0.0, 0.0};
    const double s = std::sqrt(disc);
    if (s == 0.0) {
        poly.beta1 = poly.beta2 = -0.5 * B;
        return poly;
    }
    // Larger-magnitude root from the non-cancelling branch, companion via
    // the product identity beta1 * beta2 = b.
    const double q = -0.5 * (B + std::copysign(s, B));
    double r1 = q;
    double r2 = b / q;
    if (r1 < r2) std::swap(r1, r2);
    poly.beta1 = r1;
    poly.beta2 = r2;
    return poly;
}

CharPoly q_roots(const OdeCoeffs& coeffs) {
    return q_roots(coeffs.a, coeffs.b);
}

int root_multiplicity(const CharPoly& poly, double alpha, double tol) {
    if (!(tol > 0.0)) throw ValidationError("root_multiplicity: tol must be > 0");
    const double scale = std::max(1.0, alpha * alpha);
    if (std::fabs(q_eval(poly, alpha)) > tol * scale) return 0;
    if (std::fabs(q_derivative(poly, alpha, 1)) > tol * scale) return 1;
    return 2;
}

} // namespace jumpstop
