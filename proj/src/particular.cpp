#include "jumpstop/particular.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <string>
#include <utility>

namespace jumpstop {
namespace {

std::string num(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double neg1_pow(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double int_pow(double x, int k) {
    double p = 1.0;
    for (int j = 0; j < k; ++j) p *= x;
    return p;
}

/// n! / k! as a double, for any n, k >= 0.
double factorial_ratio(int n, int k) {
    double p = 1.0;
    if (k <= n) {
        for (int j = k + 1; j <= n; ++j) p *= j;
        return p;
    }
    for (int j = n + 1; j <= k; ++j) p *= j;
    return 1.0 / p;
}

double binomial(int n, int k) {
    double result = 1.0;
    for (int j = 1; j <= k; ++j) result *= static_cast<double>(n - k + j) / j;
    return result;
}

ParticularSolution assemble(double alpha, int multiplicity, std::vector<double> coeffs) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    std::vector<LogPowerTerm> terms;
    terms.reserve(coeffs.size());
    if (multiplicity == 2) {
        terms.push_back({coeffs[n], alpha, n + 2});
    } else {
        for (int i = 0; i <= n; ++i) terms.push_back({coeffs[i], alpha, i + multiplicity});
    }
    return ParticularSolution{canonicalize(std::move(terms)), multiplicity, std::move(coeffs)};
}

void check_request(const ParticularRequest& req) {
    if (req.term.coeff == 0.0)
        throw ValidationError("particular solve of a zero forcing term");
    if (req.term.log_power < 0)
        throw ValidationError("forcing log power must be nonnegative");
}

} // namespace

int classify_exponent(const CharPoly& poly, double alpha) {
    if (alpha == poly.beta1 || alpha == poly.beta2)
        return poly.beta1 == poly.beta2 ? 2 : 1;
    const double scale = std::max(1.0, alpha * alpha);
    const double q = std::fabs(q_eval(poly, alpha));
    if (q > kRootClassTol * scale) return 0;
    if (q > kExactRootTol * scale)
        throw ClassificationError("exponent " + num(alpha) +
                                  " lies in the root-ambiguity band of Q: |Q(alpha)| = " + num(q) +
                                  " at scale " + num(scale));
    const double dq = std::fabs(q_derivative(poly, alpha, 1));
    if (dq > kRootClassTol * scale) return 1;
    if (dq > kExactRootTol * scale)
        throw ClassificationError("exponent " + num(alpha) +
                                  " is a root with ambiguous multiplicity: |Q'(alpha)| = " +
                                  num(dq) + " at scale " + num(scale));
    return 2;
}

ParticularSolution particular_recursive(const ParticularRequest& req) {
    check_request(req);
    const double A = req.term.coeff;
    const double alpha = req.term.exponent;
    const int n = req.term.log_power;
    const int mult = classify_exponent(req.poly, alpha);

    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    if (mult == 0) {
        const double Q = q_eval(req.poly, alpha);
        const double Qp = q_derivative(req.poly, alpha, 1);
        c[n] = A / Q;
        if (n >= 1) c[n - 1] = -n * A * Qp / (Q * Q);
        for (int i = n - 2; i >= 0; --i)
            c[i] = -(i + 1.0) / Q * (Qp * c[i + 1] + (i + 2.0) * c[i + 2]);
    } else if (mult == 1) {
        const double Qp = q_derivative(req.poly, alpha, 1);
        c[n] = A / ((n + 1.0) * Qp);
        for (int i = n - 1; i >= 0; --i) c[i] = -(i + 2.0) / Qp * c[i + 1];
    } else {
        c[n] = A / ((n + 1.0) * (n + 2.0));
    }
    return assemble(alpha, mult, std::move(c));
}

ParticularSolution particular_closed(const ParticularRequest& req) {
    check_request(req);
    const double A = req.term.coeff;
    const double alpha = req.term.exponent;
    const int n = req.term.log_power;
    const int mult = classify_exponent(req.poly, alpha);

    // n!/i! reaches ~6e9 already at n = 13 starting from i = 0; beyond that
    // the recurrence is the better-conditioned evaluation of the same thing.
    if (mult == 0 && n > 12) return particular_recursive(req);

    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    if (mult == 0) {
        const double Q = q_eval(req.poly, alpha);
        const double Qp = q_derivative(req.poly, alpha, 1);
        for (int i = 0; i <= n; ++i) {
            const int m = n - i;
            double s = 0.0;
            for (int j = 0; 2 * j <= m; ++j)
                s += neg1_pow(j) * binomial(m - j, j) * int_pow(Qp, m - 2 * j) * int_pow(Q, j);
            c[i] = neg1_pow(m) * factorial_ratio(n, i) * A / int_pow(Q, m + 1) * s;
        }
    } else if (mult == 1) {
        const double Qp = q_derivative(req.poly, alpha, 1);
        for (int i = 0; i <= n; ++i) {
            const int m = n - i;
            c[i] = neg1_pow(m) * factorial_ratio(n, i + 1) * A / int_pow(Qp, m + 1);
        }
    } else {
        c[n] = A / ((n + 1.0) * (n + 2.0));
    }
    return assemble(alpha, mult, std::move(c));
}

ParticularSolution particular_n0(const CharPoly& poly, double A, double alpha) {
    if (A == 0.0) throw ValidationError("particular solve of a zero forcing term");
    const int mult = classify_exponent(poly, alpha);
    const double phi = A / q_derivative(poly, alpha, mult);
    std::vector<LogPowerTerm> terms{{phi, alpha, mult}};
    return ParticularSolution{canonicalize(std::move(terms)), mult, {phi}};
}

LogPowerSum particular_sum(const CharPoly& poly, const LogPowerSum& rhs) {
    std::vector<LogPowerTerm> out;
    for (const auto& t : rhs.terms) {
        try {
            auto sol = particular_recursive(ParticularRequest{poly, t});
            out.insert(out.end(), sol.solution.terms.begin(), sol.solution.terms.end());
        } catch (const ClassificationError& e) {
            throw ClassificationError("forcing term (A=" + num(t.coeff) + ", alpha=" +
                                      num(t.exponent) + ", n=" + std::to_string(t.log_power) +
                                      "): " + e.what());
        }
    }
    return canonicalize(std::move(out));
}

double residual(const CharPoly& poly, const LogPowerSum& candidate, const LogPowerSum& rhs,
                std::span<const double> points) {
    const LogPowerSum dy = differentiate(candidate);
    const LogPowerSum d2y = differentiate(dy);
    double worst = 0.0;
    for (double x : points) {
        if (!(x > 0.0)) throw ValidationError("residual points must be > 0");
        const double y = evaluate(candidate, x);
        const double lhs =
            x * x * evaluate(d2y, x) + poly.a * x * evaluate(dy, x) + poly.b * y;
        const double r = evaluate(rhs, x);
        const double denom = std::max({1.0, std::fabs(r), std::fabs(poly.b * y)});
        worst = std::max(worst, std::fabs(lhs - r) / denom);
    }
    return worst;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("log_spaced needs 0 < lo <= hi");
    if (n < 1) throw ValidationError("log_spaced needs n >= 1");
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        pts.push_back(lo);
        return pts;
    }
    const double step = (std::log(hi) - std::log(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) pts.push_back(lo * std::exp(step * i));
    pts.back() = hi;
    return pts;
}

} // namespace jumpstop
