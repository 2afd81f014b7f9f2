#include "jumpstop/logpower.hpp"

#include <algorithm>
#include <cmath>

namespace jumpstop {
namespace {

bool key_less(const LogPowerTerm& lhs, const LogPowerTerm& rhs) {
    if (lhs.exponent != rhs.exponent) return lhs.exponent < rhs.exponent;
    return lhs.log_power < rhs.log_power;
}

bool key_equal(const LogPowerTerm& lhs, const LogPowerTerm& rhs) {
    return lhs.exponent == rhs.exponent && lhs.log_power == rhs.log_power;
}

double binomial(int n, int k) {
    double result = 1.0;
    for (int j = 1; j <= k; ++j) result *= static_cast<double>(n - k + j) / j;
    return result;
}

} // namespace

LogPowerSum canonicalize(std::vector<LogPowerTerm> terms) {
    for (const auto& t : terms)
        if (t.log_power < 0) throw ValidationError("log_power must be nonnegative");
    std::sort(terms.begin(), terms.end(), key_less);
    LogPowerSum out;
    out.terms.reserve(terms.size());
    for (const auto& t : terms) {
        if (!out.terms.empty() && key_equal(out.terms.back(), t))
            out.terms.back().coeff += t.coeff;
        else
            out.terms.push_back(t);
    }
    std::erase_if(out.terms, [](const LogPowerTerm& t) { return t.coeff == 0.0; });
    return out;
}

double evaluate(const LogPowerSum& sum, double x) {
    if (!(x > 0.0)) throw ValidationError("log-power sums are only defined for x > 0");
    const double lx = std::log(x);
    double acc = 0.0;
    for (const auto& t : sum.terms)
        acc += t.coeff * std::pow(x, t.exponent) * std::pow(lx, t.log_power);
    return acc;
}

LogPowerSum differentiate(const LogPowerSum& sum) {
    std::vector<LogPowerTerm> out;
    out.reserve(2 * sum.terms.size());
    for (const auto& t : sum.terms) {
        out.push_back({t.coeff * t.exponent, t.exponent - 1.0, t.log_power});
        if (t.log_power > 0)
            out.push_back({t.coeff * t.log_power, t.exponent - 1.0, t.log_power - 1});
    }
    return canonicalize(std::move(out));
}

LogPowerSum shift_scale_argument(const LogPowerSum& sum, double factor, double premultiplier) {
    if (!(factor > 0.0)) throw ValidationError("argument scaling factor must be > 0");
    const double lf = std::log(factor);
    std::vector<LogPowerTerm> out;
    for (const auto& t : sum.terms) {
        const double base = premultiplier * t.coeff * std::pow(factor, t.exponent);
        for (int m = 0; m <= t.log_power; ++m) {
            const double coeff =
                base * binomial(t.log_power, m) * std::pow(lf, t.log_power - m);
            out.push_back({coeff, t.exponent, m});
        }
    }
    return canonicalize(std::move(out));
}

LogPowerSum add(const LogPowerSum& lhs, const LogPowerSum& rhs) {
    std::vector<LogPowerTerm> out;
    out.reserve(lhs.terms.size() + rhs.terms.size());
    out.insert(out.end(), lhs.terms.begin(), lhs.terms.end());
    out.insert(out.end(), rhs.terms.begin(), rhs.terms.end());
    return canonicalize(std::move(out));
}

LogPowerSum scale(const LogPowerSum& sum, double factor) {
    std::vector<LogPowerTerm> out = sum.terms;
    for (auto& t : out) t.coeff *= factor;
    return canonicalize(std::move(out));
}

} // namespace jumpstop
