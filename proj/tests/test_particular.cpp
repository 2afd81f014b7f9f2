#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "jumpstop/charpoly.hpp"
#include "jumpstop/logpower.hpp"
#include "jumpstop/particular.hpp"

using namespace jumpstop;

namespace {

struct Instance {
    CharPoly poly;
    LogPowerTerm term;
    int expected_mult;
};

// Random instances spread over the three multiplicity cases, resampled away
// from the classification band. Root instances place the root exactly: the
// multiplicity-one family builds b so that q_eval(alpha) cancels to zero in
// floating point, the multiplicity-two family pins a = 1 - 2 alpha, b = alpha^2.
Instance random_instance(std::mt19937_64& rng, int max_n = 8) {
    std::uniform_real_distribution<double> ab(-10.0, 10.0);
    std::uniform_real_distribution<double> as(-5.0, 5.0);
    std::uniform_real_distribution<double> As(-10.0, 10.0);
    std::uniform_int_distribution<int> ns(0, max_n);
    std::uniform_int_distribution<int> cases(0, 2);
    for (;;) {
        const int mult = cases(rng);
        double A = As(rng);
        if (std::fabs(A) < 1e-3) continue;
        const double alpha = as(rng);
        const int n = ns(rng);
        double a = 0.0, b = 0.0;
        if (mult == 0) {
            a = ab(rng);
            b = ab(rng);
        } else if (mult == 1) {
            a = ab(rng);
            b = -(alpha * (alpha - 1.0) + a * alpha); // q_eval cancels exactly
            if (std::fabs(2.0 * alpha - 1.0 + a) < 1e-3) continue; // keep Q' away from zero
        } else {
            a = 1.0 - 2.0 * alpha;
            b = alpha * alpha;
        }
        const double disc = (1.0 - a) * (1.0 - a) - 4.0 * b;
        if (disc < 0.0 && mult != 2) continue;
        CharPoly poly{a, b, 0.0, 0.0};
        if (disc >= 0.0) poly = q_roots(a, b);
        if (mult == 0) {
            const double scale = std::max(1.0, alpha * alpha);
            if (std::fabs(q_eval(poly, alpha)) <= 1e-6 * scale) continue; // off the band
        }
        return Instance{poly, LogPowerTerm{A, alpha, n}, mult};
    }
}

double rel_diff(double x, double y) {
    return std::fabs(x - y) / std::max({1.0, std::fabs(x), std::fabs(y)});
}

} // namespace

TEST_CASE("recurrence route on pinned cases") {
    const CharPoly p = q_roots(0.0, -2.0);

    // non-root constant forcing: Q(0) = -2, so 4 -> -2
    const auto flat = particular_recursive({p, {4.0, 0.0, 0}});
    CHECK(flat.multiplicity_used == 0);
    REQUIRE(flat.solution.terms.size() == 1);
    CHECK(flat.solution.terms[0] == LogPowerTerm{-2.0, 0.0, 0});

    // simple root: Q'(2) = 3, c0 = 6/(1*3) = 2, solution 2 x^2 ln x
    const auto simple = particular_recursive({p, {6.0, 2.0, 0}});
    CHECK(simple.multiplicity_used == 1);
    REQUIRE(simple.solution.terms.size() == 1);
    CHECK(simple.solution.terms[0].coeff == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(simple.solution.terms[0].exponent == 2.0);
    CHECK(simple.solution.terms[0].log_power == 1);

    // double root: c1 = 12/(2*3) = 2, solution 2 x (ln x)^3
    const CharPoly dbl = q_roots(-1.0, 1.0);
    const auto twice = particular_recursive({dbl, {12.0, 1.0, 1}});
    CHECK(twice.multiplicity_used == 2);
    REQUIRE(twice.solution.terms.size() == 1);
    CHECK(twice.solution.terms[0] == LogPowerTerm{2.0, 1.0, 3});
    REQUIRE(twice.coefficients.size() == 2);
    CHECK(twice.coefficients[0] == 0.0);
    CHECK(twice.coefficients[1] == 2.0);
}

TEST_CASE("explicit route equals the recurrence route on pinned cases") {
    const CharPoly p = q_roots(0.0, -2.0);

    const auto rec1 = particular_recursive({p, {1.0, 3.0, 2}});
    const auto cls1 = particular_closed({p, {1.0, 3.0, 2}});
    REQUIRE(rec1.coefficients.size() == cls1.coefficients.size());
    for (std::size_t i = 0; i < rec1.coefficients.size(); ++i)
        CHECK(rel_diff(rec1.coefficients[i], cls1.coefficients[i]) < 1e-14);

    // simple root, n = 3: c_i = (-1)^{3-i} 3!/(i+1)! 5 / Q'(2)^{4-i}
    const auto cls2 = particular_closed({p, {5.0, 2.0, 3}});
    const auto rec2 = particular_recursive({p, {5.0, 2.0, 3}});
    const double qp = q_derivative(p, 2.0, 1);
    const double fact[5] = {1, 1, 2, 6, 24};
    for (int i = 0; i <= 3; ++i) {
        const double want =
            ((3 - i) % 2 ? -1.0 : 1.0) * (6.0 / fact[i + 1]) * 5.0 / std::pow(qp, 4 - i);
        CHECK(rel_diff(cls2.coefficients[i], want) < 1e-14);
        CHECK(rel_diff(rec2.coefficients[i], want) < 1e-13);
    }

    // both theorems share the multiplicity-two formula verbatim
    const CharPoly dbl = q_roots(-1.0, 1.0);
    const auto reca = particular_recursive({dbl, {12.0, 1.0, 1}});
    const auto clsa = particular_closed({dbl, {12.0, 1.0, 1}});
    CHECK(reca.coefficients == clsa.coefficients);
    CHECK(reca.solution == clsa.solution);
}

TEST_CASE("the two routes agree on random instances across all multiplicities") {
    std::mt19937_64 rng(101);
    int seen[3] = {0, 0, 0};
    for (int k = 0; k < 400; ++k) {
        const Instance inst = random_instance(rng);
        const auto rec = particular_recursive({inst.poly, inst.term});
        const auto cls = particular_closed({inst.poly, inst.term});
        CHECK(rec.multiplicity_used == inst.expected_mult);
        CHECK(cls.multiplicity_used == inst.expected_mult);
        ++seen[rec.multiplicity_used];
        REQUIRE(rec.coefficients.size() == cls.coefficients.size());
        for (std::size_t i = 0; i < rec.coefficients.size(); ++i)
            CHECK(rel_diff(rec.coefficients[i], cls.coefficients[i]) < 1e-10);
    }
    CHECK(seen[0] > 50);
    CHECK(seen[1] > 50);
    CHECK(seen[2] > 50);
}

TEST_CASE("every produced solution satisfies its equation") {
    std::mt19937_64 rng(103);
    const std::vector<double> pts = log_spaced(1e-2, 1e2, 100);
    for (int k = 0; k < 200; ++k) {
        const Instance inst = random_instance(rng);
        const auto sol = particular_recursive({inst.poly, inst.term});
        const LogPowerSum rhs = canonicalize({inst.term});
        CHECK(residual(inst.poly, sol.solution, rhs, pts) < 1e-9);
    }
}

TEST_CASE("residual is zero on the zero pair and reacts to perturbations") {
    const CharPoly p = q_roots(0.0, -2.0);
    const std::vector<double> pts = log_spaced(1e-2, 1e2, 100);
    CHECK(residual(p, LogPowerSum{}, LogPowerSum{}, pts) == 0.0);
    CHECK_THROWS_AS(residual(p, LogPowerSum{}, LogPowerSum{}, std::vector<double>{-1.0}),
                    ValidationError);

    const double alpha = 3.0;
    const LogPowerSum rhs = canonicalize({{6.0, 2.0, 0}});
    const LogPowerSum clean = particular_sum(p, rhs);
    CHECK(residual(p, clean, rhs, pts) < 1e-12);
    const LogPowerSum bumped = add(clean, canonicalize({{1e-3, alpha, 0}}));
    CHECK(residual(p, bumped, rhs, pts) >= 1e-4 * std::fabs(q_eval(p, alpha)));
}

TEST_CASE("forced multiplicity-one instances agree and verify") {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> as(-5.0, 5.0);
    std::uniform_real_distribution<double> ab(-10.0, 10.0);
    const std::vector<double> pts = log_spaced(1e-2, 1e2, 100);
    for (int k = 0; k < 100; ++k) {
        const double alpha = as(rng);
        const double a = ab(rng);
        const double b = -(alpha * (alpha - 1.0) + a * alpha);
        if ((1.0 - a) * (1.0 - a) - 4.0 * b < 0.0) continue;
        if (std::fabs(2.0 * alpha - 1.0 + a) < 1e-3) continue;
        const CharPoly poly = q_roots(a, b);
        const LogPowerTerm term{3.5, alpha, 4};
        const auto rec = particular_recursive({poly, term});
        const auto cls = particular_closed({poly, term});
        CHECK(rec.multiplicity_used == 1);
        for (std::size_t i = 0; i < rec.coefficients.size(); ++i)
            CHECK(rel_diff(rec.coefficients[i], cls.coefficients[i]) < 1e-10);
        CHECK(residual(poly, rec.solution, canonicalize({term}), pts) < 1e-9);
    }
}

TEST_CASE("n = 0 special case") {
    const CharPoly p = q_roots(0.0, -2.0);
    const auto flat = particular_n0(p, 4.0, 0.0);
    REQUIRE(flat.solution.terms.size() == 1);
    CHECK(flat.solution.terms[0] == LogPowerTerm{-2.0, 0.0, 0});

    const auto simple = particular_n0(p, 6.0, 2.0);
    REQUIRE(simple.solution.terms.size() == 1);
    CHECK(simple.solution.terms[0].coeff == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(simple.solution.terms[0].log_power == 1);

    const CharPoly dbl = q_roots(-1.0, 1.0);
    const auto twice = particular_n0(dbl, 4.0, 1.0);
    REQUIRE(twice.solution.terms.size() == 1);
    CHECK(twice.solution.terms[0] == LogPowerTerm{2.0, 1.0, 2});
}

TEST_CASE("n = 0 special case equals the explicit route exactly") {
    std::mt19937_64 rng(109);
    for (int k = 0; k < 300; ++k) {
        const Instance inst = random_instance(rng, 0);
        const auto spec = particular_n0(inst.poly, inst.term.coeff, inst.term.exponent);
        const auto cls = particular_closed({inst.poly, {inst.term.coeff, inst.term.exponent, 0}});
        CHECK(spec.multiplicity_used == cls.multiplicity_used);
        REQUIRE(spec.coefficients.size() == 1);
        REQUIRE(cls.coefficients.size() == 1);
        CHECK(spec.coefficients[0] == cls.coefficients[0]); // bit-equal
        CHECK(spec.solution == cls.solution);
    }
}

TEST_CASE("superposition reproduces the iso-elastic closed forms") {
    // golden parameters: mu 0.05, sigma 0.2, lambda 0.5, kappa 0.3, r 0.1
    const OdeCoeffs coeffs = derive_coeffs({0.05, 0.2, 0.5, 0.3, 0.1});
    const CharPoly poly = q_roots(coeffs);
    const double c = coeffs.c, b = coeffs.b;
    const double rho = 1.0, theta = 0.8, inv = 1.0, kappa = 0.3;
    const double A1 = c * rho * std::pow(1.0 + kappa, theta);
    const LogPowerSum rhs = canonicalize({{A1, theta, 0}, {-c * inv, 0.0, 0}});
    const LogPowerSum got = particular_sum(poly, rhs);
    REQUIRE(got.terms.size() == 2);
    CHECK(got.terms[0].exponent == 0.0);
    CHECK(got.terms[0].coeff == doctest::Approx(-c * inv / b).epsilon(1e-14));
    CHECK(got.terms[1].exponent == theta);
    CHECK(got.terms[1].coeff == doctest::Approx(A1 / q_eval(poly, theta)).epsilon(1e-14));
}

TEST_CASE("superposition of the empty forcing is empty") {
    const CharPoly p = q_roots(0.0, -2.0);
    CHECK(particular_sum(p, LogPowerSum{}).empty());
}

TEST_CASE("superposition merges same-exponent forcings and verifies") {
    const CharPoly p = q_roots(0.0, -2.0);
    const LogPowerSum rhs = canonicalize({{2.0, 1.5, 0}, {-3.0, 1.5, 2}});
    const LogPowerSum sol = particular_sum(p, rhs);
    std::set<std::pair<double, int>> keys;
    for (const auto& t : sol.terms) CHECK(keys.insert({t.exponent, t.log_power}).second);
    const std::vector<double> pts = log_spaced(1e-2, 1e2, 100);
    CHECK(residual(p, sol, rhs, pts) < 1e-9);
}

TEST_CASE("superposition is linear") {
    std::mt19937_64 rng(113);
    for (int k = 0; k < 100; ++k) {
        const Instance i1 = random_instance(rng, 4);
        const Instance i2 = random_instance(rng, 4);
        const CharPoly poly = i1.poly; // one operator, two forcings
        // skip if i2's exponent does not classify under i1's polynomial
        int m2 = 0;
        try {
            m2 = classify_exponent(poly, i2.term.exponent);
        } catch (const ClassificationError&) {
            continue;
        }
        (void)m2;
        const LogPowerSum s1 = canonicalize({i1.term});
        const LogPowerSum s2 = canonicalize({i2.term});
        const LogPowerSum joint = particular_sum(poly, add(s1, s2));
        const LogPowerSum split = add(particular_sum(poly, s1), particular_sum(poly, s2));
        REQUIRE(joint.terms.size() == split.terms.size());
        for (std::size_t i = 0; i < joint.terms.size(); ++i) {
            CHECK(joint.terms[i].exponent == split.terms[i].exponent);
            CHECK(joint.terms[i].log_power == split.terms[i].log_power);
            CHECK(rel_diff(joint.terms[i].coeff, split.terms[i].coeff) < 1e-12);
        }
    }
}

TEST_CASE("parcel count respects the superposition bounds") {
    std::mt19937_64 rng(127);
    for (int k = 0; k < 100; ++k) {
        const CharPoly poly = q_roots(0.0, -2.0);
        std::uniform_int_distribution<int> ms(1, 5);
        std::uniform_int_distribution<int> ns(0, 4);
        std::uniform_real_distribution<double> as(2.1, 9.7);
        std::uniform_real_distribution<double> As(0.5, 3.0);
        const int m = ms(rng);
        std::vector<LogPowerTerm> terms;
        std::set<double> used;
        int total_n = 0;
        for (int i = 0; i < m; ++i) {
            double alpha = as(rng);
            while (!used.insert(alpha).second) alpha = as(rng);
            const int n = ns(rng);
            total_n += n;
            terms.push_back({As(rng), alpha, n});
        }
        const LogPowerSum sol = particular_sum(poly, canonicalize(terms));
        CHECK(static_cast<int>(sol.terms.size()) >= m);
        CHECK(static_cast<int>(sol.terms.size()) <= m + total_n);
    }
}

TEST_CASE("near-root exponents are rejected, not guessed") {
    const CharPoly p = q_roots(0.0, -2.0); // roots 2 and -1
    const double alpha = 2.0 + 1e-10 / q_derivative(p, 2.0, 1); // |Q(alpha)| ~ 1e-10
    CHECK_THROWS_AS(particular_recursive({p, {1.0, alpha, 2}}), ClassificationError);
    CHECK_THROWS_AS(particular_closed({p, {1.0, alpha, 2}}), ClassificationError);
    CHECK_THROWS_AS(particular_n0(p, 1.0, alpha), ClassificationError);
    // the superposition names the offending term
    try {
        particular_sum(p, canonicalize({{3.0, 0.5, 0}, {1.0, alpha, 2}}));
        FAIL("expected ClassificationError");
    } catch (const ClassificationError& e) {
        CHECK(std::string(e.what()).find("alpha=") != std::string::npos);
    }
}

TEST_CASE("zero forcing terms are rejected") {
    const CharPoly p = q_roots(0.0, -2.0);
    CHECK_THROWS_AS(particular_recursive({p, {0.0, 1.0, 0}}), ValidationError);
    CHECK_THROWS_AS(particular_n0(p, 0.0, 1.0), ValidationError);
}

TEST_CASE("bit-equal root exponents classify by construction") {
    const CharPoly p = q_roots(-5.0, -30.0);
    CHECK(classify_exponent(p, p.beta1) == 1);
    CHECK(classify_exponent(p, p.beta2) == 1);
    const CharPoly dbl = q_roots(-1.0, 1.0);
    CHECK(classify_exponent(dbl, dbl.beta1) == 2);
}
