#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "jumpstop/charpoly.hpp"
#include "jumpstop/simulate.hpp"
#include "jumpstop/valuefn.hpp"

namespace jumpstop {

/// Parsed run configuration: flat key-value text, one [section] per block,
/// '#' comments. See the README for the key list.
struct RunConfig {
    ModelParams params;
    Payoff payoff;

    // [solve]
    std::optional<double> x_star; ///< absent: the threshold is fitted
    int depth = 25;
    std::optional<double> delta1; ///< explicit homogeneous constants override
    std::optional<double> delta2;
    bool delta2_zero = true;
    bool smooth_pasting = true;
    bool per_segment_constants = false;

    // [simulate]
    double x0 = 1.0;
    std::int64_t n_paths = 100000;
    double dt = 0.005;
    double t_max = 0.0; ///< 0: default to 10/r
    std::uint64_t seed = 1;

    // [output]
    std::optional<std::string> model_path;
};

RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

/// A solved model: everything a downstream command needs to evaluate, check
/// and simulate against the piecewise value function.
struct SolvedModel {
    CharPoly poly;
    OdeCoeffs coeffs;
    Payoff payoff;
    PiecewiseValue value;
};

/// Model file: [header] with x_star, kappa, beta1, beta2, delta1, delta2,
/// depth and the equation coefficients, a [payoff] section, then one
/// [segment i] section of coeff/exponent/log_power triples per segment.
/// Numbers are written in shortest round-trip form, so read_model
/// reproduces the in-memory model bit for bit.
void write_model(std::ostream& out, const SolvedModel& model);
void write_model_file(const std::string& path, const SolvedModel& model);
SolvedModel read_model(std::istream& in);
SolvedModel read_model_file(const std::string& path);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Strict double/int parsing (whole string must consume); throws
/// ValidationError otherwise.
double parse_double(const std::string& text);
std::int64_t parse_int(const std::string& text);

/// "x1,x2,..." -> values; throws ValidationError on malformed input.
std::vector<double> parse_points(const std::string& text);

/// "lo:hi:n" (linear) or "lo:hi:n:log" / "lo:hi:n(log)" (geometric).
std::vector<double> parse_grid(const std::string& text);

} // namespace jumpstop
