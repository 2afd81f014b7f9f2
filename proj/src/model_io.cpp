#include "jumpstop/model_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace jumpstop {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_any(const std::string& s, const char* seps) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t next = s.find_first_of(seps, pos);
        const std::string piece =
            trim(next == std::string::npos ? s.substr(pos) : s.substr(pos, next - pos));
        if (!piece.empty()) out.push_back(piece);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

bool parse_bool(const std::string& text, int line) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ValidationError("line " + std::to_string(line) + ": expected a boolean, got '" + text +
                          "'");
}

LogPowerTerm parse_term(const std::string& value, int line) {
    const auto parts = split_any(value, " ,\t");
    if (parts.size() != 3)
        throw ValidationError("line " + std::to_string(line) +
                              ": a term needs exactly coeff, exponent, log_power");
    LogPowerTerm t;
    t.coeff = parse_double(parts[0]);
    t.exponent = parse_double(parts[1]);
    const std::int64_t n = parse_int(parts[2]);
    if (n < 0)
        throw ValidationError("line " + std::to_string(line) + ": log_power must be nonnegative");
    t.log_power = static_cast<int>(n);
    return t;
}

struct KeyValue {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

/// Shared scanner for the config and model formats: [section] headers,
/// key = value lines, '#' comments.
std::vector<KeyValue> scan_kv(std::istream& in) {
    std::vector<KeyValue> out;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ValidationError("line " + std::to_string(line) + ": unterminated section");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw ValidationError("line " + std::to_string(line) + ": empty section name");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ValidationError("line " + std::to_string(line) + ": expected key = value");
        if (section.empty())
            throw ValidationError("line " + std::to_string(line) + ": key outside any section");
        out.push_back({section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
    }
    return out;
}

[[noreturn]] void unknown_key(const KeyValue& kv) {
    throw ValidationError("line " + std::to_string(kv.line) + ": unknown key '" + kv.key +
                          "' in section [" + kv.section + "]");
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(const std::string& text) {
    std::string t = trim(text);
    if (!t.empty() && t.front() == '+') t.erase(t.begin());
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last)
        throw ValidationError("not a number: '" + text + "'");
    return v;
}

std::int64_t parse_int(const std::string& text) {
    std::string t = trim(text);
    if (!t.empty() && t.front() == '+') t.erase(t.begin());
    std::int64_t v = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last)
        throw ValidationError("not an integer: '" + text + "'");
    return v;
}

std::vector<double> parse_points(const std::string& text) {
    const auto parts = split_any(text, ", ");
    if (parts.empty()) throw ValidationError("empty point list");
    std::vector<double> pts;
    pts.reserve(parts.size());
    for (const auto& p : parts) pts.push_back(parse_double(p));
    return pts;
}

std::vector<double> parse_grid(const std::string& text) {
    std::string t = trim(text);
    bool log_spacing = false;
    if (t.size() >= 5 && t.substr(t.size() - 5) == "(log)") {
        log_spacing = true;
        t = trim(t.substr(0, t.size() - 5));
    }
    auto parts = split_any(t, ":");
    if (parts.size() == 4 && parts[3] == "log") {
        log_spacing = true;
        parts.pop_back();
    }
    if (parts.size() != 3)
        throw ValidationError("grid must be lo:hi:n, lo:hi:n:log or lo:hi:n(log)");
    const double lo = parse_double(parts[0]);
    const double hi = parse_double(parts[1]);
    const std::int64_t n = parse_int(parts[2]);
    if (n < 1) throw ValidationError("grid needs at least one point");
    if (!(lo <= hi)) throw ValidationError("grid needs lo <= hi");
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        pts.push_back(lo);
        return pts;
    }
    if (log_spacing) {
        if (!(lo > 0.0)) throw ValidationError("log grid needs lo > 0");
        const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(n - 1);
        for (std::int64_t i = 0; i < n; ++i)
            pts.push_back(lo * std::exp(step * static_cast<double>(i)));
    } else {
        const double step = (hi - lo) / static_cast<double>(n - 1);
        for (std::int64_t i = 0; i < n; ++i) pts.push_back(lo + step * static_cast<double>(i));
    }
    pts.back() = hi;
    return pts;
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::optional<double> rho, theta, investment;
    std::vector<LogPowerTerm> terms;
    bool saw_mu = false, saw_sigma = false, saw_lambda = false, saw_kappa = false, saw_r = false;

    for (const auto& kv : scan_kv(in)) {
        if (kv.section == "model") {
            if (kv.key == "mu") { cfg.params.mu = parse_double(kv.value); saw_mu = true; }
            else if (kv.key == "sigma") { cfg.params.sigma = parse_double(kv.value); saw_sigma = true; }
            else if (kv.key == "lambda") { cfg.params.lambda = parse_double(kv.value); saw_lambda = true; }
            else if (kv.key == "kappa") { cfg.params.kappa = parse_double(kv.value); saw_kappa = true; }
            else if (kv.key == "r") { cfg.params.r = parse_double(kv.value); saw_r = true; }
            else unknown_key(kv);
        } else if (kv.section == "payoff") {
            if (kv.key == "rho") rho = parse_double(kv.value);
            else if (kv.key == "theta") theta = parse_double(kv.value);
            else if (kv.key == "investment") investment = parse_double(kv.value);
            else if (kv.key == "term") terms.push_back(parse_term(kv.value, kv.line));
            else unknown_key(kv);
        } else if (kv.section == "solve") {
            if (kv.key == "x_star") cfg.x_star = parse_double(kv.value);
            else if (kv.key == "depth") cfg.depth = static_cast<int>(parse_int(kv.value));
            else if (kv.key == "delta1") cfg.delta1 = parse_double(kv.value);
            else if (kv.key == "delta2") cfg.delta2 = parse_double(kv.value);
            else if (kv.key == "delta2_zero") cfg.delta2_zero = parse_bool(kv.value, kv.line);
            else if (kv.key == "smooth_pasting") cfg.smooth_pasting = parse_bool(kv.value, kv.line);
            else if (kv.key == "per_segment_constants")
                cfg.per_segment_constants = parse_bool(kv.value, kv.line);
            else unknown_key(kv);
        } else if (kv.section == "simulate") {
            if (kv.key == "x0") cfg.x0 = parse_double(kv.value);
            else if (kv.key == "n_paths") cfg.n_paths = parse_int(kv.value);
            else if (kv.key == "dt") cfg.dt = parse_double(kv.value);
            else if (kv.key == "t_max") cfg.t_max = parse_double(kv.value);
            else if (kv.key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(kv.value));
            else unknown_key(kv);
        } else if (kv.section == "output") {
            if (kv.key == "model") cfg.model_path = kv.value;
            else unknown_key(kv);
        } else {
            throw ValidationError("line " + std::to_string(kv.line) + ": unknown section [" +
                                  kv.section + "]");
        }
    }

    if (!(saw_mu && saw_sigma && saw_lambda && saw_kappa && saw_r))
        throw ValidationError("[model] must set mu, sigma, lambda, kappa and r");
    const bool shorthand = rho || theta || investment;
    if (shorthand) {
        if (!terms.empty())
            throw ValidationError("[payoff] mixes the rho/theta/investment shorthand with terms");
        if (!(rho && theta && investment))
            throw ValidationError("[payoff] shorthand needs all of rho, theta, investment");
        terms.push_back({*rho, *theta, 0});
        terms.push_back({-*investment, 0.0, 0});
    }
    if (terms.empty()) throw ValidationError("[payoff] must define at least one term");
    cfg.payoff.g = canonicalize(std::move(terms));
    if (cfg.payoff.g.empty()) throw ValidationError("[payoff] terms cancel to the zero function");
    if (cfg.t_max == 0.0 && cfg.params.r > 0.0) cfg.t_max = 10.0 / cfg.params.r;
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_model(std::ostream& out, const SolvedModel& m) {
    out << "[header]\n";
    out << "x_star = " << format_double(m.value.x_star) << "\n";
    out << "kappa = " << format_double(m.value.jump_factor - 1.0) << "\n";
    out << "beta1 = " << format_double(m.poly.beta1) << "\n";
    out << "beta2 = " << format_double(m.poly.beta2) << "\n";
    out << "delta1 = " << format_double(m.value.delta1) << "\n";
    out << "delta2 = " << format_double(m.value.delta2) << "\n";
    out << "depth = " << m.value.depth() << "\n";
    out << "a = " << format_double(m.coeffs.a) << "\n";
    out << "b = " << format_double(m.coeffs.b) << "\n";
    out << "c = " << format_double(m.coeffs.c) << "\n";
    out << "[payoff]\n";
    for (const auto& t : m.payoff.g.terms)
        out << "term = " << format_double(t.coeff) << " " << format_double(t.exponent) << " "
            << t.log_power << "\n";
    for (int i = 1; i <= m.value.depth(); ++i) {
        out << "[segment " << i << "]\n";
        for (const auto& t : m.value.segments[static_cast<std::size_t>(i) - 1].terms)
            out << "term = " << format_double(t.coeff) << " " << format_double(t.exponent) << " "
                << t.log_power << "\n";
    }
}

void write_model_file(const std::string& path, const SolvedModel& model) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    write_model(out, model);
    if (!out) throw ValidationError("failed writing model file '" + path + "'");
}

SolvedModel read_model(std::istream& in) {
    SolvedModel m;
    double kappa = 0.0;
    int depth = -1;
    bool saw[10] = {};
    const auto mark = [&](int i) { saw[i] = true; };

    for (const auto& kv : scan_kv(in)) {
        if (kv.section == "header") {
            if (kv.key == "x_star") { m.value.x_star = parse_double(kv.value); mark(0); }
            else if (kv.key == "kappa") { kappa = parse_double(kv.value); mark(1); }
            else if (kv.key == "beta1") { m.poly.beta1 = parse_double(kv.value); mark(2); }
            else if (kv.key == "beta2") { m.poly.beta2 = parse_double(kv.value); mark(3); }
            else if (kv.key == "delta1") { m.value.delta1 = parse_double(kv.value); mark(4); }
            else if (kv.key == "delta2") { m.value.delta2 = parse_double(kv.value); mark(5); }
            else if (kv.key == "depth") { depth = static_cast<int>(parse_int(kv.value)); mark(6); }
            else if (kv.key == "a") { m.coeffs.a = parse_double(kv.value); mark(7); }
            else if (kv.key == "b") { m.coeffs.b = parse_double(kv.value); mark(8); }
            else if (kv.key == "c") { m.coeffs.c = parse_double(kv.value); mark(9); }
            else unknown_key(kv);
        } else if (kv.section == "payoff") {
            if (kv.key == "term") m.payoff.g.terms.push_back(parse_term(kv.value, kv.line));
            else unknown_key(kv);
        } else if (kv.section.rfind("segment ", 0) == 0) {
            const std::int64_t idx = parse_int(kv.section.substr(8));
            if (idx < 1)
                throw ValidationError("line " + std::to_string(kv.line) + ": bad segment index");
            if (static_cast<std::size_t>(idx) > m.value.segments.size()) {
                if (static_cast<std::size_t>(idx) != m.value.segments.size() + 1)
                    throw ValidationError("line " + std::to_string(kv.line) +
                                          ": segments must appear in order");
                m.value.segments.emplace_back();
            }
            if (kv.key == "term")
                m.value.segments[static_cast<std::size_t>(idx) - 1].terms.push_back(
                    parse_term(kv.value, kv.line));
            else unknown_key(kv);
        } else {
            throw ValidationError("line " + std::to_string(kv.line) + ": unknown section [" +
                                  kv.section + "]");
        }
    }

    for (bool s : saw)
        if (!s) throw ValidationError("model header is missing required keys");
    if (depth != m.value.depth())
        throw ValidationError("model depth " + std::to_string(depth) + " does not match the " +
                              std::to_string(m.value.depth()) + " segment sections");
    if (m.value.segments.empty()) throw ValidationError("model has no segments");
    if (m.payoff.g.terms.empty()) throw ValidationError("model has no payoff terms");
    m.value.jump_factor = 1.0 + kappa;
    m.poly.a = m.coeffs.a;
    m.poly.b = m.coeffs.b;
    return m;
}

SolvedModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file '" + path + "'");
    return read_model(in);
}

} // namespace jumpstop
