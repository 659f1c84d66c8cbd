#include "forest/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "forest/delay.hpp"
#include "forest/verify.hpp"

namespace forest::io {

using nlohmann::json;

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : InvalidInput("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   message),
      line_(line),
      column_(column) {}

namespace {

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) {
        throw InvalidInput(where + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw InvalidInput(where + ": unknown key '" + key + "'");
        }
    }
}

double number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) {
        throw InvalidInput(where + ": missing '" + key + "'");
    }
    if (!j.at(key).is_number()) {
        throw InvalidInput(where + ": '" + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
    return j.contains(key) ? number(j, key, where) : fallback;
}

std::vector<double> number_array(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw InvalidInput(where + ": '" + key + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number()) {
            throw InvalidInput(where + ": '" + key + "' must be an array of numbers");
        }
        out.push_back(v.get<double>());
    }
    return out;
}

CompetitionFunction parse_f(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw InvalidInput(where + ": 'kind' must be a string");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rational-decay" || kind == "rational") {
        expect_keys(j, {"kind", "kappa", "theta", "p"}, where);
        return CompetitionFunction::rational(number(j, "kappa", where), number(j, "theta", where),
                                             number(j, "p", where));
    }
    if (kind == "exponential-decay" || kind == "exponential") {
        expect_keys(j, {"kind", "kappa", "rate"}, where);
        return CompetitionFunction::exponential(number(j, "kappa", where), number(j, "rate", where));
    }
    if (kind == "constant") {
        expect_keys(j, {"kind", "kappa"}, where);
        return CompetitionFunction::constant(number(j, "kappa", where));
    }
    throw InvalidInput(where + ": unknown competition function kind '" + kind + "'");
}

InitialHistory parse_history(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        throw InvalidInput(where + ": 'kind' must be a string");
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        expect_keys(j, {"kind", "value"}, where);
        return InitialHistory::constant(number(j, "value", where));
    }
    if (kind == "linear") {
        expect_keys(j, {"kind", "value", "slope"}, where);
        return InitialHistory::linear(number(j, "value", where), number(j, "slope", where));
    }
    if (kind == "sinusoidal") {
        expect_keys(j, {"kind", "value", "amplitude", "omega", "phase"}, where);
        return InitialHistory::sinusoidal(number(j, "value", where), number(j, "amplitude", where),
                                          number(j, "omega", where), number_or(j, "phase", 0.0, where));
    }
    if (kind == "sampled") {
        expect_keys(j, {"kind", "times", "values"}, where);
        return InitialHistory::sampled(number_array(j, "times", where), number_array(j, "values", where));
    }
    throw InvalidInput(where + ": unknown history kind '" + kind + "'");
}

json f_to_json(const CompetitionFunction& f) {
    json j{{"kind", to_string(f.kind)}, {"kappa", f.kappa}};
    switch (f.kind) {
        case CompetitionFunction::Kind::RationalDecay:
            j["theta"] = f.theta;
            j["p"] = f.p;
            break;
        case CompetitionFunction::Kind::ExponentialDecay:
            j["rate"] = f.rate;
            break;
        case CompetitionFunction::Kind::Constant:
            break;
    }
    return j;
}

json history_to_json(const InitialHistory& h) {
    json j{{"kind", to_string(h.kind)}};
    switch (h.kind) {
        case InitialHistory::Kind::Constant:
            j["value"] = h.value;
            break;
        case InitialHistory::Kind::Linear:
            j["value"] = h.value;
            j["slope"] = h.slope;
            break;
        case InitialHistory::Kind::Sinusoidal:
            j["value"] = h.value;
            j["amplitude"] = h.amplitude;
            j["omega"] = h.omega;
            j["phase"] = h.phase;
            break;
        case InitialHistory::Kind::Sampled:
            j["times"] = h.times;
            j["values"] = h.values;
            break;
    }
    return j;
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is the 1-based offset of the offending character.
        std::size_t line = 1;
        std::size_t column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t k = 0; k < end; ++k) {
            if (text[k] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::string what = e.what();
        const auto pos = what.find("]: ");
        throw ParseError(line, column, pos == std::string::npos ? what : what.substr(pos + 3));
    }
}

std::size_t parse_index(std::string_view s, const std::string& path) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw InvalidInput("parameter path '" + path + "': '" + std::string(s) + "' is not an index");
    }
    return v;
}

}  // namespace

ModelConfig config_from_json(const json& j) {
    expect_keys(j, {"species", "zeta", "settings"}, "config");
    if (!j.contains("species") || !j.at("species").is_array()) {
        throw InvalidInput("config: 'species' must be an array");
    }
    ModelConfig config;
    std::size_t idx = 0;
    for (const auto& s : j.at("species")) {
        const std::string where = "species[" + std::to_string(idx++) + "]";
        expect_keys(s, {"mu_A", "mu_J", "beta", "tau0", "f", "history"}, where);
        SpeciesParams sp;
        sp.mu_A = number(s, "mu_A", where);
        sp.mu_J = number(s, "mu_J", where);
        sp.beta = number(s, "beta", where);
        sp.tau0 = number(s, "tau0", where);
        if (!s.contains("f")) {
            throw InvalidInput(where + ": missing 'f'");
        }
        sp.f = parse_f(s.at("f"), where + ".f");
        if (!s.contains("history")) {
            throw InvalidInput(where + ": missing 'history'");
        }
        sp.history = parse_history(s.at("history"), where + ".history");
        config.species.push_back(std::move(sp));
    }
    if (!j.contains("zeta") || !j.at("zeta").is_array()) {
        throw InvalidInput("config: 'zeta' must be an array of rows");
    }
    for (const auto& row : j.at("zeta")) {
        if (!row.is_array()) {
            throw InvalidInput("config: 'zeta' must be an array of rows");
        }
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw InvalidInput("config: zeta entries must be numbers");
            }
            r.push_back(v.get<double>());
        }
        config.zeta.push_back(std::move(r));
    }
    validate(config);
    return config;
}

ModelConfig parse_config_text(std::string_view text) { return config_from_json(parse_json(text)); }

ModelConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

json config_to_json(const ModelConfig& config) {
    json species = json::array();
    for (const auto& sp : config.species) {
        species.push_back({{"mu_A", sp.mu_A},
                           {"mu_J", sp.mu_J},
                           {"beta", sp.beta},
                           {"tau0", sp.tau0},
                           {"f", f_to_json(sp.f)},
                           {"history", history_to_json(sp.history)}});
    }
    return {{"species", species}, {"zeta", config.zeta}};
}

std::string emit_config(const ModelConfig& config) { return config_to_json(config).dump(2) + "\n"; }

IntegratorSettings settings_from_json(const json& j, IntegratorSettings base) {
    if (!j.contains("settings")) {
        return base;
    }
    const auto& s = j.at("settings");
    expect_keys(s, {"h", "t_end", "reanchor_every", "max_fixed_point_iters", "breaking_point_levels"},
                "settings");
    base.h = number_or(s, "h", base.h, "settings");
    base.t_end = number_or(s, "t_end", base.t_end, "settings");
    const auto integer = [&](const char* key, int fallback) {
        if (!s.contains(key)) {
            return fallback;
        }
        if (!s.at(key).is_number_integer()) {
            throw InvalidInput(std::string("settings: '") + key + "' must be an integer");
        }
        return s.at(key).get<int>();
    };
    base.reanchor_every = integer("reanchor_every", base.reanchor_every);
    base.max_fixed_point_iters = integer("max_fixed_point_iters", base.max_fixed_point_iters);
    base.breaking_point_levels = integer("breaking_point_levels", base.breaking_point_levels);
    base.validate();
    return base;
}

IntegratorSettings parse_settings_text(std::string_view text, IntegratorSettings base) {
    return settings_from_json(parse_json(text), base);
}

json settings_to_json(const IntegratorSettings& s) {
    return {{"h", s.h},
            {"t_end", s.t_end},
            {"reanchor_every", s.reanchor_every},
            {"max_fixed_point_iters", s.max_fixed_point_iters},
            {"breaking_point_levels", s.breaking_point_levels}};
}

std::uint64_t config_hash(const ModelConfig& config) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : emit_config(config)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash_hex(const ModelConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(config)));
    return buf;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_header(std::size_t n) {
    std::string out = "t";
    for (const char* prefix : {"A_", "tau_", "lag_", "conservation_residual_"}) {
        for (std::size_t i = 1; i <= n; ++i) {
            out += ",";
            out += prefix;
            out += std::to_string(i);
        }
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const SolveResult& result) {
    const auto& traj = result.trajectory;
    const std::size_t n = traj.n();
    out << csv_header(n) << '\n';
    std::string row;
    for (std::size_t k = 0; k < traj.knot_count(); ++k) {
        const double t = traj.knot_time(k);
        row = format_number(t);
        const auto A = traj.knot_A(k);
        const auto tau = traj.knot_tau(k);
        for (std::size_t i = 0; i < n; ++i) {
            row += ',' + format_number(A[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            row += ',' + format_number(tau[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            row += ',' + format_number(t - tau[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double r = traj.config().species[i].tau0 > 0.0 ? conservation_residual(traj, i, t) : 0.0;
            row += ',' + format_number(r);
        }
        out << row << '\n';
    }
}

json run_metadata(const ModelConfig& config, const SolveResult& result,
                  const IntegratorSettings& settings) {
    json tstar = json::array();
    for (const auto& ts : result.breaks.tstar) {
        tstar.push_back(ts ? json(*ts) : json(nullptr));
    }
    return {{"config", config_to_json(config)},
            {"config_hash", config_hash_hex(config)},
            {"settings", settings_to_json(settings)},
            {"C", result.trajectory.normalization().C},
            {"tstar", tstar},
            {"steps", result.diagnostics.steps},
            {"version", kVersion}};
}

json report_to_json(const verify::VerificationReport& report) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"metric", c.metric},
                          {"tolerance", c.tolerance},
                          {"runtime_s", c.runtime_s},
                          {"detail", c.detail}});
    }
    return {{"passed", report.all_passed()},
            {"checks", checks},
            {"skipped", report.skipped},
            {"metadata", report.metadata}};
}

std::vector<double> parse_range(std::string_view text) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        const auto piece = text.substr(start, colon == std::string_view::npos ? std::string_view::npos
                                                                               : colon - start);
        double v = 0.0;
        const auto [p, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
        if (piece.empty() || ec != std::errc{} || p != piece.data() + piece.size()) {
            throw InvalidInput("range '" + std::string(text) + "': expected a:b:step");
        }
        parts.push_back(v);
        if (colon == std::string_view::npos) {
            break;
        }
        start = colon + 1;
    }
    if (parts.size() != 3) {
        throw InvalidInput("range '" + std::string(text) + "': expected a:b:step");
    }
    const double a = parts[0], b = parts[1], step = parts[2];
    if (!(step > 0.0)) {
        throw InvalidInput("range '" + std::string(text) + "': step must be > 0");
    }
    if (!(b >= a)) {
        throw InvalidInput("range '" + std::string(text) + "': end must be >= start");
    }
    // Count points from the rounded quotient so 0.05:0.5:0.05 gives 10 values.
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(a + static_cast<double>(k) * step);
    }
    return out;
}

void set_parameter(ModelConfig& config, std::string_view path, double value) {
    const std::string p(path);
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        parts.push_back(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (dot == std::string_view::npos) {
            break;
        }
        start = dot + 1;
    }
    const auto bad = [&]() { return InvalidInput("unknown parameter path '" + p + "'"); };
    if (parts.size() == 3 && parts[0] == "zeta") {
        const std::size_t i = parse_index(parts[1], p);
        const std::size_t j = parse_index(parts[2], p);
        if (i >= config.zeta.size() || j >= config.zeta[i].size()) {
            throw bad();
        }
        config.zeta[i][j] = value;
        return;
    }
    if (parts.size() < 3 || parts[0] != "species") {
        throw bad();
    }
    const std::size_t i = parse_index(parts[1], p);
    if (i >= config.n()) {
        throw bad();
    }
    auto& sp = config.species[i];
    if (parts.size() == 3) {
        if (parts[2] == "mu_A") {
            sp.mu_A = value;
        } else if (parts[2] == "mu_J") {
            sp.mu_J = value;
        } else if (parts[2] == "beta") {
            sp.beta = value;
        } else if (parts[2] == "tau0") {
            sp.tau0 = value;
        } else {
            throw bad();
        }
        return;
    }
    if (parts.size() != 4) {
        throw bad();
    }
    if (parts[2] == "f") {
        if (parts[3] == "kappa") {
            sp.f.kappa = value;
        } else if (parts[3] == "theta") {
            sp.f.theta = value;
        } else if (parts[3] == "p") {
            sp.f.p = value;
        } else if (parts[3] == "rate") {
            sp.f.rate = value;
        } else {
            throw bad();
        }
        return;
    }
    if (parts[2] == "history") {
        if (parts[3] == "value") {
            sp.history.value = value;
        } else if (parts[3] == "slope") {
            sp.history.slope = value;
        } else if (parts[3] == "amplitude") {
            sp.history.amplitude = value;
        } else if (parts[3] == "omega") {
            sp.history.omega = value;
        } else if (parts[3] == "phase") {
            sp.history.phase = value;
        } else {
            throw bad();
        }
        return;
    }
    throw bad();
}

}  // namespace forest::io
