#include "metascreen/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace metascreen {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string canon(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class Kind { Real, Int, Word, IntList };

struct Key {
    const char* name;
    Kind kind;
    const char* fallback;
};

// clang-format off
const Key kKeys[] = {
    {"shape.kind", Kind::Word, "disk"},
    {"shape.center_x", Kind::Real, "0"},
    {"shape.center_y", Kind::Real, "0.5"},
    {"shape.radius", Kind::Real, "0.2"},
    {"shape.radius2", Kind::Real, "0.1"},
    {"shape.star_eps", Kind::Real, "0"},
    {"shape.star_k", Kind::Int, "5"},
    {"bg.lam", Kind::Real, "1"},
    {"bg.mu", Kind::Real, "1e-3"},
    {"bg.rho", Kind::Real, "1"},
    {"inc.lam", Kind::Real, "1"},
    {"inc.mu", Kind::Real, "1e6"},
    {"inc.rho", Kind::Real, "1"},
    {"omega", Kind::Real, "0.4"},
    {"omega.min", Kind::Real, "0.44"},
    {"omega.max", Kind::Real, "0.49"},
    {"omega.count", Kind::Int, "21"},
    {"alpha.rule", Kind::Word, "delta4"},
    {"alpha", Kind::Real, "0"},
    {"delta4", Kind::Real, "0.5"},
    {"delta5", Kind::Real, "0.5"},
    {"theta.x", Kind::Real, "0"},
    {"theta.y", Kind::Real, "1"},
    {"disc.n", Kind::Int, "64"},
    {"disc.n_r", Kind::Int, "4"},
    {"disc.n_t", Kind::Int, "16"},
    {"disc.l_max", Kind::Int, "20000"},
    {"disc.tol", Kind::Real, "1e-11"},
    {"grid.x1_min", Kind::Real, "-0.45"},
    {"grid.x1_max", Kind::Real, "0.45"},
    {"grid.x1_count", Kind::Int, "10"},
    {"grid.x2_min", Kind::Real, "0.05"},
    {"grid.x2_max", Kind::Real, "1.5"},
    {"grid.x2_count", Kind::Int, "30"},
    {"grid.near", Kind::Word, "adaptive"},
    {"source.x", Kind::Real, "0"},
    {"source.y", Kind::Real, "0.5"},
    {"resonance.threshold", Kind::Real, "1e-3"},
    {"resonance.sign", Kind::Word, "corrected"},
    {"absence.alpha_static", Kind::Real, "0.3"},
    {"validate.criteria", Kind::IntList, "1,2,3,4,5,6,7,8,9,10"},
    {"validate.seed", Kind::Int, "20240607"},
};
// clang-format on

bool parse_real(const std::string& s, double& v) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && p == end && std::isfinite(v);
}

bool parse_int(const std::string& s, long long& v) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && p == end;
}

struct Value {
    std::string text;
    int line = 0;  // 0 for a default
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems_)
    : std::runtime_error("invalid config (" + std::to_string(problems_.size()) + " problem" +
                         (problems_.size() == 1 ? "" : "s") + "):\n  - " + join(problems_, "\n  - ")),
      problems(std::move(problems_)) {}

std::vector<std::pair<std::string, std::string>> default_config_entries() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Key& k : kKeys) out.emplace_back(k.name, k.fallback);
    std::sort(out.begin(), out.end());
    return out;
}

RunConfig parse_config(std::istream& in, const std::string& name) {
    std::vector<std::string> errs;
    std::map<std::string, const Key*> known;
    for (const Key& k : kKeys) known[k.name] = &k;

    std::map<std::string, Value> given;
    std::string raw;
    for (int line = 1; std::getline(in, raw); ++line) {
        const std::string s = trim(raw.substr(0, raw.find('#')));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        const std::string where = name + ":" + std::to_string(line) + ": ";
        if (eq == std::string::npos) {
            errs.push_back(where + "expected 'key = value', got '" + s + "'");
            continue;
        }
        const std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
        if (!known.count(key)) {
            errs.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (val.empty()) {
            errs.push_back(where + "empty value for '" + key + "'");
            continue;
        }
        auto [it, fresh] = given.emplace(key, Value{val, line});
        if (!fresh) errs.push_back(where + "'" + key + "' repeated (first set on line " +
                                   std::to_string(it->second.line) + ")");
    }

    // typed values with canonical text
    std::map<std::string, double> real;
    std::map<std::string, long long> integer;
    std::map<std::string, std::string> word;
    std::vector<int> list;
    RunConfig c;
    for (const Key& k : kKeys) {
        const auto it = given.find(k.name);
        const Value v = it == given.end() ? Value{k.fallback, 0} : it->second;
        const std::string where = v.line ? name + ":" + std::to_string(v.line) + ": " : "";
        std::string canonical = v.text;
        switch (k.kind) {
            case Kind::Real: {
                double d = 0.0;
                if (!parse_real(v.text, d)) errs.push_back(where + k.name + " = '" + v.text + "' is not a finite number");
                real[k.name] = d;
                canonical = canon(d);
                break;
            }
            case Kind::Int: {
                long long i = 0;
                if (!parse_int(v.text, i) || i < -(1LL << 31) || i > (1LL << 31))
                    errs.push_back(where + k.name + " = '" + v.text + "' is not an integer");
                integer[k.name] = i;
                canonical = std::to_string(i);
                break;
            }
            case Kind::Word: {
                std::string w = v.text;
                std::transform(w.begin(), w.end(), w.begin(), [](unsigned char ch) { return std::tolower(ch); });
                word[k.name] = w;
                canonical = w;
                break;
            }
            case Kind::IntList: {
                std::stringstream ss(v.text);
                std::string item;
                std::vector<std::string> parts;
                while (std::getline(ss, item, ',')) {
                    long long i = 0;
                    if (!parse_int(trim(item), i)) {
                        errs.push_back(where + k.name + ": '" + trim(item) + "' is not an integer");
                        continue;
                    }
                    list.push_back(static_cast<int>(i));
                    parts.push_back(std::to_string(i));
                }
                canonical = join(parts, ",");
                break;
            }
        }
        c.entries.emplace_back(k.name, canonical);
    }
    std::sort(c.entries.begin(), c.entries.end());
    if (!errs.empty()) throw ConfigError(errs);

    // shape
    try {
        c.shape.kind = parse_curve_kind(word["shape.kind"]);
    } catch (const std::invalid_argument& e) {
        errs.push_back(e.what());
    }
    c.shape.center = Vec2(real["shape.center_x"], real["shape.center_y"]);
    c.shape.radius = real["shape.radius"];
    c.shape.radius2 = real["shape.radius2"];
    c.shape.star_eps = real["shape.star_eps"];
    c.shape.star_k = static_cast<int>(integer["shape.star_k"]);
    if (errs.empty()) {
        try {
            make_curve(c.shape);
        } catch (const std::invalid_argument& e) {
            errs.push_back(std::string("shape: ") + e.what());
        }
    }

    // materials
    c.background = Material(real["bg.lam"], real["bg.mu"], real["bg.rho"]);
    c.inclusion = Material(real["inc.lam"], real["inc.mu"], real["inc.rho"]);
    try {
        c.background.validate();
    } catch (const std::invalid_argument& e) {
        errs.push_back(std::string("bg: ") + e.what());
    }
    try {
        c.inclusion.validate();
    } catch (const std::invalid_argument& e) {
        errs.push_back(std::string("inc: ") + e.what());
    }

    // frequencies
    c.omega = real["omega"];
    c.omega_min = real["omega.min"];
    c.omega_max = real["omega.max"];
    c.omega_count = static_cast<int>(integer["omega.count"]);
    if (!(c.omega >= 0.0)) errs.push_back("omega must be non-negative");
    if (!(c.omega_min > 0.0)) errs.push_back("omega.min must be positive");
    if (!(c.omega_max >= c.omega_min)) errs.push_back("omega.max must not be below omega.min");
    if (c.omega_count < 1) errs.push_back("omega.count must be at least 1");
    if (c.omega_count > 1 && !(c.omega_max > c.omega_min))
        errs.push_back("omega.max must exceed omega.min when omega.count > 1");

    // quasi-momentum
    const std::string rule = word["alpha.rule"];
    c.alpha = real["alpha"];
    c.delta4 = real["delta4"];
    c.delta5 = real["delta5"];
    if (rule == "fixed") {
        c.alpha_rule = AlphaRuleKind::Fixed;
    } else if (rule == "delta4") {
        c.alpha_rule = AlphaRuleKind::Delta4;
        if (!(c.delta4 > 0.0 && c.delta4 < c.background.rho))
            errs.push_back("delta4 = " + canon(c.delta4) + " must lie strictly between 0 and bg.rho = " +
                           canon(c.background.rho));
    } else if (rule == "delta5") {
        c.alpha_rule = AlphaRuleKind::Delta5;
        if (!(c.delta5 >= 0.0 && c.delta5 <= 1.0)) errs.push_back("delta5 = " + canon(c.delta5) + " must lie in [0, 1]");
    } else {
        errs.push_back("alpha.rule = '" + rule + "' (expected fixed, delta4 or delta5)");
    }

    // incidence
    c.theta = Vec2(real["theta.x"], real["theta.y"]);
    if (std::abs(c.theta.norm() - 1.0) > 1e-12)
        errs.push_back("theta = (" + canon(c.theta.x()) + ", " + canon(c.theta.y()) + ") is not unit norm (|theta| = " +
                       canon(c.theta.norm()) + ")");
    if (!(c.theta.y() > 0.0)) errs.push_back("theta.y must be positive (the incident wave travels upward)");

    // discretization
    c.n = static_cast<int>(integer["disc.n"]);
    c.n_r = static_cast<int>(integer["disc.n_r"]);
    c.n_t = static_cast<int>(integer["disc.n_t"]);
    c.policy.l_max = static_cast<int>(integer["disc.l_max"]);
    c.policy.tol = real["disc.tol"];
    if (c.n < 16 || c.n % 2 != 0) errs.push_back("disc.n = " + std::to_string(c.n) + " must be even and at least 16");
    if (c.n_r < 1) errs.push_back("disc.n_r must be at least 1");
    if (c.n_t < 3) errs.push_back("disc.n_t must be at least 3");
    if (c.policy.l_max < 1) errs.push_back("disc.l_max must be positive");
    if (!(c.policy.tol > 0.0 && c.policy.tol < 1.0)) errs.push_back("disc.tol must lie in (0, 1)");

    // target grid
    c.x1_min = real["grid.x1_min"];
    c.x1_max = real["grid.x1_max"];
    c.x2_min = real["grid.x2_min"];
    c.x2_max = real["grid.x2_max"];
    c.x1_count = static_cast<int>(integer["grid.x1_count"]);
    c.x2_count = static_cast<int>(integer["grid.x2_count"]);
    if (c.x1_count < 1 || c.x2_count < 1) errs.push_back("grid.x1_count and grid.x2_count must be at least 1");
    if (!(c.x1_max >= c.x1_min)) errs.push_back("grid.x1_max must not be below grid.x1_min");
    if (!(c.x2_max >= c.x2_min)) errs.push_back("grid.x2_max must not be below grid.x2_min");
    if (!(c.x2_min > 0.0)) errs.push_back("grid.x2_min must be positive (targets lie in the upper half-plane)");
    const std::string near = word["grid.near"];
    if (near == "adaptive")
        c.near = NearPolicy::Adaptive;
    else if (near == "reject")
        c.near = NearPolicy::Reject;
    else
        errs.push_back("grid.near = '" + near + "' (expected adaptive or reject)");
    c.source = Vec2(real["source.x"], real["source.y"]);
    if (!(c.source.y() > 0.0)) errs.push_back("source.y must be positive");

    // resonance, absence, validate
    c.dip_threshold = real["resonance.threshold"];
    if (!(c.dip_threshold > 0.0 && c.dip_threshold < 1.0)) errs.push_back("resonance.threshold must lie in (0, 1)");
    const std::string sign = word["resonance.sign"];
    if (sign == "corrected")
        c.sign = FrequencySign::Corrected;
    else if (sign == "printed")
        c.sign = FrequencySign::Printed;
    else
        errs.push_back("resonance.sign = '" + sign + "' (expected corrected or printed)");
    c.alpha_static = real["absence.alpha_static"];
    if (std::abs(std::sin(0.5 * c.alpha_static)) < 1e-12)
        errs.push_back("absence.alpha_static must not be a multiple of 2 pi");
    c.criteria = list;
    if (c.criteria.empty()) errs.push_back("validate.criteria is empty");
    for (size_t i = 0; i < c.criteria.size(); ++i) {
        const int id = c.criteria[i];
        if (id < 1 || id > 10) errs.push_back("validate.criteria: no criterion " + std::to_string(id) + " (1 to 10)");
        if (std::find(c.criteria.begin(), c.criteria.begin() + i, id) != c.criteria.begin() + i)
            errs.push_back("validate.criteria: " + std::to_string(id) + " listed twice");
    }
    c.seed = static_cast<unsigned>(integer["validate.seed"]);
    if (integer["validate.seed"] < 0) errs.push_back("validate.seed must be non-negative");

    if (!errs.empty()) throw ConfigError(errs);

    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& [k, v] : c.entries) {
        for (unsigned char ch : k + " = " + v + "\n") {
            h ^= ch;
            h *= 1099511628211ULL;
        }
    }
    c.hash = h;
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError({"cannot read config file '" + path + "'"});
    return parse_config(f, path);
}

std::string RunConfig::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

double RunConfig::alpha_at(double w) const {
    switch (alpha_rule) {
        case AlphaRuleKind::Fixed: return alpha;
        case AlphaRuleKind::Delta4: return delta4 * w / std::sqrt(background.mu);
        case AlphaRuleKind::Delta5: return delta5 * wavenumbers(background, w).k_s;
    }
    return alpha;
}

AlphaRule RunConfig::alpha_fn() const {
    const RunConfig copy = *this;
    return [copy](double w) { return copy.alpha_at(w); };
}

std::vector<double> RunConfig::omega_grid() const {
    std::vector<double> g;
    for (int k = 0; k < omega_count; ++k)
        g.push_back(omega_count == 1 ? omega_min : omega_min + (omega_max - omega_min) * k / (omega_count - 1));
    return g;
}

std::vector<Vec2> RunConfig::target_grid() const {
    std::vector<Vec2> g;
    for (int j = 0; j < x2_count; ++j) {
        const double x2 = x2_count == 1 ? x2_min : x2_min + (x2_max - x2_min) * j / (x2_count - 1);
        for (int i = 0; i < x1_count; ++i)
            g.emplace_back(x1_count == 1 ? x1_min : x1_min + (x1_max - x1_min) * i / (x1_count - 1), x2);
    }
    return g;
}

}  // namespace metascreen
