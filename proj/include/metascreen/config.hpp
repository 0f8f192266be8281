#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metascreen/geometry.hpp"
#include "metascreen/greens.hpp"
#include "metascreen/potentials.hpp"
#include "metascreen/resonance.hpp"

namespace metascreen {

// Every violation found in a config, reported together.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> problems_);
    std::vector<std::string> problems;
};

enum class AlphaRuleKind {
    Fixed,   // alpha
    Delta4,  // alpha = delta4 omega / sqrt(mu), the large-contrast scaling
    Delta5   // alpha = delta5 k_s, the stiff-background regime
};

struct RunConfig {
    CurveParams shape;
    Material background{1.0, 1e-3, 1.0};
    Material inclusion{1.0, 1e6, 1.0};

    double omega = 0.4;                  // single frequency: greens-eval, solve
    double omega_min = 0.44, omega_max = 0.49;
    int omega_count = 21;                // scans: resonance, absence

    AlphaRuleKind alpha_rule = AlphaRuleKind::Delta4;
    double alpha = 0.0, delta4 = 0.5, delta5 = 0.5;

    Vec2 theta{0.0, 1.0};
    int n = 64, n_r = 4, n_t = 16;
    TruncationPolicy policy;

    // target grid of greens-eval and solve
    double x1_min = -0.5, x1_max = 0.5, x2_min = 0.05, x2_max = 1.5;
    int x1_count = 11, x2_count = 30;
    NearPolicy near = NearPolicy::Adaptive;
    Vec2 source{0.0, 0.5};  // greens-eval source point

    double dip_threshold = 1e-3;
    FrequencySign sign = FrequencySign::Corrected;
    double alpha_static = 0.3;  // absence: alpha of the 1/2 I + K* check
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    unsigned seed = 20240607;

    // Every key with its canonical value, sorted; defaults included.
    std::vector<std::pair<std::string, std::string>> entries;
    std::uint64_t hash = 0;  // FNV-1a of the canonical entries

    std::string hash_hex() const;
    double alpha_at(double w) const;
    AlphaRule alpha_fn() const;
    std::vector<double> omega_grid() const;  // omega_count points from omega_min to omega_max
    std::vector<Vec2> target_grid() const;   // x1 fastest
};

// Flat "key = value" text with '#' comments. Throws ConfigError listing every problem: syntax, unknown or
// repeated keys, unparseable values, and the preconditions of the modules.
RunConfig parse_config(std::istream& in, const std::string& name = "config");
RunConfig load_config(const std::string& path);

// Keys accepted by parse_config with their defaults, in canonical form.
std::vector<std::pair<std::string, std::string>> default_config_entries();

}  // namespace metascreen
