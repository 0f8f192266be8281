#include <cmath>
#include <sstream>

#include "doctest.h"
#include "metascreen/config.hpp"

using namespace metascreen;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in, "test.cfg");
}

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.problems;
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("empty config gives the benchmark defaults") {
    const RunConfig c = parse("# nothing\n\n");
    CHECK(c.shape.kind == CurveKind::Disk);
    CHECK(c.shape.radius == doctest::Approx(0.2));
    CHECK(c.background.mu == doctest::Approx(1e-3));
    CHECK(c.inclusion.mu == doctest::Approx(1e6));
    CHECK(c.alpha_rule == AlphaRuleKind::Delta4);
    CHECK(c.alpha_at(0.5) == doctest::Approx(0.5 * 0.5 / std::sqrt(1e-3)));
    CHECK(c.entries.size() == default_config_entries().size());
    CHECK(c.hash_hex().size() == 16);
}

TEST_CASE("values, comments and whitespace") {
    const RunConfig c = parse("omega = 0.25   # trailing comment\n  disc.n=32\nalpha.rule = FIXED\nalpha = 1.5\n"
                              "validate.criteria = 3, 1,2\n");
    CHECK(c.omega == 0.25);
    CHECK(c.n == 32);
    CHECK(c.alpha_rule == AlphaRuleKind::Fixed);
    CHECK(c.alpha_at(7.0) == 1.5);
    CHECK(c.criteria == std::vector<int>{3, 1, 2});
}

TEST_CASE("hash depends on values only, not on formatting or order") {
    const RunConfig a = parse("omega = 0.25\ndisc.n = 32\n");
    const RunConfig b = parse("# same run\ndisc.n =   32\nomega=2.5e-1\n");
    const RunConfig c = parse("omega = 0.26\ndisc.n = 32\n");
    const RunConfig d = parse("");
    const RunConfig e = parse("disc.n = 64\n");  // the default, spelled out
    CHECK(a.hash == b.hash);
    CHECK(a.hash != c.hash);
    CHECK(d.hash == e.hash);
    CHECK(a.entries == b.entries);
}

TEST_CASE("grids") {
    const RunConfig c = parse("omega.min = 0.1\nomega.max = 0.2\nomega.count = 3\n"
                              "grid.x1_min = -1\ngrid.x1_max = 1\ngrid.x1_count = 3\n"
                              "grid.x2_min = 0.5\ngrid.x2_max = 1\ngrid.x2_count = 2\n");
    const auto w = c.omega_grid();
    REQUIRE(w.size() == 3);
    CHECK(w[1] == doctest::Approx(0.15));
    const auto t = c.target_grid();
    REQUIRE(t.size() == 6);
    CHECK(t[1].x() == doctest::Approx(0.0));  // x1 runs fastest
    CHECK(t[1].y() == doctest::Approx(0.5));
    CHECK(t[3].y() == doctest::Approx(1.0));
}

TEST_CASE("syntax problems are all reported with their lines") {
    const auto p = problems_of("omega = 0.3\nbogus.key = 1\nno equals sign\nomega = 0.4\ndisc.n =\n");
    CHECK(p.size() == 4);
    CHECK(mentions(p, "test.cfg:2: unknown key 'bogus.key'"));
    CHECK(mentions(p, "test.cfg:3: expected 'key = value'"));
    CHECK(mentions(p, "test.cfg:4: 'omega' repeated (first set on line 1)"));
    CHECK(mentions(p, "test.cfg:5: empty value for 'disc.n'"));
}

TEST_CASE("unparseable values") {
    const auto p = problems_of("omega = fast\ndisc.n = 6.5\nbg.mu = nan\n");
    CHECK(p.size() == 3);
    CHECK(mentions(p, "omega = 'fast' is not a finite number"));
    CHECK(mentions(p, "disc.n = '6.5' is not an integer"));
    CHECK(mentions(p, "bg.mu = 'nan'"));
}

TEST_CASE("theta must be a unit upward direction") {
    const auto p = problems_of("theta.x = 0.6\ntheta.y = 0.9\n");
    REQUIRE(p.size() == 1);
    CHECK(mentions(p, "not unit norm"));
    CHECK_NOTHROW(parse("theta.x = 0.6\ntheta.y = 0.8\n"));
    CHECK(mentions(problems_of("theta.x = 0\ntheta.y = -1\n"), "theta.y must be positive"));
}

TEST_CASE("semantic violations are collected in one error") {
    const std::string text = "theta.x = 1\ntheta.y = 1\ndisc.n = 15\ninc.mu = -1\ndelta4 = 2\n"
                             "shape.center_y = 0.1\nvalidate.criteria = 1, 11, 1\n";
    const auto p = problems_of(text);
    CHECK(mentions(p, "not unit norm"));
    CHECK(mentions(p, "disc.n = 15 must be even"));
    CHECK(mentions(p, "inc: "));
    CHECK(mentions(p, "delta4 = 2"));
    CHECK(mentions(p, "shape: "));
    CHECK(mentions(p, "no criterion 11"));
    CHECK(mentions(p, "1 listed twice"));
    CHECK(p.size() >= 7);

    try {
        parse(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("invalid config (" + std::to_string(p.size()) + " problems)") == 0);
    }
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/metascreen.cfg"), ConfigError);
}
