#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "metascreen/geometry.hpp"

using namespace metascreen;

namespace {
constexpr double kPi = std::numbers::pi;

CurveParams ellipse() {
    CurveParams p;
    p.kind = CurveKind::Ellipse;
    p.radius = 0.2;
    p.radius2 = 0.1;
    return p;
}

CurveParams star() {
    CurveParams p;
    p.kind = CurveKind::Star;
    p.radius = 0.2;
    p.star_eps = 0.2;
    p.star_k = 5;
    return p;
}

template <class F>
double adaptive(F f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 2.0 * kPi, 15, 1e-14);
}
}  // namespace

TEST_CASE("make_curve validation") {
    const BoundaryCurve disk = make_curve(CurveParams{});
    CHECK(disk.arc_length() == doctest::Approx(2.0 * kPi * 0.2).epsilon(1e-14));

    CurveParams low;
    low.center = Vec2(0.0, 0.1);
    CHECK_THROWS_AS(make_curve(low), std::invalid_argument);

    CurveParams wide;
    wide.radius = 0.5;
    wide.center = Vec2(0.0, 1.0);
    CHECK_THROWS_AS(make_curve(wide), std::invalid_argument);

    CurveParams neg;
    neg.radius = -0.1;
    CHECK_THROWS_AS(make_curve(neg), std::invalid_argument);

    CHECK_THROWS_AS(parse_curve_kind("square"), std::invalid_argument);
    CHECK(parse_curve_kind("ellipse") == CurveKind::Ellipse);
}

TEST_CASE("ellipse arc length against adaptive quadrature") {
    const BoundaryCurve c = make_curve(ellipse());
    const double ref = adaptive([&](double t) { return c.tangent(t).norm(); });
    CHECK(std::abs(c.arc_length() - ref) < 1e-10);
}

TEST_CASE("derivatives match finite differences") {
    for (const CurveParams& p : {CurveParams{}, ellipse(), star()}) {
        const BoundaryCurve c = make_curve(p);
        const double h = 1e-5;
        for (double t : {0.1, 1.3, 2.9, 4.4}) {
            const Vec2 fd1 = (c.point(t + h) - c.point(t - h)) / (2 * h);
            const Vec2 fd2 = (c.tangent(t + h) - c.tangent(t - h)) / (2 * h);
            CHECK((fd1 - c.tangent(t)).norm() < 1e-8);
            CHECK((fd2 - c.second_derivative(t)).norm() < 1e-7);
        }
    }
}

TEST_CASE("quadrature nodes") {
    const BoundaryCurve disk = make_curve(CurveParams{});
    const NodeSet ns = quadrature_nodes(disk, 64);
    CHECK(std::abs(ns.total_weight() - 0.4 * kPi) < 1e-12);
    for (int j = 0; j < ns.n; ++j) {
        CHECK((ns.normal[j] - (ns.x[j] - disk.center()) / 0.2).norm() < 1e-12);
        CHECK(std::abs(ns.tangent[j].dot(ns.normal[j])) < 1e-14);
    }
    CHECK(ns.curve != nullptr);
    CHECK_THROWS_AS(quadrature_nodes(disk, 8), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_nodes(disk, 33), std::invalid_argument);

    for (const CurveParams& p : {ellipse(), star()}) {
        const BoundaryCurve c = make_curve(p);
        const NodeSet a = quadrature_nodes(c, 128), b = quadrature_nodes(c, 256);
        CHECK(std::abs(a.total_weight() - b.total_weight()) < 1e-10);
        for (int j = 0; j < a.n; ++j) {
            CHECK((a.x[j] - c.center()).dot(a.normal[j]) > 0.0);
            CHECK(std::abs(a.normal[j].norm() - 1.0) < 1e-14);
            CHECK(std::abs(a.x[j].x()) < 0.5);
            CHECK(a.x[j].y() > 0.0);
        }
    }
}

TEST_CASE("boundary quadrature converges spectrally") {
    const BoundaryCurve c = make_curve(star());
    auto integral = [&](int n) {
        const NodeSet ns = quadrature_nodes(c, n);
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += ns.weight[j] * std::exp(ns.x[j].x()) * ns.x[j].y();
        return s;
    };
    const double ref = adaptive([&](double t) {
        const Vec2 x = c.point(t);
        return c.tangent(t).norm() * std::exp(x.x()) * x.y();
    });
    // the error is not monotone in n for this five-fold star, so compare over two doublings:
    // an eighth-order rule would gain 2^16
    const double e32 = std::abs(integral(32) - ref), e128 = std::abs(integral(128) - ref);
    CHECK(e128 < e32 / 65536.0);
    CHECK(e128 < 1e-12);
}

TEST_CASE("interior quadrature") {
    const BoundaryCurve disk = make_curve(CurveParams{});
    const AreaRule a = interior_quadrature(disk, 16, 32);
    CHECK(std::abs(a.total_weight() - kPi * 0.04) < 1e-10);
    double m2 = 0.0;
    for (size_t i = 0; i < a.x.size(); ++i) m2 += a.weight[i] * a.x[i].y();
    CHECK(std::abs(m2 - 0.5 * kPi * 0.04) < 1e-10);

    const AreaRule e = interior_quadrature(make_curve(ellipse()), 16, 64);
    CHECK(std::abs(e.total_weight() - kPi * 0.02) < 1e-10);

    const BoundaryCurve st = make_curve(star());
    const AreaRule s1 = interior_quadrature(st, 12, 64), s2 = interior_quadrature(st, 24, 128);
    CHECK(std::abs(s1.total_weight() - st.area()) < 1e-10);
    CHECK(std::abs(s2.total_weight() - st.area()) < 1e-12);
    for (const Vec2& x : s1.x) CHECK(st.contains(x));
}
