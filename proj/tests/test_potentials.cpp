#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "metascreen/potentials.hpp"
#include "test_util.hpp"

using namespace metascreen;

namespace {
constexpr double kPi = std::numbers::pi;

const BoundaryCurve& disk() {
    static const BoundaryCurve c = make_curve(CurveParams{});
    return c;
}

BoundaryCurve star_curve() {
    CurveParams p;
    p.kind = CurveKind::Star;
    p.radius = 0.2;
    p.star_eps = 0.15;
    p.star_k = 3;
    return make_curve(p);
}

Vec2c smooth_field(const Vec2& x) {
    return Vec2c(std::cos(3.0 * x.x()) + 0.3, cplx(x.y() * x.x(), 0.5 * std::sin(2.0 * x.y())));
}

BoundaryDensity smooth_density(const NodeSet& ns) { return sample_density(ns, smooth_field); }

double max_rel(const std::vector<Vec2c>& a, const std::vector<Vec2c>& b) {
    double e = 0.0, s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        e = std::max(e, (a[i] - b[i]).norm());
        s = std::max(s, b[i].norm());
    }
    return e / s;
}
}  // namespace

TEST_CASE("layer potential: zero density and linearity") {
    const NodeSet ns = quadrature_nodes(disk(), 64);
    const GreenFunction g(Material(1, 1, 1), 0.4, 0.2);
    const std::vector<Vec2> tg{{0.0, 1.2}, {0.3, 0.05}, {0.0, 0.5}};
    const BoundaryDensity zero = BoundaryDensity::Zero(2 * ns.n);
    for (const Vec2c& u : eval_layer_potential(zero, ns, tg, g)) CHECK(u.norm() == 0.0);

    const BoundaryDensity a = smooth_density(ns);
    BoundaryDensity b(2 * ns.n);
    for (int j = 0; j < ns.n; ++j) b.segment<2>(2 * j) = Vec2c(ns.x[j].y(), cplx(0, 1) * ns.x[j].x());
    const cplx ca(0.7, -0.2), cb(-1.3, 0.4);
    const auto ua = eval_layer_potential(a, ns, tg, g), ub = eval_layer_potential(b, ns, tg, g);
    const auto uab = eval_layer_potential(BoundaryDensity(ca * a + cb * b), ns, tg, g);
    for (size_t i = 0; i < tg.size(); ++i) CHECK((uab[i] - ca * ua[i] - cb * ub[i]).norm() < 1e-13 * uab[i].norm());

    CHECK_THROWS_AS(eval_layer_potential(BoundaryDensity::Zero(6), ns, tg, g), std::invalid_argument);
}

TEST_CASE("layer potential: close targets are rejected without the near flag") {
    const NodeSet ns = quadrature_nodes(disk(), 64);
    const GreenFunction g(Material(1, 1, 1), 0.4, 0.2);
    const BoundaryDensity a = smooth_density(ns);
    const std::vector<Vec2> close{{0.0, 0.72}};
    CHECK_THROWS_AS(eval_layer_potential(a, ns, close, g), NearTargetError);
    CHECK_NOTHROW(eval_layer_potential(a, ns, close, g, NearPolicy::Adaptive));
    CHECK(distance_to_boundary(Vec2(0.0, 0.72), ns) == doctest::Approx(0.02).epsilon(1e-12));
    // the copy one period to the right is close too
    CHECK(distance_to_boundary(Vec2(1.0, 0.72), ns) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("layer potential: plain rule against a four times finer rule") {
    const Material m(1.0, 1.0, 1.0);
    const GreenFunction g(m, 0.6, 0.3);
    const NodeSet ns = quadrature_nodes(disk(), 128), fine = quadrature_nodes(disk(), 512);
    // distance 0.1 from the circle, inside and outside
    const std::vector<Vec2> tg{{0.0, 0.8}, {0.3, 0.5}, {0.0, 0.6}, {-0.1, 0.5}};
    const auto u = eval_layer_potential(smooth_density(ns), ns, tg, g);
    const auto uf = eval_layer_potential(smooth_density(fine), fine, tg, g);
    CHECK(max_rel(u, uf) < 1e-8);
}

TEST_CASE("layer potential: plain and near evaluation converge under refinement") {
    const GreenFunction g(Material(2.0, 1.0, 1.5), 0.8, -0.4);
    const NodeSet ns = quadrature_nodes(star_curve(), 128);
    const BoundaryDensity a = smooth_density(ns);
    std::vector<Vec2> tg;
    for (int j = 0; j < ns.n; j += 16) tg.push_back(ns.x[j] + 0.15 * ns.normal[j]);
    const auto plain = eval_layer_potential(a, ns, tg, g);
    std::vector<Vec2> closer;
    for (int j = 0; j < ns.n; j += 16) closer.push_back(ns.x[j] + 0.002 * ns.normal[j]);
    const auto near = eval_layer_potential(a, ns, closer, g, NearPolicy::Adaptive);
    const NodeSet fine = quadrature_nodes(star_curve(), 256);
    const auto near_fine = eval_layer_potential(smooth_density(fine), fine, closer, g, NearPolicy::Adaptive);
    CHECK(max_rel(near, near_fine) < 1e-9);
    const auto plain_fine = eval_layer_potential(smooth_density(fine), fine, tg, g);
    CHECK(max_rel(plain, plain_fine) < 1e-9);
}

TEST_CASE("single layer: continuity across the boundary") {
    const GreenFunction g(Material(1.0, 1.0, 1.0), 0.5, 0.3);
    const NodeSet ns = quadrature_nodes(disk(), 128);
    const BoundaryDensity a = smooth_density(ns);
    std::vector<Vec2> out, in;
    for (int j = 0; j < ns.n; j += 8) {
        out.push_back(ns.x[j] + 1e-7 * ns.normal[j]);
        in.push_back(ns.x[j] - 1e-7 * ns.normal[j]);
    }
    const auto uo = eval_layer_potential(a, ns, out, g, NearPolicy::Adaptive);
    const auto ui = eval_layer_potential(a, ns, in, g, NearPolicy::Adaptive);
    CHECK(max_rel(uo, ui) < 1e-6);
    // the Nystrom single layer is the common trace
    const BoundaryDensity sa = assemble_single_layer(ns, g).apply(a);
    std::vector<Vec2c> trace;
    for (int j = 0; j < ns.n; j += 8) trace.push_back(density_at(sa, j));
    CHECK(max_rel(uo, trace) < 1e-6);
}

TEST_CASE("single layer: static operator scales like 1/mu") {
    const NodeSet ns = quadrature_nodes(disk(), 64);
    const DenseOperator s1 = assemble_single_layer(ns, Material(1.0, 1.0, 1.0), 0.0, 0.3);
    // homogeneous scaling of (lam, mu): exact
    const DenseOperator s10 = assemble_single_layer(ns, Material(10.0, 10.0, 1.0), 0.0, 0.3);
    CHECK((s10.m * 10.0 - s1.m).norm() < 1e-12 * s1.m.norm());
    // mu alone at large mu with lam fixed: asymptotically
    const DenseOperator a = assemble_single_layer(ns, Material(1.0, 1e3, 1.0), 0.0, 0.3);
    const DenseOperator b = assemble_single_layer(ns, Material(1.0, 1e4, 1.0), 0.0, 0.3);
    CHECK((b.m * 10.0 - a.m).norm() < 2e-3 * a.m.norm());
    CHECK(s1.n == 64);
    CHECK(s1.m.rows() == 128);
    CHECK(s1.m.allFinite());
}

TEST_CASE("single layer and K* from one pass equal the separate assemblies") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const GreenFunction g(Material(1.0, 2.0, 1.0), 0.7, -0.2);
    DenseOperator s, k;
    assemble_single_layer_and_kstar(ns, g, s, k);
    CHECK((s.m - assemble_single_layer(ns, g).m).norm() == 0.0);
    CHECK((k.m - assemble_kstar(ns, g).m).norm() == 0.0);
    CHECK(k.kind == OperatorKind::KStar);
}

TEST_CASE("Nystrom operators converge spectrally") {
    const GreenFunction g(Material(1.5, 1.0, 1.0), 0.9, 0.4);
    const BoundaryCurve c = star_curve();
    double es = 0, ek = 0;
    for (int n : {64, 128}) {
        const NodeSet ns = quadrature_nodes(c, n), ref = quadrature_nodes(c, 2 * n);
        DenseOperator s, k, sr, kr;
        assemble_single_layer_and_kstar(ns, g, s, k);
        assemble_single_layer_and_kstar(ref, g, sr, kr);
        const BoundaryDensity a = s.apply(smooth_density(ns)), ar = sr.apply(smooth_density(ref));
        const BoundaryDensity b = k.apply(smooth_density(ns)), br = kr.apply(smooth_density(ref));
        double da = 0, db = 0;
        for (int j = 0; j < n; ++j) {
            da = std::max(da, (density_at(a, j) - density_at(ar, 2 * j)).norm());
            db = std::max(db, (density_at(b, j) - density_at(br, 2 * j)).norm());
        }
        da /= ar.cwiseAbs().maxCoeff();
        db /= br.cwiseAbs().maxCoeff();
        MESSAGE("n=" << n << " single layer " << da << " K* " << db);
        if (n == 128) {
            CHECK(da < 1e-10);
            CHECK(db < 1e-9);
            CHECK(da < es);
            CHECK(db < ek);
        }
        es = da;
        ek = db;
    }
}

TEST_CASE("K*: jump relations") {
    const Material m(1.0, 1.0, 1.0);
    const NodeSet ns = quadrature_nodes(disk(), 128);
    const BoundaryDensity psi = smooth_density(ns);
    const JumpReport r = jump_check(psi, ns, m, 0.5, 0.3, 1e-4, {}, 8);
    MESSAGE("raw " << r.err_plus << " " << r.err_minus << " extrapolated " << r.err_plus_extrap << " "
                   << r.err_minus_extrap << " second order " << r.err_plus_extrap2 << " " << r.err_minus_extrap2);
    CHECK(r.err_plus_extrap < 1e-4);
    CHECK(r.err_minus_extrap < 1e-4);
    CHECK(r.err_plus_extrap2 < 1e-6);
    CHECK(r.err_minus_extrap2 < 1e-6);
    // outside minus inside is the density, up to the O(eps) offset
    CHECK(r.err_difference < 20.0 * r.eps);

    // halving eps halves the raw error and quarters the extrapolated one
    const JumpReport h = jump_check(psi, ns, m, 0.5, 0.3, 5e-5, {}, 8);
    CHECK(h.err_plus / r.err_plus == doctest::Approx(0.5).epsilon(0.05));
    CHECK(h.err_minus / r.err_minus == doctest::Approx(0.5).epsilon(0.05));
    CHECK(h.err_plus_extrap / r.err_plus_extrap == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("K*: jump relations on a star at rest") {
    const NodeSet ns = quadrature_nodes(star_curve(), 128);
    const JumpReport r = jump_check(smooth_density(ns), ns, Material(2.0, 0.5, 1.0), 0.0, -0.7, 1e-4, {}, 8);
    CHECK(r.err_plus_extrap < 1e-4);
    CHECK(r.err_minus_extrap < 1e-4);
}

TEST_CASE("K*: static spectrum lies in [-1/2, 1/2]") {
    const NodeSet ns = quadrature_nodes(disk(), 128);
    for (double alpha : {0.0, 0.3}) {
        const DenseOperator k = assemble_kstar(ns, Material(1.0, 1.0, 1.0), 0.0, alpha);
        const Eigen::VectorXcd ev = Eigen::ComplexEigenSolver<CMatrix>(k.m, false).eigenvalues();
        double lo = 1e9, hi = -1e9, im = 0;
        for (const cplx& e : ev) {
            lo = std::min(lo, e.real());
            hi = std::max(hi, e.real());
            im = std::max(im, std::abs(e.imag()));
        }
        MESSAGE("alpha " << alpha << ": real parts in [" << lo << ", " << hi << "], max |imag| " << im);
        CHECK(lo > -0.5 - 1e-6);
        CHECK(hi < 0.5 + 1e-6);
    }
}

TEST_CASE("interior single layer solves the Lame equation") {
    const Material inc(1.0, 3.0, 2.0);
    const double omega = 0.7;
    const GreenFunction g(inc, omega, 0.25);
    const NodeSet ns = quadrature_nodes(disk(), 128);
    const BoundaryDensity phi = smooth_density(ns);
    for (const Vec2& x0 : {Vec2(0.0, 0.5), Vec2(0.05, 0.45), Vec2(-0.04, 0.55)}) {
        auto U = [&](const Vec2& x) {
            Mat2c r = Mat2c::Zero();
            r.col(0) = eval_layer_potential(phi, ns, {x}, g)[0];
            return r;
        };
        double scale = 0;
        const Mat2c res = testutil::lame_residual(U, x0, inc, omega, 1e-3, scale);
        CHECK(res.col(0).norm() < 1e-4 * scale);
    }
}

TEST_CASE("Green's identity: interior energy is positive") {
    // for u = S[phi] in D at omega = 0, int_dD traction(u)|_- . conj(u) = int_D elastic energy >= 0
    std::mt19937 rng(11);
    std::normal_distribution<double> N(0.0, 1.0);
    const NodeSet ns = quadrature_nodes(star_curve(), 64);
    for (double alpha : {0.0, 0.4}) {
        const GreenFunction g(Material(1.0, 2.0, 1.0), 0.0, alpha);
        DenseOperator s, k;
        assemble_single_layer_and_kstar(ns, g, s, k);
        for (int trial = 0; trial < 5; ++trial) {
            BoundaryDensity phi = BoundaryDensity::Zero(2 * ns.n);
            for (int mode = 0; mode < 4; ++mode) {
                const cplx a(N(rng), N(rng)), b(N(rng), N(rng));
                for (int j = 0; j < ns.n; ++j) {
                    const cplx e = std::polar(1.0, mode * ns.t[j]);
                    phi(2 * j) += a * e;
                    phi(2 * j + 1) += b * std::conj(e);
                }
            }
            const BoundaryDensity tr = k.apply(phi) - 0.5 * phi, u = s.apply(phi);
            const cplx e = inner(tr, u, ns);
            CHECK(e.real() > 0.0);
            CHECK(std::abs(e.imag()) < 1e-8 * std::abs(e.real()));
        }
    }
}
