#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "metascreen/resonance.hpp"

using namespace metascreen;

namespace {
constexpr double kPi = std::numbers::pi;

const BoundaryCurve& disk() {
    static const BoundaryCurve c = make_curve(CurveParams{});
    return c;
}

BoundaryCurve ellipse() {
    CurveParams p;
    p.kind = CurveKind::Ellipse;
    p.radius = 0.22;
    p.radius2 = 0.12;
    p.center = Vec2(0.05, 0.45);
    return make_curve(p);
}

const Material kStiff(1.0, 1e6, 1.0);

double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

// largest distance from an element of a to its nearest element of b
double set_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0.0;
    for (cplx x : a) {
        double best = INFINITY;
        for (cplx y : b) best = std::min(best, std::abs(x - y));
        d = std::max(d, best / std::abs(x));
    }
    return d;
}
}  // namespace

TEST_CASE("rigid basis: orthonormal and printed normalizations") {
    const BoundaryCurve c = ellipse();
    const NodeSet ns = quadrature_nodes(c, 64);
    const RigidBasis rb = rigid_basis(ns);
    CHECK(max_abs(gram(rb.f, rb.f, ns) - CMatrix::Identity(3, 3)) < 1e-10);

    // C0 against adaptive quadrature of the parametrization
    const double c0 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double t) { return c.point(t).squaredNorm() * c.tangent(t).norm(); }, 0.0, 2.0 * kPi, 15, 1e-14);
    CHECK(std::abs(rb.c0 - c0) < 1e-12 * c0);

    const RigidBasis pr = rigid_basis(ns, RigidNormalization::Printed);
    CHECK(pr.f(0, 0).real() == doctest::Approx(1.0 / c.arc_length()).epsilon(1e-12));
    CHECK(pr.at(2, Vec2(0.3, 0.7)).isApprox(Vec2(-0.7, 0.3) / c0, 1e-12));
    CHECK(gram(pr.f, pr.f, ns)(0, 0).real() == doctest::Approx(1.0 / c.arc_length()).epsilon(1e-12));

    // rigid motions are divergence free: no net normal flux
    for (int i = 0; i < 3; ++i) {
        double flux = 0.0;
        for (int j = 0; j < ns.n; ++j) flux += ns.weight[j] * rb.at(i, ns.x[j]).dot(ns.normal[j]);
        CHECK(std::abs(flux) < 1e-13);
    }
}

TEST_CASE("psi basis: kernel of 1/2 - K~*") {
    const RigidBasis r32 = rigid_basis(quadrature_nodes(disk(), 32));
    const NodeSet n32 = quadrature_nodes(disk(), 32), n64 = quadrature_nodes(disk(), 64);
    const WBasis w32 = psi_basis(n32, r32, kStiff, 0.5);
    const RigidBasis r64 = rigid_basis(n64);
    const WBasis w64 = psi_basis(n64, r64, kStiff, 0.5);
    CHECK(w64.eigen_residual.maxCoeff() < 1e-8);
    CHECK(w64.eigen_residual.maxCoeff() <= w32.eigen_residual.maxCoeff() * 1.01);
    CHECK(max_abs(gram(r64.f, w64.psi, n64) - CMatrix::Identity(3, 3)) < 1e-6);
    CHECK(max_abs(gram(w64.psi_tilde, r64.f, n64)) < 1e-12);
    CHECK(w64.restricted_condition < 1e3);

    // K~* depends on lam~/mu~ only
    const WBasis scaled = psi_basis(n64, r64, Material(10.0, 1e7, 1.0), 0.5);
    CHECK(max_abs(scaled.psi - w64.psi) < 1e-9 * max_abs(w64.psi));

    // a singular restriction is refused
    CHECK_THROWS_AS(psi_basis(n64, r64, assemble_kstar(n64, kStiff, 0.0, 0.5), 1.0), IllConditionedError);

    const BoundaryCurve e = ellipse();
    const NodeSet ne = quadrature_nodes(e, 64);
    const WBasis we = psi_basis(ne, rigid_basis(ne), kStiff, 1.3);
    CHECK(we.eigen_residual.maxCoeff() < 1e-6);
}

TEST_CASE("leading single layer: consistent form is the large mu~ limit") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const AsymptoticParams ap = make_asymptotic_params(0.5, kStiff);
    const CMatrix s1 = leading_single_layer(ns, 0.7, LeadingForm::Consistent, ap);
    const double mut = 1e9;
    const CMatrix s = mut * assemble_single_layer(ns, Material(1.0, mut, 1.0), 0.0, 0.7).m;
    CHECK((s1 - s).norm() < 1e-8 * s1.norm());
    // the printed kernel is a different (bounded) operator
    const CMatrix sp = leading_single_layer(ns, 0.7, LeadingForm::Printed, ap);
    CHECK(sp.allFinite());
    CHECK((sp - s1).norm() > 1e-3 * s1.norm());
}

TEST_CASE("S matrix: rigid image, invertibility, residual flag") {
    const NodeSet ns = quadrature_nodes(disk(), 64);
    const RigidBasis rb = rigid_basis(ns);
    const AsymptoticParams ap = make_asymptotic_params(0.5, kStiff);
    const CMatrix s1 = leading_single_layer(ns, 0.5, LeadingForm::Consistent, ap);
    const SMatrixReport r = s_matrix(ns, psi_basis(ns, rb, kStiff, 0.5), rb, s1);
    CHECK(r.condition < 1e6);
    CHECK(r.relative_residual < 1e-5);
    CHECK(!r.flagged);

    // psi of a soft inclusion is not mapped to rigid motions by the leading kernel
    const SMatrixReport soft = s_matrix(ns, psi_basis(ns, rb, Material(1.0, 1.0, 1.0), 0.5), rb, s1);
    CHECK(soft.flagged);

    CHECK_THROWS_AS(s_matrix(ns, psi_basis(ns, rb, kStiff, 0.5), rigid_basis(ns, RigidNormalization::Printed), s1),
                    std::invalid_argument);
}

TEST_CASE("M matrix: equals S times the volume Gram matrix and converges") {
    const double alpha = 0.6;
    const NodeSet n32 = quadrature_nodes(disk(), 32), n64 = quadrature_nodes(disk(), 64);
    const AreaRule area = interior_quadrature(disk(), 12, 48);
    const RigidBasis r32 = rigid_basis(n32), r64 = rigid_basis(n64);
    const WBasis w32 = psi_basis(n32, r32, kStiff, alpha), w64 = psi_basis(n64, r64, kStiff, alpha);
    const Mat3c m32 = m_matrix(n32, area, w32, r32, alpha), m64 = m_matrix(n64, area, w64, r64, alpha);
    CHECK((m32 - m64).norm() < 1e-6 * m64.norm());

    // S~_{+,1}[psi^(i)] is the rigid motion sum_j s_ij f^(j) in D
    const AsymptoticParams ap = make_asymptotic_params(0.5, kStiff);
    const SMatrixReport s = s_matrix(n64, w64, r64, leading_single_layer(n64, alpha, LeadingForm::Consistent, ap));
    const Mat3c sg = s.s * volume_gram(area, r64).cast<cplx>();
    CHECK((m64 - sg).norm() < 1e-5 * m64.norm());

    // weak dependence on mu~ through psi
    const Mat3c m7 = m_matrix(n64, area, psi_basis(n64, r64, Material(1.0, 1e7, 1.0), alpha), r64, alpha);
    CHECK((m7 - m64).norm() < 1e-5 * m64.norm());

    // negative definite part dominates: the static kernels carry the source sign
    CHECK(m64.trace().real() < 0.0);
}

TEST_CASE("resonant frequencies: formula, sign conventions and admissibility") {
    Mat3c m = Mat3c::Zero();
    m.diagonal() << -0.01, -0.04, -0.0025;
    const FrequencyPrediction p = resonant_frequencies(m, 1e-3, 2.0);
    REQUIRE(p.omega.size() == 3);
    CHECK(p.omega[0] == doctest::Approx(std::sqrt(1e-3 / (2.0 * 0.04))));
    CHECK(p.omega[2] == doctest::Approx(std::sqrt(1e-3 / (2.0 * 0.0025))));
    CHECK(p.diagnostics.empty());

    // scaling laws
    const FrequencyPrediction q = resonant_frequencies(m, 4e-3, 0.5);
    for (int i = 0; i < 3; ++i) CHECK(q.omega[i] == doctest::Approx(4.0 * p.omega[i]));

    const FrequencyPrediction printed = resonant_frequencies(m, 1e-3, 2.0, FrequencySign::Printed);
    CHECK(printed.omega.empty());
    CHECK(!printed.diagnostics.empty());
    CHECK(resonant_frequencies(-m, 1e-3, 2.0, FrequencySign::Printed).omega.size() == 3);

    Mat3c c = m;
    c(0, 1) = 0.02;
    c(1, 0) = -0.02;  // complex pair
    const FrequencyPrediction pc = resonant_frequencies(c, 1e-3, 2.0);
    CHECK(pc.omega.size() == 1);
    CHECK_THROWS_AS(resonant_frequencies(m, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("stiffness frequencies coincide with M when the background is the leading material") {
    const double alpha = 0.6, mu = 1e-3;
    const NodeSet ns = quadrature_nodes(disk(), 48);
    const AreaRule area = interior_quadrature(disk(), 12, 48);
    const RigidBasis rb = rigid_basis(ns);
    const Mat3c m = m_matrix(ns, area, psi_basis(ns, rb, Material(1.0, 1e9, 1.0), alpha), rb, alpha);
    Eigen::ComplexEigenSolver<Mat3c> es(m);
    std::vector<cplx> from_m;
    for (int i = 0; i < 3; ++i) from_m.push_back(std::sqrt(-mu / (1.5 * es.eigenvalues()(i))));
    const auto st = stiffness_frequencies(ns, area, rb, Material(0.0, mu, 1.0), 1.5, alpha);
    CHECK(set_distance(from_m, st) < 1e-6);
    CHECK(set_distance(st, from_m) < 1e-6);
}

TEST_CASE("normalization constants and tau") {
    const double alpha = 0.6, mu = 1e-3;
    const Material bg(1.0, mu, 1.0);
    const NodeSet ns = quadrature_nodes(disk(), 48);
    const AreaRule area = interior_quadrature(disk(), 12, 48);
    const RigidBasis rb = rigid_basis(ns);
    const WBasis w = psi_basis(ns, rb, kStiff, alpha);
    const Mat3c m = m_matrix(ns, area, w, rb, alpha);
    const StaticPieces sp = static_pieces(ns, kStiff, bg, alpha);
    const NormalizationConstants nc = normalization_constants(ns, rb, sp.s_bg);
    const int n2 = 2 * ns.n;
    for (int i = 0; i < 3; ++i) {
        const CMatrix col = nc.psi_star.col(i);
        const double nrm = (gram(col.topRows(n2), col.topRows(n2), ns) + gram(col.bottomRows(n2), col.bottomRows(n2), ns))(0, 0).real();
        CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(nc.c_star(i) > 0.0);
    }
    CHECK(nc.orthonormality_error >= 0.0);

    IncidentSpec spec;
    spec.omega = 0.05;
    spec.background = bg;
    spec.theta = Vec2(std::sin(0.3), std::cos(0.3));
    const TauReport t = tau_coefficients(ns, sp, rb, w, nc, m, spec, kStiff);
    CHECK(t.tau.allFinite());
    CHECK(!t.blowup);
    CHECK(t.tau.norm() > 0.0);

    // grazing incidence removes the forcing
    IncidentSpec g = spec;
    g.theta = Vec2(std::sqrt(1.0 - 1e-8), 1e-4);
    const TauReport tg = tau_coefficients(ns, sp, rb, w, nc, m, g, kStiff);
    CHECK(tg.tau.norm() < 1e-3 * t.tau.norm());

    // at a predicted frequency the pencil is singular
    const FrequencyPrediction fp = resonant_frequencies(m, mu, kStiff.rho);
    REQUIRE(!fp.omega.empty());
    IncidentSpec r = spec;
    r.omega = fp.omega.front();
    const TauReport tr = tau_coefficients(ns, sp, rb, w, nc, m, r, kStiff);
    CHECK(tr.blowup);
    CHECK(tr.distance_to_resonance < 1e-12);
}

TEST_CASE("dip detection") {
    ScanReport r;
    for (int i = 0; i < 11; ++i) {
        const double w = 0.1 * i;
        r.omega.push_back(w);
        // log sigma is a parabola with vertex at 0.43
        r.sigma_min.push_back(std::exp(40.0 * (w - 0.43) * (w - 0.43) - 9.0));
    }
    r.sigma_min[8] = std::numeric_limits<double>::quiet_NaN();
    find_dips(r, 0.1);
    REQUIRE(r.minima.size() == 1);
    CHECK(r.minima[0].omega == doctest::Approx(0.43).epsilon(1e-12));
    CHECK(r.minima[0].sigma == doctest::Approx(std::exp(-9.0)).epsilon(1e-12));
    CHECK(r.dips.size() == 1);
    find_dips(r, 1e-3);
    CHECK(r.minima.size() == 1);
    CHECK(r.dips.empty());

    ScanReport flat;
    flat.omega = {0.1};
    flat.sigma_min = {0.5};
    find_dips(flat, 1e-3);
    CHECK(flat.minima.empty());
    CHECK(flat.median == 0.5);
}

TEST_CASE("sigma_min scan: identical materials give no dip") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const Material m(1.0, 1.0, 1.0);
    const ScanReport r = sigma_min_scan({0.1, 0.2, 0.3, 0.4, 0.5}, ns, m, m, [](double w) { return 0.3 * w; });
    CHECK(r.notes.empty());
    for (double s : r.sigma_min) CHECK(s > 1e-6);
    CHECK(r.dips.empty());
    CHECK(r.alpha[2] == doctest::Approx(0.09));
}

TEST_CASE("absence check preconditions") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const Material inc(1.0, 1.0, 1.0), bg(1.0, 1e6, 1.0);
    auto rule = [](double w) { return 0.5 * w * 1e-3; };
    CHECK_THROWS_AS(absence_check({0.1}, ns, inc, bg, rule, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(absence_check({0.1}, ns, inc, Material(1.0, 10.0, 1.0), rule, 0.3), std::invalid_argument);

    const DenseOperator k = assemble_kstar(ns, bg, 0.0, 0.3);
    CHECK(smallest_singular_value(0.5 * CMatrix::Identity(2 * ns.n, 2 * ns.n) + k.m) > 0.01);
}
