#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "metascreen/scattering.hpp"

using namespace metascreen;

namespace {

const BoundaryCurve& disk() {
    static const BoundaryCurve c = make_curve(CurveParams{});
    return c;
}

IncidentSpec spec_at(double omega, double angle, const Material& bg) {
    IncidentSpec s;
    s.theta = Vec2(std::sin(angle), std::cos(angle));
    s.omega = omega;
    s.background = bg;
    return s;
}

// moderate contrast, away from any characteristic value
const Material kInc(1.0, 2.0, 1.5), kBg(1.0, 1.0, 1.0);
constexpr double kOmega = 1.0, kAlpha = 0.3;

struct Solved {
    NodeSet nodes;
    BlockSystem sys;
    IncidentSpec spec;
    DensityPair dens;
};

Solved solve(int n, double angle = 0.4, double alpha = kAlpha) {
    Solved s{quadrature_nodes(disk(), n), {}, spec_at(kOmega, angle, kBg), {}};
    s.sys = assemble_system(s.nodes, kInc, kBg, kOmega, alpha);
    s.dens = solve_scattering(s.sys, incident_data(s.nodes, s.spec));
    return s;
}

}  // namespace

TEST_CASE("incident spec validation") {
    IncidentSpec s = spec_at(0.5, 0.2, kBg);
    CHECK_NOTHROW(s.validate());
    s.theta = Vec2(0.6, 0.6);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.theta = Vec2(0.6, -0.8);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = spec_at(-0.1, 0.2, kBg);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("incident wave: gradient and conormal match finite differences") {
    const Material bg(1.7, 0.6, 1.3);
    const IncidentSpec s = spec_at(2.3, 0.5, bg);
    const double h = 1e-5;
    for (const Vec2& x : {Vec2(0.1, 0.4), Vec2(-0.3, 0.9), Vec2(0.45, 0.05)}) {
        Mat2c fd;
        fd.col(0) = (incident_p_wave(x + Vec2(h, 0), s) - incident_p_wave(x - Vec2(h, 0), s)) / (2 * h);
        fd.col(1) = (incident_p_wave(x + Vec2(0, h), s) - incident_p_wave(x - Vec2(0, h), s)) / (2 * h);
        const Mat2c g = incident_p_gradient(x, s);
        CHECK((g - fd).norm() < 1e-7 * g.norm());

        const Vec2 nu = Vec2(0.6, -0.8);
        const Vec2c tr = bg.lam * fd.trace() * nu.cast<cplx>() + bg.mu * (fd + fd.transpose()) * nu.cast<cplx>();
        const Vec2c c = incident_p_conormal(x, nu, s);
        CHECK((c - tr).norm() < 1e-7 * c.norm());
    }
    // the wave vanishes on the wall
    CHECK(incident_p_wave(Vec2(0.3, 0.0), s).norm() < 1e-15);
}

TEST_CASE("incident wave: small frequency expansion is second order") {
    const Material bg(0.8, 1.0, 1.0);
    const Vec2 x(0.1, 0.55), nu = Vec2(1.0, 1.0).normalized();
    double ew[2], ec[2], ep[2];
    const double om[2] = {1e-2, 5e-3};
    for (int k = 0; k < 2; ++k) {
        const IncidentSpec s = spec_at(om[k], 0.35, bg);
        ew[k] = (incident_p_wave(x, s) - incident_p_wave_leading(x, s)).norm();
        ec[k] = (incident_p_conormal(x, nu, s) - incident_p_conormal_leading(nu, s)).norm();
        ep[k] = (incident_p_conormal(x, nu, s) - incident_p_conormal_leading(nu, s, ExpansionForm::Printed)).norm();
    }
    CHECK(std::log2(ew[0] / ew[1]) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::log2(ec[0] / ec[1]) == doctest::Approx(2.0).epsilon(0.05));
    // the printed lam terms miss i theta2^2: first order only
    CHECK(std::log2(ep[0] / ep[1]) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("incident data vanish with grazing incidence") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const double n1 = incident_data(ns, spec_at(0.5, std::acos(1e-3), kBg)).norm();
    const double n2 = incident_data(ns, spec_at(0.5, std::acos(1e-4), kBg)).norm();
    CHECK(n1 / n2 == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("block system assembly") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    const BlockSystem sys = assemble_system(ns, kInc, kBg, kOmega, kAlpha);
    const CMatrix a = assemble_block_matrix(ns, kInc, kBg, kOmega, kAlpha);
    CHECK((sys.a - a).norm() == 0.0);
    const int m = 2 * ns.n;
    CHECK((sys.a.topLeftCorner(m, m) - sys.s_in.m).norm() == 0.0);
    CHECK((sys.a.topRightCorner(m, m) + sys.s_bg.m).norm() == 0.0);
    CHECK((sys.a.bottomRightCorner(m, m) + 0.5 * CMatrix::Identity(m, m) + sys.k_bg.m).norm() < 1e-14);
    CHECK(sys.off_resonance());
    CHECK(sys.static_condition > 1.0);
    CHECK(sys.norm2 == doctest::Approx(largest_singular_value(a)).epsilon(1e-12));

    SystemOptions opt;
    opt.static_warn = 1.0;
    CHECK(!assemble_system(ns, kInc, kBg, kOmega, kAlpha, opt).warnings.empty());
    opt.static_fail = 1.0;
    CHECK_THROWS_AS(assemble_system(ns, kInc, kBg, kOmega, kAlpha, opt), AssumptionViolation);
}

TEST_CASE("solve: zero data, linearity, residual") {
    const Solved s = solve(48);
    CHECK(s.dens.backward_error < 1e-12);
    CHECK(s.dens.residual < 1e-10);
    const int m = 2 * s.nodes.n;
    const DensityPair z = solve_scattering(s.sys, Eigen::VectorXcd::Zero(2 * m));
    CHECK(z.phi.norm() == 0.0);
    CHECK(z.psi.norm() == 0.0);

    const Eigen::VectorXcd f1 = incident_data(s.nodes, s.spec);
    const Eigen::VectorXcd f2 = incident_data(s.nodes, spec_at(kOmega, -0.7, kBg));
    const cplx c(0.3, -1.1);
    const DensityPair d1 = solve_scattering(s.sys, f1), d2 = solve_scattering(s.sys, f2);
    const DensityPair d12 = solve_scattering(s.sys, f1 + c * f2);
    CHECK((d12.psi - d1.psi - c * d2.psi).norm() < 1e-10 * d12.psi.norm());
    CHECK_THROWS_AS(solve_scattering(s.sys, Eigen::VectorXcd::Zero(5)), std::invalid_argument);
}

TEST_CASE("solve: a singular system is reported with its sigma_min") {
    const NodeSet ns = quadrature_nodes(disk(), 32);
    BlockSystem sys = assemble_system(ns, kInc, kBg, kOmega, kAlpha);
    // duplicate a column: exactly rank deficient
    sys.a.col(1) = sys.a.col(0);
    sys.col_scale = sys.a.colwise().norm().cwiseInverse().transpose();
    sys.lu.compute(sys.a * sys.col_scale.cast<cplx>().asDiagonal());
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(4 * ns.n);
    f(1) = 1.0;
    try {
        solve_scattering(sys, f);
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        CHECK(e.sigma_min < 1e-10 * sys.norm2);
    }
}

TEST_CASE("total field: transmission across the boundary") {
    const Solved s = solve(64);
    std::vector<Vec2> in, out;
    const double eps = 1e-4;
    for (int j = 0; j < s.nodes.n; j += 8) {
        in.push_back(s.nodes.x[j] - eps * s.nodes.normal[j]);
        out.push_back(s.nodes.x[j] + eps * s.nodes.normal[j]);
    }
    const auto ji = total_field_jet(in, s.dens, s.nodes, s.spec, kInc, kAlpha, NearPolicy::Adaptive);
    const auto jo = total_field_jet(out, s.dens, s.nodes, s.spec, kInc, kAlpha, NearPolicy::Adaptive);
    double du = 0, dt = 0, su = 0, st = 0;
    for (size_t k = 0; k < in.size(); ++k) {
        const Vec2& nu = s.nodes.normal[8 * k];
        const Vec2c ti = field_traction(ji[k], nu, kInc), to = field_traction(jo[k], nu, kBg);
        du = std::max(du, (ji[k].u - jo[k].u).norm());
        dt = std::max(dt, (ti - to).norm());
        su = std::max(su, jo[k].u.norm());
        st = std::max(st, to.norm());
    }
    CHECK(du < 1e-3 * su);
    CHECK(dt < 1e-3 * st);
}

TEST_CASE("total field: refinement and quasi-periodicity") {
    const std::vector<Vec2> pts{{0.3, 1.1}, {-0.4, 0.2}, {0.05, 0.45}};
    const Solved a = solve(32), b = solve(64);
    const auto ua = total_field(pts, a.dens, a.nodes, a.spec, kInc, kAlpha, NearPolicy::Adaptive);
    const auto ub = total_field(pts, b.dens, b.nodes, b.spec, kInc, kAlpha, NearPolicy::Adaptive);
    for (size_t k = 0; k < pts.size(); ++k) CHECK((ua[k] - ub[k]).norm() < 1e-8 * ub[k].norm());

    // the scattered part is alpha-quasi-periodic
    const Vec2 x(0.2, 0.9), xs = x + Vec2(1.0, 0.0);
    const auto u = total_field({x, xs}, b.dens, b.nodes, b.spec, kInc, kAlpha);
    const Vec2c sc0 = u[0] - incident_p_wave(x, b.spec), sc1 = u[1] - incident_p_wave(xs, b.spec);
    CHECK((sc1 - std::polar(1.0, kAlpha) * sc0).norm() < 1e-12 * sc0.norm());

    CHECK(inside_inclusion(Vec2(0.05, 0.5), b.nodes));
    CHECK(inside_inclusion(Vec2(3.05, 0.5), b.nodes));
    CHECK(!inside_inclusion(Vec2(0.5, 0.5), b.nodes));
}

TEST_CASE("total field: mirror symmetry of the symmetric disk") {
    // reflecting x1 maps the problem with (theta1, alpha) to (-theta1, -alpha)
    const Solved a = solve(64, 0.4, kAlpha), b = solve(64, -0.4, -kAlpha);
    const Eigen::Matrix2d r = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
    for (const Vec2& x : {Vec2(0.3, 1.2), Vec2(0.1, 0.5), Vec2(-0.35, 0.15)}) {
        const Vec2 xm(-x.x(), x.y());
        const Vec2c ua = total_field({x}, a.dens, a.nodes, a.spec, kInc, kAlpha, NearPolicy::Adaptive)[0];
        const Vec2c ub = total_field({xm}, b.dens, b.nodes, b.spec, kInc, -kAlpha, NearPolicy::Adaptive)[0];
        CHECK((ua - r * ub).norm() < 1e-9 * ua.norm());
    }
}

TEST_CASE("far field: zero mode dominates high above the screen") {
    const Solved s = solve(64);
    for (double h : {2.0, 3.0}) {
        const Vec2 x(0.17, h);
        const Vec2c full = total_field({x}, s.dens, s.nodes, s.spec, kInc, kAlpha)[0] - incident_p_wave(x, s.spec);
        const Vec2c ff = far_field(s.dens.psi, s.nodes, x, kBg, kOmega, kAlpha);
        // the first evanescent mode decays like exp(-sqrt((2 pi - alpha)^2 - k_s^2) (x2 - y2))
        const double decay = std::exp(-std::sqrt(std::pow(2 * std::numbers::pi - kAlpha, 2) - 1.0) * (h - 0.7));
        CHECK((full - ff).norm() < 10.0 * decay * full.norm());
    }
}

TEST_CASE("field csv format") {
    std::ostringstream os;
    write_field_csv(os, {Vec2(0.5, 1.0)}, {Vec2c(cplx(1.0, -2.0), cplx(0.25, 0.0))}, {"config a1b2", "n 64"});
    std::istringstream is(os.str());
    std::string l1, l2, l3, l4;
    std::getline(is, l1);
    std::getline(is, l2);
    std::getline(is, l3);
    std::getline(is, l4);
    CHECK(l1 == "# config a1b2");
    CHECK(l2 == "# n 64");
    CHECK(l3 == "x1,x2,re_u1,im_u1,re_u2,im_u2");
    CHECK(l4 ==
          "5.0000000000000000e-01,1.0000000000000000e+00,1.0000000000000000e+00,-2.0000000000000000e+00,"
          "2.5000000000000000e-01,0.0000000000000000e+00");
    CHECK_THROWS_AS(write_field_csv(os, {Vec2(0, 1)}, {}), std::invalid_argument);
}
