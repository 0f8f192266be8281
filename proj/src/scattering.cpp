#include "metascreen/scattering.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace metascreen {

namespace {
const cplx kI(0.0, 1.0);

double kp_scale(const Material& m) { return std::sqrt(m.rho / m.p_modulus()); }
}  // namespace

void IncidentSpec::validate() const {
    std::string msg;
    if (!(std::abs(theta.norm() - 1.0) < 1e-12)) msg += "incident direction must have unit norm; ";
    if (!(theta.y() > 0.0)) msg += "incident direction must have theta2 > 0; ";
    if (!(omega >= 0.0)) msg += "frequency must be non-negative; ";
    if (!msg.empty()) throw std::invalid_argument(msg.substr(0, msg.size() - 2));
    background.validate();
}

Vec2 IncidentSpec::k_p() const { return omega * kp_scale(background) * theta; }

Vec2c incident_p_wave(const Vec2& x, const IncidentSpec& spec) {
    const Vec2 k = spec.k_p();
    const cplx s = 2.0 * kI * spec.amplitude * std::exp(kI * (k.x() * x.x())) * std::sin(k.y() * x.y());
    return s * spec.theta.cast<cplx>();
}

Mat2c incident_p_gradient(const Vec2& x, const IncidentSpec& spec) {
    const Vec2 k = spec.k_p();
    const cplx e = spec.amplitude * std::exp(kI * (k.x() * x.x()));
    const double sn = std::sin(k.y() * x.y()), cs = std::cos(k.y() * x.y());
    const cplx d1 = -2.0 * k.x() * e * sn;      // derivative of the scalar profile in x1
    const cplx d2 = 2.0 * kI * k.y() * e * cs;  // and in x2
    Mat2c g;
    g.col(0) = d1 * spec.theta.cast<cplx>();
    g.col(1) = d2 * spec.theta.cast<cplx>();
    return g;
}

Vec2c incident_p_conormal(const Vec2& x, const Vec2& nu, const IncidentSpec& spec) {
    const Mat2c g = incident_p_gradient(x, spec);
    const Material& m = spec.background;
    const cplx div = g(0, 0) + g(1, 1);
    const Vec2c n = nu.cast<cplx>();
    return m.lam * div * n + m.mu * (g + g.transpose()) * n;
}

Vec2c incident_p_wave_leading(const Vec2& x, const IncidentSpec& spec) {
    const double k = spec.omega * kp_scale(spec.background);
    return (2.0 * kI * spec.amplitude * k * spec.theta.y() * x.y()) * spec.theta.cast<cplx>();
}

Vec2c incident_p_conormal_leading(const Vec2& nu, const IncidentSpec& spec, ExpansionForm form) {
    const double k = spec.omega * kp_scale(spec.background);
    const double lam = spec.background.lam, mu = spec.background.mu;
    const double t1 = spec.theta.x(), t2 = spec.theta.y();
    const cplx lam_factor = form == ExpansionForm::Printed ? cplx(1.0) : kI * t2 * t2;
    Vec2c r;
    r(0) = 2.0 * lam * k * lam_factor * nu.x() + 2.0 * kI * mu * k * t1 * t2 * nu.y();
    r(1) = 2.0 * lam * k * lam_factor * nu.y() + 2.0 * kI * mu * k * t1 * t2 * nu.x() +
           4.0 * kI * mu * k * t2 * t2 * nu.y();
    return spec.amplitude * r;
}

double smallest_singular_value(const CMatrix& a) {
    Eigen::BDCSVD<CMatrix> svd(a);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

double largest_singular_value(const CMatrix& a) {
    Eigen::BDCSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

namespace {
CMatrix block_matrix(const DenseOperator& s_in, const DenseOperator& k_in, const DenseOperator& s_bg,
                     const DenseOperator& k_bg) {
    const int m = static_cast<int>(s_in.m.rows());
    const CMatrix id = CMatrix::Identity(m, m);
    CMatrix a(2 * m, 2 * m);
    a.topLeftCorner(m, m) = s_in.m;
    a.topRightCorner(m, m) = -s_bg.m;
    a.bottomLeftCorner(m, m) = -0.5 * id + k_in.m;
    a.bottomRightCorner(m, m) = -(0.5 * id + k_bg.m);
    return a;
}
}  // namespace

CMatrix assemble_block_matrix(const NodeSet& nodes, const Material& inclusion, const Material& background,
                              double omega, double alpha, const TruncationPolicy& policy) {
    DenseOperator s_in, k_in, s_bg, k_bg;
    assemble_single_layer_and_kstar(nodes, GreenFunction(inclusion, omega, alpha, policy), s_in, k_in);
    assemble_single_layer_and_kstar(nodes, GreenFunction(background, omega, alpha, policy), s_bg, k_bg);
    return block_matrix(s_in, k_in, s_bg, k_bg);
}

double BlockSystem::sigma_min() const { return smallest_singular_value(a); }

bool BlockSystem::off_resonance() const { return sigma_min() > 1e-6 * norm2; }

BlockSystem assemble_system(const NodeSet& nodes, const Material& inclusion, const Material& background,
                            double omega, double alpha, const SystemOptions& opt) {
    inclusion.validate();
    background.validate();
    BlockSystem sys;
    sys.n = nodes.n;
    sys.inclusion = inclusion;
    sys.background = background;
    sys.omega = omega;
    sys.alpha = alpha;
    assemble_single_layer_and_kstar(nodes, GreenFunction(inclusion, omega, alpha, opt.policy), sys.s_in, sys.k_in);
    assemble_single_layer_and_kstar(nodes, GreenFunction(background, omega, alpha, opt.policy), sys.s_bg,
                                    sys.k_bg);
    sys.a = block_matrix(sys.s_in, sys.k_in, sys.s_bg, sys.k_bg);
    sys.norm2 = largest_singular_value(sys.a);

    if (opt.check_static) {
        const DenseOperator s0 =
            omega == 0.0 ? sys.s_bg : assemble_single_layer(nodes, background, 0.0, alpha, opt.policy);
        Eigen::BDCSVD<CMatrix> svd(s0.m);
        const auto& sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        sys.static_condition = smin > 0.0 ? sv(0) / smin : INFINITY;
        if (sys.static_condition > opt.static_fail)
            throw AssumptionViolation("static single layer S^{alpha,0} is numerically singular (condition " +
                                      std::to_string(sys.static_condition) + "); choose another shape");
        if (sys.static_condition > opt.static_warn)
            sys.warnings.push_back("static single layer condition " + std::to_string(sys.static_condition) +
                                   " exceeds " + std::to_string(opt.static_warn));
    }
    sys.col_scale = sys.a.colwise().norm().cwiseInverse().transpose();
    sys.lu.compute(sys.a * sys.col_scale.cast<cplx>().asDiagonal());
    return sys;
}

Eigen::VectorXcd incident_data(const NodeSet& nodes, const IncidentSpec& spec) {
    spec.validate();
    const int m = 2 * nodes.n;
    Eigen::VectorXcd f(2 * m);
    for (int j = 0; j < nodes.n; ++j) {
        f.segment<2>(2 * j) = incident_p_wave(nodes.x[j], spec);
        f.segment<2>(m + 2 * j) = incident_p_conormal(nodes.x[j], nodes.normal[j], spec);
    }
    return f;
}

DensityPair solve_scattering(const BlockSystem& sys, const Eigen::VectorXcd& f, double tol) {
    const int m = 2 * sys.n;
    if (f.size() != 2 * m) throw std::invalid_argument("solve_scattering: right-hand side has the wrong length");
    DensityPair d;
    const double fn = f.norm();
    if (fn == 0.0) {
        d.phi = BoundaryDensity::Zero(m);
        d.psi = BoundaryDensity::Zero(m);
        return d;
    }
    const Eigen::VectorXcd sc = sys.col_scale.cast<cplx>();
    Eigen::VectorXcd x = sc.cwiseProduct(sys.lu.solve(f));
    // iterative refinement: the rigid-motion directions leave the scaled matrix with condition near 1e10
    d.residual = (sys.a * x - f).norm() / fn;
    for (int it = 0; it < 3; ++it) {
        const Eigen::VectorXcd y = x + sc.cwiseProduct(sys.lu.solve(f - sys.a * x));
        const double r = (sys.a * y - f).norm() / fn;
        if (!(r < d.residual)) break;
        x = y;
        d.residual = r;
    }
    d.backward_error = (sys.a * x - f).norm() / (sys.norm2 * x.norm() + fn);
    const double rcond = sys.lu.rcond();
    if (!x.allFinite() || !(d.backward_error < tol) || !(rcond > 1e-13)) {
        const double smin = sys.sigma_min();
        char buf[160];
        std::snprintf(buf, sizeof buf, "block system is numerically singular: backward error %.3e, rcond %.3e, sigma_min %.3e, ||A|| %.3e",
                      d.backward_error, rcond, smin, sys.norm2);
        throw SingularSystemError(buf, smin);
    }
    d.phi = x.head(m);
    d.psi = x.tail(m);
    return d;
}

bool inside_inclusion(const Vec2& x, const NodeSet& nodes) {
    const BoundaryCurve& c = *nodes.curve;
    const double shift = std::round(x.x() - c.center().x());
    return c.contains(Vec2(x.x() - shift, x.y()));
}

namespace {
template <class T, class Eval>
std::vector<T> split_eval(const std::vector<Vec2>& points, const NodeSet& nodes, Eval eval) {
    std::vector<Vec2> in, out;
    std::vector<int> idx_in, idx_out;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        if (inside_inclusion(points[i], nodes)) {
            in.push_back(points[i]);
            idx_in.push_back(i);
        } else {
            out.push_back(points[i]);
            idx_out.push_back(i);
        }
    }
    std::vector<T> res(points.size());
    if (!in.empty()) {
        const std::vector<T> v = eval(true, in);
        for (size_t k = 0; k < in.size(); ++k) res[idx_in[k]] = v[k];
    }
    if (!out.empty()) {
        const std::vector<T> v = eval(false, out);
        for (size_t k = 0; k < out.size(); ++k) res[idx_out[k]] = v[k];
    }
    return res;
}
}  // namespace

std::vector<Vec2c> total_field(const std::vector<Vec2>& points, const DensityPair& dens, const NodeSet& nodes,
                               const IncidentSpec& spec, const Material& inclusion, double alpha, NearPolicy near,
                               const TruncationPolicy& policy) {
    return split_eval<Vec2c>(points, nodes, [&](bool inside, const std::vector<Vec2>& pts) {
        if (inside) {
            const GreenFunction g(inclusion, spec.omega, alpha, policy);
            return eval_layer_potential(dens.phi, nodes, pts, g, near);
        }
        const GreenFunction g(spec.background, spec.omega, alpha, policy);
        std::vector<Vec2c> v = eval_layer_potential(dens.psi, nodes, pts, g, near);
        for (size_t k = 0; k < pts.size(); ++k) v[k] += incident_p_wave(pts[k], spec);
        return v;
    });
}

std::vector<FieldJet> total_field_jet(const std::vector<Vec2>& points, const DensityPair& dens,
                                      const NodeSet& nodes, const IncidentSpec& spec, const Material& inclusion,
                                      double alpha, NearPolicy near, const TruncationPolicy& policy) {
    return split_eval<FieldJet>(points, nodes, [&](bool inside, const std::vector<Vec2>& pts) {
        if (inside) {
            const GreenFunction g(inclusion, spec.omega, alpha, policy);
            return eval_layer_jet(dens.phi, nodes, pts, g, near);
        }
        const GreenFunction g(spec.background, spec.omega, alpha, policy);
        std::vector<FieldJet> v = eval_layer_jet(dens.psi, nodes, pts, g, near);
        for (size_t k = 0; k < pts.size(); ++k) {
            const Mat2c gr = incident_p_gradient(pts[k], spec);
            v[k].u += incident_p_wave(pts[k], spec);
            v[k].d1 += gr.col(0);
            v[k].d2 += gr.col(1);
        }
        return v;
    });
}

Vec2c far_field(const BoundaryDensity& psi, const NodeSet& nodes, const Vec2& x, const Material& background,
                double omega, double alpha) {
    Vec2c u = Vec2c::Zero();
    for (int j = 0; j < nodes.n; ++j) {
        const Vec2& y = nodes.x[j];
        if (!(x.y() > y.y())) throw std::invalid_argument("far_field: target must lie above the inclusion");
        const Mat2c c = mode_coefficient(0, x.y() - y.y(), background, omega, alpha) -
                        mode_coefficient(0, x.y() + y.y(), background, omega, alpha);
        u += nodes.weight[j] * std::exp(kI * (alpha * (x.x() - y.x()))) * (c * density_at(psi, j));
    }
    return u;
}

Vec2c far_field(const Eigen::Vector3cd& tau, const CMatrix& psi_basis, const NodeSet& nodes, const Vec2& x,
                double alpha, const AsymptoticParams& ap, const IncidentSpec& spec, double mu_inclusion) {
    const Material& m = spec.background;
    Vec2c u = -2.0 * kI * spec.amplitude * spec.omega * kp_scale(m) * spec.theta.y() * x.y() *
              spec.theta.cast<cplx>();
    for (int j = 0; j < nodes.n; ++j) {
        const Mat2c k = far_kernel(x, nodes.x[j], alpha, ap, m);
        Vec2c s = Vec2c::Zero();
        for (int i = 0; i < 3; ++i) s += tau(i) * psi_basis.col(i).segment<2>(2 * j);
        u -= (nodes.weight[j] / mu_inclusion) * (k * s);
    }
    return u;
}

void write_field_csv(std::ostream& os, const std::vector<Vec2>& points, const std::vector<Vec2c>& values,
                     const std::vector<std::string>& comments) {
    if (points.size() != values.size()) throw std::invalid_argument("write_field_csv: points and values differ in length");
    for (const std::string& c : comments) os << "# " << c << '\n';
    os << "x1,x2,re_u1,im_u1,re_u2,im_u2\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.16e", v);
        return std::string(buf);
    };
    for (size_t i = 0; i < points.size(); ++i) {
        os << num(points[i].x()) << ',' << num(points[i].y()) << ',' << num(values[i](0).real()) << ','
           << num(values[i](0).imag()) << ',' << num(values[i](1).real()) << ',' << num(values[i](1).imag())
           << '\n';
    }
}

}  // namespace metascreen
