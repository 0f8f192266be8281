#include "metascreen/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "metascreen/parallel.hpp"

namespace metascreen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr int kPanelOrder = 16;
constexpr double kNearFactor = 10.0;  // plain quadrature needs this many node spacings of clearance

void check_nodes(const NodeSet& ns) {
    if (ns.n < 16 || static_cast<int>(ns.x.size()) != ns.n || !ns.curve)
        throw std::invalid_argument("potentials: NodeSet is not a valid quadrature of a curve");
}

// Product-rule weights for int_0^{2pi} log(4 sin^2((t_i - s)/2)) f(s) ds and
// p.v. int_0^{2pi} cot((t_i - s)/2) f(s) ds, indexed by (i - j) mod n.
void singular_weights(int n, std::vector<double>& R, std::vector<double>& W) {
    const int N = n / 2;
    R.assign(n, 0.0);
    W.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
        const double d = kTwoPi * k / n;
        double r = 0.0, w = 0.0;
        for (int m = 1; m < N; ++m) {
            r += std::cos(m * d) / m;
            w += std::sin(m * d);
        }
        R[k] = -kTwoPi / N * r - kPi / (static_cast<double>(N) * N) * std::cos(N * d);
        W[k] = kTwoPi / N * w;
    }
}

// Limit at e -> 0 of an even function sampled at e_m, by Neville interpolation in e^2.
Mat2c neville_even(const std::vector<double>& e, std::vector<Mat2c> f) {
    const int m = static_cast<int>(e.size());
    for (int k = 1; k < m; ++k)
        for (int i = m - 1; i >= k; --i) {
            const double xi = e[i] * e[i], xk = e[i - k] * e[i - k];
            f[i] = (xi * f[i - 1] - xk * f[i]) / (xi - xk);
        }
    return f[m - 1];
}

struct CurvePoint {
    Vec2 x, tangent, normal;
    double speed;
};

CurvePoint curve_point(const BoundaryCurve& c, double t) {
    const Vec2 d = c.tangent(t);
    const double sp = d.norm();
    return {c.point(t), d / sp, Vec2(d.y(), -d.x()) / sp, sp};
}

enum class Want { S, KStar };

// Kernel times |gamma'(s)|, with its log(4 sin^2((t-s)/2)) and cot((t-s)/2) coefficients.
struct Split {
    Mat2c full, logc, cauchy;
};

Split split_kernel(const GreenFunction& g, Want w, const CurvePoint& px, const CurvePoint& py) {
    const Vec2 z = px.x - py.x;
    Split r;
    if (w == Want::S) {
        r.full = g.value(px.x, py.x) * py.speed;
        r.logc = 0.5 * g.log_coefficient(z) * py.speed;
        r.cauchy.setZero();
    } else {
        const KernelJet j = g.jet_x(px.x, py.x);
        r.full = g.traction(j.d1, j.d2, px.normal) * py.speed;
        r.logc = 0.5 * g.log_coefficient_traction(z, px.normal) * py.speed;
        r.cauchy = g.cauchy_coefficient(px.tangent, px.normal);
    }
    return r;
}

// log coefficient on the diagonal; the traction one vanishes at z = 0
Mat2c diagonal_log(const GreenFunction& g, Want w, const CurvePoint& px) {
    if (w == Want::S) return 0.5 * g.log_coefficient(Vec2::Zero()) * px.speed;
    return Mat2c::Zero();
}

Mat2c remainder(const Split& sp, double t, double s) {
    const double half = 0.5 * (t - s);
    const double sn = std::sin(half);
    return sp.full - sp.logc * std::log(4.0 * sn * sn) - sp.cauchy * (std::cos(half) / sn);
}

void assemble(const NodeSet& ns, const GreenFunction& g, const std::vector<Want>& wants,
              std::vector<CMatrix*> out) {
    check_nodes(ns);
    const int n = ns.n;
    const double h = kTwoPi / n;
    std::vector<double> R, W;
    singular_weights(n, R, W);
    for (CMatrix* m : out) m->setZero(2 * n, 2 * n);
    const BoundaryCurve& curve = *ns.curve;
    std::vector<double> offs;
    for (int m = 1; m <= 4; ++m) offs.push_back(m * h / 4.0);

    parallel_for(n, [&](int i) {
        const double t = ns.t[i];
        const CurvePoint px{ns.x[i], ns.tangent[i], ns.normal[i], ns.speed[i]};
        for (size_t w = 0; w < wants.size(); ++w) {
            CMatrix& M = *out[w];
            for (int j = 0; j < n; ++j) {
                const int k = ((i - j) % n + n) % n;
                Mat2c blk;
                if (j != i) {
                    const CurvePoint py{ns.x[j], ns.tangent[j], ns.normal[j], ns.speed[j]};
                    const Split sp = split_kernel(g, wants[w], px, py);
                    blk = R[k] * sp.logc + W[k] * sp.cauchy + h * remainder(sp, t, ns.t[j]);
                } else {
                    std::vector<Mat2c> f;
                    for (double e : offs) {
                        Mat2c acc = Mat2c::Zero();
                        for (double sgn : {1.0, -1.0}) {
                            const double s = t + sgn * e;
                            const Split sp = split_kernel(g, wants[w], px, curve_point(curve, s));
                            acc += 0.5 * remainder(sp, t, s);
                        }
                        f.push_back(acc);
                    }
                    blk = R[0] * diagonal_log(g, wants[w], px) + h * neville_even(offs, f);
                }
                M.block<2, 2>(2 * i, 2 * j) = blk;
            }
        }
    });
}

}  // namespace

std::string to_string(OperatorKind k) { return k == OperatorKind::SingleLayer ? "single_layer" : "kstar"; }

BoundaryDensity DenseOperator::apply(const BoundaryDensity& v) const {
    if (v.size() != m.cols()) throw std::invalid_argument("DenseOperator::apply: density length mismatch");
    return m * v;
}

namespace {
DenseOperator make_op(OperatorKind k, const NodeSet& ns, const GreenFunction& g) {
    DenseOperator op;
    op.kind = k;
    op.material = g.material();
    op.omega = g.omega();
    op.alpha = g.alpha();
    op.n = ns.n;
    return op;
}
}  // namespace

void assemble_single_layer_and_kstar(const NodeSet& nodes, const GreenFunction& g, DenseOperator& s,
                                     DenseOperator& kstar) {
    s = make_op(OperatorKind::SingleLayer, nodes, g);
    kstar = make_op(OperatorKind::KStar, nodes, g);
    assemble(nodes, g, {Want::S, Want::KStar}, {&s.m, &kstar.m});
}

DenseOperator assemble_single_layer(const NodeSet& nodes, const GreenFunction& g) {
    DenseOperator op = make_op(OperatorKind::SingleLayer, nodes, g);
    assemble(nodes, g, {Want::S}, {&op.m});
    return op;
}

DenseOperator assemble_single_layer(const NodeSet& nodes, const Material& m, double omega, double alpha,
                                    const TruncationPolicy& policy) {
    return assemble_single_layer(nodes, GreenFunction(m, omega, alpha, policy));
}

DenseOperator assemble_kstar(const NodeSet& nodes, const GreenFunction& g) {
    DenseOperator op = make_op(OperatorKind::KStar, nodes, g);
    assemble(nodes, g, {Want::KStar}, {&op.m});
    return op;
}

DenseOperator assemble_kstar(const NodeSet& nodes, const Material& m, double omega, double alpha,
                             const TruncationPolicy& policy) {
    return assemble_kstar(nodes, GreenFunction(m, omega, alpha, policy));
}

BoundaryDensity sample_density(const NodeSet& nodes, const std::function<Vec2c(const Vec2&)>& f) {
    BoundaryDensity v(2 * nodes.n);
    for (int j = 0; j < nodes.n; ++j) v.segment<2>(2 * j) = f(nodes.x[j]);
    return v;
}

cplx inner(const BoundaryDensity& a, const BoundaryDensity& b, const NodeSet& nodes) {
    if (a.size() != 2 * nodes.n || b.size() != 2 * nodes.n) throw std::invalid_argument("inner: length mismatch");
    cplx s = 0.0;
    for (int j = 0; j < nodes.n; ++j)
        s += nodes.weight[j] * (a(2 * j) * std::conj(b(2 * j)) + a(2 * j + 1) * std::conj(b(2 * j + 1)));
    return s;
}

Vec2c density_at(const BoundaryDensity& v, int j) { return v.segment<2>(2 * j); }

Vec2c field_traction(const FieldJet& j, const Vec2& nu, const Material& m) {
    const cplx div = j.d1(0) + j.d2(1);
    const Vec2c* d[2] = {&j.d1, &j.d2};
    Vec2c t;
    for (int i = 0; i < 2; ++i) {
        cplx s = m.lam * div * nu(i);
        for (int k = 0; k < 2; ++k) s += m.mu * ((*d[k])(i) + (*d[i])(k)) * nu(k);
        t(i) = s;
    }
    return t;
}

namespace {

// Trigonometric interpolant of a nodal density.
class TrigInterpolant {
public:
    explicit TrigInterpolant(const BoundaryDensity& v) : n_(static_cast<int>(v.size() / 2)), N_(n_ / 2) {
        c_.assign(2 * N_, Vec2c::Zero());
        for (int k = -N_; k < N_; ++k) {
            Vec2c s = Vec2c::Zero();
            for (int j = 0; j < n_; ++j)
                s += v.segment<2>(2 * j) * std::polar(1.0, -kTwoPi * static_cast<double>(k) * j / n_);
            c_[k + N_] = s / static_cast<double>(n_);
        }
    }

    Vec2c operator()(double s) const {
        // c_{-N} carries the Nyquist term as cos(N s)
        Vec2c r = c_[N_];
        const cplx z = std::polar(1.0, s);
        cplx zk = 1.0;
        for (int k = 1; k < N_; ++k) {
            zk *= z;
            r += c_[N_ + k] * zk + c_[N_ - k] * std::conj(zk);
        }
        zk *= z;
        r += c_[0] * zk.real();
        return r;
    }

private:
    int n_, N_;
    std::vector<Vec2c> c_;
};

struct Nearest {
    double t, dist;
};

Nearest nearest_point(const Vec2& x, const NodeSet& ns) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < ns.n; ++j) {
        const double d = (ns.x[j] - x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = j;
        }
    }
    const BoundaryCurve& c = *ns.curve;
    double t = ns.t[best];
    const double h = kTwoPi / ns.n;
    for (int it = 0; it < 20; ++it) {
        const Vec2 r = c.point(t) - x, d1 = c.tangent(t), d2 = c.second_derivative(t);
        const double f = r.dot(d1), fp = d1.squaredNorm() + r.dot(d2);
        if (fp <= 0.0) break;
        const double step = std::clamp(-f / fp, -h, h);
        t += step;
        if (std::abs(step) < 1e-15) break;
    }
    return {t, (c.point(t) - x).norm()};
}

// Shift m with x - m e1 in the primary cell column around the curve center.
int cell_shift(const Vec2& x, const NodeSet& ns) { return static_cast<int>(std::round(x.x() - ns.curve->center().x())); }

struct Source {
    Vec2 y;
    double w;  // quadrature weight including |gamma'|
    Vec2c psi;
    int node = -1;  // node index, or -1 for a panel point at parameter s
    double s = 0.0;
};

// Quadrature sources for the integral at target x (already reduced to the primary cell).
std::vector<Source> sources_for(const Vec2& x, const NodeSet& ns, const BoundaryDensity& dens,
                                const TrigInterpolant* ti, NearPolicy near) {
    const double spacing = ns.max_spacing();
    const Nearest nr = nearest_point(x, ns);
    std::vector<Source> src;
    if (nr.dist > kNearFactor * spacing) {
        src.reserve(ns.n);
        for (int j = 0; j < ns.n; ++j) src.push_back({ns.x[j], ns.weight[j], dens.segment<2>(2 * j), j});
        return src;
    }
    if (near == NearPolicy::Reject) {
        std::ostringstream os;
        os << "layer potential target at distance " << nr.dist << " from the boundary, closer than "
           << kNearFactor << " node spacings (" << kNearFactor * spacing << ")";
        throw NearTargetError(os.str());
    }
    static thread_local std::vector<double> gx, gw;
    if (static_cast<int>(gx.size()) != kPanelOrder) gauss_legendre(kPanelOrder, gx, gw);
    const BoundaryCurve& c = *ns.curve;
    const double u = std::max(nr.dist / c.tangent(nr.t).norm(), 1e-14);
    const double cap = 6.0 * kTwoPi / ns.n;
    std::vector<double> br{0.0};
    for (double a = u; br.back() < kPi;) {
        br.push_back(std::min(a, kPi));
        const double step = std::min(br.back(), cap);
        a = br.back() + std::max(step, u);
    }
    for (double side : {1.0, -1.0})
        for (size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], b = br[p + 1];
            for (int q = 0; q < kPanelOrder; ++q) {
                const double s = nr.t + side * (0.5 * (a + b) + 0.5 * (b - a) * gx[q]);
                const Vec2 d = c.tangent(s);
                src.push_back({c.point(s), 0.5 * (b - a) * gw[q] * d.norm(), (*ti)(s), -1, s});
            }
        }
    return src;
}

template <class F>
void for_targets(const BoundaryDensity& dens, const NodeSet& ns, const std::vector<Vec2>& targets, double alpha,
                 NearPolicy near, F&& f) {
    check_nodes(ns);
    if (dens.size() != 2 * ns.n) throw std::invalid_argument("layer potential: density length must be 2n");
    const TrigInterpolant ti(dens);
    parallel_for(static_cast<int>(targets.size()), [&](int k) {
        const int m = cell_shift(targets[k], ns);
        const Vec2 x = targets[k] - Vec2(m, 0.0);
        const cplx phase = std::polar(1.0, alpha * m);
        f(k, x, phase, sources_for(x, ns, dens, &ti, near));
    });
}

}  // namespace

double distance_to_boundary(const Vec2& x, const NodeSet& nodes) {
    check_nodes(nodes);
    double d = std::numeric_limits<double>::infinity();
    for (int m = -1; m <= 1; ++m) d = std::min(d, nearest_point(x - Vec2(m, 0.0), nodes).dist);
    return d;
}

std::vector<Vec2c> eval_layer_potential(const BoundaryDensity& density, const NodeSet& nodes,
                                        const std::vector<Vec2>& targets, const GreenFunction& g,
                                        NearPolicy near) {
    std::vector<Vec2c> out(targets.size(), Vec2c::Zero());
    for_targets(density, nodes, targets, g.alpha(), near,
                [&](int k, const Vec2& x, cplx phase, const std::vector<Source>& src) {
                    Vec2c u = Vec2c::Zero();
                    for (const Source& s : src) u += s.w * (g.value(x, s.y) * s.psi);
                    out[k] = phase * u;
                });
    return out;
}

std::vector<std::vector<Vec2c>> eval_layer_potentials(const CMatrix& densities, const NodeSet& nodes,
                                                      const std::vector<Vec2>& targets, const GreenFunction& g,
                                                      NearPolicy near) {
    const int nd = static_cast<int>(densities.cols());
    std::vector<std::vector<Vec2c>> out(nd, std::vector<Vec2c>(targets.size(), Vec2c::Zero()));
    if (nd == 0) return out;
    std::vector<TrigInterpolant> ti;
    for (int d = 0; d < nd; ++d) ti.emplace_back(densities.col(d));
    const BoundaryDensity first = densities.col(0);
    for_targets(first, nodes, targets, g.alpha(), near,
                [&](int k, const Vec2& x, cplx phase, const std::vector<Source>& src) {
                    std::vector<Vec2c> u(nd, Vec2c::Zero());
                    for (const Source& s : src) {
                        const Mat2c gk = s.w * g.value(x, s.y);
                        for (int d = 0; d < nd; ++d) {
                            const Vec2c psi = s.node >= 0 ? Vec2c(densities.col(d).segment<2>(2 * s.node)) : ti[d](s.s);
                            u[d] += gk * psi;
                        }
                    }
                    for (int d = 0; d < nd; ++d) out[d][k] = phase * u[d];
                });
    return out;
}

std::vector<Vec2c> eval_layer_potential(const BoundaryDensity& density, const NodeSet& nodes,
                                        const std::vector<Vec2>& targets, const Material& m, double omega,
                                        double alpha, NearPolicy near, const TruncationPolicy& policy) {
    return eval_layer_potential(density, nodes, targets, GreenFunction(m, omega, alpha, policy), near);
}

std::vector<FieldJet> eval_layer_jet(const BoundaryDensity& density, const NodeSet& nodes,
                                     const std::vector<Vec2>& targets, const GreenFunction& g, NearPolicy near) {
    std::vector<FieldJet> out(targets.size());
    for_targets(density, nodes, targets, g.alpha(), near,
                [&](int k, const Vec2& x, cplx phase, const std::vector<Source>& src) {
                    FieldJet r;
                    for (const Source& s : src) {
                        const KernelJet j = g.jet_x(x, s.y);
                        r.u += s.w * (j.g * s.psi);
                        r.d1 += s.w * (j.d1 * s.psi);
                        r.d2 += s.w * (j.d2 * s.psi);
                    }
                    r.u *= phase;
                    r.d1 *= phase;
                    r.d2 *= phase;
                    out[k] = r;
                });
    return out;
}

JumpReport jump_check(const BoundaryDensity& density, const NodeSet& nodes, const Material& m, double omega,
                      double alpha, double eps, const TruncationPolicy& policy, int stride) {
    check_nodes(nodes);
    if (!(eps > 0.0)) throw std::invalid_argument("jump_check: eps must be positive");
    stride = std::max(1, stride);
    const GreenFunction g(m, omega, alpha, policy);
    const BoundaryDensity kpsi = assemble_kstar(nodes, g).apply(density);

    std::vector<int> idx;
    for (int j = 0; j < nodes.n; j += stride) idx.push_back(j);
    std::vector<Vec2> targets;
    for (double off : {eps, -eps, 2.0 * eps, -2.0 * eps, 4.0 * eps, -4.0 * eps})
        for (int j : idx) targets.push_back(nodes.x[j] + off * nodes.normal[j]);
    const std::vector<FieldJet> jets = eval_layer_jet(density, nodes, targets, g, NearPolicy::Adaptive);

    const size_t q = idx.size();
    double ep = 0, em = 0, ed = 0, epx = 0, emx = 0, epx2 = 0, emx2 = 0, sp = 0, sm = 0, sd = 0;
    for (size_t k = 0; k < q; ++k) {
        const int j = idx[k];
        const Vec2& nu = nodes.normal[j];
        const Vec2c psi = density.segment<2>(2 * j), kp = kpsi.segment<2>(2 * j);
        Vec2c tr[6];
        for (int o = 0; o < 6; ++o) tr[o] = field_traction(jets[o * q + k], nu, m);
        const Vec2c rp = 0.5 * psi + kp, rm = -0.5 * psi + kp;
        ep = std::max(ep, (tr[0] - rp).norm());
        em = std::max(em, (tr[1] - rm).norm());
        ed = std::max(ed, (tr[0] - tr[1] - psi).norm());
        epx = std::max(epx, (2.0 * tr[0] - tr[2] - rp).norm());
        emx = std::max(emx, (2.0 * tr[1] - tr[3] - rm).norm());
        epx2 = std::max(epx2, ((8.0 * tr[0] - 6.0 * tr[2] + tr[4]) / 3.0 - rp).norm());
        emx2 = std::max(emx2, ((8.0 * tr[1] - 6.0 * tr[3] + tr[5]) / 3.0 - rm).norm());
        sp = std::max(sp, rp.norm());
        sm = std::max(sm, rm.norm());
        sd = std::max(sd, psi.norm());
    }
    JumpReport r;
    r.n = nodes.n;
    r.eps = eps;
    r.err_plus = ep / sp;
    r.err_minus = em / sm;
    r.err_difference = ed / sd;
    r.err_plus_extrap = epx / sp;
    r.err_minus_extrap = emx / sm;
    r.err_plus_extrap2 = epx2 / sp;
    r.err_minus_extrap2 = emx2 / sm;
    return r;
}

}  // namespace metascreen
