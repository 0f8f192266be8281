#include "metascreen/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metascreen/parallel.hpp"

namespace metascreen {

namespace {

Eigen::VectorXd node_weights(const NodeSet& nodes) {
    Eigen::VectorXd w(2 * nodes.n);
    for (int j = 0; j < nodes.n; ++j) w(2 * j) = w(2 * j + 1) = nodes.weight[j];
    return w;
}

double wnorm(const Eigen::VectorXcd& v, const Eigen::VectorXd& w) {
    return std::sqrt((w.array() * v.array().abs2()).sum());
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

Vec2 RigidBasis::at(int i, const Vec2& x) const {
    switch (i) {
        case 0: return Vec2(scale[0], 0.0);
        case 1: return Vec2(0.0, scale[1]);
        default: return scale[2] * Vec2(-(x.y() - centroid.y()), x.x() - centroid.x());
    }
}

RigidBasis rigid_basis(const NodeSet& nodes, RigidNormalization norm) {
    RigidBasis b;
    b.norm = norm;
    Vec2 first = Vec2::Zero();
    for (int j = 0; j < nodes.n; ++j) {
        b.perimeter += nodes.weight[j];
        b.c0 += nodes.weight[j] * nodes.x[j].squaredNorm();
        first += nodes.weight[j] * nodes.x[j];
    }
    if (norm == RigidNormalization::Orthonormal) {
        b.centroid = first / b.perimeter;
        double cc = 0.0;
        for (int j = 0; j < nodes.n; ++j) cc += nodes.weight[j] * (nodes.x[j] - b.centroid).squaredNorm();
        b.scale[0] = b.scale[1] = 1.0 / std::sqrt(b.perimeter);
        b.scale[2] = 1.0 / std::sqrt(cc);
    } else {
        b.scale[0] = b.scale[1] = 1.0 / b.perimeter;
        b.scale[2] = 1.0 / b.c0;
    }
    b.f.setZero(2 * nodes.n, 3);
    for (int j = 0; j < nodes.n; ++j)
        for (int i = 0; i < 3; ++i) b.f.block<2, 1>(2 * j, i) = b.at(i, nodes.x[j]).cast<cplx>();
    return b;
}

CMatrix gram(const CMatrix& a, const CMatrix& b, const NodeSet& nodes) {
    const Eigen::VectorXd w = node_weights(nodes);
    return a.transpose() * w.cast<cplx>().asDiagonal() * b.conjugate();
}

WBasis psi_basis(const NodeSet& nodes, const RigidBasis& rigid, const DenseOperator& kstar_in,
                 double max_condition) {
    const int m = 2 * nodes.n;
    const Eigen::VectorXd w = node_weights(nodes);
    const Eigen::VectorXcd sw = w.cwiseSqrt().cast<cplx>();
    const Eigen::VectorXcd isw = sw.cwiseInverse();

    // orthonormal basis of the discrete H_Psi in the weighted inner product
    const CMatrix fh = sw.asDiagonal() * rigid.f;
    Eigen::HouseholderQR<CMatrix> qr(fh);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(m, m);
    const CMatrix qc = q.rightCols(m - 3);

    const CMatrix b = 0.5 * CMatrix::Identity(m, m) - kstar_in.m;
    const CMatrix ah = sw.asDiagonal() * b * isw.asDiagonal() * qc;
    const CMatrix rhs = -(sw.asDiagonal() * (b * rigid.f));

    Eigen::BDCSVD<CMatrix> svd(ah, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    WBasis r;
    r.restricted_sigma_min = sv(sv.size() - 1);
    r.restricted_condition = r.restricted_sigma_min > 0.0 ? sv(0) / r.restricted_sigma_min : INFINITY;
    if (!(r.restricted_condition < max_condition))
        throw IllConditionedError("psi_basis: 1/2 I - K~* restricted to H_Psi has condition " +
                                  fmt(r.restricted_condition));
    const CMatrix y = svd.solve(rhs);
    r.psi_tilde = isw.asDiagonal() * (qc * y);
    r.psi = r.psi_tilde + rigid.f;
    for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXcd p = r.psi.col(i);
        r.eigen_residual(i) = wnorm(kstar_in.m * p - 0.5 * p, w) / wnorm(p, w);
    }
    return r;
}

WBasis psi_basis(const NodeSet& nodes, const RigidBasis& rigid, const Material& inclusion, double alpha,
                 const TruncationPolicy& policy) {
    return psi_basis(nodes, rigid, assemble_kstar(nodes, inclusion, 0.0, alpha, policy));
}

Material leading_material() { return Material(0.0, 1.0, 1.0); }

CMatrix leading_single_layer(const NodeSet& nodes, double alpha, LeadingForm form, const AsymptoticParams& ap,
                             const TruncationPolicy& policy) {
    if (form == LeadingForm::Consistent) return assemble_single_layer(nodes, leading_material(), 0.0, alpha, policy).m;
    const int n = nodes.n;
    const double h = 2.0 * std::numbers::pi / n;
    CMatrix s = CMatrix::Zero(2 * n, 2 * n);
    parallel_for(n, [&](int i) {
        for (int j = 0; j < n; ++j) {
            Mat2c k;
            if (j != i) {
                k = green_leading(nodes.x[i], nodes.x[j], alpha, ap);
            } else {
                // the kernel jumps across the diagonal: take the mean of the one-sided values
                k = 0.5 * (green_leading(nodes.x[i], nodes.curve->point(nodes.t[i] + 0.5 * h), alpha, ap) +
                           green_leading(nodes.x[i], nodes.curve->point(nodes.t[i] - 0.5 * h), alpha, ap));
            }
            s.block<2, 2>(2 * i, 2 * j) = nodes.weight[j] * k;
        }
    });
    return s;
}

SMatrixReport s_matrix(const NodeSet& nodes, const WBasis& w, const RigidBasis& rigid, const CMatrix& s_leading) {
    if (rigid.norm != RigidNormalization::Orthonormal)
        throw std::invalid_argument("s_matrix: projection needs the orthonormal rigid basis");
    const Eigen::VectorXd wt = node_weights(nodes);
    const CMatrix image = s_leading * w.psi;
    SMatrixReport r;
    r.s = gram(image, rigid.f, nodes);
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXcd res = image.col(i);
        for (int j = 0; j < 3; ++j) res -= r.s(i, j) * rigid.f.col(j);
        r.projection_residual = std::max(r.projection_residual, wnorm(res, wt));
    }
    Eigen::JacobiSVD<Mat3c> svd(r.s);
    const auto& sv = svd.singularValues();
    r.relative_residual = r.projection_residual / sv(0);
    r.flagged = r.relative_residual > 1e-3;
    r.condition = sv(2) > 0.0 ? sv(0) / sv(2) : INFINITY;
    if (!(r.condition < 1e12)) throw IllConditionedError("s_matrix: S is numerically singular, condition " + fmt(r.condition));
    return r;
}

Mat3c m_matrix(const NodeSet& nodes, const AreaRule& area, const WBasis& w, const RigidBasis& rigid, double alpha,
               LeadingForm form, const AsymptoticParams* ap, const TruncationPolicy& policy) {
    const int np = static_cast<int>(area.x.size());
    std::vector<std::vector<Vec2c>> vals(3);
    if (form == LeadingForm::Consistent) {
        const GreenFunction g(leading_material(), 0.0, alpha, policy);
        vals = eval_layer_potentials(w.psi, nodes, area.x, g, NearPolicy::Adaptive);
    } else {
        if (!ap) throw std::invalid_argument("m_matrix: the printed form needs asymptotic parameters");
        for (int i = 0; i < 3; ++i) vals[i].assign(np, Vec2c::Zero());
        parallel_for(np, [&](int k) {
            for (int j = 0; j < nodes.n; ++j) {
                const Mat2c g = nodes.weight[j] * green_leading(area.x[k], nodes.x[j], alpha, *ap);
                for (int i = 0; i < 3; ++i) vals[i][k] += g * w.psi.col(i).segment<2>(2 * j);
            }
        });
    }
    Mat3c M = Mat3c::Zero();
    for (int k = 0; k < np; ++k)
        for (int j = 0; j < 3; ++j) {
            const Vec2c f = rigid.at(j, area.x[k]).cast<cplx>();
            for (int i = 0; i < 3; ++i) M(i, j) += area.weight[k] * vals[i][k].cwiseProduct(f).sum();
        }
    return M;
}

Eigen::Matrix3d volume_gram(const AreaRule& area, const RigidBasis& rigid) {
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    for (size_t k = 0; k < area.x.size(); ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g(i, j) += area.weight[k] * rigid.at(i, area.x[k]).dot(rigid.at(j, area.x[k]));
    return g;
}

FrequencyPrediction resonant_frequencies(const Mat3c& M, double mu_background, double rho_inclusion,
                                         FrequencySign sign) {
    if (!(mu_background > 0.0 && rho_inclusion > 0.0))
        throw std::invalid_argument("resonant_frequencies: mu and rho~ must be positive");
    FrequencyPrediction p;
    Eigen::ComplexEigenSolver<Mat3c> es(M);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + 3);
    const double s = sign == FrequencySign::Printed ? 1.0 : -1.0;
    std::sort(ev.begin(), ev.end(), [s](cplx a, cplx b) { return s * a.real() > s * b.real(); });
    for (int i = 0; i < 3; ++i) {
        p.m(i) = ev[i];
        const bool ok = s * ev[i].real() > 0.0 && std::abs(ev[i].imag()) < 1e-6 * std::abs(ev[i].real());
        p.admissible.push_back(ok);
        if (ok) {
            p.omega.push_back(std::sqrt(mu_background / (rho_inclusion * s * ev[i].real())));
        } else {
            p.diagnostics.push_back("eigenvalue m_" + std::to_string(i + 1) + " = " + fmt(ev[i].real()) + " + " +
                                    fmt(ev[i].imag()) + "i is not admissible (needs " +
                                    (s > 0 ? "Re m > 0" : "Re m < 0") + ", |Im m| < 1e-6 |Re m|)");
        }
    }
    if (p.omega.empty()) p.diagnostics.push_back("no admissible eigenvalue: no resonant frequency predicted");
    return p;
}

std::vector<cplx> stiffness_frequencies(const NodeSet& nodes, const AreaRule& area, const RigidBasis& rigid,
                                        const Material& background, double rho_inclusion, double alpha,
                                        const TruncationPolicy& policy, FrequencySign sign) {
    const DenseOperator s0 = assemble_single_layer(nodes, background, 0.0, alpha, policy);
    const CMatrix x = s0.m.partialPivLu().solve(rigid.f);
    const Mat3c k = gram(x, rigid.f, nodes);
    const Eigen::Matrix3d g = volume_gram(area, rigid);
    const double sg = sign == FrequencySign::Printed ? 1.0 : -1.0;
    Eigen::ComplexEigenSolver<Mat3c> es(sg * g.cast<cplx>().inverse() * k / rho_inclusion);
    std::vector<cplx> w;
    for (int i = 0; i < 3; ++i) w.push_back(std::sqrt(es.eigenvalues()(i)));
    std::sort(w.begin(), w.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return w;
}

namespace {

struct PredictionContext {
    RigidBasis rigid;
    AreaRule area;

    PredictionContext(const NodeSet& nodes, const ResonanceInputs& in)
        : rigid(rigid_basis(nodes)), area(interior_quadrature(*nodes.curve, in.n_r, in.n_t)) {}

    FrequencyPrediction at(const NodeSet& nodes, const ResonanceInputs& in, double alpha) const {
        const WBasis w = psi_basis(nodes, rigid, in.inclusion, alpha, in.policy);
        const Mat3c M = m_matrix(nodes, area, w, rigid, alpha, LeadingForm::Consistent, nullptr, in.policy);
        return resonant_frequencies(M, in.background.mu, in.inclusion.rho, in.sign);
    }
};

double sign_of(FrequencySign s) { return s == FrequencySign::Printed ? 1.0 : -1.0; }

PredictedResonance fixed_point(const NodeSet& nodes, const ResonanceInputs& in, const PredictionContext& ctx,
                               int b, double omega, std::vector<std::string>* notes) {
    if (b < 0 || b > 2) throw std::invalid_argument("predict_resonance: branch must be 0, 1 or 2");
    PredictedResonance r;
    r.branch = b;
    bool inadmissible = false;
    for (int it = 1; it <= 60; ++it) {
        r.alpha = in.alpha_rule(omega);
        const FrequencyPrediction p = ctx.at(nodes, in, r.alpha);
        r.iterations = it;
        r.m = p.m(b);
        if (!p.admissible[b]) {
            if (notes)
                notes->push_back("branch " + std::to_string(b + 1) + ": m = " + fmt(r.m.real()) + " + " +
                                 fmt(r.m.imag()) + "i not admissible at omega = " + fmt(omega));
            inadmissible = true;
            break;
        }
        const double next = std::sqrt(in.background.mu / (in.inclusion.rho * sign_of(in.sign) * r.m.real()));
        const bool done = std::abs(next - omega) < 1e-9 * next;
        omega = next;
        if (done) {
            r.converged = true;
            break;
        }
    }
    r.omega = omega;
    if (!r.converged && !inadmissible && notes)
        notes->push_back("branch " + std::to_string(b + 1) + ": fixed point not converged in 60 steps");
    return r;
}

}  // namespace

PredictedResonance predict_resonance(const NodeSet& nodes, const ResonanceInputs& in, int branch,
                                     double omega_guess, std::vector<std::string>* notes) {
    return fixed_point(nodes, in, PredictionContext(nodes, in), branch, omega_guess, notes);
}

std::vector<PredictedResonance> predict_resonances(const NodeSet& nodes, const ResonanceInputs& in,
                                                   const std::vector<double>& search_grid,
                                                   std::vector<std::string>* notes) {
    const PredictionContext ctx(nodes, in);
    const int n = static_cast<int>(search_grid.size());
    std::vector<FrequencyPrediction> map(n);
    for (int k = 0; k < n; ++k) map[k] = ctx.at(nodes, in, in.alpha_rule(search_grid[k]));
    auto residual = [&](int k, int b) {
        return std::sqrt(in.background.mu / (in.inclusion.rho * sign_of(in.sign) * map[k].m(b).real())) -
               search_grid[k];
    };
    std::vector<PredictedResonance> out;
    for (int b = 0; b < 3; ++b)
        for (int k = 0; k + 1 < n; ++k) {
            if (!map[k].admissible[b] || !map[k + 1].admissible[b]) continue;
            const double h0 = residual(k, b), h1 = residual(k + 1, b);
            if ((h0 > 0.0) == (h1 > 0.0)) continue;
            const double guess = search_grid[k] - h0 * (search_grid[k + 1] - search_grid[k]) / (h1 - h0);
            PredictedResonance r = fixed_point(nodes, in, ctx, b, guess, notes);
            if (!r.converged) continue;
            bool dup = false;
            for (const PredictedResonance& q : out) dup = dup || std::abs(q.omega - r.omega) < 1e-7 * r.omega;
            if (!dup) out.push_back(r);
        }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.omega < b.omega; });
    if (out.empty() && notes) notes->push_back("no fixed point of the resonance map inside the search grid");
    return out;
}

StaticPieces static_pieces(const NodeSet& nodes, const Material& inclusion, const Material& background,
                           double alpha, const TruncationPolicy& policy) {
    StaticPieces sp;
    assemble_single_layer_and_kstar(nodes, GreenFunction(background, 0.0, alpha, policy), sp.s_bg, sp.k_bg);
    sp.k_in = assemble_kstar(nodes, inclusion, 0.0, alpha, policy);
    return sp;
}

NormalizationConstants normalization_constants(const NodeSet& nodes, const RigidBasis& rigid,
                                               const DenseOperator& s_bg_static) {
    const int m = 2 * nodes.n;
    const Eigen::VectorXcd w = node_weights(nodes).cast<cplx>();
    // L2 adjoint in the weighted inner product: S* = W^{-1} S^H W
    const CMatrix y = s_bg_static.m.adjoint().partialPivLu().solve(w.asDiagonal() * rigid.f);
    const CMatrix g = w.cwiseInverse().asDiagonal() * y;
    NormalizationConstants nc;
    nc.psi_star.resize(2 * m, 3);
    nc.psi_star.topRows(m) = g;
    nc.psi_star.bottomRows(m) = rigid.f;
    for (int i = 0; i < 3; ++i) {
        const double nrm = std::sqrt((gram(nc.psi_star.col(i).head(m), nc.psi_star.col(i).head(m), nodes)(0, 0) +
                                      gram(nc.psi_star.col(i).tail(m), nc.psi_star.col(i).tail(m), nodes)(0, 0))
                                         .real());
        nc.c_star(i) = nrm;
        nc.psi_star.col(i) /= nrm;
    }
    const CMatrix gg = gram(nc.psi_star.topRows(m), nc.psi_star.topRows(m), nodes) +
                       gram(nc.psi_star.bottomRows(m), nc.psi_star.bottomRows(m), nodes);
    nc.orthonormality_error = (gg - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff();
    return nc;
}

TauReport tau_coefficients(const NodeSet& nodes, const StaticPieces& sp, const RigidBasis& rigid, const WBasis& w,
                           const NormalizationConstants& nc, const Mat3c& M, const IncidentSpec& spec,
                           const Material& inclusion, FrequencySign sign) {
    (void)rigid;
    const int m = 2 * nodes.n;
    const Material& bg = spec.background;
    const double omega = spec.omega;
    const CMatrix id = CMatrix::Identity(m, m);
    CMatrix a0 = CMatrix::Zero(2 * m, 2 * m);
    a0.topRightCorner(m, m) = -sp.s_bg.m;
    a0.bottomLeftCorner(m, m) = -0.5 * id + sp.k_in.m;
    a0.bottomRightCorner(m, m) = -(0.5 * id + sp.k_bg.m);

    Eigen::VectorXcd w4(2 * m);
    w4.head(m) = node_weights(nodes).cast<cplx>();
    w4.tail(m) = w4.head(m);
    CMatrix big = CMatrix::Zero(2 * m, 3);  // Psi_i = (psi^(i), 0)
    big.topRows(m) = w.psi;
    const CMatrix p = nc.psi_star * (big.adjoint() * w4.asDiagonal());
    const Eigen::VectorXcd x = (a0 + p).partialPivLu().solve(incident_data(nodes, spec));

    TauReport r;
    for (int j = 0; j < 3; ++j) r.k(j) = (w4.array() * x.array() * big.col(j).conjugate().array()).sum();
    const double s = sign == FrequencySign::Printed ? 1.0 : -1.0;
    const Mat3c pencil = bg.mu * Mat3c::Identity() - s * inclusion.rho * omega * omega * M;
    Eigen::JacobiSVD<Mat3c> svd(pencil);
    r.sigma_min_pencil = svd.singularValues()(2) / bg.mu;
    r.blowup = r.sigma_min_pencil < 1e-8;
    const Vec3c rhs = nc.c_star.cast<cplx>().asDiagonal() * r.k;
    r.tau = (1.0 - bg.mu / inclusion.mu) * pencil.fullPivLu().solve(rhs);
    const FrequencyPrediction fp = resonant_frequencies(M, bg.mu, inclusion.rho, sign);
    r.distance_to_resonance = INFINITY;
    for (double wi : fp.omega) r.distance_to_resonance = std::min(r.distance_to_resonance, std::abs(omega - wi));
    return r;
}

void find_dips(ScanReport& r, double threshold) {
    r.dips.clear();
    r.minima.clear();
    std::vector<double> fin;
    for (double s : r.sigma_min)
        if (std::isfinite(s)) fin.push_back(s);
    if (fin.empty()) return;
    std::sort(fin.begin(), fin.end());
    const size_t h = fin.size() / 2;
    r.median = fin.size() % 2 ? fin[h] : 0.5 * (fin[h - 1] + fin[h]);
    const int n = static_cast<int>(r.sigma_min.size());
    for (int i = 1; i + 1 < n; ++i) {
        const double a = r.sigma_min[i - 1], b = r.sigma_min[i], c = r.sigma_min[i + 1];
        if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)) || !(b < a && b < c)) continue;
        // vertex of the parabola through the three points in (omega, log sigma)
        const double x0 = r.omega[i - 1], x1 = r.omega[i], x2 = r.omega[i + 1];
        const double y0 = std::log(a), y1 = std::log(b), y2 = std::log(c);
        const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        Dip d;
        d.index = i;
        d.omega = x1;
        d.sigma = b;
        if (curv > 0.0) {
            const double slope1 = d01 + curv * (x1 - x0);  // derivative at x1
            d.omega = std::clamp(x1 - slope1 / (2.0 * curv), x0, x2);
            d.sigma = std::exp(y1 - slope1 * slope1 / (4.0 * curv));
        }
        d.depth = b / r.median;
        r.minima.push_back(d);
        if (b < threshold * r.median) r.dips.push_back(d);
    }
}

ScanReport sigma_min_scan(const std::vector<double>& grid, const NodeSet& nodes, const Material& inclusion,
                          const Material& background, const AlphaRule& alpha_rule, double threshold,
                          const TruncationPolicy& policy) {
    ScanReport r;
    const int n = static_cast<int>(grid.size());
    r.omega = grid;
    r.alpha.assign(n, 0.0);
    r.sigma_min.assign(n, std::numeric_limits<double>::quiet_NaN());
    r.norm.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> note(n);
    parallel_for(n, [&](int i) {
        const double omega = grid[i];
        r.alpha[i] = alpha_rule(omega);
        try {
            const CMatrix a = assemble_block_matrix(nodes, inclusion, background, omega, r.alpha[i], policy);
            Eigen::BDCSVD<CMatrix> svd(a);
            const auto& sv = svd.singularValues();
            r.sigma_min[i] = sv(sv.size() - 1);
            r.norm[i] = sv(0);
        } catch (const DegenerateModeError& e) {
            note[i] = "omega = " + fmt(omega) + " skipped: " + e.what();
        }
    });
    for (const std::string& s : note)
        if (!s.empty()) r.notes.push_back(s);
    find_dips(r, threshold);
    return r;
}

AbsenceReport absence_check(const std::vector<double>& grid, const NodeSet& nodes, const Material& inclusion,
                            const Material& background, const AlphaRule& alpha_rule, double alpha_static,
                            const TruncationPolicy& policy) {
    if (alpha_static == 0.0)
        throw std::invalid_argument(
            "absence_check: alpha = 0 refused; invertibility of 1/2 I + K* is only established for alpha != 0");
    if (!(background.mu >= 1e4 * inclusion.mu))
        throw std::invalid_argument("absence_check: needs background mu >= 1e4 * inclusion mu");
    AbsenceReport rep;
    rep.alpha = alpha_static;
    const int m = 2 * nodes.n;
    const CMatrix id = CMatrix::Identity(m, m);
    const DenseOperator k0 = assemble_kstar(nodes, background, 0.0, alpha_static, policy);
    rep.sigma_half_kstar = smallest_singular_value(0.5 * id + k0.m);

    rep.scan = sigma_min_scan(grid, nodes, inclusion, background, alpha_rule, 0.5, policy);
    const int n = static_cast<int>(grid.size());
    rep.sigma_a0.assign(n, std::numeric_limits<double>::quiet_NaN());
    parallel_for(n, [&](int i) {
        try {
            DenseOperator s_in, k_in;
            assemble_single_layer_and_kstar(nodes, GreenFunction(inclusion, 0.0, rep.scan.alpha[i], policy), s_in,
                                            k_in);
            const DenseOperator k_bg = assemble_kstar(nodes, background, 0.0, rep.scan.alpha[i], policy);
            CMatrix a0 = CMatrix::Zero(2 * m, 2 * m);
            a0.topLeftCorner(m, m) = s_in.m;
            a0.bottomLeftCorner(m, m) = -0.5 * id + k_in.m;
            a0.bottomRightCorner(m, m) = -(0.5 * id + k_bg.m);
            rep.sigma_a0[i] = smallest_singular_value(a0);
        } catch (const DegenerateModeError&) {
        }
    });

    rep.min_ratio = INFINITY;
    for (int i = 0; i < n; ++i)
        if (std::isfinite(rep.scan.sigma_min[i]))
            rep.min_ratio = std::min(rep.min_ratio, rep.scan.sigma_min[i] / rep.scan.norm[i]);
    double min_a0 = INFINITY;
    for (double s : rep.sigma_a0)
        if (std::isfinite(s)) min_a0 = std::min(min_a0, s);

    const bool a_ok = rep.sigma_half_kstar > 0.01;
    const bool b_ok = min_a0 > 0.0 && std::isfinite(min_a0);
    const bool c_ok = rep.min_ratio > 1e-4 && rep.scan.dips.empty();
    if (!a_ok) rep.notes.push_back("sigma_min(1/2 I + K*) = " + fmt(rep.sigma_half_kstar) + " <= 0.01");
    if (!b_ok) rep.notes.push_back("leading operator singular on the grid");
    if (rep.min_ratio <= 1e-4) rep.notes.push_back("min sigma_min(A)/||A|| = " + fmt(rep.min_ratio) + " <= 1e-4");
    for (const Dip& d : rep.scan.dips)
        rep.notes.push_back("local minimum below 0.5 x median at omega = " + fmt(d.omega));
    rep.passed = a_ok && b_ok && c_ok;
    return rep;
}

}  // namespace metascreen
