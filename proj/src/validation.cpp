#include "metascreen/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "metascreen/parallel.hpp"
#include "metascreen/resonance.hpp"

namespace metascreen {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

std::string str(const char* fmt, ...) {
    char buf[4096];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

double max_abs(const Mat2c& a) { return a.cwiseAbs().maxCoeff(); }

// The section-4 benchmark: disk r = 0.2 at (0, 0.5), rho = rho~ = lam = lam~ = 1, alpha = 0.5 omega / sqrt(mu).
struct Benchmark {
    double mu = 1e-3;
    double mu_inclusion = 1e6;
    double delta4 = 0.5;
    Material inclusion() const { return Material(1.0, mu_inclusion, 1.0); }
    Material background() const { return Material(1.0, mu, 1.0); }
    AlphaRule alpha_rule() const {
        const double d = delta4, s = std::sqrt(mu);
        return [d, s](double w) { return d * w / s; };
    }
    ResonanceInputs inputs() const {
        ResonanceInputs in;
        in.inclusion = inclusion();
        in.background = background();
        in.alpha_rule = alpha_rule();
        // M is converged to 1e-13 at this area rule (criterion 9 checks it against a brute-force oracle)
        in.n_r = 4;
        in.n_t = 16;
        return in;
    }
};

const NodeSet& disk_nodes(int n) {
    static std::map<int, NodeSet> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, quadrature_nodes(make_curve(CurveParams{}), n)).first;
    return it->second;
}

struct SharedState {
    std::optional<std::vector<PredictedResonance>> predictions;
    std::vector<std::string> prediction_notes;
};

const std::vector<PredictedResonance>& benchmark_predictions(SharedState& st, const ValidationOptions& opt) {
    if (!st.predictions) {
        const Benchmark b;
        std::vector<double> grid;
        for (int k = 0; k < 34; ++k) grid.push_back(0.05 + 0.55 * k / 33.0);
        st.predictions = predict_resonances(disk_nodes(opt.n_scan), b.inputs(), grid, &st.prediction_notes);
    }
    return *st.predictions;
}

// (mu Lap + (lam+mu) grad div + rho w^2) G by fourth-order central differences, relative to the largest term.
double lame_residual(const GreenFunction& G, const Vec2& x, const Vec2& y, double h) {
    const Material& m = G.material();
    auto g = [&](int a, int b) { return G.value(x + Vec2(a * h, b * h), y); };
    const double d1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    const double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    Mat2c g11 = Mat2c::Zero(), g22 = Mat2c::Zero(), g12 = Mat2c::Zero();
    for (int i = 0; i < 5; ++i) {
        g11 += d2[i] * g(i - 2, 0);
        g22 += d2[i] * g(0, i - 2);
        for (int j = 0; j < 5; ++j)
            if (i != 2 && j != 2) g12 += d1[i] * d1[j] * g(i - 2, j - 2);
    }
    g11 /= h * h;
    g22 /= h * h;
    g12 /= h * h;
    const Mat2c g0 = g(0, 0);
    const Mat2c lap = g11 + g22;
    Mat2c graddiv;
    for (int j = 0; j < 2; ++j) {
        graddiv(0, j) = g11(0, j) + g12(1, j);
        graddiv(1, j) = g12(0, j) + g22(1, j);
    }
    const double rw2 = m.rho * G.omega() * G.omega();
    const double scale = std::max({m.mu * lap.norm(), (m.lam + m.mu) * graddiv.norm(), rw2 * g0.norm()});
    return (m.mu * lap + (m.lam + m.mu) * graddiv + rw2 * g0).norm() / scale;
}

double periodic_distance(const Vec2& a, const Vec2& b) {
    double d = 1e300;
    for (int s = -1; s <= 1; ++s) d = std::min(d, (a - b + Vec2(s, 0.0)).norm());
    return d;
}

CriterionResult pde_residual(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    int pairs = 0;
    for (int p = 0; p < 5; ++p) {
        const Material m(0.5 + 2.0 * U(rng), 0.5 + U(rng), 0.5 + U(rng));
        const double omega = 0.3 + 3.0 * U(rng);
        const double alpha = 0.9 * wavenumbers(m, omega).k_p * (2.0 * U(rng) - 1.0);
        // at the default tail tolerance the truncation point moves between stencil points and the
        // 1e-11 steps are amplified by 1/h^2; 1e-13 keeps them below the stencil error
        TruncationPolicy pol;
        pol.tol = 1e-13;
        const GreenFunction G(m, omega, alpha, pol);
        for (int i = 0; i < 20; ++i) {
            const Vec2 y(U(rng) - 0.5, 0.2 + 0.5 * U(rng));
            Vec2 x;
            do {
                x = Vec2(U(rng) - 0.5, 0.1 + 0.8 * U(rng));
            } while (periodic_distance(x, y) < 0.15);
            worst = std::max(worst, lame_residual(G, x, y, 1e-3));
            ++pairs;
        }
    }
    CriterionResult r;
    r.passed = worst < 1e-5;
    r.detail = str("max relative residual %.2e over %d pairs, 5 parameter sets, fourth-order stencil, step 1e-3 (< 1e-5)", worst, pairs);
    return r;
}

CriterionResult quasi_periodicity(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    TruncationPolicy pol;
    pol.tol = 1e-10;
    double qp = 0.0, dir = 0.0, scale = 0.0;
    for (int p = 0; p < 5; ++p) {
        const Material m(0.5 + 2.0 * U(rng), 0.5 + U(rng), 0.5 + U(rng));
        const double omega = p == 0 ? 0.0 : 3.0 * U(rng);
        const double alpha = kPi * (2.0 * U(rng) - 1.0);
        const GreenFunction G(m, omega, alpha, pol);
        const cplx ph = std::exp(kI * alpha);
        for (int i = 0; i < 20; ++i) {
            const Vec2 y(U(rng) - 0.5, 0.05 + 0.9 * U(rng));
            Vec2 x;
            do {
                x = Vec2(U(rng) - 0.5, 0.05 + 0.9 * U(rng));
            } while (periodic_distance(x, y) < 0.05);
            const Mat2c g = G.value(x, y);
            scale = std::max(scale, max_abs(g));
            qp = std::max(qp, max_abs(G.value(x + Vec2(1.0, 0.0), y) - ph * g));
            dir = std::max(dir, max_abs(G.value(x, Vec2(y.x(), 0.0))));
        }
    }
    CriterionResult r;
    r.passed = qp < 1e-9 && dir < 1e-9;
    r.detail = str("max |G(x+e1,y) - e^{ia} G(x,y)| = %.2e, max |G(x,(y1,0))| = %.2e (< 1e-9; max |G| = %.2f, "
                   "tail tolerance 1e-10)",
                   qp, dir, scale);
    return r;
}

// Residual of the mode ODE for the columns of c_l at x, relative to its largest term. The step is
// h_unit over the mode's wavenumber scale, so evanescent modes are resolved alike.
double mode_ode_residual(int n, double x, const Material& m, double omega, double alpha, double h_unit) {
    const double beta = alpha + 2.0 * kPi * n;
    const double h = h_unit / std::max({std::abs(beta), wavenumbers(m, omega).k_s, 1.0});
    const double M = m.p_modulus(), rw2 = m.rho * omega * omega;
    const Mat2c c0 = mode_coefficient(n, x, m, omega, alpha);
    const Mat2c cp = mode_coefficient(n, x + h, m, omega, alpha);
    const Mat2c cm = mode_coefficient(n, x - h, m, omega, alpha);
    const Mat2c d1 = (cp - cm) / (2.0 * h), d2 = (cp - 2.0 * c0 + cm) / (h * h);
    double worst = 0.0, scale = 0.0;
    for (int j = 0; j < 2; ++j) {
        const cplx t[6] = {(-M * beta * beta + rw2) * c0(0, j), m.mu * d2(0, j), kI * (m.lam + m.mu) * beta * d1(1, j),
                           (-m.mu * beta * beta + rw2) * c0(1, j), M * d2(1, j), kI * (m.lam + m.mu) * beta * d1(0, j)};
        worst = std::max({worst, std::abs(t[0] + t[1] + t[2]), std::abs(t[3] + t[4] + t[5])});
        for (const cplx& v : t) scale = std::max(scale, std::abs(v));
    }
    return worst / scale;
}

CriterionResult mode_ode(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst[3] = {0.0, 0.0, 0.0};
    int count[3] = {0, 0, 0};
    for (int k = 0; k < 30; ++k) {
        const int target = k % 3;  // 0: case I, 1: case II, 2: case III
        const Material m(0.5 + 2.0 * U(rng), 0.5 + U(rng), 0.5 + U(rng));
        const double omega = 1.0 + 4.0 * U(rng);
        const WaveNumbers wn = wavenumbers(m, omega);
        double beta = 0.0;
        if (target == 0) beta = wn.k_s * (1.1 + 2.0 * U(rng));
        if (target == 1) beta = wn.k_p + (wn.k_s - wn.k_p) * (0.1 + 0.8 * U(rng));
        if (target == 2) beta = wn.k_p * 0.9 * U(rng);
        if (U(rng) < 0.5) beta = -beta;
        const int n = static_cast<int>(std::floor(5.0 * U(rng))) - 2;
        const double alpha = beta - 2.0 * kPi * n;
        const ModeCase c = mode_case(n, alpha, wn);
        const int got = c == ModeCase::I ? 0 : c == ModeCase::II ? 1 : 2;
        double x = 0.0;
        while (std::abs(x) < 0.05) x = -0.5 + 1.7 * U(rng);
        worst[got] = std::max(worst[got], mode_ode_residual(n, x, m, omega, alpha, 3e-4));
        ++count[got];
    }
    const double w = std::max({worst[0], worst[1], worst[2]});
    CriterionResult r;
    r.passed = w < 1e-7 && count[0] > 0 && count[1] > 0 && count[2] > 0;
    r.detail = str("max relative residual: case I %.2e (%d modes), case II %.2e (%d), case III %.2e (%d) (< 1e-7); "
                   "step 3e-4 / max(|alpha + l|, k_s, 1)",
                   worst[0], count[0], worst[1], count[1], worst[2], count[2]);
    return r;
}

BoundaryDensity smooth_density(const NodeSet& ns) {
    return sample_density(ns, [](const Vec2& x) {
        return Vec2c(std::cos(3.0 * x.x()) + 0.3, cplx(x.y() * x.x(), 0.5 * std::sin(2.0 * x.y())));
    });
}

// max over the nodes of the coarse set of |K*_coarse psi - K*_fine psi| relative to max |K*_fine psi|
double kstar_self_convergence(int n, const Material& m, double omega, double alpha) {
    const NodeSet& a = disk_nodes(n);
    const NodeSet& b = disk_nodes(2 * n);
    const BoundaryDensity ka = assemble_kstar(a, m, omega, alpha).apply(smooth_density(a));
    const BoundaryDensity kb = assemble_kstar(b, m, omega, alpha).apply(smooth_density(b));
    double e = 0.0, s = 0.0;
    for (int j = 0; j < n; ++j) {
        e = std::max(e, (density_at(ka, j) - density_at(kb, 2 * j)).norm());
        s = std::max(s, density_at(kb, 2 * j).norm());
    }
    return e / s;
}

CriterionResult jump_relations() {
    const Material m(1.0, 1.0, 1.0);
    const double omega = 0.5, alpha = 0.3, eps = 1e-4;
    const JumpReport j128 = jump_check(smooth_density(disk_nodes(128)), disk_nodes(128), m, omega, alpha, eps, {}, 8);
    const JumpReport j256 = jump_check(smooth_density(disk_nodes(256)), disk_nodes(256), m, omega, alpha, eps, {}, 16);
    const double d64 = kstar_self_convergence(64, m, omega, alpha);
    const double d128 = kstar_self_convergence(128, m, omega, alpha);
    const double e128 = std::max(j128.err_plus_extrap, j128.err_minus_extrap);
    const double e256 = std::max(j256.err_plus_extrap, j256.err_minus_extrap);
    CriterionResult r;
    r.passed = e128 < 1e-4 && e256 < 1e-4 && d128 < d64;
    r.detail = str("eps-extrapolated +/- errors n=128: %.2e/%.2e, n=256: %.2e/%.2e (< 1e-4); raw at eps n=128: "
                   "%.2e/%.2e; K* self-convergence 64->128 %.2e, 128->256 %.2e (decreasing)",
                   j128.err_plus_extrap, j128.err_minus_extrap, j256.err_plus_extrap, j256.err_minus_extrap,
                   j128.err_plus, j128.err_minus, d64, d128);
    return r;
}

CriterionResult rigid_spectrum() {
    const NodeSet& ns = disk_nodes(128);
    const Benchmark b;
    const RigidBasis rb = rigid_basis(ns);
    const CMatrix ortho = gram(rb.f, rb.f, ns) - CMatrix::Identity(3, 3);
    double eig = 0.0, bi = 0.0;
    // a small alpha and the benchmark alpha near its resonance
    for (double alpha : {0.3, b.alpha_rule()(0.4668)}) {
        const WBasis w = psi_basis(ns, rb, b.inclusion(), alpha);
        eig = std::max(eig, w.eigen_residual.maxCoeff());
        bi = std::max(bi, (gram(rb.f, w.psi, ns) - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff());
    }
    const double orth = ortho.cwiseAbs().maxCoeff();
    CriterionResult r;
    r.passed = eig < 1e-4 && orth < 1e-10 && bi < 1e-6;
    r.detail = str("max ||K~* psi - psi/2|| / ||psi|| = %.2e (< 1e-4), orthonormality %.2e (< 1e-10), "
                   "biorthogonality %.2e (< 1e-6), n = 128",
                   eig, orth, bi);
    return r;
}

std::vector<double> window(double center, double step, int half) {
    std::vector<double> g;
    for (int k = -half; k <= half; ++k) g.push_back(center * (1.0 + step * k));
    return g;
}

constexpr double kWindowStep = 0.005;  // relative grid step of the scans around a prediction
constexpr int kWindowHalf = 12;        // +-6%

CriterionResult resonance_cross_validation(SharedState& st, const ValidationOptions& opt) {
    const Benchmark b;
    const NodeSet& ns = disk_nodes(opt.n_scan);
    const auto& preds = benchmark_predictions(st, opt);
    CriterionResult r;
    if (preds.empty()) {
        r.detail = "no admissible resonance predicted from M on (0.05, 0.6]";
        for (const auto& s : st.prediction_notes) r.detail += "; " + s;
        return r;
    }
    r.passed = true;
    Benchmark stiff = b;
    stiff.mu_inclusion = 1e7;
    for (const auto& p : preds) {
        const std::vector<double> grid = window(p.omega, kWindowStep, kWindowHalf);
        const ScanReport s6 = sigma_min_scan(grid, ns, b.inclusion(), b.background(), b.alpha_rule());
        const ScanReport s7 = sigma_min_scan(grid, ns, stiff.inclusion(), stiff.background(), stiff.alpha_rule());
        const Dip* best = nullptr;
        for (const Dip& d : s6.minima)
            if (!best || std::abs(d.omega - p.omega) < std::abs(best->omega - p.omega)) best = &d;
        if (!best) {
            r.passed = false;
            r.detail += str("omega_%d = %.5f: no local minimum of sigma_min within +-6%%; ", p.branch, p.omega);
            continue;
        }
        const double offset = std::abs(best->omega - p.omega) / p.omega;
        double deeper = 1e300;
        for (int k = std::max(0, best->index - 1); k <= std::min<int>(grid.size() - 1, best->index + 1); ++k)
            if (std::isfinite(s7.sigma_min[k])) deeper = std::min(deeper, s7.sigma_min[k]);
        const double ratio = s6.sigma_min[best->index] / deeper;
        const bool ok = offset < 0.05 && ratio >= 10.0;
        r.passed = r.passed && ok;
        r.detail += str("omega_%d = %.5f (alpha %.3f): sigma_min minimum at %.5f, offset %.2f%% (< 5%%), "
                        "depth %.2f x median; mu~ 1e6 -> 1e7 deepens it %.3fx (>= 10), median %.3fx; ",
                        p.branch, p.omega, p.alpha, best->omega, 100.0 * offset, best->depth, ratio,
                        s6.median / s7.median);
    }
    r.detail += str("%zu admissible prediction(s), n = %d", preds.size(), opt.n_scan);
    return r;
}

double interior_energy(const Benchmark& b, const NodeSet& ns, const AreaRule& area, double omega) {
    IncidentSpec spec;
    spec.theta = Vec2(0.0, 1.0);
    spec.omega = omega;
    spec.background = b.background();
    const double alpha = b.alpha_rule()(omega);
    const BlockSystem sys = assemble_system(ns, b.inclusion(), b.background(), omega, alpha);
    const DensityPair d = solve_scattering(sys, incident_data(ns, spec));
    const auto u = total_field(area.x, d, ns, spec, b.inclusion(), alpha, NearPolicy::Adaptive);
    double e = 0.0;
    for (size_t k = 0; k < u.size(); ++k) e += area.weight[k] * u[k].squaredNorm();
    return e;
}

double tau_norm(const Benchmark& b, const NodeSet& ns, const AreaRule& area, double omega) {
    IncidentSpec spec;
    spec.theta = Vec2(0.0, 1.0);
    spec.omega = omega;
    spec.background = b.background();
    const double alpha = b.alpha_rule()(omega);
    const RigidBasis rb = rigid_basis(ns);
    const WBasis w = psi_basis(ns, rb, b.inclusion(), alpha);
    const Mat3c M = m_matrix(ns, area, w, rb, alpha);
    const StaticPieces sp = static_pieces(ns, b.inclusion(), b.background(), alpha);
    const NormalizationConstants nc = normalization_constants(ns, rb, sp.s_bg);
    return tau_coefficients(ns, sp, rb, w, nc, M, spec, b.inclusion()).tau.norm();
}

CriterionResult near_field_blowup(SharedState& st, const ValidationOptions& opt) {
    const Benchmark b;
    const NodeSet& ns = disk_nodes(opt.n_scan);
    const auto& preds = benchmark_predictions(st, opt);
    CriterionResult r;
    if (preds.empty()) {
        r.detail = "no admissible resonance predicted from M";
        return r;
    }
    const AreaRule energy_rule = interior_quadrature(*ns.curve, 8, 32);
    const AreaRule m_rule = interior_quadrature(*ns.curve, b.inputs().n_r, b.inputs().n_t);
    r.passed = true;
    for (const auto& p : preds) {
        // (a) interior energy next to omega_i against omega_i / 2
        double peak = 0.0;
        std::string err;
        for (double s : {-1.0, 1.0}) {
            try {
                peak = std::max(peak, interior_energy(b, ns, energy_rule, p.omega * (1.0 + s * kWindowStep)));
            } catch (const SingularSystemError& e) {
                err = e.what();
            }
        }
        const double base = interior_energy(b, ns, energy_rule, 0.5 * p.omega);
        const double gain = peak / base;
        const bool ok_a = err.empty() && gain >= 100.0;
        r.detail += str("omega_%d = %.5f: interior energy at omega_i(1 +- %.3f) / at omega_i/2 = %.1f (>= 100)%s; ",
                        p.branch, p.omega, kWindowStep, gain, err.empty() ? "" : (" solve failed: " + err).c_str());

        // (b) peak |tau| at omega_i(1 +- 0.01) for mu = 1e-2, 1e-3, 1e-4 with mu~ = 1/mu
        const double mus[3] = {1e-2, 1e-3, 1e-4};
        double peaks[3];
        bool ok_b = true;
        for (int k = 0; k < 3; ++k) {
            Benchmark bk = b;
            bk.mu = mus[k];
            bk.mu_inclusion = 1.0 / mus[k];
            const double guess = p.omega * std::sqrt(mus[k] / b.mu);
            const PredictedResonance pk = predict_resonance(ns, bk.inputs(), p.branch, guess);
            if (!pk.converged) ok_b = false;
            peaks[k] = std::max(tau_norm(bk, ns, m_rule, pk.omega * 0.99), tau_norm(bk, ns, m_rule, pk.omega * 1.01));
        }
        double misfit = 1.0;
        for (int k = 0; k < 3; ++k) {
            const double s = peaks[k] * mus[k] / (peaks[1] * mus[1]);
            misfit = std::max({misfit, s, 1.0 / s});
        }
        // least-squares exponent of peak |tau| against mu
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int k = 0; k < 3; ++k) {
            const double x = std::log(mus[k]), y = std::log(peaks[k]);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
        }
        const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
        ok_b = ok_b && misfit <= 3.0;
        r.detail += str("peak |tau| at mu = 1e-2, 1e-3, 1e-4: %.3g, %.3g, %.3g; largest deviation from 1/mu "
                        "scaling %.2fx (<= 3), fitted exponent %.3f; ",
                        peaks[0], peaks[1], peaks[2], misfit, slope);
        r.passed = r.passed && ok_a && ok_b;
    }
    r.detail += str("normal incidence, n = %d", opt.n_scan);
    return r;
}

CriterionResult absence(const ValidationOptions& opt) {
    const NodeSet& ns = disk_nodes(opt.n_scan);
    const Material inc(1.0, 1.0, 1.0), bg(1.0, 1e6, 1.0);
    const double delta5 = 0.5;
    std::vector<double> grid;
    for (int k = 1; k <= 40; ++k) grid.push_back(0.001 + 0.199 * k / 40.0);
    const AlphaRule rule = [bg, delta5](double w) { return delta5 * wavenumbers(bg, w).k_s; };
    const AbsenceReport a = absence_check(grid, ns, inc, bg, rule, 0.3);
    double lowest = 1e300;
    for (const Dip& d : a.scan.minima) lowest = std::min(lowest, d.depth);
    CriterionResult r;
    r.passed = a.passed;
    r.detail = str("min sigma_min(A)/||A|| = %.3e (> 1e-4); %zu local minima below 0.5 x median (deepest minimum "
                   "%s x median); sigma_min(1/2 I + K*) = %.4f at alpha = 0.3 (> 0.01); %zu points on (0.001, 0.2], "
                   "delta5 = 0.5, n = %d",
                   a.min_ratio, a.scan.dips.size(),
                   a.scan.minima.empty() ? "none" : str("%.3f", lowest).c_str(), a.sigma_half_kstar, grid.size(),
                   opt.n_scan);
    for (const auto& s : a.notes) r.detail += "; " + s;
    return r;
}

// m_ij by plain product quadrature: a polar Gauss x midpoint tensor grid over D and the trapezoid rule on
// the trigonometric interpolant of psi at 4n boundary points, with no singular or near-boundary corrections.
Mat3c brute_force_m(const NodeSet& ns, const WBasis& w, const RigidBasis& rb, double alpha, int nb, int nr, int nt) {
    const int n = ns.n;
    const BoundaryCurve& cv = *ns.curve;
    CMatrix psi = CMatrix::Zero(2 * nb, 3);
    for (int l = 0; l < nb; ++l) {
        const double t = 2.0 * kPi * l / nb;
        for (int j = 0; j < n; ++j) {
            const double d = t - ns.t[j];
            // Dirichlet kernel of even order n
            const double c = std::abs(std::sin(0.5 * d)) < 1e-14 ? 1.0 : std::sin(0.5 * n * d) / (n * std::tan(0.5 * d));
            psi.row(2 * l) += c * w.psi.row(2 * j);
            psi.row(2 * l + 1) += c * w.psi.row(2 * j + 1);
        }
    }
    std::vector<Vec2> bx(nb);
    std::vector<double> bw(nb);
    for (int l = 0; l < nb; ++l) {
        const double t = 2.0 * kPi * l / nb;
        bx[l] = cv.point(t);
        bw[l] = cv.tangent(t).norm() * 2.0 * kPi / nb;
    }
    std::vector<double> gx, gw;
    gauss_legendre(nr, gx, gw);
    const GreenFunction g(leading_material(), 0.0, alpha);
    std::vector<Mat3c> part(nt, Mat3c::Zero());
    parallel_for(nt, [&](int b) {
        const double th = 2.0 * kPi * (b + 0.5) / nt, R = cv.polar_radius(th);
        for (int a = 0; a < nr; ++a) {
            const double rr = 0.5 * (gx[a] + 1.0) * R;
            const double wt = 0.5 * gw[a] * R * rr * 2.0 * kPi / nt;
            const Vec2 y = cv.center() + rr * Vec2(std::cos(th), std::sin(th));
            Eigen::Matrix<cplx, 2, 3> u = Eigen::Matrix<cplx, 2, 3>::Zero();
            for (int l = 0; l < nb; ++l) {
                const Mat2c G = bw[l] * g.value(y, bx[l]);
                for (int i = 0; i < 3; ++i) u.col(i) += G * psi.block<2, 1>(2 * l, i);
            }
            for (int j = 0; j < 3; ++j) {
                const Vec2 f = rb.at(j, y);
                for (int i = 0; i < 3; ++i) part[b](i, j) += wt * (u(0, i) * f.x() + u(1, i) * f.y());
            }
        }
    });
    Mat3c M = Mat3c::Zero();
    for (const auto& p : part) M += p;
    return M;
}

CriterionResult m_oracle() {
    const int n = 128, nr = 4, nt = 16;
    const NodeSet& ns = disk_nodes(n);
    const Benchmark b;
    const double alpha = b.alpha_rule()(0.4668);
    const RigidBasis rb = rigid_basis(ns);
    const WBasis w = psi_basis(ns, rb, b.inclusion(), alpha);
    const Mat3c M = m_matrix(ns, interior_quadrature(*ns.curve, nr, nt), w, rb, alpha);
    const Mat3c O = brute_force_m(ns, w, rb, alpha, 4 * n, 4 * nr, 4 * nt);
    const double scale = M.cwiseAbs().maxCoeff();
    const double err = (O - M).cwiseAbs().maxCoeff() / scale;
    double entry = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (std::abs(M(i, j)) > 1e-3 * scale) entry = std::max(entry, std::abs(O(i, j) - M(i, j)) / std::abs(M(i, j)));
    CriterionResult r;
    r.passed = err < 1e-5;
    r.detail = str("max |m_ij - oracle_ij| / max |m_ij| = %.2e (< 1e-5), worst entrywise relative %.2e; m_matrix at "
                   "n = %d with a %d x %d area rule, oracle at %d boundary points and a %d x %d tensor grid, "
                   "alpha = %.3f",
                   err, entry, n, nr, nt, 4 * n, 4 * nr, 4 * nt, alpha);
    return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double a = std::log(x[i]), c = std::log(y[i]);
        sx += a, sy += c, sxx += a * a, sxy += a * c;
    }
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

CriterionResult incident_identities(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double fd = 0.0;
    for (int p = 0; p < 20; ++p) {
        IncidentSpec s;
        s.background = Material(0.5 + 2.0 * U(rng), 0.5 + U(rng), 0.5 + U(rng));
        s.omega = 0.1 + 3.0 * U(rng);
        const double ang = 1.4 * (2.0 * U(rng) - 1.0);
        s.theta = Vec2(std::sin(ang), std::cos(ang));
        const Vec2 x(U(rng) - 0.5, U(rng));
        const double phi = 2.0 * kPi * U(rng);
        const Vec2 nu(std::cos(phi), std::sin(phi));
        const double h = 1e-5;
        Mat2c grad;
        grad.col(0) = (incident_p_wave(x + Vec2(h, 0), s) - incident_p_wave(x - Vec2(h, 0), s)) / (2 * h);
        grad.col(1) = (incident_p_wave(x + Vec2(0, h), s) - incident_p_wave(x - Vec2(0, h), s)) / (2 * h);
        const Material& m = s.background;
        const Vec2c nuc = nu.cast<cplx>();
        const Vec2c t = m.lam * grad.trace() * nuc + m.mu * (grad + grad.transpose()) * nuc;
        const Vec2c c = incident_p_conormal(x, nu, s);
        fd = std::max(fd, (t - c).norm() / std::max(c.norm(), 1e-300));
    }

    const Material bg(0.8, 1.0, 1.0);
    const Vec2 x(0.1, 0.55), nu = Vec2(1.0, 1.0).normalized();
    std::vector<double> om, ew, ec, ep;
    for (double w = 1e-2; w > 1e-3; w *= 0.5) {
        IncidentSpec s;
        s.background = bg;
        s.omega = w;
        s.theta = Vec2(std::sin(0.35), std::cos(0.35));
        om.push_back(w);
        ew.push_back((incident_p_wave(x, s) - incident_p_wave_leading(x, s)).norm());
        ec.push_back((incident_p_conormal(x, nu, s) - incident_p_conormal_leading(nu, s)).norm());
        ep.push_back((incident_p_conormal(x, nu, s) - incident_p_conormal_leading(nu, s, ExpansionForm::Printed)).norm());
    }
    const double sw = fit_slope(om, ew), sc = fit_slope(om, ec), sp = fit_slope(om, ep);
    CriterionResult r;
    r.passed = fd < 1e-7 && std::abs(sw - 2.0) <= 0.1 && std::abs(sc - 2.0) <= 0.1;
    r.detail = str("conormal vs finite differences %.2e (< 1e-7); log-log error slope of the leading terms: "
                   "displacement %.3f, conormal %.3f (2 +- 0.1); the conormal with the lam terms as printed has "
                   "slope %.3f",
                   fd, sw, sc, sp);
    return r;
}

}  // namespace

std::string criterion_name(int id) {
    switch (id) {
        case 1: return "Green's function PDE residual";
        case 2: return "quasi-periodicity and Dirichlet condition";
        case 3: return "mode ODE residual";
        case 4: return "jump relations";
        case 5: return "rigid-motion spectrum";
        case 6: return "resonance cross-validation";
        case 7: return "near-field blow-up";
        case 8: return "absence regime";
        case 9: return "m_matrix oracle";
        case 10: return "incident-data identities";
        default: throw std::invalid_argument("criterion_name: no criterion " + std::to_string(id));
    }
}

std::vector<CriterionResult> run_validation(const std::vector<int>& ids, const ValidationOptions& opt) {
    SharedState st;
    std::vector<CriterionResult> out;
    for (int id : ids) {
        const std::string name = criterion_name(id);
        if (opt.progress) opt.progress(id, name);
        std::mt19937 rng(opt.seed + static_cast<unsigned>(id));
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            switch (id) {
                case 1: r = pde_residual(rng); break;
                case 2: r = quasi_periodicity(rng); break;
                case 3: r = mode_ode(rng); break;
                case 4: r = jump_relations(); break;
                case 5: r = rigid_spectrum(); break;
                case 6: r = resonance_cross_validation(st, opt); break;
                case 7: r = near_field_blowup(st, opt); break;
                case 8: r = absence(opt); break;
                case 9: r = m_oracle(); break;
                case 10: r = incident_identities(rng); break;
            }
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.id = id;
        r.name = name;
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (opt.on_result) opt.on_result(r);
        out.push_back(r);
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    return str("criterion %2d %s  %s: ", r.id, r.passed ? "PASS" : "FAIL", r.name.c_str()) + r.detail +
           str(" [%.1fs]", r.seconds);
}

}  // namespace metascreen
