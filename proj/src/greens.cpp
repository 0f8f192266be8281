#include "metascreen/greens.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "special.hpp"

namespace metascreen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
const cplx kI(0.0, 1.0);

// Expansion order: terms of size |l|^{m-k} below this are left to the numerical remainder.
constexpr int kMinOrder = -6;
constexpr int kTaylorDepth = 7;

using Key = std::tuple<int, int, int>;  // (power of D, power of |l| or kappa, power of sgn l)
using PolyMap = std::map<Key, cplx>;

PolyMap mul(const PolyMap& x, const PolyMap& y) {
    PolyMap r;
    for (const auto& [kx, cx] : x)
        for (const auto& [ky, cy] : y) {
            const Key k{std::get<0>(kx) + std::get<0>(ky), std::get<1>(kx) + std::get<1>(ky),
                        (std::get<2>(kx) + std::get<2>(ky)) % 2};
            r[k] += cx * cy;
        }
    return r;
}

void add_to(PolyMap& x, const PolyMap& y, cplx f) {
    for (const auto& [k, c] : y) x[k] += f * c;
}

// d/d(kappa^2) of D^k kappa^m e^{-kappa D}.
PolyMap d_du(const PolyMap& f) {
    PolyMap r;
    for (const auto& [key, c] : f) {
        const auto [k, m, a] = key;
        if (m != 0) r[{k, m - 2, a}] += c * (0.5 * m);
        r[{k + 1, m - 1, a}] += -0.5 * c;
    }
    return r;
}

double mat_max(const Mat2c& m) {
    double r = 0.0;
    for (int i = 0; i < 4; ++i) r = std::max(r, std::norm(m(i)));
    return std::sqrt(r);
}

cplx kappa(double beta, double k) {
    const double b = std::abs(beta);
    const double v = (b - k) * (b + k);
    return v >= 0.0 ? cplx(std::sqrt(v), 0.0) : cplx(0.0, -std::sqrt(-v));
}

double reduce_alpha(double alpha) {
    double a = std::remainder(alpha, kTwoPi);
    if (a <= -kPi) a += kTwoPi;
    return a;
}

void check_degenerate(double beta, const WaveNumbers& wn) {
    const double b2 = beta * beta;
    const auto close = [&](double k) {
        const double k2 = k * k;
        return std::abs(b2 - k2) <= 1e-12 * std::max(k2, 1e-300) || (k2 == 0.0 && b2 == 0.0);
    };
    if (close(wn.k_s) || close(wn.k_p)) {
        std::ostringstream os;
        os << "degenerate mode: (alpha + l)^2 = " << b2 << " coincides with k_s^2 = " << wn.k_s * wn.k_s
           << " or k_p^2 = " << wn.k_p * wn.k_p << "; perturb omega";
        throw DegenerateModeError(os.str());
    }
}

}  // namespace

Material::Material(double lam_, double mu_, double rho_) : lam(lam_), mu(mu_), rho(rho_) {}

void Material::validate() const {
    std::vector<std::string> errs;
    if (!(mu > 0.0)) errs.push_back("mu must be positive");
    if (!(rho > 0.0)) errs.push_back("rho must be positive");
    if (!(lam + 2.0 * mu > 0.0)) errs.push_back("lam + 2 mu must be positive");
    if (!errs.empty()) {
        std::string msg = "invalid material: ";
        for (size_t i = 0; i < errs.size(); ++i) msg += (i ? "; " : "") + errs[i];
        throw std::invalid_argument(msg);
    }
}

WaveNumbers wavenumbers(const Material& m, double omega, double alpha) {
    m.validate();
    if (!(omega >= 0.0)) throw std::invalid_argument("omega must be non-negative");
    WaveNumbers w;
    w.omega = omega;
    w.alpha = alpha;
    w.c_p = std::sqrt(m.p_modulus() / m.rho);
    w.c_s = std::sqrt(m.mu / m.rho);
    w.k_p = omega / w.c_p;
    w.k_s = omega / w.c_s;
    w.alpha_below_kp = std::abs(alpha) < w.k_p;
    return w;
}

std::string to_string(ModeCase c) {
    switch (c) {
        case ModeCase::I: return "I";
        case ModeCase::II: return "II";
        case ModeCase::III: return "III";
    }
    return "?";
}

ModeCase mode_case(int n, double alpha, const WaveNumbers& wn) {
    const double beta = alpha + kTwoPi * n;
    check_degenerate(beta, wn);
    const double b2 = beta * beta;
    if (b2 >= wn.k_s * wn.k_s) return ModeCase::I;
    if (b2 >= wn.k_p * wn.k_p) return ModeCase::II;
    return ModeCase::III;
}

namespace {

template <class T>
std::complex<T> phi1_t(std::complex<T> z) {
    if (std::abs(z) < T(1e-5)) return T(1) + z * (T(0.5) + z * (T(1) / T(6) + z / T(24)));
    const T a = z.real(), b = z.imag();
    const T sh = std::sin(b / 2);
    const std::complex<T> em1(std::expm1(a) * std::cos(b) - 2 * sh * sh, std::exp(a) * std::sin(b));
    return em1 / z;
}

// Closed forms of c_l(x) and, for x != 0, d/dx c_l(x), evaluated in precision T.
template <class T>
void mode_closed_form(int n, double x, const Material& m, double omega, double alpha, Mat2c* c, Mat2c* dc) {
    using C = std::complex<T>;
    const WaveNumbers wn = wavenumbers(m, omega, alpha);
    const double beta_d = alpha + kTwoPi * n;
    check_degenerate(beta_d, wn);
    const T beta = T(alpha) + T(2) * std::numbers::pi_v<T> * T(n);
    const T mu = m.mu, M = T(m.lam) + 2 * mu, rw2 = T(m.rho) * T(omega) * T(omega);
    const T A = (1 / mu - 1 / M) / 2;
    const T ks2 = rw2 / mu, kp2 = rw2 / M;
    auto kap = [&](T k2) {
        const T v = beta * beta - k2;
        return v >= 0 ? C(std::sqrt(v), 0) : C(0, -std::sqrt(-v));
    };
    const C ks = kap(ks2), kp = kap(kp2);
    const T D = std::abs(T(x)), sd = x >= 0.0 ? 1 : -1;
    const C sum = ks + kp;
    const C dk = -(ks2 - kp2) / sum;
    const C ep = std::exp(-kp * D), es = std::exp(-ks * D);
    const C ph = phi1_t<T>(-dk * D);
    const C X = D * ep * ph;
    const C DD = ep * (T(1) - ks * D * ph);
    const C ib(0, beta);
    if (c) {
        const C c11 = -A * DD / sum - ep / (2 * M * kp);
        const C c22 = A * DD / sum - es / (2 * mu * ks);
        const C c12 = ib * A * sd * X / sum;
        *c << cplx(c11), cplx(c12), cplx(c12), cplx(c22);
    }
    if (dc) {
        const T b2 = beta * beta;
        const C d11 = sd * (-b2 * A * X / sum + es / (2 * mu));
        const C d22 = sd * (b2 * A * X / sum + ep / (2 * M));
        const C d12 = ib * A * DD / sum;
        *dc << cplx(d11), cplx(d12), cplx(d12), cplx(d22);
    }
}

}  // namespace

// c_l for the normalization (L + rho omega^2) G = delta I. With kappa = sqrt(beta^2 - k^2):
//   c11 = (kappa_s e_s - kappa_p e_p)/(2 rho omega^2) - e_p/(2 (lam+2mu) kappa_p)
//   c22 = -(kappa_s e_s - kappa_p e_p)/(2 rho omega^2) - e_s/(2 mu kappa_s)
//   c12 = i beta sgn(x) (e_s - e_p)/(2 rho omega^2)
// The differences are rewritten through phi1 so that omega -> 0 is harmless. The standalone
// entry points run in extended precision; the kernel sums use the double version below.
Mat2c mode_coefficient(int n, double x, const Material& m, double omega, double alpha) {
    Mat2c c;
    mode_closed_form<long double>(n, x, m, omega, alpha, &c, nullptr);
    return c;
}

Mat2c mode_coefficient_deriv(int n, double x, const Material& m, double omega, double alpha) {
    if (x == 0.0) throw std::invalid_argument("mode_coefficient_deriv: derivative is discontinuous at x = 0");
    Mat2c dc;
    mode_closed_form<long double>(n, x, m, omega, alpha, nullptr, &dc);
    return dc;
}

GreenFunction::GreenFunction(const Material& m, double omega, double alpha, const TruncationPolicy& policy)
    : mat_(m), omega_(omega), alpha_(alpha), alpha_red_(reduce_alpha(alpha)), policy_(policy) {
    const WaveNumbers wn = wavenumbers(m, omega, alpha);
    if (policy_.l_max < 1 || !(policy_.tol > 0.0)) throw std::invalid_argument("invalid truncation policy");
    ks2_ = wn.k_s * wn.k_s;
    kp2_ = wn.k_p * wn.k_p;
    const double M = m.p_modulus();
    sigma_ = 1.0 / m.mu + 1.0 / M;
    eta_ = 1.0 / m.mu - 1.0 / M;
    A_ = 0.5 * eta_;
    skip_zero_ = (omega == 0.0 && alpha_red_ == 0.0);
    n_prop_ = static_cast<int>(std::ceil((wn.k_s + kPi) / kTwoPi)) + 1;
    for (int n = -n_prop_; n <= n_prop_; ++n) {
        if (skip_zero_ && n == 0) continue;
        check_degenerate(alpha_red_ + kTwoPi * n, wn);
    }
    build_expansion();
}

GreenFunction::Mode GreenFunction::mode(int n) const {
    Mode md;
    md.beta = alpha_red_ + kTwoPi * n;
    md.ks = kappa(md.beta, std::sqrt(ks2_));
    md.kp = kappa(md.beta, std::sqrt(kp2_));
    return md;
}

void GreenFunction::mode_pair(const Mode& md, double d, Mat2c& c, Mat2c& dc) const {
    const double M = mat_.p_modulus();
    const double D = std::abs(d), sd = d >= 0.0 ? 1.0 : -1.0;
    const cplx sum = md.ks + md.kp;
    const cplx dk = -(ks2_ - kp2_) / sum;
    const cplx ep = std::exp(-md.kp * D), es = std::exp(-md.ks * D);
    const cplx ph = detail::phi1(-dk * D);
    const cplx X = D * ep * ph;
    const cplx DD = ep * (1.0 - md.ks * D * ph);
    const double b2 = md.beta * md.beta;
    const cplx ib = kI * md.beta;
    c(0, 0) = -A_ * DD / sum - ep / (2.0 * M * md.kp);
    c(1, 1) = A_ * DD / sum - es / (2.0 * mat_.mu * md.ks);
    c(0, 1) = c(1, 0) = ib * A_ * sd * X / sum;
    dc(0, 0) = sd * (-b2 * A_ * X / sum + es / (2.0 * mat_.mu));
    dc(1, 1) = sd * (b2 * A_ * X / sum + ep / (2.0 * M));
    dc(0, 1) = dc(1, 0) = ib * A_ * DD / sum;
}

// Large-|l| expansion of c_{alpha+l}(d) about (alpha, k^2) = 0, written through
//   p = e^{-kD}/(2k), h = k e^{-kD}/2, q = e^{-kD}/2   (k = kappa)
// as c11 = (h_s - h_p)/(rho w^2) - p_p/(lam+2mu), c22 = -(h_s - h_p)/(rho w^2) - p_s/mu,
// c12 = i beta sgn(d) (q_s - q_p)/(rho w^2), with kappa^2 = l^2 + delta, delta = 2 l alpha + alpha^2 - k^2.
void GreenFunction::build_expansion() {
    const double al = alpha_red_;
    const double M = mat_.p_modulus();
    const PolyMap dS{{{0, 1, 1}, 2.0 * al}, {{0, 0, 0}, al * al - ks2_}};
    const PolyMap dP{{{0, 1, 1}, 2.0 * al}, {{0, 0, 0}, al * al - kp2_}};
    const int J = kTaylorDepth;
    std::vector<PolyMap> h(J + 1), p(J + 1), q(J + 1), dSp(J + 1), dPp(J + 1);
    h[0] = {{{0, 1, 0}, 0.5}};
    p[0] = {{{0, -1, 0}, 0.5}};
    q[0] = {{{0, 0, 0}, 0.5}};
    dSp[0] = dPp[0] = {{{0, 0, 0}, 1.0}};
    for (int j = 1; j <= J; ++j) {
        h[j] = d_du(h[j - 1]);
        p[j] = d_du(p[j - 1]);
        q[j] = d_du(q[j - 1]);
        dSp[j] = mul(dSp[j - 1], dS);
        dPp[j] = mul(dPp[j - 1], dP);
    }
    PolyMap diff_h, diff_q, e11, e22;
    double fact = 1.0;
    for (int j = 1; j <= J; ++j) {
        fact *= j;
        PolyMap sym;
        for (int i = 0; i < j; ++i) add_to(sym, mul(dSp[i], dPp[j - 1 - i]), 1.0);
        add_to(diff_h, mul(h[j], sym), -eta_ / fact);
        add_to(diff_q, mul(q[j], sym), -eta_ / fact);
    }
    fact = 1.0;
    for (int j = 0; j <= J; ++j) {
        if (j > 0) fact *= j;
        add_to(e11, mul(p[j], dPp[j]), -1.0 / (M * fact));
        add_to(e22, mul(p[j], dSp[j]), -1.0 / (mat_.mu * fact));
    }
    add_to(e11, diff_h, 1.0);
    add_to(e22, diff_h, -1.0);
    const PolyMap e12 = mul(PolyMap{{{0, 1, 1}, kI}, {{0, 0, 0}, kI * al}}, diff_q);

    const PolyMap* src[3] = {&e11, &e22, &e12};
    for (int e = 0; e < 3; ++e) {
        PolyMap val, dD, dT;
        for (const auto& [key, c] : *src[e]) {
            const auto [k, m, a] = key;
            if (m - k < kMinOrder || c == cplx(0.0)) continue;
            val[key] += c;
            if (k > 0) dD[{k - 1, m, a}] += c * static_cast<double>(k);
            dD[{k, m + 1, a}] += -c;
            dT[{k, m + 1, (a + 1) % 2}] += kI * c;
        }
        const auto flatten = [](const PolyMap& pm) {
            Series s;
            for (const auto& [key, c] : pm)
                if (c != cplx(0.0)) s.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), c});
            return s;
        };
        ser_[e] = flatten(val);
        ser_D_[e] = flatten(dD);
        ser_T_[e] = flatten(dT);
    }
}

namespace {

struct PowTable {
    double Dp[16];
    double bp[24];  // index m + 12
    void fill(double D, double b) {
        Dp[0] = 1.0;
        for (int k = 1; k < 16; ++k) Dp[k] = Dp[k - 1] * D;
        bp[12] = 1.0;
        for (int m = 1; m < 12; ++m) bp[12 + m] = bp[11 + m] * b;
        const double ib = 1.0 / b;
        for (int m = 1; m <= 12; ++m) bp[12 - m] = bp[13 - m] * ib;
    }
};

}  // namespace

KernelJet GreenFunction::direct(double t, double d, bool want) const {
    const double shift = std::round(t);
    const double tr = t - shift;
    const cplx cell_phase = std::exp(kI * (alpha_red_ * shift));
    const double D = std::abs(d), sd = d >= 0.0 ? 1.0 : -1.0;
    const bool kummer = D < policy_.d_kummer;
    if (D == 0.0 && tr == 0.0) throw SingularEvaluationError("kernel evaluated at coincident points");

    KernelJet out;
    PowTable pw;

    auto eval = [&](const Series& s, double sgn) {
        cplx r = 0.0;
        for (const Term& tm : s) {
            const double v = pw.Dp[tm.k] * pw.bp[12 + tm.m] * ((tm.a && sgn < 0) ? -1.0 : 1.0);
            r += tm.c * v;
        }
        return r;
    };

    auto add = [&](int n, KernelJet& acc) {
        const Mode md = mode(n);
        Mat2c c, dc;
        mode_pair(md, d, c, dc);
        if (kummer && n != 0) {
            const double b = kTwoPi * std::abs(n), s = n > 0 ? 1.0 : -1.0;
            pw.fill(D, b);
            const double ex = std::exp(-b * D);
            const cplx e11 = eval(ser_[0], s) * ex, e22 = eval(ser_[1], s) * ex, e12 = eval(ser_[2], s) * ex;
            c(0, 0) -= e11;
            c(1, 1) -= e22;
            c(0, 1) -= sd * e12;
            c(1, 0) -= sd * e12;
            if (want) {
                dc(0, 0) -= sd * eval(ser_D_[0], s) * ex;
                dc(1, 1) -= sd * eval(ser_D_[1], s) * ex;
                const cplx f = eval(ser_D_[2], s) * ex;
                dc(0, 1) -= f;
                dc(1, 0) -= f;
            }
        }
        const cplx E = std::exp(kI * (md.beta * tr));
        acc.g += c * E;
        if (want) {
            acc.d1 += (kI * md.beta * E) * c;
            acc.d2 += dc * E;
        }
    };

    if (skip_zero_) {
        out.g(0, 0) = D / (2.0 * mat_.mu);
        out.g(1, 1) = D / (2.0 * mat_.p_modulus());
        out.d2(0, 0) = sd / (2.0 * mat_.mu);
        out.d2(1, 1) = sd / (2.0 * mat_.p_modulus());
    } else {
        add(0, out);
    }

    if (kummer) {
        // exact sum over l != 0 of the expansion terms
        const cplx wp(-kTwoPi * D, kTwoPi * tr), wm(-kTwoPi * D, -kTwoPi * tr);
        std::map<int, std::pair<cplx, cplx>> li;
        auto S = [&](int m, int a) {
            auto it = li.find(m);
            if (it == li.end())
                it = li.emplace(m, std::make_pair(detail::polylog_exp(-m, wp), detail::polylog_exp(-m, wm))).first;
            const double scale = std::pow(kTwoPi, m);
            return scale * (a ? it->second.first - it->second.second : it->second.first + it->second.second);
        };
        auto sum_series = [&](const Series& s) {
            cplx r = 0.0;
            for (const Term& tm : s) r += tm.c * std::pow(D, tm.k) * S(tm.m, tm.a);
            return r;
        };
        const cplx ea = std::exp(kI * (alpha_red_ * tr));
        const cplx v11 = sum_series(ser_[0]), v22 = sum_series(ser_[1]), v12 = sum_series(ser_[2]);
        Mat2c G;
        G << v11, sd * v12, sd * v12, v22;
        out.g += ea * G;
        if (want) {
            const cplx t11 = sum_series(ser_T_[0]), t22 = sum_series(ser_T_[1]), t12 = sum_series(ser_T_[2]);
            Mat2c Gt;
            Gt << t11, sd * t12, sd * t12, t22;
            out.d1 += ea * (kI * alpha_red_ * G + Gt);
            const cplx d11 = sum_series(ser_D_[0]), d22 = sum_series(ser_D_[1]), d12 = sum_series(ser_D_[2]);
            Mat2c Gd;
            Gd << sd * d11, d12, d12, sd * d22;
            out.d2 += ea * Gd;
        }
    }

    const double q = std::exp(-kTwoPi * D);
    // tail factors: geometric decay in D, and Abel summation of the oscillating phase e^{2 pi i n t}
    const double geo = (q < 1.0) ? 1.0 / (1.0 - q) : 1e300;
    const double osc = (tr != 0.0) ? 1.0 / std::abs(std::sin(kPi * tr)) : 1e300;
    const double target = policy_.tol * sigma_;
    int quiet = 0;
    for (int n = 1;; ++n) {
        if (n > policy_.l_max) {
            std::ostringstream os;
            os << "mode sum did not reach tolerance " << policy_.tol << " within l_max = " << policy_.l_max
               << " (t = " << t << ", d = " << d << ")";
            throw TruncationError(os.str());
        }
        KernelJet term;
        add(n, term);
        add(-n, term);
        out.g += term.g;
        double mag = mat_max(term.g);
        if (want) {
            out.d1 += term.d1;
            out.d2 += term.d2;
            mag = std::max({mag, mat_max(term.d1) / kTwoPi, mat_max(term.d2) / kTwoPi});
        }
        if (n <= n_prop_) continue;
        const double tail = kummer ? mag * std::min({0.5 * n, geo, osc}) : mag * q * std::min(geo, osc);
        if (tail < target) {
            if (++quiet >= 2) break;
        } else {
            quiet = 0;
        }
    }
    out.g *= cell_phase;
    out.d1 *= cell_phase;
    out.d2 *= cell_phase;
    return out;
}

void GreenFunction::check_pair(const Vec2& x, const Vec2& y) const {
    const double t = x.x() - y.x();
    if (x.y() == y.y() && t == std::round(t))
        throw SingularEvaluationError("green_plus: x and y coincide modulo the period");
}

Mat2c GreenFunction::value(const Vec2& x, const Vec2& y) const {
    check_pair(x, y);
    const double t = x.x() - y.x();
    if (y.y() == 0.0) return Mat2c::Zero();
    return direct(t, x.y() - y.y(), false).g - direct(t, x.y() + y.y(), false).g;
}

KernelJet GreenFunction::jet_x(const Vec2& x, const Vec2& y) const {
    check_pair(x, y);
    const double t = x.x() - y.x();
    const KernelJet a = direct(t, x.y() - y.y(), true);
    const KernelJet b = direct(t, x.y() + y.y(), true);
    KernelJet r;
    r.g = a.g - b.g;
    r.d1 = a.d1 - b.d1;
    r.d2 = a.d2 - b.d2;
    return r;
}

KernelJet GreenFunction::jet_y(const Vec2& x, const Vec2& y) const {
    check_pair(x, y);
    const double t = x.x() - y.x();
    const KernelJet a = direct(t, x.y() - y.y(), true);
    const KernelJet b = direct(t, x.y() + y.y(), true);
    KernelJet r;
    r.g = a.g - b.g;
    r.d1 = -(a.d1 - b.d1);
    r.d2 = -a.d2 - b.d2;
    return r;
}

Mat2c GreenFunction::traction(const Mat2c& dz1, const Mat2c& dz2, const Vec2& nu) const {
    // column j is a displacement field; T_ij = lam div nu_i + mu (d_k u_i + d_i u_k) nu_k
    Mat2c T;
    const Mat2c* dz[2] = {&dz1, &dz2};
    for (int j = 0; j < 2; ++j) {
        const cplx div = dz1(0, j) + dz2(1, j);
        for (int i = 0; i < 2; ++i) {
            cplx s = mat_.lam * div * nu(i);
            for (int k = 0; k < 2; ++k) s += mat_.mu * ((*dz[k])(i, j) + (*dz[i])(k, j)) * nu(k);
            T(i, j) = s;
        }
    }
    return T;
}

Mat2c GreenFunction::traction_x(const Vec2& x, const Vec2& y, const Vec2& nu_x) const {
    const KernelJet j = jet_x(x, y);
    return traction(j.d1, j.d2, nu_x);
}

Mat2c GreenFunction::conormal_y(const Vec2& x, const Vec2& y, const Vec2& nu_y) const {
    const KernelJet j = jet_y(x, y);
    return traction(j.d1, j.d2, nu_y);
}

int GreenFunction::modes_for_separation(double d) const {
    const double D = std::abs(d);
    if (D == 0.0) return policy_.l_max;
    const double n = std::log(1.0 / policy_.tol) / (kTwoPi * D);
    return std::min(policy_.l_max, n_prop_ + static_cast<int>(std::ceil(n)));
}

namespace {

// Radial profile J0(k r) and its derivatives in u = r^2 up to third order.
void j0_u_derivs(double k, double r, double out[4]) {
    const double z = k * r;
    const double J0 = std::cyl_bessel_j(0.0, z), J1 = std::cyl_bessel_j(1.0, z);
    const double fr = -k * J1;
    const double frr = -k * k * (J0 - J1 / z);
    const double frrr = k * k * k * (J1 + J0 / z - 2.0 * J1 / (z * z));
    out[0] = J0;
    out[1] = fr / (2.0 * r);
    out[2] = (frr - fr / r) / (4.0 * r * r);
    out[3] = (frrr - 3.0 * frr / r + 3.0 * fr / (r * r)) / (8.0 * r * r * r);
}

}  // namespace

// A = a1(u) I + a2(u) z z^T with u = |z|^2; a1' and a2' are u-derivatives.
static void log_coeff_scalars(const Material& m, double ks, double kp, double u, double& a1, double& a2, double& a1u,
                              double& a2u) {
    const double M = m.p_modulus();
    const double eta = 1.0 / m.mu - 1.0 / M;
    const double r = std::sqrt(u);
    if (ks * r <= 8.0) {
        // B = (J0(ks r) - J0(kp r)) / (rho w^2 eta) = sum b_m u^m
        double Bu = 0.0, Buu = 0.0, Buuu = 0.0, J0 = 0.0, J0u = 0.0;
        const double ks2 = ks * ks, kp2 = kp * kp;
        double fact2 = 1.0, four = 1.0;
        for (int mm = 0; mm < 80; ++mm) {
            if (mm > 0) {
                fact2 *= static_cast<double>(mm) * mm;
                four *= 4.0;
            }
            const double sgn = (mm % 2 == 0) ? 1.0 : -1.0;
            const double base = sgn / (four * fact2);
            double sumk = 0.0;
            for (int j = 0; j < mm; ++j) sumk += std::pow(ks2, j) * std::pow(kp2, mm - 1 - j);
            const double bm = base * sumk;
            const double ksm = std::pow(ks2, mm);
            J0 += base * ksm * std::pow(u, mm);
            if (mm >= 1) {
                J0u += base * ksm * mm * std::pow(u, mm - 1);
                Bu += bm * mm * std::pow(u, mm - 1);
            }
            if (mm >= 2) Buu += bm * mm * (mm - 1) * std::pow(u, mm - 2);
            if (mm >= 3) Buuu += bm * mm * (mm - 1) * (mm - 2) * std::pow(u, mm - 3);
            if (mm > 6 && std::abs(base) * std::pow(std::max(ks2, 1.0) * std::max(u, 1.0), mm) < 1e-20) break;
        }
        a1 = (J0 / m.mu + 2.0 * eta * Bu) / kTwoPi;
        a2 = 4.0 * eta * Buu / kTwoPi;
        a1u = (J0u / m.mu + 2.0 * eta * Buu) / kTwoPi;
        a2u = 4.0 * eta * Buuu / kTwoPi;
        return;
    }
    double fs[4], fp[4];
    j0_u_derivs(ks, r, fs);
    j0_u_derivs(kp, r, fp);
    const double rw2 = m.mu * ks * ks;
    a1 = (fs[0] / m.mu + 2.0 * (fs[1] - fp[1]) / rw2) / kTwoPi;
    a2 = 4.0 * (fs[2] - fp[2]) / rw2 / kTwoPi;
    a1u = (fs[1] / m.mu + 2.0 * (fs[2] - fp[2]) / rw2) / kTwoPi;
    a2u = 4.0 * (fs[3] - fp[3]) / rw2 / kTwoPi;
}

Mat2c GreenFunction::log_coefficient(const Vec2& z) const {
    double a1, a2, a1u, a2u;
    log_coeff_scalars(mat_, std::sqrt(ks2_), std::sqrt(kp2_), z.squaredNorm(), a1, a2, a1u, a2u);
    Eigen::Matrix2d A = a1 * Eigen::Matrix2d::Identity() + a2 * z * z.transpose();
    return A.cast<cplx>();
}

Mat2c GreenFunction::log_coefficient_traction(const Vec2& z, const Vec2& nu) const {
    double a1, a2, a1u, a2u;
    log_coeff_scalars(mat_, std::sqrt(ks2_), std::sqrt(kp2_), z.squaredNorm(), a1, a2, a1u, a2u);
    Mat2c dz[2];
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double dij = i == j ? 1.0 : 0.0, dik = i == k ? 1.0 : 0.0, djk = j == k ? 1.0 : 0.0;
                dz[k](i, j) = 2.0 * z(k) * (a1u * dij + a2u * z(i) * z(j)) + a2 * (dik * z(j) + z(i) * djk);
            }
    return traction(dz[0], dz[1], nu);
}

Mat2c GreenFunction::cauchy_coefficient(const Vec2& tangent, const Vec2& normal) const {
    const double c = mat_.mu / (4.0 * kPi * mat_.p_modulus());
    Eigen::Matrix2d K = c * (tangent * normal.transpose() - normal * tangent.transpose());
    return K.cast<cplx>();
}

Mat2c green_plus(const Vec2& x, const Vec2& y, const Material& m, double omega, double alpha,
                 const TruncationPolicy& policy) {
    return GreenFunction(m, omega, alpha, policy).value(x, y);
}

Mat2c green_plus_conormal_y(const Vec2& x, const Vec2& y, const Vec2& nu_y, const Material& m, double omega,
                            double alpha, const TruncationPolicy& policy) {
    return GreenFunction(m, omega, alpha, policy).conormal_y(x, y, nu_y);
}

Mat2c green_plus_traction_x(const Vec2& x, const Vec2& y, const Vec2& nu_x, const Material& m, double omega,
                            double alpha, const TruncationPolicy& policy) {
    return GreenFunction(m, omega, alpha, policy).traction_x(x, y, nu_x);
}

AsymptoticParams make_asymptotic_params(double delta, const Material& m) {
    m.validate();
    AsymptoticParams ap;
    ap.delta = delta;
    ap.rho = m.rho;
    ap.C = m.mu / m.p_modulus();
    std::vector<std::string> errs;
    if (!(delta > 0.0 && delta < m.rho)) errs.push_back("delta must satisfy 0 < delta < rho");
    if (!(m.rho * ap.C - delta * delta >= 0.0)) errs.push_back("rho * mu/(lam+2mu) - delta^2 must be non-negative");
    if (!errs.empty()) {
        std::string msg = "invalid asymptotic parameters: ";
        for (size_t i = 0; i < errs.size(); ++i) msg += (i ? "; " : "") + errs[i];
        throw std::invalid_argument(msg);
    }
    ap.alpha_s = std::sqrt(m.rho - delta * delta);
    ap.alpha_p = std::sqrt(m.rho * ap.C - delta * delta);
    return ap;
}

namespace {

// sum over l != 0 of the printed l-blocks at vertical separation d (without e^{i alpha t}).
Mat2c leading_l_sum(double t, double d, const AsymptoticParams& ap, int n_max) {
    const double D = std::abs(d);
    const double rho = ap.rho, C = ap.C, dl2 = ap.delta * ap.delta;
    const double K = rho * (1.0 + C) / 2.0 + 2.0 * dl2;
    cplx s_inv, s_one;  // sum e^{-|l|D} e^{ilt} / l  and  sum e^{-|l|D} e^{ilt}
    if (n_max > 0) {
        s_inv = s_one = 0.0;
        for (int n = n_max; n >= 1; --n) {
            const double l = kTwoPi * n;
            const double e = std::exp(-l * D);
            const cplx ep = std::exp(kI * (l * t)), em = std::conj(ep);
            s_inv += e * (ep - em) / l;
            s_one += e * (ep + em);
        }
    } else {
        const double tr = t - std::round(t);
        const cplx wp(-kTwoPi * D, kTwoPi * tr), wm(-kTwoPi * D, -kTwoPi * tr);
        s_inv = (detail::polylog_exp(1, wp) - detail::polylog_exp(1, wm)) / kTwoPi;
        s_one = detail::polylog_exp(0, wp) + detail::polylog_exp(0, wm);
    }
    Mat2c G;
    G(0, 0) = -K * s_inv + 0.5 * rho * (1.0 - C) * D * s_one;
    G(1, 1) = -K * s_inv - 0.5 * rho * (1.0 - C) * D * s_one;
    G(0, 1) = G(1, 0) = kI * 0.5 * rho * (1.0 - C) * d * s_one;
    return G / (4.0 * kPi * rho);
}

}  // namespace

Mat2c green_leading(const Vec2& x, const Vec2& y, double alpha, const AsymptoticParams& ap, int n_max) {
    const double t = x.x() - y.x();
    const double d1 = x.y() - y.y(), d2 = x.y() + y.y();
    if (d1 == 0.0 && t == std::round(t)) throw SingularEvaluationError("green_leading: x and y coincide");
    const cplx ph = std::exp(kI * (alpha * t));
    Mat2c G0;
    const double dd = std::abs(d1) - std::abs(d2);
    const double off = -2.0 * ap.delta * y.y() * (ap.alpha_p - ap.alpha_s);
    G0 << ap.rho * dd, off, off, ap.rho * ap.C * dd;
    G0 /= 4.0 * kPi * ap.rho;
    Mat2c G = G0;
    if (y.y() != 0.0) G += leading_l_sum(t, d1, ap, n_max) - leading_l_sum(t, d2, ap, n_max);
    return ph * G;
}

Mat2c far_kernel(const Vec2& x, const Vec2& y, double alpha, const AsymptoticParams& ap, const Material& m) {
    const double C = m.mu / m.p_modulus();
    const double off = ap.delta * (ap.alpha_p - ap.alpha_s);
    Mat2c F;
    F << m.rho, off, off, m.rho * C;
    return (-y.y() / (kTwoPi * m.rho)) * std::exp(kI * (alpha * x.x())) * F;
}

}  // namespace metascreen
