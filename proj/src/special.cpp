#include "special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace metascreen::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxS = 6;
constexpr int kMinS = -8;
constexpr int kTerms = 60;

// zeta(j), j >= 2, by a partial sum with an Euler-Maclaurin tail.
double zeta(int j) {
    const int N = 1000;
    double s = 0.0;
    for (int n = N - 1; n >= 1; --n) s += std::pow(static_cast<double>(n), -j);
    const double Nd = N;
    s += std::pow(Nd, 1.0 - j) / (j - 1.0) + 0.5 * std::pow(Nd, -j) + j * std::pow(Nd, -j - 1.0) / 12.0;
    return s;
}

// Coefficients zeta(s-k)/k! of w^k in Li_s(e^w), s >= 2, for k != s-1.
struct LiTable {
    std::array<std::vector<double>, kMaxS + 1> coef;
    std::array<double, kMaxS + 1> harmonic{};
    std::array<double, kMaxS + 1> factorial{};
};

LiTable make_table() {
    LiTable t;
    std::vector<double> z(2 * kTerms + kMaxS + 2, 0.0);
    for (size_t j = 2; j < z.size(); ++j) z[j] = zeta(static_cast<int>(j));
    t.factorial[0] = 1.0;
    for (int s = 1; s <= kMaxS; ++s) {
        t.factorial[s] = t.factorial[s - 1] * s;
        t.harmonic[s] = t.harmonic[s - 1] + 1.0 / s;
    }
    for (int s = 2; s <= kMaxS; ++s) {
        const int kmax = s - 1 + 2 * kTerms;
        std::vector<double> c(kmax + 1, 0.0);
        double kfact = 1.0;
        for (int k = 0; k <= kmax; ++k) {
            if (k > 0) kfact *= k;
            const int arg = s - k;
            if (arg >= 2) {
                c[k] = z[arg] / kfact;
            } else if (arg == 0) {
                c[k] = -0.5 / kfact;
            } else if (arg < 0 && (-arg) % 2 == 1) {
                // zeta(1-2m) = (-1)^m 2 (2m-1)! zeta(2m) / (2 pi)^{2m}
                const int m = (1 - arg) / 2;
                double ratio = 1.0;  // (2m-1)!/k!
                for (int j = 2 * m; j <= k; ++j) ratio /= j;
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                c[k] = sign * 2.0 * z[2 * m] * ratio / std::pow(2.0 * kPi, 2 * m);
            }
        }
        t.coef[s] = std::move(c);
    }
    return t;
}

const LiTable& table() {
    static const LiTable t = make_table();
    return t;
}

// Stirling numbers of the second kind S(n, k), n <= 9.
double stirling2(int n, int k) {
    static const auto tab = [] {
        std::array<std::array<double, 10>, 10> s{};
        s[0][0] = 1.0;
        for (int i = 1; i < 10; ++i)
            for (int j = 1; j <= i; ++j) s[i][j] = j * s[i - 1][j] + s[i - 1][j - 1];
        return s;
    }();
    return tab[n][k];
}

}  // namespace

cplx expm1c(cplx z) {
    const double a = z.real(), b = z.imag();
    const double sh = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * sh * sh;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

cplx phi1(cplx z) {
    if (std::abs(z) < 1e-5) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return expm1c(z) / z;
}

cplx polylog_exp(int s, cplx w) {
    if (s < kMinS || s > kMaxS) throw std::out_of_range("polylog_exp: order out of range");
    const cplx q = std::exp(w);
    const cplx omq = -expm1c(w);  // 1 - q
    if (s <= 0) {
        const int n = -s;
        const cplx x = q / omq;
        cplx r = 0.0, xp = x;
        double kf = 1.0;
        for (int k = 0; k <= n; ++k) {
            if (k > 0) kf *= k;
            r += kf * stirling2(n + 1, k + 1) * xp;
            xp *= x;
        }
        return r;
    }
    if (s == 1) return -std::log(omq);
    if (std::abs(q) < 0.5) {
        cplx r = 0.0, qn = q;
        for (int n = 1; n < 200; ++n) {
            const cplx term = qn / std::pow(static_cast<double>(n), s);
            r += term;
            if (std::abs(term) < 1e-18 * std::abs(r)) break;
            qn *= q;
        }
        return r;
    }
    const LiTable& t = table();
    const auto& c = t.coef[s];
    cplx r = std::pow(w, s - 1) / t.factorial[s - 1] * (t.harmonic[s - 1] - std::log(-w));
    cplx wk = 1.0;
    for (size_t k = 0; k < c.size(); ++k) {
        if (c[k] != 0.0) {
            const cplx term = c[k] * wk;
            r += term;
            if (static_cast<int>(k) > s + 2 && std::abs(term) < 1e-18 * std::abs(r)) break;
        }
        wk *= w;
    }
    return r;
}

}  // namespace metascreen::detail
