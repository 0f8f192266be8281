#include "metascreen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace metascreen {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

CurveKind parse_curve_kind(const std::string& name) {
    if (name == "disk") return CurveKind::Disk;
    if (name == "ellipse") return CurveKind::Ellipse;
    if (name == "star" || name == "smooth-star") return CurveKind::Star;
    throw std::invalid_argument("unknown shape.kind '" + name + "' (expected disk, ellipse or star)");
}

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::Disk: return "disk";
        case CurveKind::Ellipse: return "ellipse";
        case CurveKind::Star: return "star";
    }
    return "unknown";
}

BoundaryCurve::BoundaryCurve(const CurveParams& p) : p_(p) {}

Vec2 BoundaryCurve::point(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    switch (p_.kind) {
        case CurveKind::Disk: return p_.center + p_.radius * Vec2(c, s);
        case CurveKind::Ellipse: return p_.center + Vec2(p_.radius * c, p_.radius2 * s);
        case CurveKind::Star: return p_.center + polar_radius(t) * Vec2(c, s);
    }
    return p_.center;
}

Vec2 BoundaryCurve::tangent(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    switch (p_.kind) {
        case CurveKind::Disk: return p_.radius * Vec2(-s, c);
        case CurveKind::Ellipse: return Vec2(-p_.radius * s, p_.radius2 * c);
        case CurveKind::Star: {
            const double r = polar_radius(t), dr = polar_radius_derivative(t);
            return Vec2(dr * c - r * s, dr * s + r * c);
        }
    }
    return Vec2::Zero();
}

Vec2 BoundaryCurve::second_derivative(double t) const {
    const double c = std::cos(t), s = std::sin(t);
    switch (p_.kind) {
        case CurveKind::Disk: return -p_.radius * Vec2(c, s);
        case CurveKind::Ellipse: return Vec2(-p_.radius * c, -p_.radius2 * s);
        case CurveKind::Star: {
            const double k = p_.star_k;
            const double r = polar_radius(t), dr = polar_radius_derivative(t);
            const double ddr = -p_.radius * p_.star_eps * k * k * std::cos(k * t);
            return Vec2(ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s);
        }
    }
    return Vec2::Zero();
}

double BoundaryCurve::polar_radius(double theta) const {
    switch (p_.kind) {
        case CurveKind::Disk: return p_.radius;
        case CurveKind::Ellipse: {
            const double a = p_.radius, b = p_.radius2;
            const double bc = b * std::cos(theta), as = a * std::sin(theta);
            return a * b / std::sqrt(bc * bc + as * as);
        }
        case CurveKind::Star: return p_.radius * (1.0 + p_.star_eps * std::cos(p_.star_k * theta));
    }
    return 0.0;
}

double BoundaryCurve::polar_radius_derivative(double theta) const {
    switch (p_.kind) {
        case CurveKind::Disk: return 0.0;
        case CurveKind::Ellipse: {
            const double a = p_.radius, b = p_.radius2;
            const double c = std::cos(theta), s = std::sin(theta);
            const double q = b * b * c * c + a * a * s * s;
            return -0.5 * a * b * (a * a - b * b) * 2.0 * s * c / (q * std::sqrt(q));
        }
        case CurveKind::Star:
            return -p_.radius * p_.star_eps * p_.star_k * std::sin(p_.star_k * theta);
    }
    return 0.0;
}

double BoundaryCurve::arc_length() const {
    if (p_.kind == CurveKind::Disk) return kTwoPi * p_.radius;
    // periodic trapezoid; doubled until stagnation
    double prev = 0.0;
    for (int n = 64; n <= (1 << 16); n *= 2) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += tangent(kTwoPi * j / n).norm();
        s *= kTwoPi / n;
        if (n > 64 && std::abs(s - prev) < 1e-15 * s) return s;
        prev = s;
    }
    return prev;
}

double BoundaryCurve::area() const {
    switch (p_.kind) {
        case CurveKind::Disk: return std::numbers::pi * p_.radius * p_.radius;
        case CurveKind::Ellipse: return std::numbers::pi * p_.radius * p_.radius2;
        case CurveKind::Star:
            return std::numbers::pi * p_.radius * p_.radius * (1.0 + 0.5 * p_.star_eps * p_.star_eps);
    }
    return 0.0;
}

bool BoundaryCurve::contains(const Vec2& x) const {
    const Vec2 d = x - p_.center;
    const double r = d.norm();
    if (r == 0.0) return true;
    return r < polar_radius(std::atan2(d.y(), d.x()));
}

BoundaryCurve make_curve(const CurveParams& p) {
    std::vector<std::string> errs;
    if (!(p.radius > 0.0)) errs.push_back("shape.radius must be positive");
    if (p.kind == CurveKind::Ellipse && !(p.radius2 > 0.0)) errs.push_back("shape.radius2 must be positive");
    if (p.kind == CurveKind::Star) {
        if (!(std::abs(p.star_eps) < 1.0)) errs.push_back("shape.star_eps must satisfy |eps| < 1");
        if (p.star_k < 1) errs.push_back("shape.star_k must be a positive integer");
    }
    if (!(p.center.y() > 0.0)) errs.push_back("shape.center_y must be positive");
    if (!errs.empty()) {
        std::ostringstream os;
        for (size_t i = 0; i < errs.size(); ++i) os << (i ? "; " : "") << errs[i];
        throw std::invalid_argument(os.str());
    }
    BoundaryCurve curve(p);
    double xmin = 1e300, xmax = -1e300, ymin = 1e300;
    const int m = 4096;
    for (int j = 0; j < m; ++j) {
        const double t = kTwoPi * j / m;
        const Vec2 x = curve.point(t);
        xmin = std::min(xmin, x.x());
        xmax = std::max(xmax, x.x());
        ymin = std::min(ymin, x.y());
        if (!(curve.tangent(t).norm() > 0.0)) throw std::invalid_argument("curve has a stationary point");
    }
    if (!(xmin > -0.5 && xmax < 0.5))
        throw std::invalid_argument("curve touches or crosses the cell walls x1 = -1/2 or x1 = 1/2");
    if (!(ymin > 0.0)) throw std::invalid_argument("curve touches or crosses the line x2 = 0");
    return curve;
}

double NodeSet::total_weight() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
}

double NodeSet::max_spacing() const {
    double h = 0.0;
    for (int j = 0; j < n; ++j) h = std::max(h, (x[(j + 1) % n] - x[j]).norm());
    return h;
}

NodeSet quadrature_nodes(const BoundaryCurve& curve, int n) {
    if (n < 16 || n % 2 != 0) throw std::invalid_argument("quadrature_nodes: n must be even and at least 16");
    NodeSet ns;
    ns.n = n;
    ns.curve = std::make_shared<const BoundaryCurve>(curve);
    ns.t.resize(n);
    ns.x.resize(n);
    ns.normal.resize(n);
    ns.tangent.resize(n);
    ns.speed.resize(n);
    ns.weight.resize(n);
    for (int j = 0; j < n; ++j) {
        const double t = kTwoPi * j / n;
        const Vec2 d = curve.tangent(t);
        const double sp = d.norm();
        ns.t[j] = t;
        ns.x[j] = curve.point(t);
        ns.speed[j] = sp;
        ns.tangent[j] = d / sp;
        ns.normal[j] = Vec2(d.y(), -d.x()) / sp;
        ns.weight[j] = sp * kTwoPi / n;
    }
    return ns;
}

double AreaRule::total_weight() const {
    double s = 0.0;
    for (double w : weight) s += w;
    return s;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = z;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

AreaRule interior_quadrature(const BoundaryCurve& curve, int n_r, int n_t) {
    if (n_r < 1 || n_t < 3) throw std::invalid_argument("interior_quadrature: need n_r >= 1 and n_t >= 3");
    // polar rule needs a single-valued positive radius function
    for (int j = 0; j < 2048; ++j) {
        if (!(curve.polar_radius(kTwoPi * j / 2048) > 0.0))
            throw std::invalid_argument("interior_quadrature: curve is not star-shaped about its center");
    }
    std::vector<double> gx, gw;
    gauss_legendre(n_r, gx, gw);
    AreaRule rule;
    rule.x.reserve(static_cast<size_t>(n_r) * n_t);
    rule.weight.reserve(static_cast<size_t>(n_r) * n_t);
    for (int j = 0; j < n_t; ++j) {
        const double th = kTwoPi * j / n_t;
        const double R = curve.polar_radius(th);
        const Vec2 dir(std::cos(th), std::sin(th));
        for (int i = 0; i < n_r; ++i) {
            const double s = 0.5 * (gx[i] + 1.0);
            rule.x.push_back(curve.center() + s * R * dir);
            rule.weight.push_back(0.5 * gw[i] * s * R * R * kTwoPi / n_t);
        }
    }
    return rule;
}

}  // namespace metascreen
