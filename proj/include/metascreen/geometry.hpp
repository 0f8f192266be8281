#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

namespace metascreen {

using Vec2 = Eigen::Vector2d;

enum class CurveKind { Disk, Ellipse, Star };

CurveKind parse_curve_kind(const std::string& name);
std::string to_string(CurveKind kind);

struct CurveParams {
    CurveKind kind = CurveKind::Disk;
    Vec2 center{0.0, 0.5};
    double radius = 0.2;   // disk radius, ellipse semi-axis along x1, star base radius
    double radius2 = 0.1;  // ellipse semi-axis along x2
    double star_eps = 0.0;
    int star_k = 5;
};

// Closed, star-shaped curve inside the periodic cell, parametrized over [0, 2pi).
class BoundaryCurve {
public:
    explicit BoundaryCurve(const CurveParams& p);

    const CurveParams& params() const { return p_; }
    const Vec2& center() const { return p_.center; }

    Vec2 point(double t) const;
    Vec2 tangent(double t) const;  // gamma'(t), not normalized
    Vec2 second_derivative(double t) const;

    // Boundary distance from the center along polar angle theta.
    double polar_radius(double theta) const;
    double polar_radius_derivative(double theta) const;

    double arc_length() const;
    double area() const;
    bool contains(const Vec2& x) const;

private:
    CurveParams p_;
};

// Validates and builds the curve; throws std::invalid_argument on violation.
BoundaryCurve make_curve(const CurveParams& p);

struct NodeSet {
    int n = 0;
    std::vector<double> t;
    std::vector<Vec2> x;
    std::vector<Vec2> normal;   // outward unit normal
    std::vector<Vec2> tangent;  // unit tangent, counterclockwise
    std::vector<double> speed;  // |gamma'(t)|
    std::vector<double> weight; // |gamma'(t)| * 2pi/n
    std::shared_ptr<const BoundaryCurve> curve;  // for off-node evaluation

    double total_weight() const;
    // Largest distance between consecutive nodes.
    double max_spacing() const;
};

NodeSet quadrature_nodes(const BoundaryCurve& curve, int n);

struct AreaRule {
    std::vector<Vec2> x;
    std::vector<double> weight;
    double total_weight() const;
};

// Polar tensor rule about the curve center: Gauss-Legendre radially, trapezoid in angle.
AreaRule interior_quadrature(const BoundaryCurve& curve, int n_r, int n_t);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace metascreen
