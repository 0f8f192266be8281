#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metascreen/geometry.hpp"
#include "metascreen/greens.hpp"

namespace metascreen {

using CMatrix = Eigen::MatrixXcd;
// Two components per node, interleaved: entry 2j + c is component c at node j.
using BoundaryDensity = Eigen::VectorXcd;

enum class OperatorKind { SingleLayer, KStar };
std::string to_string(OperatorKind k);

struct DenseOperator {
    OperatorKind kind = OperatorKind::SingleLayer;
    Material material;
    double omega = 0.0;
    double alpha = 0.0;
    int n = 0;
    CMatrix m;  // 2n x 2n

    BoundaryDensity apply(const BoundaryDensity& v) const;
};

struct NearTargetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// S[psi](x_i) = int G+(x_i, y) psi(y) dsigma(y).
DenseOperator assemble_single_layer(const NodeSet& nodes, const GreenFunction& g);
DenseOperator assemble_single_layer(const NodeSet& nodes, const Material& m, double omega, double alpha,
                                    const TruncationPolicy& policy = {});

// K*[psi](x_i) = p.v. int T_x G+(x_i, y) psi(y) dsigma(y), traction taken in x with the normal at x_i,
// so that the conormal derivative of S[psi] has limits (+-1/2 I + K*) psi.
DenseOperator assemble_kstar(const NodeSet& nodes, const GreenFunction& g);
DenseOperator assemble_kstar(const NodeSet& nodes, const Material& m, double omega, double alpha,
                             const TruncationPolicy& policy = {});

// Both operators from one pass over the kernel.
void assemble_single_layer_and_kstar(const NodeSet& nodes, const GreenFunction& g, DenseOperator& s,
                                     DenseOperator& kstar);

// Samples a two-component function at the nodes.
BoundaryDensity sample_density(const NodeSet& nodes, const std::function<Vec2c(const Vec2&)>& f);
// Quadrature inner product sum_j w_j a_j . conj(b_j).
cplx inner(const BoundaryDensity& a, const BoundaryDensity& b, const NodeSet& nodes);
Vec2c density_at(const BoundaryDensity& v, int j);

// Distance from x to the curve and its horizontal period translates (node based, refined by Newton).
double distance_to_boundary(const Vec2& x, const NodeSet& nodes);

enum class NearPolicy {
    Reject,   // targets closer than 10 node spacings throw NearTargetError
    Adaptive  // close targets use graded Gauss-Legendre panels with the trigonometric interpolant of the density
};

struct FieldJet {
    Vec2c u = Vec2c::Zero();
    Vec2c d1 = Vec2c::Zero();  // derivative in x1
    Vec2c d2 = Vec2c::Zero();  // derivative in x2
};

std::vector<Vec2c> eval_layer_potential(const BoundaryDensity& density, const NodeSet& nodes,
                                        const std::vector<Vec2>& targets, const GreenFunction& g,
                                        NearPolicy near = NearPolicy::Reject);
std::vector<Vec2c> eval_layer_potential(const BoundaryDensity& density, const NodeSet& nodes,
                                        const std::vector<Vec2>& targets, const Material& m, double omega,
                                        double alpha, NearPolicy near = NearPolicy::Reject,
                                        const TruncationPolicy& policy = {});
// Several densities (columns) at once; out[d][k] is the potential of column d at target k.
std::vector<std::vector<Vec2c>> eval_layer_potentials(const CMatrix& densities, const NodeSet& nodes,
                                                      const std::vector<Vec2>& targets, const GreenFunction& g,
                                                      NearPolicy near = NearPolicy::Reject);
std::vector<FieldJet> eval_layer_jet(const BoundaryDensity& density, const NodeSet& nodes,
                                     const std::vector<Vec2>& targets, const GreenFunction& g,
                                     NearPolicy near = NearPolicy::Reject);

// lam (div u) nu + mu (grad u + grad u^T) nu.
Vec2c field_traction(const FieldJet& j, const Vec2& nu, const Material& m);

struct JumpReport {
    int n = 0;
    double eps = 0.0;
    // max over nodes of |lhs - rhs| divided by max over nodes of |rhs|
    double err_plus = 0.0;        // outside limit vs (1/2 I + K*) psi
    double err_minus = 0.0;       // inside limit vs (-1/2 I + K*) psi
    double err_difference = 0.0;  // (outside - inside) vs psi
    // same, with the offset values Richardson-extrapolated from eps and 2 eps
    double err_plus_extrap = 0.0;
    double err_minus_extrap = 0.0;
    // second order, from eps, 2 eps and 4 eps
    double err_plus_extrap2 = 0.0;
    double err_minus_extrap2 = 0.0;
};

// Conormal derivative of S[psi] at x_j +- eps nu_j against the Nystrom K*; stride subsamples the nodes.
JumpReport jump_check(const BoundaryDensity& density, const NodeSet& nodes, const Material& m, double omega,
                      double alpha, double eps, const TruncationPolicy& policy = {}, int stride = 1);

}  // namespace metascreen
