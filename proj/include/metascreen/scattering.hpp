#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "metascreen/geometry.hpp"
#include "metascreen/greens.hpp"
#include "metascreen/potentials.hpp"

namespace metascreen {

struct IncidentSpec {
    Vec2 theta{0.0, 1.0};  // propagation direction, unit norm, theta2 > 0
    double omega = 0.0;
    Material background;
    cplx amplitude = 1.0;

    // Throws std::invalid_argument on a non-unit or downward direction or a negative frequency.
    void validate() const;
    // omega sqrt(rho / (lam + 2 mu)) theta
    Vec2 k_p() const;
};

// 2i e^{i k1 x1} sin(k2 x2) theta: the plane P-wave minus its mirror image in x2 = 0.
Vec2c incident_p_wave(const Vec2& x, const IncidentSpec& spec);
// Displacement gradient, column j holding the derivative in x_j.
Mat2c incident_p_gradient(const Vec2& x, const IncidentSpec& spec);
// lam (div u) nu + mu (grad u + grad u^T) nu with the background constants.
Vec2c incident_p_conormal(const Vec2& x, const Vec2& nu, const IncidentSpec& spec);

// Order-omega terms of the small-frequency expansion.
enum class ExpansionForm {
    Printed,   // as printed: the lam terms read 2 lam k nu with no i theta2^2 factor
    Corrected  // the expansion of the divergence formula itself: 2 i lam k theta2^2 nu
};
Vec2c incident_p_wave_leading(const Vec2& x, const IncidentSpec& spec);
Vec2c incident_p_conormal_leading(const Vec2& nu, const IncidentSpec& spec,
                                  ExpansionForm form = ExpansionForm::Corrected);

// Thrown when the static single layer of the background is numerically singular.
struct AssumptionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by solve_scattering near a characteristic value: the reciprocal condition estimate of the
// column-scaled matrix is below 1e-13 or the normwise backward error exceeds tol.
struct SingularSystemError : std::runtime_error {
    SingularSystemError(const std::string& what, double sigma_min_)
        : std::runtime_error(what), sigma_min(sigma_min_) {}
    double sigma_min;
};

struct SystemOptions {
    TruncationPolicy policy;
    bool check_static = true;     // condition estimate of the omega = 0 background single layer
    double static_warn = 1e12;    // warning threshold on that condition number
    double static_fail = 1e15;    // AssumptionViolation above this
};

// Block operator [[S~, -S], [-1/2 I + K~*, -(1/2 I + K*)]] acting on (phi, psi), each 2n long.
struct BlockSystem {
    int n = 0;
    Material inclusion, background;
    double omega = 0.0, alpha = 0.0;
    DenseOperator s_in, k_in, s_bg, k_bg;
    CMatrix a;                        // 4n x 4n
    // The inclusion columns scale like 1/mu~: a is factorized after scaling every column to unit norm.
    Eigen::VectorXd col_scale;
    Eigen::PartialPivLU<CMatrix> lu;  // of a * diag(col_scale)
    double norm2 = 0.0;               // spectral norm of a
    double static_condition = 0.0;    // of S^{alpha,0}, 0 when not checked
    std::vector<std::string> warnings;

    double sigma_min() const;
    // sigma_min > 1e-6 ||A||
    bool off_resonance() const;
};

BlockSystem assemble_system(const NodeSet& nodes, const Material& inclusion, const Material& background,
                            double omega, double alpha, const SystemOptions& opt = {});
// Same matrix without factorization or static check: for singular value scans.
CMatrix assemble_block_matrix(const NodeSet& nodes, const Material& inclusion, const Material& background,
                              double omega, double alpha, const TruncationPolicy& policy = {});
double smallest_singular_value(const CMatrix& a);
double largest_singular_value(const CMatrix& a);

struct DensityPair {
    BoundaryDensity phi;  // inclusion side
    BoundaryDensity psi;  // background side
    double residual = 0.0;        // ||A Phi - F|| / ||F||
    double backward_error = 0.0;  // ||A Phi - F|| / (||A|| ||Phi|| + ||F||)
};

// (u_in, du_in/dnu) at the nodes, stacked as a 4n vector.
Eigen::VectorXcd incident_data(const NodeSet& nodes, const IncidentSpec& spec);

DensityPair solve_scattering(const BlockSystem& sys, const Eigen::VectorXcd& f, double tol = 1e-10);

// u_in + S[psi] outside D, S~[phi] inside; x1 is reduced to the cell to decide the side.
std::vector<Vec2c> total_field(const std::vector<Vec2>& points, const DensityPair& dens, const NodeSet& nodes,
                               const IncidentSpec& spec, const Material& inclusion, double alpha,
                               NearPolicy near = NearPolicy::Reject, const TruncationPolicy& policy = {});
std::vector<FieldJet> total_field_jet(const std::vector<Vec2>& points, const DensityPair& dens,
                                      const NodeSet& nodes, const IncidentSpec& spec, const Material& inclusion,
                                      double alpha, NearPolicy near = NearPolicy::Reject,
                                      const TruncationPolicy& policy = {});
bool inside_inclusion(const Vec2& x, const NodeSet& nodes);

// l = 0 term of S[psi](x) computed exactly from the zero mode, for x2 above the inclusion.
Vec2c far_field(const BoundaryDensity& psi, const NodeSet& nodes, const Vec2& x, const Material& background,
                double omega, double alpha);

// Asymptotic far field: -2 i omega sqrt(rho/(lam+2mu)) theta2 x2 theta
// - (1/mu~) sum_i tau_i int far_kernel(x, y) psi_i(y) dsigma(y).
// psi_basis holds psi^(i) in its columns (2n x 3).
Vec2c far_field(const Eigen::Vector3cd& tau, const CMatrix& psi_basis, const NodeSet& nodes, const Vec2& x,
                double alpha, const AsymptoticParams& ap, const IncidentSpec& spec, double mu_inclusion);

// Columns x1, x2, re_u1, im_u1, re_u2, im_u2; comment lines (without '#') go first.
void write_field_csv(std::ostream& os, const std::vector<Vec2>& points, const std::vector<Vec2c>& values,
                     const std::vector<std::string>& comments = {});

}  // namespace metascreen
