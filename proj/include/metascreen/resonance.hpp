#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metascreen/geometry.hpp"
#include "metascreen/greens.hpp"
#include "metascreen/potentials.hpp"
#include "metascreen/scattering.hpp"

namespace metascreen {

using Mat3c = Eigen::Matrix3cd;
using Vec3c = Eigen::Vector3cd;

enum class RigidNormalization {
    Orthonormal,  // translations over sqrt|dD|, rotation about the boundary centroid: orthonormal in L2(dD)
    Printed       // (1,0)/|dD|, (0,1)/|dD|, (-x2, x1)/C0 with C0 = int x1^2 + x2^2
};

struct RigidBasis {
    RigidNormalization norm = RigidNormalization::Orthonormal;
    CMatrix f;              // 2n x 3, sampled at the nodes
    double perimeter = 0.0;
    double c0 = 0.0;        // int_dD x1^2 + x2^2
    Vec2 centroid = Vec2::Zero();  // boundary centroid, the rotation center of the orthonormal basis
    double scale[3] = {0.0, 0.0, 0.0};

    // f^(i) extended to the plane by its defining formula.
    Vec2 at(int i, const Vec2& x) const;
};

RigidBasis rigid_basis(const NodeSet& nodes, RigidNormalization norm = RigidNormalization::Orthonormal);

// G_ij = (a_i, b_j) in the quadrature inner product, columns of a and b being densities.
CMatrix gram(const CMatrix& a, const CMatrix& b, const NodeSet& nodes);

struct IllConditionedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct WBasis {
    CMatrix psi;        // 2n x 3: psi^(i) = psi_tilde^(i) + f^(i)
    CMatrix psi_tilde;  // 2n x 3, orthogonal to the rigid motions
    double restricted_sigma_min = 0.0;  // of (1/2 I - K~*) on the discrete H_Psi
    double restricted_condition = 0.0;
    Eigen::Vector3d eigen_residual = Eigen::Vector3d::Zero();  // ||K~* psi - psi/2|| / ||psi||
};

// kstar_in: K~*^{alpha,0} of the inclusion material. Throws IllConditionedError above max_condition.
WBasis psi_basis(const NodeSet& nodes, const RigidBasis& rigid, const DenseOperator& kstar_in,
                 double max_condition = 1e10);
WBasis psi_basis(const NodeSet& nodes, const RigidBasis& rigid, const Material& inclusion, double alpha,
                 const TruncationPolicy& policy = {});

// Material whose static Green's function solves (Delta + grad div) G = delta I: the leading kernel G_{+,1}.
Material leading_material();

// S~_{+,1} on the nodes. Consistent: Nystrom single layer of leading_material() at omega = 0.
// Printed: plain quadrature of green_leading (bounded kernel with a jump on the diagonal), diagnostic only.
CMatrix leading_single_layer(const NodeSet& nodes, double alpha, LeadingForm form, const AsymptoticParams& ap,
                             const TruncationPolicy& policy = {});

struct SMatrixReport {
    Mat3c s = Mat3c::Zero();              // S~_{+,1}[psi^(i)] = sum_j s_ij f^(j)
    double projection_residual = 0.0;     // max_i ||image_i - sum_j s_ij f^(j)||
    double relative_residual = 0.0;       // projection_residual / ||S||_2
    bool flagged = false;                 // relative_residual > 1e-3
    double condition = 0.0;
};

// Requires an orthonormal rigid basis.
SMatrixReport s_matrix(const NodeSet& nodes, const WBasis& w, const RigidBasis& rigid, const CMatrix& s_leading);

// m_ij = int_D S~_{+,1}[psi^(i)](y) . f^(j)(y) dy.
Mat3c m_matrix(const NodeSet& nodes, const AreaRule& area, const WBasis& w, const RigidBasis& rigid, double alpha,
               LeadingForm form = LeadingForm::Consistent, const AsymptoticParams* ap = nullptr,
               const TruncationPolicy& policy = {});

// Volume Gram matrix int_D f^(i) . f^(j) dy.
Eigen::Matrix3d volume_gram(const AreaRule& area, const RigidBasis& rigid);

// With the source convention (L + rho w^2) G = delta I the static kernels are negative definite, so M is too
// and the printed formula has no real root. Corrected reads omega_i = sqrt(-mu / (rho~ m_i)).
enum class FrequencySign { Printed, Corrected };

struct FrequencyPrediction {
    Vec3c m = Vec3c::Zero();           // eigenvalues of M, sorted by Re(s m) descending, s = +1 printed, -1 corrected
    std::vector<bool> admissible;      // Re(s m) > 0 and |Im m| < 1e-6 |Re m|
    std::vector<double> omega;         // sqrt(mu / (rho~ s m_i)) for admissible m_i, in the order of m
    std::vector<std::string> diagnostics;
};

FrequencyPrediction resonant_frequencies(const Mat3c& M, double mu_background, double rho_inclusion,
                                         FrequencySign sign = FrequencySign::Corrected);

// Static rigid-body frequencies from the exact exterior stiffness: det(K - s rho~ w^2 G_D) = 0 with
// K_kj = (S^{alpha,0}^{-1} f^(k), f^(j)) for the background and G_D the volume Gram matrix.
// Coincides with resonant_frequencies when S~_{+,1} = mu S^{alpha,0}; a diagnostic otherwise.
// Complex square roots, sorted by real part.
std::vector<cplx> stiffness_frequencies(const NodeSet& nodes, const AreaRule& area, const RigidBasis& rigid,
                                        const Material& background, double rho_inclusion, double alpha,
                                        const TruncationPolicy& policy = {},
                                        FrequencySign sign = FrequencySign::Corrected);

// alpha as a function of omega, e.g. alpha = delta omega mu^{-1/2}.
using AlphaRule = std::function<double(double)>;

struct ResonanceInputs {
    Material inclusion, background;
    AlphaRule alpha_rule;
    int n_r = 16, n_t = 64;  // area rule
    TruncationPolicy policy;
    FrequencySign sign = FrequencySign::Corrected;
};

struct PredictedResonance {
    int branch = 0;
    double omega = 0.0;
    double alpha = 0.0;
    cplx m = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Solves omega = sqrt(mu / (rho~ s m_b(alpha(omega)))) for branch b (0..2, in the order of
// FrequencyPrediction::m) by fixed-point iteration from omega_guess.
PredictedResonance predict_resonance(const NodeSet& nodes, const ResonanceInputs& in, int branch,
                                     double omega_guess, std::vector<std::string>* notes = nullptr);

// All fixed points inside the search grid: the map is sampled on the grid, sign changes of
// omega_pred - omega on admissible neighbours are refined by predict_resonance. Sorted by omega.
std::vector<PredictedResonance> predict_resonances(const NodeSet& nodes, const ResonanceInputs& in,
                                                   const std::vector<double>& search_grid,
                                                   std::vector<std::string>* notes = nullptr);

// Operators at omega = 0 used by A_0 and Psi*.
struct StaticPieces {
    DenseOperator s_bg, k_bg, k_in;
};
StaticPieces static_pieces(const NodeSet& nodes, const Material& inclusion, const Material& background,
                           double alpha, const TruncationPolicy& policy = {});

struct NormalizationConstants {
    Eigen::Vector3d c_star = Eigen::Vector3d::Zero();
    CMatrix psi_star;              // 4n x 3: ((S^{alpha,0})^{*,-1} f^(i), f^(i)) / C_i*
    double orthonormality_error = 0.0;  // max |(Psi_i*, Psi_j*) - delta_ij|
};

NormalizationConstants normalization_constants(const NodeSet& nodes, const RigidBasis& rigid,
                                               const DenseOperator& s_bg_static);

struct TauReport {
    Vec3c tau = Vec3c::Zero();
    Vec3c k = Vec3c::Zero();       // K_j = (A~_0^{-1} F, Psi_j)
    double sigma_min_pencil = 0.0; // of (mu I - s rho~ omega^2 M) / mu
    bool blowup = false;           // sigma_min_pencil < 1e-8
    double distance_to_resonance = 0.0;  // min_i |omega - omega_i| over admissible omega_i
};

// tau = (1 - mu/mu~) (mu I - s rho~ omega^2 M)^{-1} C^{-1} K with the modified operator A~_0 = A_0 + P;
// s = +1 printed, -1 corrected, matching resonant_frequencies.
TauReport tau_coefficients(const NodeSet& nodes, const StaticPieces& sp, const RigidBasis& rigid, const WBasis& w,
                           const NormalizationConstants& nc, const Mat3c& M, const IncidentSpec& spec,
                           const Material& inclusion, FrequencySign sign = FrequencySign::Corrected);

struct Dip {
    double omega = 0.0;      // parabolic refinement in (omega, log sigma)
    double sigma = 0.0;
    int index = 0;           // grid index of the local minimum
    double depth = 0.0;      // sigma / median
};

struct ScanReport {
    std::vector<double> omega;
    std::vector<double> alpha;
    std::vector<double> sigma_min;  // NaN where skipped
    std::vector<double> norm;       // ||A|| per point
    std::vector<std::string> notes;
    std::vector<Dip> dips;          // local minima below threshold x median
    std::vector<Dip> minima;        // all strict interior local minima
    double median = 0.0;
};

ScanReport sigma_min_scan(const std::vector<double>& grid, const NodeSet& nodes, const Material& inclusion,
                          const Material& background, const AlphaRule& alpha_rule, double threshold = 1e-3,
                          const TruncationPolicy& policy = {});

// Local minima and dips of an existing scan; used by sigma_min_scan.
void find_dips(ScanReport& r, double threshold);

struct AbsenceReport {
    double alpha = 0.0;
    double sigma_half_kstar = 0.0;           // sigma_min(1/2 I + K*^{alpha,0})
    std::vector<double> sigma_a0;            // sigma_min of the large-mu leading operator per grid point
    ScanReport scan;
    double min_ratio = 0.0;                  // min over grid of sigma_min(A) / ||A||
    bool passed = false;
    std::vector<std::string> notes;
};

// Large background mu: (a) 1/2 I + K* invertible, (b) leading operator bounded below, (c) no dip in sigma_min(A).
// alpha_rule gives alpha per grid point; alpha_static is used for (a). Refuses alpha_static = 0.
AbsenceReport absence_check(const std::vector<double>& grid, const NodeSet& nodes, const Material& inclusion,
                            const Material& background, const AlphaRule& alpha_rule, double alpha_static,
                            const TruncationPolicy& policy = {});

}  // namespace metascreen
