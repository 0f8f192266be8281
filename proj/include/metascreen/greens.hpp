#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "metascreen/geometry.hpp"

namespace metascreen {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;
using Vec2c = Eigen::Vector2cd;

struct Material {
    double lam = 1.0;
    double mu = 1.0;
    double rho = 1.0;

    Material() = default;
    Material(double lam_, double mu_, double rho_);
    // Throws std::invalid_argument unless mu > 0, rho > 0, lam + 2 mu > 0.
    void validate() const;
    double p_modulus() const { return lam + 2.0 * mu; }
};

struct WaveNumbers {
    double omega = 0.0;
    double k_p = 0.0;
    double k_s = 0.0;
    double c_p = 0.0;
    double c_s = 0.0;
    double alpha = 0.0;
    bool alpha_below_kp = false;  // |alpha| < k_p
};

WaveNumbers wavenumbers(const Material& m, double omega, double alpha = 0.0);

enum class ModeCase { I, II, III };
std::string to_string(ModeCase c);

// Mode label of l = 2 pi n; throws DegenerateModeError when (alpha+l)^2 hits k_s^2 or k_p^2.
ModeCase mode_case(int n, double alpha, const WaveNumbers& wn);

struct DegenerateModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularEvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fourier coefficient c_l(x) of the periodized free-space kernel, normalized so that
// the Lame operator applied to the assembled kernel gives a unit point source.
Mat2c mode_coefficient(int n, double x, const Material& m, double omega, double alpha);
// d/dx of mode_coefficient; x = 0 is rejected.
Mat2c mode_coefficient_deriv(int n, double x, const Material& m, double omega, double alpha);

struct TruncationPolicy {
    int l_max = 20000;         // largest |n| ever summed
    double tol = 1e-11;        // tail tolerance relative to the kernel scale (1/mu + 1/(lam+2mu))
    double d_min = 1e-3;       // below this the Kummer split is mandatory
    double d_kummer = 0.3;     // the Kummer split is used below this vertical separation
};

// Value and first derivatives of a 2x2 kernel.
struct KernelJet {
    Mat2c g = Mat2c::Zero();
    Mat2c d1 = Mat2c::Zero();  // derivative in the first coordinate
    Mat2c d2 = Mat2c::Zero();  // derivative in the second coordinate
};

// Evaluator of the quasi-periodic Dirichlet kernel G_+ for fixed (material, omega, alpha).
class GreenFunction {
public:
    GreenFunction(const Material& m, double omega, double alpha, const TruncationPolicy& policy = {});

    const Material& material() const { return mat_; }
    double omega() const { return omega_; }
    double alpha() const { return alpha_; }
    const TruncationPolicy& policy() const { return policy_; }

    Mat2c value(const Vec2& x, const Vec2& y) const;
    // Derivatives with respect to x.
    KernelJet jet_x(const Vec2& x, const Vec2& y) const;
    // Derivatives with respect to y.
    KernelJet jet_y(const Vec2& x, const Vec2& y) const;

    // Traction in x (normal nu_x) applied to each column of G_+(., y).
    Mat2c traction_x(const Vec2& x, const Vec2& y, const Vec2& nu_x) const;
    // Conormal derivative in y (normal nu_y) of each column of G_+(x, .).
    Mat2c conormal_y(const Vec2& x, const Vec2& y, const Vec2& nu_y) const;

    // Periodized free-space part sum_l c_l(d) e^{i(alpha+l)t}, with derivatives in t and d.
    // When the zero mode is singular (omega = 0, alpha = 0) it is replaced by diag(|d|/2mu, |d|/2(lam+2mu)),
    // which differs from it by a constant that cancels in G_+.
    KernelJet direct(double t, double d, bool want_derivs) const;

    // Log-singularity coefficient A(z) of the free-space kernel: G = A(x-y) log|x-y| + smoother.
    Mat2c log_coefficient(const Vec2& z) const;
    // Traction (normal nu, derivative in x) of the columns of A(x - y); z = x - y.
    Mat2c log_coefficient_traction(const Vec2& z, const Vec2& nu) const;
    // Coefficient of cot((t-s)/2) in the traction kernel times |gamma'(s)|, for unit tangent/normal at t.
    Mat2c cauchy_coefficient(const Vec2& tangent, const Vec2& normal) const;

    // Traction of the columns of a displacement jet: lam div nu + mu (grad + grad^T) nu.
    Mat2c traction(const Mat2c& dz1, const Mat2c& dz2, const Vec2& nu) const;

    // Mode bound of a plain (non-accelerated) sum at vertical separation d.
    int modes_for_separation(double d) const;

private:
    struct Mode {
        double beta;
        cplx ks;  // kappa_s, Re >= 0, outgoing when imaginary
        cplx kp;  // kappa_p
    };
    // One term of a large-|l| expansion: c * D^k * |l|^m * sgn(l)^a * e^{-|l| D}.
    struct Term {
        int k, m, a;
        cplx c;
    };
    using Series = std::vector<Term>;

    Mode mode(int n) const;
    // c_l(d) and d/dd c_l(d) (one-sided from above at d = 0).
    void mode_pair(const Mode& md, double d, Mat2c& c, Mat2c& dc) const;
    void build_expansion();
    void check_pair(const Vec2& x, const Vec2& y) const;

    Material mat_;
    double omega_, alpha_, alpha_red_;
    TruncationPolicy policy_;
    double ks2_, kp2_, sigma_, eta_, A_;
    bool skip_zero_;
    int n_prop_;
    // entries 11, 22 and the even factor of 12 (c_12 = sgn(d) e12), with D- and t-derivatives
    Series ser_[3], ser_D_[3], ser_T_[3];
};

// Free-function entry points.
Mat2c green_plus(const Vec2& x, const Vec2& y, const Material& m, double omega, double alpha,
                 const TruncationPolicy& policy = {});
Mat2c green_plus_conormal_y(const Vec2& x, const Vec2& y, const Vec2& nu_y, const Material& m, double omega,
                            double alpha, const TruncationPolicy& policy = {});
Mat2c green_plus_traction_x(const Vec2& x, const Vec2& y, const Vec2& nu_x, const Material& m, double omega,
                            double alpha, const TruncationPolicy& policy = {});

// Constants of the mu-large expansion: alpha = delta omega mu^{-1/2}.
struct AsymptoticParams {
    double delta = 0.5;
    double rho = 1.0;
    double C = 0.5;  // mu / (lam + 2 mu)
    double alpha_s = 0.0;
    double alpha_p = 0.0;

    double b_s(double l) const { return -rho / (2.0 * l); }
    double b_p(double l) const { return -rho * C / (2.0 * l); }
};

// Throws std::invalid_argument unless 0 < delta < rho and rho C - delta^2 >= 0.
AsymptoticParams make_asymptotic_params(double delta, const Material& m);

enum class LeadingForm {
    Printed,    // the l-blocks exactly as printed, signed 1/l, 1/(4 pi rho) normalization
    Consistent  // mu * G_+^{alpha,0}: the omega -> 0 limit the operator identities rely on
};

// Leading kernel G_{+,1}^alpha in the printed block form.
Mat2c green_leading(const Vec2& x, const Vec2& y, double alpha, const AsymptoticParams& ap, int n_max = 0);

// Propagating (l = 0) far-field kernel for x2 > y2 > 0.
Mat2c far_kernel(const Vec2& x, const Vec2& y, double alpha, const AsymptoticParams& ap, const Material& m);

}  // namespace metascreen
