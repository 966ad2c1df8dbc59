#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "relaycap/error.hpp"

// Numerical evaluation of the univariate Fox H-function
//
//   H^{m,n}_{p,q}(x) = 1/(2 pi i) \int Theta(s) x^{-s} ds,
//   Theta(s) = prod_{j<m} G(b_j + B_j s) prod_{j<n} G(1 - a_j - A_j s)
//            / (prod_{j>=n} G(a_j + A_j s) prod_{j>=m} G(1 - b_j - B_j s)),
//
// along a vertical line Re(s) = c separating the poles of the two numerator
// products. All Gamma factors are combined in log space.
namespace relaycap::foxh {

/// One (shift, scale) entry of a parameter row: (a_j, A_j) or (b_j, B_j).
struct Pair {
  double shift = 0.0;
  double scale = 1.0;

  bool operator==(const Pair&) const = default;
};

struct HParams {
  int m = 0;
  int n = 0;
  std::vector<Pair> upper;  // (a_j, A_j), j = 1..p
  std::vector<Pair> lower;  // (b_j, B_j), j = 1..q

  int p() const { return static_cast<int>(upper.size()); }
  int q() const { return static_cast<int>(lower.size()); }

  bool operator==(const HParams&) const = default;
};

struct ContourSpec {
  double c = 0.0;
  double half_length = 60.0;
  int max_points = 1 << 16;
  double rel_tol = 1e-10;
};

/// Open interval of admissible contour abscissae; infinite ends mean that
/// side has no poles.
struct PoleGap {
  double left;
  double right;
};

struct HValue {
  double value = 0.0;
  double abs_error = 0.0;
  double imag_residue = 0.0;  // |Im| of the contour sum, should vanish
  int points = 0;
};

/// Returns the violated invariant, or nullopt when the parameters are valid.
std::optional<Error> validate(const HParams& params);

PoleGap pole_gap(const HParams& params);

/// Default contour: gap midpoint, or one unit off the only bounded side.
ContourSpec select_contour(const HParams& params);

/// Contour minimizing |integrand| on the real axis for this x (saddle
/// point), kept at least min(0.5, gap/4) away from the nearest pole.
ContourSpec saddle_contour(const HParams& params, double x);

/// log Gamma(z) by Lanczos approximation with reflection for Re z < 1/2.
/// Imaginary part is only determined modulo 2 pi in the reflected half plane.
std::complex<double> log_gamma_complex(std::complex<double> z);

/// log Theta(s); a real part of -inf signals a zero of Theta (pole of a
/// denominator Gamma).
std::complex<double> log_mellin_kernel(const HParams& params, std::complex<double> s);

HValue eval_h(const HParams& params, double x, const ContourSpec& contour);
HValue eval_h(const HParams& params, double x);

/// \int_0^x H(t) dt along Re(s) = c < 1 with the 1/(1 - s) integrand factor.
HValue eval_h_cdf_kernel(const HParams& params, double x, const ContourSpec& contour);

/// Same integral with automatic contour placement. When the total mass
/// Theta(1) exists and the saddle favours it, evaluates Theta(1) minus the
/// tail \int_x^inf H through a contour right of s = 1.
HValue eval_h_cdf_kernel(const HParams& params, double x);

/// Mellin transform Theta(s) at real s strictly inside the pole gap.
double mellin_transform(const HParams& params, double s);

/// E[gamma^order] for the density kappa * H(delta * gamma). nullopt means
/// the moment diverges (order + 1 outside the strip of the Mellin transform).
std::optional<double> mellin_moment(const HParams& params, double kappa, double delta,
                                    double order);

/// Rows for x^rho H(x): b_j -> b_j + rho B_j and a_j -> a_j + rho A_j.
HParams shift_rows(const HParams& params, double rho);

/// Rows with every scale multiplied by k; H_k(x) = H(x^{1/k}) / k.
HParams scale_rows(const HParams& params, double k);

/// Density kappa * x^power * H(delta * x) on x > 0.
struct HDensity {
  double kappa = 1.0;
  double delta = 1.0;
  double power = 0.0;
  HParams h;
};

/// Equivalent density with power folded into the rows (power == 0).
HDensity absorb_power(const HDensity& d);

/// Density of scale * X^exponent when X has density d.
HDensity power_transform(const HDensity& d, double scale, double exponent);

HValue density(const HDensity& d, double x);
HValue distribution(const HDensity& d, double x);
std::optional<double> moment(const HDensity& d, double order);

}  // namespace relaycap::foxh
