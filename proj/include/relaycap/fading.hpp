#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "relaycap/foxh.hpp"
#include "relaycap/random.hpp"

// Per-hop SNR fading laws. Every model is a scale family in the SNR:
// with_mean_snr() rescales it without changing its shape.
namespace relaycap::fading {

struct Exponential {
  double mean_snr = 1.0;
  bool operator==(const Exponential&) const = default;
};

struct Gamma {
  double shape = 1.0;  // m
  double mean_snr = 1.0;
  bool operator==(const Gamma&) const = default;
};

/// Weibull in the SNR domain with scale mean_snr / scale_const.
struct Weibull {
  double shape = 1.0;  // kappa_w
  double mean_snr = 1.0;
  double scale_const = 1.0;  // omega; Gamma(1 + 1/shape) makes the mean mean_snr
  bool operator==(const Weibull&) const = default;
};

/// (gamma / theta)^power ~ Gamma(shape, 1) with theta = mean_snr / scale_const.
struct GeneralizedGamma {
  double shape = 1.0;  // m
  double power = 1.0;  // xi_g
  double mean_snr = 1.0;
  double scale_const = 1.0;  // beta_g; Gamma(m + 1/xi)/Gamma(m) makes the mean mean_snr
  bool operator==(const GeneralizedGamma&) const = default;
};

/// gamma = G * W: power-domain Weibull W (amplitude shape weibull_shape,
/// unit mean) with a Gamma(gamma_shape)-distributed mean power of mean mean_power.
struct WeibullGamma {
  double weibull_shape = 2.0;  // beta_wg
  double gamma_shape = 1.0;    // alpha_wg
  double mean_power = 1.0;     // Omega
  bool operator==(const WeibullGamma&) const = default;
};

/// Gamma-Gamma turbulence with pointing errors. Normalized irradiance
/// I = X Y P with X ~ Gamma(alpha, 1/alpha), Y ~ Gamma(beta, 1/beta) and a
/// pointing factor P on [0, 1] with density xi^2 p^(xi^2 - 1); the SNR is
/// gamma = mu_r * (I / h_const)^r.
struct GammaGamma {
  double alpha = 1.0;
  double beta = 1.0;
  double pointing = 1.0;  // xi
  int detection_order = 1;  // r: 1 heterodyne, 2 IM/DD
  double h_const = 0.5;     // xi^2 / (xi^2 + 1)
  double mu_r = 1.0;
  bool operator==(const GammaGamma&) const = default;
};

/// Double generalized Gamma: I = I_x I_y with I_x^alpha1 ~ Gamma(m1, omega1/m1)
/// and I_y^alpha2 ~ Gamma(m2, omega2/m2); gamma = mu_r * (path_loss * I)^r.
struct DoubleGG {
  double alpha1 = 1.0, alpha2 = 1.0;
  double m1 = 1.0, m2 = 1.0;
  double omega1 = 1.0, omega2 = 1.0;
  int detection_order = 1;
  double mu_r = 1.0;
  double path_loss = 1.0;  // A0 * I_l
  bool operator==(const DoubleGG&) const = default;
};

/// Malaga turbulence: I = X |sqrt(G omega_prime) + Z|^2 with
/// X ~ Gamma(alpha, 1/alpha), G ~ Gamma(beta, 1/beta) and Z circular normal of
/// power 2 b0 (1 - rho); gamma = mean_snr * I^r / E[I^r].
struct Malaga {
  double alpha = 1.0;
  double beta = 1.0;
  double omega_prime = 1.0;
  double b0 = 0.25;
  double rho = 0.5;
  int series_terms = 0;  // 0: exact finite sum (integer beta) or automatic truncation
  int detection_order = 1;
  double mean_snr = 1.0;
  bool operator==(const Malaga&) const = default;
};

/// Density kappa * H(delta * gamma).
struct GenericH {
  double kappa = 1.0;
  double delta = 1.0;
  foxh::HParams h;
  bool operator==(const GenericH&) const = default;
};

using Model = std::variant<Exponential, Gamma, Weibull, GeneralizedGamma, WeibullGamma,
                           GammaGamma, DoubleGG, Malaga, GenericH>;

std::string name(const Model& model);

// Constructors that fill the derived constants so the mean SNR is mean_snr.
Weibull make_weibull(double shape, double mean_snr);
GeneralizedGamma make_generalized_gamma(double shape, double power, double mean_snr);
GammaGamma make_gamma_gamma(double alpha, double beta, double pointing, int detection_order,
                            double mean_snr);
DoubleGG make_double_gg(double alpha1, double alpha2, double m1, double m2, double omega1,
                        double omega2, int detection_order, double mean_snr);
Malaga make_malaga(double alpha, double beta, double omega_prime, double b0, double rho,
                   int detection_order, double mean_snr);

/// Throws Error(InvalidParameter) for out-of-range fields and
/// Error(NotNormalized) when the density does not integrate to 1 within 1e-6.
void validate(const Model& model);

/// E[gamma]; infinite for a GenericH without a first moment.
double mean_snr(const Model& model);

/// Same shape, mean SNR s.
Model with_mean_snr(const Model& model, double s);

/// Exact H-form: pdf(g) = sum_k kappa_k g^power_k H_k(delta_k g). One term
/// except for Malaga (one per mixture component of the Gamma-mixed Rician
/// power). Gamma-Gamma keeps the catalog row with power = -1; double GG is
/// the Mellin product H^{2,0}_{0,2} of its two generalized-Gamma factors.
std::vector<foxh::HDensity> to_h(const Model& model);

/// Mass left out by a truncated Malaga series (0 for integer beta).
double malaga_series_tail(const Malaga& model);

// Closed-form, series or mixture-quadrature route; nullopt for GenericH.
std::optional<double> pdf_elementary(const Model& model, double g);
std::optional<double> cdf_elementary(const Model& model, double g);

// H-function route; throws UnsupportedHForm for WeibullGamma.
double pdf_h(const Model& model, double g);
double cdf_h(const Model& model, double g);

// Preferred route: closed form where one exists, else the H-form (Malaga and
// Weibull-Gamma use their series and mixture forms).
double pdf(const Model& model, double g);
double cdf(const Model& model, double g);

/// One draw from the constitutive representation of the model.
/// GenericH is sampled through HopLaw (numerical inverse CDF).
double sample(const Model& model, CounterRng& rng);

/// True when cdf/pdf are cheap closed forms and need no tabulation.
bool has_closed_form(const Model& model);

class Table;

/// Evaluation-ready hop law. Models without cheap closed forms are tabulated
/// once on a log-spaced grid (cubic Hermite in log g) and the table is shared
/// by every rescaled copy.
class HopLaw {
 public:
  explicit HopLaw(Model model);

  const Model& model() const { return model_; }
  double cdf(double g) const;
  double pdf(double g) const;
  double sample(CounterRng& rng) const;
  double quantile(double p) const;
  double mean() const { return mean_; }
  /// Absolute error bound of cdf() (tabulation), 0 for closed forms.
  double cdf_error() const;
  /// Relative error bound of pdf().
  double pdf_error() const;

  HopLaw with_mean_snr(double s) const;

 private:
  HopLaw(Model model, std::shared_ptr<const Table> table, double scale, double mean);

  Model model_;
  std::shared_ptr<const Table> table_;
  double scale_ = 1.0;  // g = scale_ * (table variable)
  double mean_ = 1.0;
};

}  // namespace relaycap::fading
