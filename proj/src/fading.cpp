#include "relaycap/fading.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <algorithm>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "relaycap/quadrature.hpp"

namespace relaycap::fading {

namespace {

namespace bm = boost::math;
using quiet = bm::policies::policy<bm::policies::overflow_error<bm::policies::ignore_error>,
                                   bm::policies::underflow_error<bm::policies::ignore_error>,
                                   bm::policies::domain_error<bm::policies::ignore_error>,
                                   bm::policies::evaluation_error<bm::policies::ignore_error>>;

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

bool positive(double x) { return x > 0.0 && std::isfinite(x); }

// log K_nu(x) with fallbacks where K over- or underflows.
double log_bessel_k(double nu, double x) {
  nu = std::abs(nu);
  const double v = bm::cyl_bessel_k(nu, x, quiet());
  if (std::isfinite(v) && v > 0.0) return std::log(v);
  if (x < nu) return std::lgamma(nu) - std::log(2.0) + nu * std::log(2.0 / x);
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x;
}

// Upper incomplete Gamma(a, z) for any real a and z > 0.
double upper_gamma(double a, double z) {
  if (a > 0.0) return bm::tgamma(a, z);
  if (a == 0.0) return bm::expint(1, z);
  return (upper_gamma(a + 1.0, z) - std::pow(z, a) * std::exp(-z)) / a;
}

// E[h(U)] for U ~ Gamma(shape, scale), integrated over v = log(U / scale).
template <class F>
double gamma_mixture(double shape, double scale, const F& h) {
  const double lg = std::lgamma(shape);
  const double v_lo = (std::log(1e-18) + lg) / shape - 1.0;
  const double v_hi = std::log(std::max(1.0, shape) + 45.0 + 10.0 * std::sqrt(shape));
  const auto integrand = [&](double v) {
    const double u = std::exp(v);
    const double w = std::exp(shape * v - u - lg);
    return w == 0.0 ? 0.0 : w * h(scale * u);
  };
  quad::Options opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-16;
  return quad::integrate(integrand, v_lo, v_hi, opt).value;
}

// ---- Malaga mixture ---------------------------------------------------------
// Given G, the small-scale power is Rician; averaging over G gives a mixture
// of Gamma(k + 1, theta) laws with Binomial(beta - 1, w) weights for integer
// beta and NegativeBinomial(beta, w) weights otherwise, w = O'/(g beta + O').

struct MalagaMixture {
  std::vector<double> weights;
  double theta;
  double tail;
};

bool is_integer(double x) { return x == std::floor(x) && x >= 1.0 && x < 1e6; }

MalagaMixture malaga_mixture(const Malaga& m) {
  const double g = 2.0 * m.b0 * (1.0 - m.rho);
  const double w = m.omega_prime / (g * m.beta + m.omega_prime);
  MalagaMixture mix;
  mix.tail = 0.0;
  if (is_integer(m.beta)) {
    const int n = static_cast<int>(m.beta) - 1;
    mix.theta = g / (1.0 - w);
    for (int k = 0; k <= n; ++k) {
      const double lw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                        (w > 0.0 ? k * std::log(w) : (k == 0 ? 0.0 : -kInf)) +
                        (n - k) * std::log1p(-w);
      mix.weights.push_back(std::exp(lw));
    }
    return mix;
  }
  mix.theta = g;
  const int cap = m.series_terms > 0 ? m.series_terms : 100000;
  double total = 0.0;
  for (int k = 0; k < cap; ++k) {
    const double lw = std::lgamma(k + m.beta) - std::lgamma(m.beta) - std::lgamma(k + 1.0) +
                      m.beta * std::log1p(-w) + (w > 0.0 ? k * std::log(w) : (k == 0 ? 0.0 : -kInf));
    const double wk = std::exp(lw);
    mix.weights.push_back(wk);
    total += wk;
    if (m.series_terms <= 0 && k > m.beta && 1.0 - total < 1e-16) break;
  }
  mix.tail = std::max(0.0, 1.0 - total);
  return mix;
}

double malaga_irradiance_moment(const Malaga& m, int r) {
  const double g = 2.0 * m.b0 * (1.0 - m.rho);
  const double o = m.omega_prime;
  if (r == 1) return o + g;
  const double ey2 = o * o * (1.0 + 1.0 / m.beta) + 4.0 * o * g + 2.0 * g * g;
  return (1.0 + 1.0 / m.alpha) * ey2;
}

double malaga_scale(const Malaga& m) {
  return m.mean_snr / malaga_irradiance_moment(m, m.detection_order);
}

// Density and survival of the normalized irradiance, z = alpha t / theta.
double malaga_irradiance_pdf(const Malaga& m, const MalagaMixture& mix, double t) {
  if (t <= 0.0) return 0.0;
  const double z = m.alpha * t / mix.theta;
  const double lz = std::log(z), sz = 2.0 * std::sqrt(z);
  const double lga = std::lgamma(m.alpha);
  double acc = 0.0;
  for (std::size_t k = 0; k < mix.weights.size(); ++k) {
    if (mix.weights[k] == 0.0) continue;
    const double b = k + 1.0;
    const double lv = std::log(2.0) + 0.5 * (m.alpha + b) * lz + log_bessel_k(m.alpha - b, sz) -
                      lga - std::lgamma(b) - std::log(t);
    acc += mix.weights[k] * std::exp(lv);
  }
  return acc;
}

double malaga_irradiance_cdf(const Malaga& m, const MalagaMixture& mix, double t) {
  double mass = 0.0;
  for (double w : mix.weights) mass += w;
  if (t <= 0.0) return 0.0;
  const double z = m.alpha * t / mix.theta;
  const double lz = std::log(z), sz = 2.0 * std::sqrt(z);
  const double lga = std::lgamma(m.alpha);
  // S(t) = sum_i Q_i T_i(z), Q_i = sum_{k >= i} w_k,
  // T_i(z) = 2 z^{(alpha+i)/2} K_{alpha-i}(2 sqrt z) / (Gamma(alpha) i!).
  double survival = 0.0;
  double q = mass;
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    const double lv = std::log(2.0) + 0.5 * (m.alpha + i) * lz + log_bessel_k(m.alpha - i, sz) -
                      lga - std::lgamma(i + 1.0);
    survival += q * std::exp(lv);
    q -= mix.weights[i];
    if (q <= 0.0) break;
  }
  return std::clamp(mass - survival, 0.0, mass);
}

// ---- Gamma-Gamma with pointing errors --------------------------------------
// With c = t / Y: P[X P <= c] = P[X <= c] + c^{xi^2} E[X^{-xi^2}; X > c], whose
// c-derivative reduces to xi^2 c^{xi^2-1} alpha^{xi^2} G(alpha - xi^2, alpha c)/G(alpha).

struct GGOrder {
  double inner, outer;  // X shape (closed form), Y shape (mixture)
};

GGOrder gg_order(const GammaGamma& m) {
  return m.alpha >= m.beta ? GGOrder{m.alpha, m.beta} : GGOrder{m.beta, m.alpha};
}

double gg_irradiance_cdf(const GammaGamma& m, double t) {
  if (t <= 0.0) return 0.0;
  const auto [a, b] = gg_order(m);
  const double x2 = m.pointing * m.pointing;
  const double lga = std::lgamma(a);
  const auto inner = [&](double y) {
    const double c = t / y;
    const double head = bm::gamma_p(a, a * c);
    const double tail = std::exp(x2 * std::log(a * c) - lga) * upper_gamma(a - x2, a * c);
    return head + tail;
  };
  return std::clamp(gamma_mixture(b, 1.0 / b, inner), 0.0, 1.0);
}

double gg_irradiance_pdf(const GammaGamma& m, double t) {
  if (t <= 0.0) return 0.0;
  const auto [a, b] = gg_order(m);
  const double x2 = m.pointing * m.pointing;
  const double lga = std::lgamma(a);
  const auto inner = [&](double y) {
    const double c = t / y;
    return x2 * std::exp((x2 - 1.0) * std::log(c) + x2 * std::log(a) - lga) *
           upper_gamma(a - x2, a * c) / y;
  };
  return gamma_mixture(b, 1.0 / b, inner);
}

double gg_irradiance_moment(const GammaGamma& m, double k) {
  const double x2 = m.pointing * m.pointing;
  return std::exp(std::lgamma(m.alpha + k) + std::lgamma(m.beta + k) - std::lgamma(m.alpha) -
                  std::lgamma(m.beta) - k * std::log(m.alpha * m.beta)) *
         x2 / (x2 + k);
}

// ---- double generalized Gamma ----------------------------------------------

double gen_gamma_factor_moment(double alpha, double m, double omega, double k) {
  return std::exp(std::lgamma(m + k / alpha) - std::lgamma(m) + (k / alpha) * std::log(omega / m));
}

double dgg_irradiance_moment(const DoubleGG& d, double k) {
  return gen_gamma_factor_moment(d.alpha1, d.m1, d.omega1, k) *
         gen_gamma_factor_moment(d.alpha2, d.m2, d.omega2, k);
}

double dgg_scale(const DoubleGG& d) {
  return d.mu_r * std::pow(d.path_loss, d.detection_order);
}

// I = U^{1/alpha1} I_y with U ~ Gamma(m1, omega1/m1).
double dgg_irradiance_cdf(const DoubleGG& d, double t) {
  if (t <= 0.0) return 0.0;
  const auto inner = [&](double u) {
    const double y = t / std::pow(u, 1.0 / d.alpha1);
    return bm::gamma_p(d.m2, (d.m2 / d.omega2) * std::pow(y, d.alpha2));
  };
  return std::clamp(gamma_mixture(d.m1, d.omega1 / d.m1, inner), 0.0, 1.0);
}

double dgg_irradiance_pdf(const DoubleGG& d, double t) {
  if (t <= 0.0) return 0.0;
  const double lgm2 = std::lgamma(d.m2);
  const auto inner = [&](double u) {
    const double x = std::pow(u, 1.0 / d.alpha1);
    const double y = t / x;
    const double z = (d.m2 / d.omega2) * std::pow(y, d.alpha2);
    // density of I_y at y, divided by x
    return std::exp(std::log(d.alpha2) + d.m2 * std::log(z) - z - lgm2 - std::log(y)) / x;
  };
  return gamma_mixture(d.m1, d.omega1 / d.m1, inner);
}

// SNR-domain wrappers for gamma = s * I^r.
struct PowerMap {
  double s;
  int r;
  double irradiance(double g) const { return std::pow(g / s, 1.0 / r); }
  double jacobian(double g) const { return irradiance(g) / (r * g); }
};

PowerMap gg_map(const GammaGamma& m) {
  return {m.mu_r / std::pow(m.h_const, m.detection_order), m.detection_order};
}
PowerMap dgg_map(const DoubleGG& d) { return {dgg_scale(d), d.detection_order}; }
PowerMap malaga_map(const Malaga& m) { return {malaga_scale(m), m.detection_order}; }

// Weibull-Gamma: W power-domain Weibull with shape k = beta/2 and unit mean.
struct WGParts {
  double k, lambda;
};
WGParts wg_parts(const WeibullGamma& m) {
  return {0.5 * m.weibull_shape, 1.0 / std::tgamma(1.0 + 2.0 / m.weibull_shape)};
}

foxh::HDensity single(double kappa, double delta, double power, foxh::HParams h) {
  return {kappa, delta, power, std::move(h)};
}

// Returns Gamma(m+1/xi)/Gamma(m).
double gen_gamma_mean_factor(double shape, double power) {
  return std::exp(std::lgamma(shape + 1.0 / power) - std::lgamma(shape));
}

}  // namespace

std::string name(const Model& model) {
  return std::visit(overloaded{[](const Exponential&) { return "exponential"; },
                               [](const Gamma&) { return "gamma"; },
                               [](const Weibull&) { return "weibull"; },
                               [](const GeneralizedGamma&) { return "generalized_gamma"; },
                               [](const WeibullGamma&) { return "weibull_gamma"; },
                               [](const GammaGamma&) { return "gamma_gamma"; },
                               [](const DoubleGG&) { return "double_gg"; },
                               [](const Malaga&) { return "malaga"; },
                               [](const GenericH&) { return "generic_h"; }},
                    model);
}

Weibull make_weibull(double shape, double mean) {
  require(positive(shape), "weibull shape must be positive");
  return {shape, mean, std::tgamma(1.0 + 1.0 / shape)};
}

GeneralizedGamma make_generalized_gamma(double shape, double power, double mean) {
  require(positive(shape) && positive(power), "generalized gamma shape and power must be positive");
  return {shape, power, mean, gen_gamma_mean_factor(shape, power)};
}

GammaGamma make_gamma_gamma(double alpha, double beta, double pointing, int r, double mean) {
  GammaGamma m{alpha, beta, pointing, r, 0.0, 1.0};
  require(positive(pointing), "pointing must be positive");
  m.h_const = pointing * pointing / (pointing * pointing + 1.0);
  validate(m);
  return std::get<GammaGamma>(with_mean_snr(m, mean));
}

DoubleGG make_double_gg(double alpha1, double alpha2, double m1, double m2, double omega1,
                        double omega2, int r, double mean) {
  DoubleGG d{alpha1, alpha2, m1, m2, omega1, omega2, r, 1.0, 1.0};
  validate(d);
  return std::get<DoubleGG>(with_mean_snr(d, mean));
}

Malaga make_malaga(double alpha, double beta, double omega_prime, double b0, double rho, int r,
                   double mean) {
  Malaga m{alpha, beta, omega_prime, b0, rho, 0, r, mean};
  validate(m);
  return m;
}

void validate(const Model& model) {
  std::visit(
      overloaded{
          [](const Exponential& m) { require(positive(m.mean_snr), "mean_snr must be positive"); },
          [](const Gamma& m) {
            require(positive(m.shape) && positive(m.mean_snr), "gamma shape and mean_snr must be positive");
          },
          [](const Weibull& m) {
            require(positive(m.shape) && positive(m.mean_snr) && positive(m.scale_const),
                    "weibull shape, mean_snr and scale_const must be positive");
          },
          [](const GeneralizedGamma& m) {
            require(positive(m.shape) && positive(m.power) && positive(m.mean_snr) &&
                        positive(m.scale_const),
                    "generalized gamma fields must be positive");
          },
          [](const WeibullGamma& m) {
            require(positive(m.weibull_shape) && positive(m.gamma_shape) && positive(m.mean_power),
                    "weibull-gamma fields must be positive");
          },
          [](const GammaGamma& m) {
            require(positive(m.alpha) && positive(m.beta) && positive(m.pointing) &&
                        positive(m.h_const) && positive(m.mu_r),
                    "gamma-gamma fields must be positive");
            require(m.detection_order == 1 || m.detection_order == 2, "detection_order must be 1 or 2");
          },
          [](const DoubleGG& d) {
            require(positive(d.alpha1) && positive(d.alpha2) && positive(d.m1) && positive(d.m2) &&
                        positive(d.omega1) && positive(d.omega2) && positive(d.mu_r) &&
                        positive(d.path_loss),
                    "double GG fields must be positive");
            require(d.detection_order == 1 || d.detection_order == 2, "detection_order must be 1 or 2");
          },
          [](const Malaga& m) {
            require(positive(m.alpha) && positive(m.beta) && positive(m.b0) && positive(m.mean_snr),
                    "malaga alpha, beta, b0 and mean_snr must be positive");
            require(m.omega_prime >= 0.0 && std::isfinite(m.omega_prime), "omega_prime must be >= 0");
            require(m.rho >= 0.0 && m.rho < 1.0, "rho must lie in [0, 1): the diffuse power 2 b0 (1 - rho) must be positive");
            require(m.detection_order == 1 || m.detection_order == 2, "detection_order must be 1 or 2");
            require(m.series_terms >= 0, "series_terms must be >= 0");
            const double tail = malaga_series_tail(m);
            if (tail > 1e-6) {
              throw Error(ErrorCode::NotNormalized,
                          "malaga series truncated at " + std::to_string(m.series_terms) +
                              " terms leaves mass " + std::to_string(tail));
            }
          },
          [](const GenericH& m) {
            require(positive(m.kappa) && positive(m.delta), "kappa and delta must be positive");
            if (auto e = foxh::validate(m.h)) throw *e;
            const auto mass = foxh::mellin_moment(m.h, m.kappa, m.delta, 0.0);
            if (!mass || std::abs(*mass - 1.0) > 1e-6) {
              std::ostringstream os;
              os << "density integrates to " << (mass ? *mass : kInf);
              throw Error(ErrorCode::NotNormalized, os.str());
            }
          }},
      model);
}

double malaga_series_tail(const Malaga& model) { return malaga_mixture(model).tail; }

double mean_snr(const Model& model) {
  return std::visit(
      overloaded{
          [](const Exponential& m) { return m.mean_snr; },
          [](const Gamma& m) { return m.mean_snr; },
          [](const Weibull& m) { return m.mean_snr * std::tgamma(1.0 + 1.0 / m.shape) / m.scale_const; },
          [](const GeneralizedGamma& m) {
            return m.mean_snr / m.scale_const * gen_gamma_mean_factor(m.shape, m.power);
          },
          [](const WeibullGamma& m) { return m.mean_power; },
          [](const GammaGamma& m) {
            return gg_map(m).s * gg_irradiance_moment(m, m.detection_order);
          },
          [](const DoubleGG& d) { return dgg_scale(d) * dgg_irradiance_moment(d, d.detection_order); },
          [](const Malaga& m) { return m.mean_snr; },
          [](const GenericH& m) {
            const auto v = foxh::mellin_moment(m.h, m.kappa, m.delta, 1.0);
            return v ? *v : kInf;
          }},
      model);
}

Model with_mean_snr(const Model& model, double s) {
  require(positive(s), "mean SNR must be positive");
  const double c = s / mean_snr(model);
  require(positive(c), "model has no finite mean to rescale");
  return std::visit(overloaded{[&](Exponential m) -> Model { m.mean_snr = s; return m; },
                               [&](Gamma m) -> Model { m.mean_snr = s; return m; },
                               [&](Weibull m) -> Model { m.mean_snr *= c; return m; },
                               [&](GeneralizedGamma m) -> Model { m.mean_snr *= c; return m; },
                               [&](WeibullGamma m) -> Model { m.mean_power = s; return m; },
                               [&](GammaGamma m) -> Model { m.mu_r *= c; return m; },
                               [&](DoubleGG d) -> Model { d.mu_r *= c; return d; },
                               [&](Malaga m) -> Model { m.mean_snr = s; return m; },
                               [&](GenericH m) -> Model {
                                 m.kappa /= c;
                                 m.delta /= c;
                                 return m;
                               }},
                    model);
}

std::vector<foxh::HDensity> to_h(const Model& model) {
  using foxh::HParams;
  return std::visit(
      overloaded{
          [](const Exponential& m) -> std::vector<foxh::HDensity> {
            return {single(1.0 / m.mean_snr, 1.0 / m.mean_snr, 0.0, HParams{1, 0, {}, {{0.0, 1.0}}})};
          },
          [](const Gamma& m) -> std::vector<foxh::HDensity> {
            const double d = m.shape / m.mean_snr;
            return {single(d / std::tgamma(m.shape), d, 0.0, HParams{1, 0, {}, {{m.shape - 1.0, 1.0}}})};
          },
          [](const Weibull& m) -> std::vector<foxh::HDensity> {
            const double d = m.scale_const / m.mean_snr;
            return {single(d, d, 0.0, HParams{1, 0, {}, {{1.0 - 1.0 / m.shape, 1.0 / m.shape}}})};
          },
          [](const GeneralizedGamma& m) -> std::vector<foxh::HDensity> {
            const double d = m.scale_const / m.mean_snr;
            return {single(d / std::tgamma(m.shape), d, 0.0,
                           HParams{1, 0, {}, {{m.shape - 1.0 / m.power, 1.0 / m.power}}})};
          },
          [](const WeibullGamma&) -> std::vector<foxh::HDensity> {
            throw Error(ErrorCode::UnsupportedHForm,
                        "weibull_gamma is evaluated through its Gamma mixture integral");
          },
          [](const GammaGamma& m) -> std::vector<foxh::HDensity> {
            const double x2 = m.pointing * m.pointing;
            const double r = m.detection_order;
            const double kappa = x2 / (std::tgamma(m.alpha) * std::tgamma(m.beta));
            const double delta = std::pow(m.h_const * m.alpha * m.beta, r) / m.mu_r;
            return {single(kappa, delta, -1.0,
                           HParams{3, 0, {{x2 + 1.0, r}}, {{x2, r}, {m.alpha, r}, {m.beta, r}}})};
          },
          [](const DoubleGG& d) -> std::vector<foxh::HDensity> {
            const double delta = std::pow(d.m1 / d.omega1, 1.0 / d.alpha1) *
                                 std::pow(d.m2 / d.omega2, 1.0 / d.alpha2);
            const foxh::HDensity irr = single(
                delta / (std::tgamma(d.m1) * std::tgamma(d.m2)), delta, 0.0,
                HParams{2, 0, {}, {{d.m1 - 1.0 / d.alpha1, 1.0 / d.alpha1}, {d.m2 - 1.0 / d.alpha2, 1.0 / d.alpha2}}});
            return {foxh::power_transform(irr, dgg_scale(d), d.detection_order)};
          },
          [](const Malaga& m) -> std::vector<foxh::HDensity> {
            if (!is_integer(m.beta) && m.series_terms <= 0) {
              throw Error(ErrorCode::SeriesTruncationRequired,
                          "non-integer beta needs series_terms for the H-series");
            }
            const MalagaMixture mix = malaga_mixture(m);
            const double delta = m.alpha / mix.theta;
            const double lga = std::lgamma(m.alpha);
            std::vector<foxh::HDensity> terms;
            const double top = *std::max_element(mix.weights.begin(), mix.weights.end());
            for (std::size_t k = 0; k < mix.weights.size(); ++k) {
              // Components below double precision of the sum are dropped; the
              // Gamma factors of their rows would overflow the contour integrand.
              if (mix.weights[k] < 1e-18 * top) continue;
              const double kappa = mix.weights[k] * delta * std::exp(-lga - std::lgamma(k + 1.0));
              const foxh::HDensity irr =
                  single(kappa, delta, 0.0, HParams{2, 0, {}, {{m.alpha - 1.0, 1.0}, {double(k), 1.0}}});
              terms.push_back(foxh::power_transform(irr, malaga_scale(m), m.detection_order));
            }
            return terms;
          },
          [](const GenericH& m) -> std::vector<foxh::HDensity> {
            return {single(m.kappa, m.delta, 0.0, m.h)};
          }},
      model);
}

std::optional<double> pdf_elementary(const Model& model, double g) {
  if (!(g > 0.0)) return 0.0;
  return std::visit(
      overloaded{
          [&](const Exponential& m) -> std::optional<double> { return std::exp(-g / m.mean_snr) / m.mean_snr; },
          [&](const Gamma& m) -> std::optional<double> {
            const double b = m.shape / m.mean_snr;
            return b * bm::gamma_p_derivative(m.shape, b * g);
          },
          [&](const Weibull& m) -> std::optional<double> {
            const double th = m.mean_snr / m.scale_const;
            const double z = std::pow(g / th, m.shape);
            return std::isfinite(z) ? m.shape / g * z * std::exp(-z) : 0.0;
          },
          [&](const GeneralizedGamma& m) -> std::optional<double> {
            const double th = m.mean_snr / m.scale_const;
            const double z = std::pow(g / th, m.power);
            if (!std::isfinite(z)) return 0.0;
            return m.power / g * std::exp(m.shape * std::log(z) - z - std::lgamma(m.shape));
          },
          [&](const WeibullGamma& m) -> std::optional<double> {
            const auto [k, lambda] = wg_parts(m);
            const auto inner = [&](double u) {
              const double w = g / u;
              const double z = std::pow(w / lambda, k);
              return k / w * z * std::exp(-z) / u;
            };
            return gamma_mixture(m.gamma_shape, m.mean_power / m.gamma_shape, inner);
          },
          [&](const GammaGamma& m) -> std::optional<double> {
            const PowerMap map = gg_map(m);
            const double t = map.irradiance(g);
            // I_n = h_const * I where I is the table variable
            return gg_irradiance_pdf(m, t) * map.jacobian(g);
          },
          [&](const DoubleGG& d) -> std::optional<double> {
            const PowerMap map = dgg_map(d);
            return dgg_irradiance_pdf(d, map.irradiance(g)) * map.jacobian(g);
          },
          [&](const Malaga& m) -> std::optional<double> {
            const PowerMap map = malaga_map(m);
            return malaga_irradiance_pdf(m, malaga_mixture(m), map.irradiance(g)) * map.jacobian(g);
          },
          [&](const GenericH&) -> std::optional<double> { return std::nullopt; }},
      model);
}

std::optional<double> cdf_elementary(const Model& model, double g) {
  if (!(g > 0.0)) return 0.0;
  return std::visit(
      overloaded{
          [&](const Exponential& m) -> std::optional<double> { return -std::expm1(-g / m.mean_snr); },
          [&](const Gamma& m) -> std::optional<double> {
            return bm::gamma_p(m.shape, m.shape * (g / m.mean_snr));
          },
          [&](const Weibull& m) -> std::optional<double> {
            return -std::expm1(-std::pow((g / m.mean_snr) * m.scale_const, m.shape));
          },
          [&](const GeneralizedGamma& m) -> std::optional<double> {
            return bm::gamma_p(m.shape, std::pow((g / m.mean_snr) * m.scale_const, m.power));
          },
          [&](const WeibullGamma& m) -> std::optional<double> {
            const auto [k, lambda] = wg_parts(m);
            const auto inner = [&](double u) { return -std::expm1(-std::pow(g / (u * lambda), k)); };
            return std::clamp(gamma_mixture(m.gamma_shape, m.mean_power / m.gamma_shape, inner), 0.0, 1.0);
          },
          [&](const GammaGamma& m) -> std::optional<double> {
            return gg_irradiance_cdf(m, gg_map(m).irradiance(g));
          },
          [&](const DoubleGG& d) -> std::optional<double> {
            return dgg_irradiance_cdf(d, dgg_map(d).irradiance(g));
          },
          [&](const Malaga& m) -> std::optional<double> {
            return malaga_irradiance_cdf(m, malaga_mixture(m), malaga_map(m).irradiance(g));
          },
          [&](const GenericH&) -> std::optional<double> { return std::nullopt; }},
      model);
}

double pdf_h(const Model& model, double g) {
  if (!(g > 0.0)) return 0.0;
  double acc = 0.0;
  for (const auto& term : to_h(model)) acc += foxh::density(term, g).value;
  return std::max(acc, 0.0);
}

double cdf_h(const Model& model, double g) {
  if (!(g > 0.0)) return 0.0;
  double acc = 0.0;
  for (const auto& term : to_h(model)) acc += foxh::distribution(term, g).value;
  return std::clamp(acc, 0.0, 1.0);
}

bool has_closed_form(const Model& model) {
  return std::holds_alternative<Exponential>(model) || std::holds_alternative<Gamma>(model) ||
         std::holds_alternative<Weibull>(model) || std::holds_alternative<GeneralizedGamma>(model);
}

namespace {
bool prefers_h(const Model& model) {
  return std::holds_alternative<GammaGamma>(model) || std::holds_alternative<DoubleGG>(model) ||
         std::holds_alternative<GenericH>(model);
}
}  // namespace

double pdf(const Model& model, double g) {
  return prefers_h(model) ? pdf_h(model, g) : *pdf_elementary(model, g);
}

double cdf(const Model& model, double g) {
  return prefers_h(model) ? cdf_h(model, g) : *cdf_elementary(model, g);
}

double sample(const Model& model, CounterRng& rng) {
  const auto gamma_draw = [&](double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(rng);
  };
  return std::visit(
      overloaded{
          [&](const Exponential& m) { return -m.mean_snr * std::log(rng.uniform()); },
          [&](const Gamma& m) { return gamma_draw(m.shape, m.mean_snr / m.shape); },
          [&](const Weibull& m) {
            return m.mean_snr / m.scale_const * std::pow(-std::log(rng.uniform()), 1.0 / m.shape);
          },
          [&](const GeneralizedGamma& m) {
            return m.mean_snr / m.scale_const * std::pow(gamma_draw(m.shape, 1.0), 1.0 / m.power);
          },
          [&](const WeibullGamma& m) {
            const auto [k, lambda] = wg_parts(m);
            const double w = lambda * std::pow(-std::log(rng.uniform()), 1.0 / k);
            return gamma_draw(m.gamma_shape, m.mean_power / m.gamma_shape) * w;
          },
          [&](const GammaGamma& m) {
            const double x = gamma_draw(m.alpha, 1.0 / m.alpha);
            const double y = gamma_draw(m.beta, 1.0 / m.beta);
            const double p = std::pow(rng.uniform(), 1.0 / (m.pointing * m.pointing));
            return gg_map(m).s * std::pow(x * y * p, m.detection_order);
          },
          [&](const DoubleGG& d) {
            const double x = std::pow(gamma_draw(d.m1, d.omega1 / d.m1), 1.0 / d.alpha1);
            const double y = std::pow(gamma_draw(d.m2, d.omega2 / d.m2), 1.0 / d.alpha2);
            return dgg_scale(d) * std::pow(x * y, d.detection_order);
          },
          [&](const Malaga& m) {
            const double x = gamma_draw(m.alpha, 1.0 / m.alpha);
            const double shadow = gamma_draw(m.beta, 1.0 / m.beta);
            const double diffuse = 2.0 * m.b0 * (1.0 - m.rho);
            std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * diffuse));
            const double re = std::sqrt(shadow * m.omega_prime) + normal(rng);
            const double im = normal(rng);
            return malaga_scale(m) * std::pow(x * (re * re + im * im), m.detection_order);
          },
          [&](const GenericH&) -> double {
            throw Error(ErrorCode::InvalidParameter, "generic_h is sampled through HopLaw");
          }},
      model);
}

}  // namespace relaycap::fading
