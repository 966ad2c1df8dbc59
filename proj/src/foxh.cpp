#include "relaycap/foxh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace relaycap::foxh {

namespace {

using cplx = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

bool is_gamma_pole(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// log sin(pi z), stable for large |Im z|.
cplx log_sin_pi(cplx z) {
  // sin(pi z) has period 2 in Re z.
  z.real(z.real() - 2.0 * std::round(0.5 * z.real()));
  if (std::abs(z.imag()) < 8.0) return std::log(std::sin(kPi * z));
  if (z.imag() < 0.0) return std::conj(log_sin_pi(std::conj(z)));
  const cplx i(0.0, 1.0);
  const cplx w = std::exp(2.0 * i * kPi * z);
  return -i * kPi * z + std::log((w - 1.0) / (2.0 * i));
}

enum class Kernel { Density, Cdf, Tail };

cplx log_integrand(const HParams& p, cplx s, double lnx, Kernel kind) {
  cplx v = log_mellin_kernel(p, s) - s * lnx;
  if (kind == Kernel::Cdf) v += lnx - std::log(1.0 - s);
  if (kind == Kernel::Tail) v += lnx - std::log(s - 1.0);
  return v;
}

double real_log_integrand(const HParams& p, double c, double lnx, Kernel kind) {
  const double v = log_integrand(p, cplx(c, 0.0), lnx, kind).real();
  return std::isnan(v) ? kInf : v;
}

// Golden-section minimum of the real-axis log-magnitude on [lo, hi].
double saddle_abscissa(const HParams& p, double lnx, Kernel kind, double lo, double hi) {
  if (!(hi > lo)) return 0.5 * (lo + hi);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = real_log_integrand(p, x1, lnx, kind);
  double f2 = real_log_integrand(p, x2, lnx, kind);
  for (int it = 0; it < 80 && (b - a) > 1e-6 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = real_log_integrand(p, x1, lnx, kind);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = real_log_integrand(p, x2, lnx, kind);
    }
  }
  return f1 < f2 ? x1 : x2;
}

struct Bounds {
  double lo, hi;
};

// Search window for the abscissa inside (left, right).
Bounds search_window(double left, double right) {
  constexpr double kReach = 300.0;
  if (std::isfinite(left) && std::isfinite(right)) {
    const double w = std::min(0.5, 0.25 * (right - left));
    return {left + w, right - w};
  }
  if (std::isfinite(left)) return {left + 0.5, left + kReach};
  if (std::isfinite(right)) return {right - kReach, right - 0.5};
  return {-kReach, kReach};
}

// Saddle abscissa in (left, right). An open side of the gap is searched
// further out while the minimum sits on the window edge (large or small x).
double find_saddle(const HParams& p, double lnx, Kernel kind, double left, double right) {
  Bounds b = search_window(left, right);
  double c = saddle_abscissa(p, lnx, kind, b.lo, b.hi);
  for (int grow = 0; grow < 16; ++grow) {
    const double span = b.hi - b.lo;
    if (!std::isfinite(right) && c > b.hi - 1e-3 * span) {
      b = {b.hi - 1.0, b.hi + 2.0 * span};
    } else if (!std::isfinite(left) && c < b.lo + 1e-3 * span) {
      b = {b.lo - 2.0 * span, b.lo + 1.0};
    } else {
      break;
    }
    c = saddle_abscissa(p, lnx, kind, b.lo, b.hi);
  }
  return c;
}

struct LineSum {
  cplx value;
  double abs_error;
  int points;
};

// (1/2pi) \int_{-inf}^{inf} exp(log_integrand(c + it)) dt by trapezoidal
// sums with step halving; the line is lengthened while its ends are not
// negligible.
LineSum line_integral(const HParams& p, double lnx, Kernel kind, const ContourSpec& spec) {
  if (!(spec.half_length > 0.0) || !(spec.rel_tol > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "contour half_length and rel_tol must be positive");
  }
  const auto f = [&](double t) {
    const cplx lv = log_integrand(p, cplx(spec.c, t), lnx, kind);
    if (lv.real() == -kInf) return cplx(0.0, 0.0);
    if (!(lv.real() < 700.0)) {
      std::ostringstream os;
      os << "log|integrand| = " << lv.real() << " at s = " << spec.c << " + " << t << "i";
      throw Error(ErrorCode::IntegrandOverflow, os.str());
    }
    return std::exp(lv);
  };

  // Shorten the line to where |integrand| has fallen below the double
  // precision noise of its peak; the tail check below lengthens it again if
  // cancellation makes the value much smaller than the peak.
  double half = spec.half_length;
  const double peak = std::max({std::abs(f(0.0)), std::abs(f(0.5)), std::abs(f(-0.5))});
  while (half > 4.0 && std::max(std::abs(f(0.5 * half)), std::abs(f(-0.5 * half))) < 1e-17 * peak) {
    half *= 0.5;
  }
  int intervals = 64;
  cplx acc;
  double l1 = 0.0;
  double h = 0.0;
  double edge = 0.0;
  while (true) {
    h = 2.0 * half / intervals;
    const cplx fl = f(-half), fr = f(half);
    edge = std::max(std::abs(fl), std::abs(fr));
    acc = 0.5 * (fl + fr);
    l1 = 0.5 * (std::abs(fl) + std::abs(fr));
    for (int i = 1; i < intervals; ++i) {
      const cplx v = f(-half + i * h);
      acc += v;
      l1 += std::abs(v);
    }
    const double scale = std::max(std::abs(acc.real()) * h, 1e-14 * l1 * h);
    if (edge <= 1e-3 * spec.rel_tol * scale || edge == 0.0) break;
    if (2 * intervals > spec.max_points) {
      throw Error(ErrorCode::ContourNotConverged,
                  "integrand tail not negligible at |Im s| = " + std::to_string(half));
    }
    half *= 2.0;
    intervals *= 2;
  }

  cplx sum = acc * h;
  double delta = kInf;
  while (true) {
    if (2 * intervals > spec.max_points) {
      throw Error(ErrorCode::ContourNotConverged,
                  "trapezoidal sums did not settle within " + std::to_string(spec.max_points) +
                      " points");
    }
    const double hn = 0.5 * h;
    for (int i = 1; i < 2 * intervals; i += 2) {
      const cplx v = f(-half + i * hn);
      acc += v;
      l1 += std::abs(v);
    }
    intervals *= 2;
    h = hn;
    const cplx next = acc * h;
    delta = std::abs(next - sum);
    sum = next;
    const double noise = 1e-15 * l1 * h;
    if (delta <= spec.rel_tol * std::abs(sum.real()) + noise || delta < 1e-300) {
      const double inv = 0.5 / kPi;
      return {sum * inv, (delta + noise + edge * 2.0) * inv, intervals + 1};
    }
  }
}

HValue finish(const LineSum& ls) {
  HValue r;
  r.value = ls.value.real();
  r.imag_residue = std::abs(ls.value.imag());
  r.abs_error = ls.abs_error;
  r.points = ls.points;
  return r;
}

void require_valid(const HParams& p) {
  if (auto e = validate(p)) throw *e;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidParameter, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::optional<Error> validate(const HParams& params) {
  if (params.m < 0 || params.n < 0 || params.m > params.q() || params.n > params.p()) {
    std::ostringstream os;
    os << "need 0 <= m <= q and 0 <= n <= p, got m=" << params.m << " n=" << params.n
       << " p=" << params.p() << " q=" << params.q();
    return Error(ErrorCode::InvalidOrder, os.str());
  }
  for (const auto& row : {&params.upper, &params.lower}) {
    for (const auto& e : *row) {
      if (!(e.scale > 0.0) || !std::isfinite(e.scale) || !std::isfinite(e.shift)) {
        return Error(ErrorCode::NonPositiveScale,
                     "scale " + std::to_string(e.scale) + " must be positive and finite");
      }
    }
  }
  const PoleGap gap = pole_gap(params);
  if (!(gap.left < gap.right)) {
    std::ostringstream os;
    os << "left poles reach " << gap.left << " but right poles start at " << gap.right;
    return Error(ErrorCode::EmptyContourGap, os.str());
  }
  return std::nullopt;
}

PoleGap pole_gap(const HParams& params) {
  PoleGap g{-kInf, kInf};
  for (int j = 0; j < params.m; ++j) {
    g.left = std::max(g.left, -params.lower[j].shift / params.lower[j].scale);
  }
  for (int j = 0; j < params.n; ++j) {
    g.right = std::min(g.right, (1.0 - params.upper[j].shift) / params.upper[j].scale);
  }
  return g;
}

ContourSpec select_contour(const HParams& params) {
  require_valid(params);
  const PoleGap g = pole_gap(params);
  ContourSpec spec;
  if (std::isfinite(g.left) && std::isfinite(g.right)) {
    spec.c = 0.5 * (g.left + g.right);
  } else if (std::isfinite(g.left)) {
    spec.c = g.left + 1.0;
  } else if (std::isfinite(g.right)) {
    spec.c = g.right - 1.0;
  } else {
    spec.c = 0.0;
  }
  return spec;
}

ContourSpec saddle_contour(const HParams& params, double x) {
  require_valid(params);
  require_positive(x, "x");
  const PoleGap g = pole_gap(params);
  ContourSpec spec;
  spec.c = find_saddle(params, std::log(x), Kernel::Density, g.left, g.right);
  return spec;
}

std::complex<double> log_gamma_complex(std::complex<double> z) {
  if (is_gamma_pole(z)) {
    throw Error(ErrorCode::PoleAtNonPositiveInteger,
                "Gamma has a pole at z = " + std::to_string(z.real()));
  }
  if (z.real() < 0.5) {
    return std::log(kPi) - log_sin_pi(z) - log_gamma_complex(1.0 - z);
  }
  static constexpr std::array<double, 9> coef = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  z -= 1.0;
  cplx sum = coef[0];
  for (std::size_t i = 1; i < coef.size(); ++i) sum += coef[i] / (z + static_cast<double>(i));
  const cplx t = z + g + 0.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

std::complex<double> log_mellin_kernel(const HParams& params, std::complex<double> s) {
  cplx acc;
  for (int j = 0; j < params.q(); ++j) {
    const auto& e = params.lower[j];
    if (j < params.m) {
      acc += log_gamma_complex(e.shift + e.scale * s);
    } else {
      const cplx z = 1.0 - e.shift - e.scale * s;
      if (is_gamma_pole(z)) return {-kInf, 0.0};
      acc -= log_gamma_complex(z);
    }
  }
  for (int j = 0; j < params.p(); ++j) {
    const auto& e = params.upper[j];
    if (j < params.n) {
      acc += log_gamma_complex(1.0 - e.shift - e.scale * s);
    } else {
      const cplx z = e.shift + e.scale * s;
      if (is_gamma_pole(z)) return {-kInf, 0.0};
      acc -= log_gamma_complex(z);
    }
  }
  return acc;
}

HValue eval_h(const HParams& params, double x, const ContourSpec& contour) {
  require_valid(params);
  require_positive(x, "x");
  const PoleGap g = pole_gap(params);
  if (!(contour.c > g.left && contour.c < g.right)) {
    throw Error(ErrorCode::EmptyContourGap, "contour abscissa outside the pole gap");
  }
  return finish(line_integral(params, std::log(x), Kernel::Density, contour));
}

HValue eval_h(const HParams& params, double x) {
  return eval_h(params, x, saddle_contour(params, x));
}

HValue eval_h_cdf_kernel(const HParams& params, double x, const ContourSpec& contour) {
  require_valid(params);
  require_positive(x, "x");
  const PoleGap g = pole_gap(params);
  if (!(contour.c < 1.0)) {
    throw Error(ErrorCode::ContourAbscissaTooLarge, "cdf kernel needs Re(s) < 1");
  }
  if (!(contour.c > g.left && contour.c < g.right)) {
    throw Error(ErrorCode::EmptyContourGap, "contour abscissa outside the pole gap");
  }
  return finish(line_integral(params, std::log(x), Kernel::Cdf, contour));
}

HValue eval_h_cdf_kernel(const HParams& params, double x) {
  require_valid(params);
  require_positive(x, "x");
  const PoleGap g = pole_gap(params);
  if (!(g.left < 1.0)) {
    throw Error(ErrorCode::ContourAbscissaTooLarge,
                "left poles reach " + std::to_string(g.left) + "; no abscissa below 1");
  }
  const double lnx = std::log(x);
  ContourSpec spec;
  spec.c = find_saddle(params, lnx, Kernel::Cdf, g.left, std::min(g.right, 1.0));
  if (g.right > 1.0) {
    const double ct = find_saddle(params, lnx, Kernel::Tail, 1.0, g.right);
    if (real_log_integrand(params, ct, lnx, Kernel::Tail) <
        real_log_integrand(params, spec.c, lnx, Kernel::Cdf)) {
      ContourSpec ts;
      ts.c = ct;
      HValue r = finish(line_integral(params, lnx, Kernel::Tail, ts));
      r.value = mellin_transform(params, 1.0) - r.value;
      r.abs_error += 1e-15 * std::abs(r.value);
      return r;
    }
  }
  return finish(line_integral(params, lnx, Kernel::Cdf, spec));
}

double mellin_transform(const HParams& params, double s) {
  require_valid(params);
  const PoleGap g = pole_gap(params);
  if (!(s > g.left && s < g.right)) {
    throw Error(ErrorCode::Divergent, "s = " + std::to_string(s) + " outside the pole gap");
  }
  const cplx lv = log_mellin_kernel(params, cplx(s, 0.0));
  if (lv.real() == -kInf) return 0.0;
  return std::exp(lv).real();
}

std::optional<double> mellin_moment(const HParams& params, double kappa, double delta,
                                    double order) {
  require_valid(params);
  require_positive(kappa, "kappa");
  require_positive(delta, "delta");
  const double s = order + 1.0;
  const PoleGap g = pole_gap(params);
  if (!(s > g.left && s < g.right)) return std::nullopt;
  return kappa * std::pow(delta, -s) * mellin_transform(params, s);
}

HParams shift_rows(const HParams& params, double rho) {
  HParams r = params;
  for (auto& e : r.upper) e.shift += rho * e.scale;
  for (auto& e : r.lower) e.shift += rho * e.scale;
  return r;
}

HParams scale_rows(const HParams& params, double k) {
  HParams r = params;
  for (auto& e : r.upper) e.scale *= k;
  for (auto& e : r.lower) e.scale *= k;
  return r;
}

HDensity absorb_power(const HDensity& d) {
  if (d.power == 0.0) return d;
  HDensity r;
  r.kappa = d.kappa * std::pow(d.delta, -d.power);
  r.delta = d.delta;
  r.power = 0.0;
  r.h = shift_rows(d.h, d.power);
  return r;
}

HDensity power_transform(const HDensity& d, double scale, double exponent) {
  require_positive(scale, "scale");
  require_positive(exponent, "exponent");
  const HDensity a = absorb_power(d);
  HDensity r;
  r.kappa = a.kappa * std::pow(scale, -1.0 / exponent);
  r.delta = std::pow(a.delta, exponent) / scale;
  r.power = 1.0 / exponent - 1.0;
  r.h = scale_rows(a.h, exponent);
  return absorb_power(r);
}

HValue density(const HDensity& d, double x) {
  HValue v = eval_h(d.h, d.delta * x);
  const double f = d.kappa * std::pow(x, d.power);
  v.value *= f;
  v.abs_error *= std::abs(f);
  v.imag_residue *= std::abs(f);
  return v;
}

HValue distribution(const HDensity& d, double x) {
  if (x <= 0.0) return {};
  const HDensity a = absorb_power(d);
  HValue v = eval_h_cdf_kernel(a.h, a.delta * x);
  const double f = a.kappa / a.delta;
  v.value *= f;
  v.abs_error *= std::abs(f);
  v.imag_residue *= std::abs(f);
  return v;
}

std::optional<double> moment(const HDensity& d, double order) {
  const HDensity a = absorb_power(d);
  return mellin_moment(a.h, a.kappa, a.delta, order);
}

}  // namespace relaycap::foxh
