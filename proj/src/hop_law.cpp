#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "relaycap/fading.hpp"

namespace relaycap::fading {

namespace {

constexpr int kNodesPerDecade = 64;
constexpr double kLowMass = 1e-13;
constexpr double kHighMass = 1e-15;
constexpr double kTiny = 1e-300;

double hermite(double y0, double y1, double d0, double d1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

}  // namespace

// Log-grid tabulation of F and f in the table variable t.
class Table {
 public:
  explicit Table(const Model& model) {
    const auto F = [&](double t) { return fading::cdf(model, t); };
    const double m = fading::mean_snr(model);
    const double start = std::isfinite(m) && m > 0.0 ? m : 1.0;

    double lo = start;
    double f_lo = F(lo);
    while (f_lo >= kLowMass && lo > 1e-16 * start) {
      lo /= 10.0;
      f_lo = F(lo);
    }
    while (f_lo <= 1e3 * kTiny) {
      lo *= std::pow(10.0, 1.0 / 8.0);
      f_lo = F(lo);
    }
    double hi = start;
    while (1.0 - F(hi) >= kHighMass && hi < 1e12 * start) hi *= 2.0;

    u0_ = std::log(lo);
    h_ = std::log(10.0) / kNodesPerDecade;
    const int n = static_cast<int>(std::ceil((std::log(hi) - u0_) / h_)) + 1;
    cdf_.resize(n);
    lpdf_.resize(n);
    cslope_.resize(n);
    for (int i = 0; i < n; ++i) {
      const double t = std::exp(u0_ + i * h_);
      cdf_[i] = F(t);
      const double f = std::max(fading::pdf(model, t), kTiny);
      lpdf_[i] = std::log(f);
      cslope_[i] = t * f;
    }
    lslope_.resize(n);
    for (int i = 0; i < n; ++i) {
      const auto y = [&](int j) { return lpdf_[std::clamp(j, 0, n - 1)]; };
      if (i >= 2 && i + 2 < n) {
        lslope_[i] = (-y(i + 2) + 8 * y(i + 1) - 8 * y(i - 1) + y(i - 2)) / (12 * h_);
      } else if (i == 0) {
        lslope_[i] = (-3 * y(0) + 4 * y(1) - y(2)) / (2 * h_);
      } else if (i == n - 1) {
        lslope_[i] = (3 * y(i) - 4 * y(i - 1) + y(i - 2)) / (2 * h_);
      } else {
        lslope_[i] = (y(i + 1) - y(i - 1)) / (2 * h_);
      }
    }
    low_exponent_ = cslope_[0] / std::max(cdf_[0], kTiny);

    // Interpolation error at every 4th midpoint.
    for (int i = 0; i + 1 < n; i += 4) {
      const double t = std::exp(u0_ + (i + 0.5) * h_);
      cdf_error_ = std::max(cdf_error_, std::abs(cdf(t) - F(t)));
      const double f = fading::pdf(model, t);
      if (f > 1e-200 && cdf_[i] > 1e-12 && cdf_[i] < 1.0 - 1e-12) {
        pdf_error_ = std::max(pdf_error_, std::abs(pdf(t) / f - 1.0));
      }
    }
    // Check of the power-law extrapolation one decade below the grid.
    const double below = lower() / 10.0;
    cdf_error_ = std::max(cdf_error_, std::abs(cdf(below) - F(below)));
    cdf_error_ += kHighMass;
  }

  double cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    const double u = std::log(t);
    if (u <= u0_) return cdf_[0] * std::exp(low_exponent_ * (u - u0_));
    const double x = (u - u0_) / h_;
    if (!(x < static_cast<double>(cdf_.size() - 1))) return 1.0;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= cdf_.size()) return 1.0;
    const double v = hermite(cdf_[i], cdf_[i + 1], cslope_[i], cslope_[i + 1], h_, x - i);
    return std::clamp(v, 0.0, 1.0);
  }

  double pdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    const double u = std::log(t);
    double lf;
    if (u <= u0_) {
      return low_exponent_ * cdf(t) / t;
    }
    const double x = (u - u0_) / h_;
    if (!std::isfinite(x)) return 0.0;
    const auto i = static_cast<std::size_t>(std::min(x, static_cast<double>(lpdf_.size())));
    if (i + 1 >= lpdf_.size()) {
      const std::size_t j = lpdf_.size() - 1;
      lf = lpdf_[j] + lslope_[j] * (u - (u0_ + j * h_));
    } else {
      lf = hermite(lpdf_[i], lpdf_[i + 1], lslope_[i], lslope_[i + 1], h_, x - i);
    }
    return std::exp(lf);
  }

  double cdf_error() const { return cdf_error_; }
  double pdf_error() const { return pdf_error_; }
  double lower() const { return std::exp(u0_); }
  double upper() const { return std::exp(u0_ + (cdf_.size() - 1) * h_); }

 private:
  double u0_ = 0.0, h_ = 0.0;
  std::vector<double> cdf_, cslope_, lpdf_, lslope_;
  double low_exponent_ = 1.0;
  double cdf_error_ = 0.0, pdf_error_ = 0.0;
};

HopLaw::HopLaw(Model model) : model_(std::move(model)) {
  validate(model_);
  mean_ = fading::mean_snr(model_);
  if (!has_closed_form(model_)) table_ = std::make_shared<const Table>(model_);
}

HopLaw::HopLaw(Model model, std::shared_ptr<const Table> table, double scale, double mean)
    : model_(std::move(model)), table_(std::move(table)), scale_(scale), mean_(mean) {}

double HopLaw::cdf(double g) const {
  return table_ ? table_->cdf(g / scale_) : fading::cdf(model_, g);
}

double HopLaw::pdf(double g) const {
  return table_ ? table_->pdf(g / scale_) / scale_ : fading::pdf(model_, g);
}

double HopLaw::cdf_error() const { return table_ ? table_->cdf_error() : 1e-15; }
double HopLaw::pdf_error() const { return table_ ? table_->pdf_error() : 1e-14; }

double HopLaw::quantile(double p) const {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  double lo = std::isfinite(mean_) && mean_ > 0.0 ? mean_ : scale_;
  double hi = lo;
  while (cdf(lo) > p && lo > 1e-300) lo /= 4.0;
  while (cdf(hi) < p && hi < 1e300) hi *= 4.0;
  // bisection in log g
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-14; ++it) {
    const double mid = std::sqrt(lo * hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

double HopLaw::sample(CounterRng& rng) const {
  if (std::holds_alternative<GenericH>(model_)) return quantile(rng.uniform());
  return fading::sample(model_, rng);
}

HopLaw HopLaw::with_mean_snr(double s) const {
  Model scaled = fading::with_mean_snr(model_, s);
  return HopLaw(std::move(scaled), table_, scale_ * s / mean_, s);
}

}  // namespace relaycap::fading
