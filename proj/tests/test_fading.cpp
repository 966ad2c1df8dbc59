#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "relaycap/fading.hpp"
#include "relaycap/quadrature.hpp"

using namespace relaycap;
using namespace relaycap::fading;

namespace {

using fixtures::matrix;
using fixtures::with_terms;

// Tabulated laws for matrix(), built once.
const std::vector<HopLaw>& laws() {
  static const std::vector<HopLaw> cache = [] {
    std::vector<HopLaw> out;
    for (const auto& entry : matrix()) out.emplace_back(entry.model);
    return out;
  }();
  return cache;
}

double ks_distance(std::vector<double> x, const HopLaw& law) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = law.cdf(x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

// Asymptotic 1% critical value of the one-sample KS statistic.
double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

std::vector<double> draws(const HopLaw& law, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = law.sample(rng);
  return out;
}


}  // namespace

TEST_CASE("to_h catalog rows") {
  {
    const auto h = to_h(Exponential{2.0});
    REQUIRE(h.size() == 1);
    CHECK(h[0].kappa == doctest::Approx(0.5));
    CHECK(h[0].delta == doctest::Approx(0.5));
    CHECK(h[0].h == foxh::HParams{1, 0, {}, {{0.0, 1.0}}});
  }
  {
    const auto h = to_h(Gamma{2.0, 1.0});
    CHECK(h[0].kappa == doctest::Approx(2.0));
    CHECK(h[0].delta == doctest::Approx(2.0));
    CHECK(h[0].h == foxh::HParams{1, 0, {}, {{1.0, 1.0}}});
  }
  {
    const auto m = make_gamma_gamma(2.902, 2.51, 1.1, 1, 1.0);
    const auto h = to_h(m);
    const double x2 = 1.1 * 1.1;
    CHECK(h[0].h == foxh::HParams{3, 0, {{x2 + 1.0, 1.0}}, {{x2, 1.0}, {2.902, 1.0}, {2.51, 1.0}}});
    CHECK(h[0].power == -1.0);
    CHECK(m.h_const == doctest::Approx(x2 / (x2 + 1.0)));
    CHECK(h[0].delta == doctest::Approx(m.h_const * 2.902 * 2.51 / m.mu_r));
  }
  CHECK_THROWS_AS(to_h(WeibullGamma{}), Error);
  try {
    to_h(WeibullGamma{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedHForm);
  }
  try {
    to_h(make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0));
    FAIL("expected SeriesTruncationRequired");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeriesTruncationRequired);
  }
  // Integer beta: one summand per mixture component.
  CHECK(to_h(make_malaga(2.296, 3.0, 0.798, 0.25, 0.596, 1, 1.0)).size() == 3);
  CHECK(to_h(with_terms(make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0), 40)).size() == 40);
  CHECK(malaga_series_tail(with_terms(make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0), 60)) < 1e-6);
}

TEST_CASE("pdf and cdf values") {
  CHECK(pdf(Exponential{1.0}, 1.0) == doctest::Approx(0.3678794).epsilon(1e-7));
  CHECK(pdf(Gamma{2.0, 1.0}, 0.5) == doctest::Approx(0.7357589).epsilon(1e-7));
  CHECK(cdf(Exponential{1.0}, 1.0) == doctest::Approx(0.6321206).epsilon(1e-7));
  for (const auto& [label, m] : matrix()) {
    CAPTURE(label);
    CHECK(cdf(m, 0.0) == 0.0);
  }
  // Meijer-G references (Gamma-Gamma with pointing errors, unit mean).
  const auto gg = make_gamma_gamma(2.902, 2.51, 1.1, 1, 1.0);
  CHECK(std::abs(pdf(gg, 1.0) - 0.338544779372772311) < 1e-9);
  CHECK(std::abs(cdf(gg, 1.0) - 0.663907101193708670) < 1e-9);
  CHECK(std::abs(*pdf_elementary(gg, 1.0) - pdf_h(gg, 1.0)) < 1e-6);
  const auto gg2 = make_gamma_gamma(4.2, 1.4, 0.8, 2, 3.0);
  CHECK(std::abs(cdf(gg2, 1.0) - 0.714215293718130228) < 1e-9);
}

TEST_CASE("dual-path agreement") {
  for (const auto& [label, m0] : matrix()) {
    Model m = m0;
    if (std::holds_alternative<WeibullGamma>(m)) continue;
    if (auto* ml = std::get_if<Malaga>(&m); ml && ml->beta != std::floor(ml->beta)) {
      m = with_terms(m, 80);
    }
    CAPTURE(label);
    const double mean = mean_snr(m);
    for (double r : {1e-3, 0.02, 0.1, 0.3, 0.7, 1.0, 1.5, 3.0, 6.0}) {
      const double g = r * mean;
      CAPTURE(g);
      const double pe = *pdf_elementary(m, g), ph = pdf_h(m, g);
      const double ce = *cdf_elementary(m, g), ch = cdf_h(m, g);
      CHECK(std::abs(pe - ph) <= 1e-6 + 1e-6 * std::abs(pe));
      CHECK(std::abs(ce - ch) <= 1e-6 + 1e-6 * std::abs(ce));
    }
  }
}

TEST_CASE("normalization") {
  for (const auto& [label, m0] : matrix()) {
    CAPTURE(label);
    Model m = m0;
    if (!std::holds_alternative<WeibullGamma>(m)) {
      if (auto* ml = std::get_if<Malaga>(&m); ml && ml->beta != std::floor(ml->beta)) {
        m = with_terms(m, 80);
      }
      double mass = 0.0;
      for (const auto& term : to_h(m)) mass += *foxh::moment(term, 0.0);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
    // Quadrature of the elementary density in log g.
    const double mean = mean_snr(m);
    const auto f = [&](double u) {
      const double g = mean * std::exp(u);
      return g * *pdf_elementary(m, g);
    };
    quad::Options opt;
    opt.rel_tol = 1e-9;
    const double mass = quad::integrate(f, -60.0, 0.0, opt).value + quad::integrate(f, 0.0, 8.0, opt).value;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("mean and rescaling") {
  for (const auto& [label, m] : matrix()) {
    CAPTURE(label);
    const Model scaled = with_mean_snr(m, 7.5);
    CHECK(mean_snr(scaled) == doctest::Approx(7.5).epsilon(1e-12));
    const double s = 7.5 / mean_snr(m);
    for (double g : {0.1, 1.0, 4.0}) {
      CHECK(cdf(scaled, g * s) == doctest::Approx(cdf(m, g)).epsilon(1e-9));
    }
  }
  // Exact scale-family identity for the closed forms.
  const std::vector<std::pair<Model, Model>> pairs = {
      {Exponential{3.0}, Exponential{1.0}},
      {Gamma{2.5, 3.0}, Gamma{2.5, 1.0}},
      {make_weibull(1.7, 3.0), make_weibull(1.7, 1.0)},
      {make_generalized_gamma(2.0, 1.5, 3.0), make_generalized_gamma(2.0, 1.5, 1.0)},
  };
  for (const auto& [ms, m1] : pairs) {
    for (double g : {0.01, 0.5, 2.0, 9.0}) CHECK(cdf(ms, g) == cdf(m1, g / 3.0));
  }
}

TEST_CASE("shape properties") {
  const auto models = matrix();
  for (std::size_t i = 0; i < models.size(); ++i) {
    CAPTURE(models[i].label);
    const HopLaw& law = laws()[i];
    const double mean = law.mean();
    double prev = 0.0;
    for (int i = -60; i <= 40; ++i) {
      const double g = mean * std::pow(10.0, i / 10.0);
      const double f = law.cdf(g);
      CHECK(law.pdf(g) >= 0.0);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(law.cdf(1e3 * mean) > 1.0 - 1e-3);
    CHECK(law.cdf(0.0) == 0.0);
  }
}

TEST_CASE("hop law tabulation") {
  const auto models = matrix();
  for (std::size_t i = 0; i < models.size(); ++i) {
    CAPTURE(models[i].label);
    const Model& m = models[i].model;
    const HopLaw& law = laws()[i];
    CHECK(law.cdf_error() < 1e-7);
    CHECK(law.pdf_error() < 1e-6);
    const HopLaw moved = law.with_mean_snr(20.0);
    const Model direct = with_mean_snr(m, 20.0);
    for (double r : {0.003, 0.05, 0.4, 1.0, 2.2, 5.0}) {
      const double g = 20.0 * r;
      CHECK(std::abs(moved.cdf(g) - cdf(direct, g)) < 1e-7);
      CHECK(moved.pdf(g) == doctest::Approx(pdf(direct, g)).epsilon(1e-6));
    }
    for (double p : {0.01, 0.5, 0.99}) CHECK(law.cdf(law.quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("samplers") {
  {
    const auto x = draws(HopLaw(Exponential{1.0}), 1000000, 11);
    double sum = 0.0;
    for (double v : x) sum += v;
    CHECK(std::abs(sum / x.size() - 1.0) < 0.004);
  }
  const auto models = matrix();
  for (std::size_t i = 0; i < models.size(); ++i) {
    CAPTURE(models[i].label);
    const HopLaw& law = laws()[i];
    const auto x = draws(law, 1000000, 1234);
    CHECK(ks_distance(x, law) < ks_critical(x.size()));
  }
  {
    const HopLaw law(Gamma{3.0, 2.0});
    CHECK(ks_distance(draws(law, 1000000, 99), law) < ks_critical(1000000));
  }
  {
    const HopLaw law(GenericH{1.0, 1.0, {1, 0, {}, {{0.0, 1.0}}}});
    const HopLaw ref(Exponential{1.0});
    const auto x = draws(law, 1000000, 7);
    CHECK(ks_distance(x, ref) < ks_critical(x.size()));
  }
}

TEST_CASE("malaga cdf at the mean against simulation") {
  const auto m = make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0);
  const std::size_t n = 10000000;
  CounterRng rng(2024);
  std::size_t below = 0;
  for (std::size_t i = 0; i < n; ++i) below += sample(m, rng) <= 1.0;
  const double p = cdf(m, 1.0);
  const double se = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(below) / n - p) < 3.0 * se);
}

TEST_CASE("validation errors") {
  const auto code = [](const Model& m) {
    try {
      validate(m);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::ConfigError;
  };
  CHECK(code(Exponential{-1.0}) == ErrorCode::InvalidParameter);
  CHECK(code(Gamma{0.0, 1.0}) == ErrorCode::InvalidParameter);
  auto gg = make_gamma_gamma(2.0, 2.0, 1.0, 1, 1.0);
  gg.detection_order = 3;
  CHECK(code(gg) == ErrorCode::InvalidParameter);
  auto ml = make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0);
  ml.series_terms = 3;
  CHECK(code(ml) == ErrorCode::NotNormalized);
  CHECK(code(GenericH{2.0, 1.0, {1, 0, {}, {{0.0, 1.0}}}}) == ErrorCode::NotNormalized);
  CHECK_NOTHROW(validate(GenericH{1.0, 1.0, {1, 0, {}, {{0.0, 1.0}}}}));
}
