#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "relaycap/fading.hpp"
#include "relaycap/topology.hpp"

// The four figure configurations at unit mean SNR per hop, shared by the
// unit and acceptance tests.
namespace fixtures {

using namespace relaycap;

inline fading::Model gg_strong(double mean = 1.0) {
  return fading::make_gamma_gamma(2.902, 2.51, 1.1, 1, mean);
}
inline fading::Model malaga_moderate(double mean = 1.0) {
  return fading::make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, mean);
}
inline fading::Model dgg_imdd(double mean = 1.0) {
  return fading::make_double_gg(3.0, 1.5, 2.1, 3.5, 1.0, 1.0, 2, mean);
}

inline std::vector<topology::Branch> iid_branches(const fading::Model& m, int n) {
  return std::vector<topology::Branch>(n, topology::Branch{m, m});
}

inline topology::Topology fig1_serial2() { return topology::Serial{{gg_strong(), gg_strong(), gg_strong()}}; }
inline topology::Topology fig1_selective3() { return topology::Selective{iid_branches(gg_strong(), 3)}; }
inline topology::Topology fig2_allactive4() { return topology::AllActive{iid_branches(malaga_moderate(), 4)}; }
inline topology::Topology fig3_selective3() { return topology::Selective{iid_branches(dgg_imdd(), 3)}; }

struct Figure {
  const char* label;
  topology::Topology topology;
};

inline std::vector<Figure> figures() {
  return {{"fig1 serial 2 relays", fig1_serial2()},
          {"fig1 selective 3 relays", fig1_selective3()},
          {"fig2 all-active 4 relays", fig2_allactive4()},
          {"fig3 selective 3 relays", fig3_selective3()}};
}

struct Named {
  std::string label;
  fading::Model model;
};

/// Three parameter sets per catalog model, at assorted means.
inline std::vector<Named> matrix() {
  return {
      {"exp 1", fading::Exponential{1.0}},
      {"exp 2", fading::Exponential{2.0}},
      {"exp 0.3", fading::Exponential{0.3}},
      {"gamma 2", fading::Gamma{2.0, 1.0}},
      {"gamma 0.7", fading::Gamma{0.7, 3.0}},
      {"gamma 5.5", fading::Gamma{5.5, 0.5}},
      {"weibull 1.7", fading::make_weibull(1.7, 1.5)},
      {"weibull 0.8", fading::make_weibull(0.8, 1.0)},
      {"weibull 3", fading::make_weibull(3.0, 2.0)},
      {"gengamma 2/1.5", fading::make_generalized_gamma(2.0, 1.5, 1.2)},
      {"gengamma 0.9/2", fading::make_generalized_gamma(0.9, 2.0, 1.0)},
      {"gengamma 3/0.7", fading::make_generalized_gamma(3.0, 0.7, 4.0)},
      {"wg 2/1.5", fading::WeibullGamma{2.0, 1.5, 1.0}},
      {"wg 3/4", fading::WeibullGamma{3.0, 4.0, 2.0}},
      {"wg 1.2/0.8", fading::WeibullGamma{1.2, 0.8, 0.5}},
      {"gg strong", fading::make_gamma_gamma(2.902, 2.51, 1.1, 1, 1.0)},
      {"gg imdd", fading::make_gamma_gamma(4.2, 1.4, 0.8, 2, 3.0)},
      {"gg weak", fading::make_gamma_gamma(11.6, 10.1, 2.0, 1, 0.7)},
      {"dgg imdd", fading::make_double_gg(3.0, 1.5, 2.1, 3.5, 1.0, 1.0, 2, 1.0)},
      {"dgg het", fading::make_double_gg(2.0, 1.0, 1.5, 2.5, 1.0, 1.0, 1, 2.0)},
      {"dgg mixed", fading::make_double_gg(1.2, 2.5, 4.0, 1.8, 1.3, 0.8, 1, 0.5)},
      {"malaga int", fading::make_malaga(2.296, 2.0, 0.798, 0.25, 0.596, 1, 1.0)},
      {"malaga frac", fading::make_malaga(2.296, 1.822, 0.798, 0.25, 0.596, 1, 1.0)},
      {"malaga imdd", fading::make_malaga(4.0, 3.0, 0.5, 0.3, 0.2, 2, 1.0)},
  };
}

inline fading::Malaga with_terms(fading::Model m, int terms) {
  auto out = std::get<fading::Malaga>(m);
  out.series_terms = terms;
  return out;
}

/// One model of each catalog family at unit mean.
inline std::vector<std::pair<const char*, fading::Model>> catalog() {
  return {{"exponential", fading::Exponential{1.0}},
          {"gamma", fading::Gamma{2.0, 1.0}},
          {"weibull", fading::make_weibull(1.7, 1.0)},
          {"generalized_gamma", fading::make_generalized_gamma(2.0, 1.5, 1.0)},
          {"weibull_gamma", fading::WeibullGamma{2.0, 1.5, 1.0}},
          {"gamma_gamma", gg_strong()},
          {"double_gg", dgg_imdd()},
          {"malaga", malaga_moderate()},
          {"generic_h", fading::GenericH{2.0, 2.0, {1, 0, {}, {{1.0, 1.0}}}}}};
}

/// Serial with 2 relays, all-active and selective with 2 relays.
inline std::vector<std::pair<std::string, topology::Topology>> topology_matrix() {
  std::vector<std::pair<std::string, topology::Topology>> out;
  for (const auto& [name, m] : catalog()) {
    out.emplace_back(std::string("serial/") + name, topology::Serial{{m, m, m}});
    out.emplace_back(std::string("all_active/") + name, topology::AllActive{iid_branches(m, 2)});
    out.emplace_back(std::string("selective/") + name, topology::Selective{iid_branches(m, 2)});
  }
  return out;
}

/// Draws from a channel sampler.
inline std::vector<double> draw(const topology::EndToEndChannel& ch, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = ch.sampler(rng);
  return x;
}

/// Largest |empirical - analytic| / binomial SE over the given points.
template <class F>
double max_z(std::vector<double> x, const std::vector<double>& taus, const F& cdf) {
  std::sort(x.begin(), x.end());
  double z = 0.0;
  for (double t : taus) {
    const double p = cdf(t);
    const double hat = static_cast<double>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) / x.size();
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-300) / x.size());
    z = std::max(z, std::abs(hat - p) / se);
  }
  return z;
}

template <class F>
double ks_distance(std::vector<double> x, const F& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

inline double ks_critical(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

/// Quantiles at p = 0.02, 0.07, ..., 0.98 (21 points) by bisection on cdf.
template <class F>
std::vector<double> quantile_points(const F& cdf, double hint) {
  std::vector<double> out;
  for (int k = 0; k < 21; ++k) {
    const double p = 0.02 + k * (0.96 / 20.0);
    double lo = 0.0, hi = hint;
    while (cdf(hi) < p) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < p ? lo : hi) = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

}  // namespace fixtures
