#include "relaycap/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace relaycap::montecarlo {

namespace {

using capacity::Policy;
using capacity::PolicyKind;

constexpr double kLn2 = std::numbers::ln2;

struct Sums {
  double s1 = 0.0, s2 = 0.0;
  void add(double v) {
    s1 += v;
    s2 += v * v;
  }
  void merge(const Sums& o) {
    s1 += o.s1;
    s2 += o.s2;
  }
  double mean(double n) const { return s1 / n; }
  double variance(double n) const { return std::max(0.0, s2 / n - (s1 / n) * (s1 / n)); }
};

// Per-policy sample-mean accumulator.
struct PolicyStats {
  Sums term;
  Sums covered;  // TCIFR indicator
  double max_term = 0.0;

  void merge(const PolicyStats& o) {
    term.merge(o.term);
    covered.merge(o.covered);
    max_term = std::max(max_term, o.max_term);
  }
};

// A policy with its cutoff resolved.
struct Estimator {
  Policy policy;
  double prelog;
  double cutoff = 0.0;

  double k() const { return prelog / kLn2; }
  double exponent() const { return policy.qos_delta * prelog / kLn2; }

  void add(PolicyStats& s, double g) const {
    switch (policy.kind) {
      case PolicyKind::Ora: s.term.add(prelog * std::log2(1.0 + g)); break;
      case PolicyKind::Effective: {
        const double w = std::pow(1.0 + g, -exponent());
        s.term.add(w);
        s.max_term = std::max(s.max_term, w);
        break;
      }
      case PolicyKind::Cifr:
        s.term.add(1.0 / g);
        s.max_term = std::max(s.max_term, 1.0 / g);
        break;
      case PolicyKind::Tcifr: {
        const bool in = g >= cutoff;
        s.term.add(in ? 1.0 / g : 0.0);
        s.covered.add(in ? 1.0 : 0.0);
        break;
      }
      case PolicyKind::Opra: s.term.add(g >= cutoff ? prelog * std::log2(g / cutoff) : 0.0); break;
    }
  }

  Estimate finish(const PolicyStats& s, double n) const {
    Estimate e;
    const double m = s.term.mean(n), var = s.term.variance(n);
    const double se = std::sqrt(var / n);
    switch (policy.kind) {
      case PolicyKind::Ora:
      case PolicyKind::Opra:
        e.value = m;
        e.std_error = se;
        break;
      case PolicyKind::Effective:
        e.value = -std::log(m) / policy.qos_delta;
        e.std_error = se / (policy.qos_delta * m);
        e.converged = s.max_term <= 0.01 * s.term.s1;
        break;
      case PolicyKind::Cifr:
        e.value = k() * std::log1p(1.0 / m);
        e.std_error = k() * se / (m * (m + 1.0));
        // One draw carrying over 1% of the sum: the moment is not settling.
        e.converged = s.max_term <= 0.01 * s.term.s1;
        break;
      case PolicyKind::Tcifr: {
        const double p = s.covered.mean(n);
        if (!(m > 0.0)) break;
        e.value = k() * std::log1p(1.0 / m) * p;
        const double gy = -k() * p / (m * (m + 1.0)), gp = k() * std::log1p(1.0 / m);
        const double cov = m * (1.0 - p);
        const double v = gy * gy * var + gp * gp * p * (1.0 - p) + 2.0 * gy * gp * cov;
        e.std_error = std::sqrt(std::max(v, 0.0) / n);
        break;
      }
    }
    return e;
  }
};

std::vector<Estimator> estimators(const CapacityRequest& r) {
  std::vector<Estimator> out;
  for (const auto& p : r.policies) {
    Estimator e{p, r.prelog.value};
    if (p.kind == PolicyKind::Tcifr || p.kind == PolicyKind::Opra) {
      const auto c = p.kind == PolicyKind::Tcifr && p.cutoff ? p.cutoff : r.opra_cutoff;
      if (!c || !(*c > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, p.label() + " needs a positive cutoff");
      }
      e.cutoff = *c;
    }
    if (p.kind == PolicyKind::Effective && !(p.qos_delta > 0.0)) {
      throw Error(ErrorCode::InvalidParameter, "qos_delta must be positive");
    }
    out.push_back(e);
  }
  return out;
}

struct BatchStats {
  std::vector<std::uint64_t> below;
  std::vector<PolicyStats> policies;
  double sum = 0.0;
  std::uint64_t count = 0;

  void merge(const BatchStats& o) {
    for (std::size_t i = 0; i < below.size(); ++i) below[i] += o.below[i];
    for (std::size_t i = 0; i < policies.size(); ++i) policies[i].merge(o.policies[i]);
    sum += o.sum;
    count += o.count;
  }
};

}  // namespace

SimReport simulate(const topology::Topology& t, const SimConfig& cfg, const std::vector<double>& taus,
                   const CapacityRequest& request, double scale) {
  if (cfg.samples < 1000) throw Error(ErrorCode::InsufficientSamples, "need at least 1000 samples");
  if (cfg.batch == 0) throw Error(ErrorCode::InvalidParameter, "batch must be positive");
  if (!std::is_sorted(taus.begin(), taus.end())) throw Error(ErrorCode::InvalidParameter, "taus must be sorted");
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidParameter, "scale must be positive");
  topology::validate(t);
  const auto est = estimators(request);
  const auto laws = topology::hop_laws(t);
  const std::size_t hops = laws.size();

  enum class Combine { Min, SumOfMins, MaxOfMins };
  const Combine rule = std::holds_alternative<topology::Serial>(t)      ? Combine::Min
                       : std::holds_alternative<topology::AllActive>(t) ? Combine::SumOfMins
                                                                        : Combine::MaxOfMins;

  const std::uint64_t batches = (cfg.samples + cfg.batch - 1) / cfg.batch;
  std::vector<BatchStats> results(batches);
  std::atomic<std::uint64_t> next{0};

  const auto run = [&] {
    std::vector<double> values;
    std::vector<CounterRng> streams;
    for (std::uint64_t b = next++; b < batches; b = next++) {
      const std::uint64_t n = std::min<std::uint64_t>(cfg.batch, cfg.samples - b * cfg.batch);
      streams.clear();
      for (std::size_t h = 0; h < hops; ++h) streams.emplace_back(CounterRng::derive(cfg.seed, h, b));
      values.assign(n, 0.0);
      for (std::uint64_t i = 0; i < n; ++i) {
        double g = 0.0;
        if (rule == Combine::Min) {
          g = laws[0].sample(streams[0]);
          for (std::size_t h = 1; h < hops; ++h) g = std::min(g, laws[h].sample(streams[h]));
        } else {
          for (std::size_t h = 0; h + 1 < hops; h += 2) {
            const double branch = std::min(laws[h].sample(streams[h]), laws[h + 1].sample(streams[h + 1]));
            g = rule == Combine::SumOfMins ? g + branch : std::max(g, branch);
          }
        }
        values[i] = scale * g;
      }
      BatchStats s;
      s.below.assign(taus.size(), 0);
      s.policies.assign(est.size(), {});
      std::sort(values.begin(), values.end());
      for (std::size_t k = 0; k < taus.size(); ++k) {
        s.below[k] = static_cast<std::uint64_t>(std::upper_bound(values.begin(), values.end(), taus[k]) - values.begin());
      }
      for (double g : values) {
        s.sum += g;
        for (std::size_t k = 0; k < est.size(); ++k) est[k].add(s.policies[k], g);
      }
      s.count = n;
      results[b] = std::move(s);
    }
  };
  const int jobs = static_cast<int>(std::clamp<std::uint64_t>(cfg.jobs < 1 ? 1 : cfg.jobs, 1, batches));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();

  BatchStats total = std::move(results[0]);
  for (std::uint64_t b = 1; b < batches; ++b) total.merge(results[b]);

  SimReport r;
  const double n = static_cast<double>(total.count);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    const double p = total.below[k] / n;
    r.empirical_cdf.push_back({taus[k], p, std::sqrt(p * (1.0 - p) / n)});
  }
  for (std::size_t k = 0; k < est.size(); ++k) {
    r.capacity_estimates[est[k].policy.label()] = est[k].finish(total.policies[k], n);
  }
  r.sample_mean = total.sum / n;
  r.sample_count = total.count;
  return r;
}

Estimate empirical_capacity(std::span<const double> samples, const Policy& policy, capacity::Prelog prelog,
                            std::optional<double> opra_cutoff) {
  if (samples.size() < 1000) throw Error(ErrorCode::InsufficientSamples, "need at least 1000 samples");
  const auto est = estimators({{policy}, prelog, opra_cutoff});
  PolicyStats s;
  for (double g : samples) est[0].add(s, g);
  return est[0].finish(s, static_cast<double>(samples.size()));
}

}  // namespace relaycap::montecarlo
