#include "relaycap/capacity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "relaycap/quadrature.hpp"

namespace relaycap::capacity {

namespace {

constexpr double kLn2 = std::numbers::ln2;

quad::Options options(double rel = 1e-8, double abs = 1e-13) {
  quad::Options o;
  o.rel_tol = rel;
  o.abs_tol = abs;
  o.max_intervals = 8000;
  return o;
}

quad::Result checked(const quad::Result& r, const char* what) {
  if (!r.converged) {
    std::ostringstream os;
    os << what << ": estimate " << r.value << " with error " << r.abs_error;
    throw Error(ErrorCode::QuadratureNotConverged, os.str());
  }
  return r;
}

void check_prelog(Prelog p) {
  if (!(p.value > 0.0 && p.value <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "prelog must lie in (0, 1]");
  }
}

double survival(const EndToEndChannel& ch, double g) { return 1.0 - ch.cdf(g); }

double length_scale(const EndToEndChannel& ch) { return std::max(ch.support_hint / 10.0, 1e-300); }

// Log-variable length scale for integrals that start at c.
double log_scale(const EndToEndChannel& ch, double c) {
  return std::max(1.0, std::log(std::max(ch.support_hint / c, 1.0)));
}

// \int_c^inf f(g)/g dg through g = c e^v.
quad::Result inverse_moment_above(const EndToEndChannel& ch, double c) {
  const auto f = [&](double v) {
    const double g = c * std::exp(v);
    return std::isfinite(g) ? ch.pdf(g) : 0.0;
  };
  return checked(quad::integrate_to_infinity(f, 0.0, log_scale(ch, c), options(1e-8, 1e-15)),
                 "truncated inverse moment");
}

struct InverseMoment {
  double value = 0.0;
  double abs_error = 0.0;
  bool divergent = false;
};

// E[1/g] = \int F(g) / g^2 dg. Near the origin the integral is summed over
// dyadic chunks [e/2, e]; a chunk ratio that stops shrinking means F decays
// no faster than g and the moment diverges. A settled ratio r < 1 closes
// the remainder as a geometric series.
InverseMoment inverse_moment(const EndToEndChannel& ch) {
  const auto f = [&](double g) { return ch.cdf(g) / (g * g); };
  const double e0 = 1e-3 * ch.support_hint;
  const auto main = checked(quad::integrate_to_infinity(f, e0, length_scale(ch), options(1e-8, 1e-15)),
                            "inverse moment");
  InverseMoment out{main.value, main.abs_error, false};
  double e = e0, prev = 0.0, prev_ratio = 0.0;
  for (int k = 0; k < 2000 && e > 1e-290; ++k, e *= 0.5) {
    const auto chunk = checked(quad::integrate(f, 0.5 * e, e, options(1e-9, 1e-13 * out.value)), "inverse moment chunk");
    out.value += chunk.value;
    out.abs_error += chunk.abs_error;
    if (chunk.value == 0.0) return out;
    if (k > 0) {
      const double ratio = chunk.value / prev;
      if (k >= 4 && ratio >= 0.999) {
        out.divergent = true;
        return out;
      }
      if (chunk.value < 1e-15 * out.value) return out;
      if (k >= 6 && std::abs(ratio - prev_ratio) < 1e-4 * ratio) {
        const double tail = chunk.value * ratio / (1.0 - ratio);
        out.value += tail;
        out.abs_error += 1e-4 * tail / (1.0 - ratio);
        return out;
      }
      prev_ratio = ratio;
    }
    prev = chunk.value;
  }
  // Halving reached the bottom of the double range without settling.
  out.divergent = true;
  return out;
}

// Channel CDF error propagated through \int_a^b w(g) dg for weight magnitude
// bounded by dF * |integral of w over the support|.
double propagated(const EndToEndChannel& ch, double weight_integral) {
  return ch.numeric_error * std::abs(weight_integral);
}

PolicyResult constant_rate(double c, Prelog p) {
  PolicyResult r;
  r.capacity = p.value * std::log2(1.0 + c);
  return r;
}

// G(g0) = \int_{g0} S(g) / g^2 dg - 1, here as (1/g0) \int_0^1 S(g0/u) du - 1.
quad::Result opra_integral(const EndToEndChannel& ch, double g0) {
  const auto f = [&](double u) { return u > 0.0 ? survival(ch, g0 / u) : 0.0; };
  auto r = checked(quad::integrate(f, 0.0, 1.0, options(1e-13, 1e-15)), "cutoff equation");
  r.value /= g0;
  r.abs_error /= g0;
  return r;
}

}  // namespace

EffectiveCapacityParams EffectiveCapacityParams::from_factors(double qos_exponent, double bandwidth,
                                                              double frame_length) {
  EffectiveCapacityParams p;
  p.qos_exponent = qos_exponent;
  p.bandwidth = bandwidth;
  p.frame_length = frame_length;
  p.qos_delta = qos_exponent * bandwidth * frame_length;
  return p;
}

PolicyResult ora(const EndToEndChannel& ch, Prelog prelog) {
  check_prelog(prelog);
  if (ch.point_mass) return constant_rate(*ch.point_mass, prelog);
  const auto f = [&](double g) { return survival(ch, g) / (1.0 + g); };
  const auto q = checked(quad::integrate_to_infinity(f, 0.0, length_scale(ch), options()), "ora");
  PolicyResult r;
  const double k = prelog.value / kLn2;
  r.capacity = k * q.value;
  r.quad_error = k * (q.abs_error + propagated(ch, std::log1p(ch.support_hint)));
  return r;
}

PolicyResult ora_expectation(const EndToEndChannel& ch, Prelog prelog) {
  check_prelog(prelog);
  if (ch.point_mass) return constant_rate(*ch.point_mass, prelog);
  const auto f = [&](double g) {
    const double d = ch.pdf(g);
    return d > 0.0 ? std::log1p(g) * d : 0.0;
  };
  const auto q = checked(quad::integrate_to_infinity(f, 0.0, length_scale(ch), options()), "ora expectation");
  PolicyResult r;
  const double k = prelog.value / kLn2;
  r.capacity = k * q.value;
  r.quad_error = k * (q.abs_error + propagated(ch, std::log1p(ch.support_hint)));
  return r;
}

PolicyResult effective(const EndToEndChannel& ch, const EffectiveCapacityParams& p, Prelog prelog) {
  check_prelog(prelog);
  if (!(p.qos_delta > 0.0) || !std::isfinite(p.qos_delta)) {
    throw Error(ErrorCode::InvalidParameter, "qos_delta must be positive");
  }
  if (ch.point_mass) return constant_rate(*ch.point_mass, prelog);
  const double a = p.qos_delta * prelog.value / kLn2;
  // 1 - E[(1+g)^-a] = a \int S(g) (1+g)^(-a-1) dg keeps small delta exact.
  const auto fs = [&](double g) { return survival(ch, g) * std::pow(1.0 + g, -a - 1.0); };
  const auto q = checked(quad::integrate_to_infinity(fs, 0.0, length_scale(ch), options(1e-8, 1e-15)),
                         "effective capacity");
  const double x = a * q.value;
  PolicyResult r;
  double log_mean, log_err;
  if (x < 0.5) {
    log_mean = std::log1p(-x);
    log_err = a * q.abs_error / (1.0 - x);
  } else {
    const auto fd = [&](double g) { return ch.pdf(g) * std::pow(1.0 + g, -a); };
    const auto e = checked(quad::integrate_to_infinity(fd, 0.0, length_scale(ch), options(1e-8, 1e-300)),
                           "effective capacity");
    log_mean = std::log(e.value);
    log_err = e.abs_error / e.value;
  }
  r.capacity = std::max(0.0, -log_mean / p.qos_delta);
  r.quad_error = (log_err + a * propagated(ch, 1.0)) / p.qos_delta;
  return r;
}

PolicyResult cifr(const EndToEndChannel& ch, Prelog prelog) {
  check_prelog(prelog);
  if (ch.point_mass) return constant_rate(*ch.point_mass, prelog);
  const InverseMoment m = inverse_moment(ch);
  PolicyResult r;
  if (m.divergent) {
    r.divergent = true;
    return r;
  }
  const double k = prelog.value / kLn2;
  r.capacity = k * std::log1p(1.0 / m.value);
  // d/dm ln(1 + 1/m) = -1 / (m (m + 1))
  r.quad_error = k * (m.abs_error + ch.numeric_error * m.value) / (m.value * (m.value + 1.0));
  return r;
}

PolicyResult tcifr(const EndToEndChannel& ch, double cutoff, Prelog prelog) {
  check_prelog(prelog);
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw Error(ErrorCode::InvalidParameter, "cutoff must be positive");
  PolicyResult r;
  r.cutoff = cutoff;
  if (ch.point_mass) {
    if (cutoff <= *ch.point_mass) r.capacity = constant_rate(*ch.point_mass, prelog).capacity;
    return r;
  }
  const double s = survival(ch, cutoff);
  if (s <= 0.0) return r;
  const auto j = inverse_moment_above(ch, cutoff);
  if (j.value <= 0.0) return r;
  const double k = prelog.value / kLn2;
  r.capacity = k * std::log1p(1.0 / j.value) * s;
  r.quad_error = k * (s * j.abs_error / (j.value * (j.value + 1.0)) +
                      ch.numeric_error * (std::log1p(1.0 / j.value) + 1.0 / ((j.value + 1.0) * cutoff)));
  return r;
}

double opra_residual(const EndToEndChannel& ch, double cutoff) {
  if (ch.point_mass) {
    const double c = *ch.point_mass;
    return (cutoff <= c ? 1.0 / cutoff - 1.0 / c : 0.0) - 1.0;
  }
  return opra_integral(ch, cutoff).value - 1.0;
}

PolicyResult opra_cutoff(const EndToEndChannel& ch) {
  PolicyResult r;
  if (ch.point_mass) {
    // 1/g0 - 1/c = 1 in closed form.
    r.cutoff = *ch.point_mass / (1.0 + *ch.point_mass);
    return r;
  }
  constexpr double kEps = 1e-9, kTol = 1e-10;
  double lo = kEps, hi = 1.0;
  const double g_lo = opra_residual(ch, lo), g_hi = opra_residual(ch, hi);
  if (!(g_lo > 0.0) || g_hi > kTol) {
    std::ostringstream os;
    os << "G(" << lo << ") = " << g_lo << ", G(1) = " << g_hi << "; no sign change on (eps, 1]";
    throw Error(ErrorCode::RootNotBracketed, os.str());
  }
  double x = 0.5, g = 0.0;
  int it = 0;
  if (std::abs(g_hi) <= kTol) {
    x = 1.0;
    g = g_hi;
  } else {
    for (; it < 300; ++it) {
      g = opra_residual(ch, x);
      if (std::abs(g) < kTol) break;
      (g > 0.0 ? lo : hi) = x;
      const double slope = -survival(ch, x) / (x * x);
      double next = slope < 0.0 ? x - g / slope : 0.5 * (lo + hi);
      // Newton for 100 steps inside the bracket, then bisection finishes.
      if (it >= 100 || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (hi - lo < 1e-16 * hi) break;
      x = next;
    }
  }
  r.cutoff = x;
  r.iterations = it + 1;
  r.quad_error = std::abs(g);
  if (!(x > 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::RootNotBracketed, "cutoff " + std::to_string(x) + " outside (0, 1]");
  }
  return r;
}

PolicyResult opra_expectation(const EndToEndChannel& ch, double g0, Prelog prelog) {
  check_prelog(prelog);
  const auto f = [&](double v) {
    const double g = g0 * std::exp(v);
    const double d = std::isfinite(g) ? ch.pdf(g) : 0.0;
    return d > 0.0 ? v * d * g : 0.0;
  };
  const auto q = checked(quad::integrate_to_infinity(f, 0.0, log_scale(ch, g0), options()), "opra expectation");
  PolicyResult r;
  const double k = prelog.value / kLn2;
  r.cutoff = g0;
  r.capacity = k * q.value;
  r.quad_error = k * (q.abs_error + propagated(ch, std::log(std::max(ch.support_hint / g0, 1.0)) + 1.0));
  return r;
}

PolicyResult opra(const EndToEndChannel& ch, Prelog prelog) {
  check_prelog(prelog);
  const PolicyResult root = opra_cutoff(ch);
  const double g0 = *root.cutoff;
  if (ch.point_mass) {
    PolicyResult r = constant_rate(*ch.point_mass, prelog);
    r.cutoff = g0;
    return r;
  }
  const auto f = [&](double v) { return survival(ch, g0 * std::exp(v)); };
  const auto q = checked(quad::integrate_to_infinity(f, 0.0, log_scale(ch, g0), options()), "opra");
  PolicyResult r;
  const double k = prelog.value / kLn2;
  r.cutoff = g0;
  r.iterations = root.iterations;
  r.capacity = k * q.value;
  // Cutoff residual dG moves g0 by dG / |G'|; the capacity changes at rate
  // S(g0)/g0 per unit g0.
  const double s0 = survival(ch, g0);
  const double dg0 = s0 > 0.0 ? root.quad_error * g0 * g0 / s0 : 0.0;
  r.quad_error = k * (q.abs_error + propagated(ch, std::log(std::max(ch.support_hint / g0, 1.0)) + 1.0) +
                      dg0 * s0 / g0);
  return r;
}

std::string Policy::label() const {
  std::ostringstream os;
  switch (kind) {
    case PolicyKind::Ora: return "ora";
    case PolicyKind::Cifr: return "cifr";
    case PolicyKind::Opra: return "opra";
    case PolicyKind::Effective: os << "effective(qos_delta=" << qos_delta << ")"; return os.str();
    case PolicyKind::Tcifr:
      if (cutoff) {
        os << "tcifr(cutoff=" << *cutoff << ")";
        return os.str();
      }
      return "tcifr(cutoff=opra)";
  }
  return "unknown";
}

PolicyResult evaluate(const EndToEndChannel& ch, const Policy& policy, Prelog prelog) {
  switch (policy.kind) {
    case PolicyKind::Ora: return ora(ch, prelog);
    case PolicyKind::Effective: return effective(ch, {policy.qos_delta, {}, {}, {}}, prelog);
    case PolicyKind::Cifr: return cifr(ch, prelog);
    case PolicyKind::Tcifr: {
      const double c = policy.cutoff ? *policy.cutoff : *opra_cutoff(ch).cutoff;
      return tcifr(ch, c, prelog);
    }
    case PolicyKind::Opra: return opra(ch, prelog);
  }
  throw Error(ErrorCode::InvalidParameter, "unknown policy");
}

std::vector<SweepRow> sweep(const std::function<EndToEndChannel(double)>& factory,
                            const std::vector<Policy>& policies, const std::vector<double>& snr_grid_db,
                            Prelog prelog, int jobs) {
  if (snr_grid_db.empty()) throw Error(ErrorCode::InvalidParameter, "empty SNR grid");
  std::vector<SweepRow> rows(snr_grid_db.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      row.snr_db = snr_grid_db[i];
      std::optional<EndToEndChannel> ch;
      std::string channel_error;
      try {
        ch = factory(std::pow(10.0, row.snr_db / 10.0));
      } catch (const Error& e) {
        channel_error = e.what();
      }
      for (const auto& p : policies) {
        SweepCell cell{p.label(), std::nullopt, channel_error};
        if (ch) {
          try {
            cell.result = evaluate(*ch, p, prelog);
          } catch (const Error& e) {
            cell.error = e.what();
          }
        }
        row.cells.push_back(std::move(cell));
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(rows.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace relaycap::capacity
