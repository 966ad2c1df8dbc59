#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaycap/topology.hpp"

// Capacities of adaptive transmission policies over an end-to-end channel,
// in bits/s/Hz.
namespace relaycap::capacity {

using topology::EndToEndChannel;

struct PolicyResult {
  double capacity = 0.0;
  std::optional<double> cutoff;  // OPRA and TCIFR
  double quad_error = 0.0;
  int iterations = 0;            // cutoff solver only
  bool divergent = false;        // CIFR with infinite E[1/gamma]
};

/// delta = phi * B * T_f.
struct EffectiveCapacityParams {
  double qos_delta = 1.0;
  std::optional<double> qos_exponent, bandwidth, frame_length;

  static EffectiveCapacityParams from_factors(double qos_exponent, double bandwidth, double frame_length);
};

/// Pre-log factor in front of every capacity, 1/2 unless configured.
struct Prelog {
  double value = 0.5;
};

/// (prelog / ln 2) \int (1 - F) / (1 + g) dg.
PolicyResult ora(const EndToEndChannel& ch, Prelog prelog = {});
/// prelog E[log2(1 + g)] from the density; the same quantity as ora().
PolicyResult ora_expectation(const EndToEndChannel& ch, Prelog prelog = {});

/// -(1/delta) ln E[(1 + g)^(-delta prelog / ln 2)].
PolicyResult effective(const EndToEndChannel& ch, const EffectiveCapacityParams& p, Prelog prelog = {});

/// (prelog / ln 2) ln(1 + 1 / E[1/g]); zero and divergent = true when
/// E[1/g] is infinite.
PolicyResult cifr(const EndToEndChannel& ch, Prelog prelog = {});

/// Inversion above the cutoff only, weighted by P[g > cutoff].
PolicyResult tcifr(const EndToEndChannel& ch, double cutoff, Prelog prelog = {});

/// Root in (0, 1] of G(g0) = \int_{g0} (1/g0 - 1/g) f dg - 1. Throws
/// RootNotBracketed when G has no sign change on (eps, 1].
PolicyResult opra_cutoff(const EndToEndChannel& ch);

/// (prelog / ln 2) \int_{g0} (1 - F) / g dg, checked against
/// prelog \int_{g0} log2(g / g0) f dg. Deterministic channels return ora().
PolicyResult opra(const EndToEndChannel& ch, Prelog prelog = {});
/// The density form used by the internal cross-check.
PolicyResult opra_expectation(const EndToEndChannel& ch, double cutoff, Prelog prelog = {});

/// G(g0) evaluated directly, for solver diagnostics.
double opra_residual(const EndToEndChannel& ch, double cutoff);

enum class PolicyKind { Ora, Effective, Cifr, Tcifr, Opra };

struct Policy {
  PolicyKind kind = PolicyKind::Ora;
  double qos_delta = 1.0;        // Effective
  std::optional<double> cutoff;  // Tcifr; unset reuses the OPRA cutoff

  /// e.g. "ora", "effective(qos_delta=0.1)", "tcifr(cutoff=opra)".
  std::string label() const;
};

PolicyResult evaluate(const EndToEndChannel& ch, const Policy& policy, Prelog prelog = {});

struct SweepCell {
  std::string policy;
  std::optional<PolicyResult> result;
  std::string error;  // set when result is empty
};

struct SweepRow {
  double snr_db = 0.0;
  std::vector<SweepCell> cells;  // in policy order
};

/// Evaluates every policy at every grid point. Cell errors are recorded, not
/// thrown. Points run on up to `jobs` threads; the result does not depend on
/// the thread count. The factory receives the linear mean SNR 10^(snr_db/10).
std::vector<SweepRow> sweep(const std::function<EndToEndChannel(double)>& factory,
                            const std::vector<Policy>& policies, const std::vector<double>& snr_grid_db,
                            Prelog prelog = {}, int jobs = 1);

}  // namespace relaycap::capacity
