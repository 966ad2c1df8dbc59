#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relaycap/capacity.hpp"
#include "relaycap/topology.hpp"

// Simulation oracle: per-hop draws combined by the topology definitions.
namespace relaycap::montecarlo {

struct SimConfig {
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 1;
  std::uint64_t batch = 1 << 16;
  int jobs = 1;  // batches in flight; the report does not depend on it
};

struct CdfPoint {
  double tau = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool converged = true;  // false when one draw carries over 1% of the sample sum (CIFR, effective)
};

/// Capacity estimators to run alongside the cdf. The OPRA estimate (and
/// TCIFR without an explicit cutoff) uses the analytic cutoff supplied here.
struct CapacityRequest {
  std::vector<capacity::Policy> policies;
  capacity::Prelog prelog;
  std::optional<double> opra_cutoff;
};

struct SimReport {
  std::vector<CdfPoint> empirical_cdf;
  std::map<std::string, Estimate> capacity_estimates;  // by Policy::label()
  double sample_mean = 0.0;
  std::uint64_t sample_count = 0;
};

/// Draws `samples` end-to-end CSI values, scaled by `scale` (every hop mean
/// multiplied by it), and accumulates them per batch. Hop h of batch b draws
/// from the stream CounterRng::derive(seed, h, b). taus must be sorted.
SimReport simulate(const topology::Topology& t, const SimConfig& cfg, const std::vector<double>& taus,
                   const CapacityRequest& request = {}, double scale = 1.0);

/// Sample-mean analogue of a capacity formula. Throws InsufficientSamples
/// below 10^3 samples.
Estimate empirical_capacity(std::span<const double> samples, const capacity::Policy& policy,
                            capacity::Prelog prelog = {}, std::optional<double> opra_cutoff = {});

}  // namespace relaycap::montecarlo
