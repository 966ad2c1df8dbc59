#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "relaycap/fading.hpp"
#include "relaycap/random.hpp"

// Composition of per-hop laws into the end-to-end CSI of a relay network.
// Hops are independent; a decode-and-forward branch is limited by its
// weaker hop.
namespace relaycap::topology {

/// Source-relay and relay-destination hops of one parallel branch.
struct Branch {
  fading::Model first;
  fading::Model second;
  bool operator==(const Branch&) const = default;
};

/// N relays in series: N + 1 hops, end-to-end CSI is the minimum.
struct Serial {
  std::vector<fading::Model> hops;
  bool operator==(const Serial&) const = default;
};

/// N parallel branches that all transmit; the CSIs of the branches add.
struct AllActive {
  std::vector<Branch> branches;
  bool operator==(const AllActive&) const = default;
};

enum class SelectiveFormula {
  Exact,     // max over branches of the branch minimum
  PaperEq6,  // product of the per-side outage unions, as printed
};

/// N parallel branches, the best one is used.
struct Selective {
  std::vector<Branch> branches;
  SelectiveFormula formula = SelectiveFormula::Exact;
  bool operator==(const Selective&) const = default;
};

using Topology = std::variant<Serial, AllActive, Selective>;

/// Throws Error(InvalidParameter) for an empty network and propagates
/// per-hop validation errors.
void validate(const Topology& t);

/// Hop models in a fixed order: serial hops, or first/second per branch.
std::vector<fading::Model> hops(const Topology& t);

/// Evaluation-ready laws in hops() order; equal models share one table.
std::vector<fading::HopLaw> hop_laws(const Topology& t);

/// Same structure with every hop rescaled by the same factor.
Topology scaled(const Topology& t, double factor);

double branch_cdf(const fading::Model& first, const fading::Model& second, double tau);
double serial_cdf(const Serial& t, double tau);
double selective_cdf_exact(const Selective& t, double tau);
double selective_cdf_paper(const Selective& t, double tau);
/// Builds the convolution grid on every call; use end_to_end() for repeated
/// evaluation.
double allactive_cdf(const AllActive& t, double tau);

struct ConvolutionOptions {
  int points = 1 << 14;
  double tail_mass = 1e-6;    // branch quantile 1 - tail_mass bounds the grid
  double max_deficit = 1e-4;  // GridResolutionInsufficient above this
};

/// Distribution of the end-to-end CSI. An immutable value; copies share
/// their tables.
struct EndToEndChannel {
  std::function<double(double)> cdf;
  std::function<double(double)> pdf;
  std::function<double(CounterRng&)> sampler;
  double support_hint = 1.0;    // quantile 1 - 1e-6 or grid end
  double numeric_error = 0.0;   // absolute error bound of cdf()
  std::optional<double> point_mass;  // set for a deterministic channel

  /// Law of factor * gamma.
  EndToEndChannel scaled(double factor) const;
};

/// Channel with all mass at c.
EndToEndChannel deterministic(double c);

/// Hop law of a single model as a channel.
EndToEndChannel single_hop(const fading::HopLaw& law);

EndToEndChannel end_to_end(const Topology& t, const ConvolutionOptions& opt = {});

/// Analytic cdf of the topology from the untabulated hop laws.
double cdf(const Topology& t, double tau);

}  // namespace relaycap::topology
