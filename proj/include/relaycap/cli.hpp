#pragma once

#include <ostream>

#include "relaycap/config.hpp"

// Subcommands of the relaycap tool. Each writes its table to `out`,
// diagnostics to `err`, and returns the process exit code.
namespace relaycap::cli {

inline constexpr int kOk = 0;
inline constexpr int kConfigError = 1;
inline constexpr int kNumericFailure = 2;
inline constexpr int kValidationFailure = 3;

/// CSV header snr_db,policy,capacity_bits_per_hz,quad_error,cutoff; with
/// `validate` the Monte Carlo estimate, its standard error and z follow.
int capacity_sweep(const config::ExperimentConfig& cfg, bool validate, std::ostream& out, std::ostream& err);

/// CSV header snr_db,tau,outage_probability (plus MC columns with `validate`).
int outage_sweep(const config::ExperimentConfig& cfg, bool validate, std::ostream& out, std::ostream& err);

/// CSV header snr_db,gamma0,iterations,residual. Fails with kNumericFailure
/// when a cutoff leaves (0, 1].
int opra_cutoff(const config::ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

/// Analytic against Monte Carlo at every grid point. kValidationFailure when
/// any |z| > 3; the offending points are listed.
int validate(const config::ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace relaycap::cli
