#include "relaycap/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "json.hpp"
#include "relaycap/montecarlo.hpp"

namespace relaycap::cli {

namespace {

using capacity::PolicyKind;
using config::ExperimentConfig;
using nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

// Policies sorted by label, the row order of every table.
std::vector<capacity::Policy> sorted_policies(const ExperimentConfig& cfg) {
  auto p = cfg.policies;
  std::stable_sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.label() < b.label(); });
  return p;
}

double z_score(double estimate, double reference, double sigma) {
  const double d = estimate - reference;
  if (sigma > 0.0) return d / sigma;
  return d == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
}

montecarlo::SimConfig sim_config(const ExperimentConfig& cfg) {
  return {cfg.mc.samples, cfg.mc.seed, cfg.mc.batch, cfg.jobs};
}

// Quantile of a cdf by bisection in log space.
double quantile(const topology::EndToEndChannel& ch, double p) {
  double lo = ch.support_hint * 1e-12, hi = ch.support_hint;
  while (ch.cdf(hi) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi / lo > 1.0 + 1e-12; ++i) {
    const double mid = std::sqrt(lo * hi);
    (ch.cdf(mid) < p ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

std::vector<double> auto_taus(const topology::EndToEndChannel& unit) {
  std::vector<double> taus;
  for (int k = 0; k <= 20; ++k) taus.push_back(quantile(unit, 0.02 + 0.048 * k));
  return taus;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

void write_json(std::ostream& out, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json o;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (r[i].empty()) {
        o[header[i]] = nullptr;
      } else if (i == 1 && header[i] == "policy") {
        o[header[i]] = r[i];
      } else {
        o[header[i]] = std::stod(r[i]);
      }
    }
    arr.push_back(o);
  }
  out << arr.dump(2) << '\n';
}

void write_table(const ExperimentConfig& cfg, std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  if (cfg.format == config::Format::Json) {
    write_json(out, header, rows);
  } else {
    write_csv(out, header, rows);
  }
}

// One analytic-versus-simulation comparison.
struct Check {
  double snr_db = 0.0;
  std::string quantity;
  double analytic = 0.0;
  double analytic_error = 0.0;
  double mc = 0.0;
  double mc_error = 0.0;
  double z = 0.0;
  bool ok = true;
  std::string note;
};

struct PointCheck {
  std::vector<Check> checks;
  // Selective only: tau, exact, per-side form, mc, z against each.
  std::vector<std::array<double, 6>> selective_table;
};

Check compare(double snr_db, std::string quantity, double analytic, double analytic_error, double mc,
              double mc_error) {
  Check c;
  c.snr_db = snr_db;
  c.quantity = std::move(quantity);
  c.analytic = analytic;
  c.analytic_error = analytic_error;
  c.mc = mc;
  c.mc_error = mc_error;
  c.z = z_score(mc, analytic, std::hypot(mc_error, analytic_error));
  c.ok = std::abs(c.z) <= 3.0;
  return c;
}

// Analytic and simulated capacities at one grid point, in sorted policy order.
std::vector<Check> capacity_checks(const ExperimentConfig& cfg, double snr_db, const montecarlo::SimReport& sim,
                                   const std::vector<capacity::PolicyResult>& analytic) {
  std::vector<Check> out;
  const auto policies = sorted_policies(cfg);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto& p = policies[i];
    const auto& a = analytic[i];
    const auto& m = sim.capacity_estimates.at(p.label());
    auto c = compare(snr_db, p.label(), a.capacity, a.quad_error, m.value, m.std_error);
    if (p.kind == PolicyKind::Cifr && a.divergent) {
      // E[1/gamma] is infinite: the simulation must fail to settle.
      c.ok = !m.converged;
      c.z = 0.0;
      c.note = m.converged ? "analytic divergent, simulation settled" : "divergent in both";
    } else if (!m.converged) {
      c.note = "simulation dominated by few draws";
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<double> need_cutoff(const ExperimentConfig& cfg, const topology::EndToEndChannel& ch) {
  for (const auto& p : cfg.policies) {
    if (p.kind == PolicyKind::Opra || (p.kind == PolicyKind::Tcifr && !p.cutoff)) {
      return *capacity::opra_cutoff(ch).cutoff;
    }
  }
  return std::nullopt;
}

std::vector<capacity::PolicyResult> evaluate_all(const ExperimentConfig& cfg, const topology::EndToEndChannel& ch,
                                                 double snr_db) {
  std::vector<capacity::PolicyResult> out;
  for (const auto& p : sorted_policies(cfg)) {
    try {
      out.push_back(capacity::evaluate(ch, p, cfg.prelog));
    } catch (const Error& e) {
      throw Error(e.code(), p.label() + " at snr_db=" + num(snr_db) + ": " + e.what());
    }
  }
  return out;
}

PointCheck check_point(const ExperimentConfig& cfg, const topology::EndToEndChannel& unit, double snr_db,
                       const std::vector<double>& unit_taus) {
  const double s = config::linear_snr(snr_db);
  const auto ch = unit.scaled(s);
  std::vector<double> taus;
  for (double t : unit_taus) taus.push_back(t * (cfg.tau.empty() ? s : 1.0));
  const auto analytic = evaluate_all(cfg, ch, snr_db);
  const auto sim = montecarlo::simulate(cfg.topology, sim_config(cfg), taus,
                                        {cfg.policies, cfg.prelog, need_cutoff(cfg, ch)}, s);
  PointCheck pc;
  const double n = static_cast<double>(sim.sample_count);
  for (std::size_t k = 0; k < taus.size(); ++k) {
    // Standard error under the analytic value, so exact zeros do not blow up.
    const double F = std::clamp(ch.cdf(taus[k]), 0.0, 1.0);
    const auto& e = sim.empirical_cdf[k];
    pc.checks.push_back(compare(snr_db, "cdf(" + num(taus[k]) + ")", F, ch.numeric_error, e.estimate,
                                std::sqrt(F * (1.0 - F) / n)));
  }
  auto caps = capacity_checks(cfg, snr_db, sim, analytic);
  pc.checks.insert(pc.checks.end(), caps.begin(), caps.end());

  if (const auto* sel = std::get_if<topology::Selective>(&cfg.topology)) {
    const auto scaled = std::get<topology::Selective>(topology::scaled(*sel, s));
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const double ex = topology::selective_cdf_exact(scaled, taus[k]);
      const double pa = topology::selective_cdf_paper(scaled, taus[k]);
      const double m = sim.empirical_cdf[k].estimate;
      pc.selective_table.push_back({taus[k], ex, pa, m, z_score(m, ex, std::sqrt(ex * (1.0 - ex) / n)),
                                    z_score(m, pa, std::sqrt(pa * (1.0 - pa) / n))});
    }
  }
  return pc;
}

template <class F>
int guarded(const char* command, std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << command << ": " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kConfigError : kNumericFailure;
  }
}

topology::EndToEndChannel unit_channel(const ExperimentConfig& cfg) {
  try {
    return topology::end_to_end(cfg.topology);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("building the end-to-end law: ") + e.what());
  }
}

}  // namespace

int capacity_sweep(const ExperimentConfig& cfg, bool validate, std::ostream& out, std::ostream& err) {
  return guarded("capacity-sweep", err, [&] {
    if (cfg.snr_db.empty()) throw Error(ErrorCode::ConfigError, "snr_db grid is empty");
    const auto unit = unit_channel(cfg);
    const auto policies = sorted_policies(cfg);
    const auto rows = capacity::sweep([&](double mean) { return unit.scaled(mean); }, policies,
                                      cfg.snr_db, cfg.prelog, cfg.jobs);
    std::vector<std::string> header{"snr_db", "policy", "capacity_bits_per_hz", "quad_error", "cutoff"};
    if (validate) header.insert(header.end(), {"mc_capacity", "mc_std_error", "z"});
    std::vector<std::vector<std::string>> table;
    for (const auto& row : rows) {
      std::vector<capacity::PolicyResult> results;
      for (const auto& cell : row.cells) {
        if (!cell.result) {
          throw Error(ErrorCode::QuadratureNotConverged,
                      cell.policy + " at snr_db=" + num(row.snr_db) + ": " + cell.error);
        }
        results.push_back(*cell.result);
      }
      std::vector<Check> checks;
      if (validate) {
        const double s = config::linear_snr(row.snr_db);
        const auto ch = unit.scaled(s);
        const auto sim = montecarlo::simulate(cfg.topology, sim_config(cfg), {},
                                              {cfg.policies, cfg.prelog, need_cutoff(cfg, ch)}, s);
        checks = capacity_checks(cfg, row.snr_db, sim, results);
      }
      for (std::size_t i = 0; i < row.cells.size(); ++i) {
        const auto& r = results[i];
        std::vector<std::string> line{num(row.snr_db), row.cells[i].policy, num(r.capacity), num(r.quad_error),
                                      opt_num(r.cutoff)};
        if (validate) line.insert(line.end(), {num(checks[i].mc), num(checks[i].mc_error), num(checks[i].z)});
        table.push_back(std::move(line));
      }
    }
    write_table(cfg, out, header, table);
    return kOk;
  });
}

int outage_sweep(const ExperimentConfig& cfg, bool validate, std::ostream& out, std::ostream& err) {
  return guarded("outage-sweep", err, [&] {
    if (cfg.tau.empty()) throw Error(ErrorCode::ConfigError, "outage-sweep needs a tau list");
    const auto unit = unit_channel(cfg);
    std::vector<std::string> header{"snr_db", "tau", "outage_probability"};
    if (validate) header.insert(header.end(), {"mc_outage", "mc_std_error", "z"});
    std::vector<std::vector<std::string>> table;
    for (double db : cfg.snr_db) {
      const double s = config::linear_snr(db);
      const auto ch = unit.scaled(s);
      std::optional<montecarlo::SimReport> sim;
      if (validate) sim = montecarlo::simulate(cfg.topology, sim_config(cfg), cfg.tau, {}, s);
      for (std::size_t k = 0; k < cfg.tau.size(); ++k) {
        const double F = ch.cdf(cfg.tau[k]);
        std::vector<std::string> line{num(db), num(cfg.tau[k]), num(F)};
        if (sim) {
          const auto& e = sim->empirical_cdf[k];
          const double se = std::sqrt(F * (1.0 - F) / static_cast<double>(sim->sample_count));
          line.insert(line.end(), {num(e.estimate), num(e.std_error),
                                   num(z_score(e.estimate, F, std::hypot(se, ch.numeric_error)))});
        }
        table.push_back(std::move(line));
      }
    }
    write_table(cfg, out, header, table);
    return kOk;
  });
}

int opra_cutoff(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("opra-cutoff", err, [&] {
    const auto unit = unit_channel(cfg);
    std::vector<std::vector<std::string>> table;
    for (double db : cfg.snr_db) {
      const auto ch = unit.scaled(config::linear_snr(db));
      capacity::PolicyResult r;
      try {
        r = capacity::opra_cutoff(ch);
      } catch (const Error& e) {
        throw Error(e.code(), "at snr_db=" + num(db) + ": " + e.what());
      }
      const double g0 = *r.cutoff;
      if (!(g0 > 0.0 && g0 <= 1.0)) {
        throw Error(ErrorCode::RootNotBracketed, "gamma0=" + num(g0) + " outside (0, 1] at snr_db=" + num(db));
      }
      table.push_back({num(db), num(g0), std::to_string(r.iterations), num(capacity::opra_residual(ch, g0))});
    }
    write_table(cfg, out, {"snr_db", "gamma0", "iterations", "residual"}, table);
    return kOk;
  });
}

int validate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded("validate", err, [&] {
    const auto unit = unit_channel(cfg);
    const auto unit_taus = cfg.tau.empty() ? auto_taus(unit) : cfg.tau;
    std::vector<PointCheck> points;
    for (double db : cfg.snr_db) points.push_back(check_point(cfg, unit, db, unit_taus));

    std::vector<const Check*> failed;
    std::size_t total = 0;
    for (const auto& p : points) {
      for (const auto& c : p.checks) {
        ++total;
        if (!c.ok) failed.push_back(&c);
      }
    }
    const boost::math::normal normal;
    const double bonferroni = boost::math::quantile(normal, 1.0 - 0.025 / static_cast<double>(total));

    if (cfg.format == config::Format::Json) {
      ordered_json j;
      j["config"] = cfg.name;
      j["samples"] = cfg.mc.samples;
      j["seed"] = cfg.mc.seed;
      j["comparisons"] = total;
      j["bonferroni_threshold"] = bonferroni;
      ordered_json rows = ordered_json::array();
      for (const auto& p : points) {
        for (const auto& c : p.checks) {
          rows.push_back({{"snr_db", c.snr_db}, {"quantity", c.quantity}, {"analytic", c.analytic},
                          {"analytic_error", c.analytic_error}, {"mc", c.mc}, {"mc_std_error", c.mc_error},
                          {"z", c.z}, {"ok", c.ok}, {"note", c.note}});
        }
      }
      j["checks"] = rows;
      j["failed"] = failed.size();
      out << j.dump(2) << '\n';
    } else {
      out << "config " << cfg.name << "\n";
      out << "samples " << cfg.mc.samples << " seed " << cfg.mc.seed << "\n";
      out << "note: each of " << total << " comparisons passes at |z| <= 3 (two-sided 0.27%); "
          << "a Bonferroni 5% family-wise threshold would be |z| <= " << num(bonferroni) << "\n\n";
      out << "snr_db,quantity,analytic,analytic_error,mc,mc_std_error,z,status\n";
      for (const auto& p : points) {
        for (const auto& c : p.checks) {
          out << num(c.snr_db) << ',' << c.quantity << ',' << num(c.analytic) << ',' << num(c.analytic_error) << ','
              << num(c.mc) << ',' << num(c.mc_error) << ',' << num(c.z) << ',' << (c.ok ? "ok" : "FAIL");
          if (!c.note.empty()) out << " (" << c.note << ')';
          out << '\n';
        }
      }
      if (std::holds_alternative<topology::Selective>(cfg.topology)) {
        out << "\nselective cdf: exact (product of branch cdfs) vs paper_eq6 (product of per-side outage unions)\n";
        out << "snr_db,tau,exact,paper_eq6,mc,z_exact,z_paper_eq6\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
          for (const auto& r : points[i].selective_table) {
            out << num(cfg.snr_db[i]);
            for (double v : r) out << ',' << num(v);
            out << '\n';
          }
        }
      }
      out << "\n" << (failed.empty() ? "PASS" : "FAIL") << ": " << total - failed.size() << "/" << total
          << " within 3 standard errors\n";
    }
    if (!failed.empty()) {
      err << "validate: " << failed.size() << " of " << total << " points outside 3 standard errors\n";
      for (const auto* c : failed) {
        err << "  snr_db=" << num(c->snr_db) << ' ' << c->quantity << " analytic=" << num(c->analytic)
            << " mc=" << num(c->mc) << " z=" << num(c->z) << (c->note.empty() ? "" : " (" + c->note + ")") << '\n';
      }
      return kValidationFailure;
    }
    return kOk;
  });
}

}  // namespace relaycap::cli
