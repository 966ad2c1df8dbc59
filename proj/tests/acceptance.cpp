// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <boost/math/special_functions/bessel.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "relaycap/cli.hpp"
#include "relaycap/montecarlo.hpp"
#include "relaycap/quadrature.hpp"

using namespace relaycap;

namespace {

// Pinned tolerances and budgets.
constexpr double kIdentityRel = 1e-8;
constexpr double kBesselRel = 1e-6;
constexpr double kMassTol = 1e-6;
constexpr double kZ = 3.0;
constexpr double kCutoffOracle = 0.393773845045118357;  // root of e^-g/g - E1(g) = 1
constexpr double kCutoffTol = 1e-3;
constexpr double kEffectiveTol = 1e-3;
constexpr double kOraFormTol = 1e-4;
constexpr double kArbitrationSigma = 100.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double db(double x) { return std::pow(10.0, x / 10.0); }

Outcome identities() {
  double worst = 0.0;
  const foxh::HParams e{1, 0, {}, {{0.0, 1.0}}};
  for (int i = 0; i < 40; ++i) {
    const double x = 0.01 * std::pow(2000.0, i / 39.0);
    worst = std::max(worst, std::abs(foxh::eval_h(e, x).value / std::exp(-x) - 1.0));
    for (double m : {2.0, 3.0, 4.5}) {
      const foxh::HParams g{1, 0, {}, {{m - 1.0, 1.0}}};
      worst = std::max(worst, std::abs(foxh::eval_h(g, x).value / (std::pow(x, m - 1.0) * std::exp(-x)) - 1.0));
    }
  }
  // Gamma-Gamma irradiance density: (ab/(Ga Gb)) H^{2,0}_{0,2}(ab I | (a-1,1),(b-1,1))
  // against 2 (ab)^((a+b)/2) I^((a+b)/2-1) K_{a-b}(2 sqrt(ab I)) / (Ga Gb).
  double bessel = 0.0;
  const double a = 2.902, b = 2.51, ab = a * b;
  const foxh::HParams gg{2, 0, {}, {{a - 1.0, 1.0}, {b - 1.0, 1.0}}};
  for (int i = 0; i < 40; ++i) {
    const double x = 0.01 * std::pow(2000.0, i / 39.0);
    const double h = foxh::eval_h(gg, ab * x).value * ab;
    const double k = 2.0 * std::pow(ab, 0.5 * (a + b)) * std::pow(x, 0.5 * (a + b) - 1.0) *
                     boost::math::cyl_bessel_k(a - b, 2.0 * std::sqrt(ab * x));
    bessel = std::max(bessel, std::abs(h / k - 1.0));
  }
  // With pointing errors the model's H route against its elementary route.
  double pointing = 0.0;
  for (const auto* label : {"gg strong", "gg imdd", "gg weak"}) {
    for (const auto& n : fixtures::matrix()) {
      if (n.label != label) continue;
      const double mean = fading::mean_snr(n.model);
      for (double r : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
        const double pe = *fading::pdf_elementary(n.model, r * mean), ph = fading::pdf_h(n.model, r * mean);
        pointing = std::max(pointing, std::abs(ph / pe - 1.0));
      }
    }
  }
  return {worst <= kIdentityRel && bessel <= kBesselRel && pointing <= kBesselRel,
          fmt("exp/gamma kernels max rel %.2g (<= 1e-8); Bessel-K %.2g, pointing-error form %.2g (<= 1e-6)", worst,
              bessel, pointing)};
}

Outcome normalization() {
  auto sets = fixtures::matrix();
  sets.push_back({"generic_h gamma 2", fading::GenericH{2.0, 2.0, {1, 0, {}, {{1.0, 1.0}}}}});
  sets.push_back({"generic_h gamma 0.6", fading::GenericH{1.0 / std::tgamma(0.6), 1.0, {1, 0, {}, {{-0.4, 1.0}}}}});
  sets.push_back({"generic_h bessel", fading::GenericH{1.0 / (std::tgamma(1.5) * std::tgamma(2.5)), 1.0,
                                                       {2, 0, {}, {{0.5, 1.0}, {1.5, 1.0}}}}});
  double worst = 0.0;
  std::string where;
  for (const auto& [label, m0] : sets) {
    const auto& m = m0;
    const double mean = fading::mean_snr(m);
    const auto f = [&](double u) {
      const double g = mean * std::exp(u);
      return g * fading::pdf(m, g);
    };
    quad::Options opt;
    opt.rel_tol = 1e-10;
    const double mass = quad::integrate(f, -60.0, 0.0, opt).value + quad::integrate(f, 0.0, 8.0, opt).value;
    if (std::abs(mass - 1.0) > worst) {
      worst = std::abs(mass - 1.0);
      where = label;
    }
  }
  return {worst <= kMassTol, fmt("%.0f parameter sets, max |mass - 1| = %.2g (<= 1e-6)", sets.size(), worst) +
                                 " at " + where};
}

// Validate reports, kept for the determinism criterion.
std::string first_report;
config::ExperimentConfig first_config;

Outcome mc_agreement() {
  Outcome o;
  int checks = 0;
  double worst = 0.0;
  for (const char* name : {"fig1_serial2", "fig1_selective3", "fig2_malaga", "fig3_dgg"}) {
    auto cfg = config::load(std::string(RELAYCAP_CONFIG_DIR) + "/" + name + ".json");
    cfg.snr_db = {0.0, 7.5, 15.0, 22.5, 30.0};
    cfg.tau.clear();  // 21 quantiles per point
    cfg.mc.samples = 1'000'000;
    std::ostringstream out, err;
    const int rc = cli::validate(cfg, out, err);
    if (first_report.empty()) {
      first_report = out.str();
      first_config = cfg;
    }
    std::istringstream lines(out.str());
    for (std::string line; std::getline(lines, line);) {
      std::vector<std::string> f;
      std::istringstream l(line);
      for (std::string c; std::getline(l, c, ',');) f.push_back(c);
      if (f.size() != 8 || f[0] == "snr_db") continue;
      ++checks;
      worst = std::max(worst, std::abs(std::stod(f[6])));
    }
    if (rc != cli::kOk) {
      o.pass = false;
      o.detail += std::string(name) + " failed: " + err.str();
    }
  }
  o.detail += fmt("%.0f comparisons (cdf at 21 taus, 5 SNR points, every policy), max |z| = %.3g (<= 3)", checks,
                  worst);
  return o;
}

struct MatrixPoint {
  std::string label;
  double snr_db;
  capacity::PolicyResult ora, ora_pdf, opra, opra_pdf, cifr, effective;
};

const std::vector<MatrixPoint>& matrix_results() {
  static const std::vector<MatrixPoint> cache = [] {
    std::vector<MatrixPoint> out;
    for (const auto& [label, topo] : fixtures::topology_matrix()) {
      const auto unit = topology::end_to_end(topo);
      for (double s : {0.0, 10.0, 20.0, 30.0}) {
        const auto ch = unit.scaled(db(s));
        MatrixPoint p{label, s};
        p.ora = capacity::ora(ch);
        p.ora_pdf = capacity::ora_expectation(ch);
        p.opra = capacity::opra(ch);
        p.opra_pdf = capacity::opra_expectation(ch, *p.opra.cutoff);
        p.cifr = capacity::cifr(ch);
        p.effective = capacity::effective(ch, {1e-4});
        out.push_back(p);
      }
    }
    return out;
  }();
  return cache;
}

Outcome cutoff_interval() {
  Outcome o;
  double lo = 1.0, hi = 0.0;
  for (const auto& p : matrix_results()) {
    const double g = *p.opra.cutoff;
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    if (!(g > 0.0 && g <= 1.0)) {
      o.pass = false;
      o.detail += p.label + fmt(" at %.0f dB: gamma0 = %.9g; ", p.snr_db, g);
    }
  }
  const auto exp = capacity::opra_cutoff(topology::single_hop(fading::HopLaw(fading::Exponential{1.0})));
  const double d = std::abs(*exp.cutoff - kCutoffOracle);
  o.pass = o.pass && d <= kCutoffTol;
  o.detail += fmt("%.0f points, gamma0 in [%.4g, %.4g]", matrix_results().size(), lo, hi) +
              fmt("; Exp(1) gamma0 = %.9g vs oracle %.9g (|diff| %.2g <= 1e-3)", *exp.cutoff, kCutoffOracle, d);
  return o;
}

Outcome ordering() {
  Outcome o;
  double eff = 0.0;
  int bad = 0;
  for (const auto& p : matrix_results()) {
    const bool ok = p.opra.capacity + p.opra.quad_error + p.ora.quad_error >= p.ora.capacity &&
                    p.ora.capacity + p.ora.quad_error + p.cifr.quad_error >= p.cifr.capacity;
    eff = std::max(eff, std::abs(p.effective.capacity - p.ora.capacity));
    if (!ok) {
      ++bad;
      o.detail += p.label + fmt(" at %.0f dB out of order; ", p.snr_db);
    }
  }
  o.pass = bad == 0 && eff <= kEffectiveTol;
  o.detail += fmt("OPRA >= ORA >= CIFR at %.0f of %.0f points; max |effective(1e-4) - ORA| = %.2g (<= 1e-3)",
                  matrix_results().size() - bad, matrix_results().size(), eff);
  return o;
}

Outcome arbitration() {
  const topology::Selective sel{fixtures::iid_branches(fading::Exponential{1.0}, 1)};
  const auto r = montecarlo::simulate(sel, {10'000'000, 2024, 1 << 16, 1}, {1.0});
  const auto& e = r.empirical_cdf[0];
  const double exact = topology::selective_cdf_exact(sel, 1.0), paper = topology::selective_cdf_paper(sel, 1.0);
  const double z_exact = (e.estimate - exact) / e.std_error, z_paper = (e.estimate - paper) / e.std_error;
  const bool pass = std::abs(exact - (1.0 - std::exp(-2.0))) < 1e-12 &&
                    std::abs(paper - std::pow(1.0 - std::exp(-1.0), 2.0)) < 1e-12 && std::abs(z_exact) <= kZ &&
                    std::abs(z_paper) > kArbitrationSigma;
  return {pass, fmt("MC %.7f; exact 1-e^-2 z = %.3g (<= 3); per-side form (1-e^-1)^2 z = %.4g (> 100)",
                    e.estimate, z_exact, z_paper) +
                    " -- the per-side union form is rejected"};
}

Outcome parts_identity() {
  Outcome o;
  double opra = 0.0, ora = 0.0;
  int bad = 0;
  for (const auto& p : matrix_results()) {
    const double d = std::abs(p.opra.capacity - p.opra_pdf.capacity);
    const double tol = p.opra.quad_error + p.opra_pdf.quad_error;
    opra = std::max(opra, tol > 0.0 ? d / tol : (d == 0.0 ? 0.0 : INFINITY));
    const double dora = std::abs(p.ora.capacity - p.ora_pdf.capacity);
    ora = std::max(ora, dora);
    if (d > tol || dora > kOraFormTol) {
      ++bad;
      o.detail += p.label + fmt(" at %.0f dB; ", p.snr_db);
    }
  }
  o.pass = bad == 0;
  o.detail += fmt("OPRA forms within reported error everywhere (max ratio %.2g <= 1); max ORA form gap %.2g (<= 1e-4)",
                  opra, ora);
  return o;
}

Outcome determinism() {
  if (first_report.empty()) return {false, "criterion 3 produced no report"};
  std::ostringstream again, err;
  cli::validate(first_config, again, err);
  const bool same = again.str() == first_report;
  return {same, "validate(" + first_config.name + ")" +
                    fmt(" rerun with seed %.0f: %.0f bytes, ", first_config.mc.seed, first_report.size()) +
                    (same ? "byte-identical" : "reports differ")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "H-function identities", 10.0, identities},
      {2, "normalization", 60.0, normalization},
      {3, "Monte Carlo agreement", 600.0, mc_agreement},
      {4, "OPRA cutoff in (0, 1]", 0.0, cutoff_interval},
      {5, "policy ordering", 0.0, ordering},
      {6, "selective cdf arbitration", 0.0, arbitration},
      {7, "integration-by-parts identities", 0.0, parts_identity},
      {8, "validate determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || s < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %d %s: %s -- %s [%.1f s%s]\n", c.id, c.title, pass ? "PASS" : "FAIL", o.detail.c_str(), s,
                c.budget_s > 0.0 ? fmt(", budget %.0f s", c.budget_s).c_str() : "");
    std::fflush(stdout);
  }
  return failed;
}
