#include "relaycap/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace relaycap::config {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

// Object view that rejects keys nobody asked for.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(path_ + "." + key + " is required");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_number()) fail(where(key) + " must be a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0) || !std::isfinite(v)) fail(where(key) + " must be positive");
    return v;
  }
  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number() && v.get<double>() >= 0 && std::floor(v.get<double>()) == v.get<double>()) {
      return static_cast<std::uint64_t>(v.get<double>());
    }
    fail(where(key) + " must be a nonnegative integer");
  }

  std::string text(const std::string& key) {
    const auto& v = at(key);
    if (!v.is_string()) fail(where(key) + " must be a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail("unknown key " + path_ + "." + k);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int order(Obj& o) {
  const auto r = o.count("detection_order", 1);
  if (r != 1 && r != 2) fail(o.where("detection_order") + " must be 1 or 2");
  return static_cast<int>(r);
}

std::vector<foxh::Pair> pairs(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path + " must be a list of [value, weight] pairs");
  std::vector<foxh::Pair> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      fail(path + " entries must be [value, weight]");
    }
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

fading::Model model(const json& j, const std::string& path) {
  Obj o(j, path);
  const auto name = o.text("model");
  fading::Model m;
  if (name == "exponential") {
    m = fading::Exponential{1.0};
  } else if (name == "gamma") {
    m = fading::Gamma{o.positive("shape"), 1.0};
  } else if (name == "weibull") {
    m = fading::make_weibull(o.positive("shape"), 1.0);
  } else if (name == "generalized_gamma") {
    const double shape = o.positive("shape");
    m = fading::make_generalized_gamma(shape, o.positive("power"), 1.0);
  } else if (name == "weibull_gamma") {
    const double w = o.positive("weibull_shape");
    m = fading::WeibullGamma{w, o.positive("gamma_shape"), 1.0};
  } else if (name == "gamma_gamma") {
    const double a = o.positive("alpha"), b = o.positive("beta"), xi = o.positive("pointing");
    m = fading::make_gamma_gamma(a, b, xi, order(o), 1.0);
  } else if (name == "double_gg") {
    const double a1 = o.positive("alpha1"), a2 = o.positive("alpha2");
    const double m1 = o.positive("m1"), m2 = o.positive("m2");
    const double w1 = o.positive("omega1", 1.0), w2 = o.positive("omega2", 1.0);
    m = fading::make_double_gg(a1, a2, m1, m2, w1, w2, order(o), 1.0);
  } else if (name == "malaga") {
    const double a = o.positive("alpha"), b = o.positive("beta"), w = o.positive("omega_prime");
    const double b0 = o.positive("b0"), rho = o.number("rho");
    const int r = order(o);
    auto mm = fading::make_malaga(a, b, w, b0, rho, r, 1.0);
    mm.series_terms = static_cast<int>(o.count("series_terms", 0));
    m = mm;
  } else if (name == "generic_h") {
    fading::GenericH h;
    h.kappa = o.positive("kappa");
    h.delta = o.positive("delta");
    h.h.m = static_cast<int>(o.count("m", 0));
    h.h.n = static_cast<int>(o.count("n", 0));
    h.h.upper = pairs(o.at("upper"), o.where("upper"));
    h.h.lower = pairs(o.at("lower"), o.where("lower"));
    m = fading::with_mean_snr(h, 1.0);
  } else {
    fail("unknown model '" + name + "' at " + path);
  }
  o.finish();
  fading::validate(m);
  return m;
}

topology::Topology topo(const json& j) {
  Obj o(j, "topology");
  const auto type = o.text("type");
  const auto relays = o.count("relays", 1);
  if (relays == 0) fail("topology.relays must be at least 1");
  const std::size_t hop_count = type == "serial" ? relays + 1 : 2 * relays;

  std::vector<fading::Model> hops;
  if (o.has("hops") == o.has("hop")) fail("topology needs exactly one of 'hop' or 'hops'");
  if (o.has("hop")) {
    hops.assign(hop_count, model(o.at("hop"), "topology.hop"));
  } else {
    const auto& list = o.at("hops");
    if (!list.is_array() || list.size() != hop_count) {
      fail("topology.hops must list " + std::to_string(hop_count) + " models for " + type + " with " +
           std::to_string(relays) + " relays");
    }
    for (std::size_t i = 0; i < list.size(); ++i) hops.push_back(model(list[i], "topology.hops[" + std::to_string(i) + "]"));
  }

  std::vector<topology::Branch> branches;
  for (std::size_t i = 0; i + 1 < hops.size(); i += 2) branches.push_back({hops[i], hops[i + 1]});

  topology::Topology t;
  if (type == "serial") {
    t = topology::Serial{hops};
  } else if (type == "all_active") {
    t = topology::AllActive{branches};
  } else if (type == "selective") {
    const auto f = o.text("formula", "exact");
    if (f != "exact" && f != "paper_eq6") fail("topology.formula must be 'exact' or 'paper_eq6'");
    t = topology::Selective{branches, f == "exact" ? topology::SelectiveFormula::Exact
                                                   : topology::SelectiveFormula::PaperEq6};
  } else {
    fail("topology.type must be serial, all_active or selective");
  }
  o.finish();
  return t;
}

capacity::Policy make_policy(capacity::PolicyKind kind, double qos_delta = 1.0) {
  capacity::Policy p;
  p.kind = kind;
  p.qos_delta = qos_delta;
  return p;
}

std::vector<capacity::Policy> policies(const json& j) {
  using capacity::PolicyKind;
  if (!j.is_array() || j.empty()) fail("policies must be a nonempty list");
  std::vector<capacity::Policy> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Obj o(j[i], "policies[" + std::to_string(i) + "]");
    const auto name = o.text("name");
    if (name == "ora") {
      out.push_back(make_policy(PolicyKind::Ora));
    } else if (name == "cifr") {
      out.push_back(make_policy(PolicyKind::Cifr));
    } else if (name == "opra") {
      out.push_back(make_policy(PolicyKind::Opra));
    } else if (name == "effective") {
      const auto& d = o.at("qos_delta");
      std::vector<double> deltas;
      if (d.is_number()) {
        deltas.push_back(d.get<double>());
      } else if (d.is_array() && !d.empty()) {
        for (const auto& e : d) {
          if (!e.is_number()) fail(o.where("qos_delta") + " entries must be numbers");
          deltas.push_back(e.get<double>());
        }
      } else {
        fail(o.where("qos_delta") + " must be a number or a nonempty list");
      }
      for (double v : deltas) {
        if (!(v > 0.0)) fail(o.where("qos_delta") + " must be positive");
        out.push_back(make_policy(PolicyKind::Effective, v));
      }
    } else if (name == "tcifr") {
      auto p = make_policy(PolicyKind::Tcifr);
      if (o.has("cutoff")) {
        const auto& c = o.at("cutoff");
        if (c.is_number() && c.get<double>() > 0.0) {
          p.cutoff = c.get<double>();
        } else if (!(c.is_string() && c.get<std::string>() == "opra")) {
          fail(o.where("cutoff") + " must be \"opra\" or a positive number");
        }
      }
      out.push_back(p);
    } else {
      fail("unknown policy '" + name + "'");
    }
    o.finish();
  }
  return out;
}

std::vector<double> grid(const json& j) {
  Obj o(j, "snr_db");
  std::vector<double> out;
  if (o.has("points")) {
    const auto& p = o.at("points");
    if (!p.is_array()) fail("snr_db.points must be a list");
    for (const auto& e : p) {
      if (!e.is_number()) fail("snr_db.points entries must be numbers");
      out.push_back(e.get<double>());
    }
    std::sort(out.begin(), out.end());
  } else {
    const double start = o.number("start"), stop = o.number("stop"), step = o.number("step");
    if (!(step > 0.0)) fail("snr_db.step must be positive");
    for (long k = 0;; ++k) {
      const double v = start + static_cast<double>(k) * step;
      if (v > stop + 1e-9 * step) break;
      out.push_back(v);
    }
  }
  o.finish();
  if (out.empty()) fail("snr_db grid is empty");
  return out;
}

}  // namespace

double linear_snr(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

ExperimentConfig parse(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("cannot parse config: ") + e.what());
  }
  ExperimentConfig c;
  Obj o(j, "config");
  try {
    c.name = o.text("name", "experiment");
    c.topology = topo(o.at("topology"));
    c.policies = policies(o.at("policies"));
    c.prelog.value = o.positive("prelog", 0.5);
    c.snr_db = grid(o.at("snr_db"));
    if (o.has("tau")) {
      const auto& t = o.at("tau");
      if (!t.is_array()) fail("tau must be a list");
      for (const auto& e : t) {
        if (!e.is_number() || !(e.get<double>() > 0.0)) fail("tau entries must be positive numbers");
        c.tau.push_back(e.get<double>());
      }
      std::sort(c.tau.begin(), c.tau.end());
    }
    if (o.has("mc")) {
      Obj m(o.at("mc"), "mc");
      c.mc.samples = m.count("samples", c.mc.samples);
      c.mc.seed = m.count("seed", c.mc.seed);
      c.mc.batch = m.count("batch", c.mc.batch);
      if (c.mc.batch == 0) fail("mc.batch must be positive");
      m.finish();
    }
    if (o.has("output")) {
      Obj out(o.at("output"), "output");
      c.output_path = out.text("path", "-");
      const auto f = out.text("format", "csv");
      if (f != "csv" && f != "json") fail("output.format must be csv or json");
      c.format = f == "csv" ? Format::Csv : Format::Json;
      out.finish();
    }
    const auto jobs = o.count("jobs", 1);
    if (jobs == 0) fail("jobs must be at least 1");
    c.jobs = static_cast<int>(jobs);
    o.finish();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(e.what());
  } catch (const json::exception& e) {
    fail(e.what());
  }
  return c;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return parse(s.str());
}

std::string schema_help() {
  return R"(Config file (JSON). Unknown keys are errors.
  name                 label used in reports (default "experiment")
  topology.type        serial | all_active | selective
  topology.relays      relay count N >= 1 (default 1); serial has N+1 hops,
                       all_active and selective have N two-hop branches
  topology.formula     selective only: exact (default) | paper_eq6
  topology.hop         one model used for every hop, or
  topology.hops        list of models in hop order (branch i = hops 2i, 2i+1)
  model                exponential
                       gamma              shape
                       weibull            shape
                       generalized_gamma  shape, power
                       weibull_gamma      weibull_shape, gamma_shape
                       gamma_gamma        alpha, beta, pointing, detection_order
                       double_gg          alpha1, alpha2, m1, m2, omega1=1, omega2=1,
                                          detection_order
                       malaga             alpha, beta, omega_prime, b0, rho,
                                          detection_order, series_terms=0 (auto)
                       generic_h          kappa, delta, m, n, upper, lower
                                          ([[value, weight], ...]; rescaled to unit mean)
                       detection_order is 1 (heterodyne, default) or 2 (IM/DD)
  policies             list of {name: ora | effective | cifr | tcifr | opra}
                       effective: qos_delta (number or list, > 0)
                       tcifr: cutoff = "opra" (default) | positive number
  prelog               rate prelog factor (default 0.5)
  snr_db               {start, stop, step} inclusive, or {points: [...]};
                       every hop has mean SNR 10^(snr_db/10)
  tau                  outage thresholds (linear SNR); validate picks 21
                       quantiles per point when omitted
  mc.samples           Monte Carlo samples (default 1000000)
  mc.seed              seed (default 1)
  mc.batch             samples per batch (default 65536)
  output.path          output file, "-" for stdout (default)
  output.format        csv (default) | json
  jobs                 worker threads (default 1)
)";
}

}  // namespace relaycap::config
