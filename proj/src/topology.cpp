#include "relaycap/topology.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace relaycap::topology {

namespace {

using fading::HopLaw;
using fading::Model;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Tabulated hop laws, one per distinct model.
struct LawSet {
  std::vector<HopLaw> unique;
  std::vector<std::size_t> index;  // hop -> unique law

  explicit LawSet(const std::vector<Model>& models) {
    for (const auto& m : models) {
      auto it = std::find_if(unique.begin(), unique.end(), [&](const HopLaw& l) { return l.model() == m; });
      if (it == unique.end()) {
        unique.emplace_back(m);
        it = unique.end() - 1;
      }
      index.push_back(static_cast<std::size_t>(it - unique.begin()));
    }
  }
  const HopLaw& operator[](std::size_t hop) const { return unique[index[hop]]; }
  std::size_t size() const { return index.size(); }
};

struct Hop {
  double cdf, pdf;
};

// F = 1 - prod S_k and f = sum_n f_n prod_{k != n} S_k.
Hop min_of(const std::vector<Hop>& h) {
  double survival = 1.0, density = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    double others = 1.0;
    for (std::size_t k = 0; k < h.size(); ++k)
      if (k != n) others *= 1.0 - h[k].cdf;
    density += h[n].pdf * others;
    survival *= 1.0 - h[n].cdf;
  }
  return {1.0 - survival, density};
}

// F = prod F_k and f = sum_n f_n prod_{k != n} F_k.
Hop max_of(const std::vector<Hop>& h) {
  double mass = 1.0, density = 0.0;
  for (std::size_t n = 0; n < h.size(); ++n) {
    double others = 1.0;
    for (std::size_t k = 0; k < h.size(); ++k)
      if (k != n) others *= h[k].cdf;
    density += h[n].pdf * others;
    mass *= h[n].cdf;
  }
  return {mass, density};
}

// The printed selective formula: outage union of all first hops times the
// outage union of all second hops.
Hop paper_selective(const std::vector<Hop>& first, const std::vector<Hop>& second) {
  const Hop a = min_of(first), b = min_of(second);
  return {a.cdf * b.cdf, a.pdf * b.cdf + a.cdf * b.pdf};
}

// Smallest g with cdf(g) >= p, by bracketing and bisection in log g.
double quantile_of(const std::function<double(double)>& cdf, double p, double start) {
  double lo = start, hi = start;
  while (cdf(lo) >= p && lo > 1e-280) lo *= 0.25;
  while (cdf(hi) < p && hi < 1e280) hi *= 4.0;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return hi;
}

std::vector<Branch> branches_of(const Topology& t) {
  if (const auto* a = std::get_if<AllActive>(&t)) return a->branches;
  if (const auto* s = std::get_if<Selective>(&t)) return s->branches;
  return {};
}

Hop hop_at(const HopLaw& law, double g) { return {law.cdf(g), law.pdf(g)}; }

double hop_mean_sum(const LawSet& laws) {
  double sum = 0.0;
  for (std::size_t i = 0; i < laws.size(); ++i) sum += std::isfinite(laws[i].mean()) ? laws[i].mean() : 1.0;
  return sum / laws.size();
}

double max_hop_error(const LawSet& laws) {
  double e = 0.0;
  for (const auto& l : laws.unique) e = std::max(e, l.cdf_error());
  return e;
}

EndToEndChannel from_rule(const std::shared_ptr<const LawSet>& laws,
                          std::function<Hop(const LawSet&, double)> rule,
                          std::function<double(const LawSet&, CounterRng&)> draw) {
  EndToEndChannel ch;
  ch.cdf = [laws, rule](double g) { return g > 0.0 ? std::clamp(rule(*laws, g).cdf, 0.0, 1.0) : 0.0; };
  ch.pdf = [laws, rule](double g) { return g > 0.0 ? std::max(rule(*laws, g).pdf, 0.0) : 0.0; };
  ch.sampler = [laws, draw](CounterRng& rng) { return draw(*laws, rng); };
  ch.support_hint = quantile_of(ch.cdf, 1.0 - 1e-6, hop_mean_sum(*laws));
  ch.numeric_error = laws->size() * max_hop_error(*laws);
  return ch;
}

// ---- all-active grid convolution -------------------------------------------

struct Grid {
  double step = 0.0;
  std::vector<double> cdf, pdf;
};

// Distribution of the sum of the branches on a uniform grid of n points over
// [0, end]. F_k(t_i) = sum_j dF_b[j] (F_{k-1}(t_{i-j}) + F_{k-1}(t_{i-j+1})) / 2
// with dF_b the exact branch masses of the cells, and f_k from the cell
// masses of F_{k-1}.
Grid convolve(const std::vector<std::function<double(double)>>& branch_cdfs, double end, int n) {
  Grid g;
  g.step = end / (n - 1);
  const auto masses = [&](const std::function<double(double)>& F) {
    std::vector<double> m(n, 0.0);
    double prev = 0.0;
    for (int i = 1; i < n; ++i) {
      const double v = F(i * g.step);
      m[i] = v - prev;
      prev = v;
    }
    return m;
  };
  std::vector<double> acc = masses(branch_cdfs[0]);  // cell masses of F_{k-1}
  g.cdf.assign(n, 0.0);
  for (int i = 1; i < n; ++i) g.cdf[i] = g.cdf[i - 1] + acc[i];
  for (std::size_t b = 1; b < branch_cdfs.size(); ++b) {
    const std::vector<double> mb = masses(branch_cdfs[b]);
    std::vector<double> F(n, 0.0), f(n, 0.0);
    for (int i = 1; i < n; ++i) {
      double sf = 0.0, sd = 0.0;
      for (int j = 1; j <= i; ++j) {
        sf += mb[j] * (g.cdf[i - j] + 0.5 * acc[i - j + 1]);
        sd += mb[j] * acc[i - j + 1];
      }
      F[i] = sf;
      f[i] = sd / g.step;
    }
    g.pdf = std::move(f);
    for (int i = 1; i < n; ++i) acc[i] = F[i] - F[i - 1];
    g.cdf = std::move(F);
  }
  return g;
}

// Hermite interpolant over one convolution grid.
struct GridLevel {
  Grid grid;
  double end() const { return grid.step * (grid.cdf.size() - 1); }

  double cdf(double t) const {
    const double x = t / grid.step;
    const auto i = std::min(static_cast<std::size_t>(x), grid.cdf.size() - 2);
    const double s = x - i, h = grid.step;
    const double y0 = grid.cdf[i], y1 = grid.cdf[i + 1], d0 = grid.pdf[i], d1 = grid.pdf[i + 1];
    const double s2 = s * s, s3 = s2 * s;
    const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
                     (s3 - s2) * h * d1;
    return std::clamp(v, 0.0, 1.0);
  }

  double pdf(double t) const {
    const double x = t / grid.step;
    const auto i = std::min(static_cast<std::size_t>(x), grid.cdf.size() - 2);
    const double s = x - i;
    return std::max(0.0, (1.0 - s) * grid.pdf[i] + s * grid.pdf[i + 1]);
  }
};

// The sum lies below t only if every branch does, so the law on [0, L]
// needs the branch laws on [0, L] alone. Each zoom level recomputes the
// convolution on the first cells of the previous grid; below the finest
// level a power law continues the cdf.
struct GridLaw {
  std::vector<GridLevel> levels;  // coarse to fine
  static constexpr int kAnchor = 32;
  static constexpr int kZoomCells = 64;
  static constexpr int kZoomPoints = 2049;
  double exponent = 1.0;

  GridLaw(const std::vector<std::function<double(double)>>& cdfs, double end, int n) {
    levels.push_back({convolve(cdfs, end, n)});
    while (levels.size() < 8) {
      const GridLevel& last = levels.back();
      const double zoom_end = kZoomCells * last.grid.step;
      if (last.grid.cdf[kZoomCells] < 1e-12) break;
      levels.push_back({convolve(cdfs, zoom_end, kZoomPoints)});
    }
    const Grid& g = levels.back().grid;
    const double fa = g.cdf[kAnchor];
    exponent = fa > 0.0 ? kAnchor * g.step * g.pdf[kAnchor] / fa : 1.0;
    if (!(exponent > 0.0)) exponent = 1.0;
  }

  double end() const { return levels.front().end(); }

  // Finest level that resolves t, or nullptr below the finest anchor.
  const GridLevel* level_for(double t) const {
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
      if (t < it->end() && t >= kAnchor * it->grid.step) return &*it;
    }
    return t >= kAnchor * levels.back().grid.step ? &levels.front() : nullptr;
  }

  double cdf(double t) const {
    if (!(t > 0.0)) return 0.0;
    if (t >= end()) return 1.0;
    if (const GridLevel* l = level_for(t)) return l->cdf(t);
    const Grid& g = levels.back().grid;
    return g.cdf[kAnchor] * std::pow(t / (kAnchor * g.step), exponent);
  }

  double pdf(double t) const {
    if (!(t > 0.0) || t >= end()) return 0.0;
    if (const GridLevel* l = level_for(t)) return l->pdf(t);
    return exponent * cdf(t) / t;
  }
};

EndToEndChannel all_active_channel(const AllActive& t, const ConvolutionOptions& opt) {
  auto laws = std::make_shared<const LawSet>(hops(t));
  const std::size_t nb = t.branches.size();
  const auto branch = [laws](std::size_t b) {
    return [laws, b](double g) {
      return min_of({hop_at((*laws)[2 * b], g), hop_at((*laws)[2 * b + 1], g)});
    };
  };
  const auto draw = [](const LawSet& l, CounterRng& rng) {
    double sum = 0.0;
    for (std::size_t b = 0; 2 * b < l.size(); ++b) sum += std::min(l[2 * b].sample(rng), l[2 * b + 1].sample(rng));
    return sum;
  };
  if (nb == 1) {
    auto rule = [](const LawSet& l, double g) { return min_of({hop_at(l[0], g), hop_at(l[1], g)}); };
    return from_rule(laws, rule, draw);
  }
  if (opt.points < 64) throw Error(ErrorCode::InvalidParameter, "convolution grid needs at least 64 points");

  std::vector<std::function<double(double)>> cdfs;
  double q = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto rule = branch(b);
    cdfs.push_back([rule](double g) { return g > 0.0 ? rule(g).cdf : 0.0; });
    q = std::max(q, quantile_of(cdfs.back(), 1.0 - opt.tail_mass, hop_mean_sum(*laws)));
  }
  const double end = nb * q;
  auto fine = std::make_shared<const GridLaw>(cdfs, end, opt.points + 1);
  const Grid coarse = convolve(cdfs, end, opt.points / 2 + 1);

  const Grid& top = fine->levels.front().grid;
  const double deficit = 1.0 - top.cdf.back();
  if (deficit > opt.max_deficit) {
    throw Error(ErrorCode::GridResolutionInsufficient,
                "convolution mass deficit " + std::to_string(deficit) + " exceeds " +
                    std::to_string(opt.max_deficit));
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < coarse.cdf.size(); ++i) {
    diff = std::max(diff, std::abs(coarse.cdf[i] - top.cdf[2 * i]));
  }

  EndToEndChannel ch;
  ch.cdf = [fine](double g) { return fine->cdf(g); };
  ch.pdf = [fine](double g) { return fine->pdf(g); };
  ch.sampler = [laws, draw](CounterRng& rng) { return draw(*laws, rng); };
  ch.support_hint = end;
  ch.numeric_error = diff + std::max(deficit, 0.0) + nb * 2 * max_hop_error(*laws);
  return ch;
}

}  // namespace

void validate(const Topology& t) {
  const std::size_t n = std::visit(
      overloaded{[](const Serial& s) { return s.hops.size(); },
                 [](const AllActive& a) { return a.branches.size(); },
                 [](const Selective& s) { return s.branches.size(); }},
      t);
  if (n == 0) throw Error(ErrorCode::InvalidParameter, "topology needs at least one hop or branch");
  for (const auto& m : hops(t)) fading::validate(m);
}

std::vector<Model> hops(const Topology& t) {
  if (const auto* s = std::get_if<Serial>(&t)) return s->hops;
  std::vector<Model> out;
  for (const auto& b : branches_of(t)) {
    out.push_back(b.first);
    out.push_back(b.second);
  }
  return out;
}

std::vector<HopLaw> hop_laws(const Topology& t) {
  const LawSet laws(hops(t));
  std::vector<HopLaw> out;
  for (std::size_t i = 0; i < laws.size(); ++i) out.push_back(laws[i]);
  return out;
}

Topology scaled(const Topology& t, double factor) {
  const auto rescale = [factor](const Model& m) { return fading::with_mean_snr(m, factor * fading::mean_snr(m)); };
  const auto rescale_branches = [&](std::vector<Branch> bs) {
    for (auto& b : bs) b = {rescale(b.first), rescale(b.second)};
    return bs;
  };
  return std::visit(overloaded{[&](Serial s) -> Topology {
                                 for (auto& h : s.hops) h = rescale(h);
                                 return s;
                               },
                               [&](AllActive a) -> Topology {
                                 a.branches = rescale_branches(a.branches);
                                 return a;
                               },
                               [&](Selective s) -> Topology {
                                 s.branches = rescale_branches(s.branches);
                                 return s;
                               }},
                    t);
}

double branch_cdf(const Model& first, const Model& second, double tau) {
  if (!(tau > 0.0)) return 0.0;
  return 1.0 - (1.0 - fading::cdf(first, tau)) * (1.0 - fading::cdf(second, tau));
}

double serial_cdf(const Serial& t, double tau) {
  if (!(tau > 0.0)) return 0.0;
  double survival = 1.0;
  for (const auto& h : t.hops) survival *= 1.0 - fading::cdf(h, tau);
  return 1.0 - survival;
}

double selective_cdf_exact(const Selective& t, double tau) {
  if (!(tau > 0.0)) return 0.0;
  double mass = 1.0;
  for (const auto& b : t.branches) mass *= branch_cdf(b.first, b.second, tau);
  return mass;
}

double selective_cdf_paper(const Selective& t, double tau) {
  if (!(tau > 0.0)) return 0.0;
  double s1 = 1.0, s2 = 1.0;
  for (const auto& b : t.branches) {
    s1 *= 1.0 - fading::cdf(b.first, tau);
    s2 *= 1.0 - fading::cdf(b.second, tau);
  }
  return (1.0 - s1) * (1.0 - s2);
}

double allactive_cdf(const AllActive& t, double tau) {
  if (t.branches.size() == 1) return branch_cdf(t.branches[0].first, t.branches[0].second, tau);
  return end_to_end(t).cdf(tau);
}

double cdf(const Topology& t, double tau) {
  return std::visit(overloaded{[&](const Serial& s) { return serial_cdf(s, tau); },
                               [&](const AllActive& a) { return allactive_cdf(a, tau); },
                               [&](const Selective& s) {
                                 return s.formula == SelectiveFormula::Exact ? selective_cdf_exact(s, tau)
                                                                             : selective_cdf_paper(s, tau);
                               }},
                    t);
}

EndToEndChannel EndToEndChannel::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::InvalidParameter, "scale factor must be positive");
  }
  EndToEndChannel ch = *this;
  auto F = cdf;
  auto f = pdf;
  auto draw = sampler;
  ch.cdf = [F, factor](double g) { return F(g / factor); };
  ch.pdf = [f, factor](double g) { return f(g / factor) / factor; };
  ch.sampler = [draw, factor](CounterRng& rng) { return factor * draw(rng); };
  ch.support_hint = support_hint * factor;
  if (point_mass) ch.point_mass = *point_mass * factor;
  return ch;
}

EndToEndChannel deterministic(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidParameter, "deterministic SNR must be positive");
  EndToEndChannel ch;
  ch.cdf = [c](double g) { return g >= c ? 1.0 : 0.0; };
  ch.pdf = [](double) { return 0.0; };
  ch.sampler = [c](CounterRng&) { return c; };
  ch.support_hint = c;
  ch.point_mass = c;
  return ch;
}

EndToEndChannel single_hop(const HopLaw& law) {
  EndToEndChannel ch;
  ch.cdf = [law](double g) { return law.cdf(g); };
  ch.pdf = [law](double g) { return law.pdf(g); };
  ch.sampler = [law](CounterRng& rng) { return law.sample(rng); };
  ch.support_hint = law.quantile(1.0 - 1e-6);
  ch.numeric_error = law.cdf_error();
  return ch;
}

EndToEndChannel end_to_end(const Topology& t, const ConvolutionOptions& opt) {
  validate(t);
  return std::visit(
      overloaded{
          [&](const Serial& s) {
            if (s.hops.size() == 1) return single_hop(HopLaw(s.hops[0]));
            auto laws = std::make_shared<const LawSet>(s.hops);
            auto rule = [](const LawSet& l, double g) {
              std::vector<Hop> h;
              for (std::size_t i = 0; i < l.size(); ++i) h.push_back(hop_at(l[i], g));
              return min_of(h);
            };
            auto draw = [](const LawSet& l, CounterRng& rng) {
              double m = l[0].sample(rng);
              for (std::size_t i = 1; i < l.size(); ++i) m = std::min(m, l[i].sample(rng));
              return m;
            };
            return from_rule(laws, rule, draw);
          },
          [&](const AllActive& a) { return all_active_channel(a, opt); },
          [&](const Selective& s) {
            auto laws = std::make_shared<const LawSet>(hops(s));
            std::function<Hop(const LawSet&, double)> rule;
            if (s.formula == SelectiveFormula::Exact) {
              rule = [](const LawSet& l, double g) {
                std::vector<Hop> b;
                for (std::size_t i = 0; 2 * i < l.size(); ++i)
                  b.push_back(min_of({hop_at(l[2 * i], g), hop_at(l[2 * i + 1], g)}));
                return max_of(b);
              };
            } else {
              rule = [](const LawSet& l, double g) {
                std::vector<Hop> first, second;
                for (std::size_t i = 0; 2 * i < l.size(); ++i) {
                  first.push_back(hop_at(l[2 * i], g));
                  second.push_back(hop_at(l[2 * i + 1], g));
                }
                return paper_selective(first, second);
              };
            }
            // Draws follow the selection rule itself; under PaperEq6 the
            // sampler and the cdf disagree, which is the documented point.
            auto draw = [](const LawSet& l, CounterRng& rng) {
              double best = 0.0;
              for (std::size_t i = 0; 2 * i < l.size(); ++i)
                best = std::max(best, std::min(l[2 * i].sample(rng), l[2 * i + 1].sample(rng)));
              return best;
            };
            return from_rule(laws, rule, draw);
          }},
      t);
}

}  // namespace relaycap::topology
