#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "relaycap/capacity.hpp"

using namespace relaycap;
using namespace relaycap::capacity;
using topology::deterministic;
using topology::end_to_end;
using topology::single_hop;

namespace {

EndToEndChannel hop(const fading::Model& m) { return single_hop(fading::HopLaw(m)); }

double db(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace

TEST_CASE("exponential oracles") {
  const auto ch = hop(fading::Exponential{1.0});
  // Closed forms e E1(1) / (2 ln 2), the root of e^-g/g - E1(g) = 1,
  // E1(g0) / (2 ln 2) and ln(1 + 1/E1(1)) e^-1 / (2 ln 2).
  CHECK(std::abs(ora(ch).capacity - 0.430173691135442976) < 1e-9);
  CHECK(std::abs(ora_expectation(ch).capacity - 0.430173691135442976) < 1e-8);
  const auto root = opra_cutoff(ch);
  CHECK(std::abs(*root.cutoff - 0.393773845045118357) < 1e-9);
  CHECK(std::abs(opra_residual(ch, *root.cutoff)) < 1e-10);
  CHECK(std::abs(opra(ch).capacity - 0.514269462679738930) < 1e-8);
  CHECK(std::abs(tcifr(ch, 1.0).capacity - 0.455181400282634822) < 1e-9);
  const auto c = cifr(ch);
  CHECK(c.divergent);
  CHECK(c.capacity == 0.0);
}

TEST_CASE("gamma inverse moment") {
  const auto ch = hop(fading::Gamma{2.0, 1.0});
  const auto c = cifr(ch);
  CHECK_FALSE(c.divergent);
  CHECK(std::abs(c.capacity - 0.5 * std::log2(1.5)) < 1e-8);
  CHECK(std::abs(tcifr(ch, 1e-8).capacity - c.capacity) < 1e-6);
  const double q = fading::HopLaw(fading::Gamma{2.0, 1.0}).quantile(1.0 - 1e-9);
  CHECK(tcifr(ch, 1.01 * q).capacity < 1e-7);
}

TEST_CASE("deterministic channel") {
  const auto ch = deterministic(3.0);
  CHECK(ora(ch).capacity == 1.0);
  for (double d : {0.01, 1.0, 10.0}) CHECK(effective(ch, {d}).capacity == 1.0);
  CHECK(cifr(ch).capacity == 1.0);
  CHECK(tcifr(ch, 2.0).capacity == 1.0);
  CHECK(tcifr(ch, 4.0).capacity == 0.0);
  const auto o = opra(ch);
  CHECK(o.capacity == doctest::Approx(ora(ch).capacity));
  CHECK(*o.cutoff == doctest::Approx(0.75));
}

TEST_CASE("effective capacity") {
  for (const auto& fig : fixtures::figures()) {
    CAPTURE(fig.label);
    const auto ch = end_to_end(fig.topology).scaled(db(10.0));
    CHECK(std::abs(effective(ch, {1e-4}).capacity - ora(ch).capacity) < 1e-3);
  }
  const auto ch = end_to_end(fixtures::fig3_selective3());
  for (double s : {0.0, 15.0, 30.0}) {
    const auto c = ch.scaled(db(s));
    const double e01 = effective(c, {0.1}).capacity, e1 = effective(c, {1.0}).capacity,
                 e10 = effective(c, {10.0}).capacity;
    CHECK(e01 > e1);
    CHECK(e1 > e10);
    CHECK(ora(c).capacity >= e01);
  }
  CHECK(EffectiveCapacityParams::from_factors(0.5, 2.0, 3.0).qos_delta == 3.0);
  CHECK_THROWS_AS(effective(ch, {0.0}), Error);
}

TEST_CASE("cutoff solver") {
  const auto low = hop(fading::Exponential{1.0});
  const auto high = hop(fading::Exponential{1e3});
  CHECK(*opra_cutoff(high).cutoff > *opra_cutoff(low).cutoff);
  CHECK(*opra_cutoff(high).cutoff < 1.0);
  const auto all = end_to_end(fixtures::fig2_allactive4());
  for (double s = 0.0; s <= 30.0; s += 2.5) {
    const auto r = opra_cutoff(all.scaled(db(s)));
    CHECK(*r.cutoff > 0.0);
    CHECK(*r.cutoff <= 1.0);
    CHECK(r.quad_error < 1e-10);
  }
}

TEST_CASE("policy ordering over the matrix") {
  for (const auto& [label, topo] : fixtures::topology_matrix()) {
    CAPTURE(label);
    const auto unit = end_to_end(topo);
    double prev_ora = -1.0;
    for (double s : {0.0, 10.0, 20.0, 30.0}) {
      CAPTURE(s);
      const auto ch = unit.scaled(db(s));
      const auto o = ora(ch), oe = ora_expectation(ch), p = opra(ch), c = cifr(ch);
      const auto pe = opra_expectation(ch, *p.cutoff);
      const auto t = tcifr(ch, *p.cutoff);
      CHECK(*p.cutoff > 0.0);
      CHECK(*p.cutoff <= 1.0);
      CHECK(p.capacity + p.quad_error + o.quad_error >= o.capacity);
      CHECK(o.capacity + o.quad_error + c.quad_error >= c.capacity);
      if (!c.divergent) CHECK(t.capacity + t.quad_error + c.quad_error >= c.capacity);
      CHECK(std::abs(p.capacity - pe.capacity) <= p.quad_error + pe.quad_error);
      CHECK(std::abs(o.capacity - oe.capacity) <= 1e-4);
      CHECK(o.capacity > prev_ora);
      prev_ora = o.capacity;
    }
  }
}

TEST_CASE("ora against sample mean") {
  const auto ch = end_to_end(fixtures::fig1_selective3());
  const auto x = fixtures::draw(ch, 1000000, 31);
  double sum = 0.0, sq = 0.0;
  for (double g : x) {
    const double v = 0.5 * std::log2(1.0 + g);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / x.size();
  const double se = std::sqrt((sq / x.size() - mean * mean) / x.size());
  CHECK(std::abs(mean - ora(ch).capacity) < 3.0 * se);
}

TEST_CASE("sweep") {
  const auto unit = hop(fading::Exponential{1.0});
  const auto factory = [&](double s) { return unit.scaled(s); };
  const auto rows = sweep(factory, {Policy{PolicyKind::Ora}}, {0.0, 10.0, 20.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].cells[0].result->capacity < rows[1].cells[0].result->capacity);
  CHECK(rows[1].cells[0].result->capacity < rows[2].cells[0].result->capacity);
  CHECK_THROWS_AS(sweep(factory, {Policy{}}, {}), Error);

  const std::vector<Policy> five{{PolicyKind::Ora}, {PolicyKind::Effective, 1.0}, {PolicyKind::Cifr},
                                 {PolicyKind::Tcifr}, {PolicyKind::Opra}};
  const auto fig = end_to_end(fixtures::fig1_serial2());
  const auto fig_factory = [&](double s) { return fig.scaled(s); };
  std::vector<double> grid;
  for (double s = 0.0; s <= 30.0; s += 5.0) grid.push_back(s);
  const auto serial = sweep(fig_factory, five, grid, {}, 1);
  const auto threaded = sweep(fig_factory, five, grid, {}, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < five.size(); ++k) {
      REQUIRE(serial[i].cells[k].result);
      CHECK(serial[i].cells[k].result->capacity == threaded[i].cells[k].result->capacity);
      if (i > 0) CHECK(serial[i].cells[k].result->capacity > serial[i - 1].cells[k].result->capacity);
    }
  }
  CHECK(five[1].label() == "effective(qos_delta=1)");
  CHECK(five[3].label() == "tcifr(cutoff=opra)");

  // A failing cell is recorded, the rest of the row still evaluates.
  const auto bad = sweep(factory, {Policy{PolicyKind::Tcifr, 1.0, -1.0}, Policy{PolicyKind::Ora}}, {0.0});
  CHECK_FALSE(bad[0].cells[0].result);
  CHECK(bad[0].cells[0].error.find("InvalidParameter") != std::string::npos);
  CHECK(bad[0].cells[1].result);
}
