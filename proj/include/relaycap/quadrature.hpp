#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace relaycap::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  std::size_t max_intervals = 4000;
};

namespace detail {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// Gauss-Kronrod 7/15 on [a, b].
template <class F>
Segment gk15(const F& f, double a, double b) {
  static constexpr double xk[8] = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wk[8] = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = wk[7] * fc;
  double gauss = wg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * xk[i];
    const double s = f(c - dx) + f(c + dx);
    kron += wk[i] * s;
    if (i % 2 == 1) gauss += wg[i / 2] * s;
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature on a finite interval: the
/// segment with the largest error estimate is bisected until the summed
/// estimate meets max(rel_tol*|I|, abs_tol).
template <class F>
Result integrate(const F& f, double a, double b, const Options& opt = {}) {
  Result r;
  if (!(b > a)) {
    r.converged = true;
    return r;
  }
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gk15(f, a, b));
  r.evaluations = 15;
  double total = heap.top().value;
  double error = heap.top().error;
  std::size_t intervals = 1;
  while (error > std::max(opt.rel_tol * std::abs(total), opt.abs_tol)) {
    if (intervals >= opt.max_intervals) break;
    const detail::Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    heap.pop();
    const detail::Segment left = detail::gk15(f, worst.a, mid);
    const detail::Segment right = detail::gk15(f, mid, worst.b);
    r.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the accumulated rounding of the running totals.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  r.value = total;
  r.abs_error = error;
  r.converged = error <= std::max(opt.rel_tol * std::abs(total), opt.abs_tol);
  return r;
}

/// Integral over [a, inf) through the map x = a + L t / (1 - t), t in (0, 1).
template <class F>
Result integrate_to_infinity(const F& f, double a, double length_scale, const Options& opt = {}) {
  const auto g = [&](double t) {
    const double u = 1.0 - t;
    const double x = a + length_scale * t / u;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * length_scale / (u * u);
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace relaycap::quad
