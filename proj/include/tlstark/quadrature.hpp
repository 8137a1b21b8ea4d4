#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature.
//
// Works for any integrand value type with +, scalar *, and std::abs (double,
// std::complex<double>). The interval with the largest error estimate is
// bisected until the summed estimate meets max(abs_tol, rel_tol * int |f|).
// Scaling by the mass of |f| keeps strongly cancelling integrands (dephased
// phasors) from demanding accuracy below the rounding level of their parts.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <sstream>
#include <vector>

#include "tlstark/errors.hpp"

namespace tlstark {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int initial_intervals = 8;   ///< uniform partition before adaptivity
  int max_intervals = 4000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0))
      throw ConfigError("quadrature tolerances must be positive");
    if (initial_intervals < 1 || max_intervals < initial_intervals)
      throw ConfigError("quadrature interval counts inconsistent");
  }
};

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  int intervals = 0;
  int evaluations = 0;
};

namespace detail {

// Kronrod nodes on [0,1] (symmetric), 15-point rule; odd indices are the
// embedded 7-point Gauss nodes.
inline constexpr std::array<double, 8> gk_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  double mass;  ///< Kronrod estimate of int |f|
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
auto gauss_kronrod_15(F& f, double a, double b) {
  using T = decltype(f(a));
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const T fc = f(c);
  T kronrod = fc * gk_weights[7];
  T gauss = fc * gauss_weights[3];
  double mass = std::abs(fc) * gk_weights[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * gk_nodes[i];
    const T fl = f(c - dx), fr = f(c + dx);
    const T sum = fl + fr;
    kronrod += sum * gk_weights[i];
    mass += (std::abs(fl) + std::abs(fr)) * gk_weights[i];
    if (i % 2 == 1) gauss += sum * gauss_weights[i / 2];
  }
  Segment<T> s{a, b, kronrod * h, 0.0, mass * h};
  s.error = std::abs((kronrod - gauss) * h);
  return s;
}

}  // namespace detail

/// Integrates f over consecutive breakpoints with one globally adaptive
/// partition, so the tolerance applies to the whole integral. Throws
/// NumericError if it is not met within opts.max_intervals subintervals.
template <class F>
auto integrate_pieces(F&& f, const std::vector<double>& breaks, const QuadratureOptions& opts = {}) {
  using T = decltype(f(breaks.front()));
  QuadratureResult<T> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (!(breaks[i + 1] >= breaks[i])) throw DomainError("integration bounds reversed");

  std::priority_queue<detail::Segment<T>> heap;
  const int n0 = opts.initial_intervals;
  double err = 0.0, mass = 0.0;
  int count = 0, evaluated = 0;
  auto push = [&](const detail::Segment<T>& s) {
    err += s.error;
    mass += s.mass;
    heap.push(s);
    ++evaluated;
  };
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    if (!(b > a)) continue;
    for (int i = 0; i < n0; ++i) {
      const double lo = a + (b - a) * i / n0;
      const double hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
      push(detail::gauss_kronrod_15(f, lo, hi));
      ++count;
    }
  }
  if (heap.empty()) return out;
  const int limit = std::max(opts.max_intervals, count);

  while (err > std::max(opts.abs_tol, opts.rel_tol * mass)) {
    if (count >= limit) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << breaks.front() << ", " << breaks.back() << "]: error estimate "
          << err << " against tolerance " << std::max(opts.abs_tol, opts.rel_tol * mass) << " after " << count
          << " intervals";
      throw NumericError(msg.str());
    }
    auto worst = heap.top();
    heap.pop();
    err -= worst.error;
    mass -= worst.mass;
    const double mid = 0.5 * (worst.a + worst.b);
    push(detail::gauss_kronrod_15(f, worst.a, mid));
    push(detail::gauss_kronrod_15(f, mid, worst.b));
    ++count;
  }
  // Re-sum to remove drift from the incremental updates.
  while (!heap.empty()) {
    out.value += heap.top().value;
    out.error += heap.top().error;
    heap.pop();
  }
  out.intervals = count;
  out.evaluations = 15 * evaluated;
  return out;
}

/// Integrates f over [a, b]; see integrate_pieces.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  if (!(b >= a)) throw DomainError("integration bounds reversed");
  return integrate_pieces(std::forward<F>(f), std::vector<double>{a, b}, opts);
}

}  // namespace tlstark
