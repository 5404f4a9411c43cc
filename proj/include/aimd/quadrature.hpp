#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "aimd/errors.hpp"
#include "aimd/model.hpp"

namespace aimd {

struct QuadratureControl {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2048;
  double tail_cutoff_tol = 1e-10;

  void validate() const {
    detail::require(abs_tol > 0.0 && rel_tol > 0.0, "QuadratureControl tolerances must be > 0");
    detail::require(max_subdivisions >= 1, "QuadratureControl.max_subdivisions must be >= 1");
    detail::require(tail_cutoff_tol > 0.0 && tail_cutoff_tol < 1.0,
                    "QuadratureControl.tail_cutoff_tol must lie in (0,1)");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;

  QuadratureResult& operator+=(const QuadratureResult& o) {
    value += o.value;
    error += o.error;
    panels += o.panels;
    return *this;
  }
};

namespace detail {

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk21_panel(F& f, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f0 = f(mid);
  double kron = f0 * wk[0];
  double gauss = 0.0;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double fs = f(mid - half * xk[i]) + f(mid + half * xk[i]);
    kron += fs * wk[i];
    if (i % 2 == 1) gauss += fs * wg[i / 2];
  }
  return {lo, hi, kron * half, std::abs(kron - gauss) * half};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (10/21) on [lo, hi], split at every interior breakpoint.
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, std::vector<double> breaks,
                           const QuadratureControl& ctrl) {
  QuadratureResult total;
  if (!(hi > lo)) return total;
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double v) { return !(v > lo && v < hi); }),
               breaks.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.insert(breaks.begin(), lo);
  breaks.push_back(hi);

  std::priority_queue<detail::Panel> queue;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    detail::Panel pn = detail::gk21_panel(f, breaks[i], breaks[i + 1]);
    value += pn.value;
    error += pn.error;
    queue.push(pn);
  }
  auto target = [&] { return std::max(ctrl.abs_tol, ctrl.rel_tol * std::abs(value)); };
  while (error > target() && static_cast<int>(queue.size()) < ctrl.max_subdivisions) {
    const detail::Panel worst = queue.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;
    queue.pop();
    const detail::Panel left = detail::gk21_panel(f, worst.lo, mid);
    const detail::Panel right = detail::gk21_panel(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  // re-sum to shed the running-update rounding
  value = 0.0;
  error = 0.0;
  total.panels = static_cast<int>(queue.size());
  while (!queue.empty()) {
    value += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  total.value = value;
  total.error = error;
  if (!(total.error <= target())) {
    throw QuadratureError("integrate: requested accuracy not reached on [" + detail::fmt(lo) +
                              ", " + detail::fmt(hi) + "], estimate " + detail::fmt(total.error),
                          total.value, total.error);
  }
  return total;
}

}  // namespace aimd
