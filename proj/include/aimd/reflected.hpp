#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "aimd/errors.hpp"
#include "aimd/model.hpp"
#include "aimd/quadrature.hpp"
#include "aimd/scalefn.hpp"

namespace aimd {

struct DerivativeControl {
  double rel_step = 1e-6;
  bool use_extrapolation = true;

  void validate() const {
    detail::require(rel_step > 0.0 && rel_step < 1e-2,
                    "DerivativeControl.rel_step must lie in (0, 1e-2)");
  }
};

// ---- fixed-barrier reflection -----------------------------------------------

inline double lst_reflected_upper(const ModelParams& m, double w, double x, double a, double c,
                                  const SeriesControl& ctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  if (!(c > 0.0 && c <= x && x <= a && c < a)) {
    throw DomainError("lst_reflected_upper: need 0 < c <= x <= a, c < a");
  }
  if (w == 0.0) return 1.0;
  const double q = m.lambda / (w + m.lambda);
  const double lu_x = l_up(m, w, x, a, c, ctrl);
  const double ld_x = l_down(m, w, x, a, c, ctrl);
  double e_pa = 1.0;
  if (m.p * a > c) {
    const double pa = m.p * a;
    e_pa = l_down(m, w, pa, a, c, ctrl) / (1.0 - q * l_up(m, w, pa, a, c, ctrl));
  }
  return std::clamp(ld_x + lu_x * q * e_pa, 0.0, 1.0);
}

inline double lst_reflected_lower(const ModelParams& m, double w, double x, double c, double b,
                                  const SeriesControl& ctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  if (!(b > 0.0 && b <= x && x < c)) {
    throw DomainError("lst_reflected_lower: need 0 < b <= x < c");
  }
  if (w == 0.0) return 1.0;
  const double denom = 1.0 - l_down(m, w, b, c, b, ctrl);
  if (denom < 1e-14) throw DomainError("lst_reflected_lower: 1 - L_down(b) vanishes");
  const double v = l_up(m, w, x, c, b, ctrl) +
                   l_down(m, w, x, c, b, ctrl) * l_up(m, w, b, c, b, ctrl) / denom;
  return std::clamp(v, 0.0, 1.0);
}

// ---- drawdown -----------------------------------------------------------

namespace detail {

inline int z_down_active_right(double x, double b, double p) {
  const mpfr_prec_t prec = 256;
  const MpFloat xv(x, prec);
  const MpFloat pinv = 1.0 / mp(p, prec);
  MpFloat lvl(b, prec);
  int n = 0;
  while (!(xv < lvl)) {
    ++n;
    lvl *= pinv;
  }
  return n;
}

template <class G>
double right_difference(G&& g, double h, bool extrapolate) {
  const double d1 = (g(h) - g(0.0)) / h;
  if (!extrapolate) return d1;
  const double d2 = (g(0.5 * h) - g(0.0)) / (0.5 * h);
  return 2.0 * d2 - d1;
}

// Points y > c where the drawdown integrands change analytic piece.
inline std::vector<double> drawdown_kinks(double c, double p, double lo, double hi) {
  std::vector<double> out;
  double pk = p;
  for (int k = 1; k < 4000; ++k) {
    const double y = c / (1.0 - pk);
    if (y <= lo) break;
    if (y < hi) out.push_back(y);
    pk *= p;
  }
  return out;
}

}  // namespace detail

// h_w(z) = -d+/da log L(w; z, a, z - c) at a = z.
inline double hazard(const ModelParams& m, double w, double z, double c,
                     const DerivativeControl& dctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  dctrl.validate();
  const double b = z - c;
  if (!(c > 0.0 && b > 0.0)) throw DomainError("hazard: need z > c > 0");
  detail::KLadder ladder(m, w, b);
  const KCoefficients& piece = ladder.at(detail::right_interval_index(b, m.p, z));
  const double f0 = piece.log_evaluate(z);
  auto g = [&](double t) { return t == 0.0 ? f0 : piece.log_evaluate(z + t); };
  const double h = dctrl.rel_step * z;
  const double v = detail::right_difference(g, h, dctrl.use_extrapolation);
  const double noise =
      64.0 * std::numeric_limits<double>::epsilon() * (piece.condition(z) + std::abs(f0)) / h;
  if (!(v >= -noise)) throw ConvergenceError("hazard: difference quotient has the wrong sign", v);
  return std::max(v, 0.0);
}

// d+/da L_down(w; y, a, y - c) at a = y.
inline double d_plus_l_down(const ModelParams& m, double w, double y, double c,
                            const DerivativeControl& dctrl = {}, const SeriesControl& sctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  dctrl.validate();
  const double b = y - c;
  if (!(c > 0.0 && b > 0.0)) throw DomainError("d_plus_l_down: need y > c > 0");
  if (m.lambda == 0.0) return 0.0;
  detail::KLadder ladder(m, w, b);
  const KCoefficients& piece = ladder.at(detail::right_interval_index(b, m.p, y));
  const double lk0 = piece.log_evaluate(y);
  const double h = dctrl.rel_step * y;
  if (w == 0.0) {
    auto g = [&](double t) { return t == 0.0 ? 0.0 : -std::expm1(lk0 - piece.log_evaluate(y + t)); };
    return detail::right_difference(g, h, dctrl.use_extrapolation);
  }
  const int active = detail::z_down_active_right(y, b, m.p);
  const double zy = detail::z_down_piece(m, w, y, b, active, sctrl).value;
  auto g = [&](double t) {
    if (t == 0.0) return 0.0;
    const double za = detail::z_down_piece(m, w, y + t, b, active, sctrl).value;
    return zy - std::exp(lk0 - piece.log_evaluate(y + t)) * za;
  };
  return detail::right_difference(g, h, dctrl.use_extrapolation);
}

inline double drawdown_supremum_survival(const ModelParams& m, double x, double y, double c,
                                         const QuadratureControl& qctrl = {},
                                         const DerivativeControl& dctrl = {}) {
  require_normalized(m);
  qctrl.validate();
  if (!(c > 0.0 && x > c && y >= x)) throw DomainError("drawdown_supremum_survival: need y >= x > c > 0");
  if (y == x) return 1.0;
  auto h0 = [&](double z) { return hazard(m, 0.0, z, c, dctrl); };
  const QuadratureResult r = integrate(h0, x, y, detail::drawdown_kinks(c, m.p, x, y), qctrl);
  return std::clamp(std::exp(-r.value), 0.0, 1.0);
}

struct DrawdownResult {
  double value = 0.0;
  double quadrature_error = 0.0;
  double truncation_point = 0.0;
  int panels = 0;
};

inline DrawdownResult lst_drawdown_detailed(const ModelParams& m, double w, double x, double c,
                                            const QuadratureControl& qctrl = {},
                                            const DerivativeControl& dctrl = {},
                                            const SeriesControl& sctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  qctrl.validate();
  if (!(c > 0.0 && x > c)) throw DomainError("lst_drawdown: need x > c > 0");
  DrawdownResult out;
  if (w == 0.0) {
    out.value = 1.0;
    return out;
  }
  if (m.lambda == 0.0) return out;

  auto hw = [&](double z) { return hazard(m, w, z, c, dctrl); };
  // density of the supremum times the conditional transform:
  // h_0 S_0 * exp(-int (h_w - h_0)) * R = exp(-int h_w) * h_0 * R,
  // and h_0 = d+L_down(0) since L_up(0) + L_down(0) = 1, so h_0 * R = d+L_down(w)
  auto weight = [&](double y) { return d_plus_l_down(m, w, y, c, dctrl, sctrl); };

  std::vector<double> edges{x};
  const double y1 = c / (1.0 - m.p);
  for (double k : detail::drawdown_kinks(c, m.p, x, y1)) edges.push_back(k);
  std::sort(edges.begin(), edges.end());
  if (y1 > x) edges.push_back(y1);

  double H = 0.0;
  double lo = edges.front();
  std::size_t next_edge = 1;
  const double log_cut = -std::log(qctrl.tail_cutoff_tol);
  QuadratureControl inner = qctrl;
  for (int panel = 0; panel < 10000; ++panel) {
    double hi;
    if (next_edge < edges.size()) {
      hi = edges[next_edge++];
    } else {
      if (H > log_cut) break;
      hi = lo + 4.0 / std::max(hw(lo), 1e-300);
    }
    const double H_lo = H;
    auto f = [&](double y) {
      const double Hy = H_lo + (y > lo ? integrate(hw, lo, y, {}, inner).value : 0.0);
      return std::exp(-Hy) * weight(y);
    };
    const QuadratureResult part = integrate(f, lo, hi, {}, qctrl);
    out.value += part.value;
    out.quadrature_error += part.error;
    H = H_lo + integrate(hw, lo, hi, {}, inner).value;
    out.panels++;
    lo = hi;
  }
  out.truncation_point = lo;
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

inline double lst_drawdown(const ModelParams& m, double w, double x, double c,
                           const QuadratureControl& qctrl = {},
                           const DerivativeControl& dctrl = {}) {
  return lst_drawdown_detailed(m, w, x, c, qctrl, dctrl).value;
}

inline double lst_drawdown_general_start(const ModelParams& m, double w, double x, double xbar0,
                                         double c, const QuadratureControl& qctrl = {},
                                         const DerivativeControl& dctrl = {},
                                         const SeriesControl& sctrl = {}) {
  require_normalized(m);
  if (!(c > 0.0 && x > 0.0 && xbar0 >= x)) {
    throw DomainError("lst_drawdown_general_start: need xbar0 >= x > 0, c > 0");
  }
  if (xbar0 - c >= x) return 1.0;
  if (xbar0 <= c) throw DomainError("lst_drawdown_general_start: need xbar0 > c");
  if (xbar0 == x) return lst_drawdown(m, w, x, c, qctrl, dctrl);
  if (w == 0.0) return 1.0;
  const double b = xbar0 - c;
  return std::clamp(l_down(m, w, x, xbar0, b, sctrl) +
                        l_up(m, w, x, xbar0, b, sctrl) * lst_drawdown(m, w, xbar0, c, qctrl, dctrl),
                    0.0, 1.0);
}

// ---- drawup -------------------------------------------------------------

struct SolveAResult {
  double a = 0.0;
  double residual = 0.0;
  double c_used = 0.0;
  int iterations = 0;
};

namespace detail {

inline SolveAResult solve_a_once(const ModelParams& m, double w, double c, double u, double tol,
                                 const SeriesControl& sctrl) {
  const double top = u + c;
  const double zd = z_down(m, w, top, u, sctrl);
  auto f = [&](double a) { return zd + l_up(m, w, top, a, u, sctrl) - 1.0; };
  double lo = top;
  double hi = 2.0 * top;
  int expansions = 0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) throw RootNotFoundError("solve_a: bracket expansion cap exceeded");
  }
  std::uintmax_t iters = 200;
  const auto br = boost::math::tools::bisect(f, lo, hi,
                                             boost::math::tools::eps_tolerance<double>(52), iters);
  SolveAResult r;
  r.a = 0.5 * (br.first + br.second);
  r.residual = std::abs(f(r.a));
  r.c_used = c;
  r.iterations = static_cast<int>(iters) + expansions;
  if (!(r.a > top)) throw RootNotFoundError("solve_a: root not above u + c");
  if (r.residual > tol) throw RootNotFoundError("solve_a: residual " + fmt(r.residual) + " above tol");
  return r;
}

}  // namespace detail

// Level a(w,c,u) defined by Z_down(w;u+c,u) + L_up(w;u+c,a,u) = 1.
inline SolveAResult solve_a(const ModelParams& m, double w, double c, double u, double tol = 1e-10,
                            const SeriesControl& sctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  if (!(w > 0.0)) throw DomainError("solve_a: need w > 0");
  if (!(c > 0.0 && u > 0.0)) throw DomainError("solve_a: need c > 0, u > 0");
  if (m.lambda == 0.0) throw DomainError("solve_a: need lambda > 0");
  SolveAResult r = detail::solve_a_once(m, w, c, u, tol, sctrl);
  double pk = m.p;
  for (int k = 1; k < 4000 && pk * r.a >= u * (1.0 - 1e-9); ++k, pk *= m.p) {
    if (std::abs(pk * r.a - u) <= 1e-9 * u) {
      return detail::solve_a_once(m, w, c * (1.0 + 1e-9), u, tol, sctrl);
    }
  }
  return r;
}

// The closed form built on a(w,c,u): Z_down(w;x,u) + L_up(w;x,a,u).
// It equals L_up(x,u+c,u) + L_down(x,u+c,u), i.e. it stops at a new infimum.
inline double lst_drawup_level_formula(const ModelParams& m, double w, double x, double u,
                                       double c, double tol = 1e-10,
                                       const SeriesControl& sctrl = {}) {
  if (!(u > 0.0 && u <= x && x <= u + c)) throw DomainError("need 0 < u <= x <= u + c");
  if (w == 0.0) return 1.0;
  const SolveAResult a = solve_a(m, w, c, u, tol, sctrl);
  const double zd = x > u ? z_down(m, w, x, u, sctrl) : z_down(m, w, u * (1.0 + 1e-12), u, sctrl);
  return zd + l_up(m, w, x, a.a, u, sctrl);
}

struct RenewalControl {
  double points_per_efold = 35.0;
  double floor_ratio = 1e-6;

  void validate() const {
    detail::require(points_per_efold >= 4.0, "RenewalControl.points_per_efold must be >= 4");
    detail::require(floor_ratio > 0.0 && floor_ratio < 0.1,
                    "RenewalControl.floor_ratio must lie in (0, 0.1)");
  }
};

struct DrawupResult {
  double value = 0.0;
  double g_at_u = 0.0;
  double boundary_residual = 0.0;
  int grid_points = 0;
};

namespace detail {

// G(m) is the transform started at X = inf X = m. It solves
//   G(m) = L(m, m+c, m) [1 + lambda int_m^{min(m+c, m/p)} G(pz) K_z(m+c) dz],
// with K_z(y) = 1/L(w; z, y, z) and G(0+) = Z_up(w; 0, c).
class DrawupRenewal {
 public:
  DrawupRenewal(const ModelParams& m, double w, double u, double c, const RenewalControl& ctrl,
                const SeriesControl& sctrl)
      : m_(m), w_(w), u_(u), c_(c) {
    ctrl.validate();
    const double lip = std::log(1.0 / m.p);
    per_factor_ = std::max(4, static_cast<int>(std::lround(ctrl.points_per_efold * lip)));
    const double floor = ctrl.floor_ratio * std::min(u, c);
    n_ = std::max(4, static_cast<int>(std::ceil(per_factor_ * std::log(u / floor) / lip)));
    step_ = lip / per_factor_;
    g0_ = z_up_zero(m, w, c, sctrl);
    grid_.resize(static_cast<std::size_t>(n_ + 1));
    g_.assign(static_cast<std::size_t>(n_ + 1), 0.0);
    for (int i = 0; i <= n_; ++i) grid_[static_cast<std::size_t>(i)] = level(i);
    for (int j = 0; j <= n_; ++j) solve_node(j);
  }

  double g_at_u() const { return g_.back(); }
  int grid_points() const { return n_ + 1; }

  // E(x) = G(u) K_u(x) - lambda int_u^{min(x, u/p)} G(pz) K_z(x) dz
  double evaluate(double x) const {
    const double lku = log_k(u_, x);
    const Lin in = integrate_green(u_, std::min(x, u_ / m_.p), x, n_);
    return g_.back() * std::exp(lku) - m_.lambda * (in.a + in.b * g_.back());
  }

 private:
  struct Lin {
    double a = 0.0;  // part independent of the unknown node
    double b = 0.0;  // coefficient of the unknown node
  };

  double level(int i) const { return u_ * std::exp(-step_ * (n_ - i)); }

  double log_k(double z, double y) const {
    if (y <= z) return 0.0;
    KLadder ladder(m_, w_, z);
    return ladder.log_k(y);
  }

  // Cubic Lagrange interpolation of G at t in log-level, split into the
  // known part and the weight of node `unknown` (nodes >= unknown are not used).
  Lin interp(double t, int unknown) const {
    if (t <= grid_.front()) return {g0_, 0.0};
    const double theta = n_ - std::log(u_ / t) / step_;
    int cell = std::min(static_cast<int>(std::floor(theta)), unknown - 1);
    cell = std::max(cell, 0);
    const int start = std::min(cell - 1, unknown - 3);
    Lin out;
    for (int i = start; i < start + 4; ++i) {
      double wgt = 1.0;
      for (int j = start; j < start + 4; ++j) {
        if (j != i) wgt *= (theta - j) / static_cast<double>(i - j);
      }
      if (i == unknown) {
        out.b += wgt;
      } else {
        out.a += wgt * (i < 0 ? g0_ : g_[static_cast<std::size_t>(i)]);
      }
    }
    return out;
  }

  // int_lo^hi G(pz) K_z(y) exp(-shift) dz, panels aligned with the grid in pz and
  // with the kinks of z -> K_z(y).
  Lin integrate_green(double lo, double hi, double y, int unknown, double shift = 0.0) const {
    Lin total;
    if (!(hi > lo)) return total;
    std::vector<double> cuts{lo, hi};
    for (const double gpt : grid_) {
      const double z = gpt / m_.p;
      if (z > lo && z < hi) cuts.push_back(z);
    }
    for (double z = y * m_.p; z > lo; z *= m_.p) {
      if (z < hi) cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    using GL = boost::math::quadrature::gauss<double, 5>;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = cuts[i + 1];
      if (!(b > a)) continue;
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      const auto& abscissa = GL::abscissa();
      const auto& weights = GL::weights();
      for (std::size_t k = 0; k < abscissa.size(); ++k) {
        const double xs = abscissa[k];
        const double wk = weights[k] * half;
        auto add = [&](double z) {
          const double kz = std::exp(log_k(z, y) - shift);
          const Lin g = interp(m_.p * z, unknown);
          total.a += wk * kz * g.a;
          total.b += wk * kz * g.b;
        };
        if (xs == 0.0) {
          add(mid);
        } else {
          add(mid - half * xs);
          add(mid + half * xs);
        }
      }
    }
    return total;
  }

  void solve_node(int j) {
    const double mj = grid_[static_cast<std::size_t>(j)];
    const double y = mj + c_;
    const double lk = log_k(mj, y);
    const double zmax = std::min(y, mj / m_.p);
    const Lin in = integrate_green(mj, zmax, y, j, lk);
    const double rhs = std::exp(-lk) + m_.lambda * in.a;
    const double den = 1.0 - m_.lambda * in.b;
    g_[static_cast<std::size_t>(j)] = std::clamp(rhs / den, 0.0, 1.0);
  }

  ModelParams m_;
  double w_;
  double u_;
  double c_;
  int per_factor_ = 0;
  int n_ = 0;
  double step_ = 0.0;
  double g0_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> g_;
};

}  // namespace detail

inline DrawupResult lst_drawup_detailed(const ModelParams& m, double w, double x, double u,
                                        double c, const RenewalControl& rctrl = {},
                                        const SeriesControl& sctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  if (!(c > 0.0 && u >= 0.0 && u <= x)) throw DomainError("lst_drawup: need 0 <= u <= x, c > 0");
  DrawupResult out;
  out.value = 1.0;
  if (w == 0.0 || x - u >= c) return out;
  if (u == 0.0) {
    out.value = z_up(m, w, x, c, sctrl);
    return out;
  }
  if (m.lambda == 0.0) {
    out.value = std::exp(-w * (u + c - x));
    return out;
  }
  detail::DrawupRenewal solver(m, w, u, c, rctrl, sctrl);
  out.value = std::clamp(solver.evaluate(x), 0.0, 1.0);
  out.g_at_u = solver.g_at_u();
  out.boundary_residual = std::abs(solver.evaluate(u + c) - 1.0);
  out.grid_points = solver.grid_points();
  return out;
}

inline double lst_drawup(const ModelParams& m, double w, double x, double u, double c,
                         const RenewalControl& rctrl = {}, const SeriesControl& sctrl = {}) {
  return lst_drawup_detailed(m, w, x, u, c, rctrl, sctrl).value;
}

}  // namespace aimd
