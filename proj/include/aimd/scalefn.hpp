#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "aimd/detail/mpfloat.hpp"
#include "aimd/detail/signed_log.hpp"
#include "aimd/errors.hpp"
#include "aimd/model.hpp"

namespace aimd {

struct SeriesControl {
  double rel_tol = 1e-14;
  int max_terms = 10000;

  void validate() const {
    detail::require(rel_tol > 0.0 && rel_tol <= 1e-6,
                    "SeriesControl.rel_tol must lie in (0, 1e-6], got " + detail::fmt(rel_tol));
    detail::require(max_terms >= 16, "SeriesControl.max_terms must be >= 16");
  }
};

// K(w;b,x,b) = sum_n a_{n,k} exp((w+lambda) p^n x) on (b/p^k, b/p^{k+1}].
// Stored as K(x) = exp(log_scale) * sum_n weights[n] * exp(rate p^n (x - left)).
struct KCoefficients {
  int interval_index = 0;
  double left = 0.0;
  double rate = 0.0;
  double p = 0.5;
  double log_scale = 0.0;
  std::vector<double> weights;

  double log_evaluate(double x) const {
    SignedLogSum acc;
    double pn = 1.0;
    for (double d : weights) {
      if (d != 0.0) acc.add(d < 0 ? -1 : 1, std::log(std::abs(d)) + rate * pn * (x - left));
      pn *= p;
    }
    SignedLog<double> r = acc.result();
    if (r.sign < 0) return std::numeric_limits<double>::quiet_NaN();
    return log_scale + r.log_magnitude;
  }

  double evaluate(double x) const { return std::exp(log_evaluate(x)); }

  // sum |terms| / |sum terms| at x
  double condition(double x) const {
    SignedLogSum acc;
    SignedLogSum mag;
    double pn = 1.0;
    for (double d : weights) {
      if (d != 0.0) {
        const double lt = std::log(std::abs(d)) + rate * pn * (x - left);
        acc.add(d < 0 ? -1 : 1, lt);
        mag.add(1, lt);
      }
      pn *= p;
    }
    return std::exp(mag.result().log_magnitude - acc.result().log_magnitude);
  }

  // log|a_{n,k}| and its sign; a_{n,k} itself may overflow.
  SignedLog<double> log_coeff(int n) const {
    const double d = weights.at(static_cast<std::size_t>(n));
    SignedLog<double> r;
    r.sign = d < 0 ? -1 : 1;
    r.log_magnitude = log_scale + std::log(std::abs(d)) - rate * std::pow(p, n) * left;
    return r;
  }

  std::vector<double> coeffs() const {
    std::vector<double> out;
    out.reserve(weights.size());
    for (int n = 0; n < static_cast<int>(weights.size()); ++n) out.push_back(log_coeff(n).value());
    return out;
  }
};

namespace detail {

inline double level_breakpoint(double b, double p, int k) { return b / std::pow(p, k); }

// Interval (b/p^k, b/p^{k+1}] containing x > b; ties go to the lower interval.
inline int interval_index(double b, double p, double x) {
  int k = 0;
  while (x > level_breakpoint(b, p, k + 1)) ++k;
  return k;
}

// Interval [b/p^k, b/p^{k+1}) containing x >= b; used for right derivatives.
inline int right_interval_index(double b, double p, double x) {
  int k = 0;
  while (x >= level_breakpoint(b, p, k + 1)) ++k;
  return k;
}

inline void check_level(double v, const char* name) {
  require(std::isfinite(v), std::string(name) + " must be finite");
}

// Coefficient sets for intervals 0..k, built by the closed-form step of the recursion.
class KLadder {
 public:
  KLadder(const ModelParams& m, double w, double b) : m_(m), w_(w), b_(b) {
    KCoefficients base;
    base.interval_index = 0;
    base.left = b;
    base.rate = w + m.lambda;
    base.p = m.p;
    base.log_scale = 0.0;
    base.weights = {1.0};
    sets_.push_back(std::move(base));
  }

  const KCoefficients& at(int k) {
    while (static_cast<int>(sets_.size()) <= k) extend();
    return sets_[static_cast<std::size_t>(k)];
  }

  double log_k(double x) {
    if (x <= b_) return 0.0;
    return at(interval_index(b_, m_.p, x)).log_evaluate(x);
  }

 private:
  void extend() {
    const KCoefficients& prev = sets_.back();
    const int k = prev.interval_index + 1;
    KCoefficients next;
    next.interval_index = k;
    next.left = level_breakpoint(b_, m_.p, k);
    next.rate = prev.rate;
    next.p = m_.p;
    next.log_scale = prev.log_evaluate(next.left);
    const double ratio = std::exp(prev.log_scale - next.log_scale);
    const double s = prev.rate;
    next.weights.assign(prev.weights.size() + 1, 0.0);
    double carried = 0.0;
    double pn1 = m_.p;
    for (std::size_t n = 0; n < prev.weights.size(); ++n) {
      const double g = m_.lambda / (s * (1.0 - pn1));
      const double t = ratio * g * prev.weights[n];
      next.weights[n + 1] = t;
      carried += t;
      pn1 *= m_.p;
    }
    next.weights[0] = 1.0 - carried;
    sets_.push_back(std::move(next));
  }

  ModelParams m_;
  double w_;
  double b_;
  std::vector<KCoefficients> sets_;
};

inline long bits_for(double nats) { return static_cast<long>(std::ceil(nats * 1.4426950408889634)); }

}  // namespace detail

// ---- Z-up --------------------------------------------------------------

struct SeriesResult {
  double value = 0.0;
  double log_value = 0.0;
  int terms = 0;
  long precision_bits = 53;
};

inline SeriesResult z_up_zero_detailed(const ModelParams& m, double w, double x,
                                       const SeriesControl& ctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  ctrl.validate();
  detail::check_level(x, "x");
  if (x < 0.0) throw DomainError("z_up_zero: need x >= 0");
  SeriesResult r;
  r.value = 1.0;
  if (w == 0.0 || x == 0.0) return r;

  // log S, S = sum_{n>=1} x^n/n! prod_{i=1}^{n-1}(w + lambda - lambda p^i)
  const double s = w + m.lambda;
  const double lx = std::log(x);
  double log_t = lx;
  double log_sum = log_t;
  double pn = m.p;
  int n = 1;
  bool converged = false;
  for (; n < ctrl.max_terms; ++n) {
    const double next = log_t + lx - std::log(n + 1.0) + std::log(s - m.lambda * pn);
    pn *= m.p;
    const bool decreasing = next < log_t;
    log_t = next;
    const double hi = std::max(log_sum, log_t);
    log_sum = hi + std::log1p(std::exp(std::min(log_sum, log_t) - hi));
    if (decreasing && log_t - log_sum < std::log(ctrl.rel_tol) - 2.3) {
      converged = true;
      break;
    }
  }
  r.terms = n;
  const double log_ws = std::log(w) + log_sum;
  const double log_denom =
      log_ws > 0 ? log_ws + std::log1p(std::exp(-log_ws)) : std::log1p(std::exp(log_ws));
  r.log_value = -log_denom;
  r.value = std::exp(r.log_value);
  if (!converged) {
    throw ConvergenceError("z_up_zero: series did not converge within max_terms", r.value);
  }
  return r;
}

inline double z_up_zero(const ModelParams& m, double w, double x, const SeriesControl& ctrl = {}) {
  return z_up_zero_detailed(m, w, x, ctrl).value;
}

inline double z_up(const ModelParams& m, double w, double x, double a,
                   const SeriesControl& ctrl = {}) {
  detail::check_level(a, "a");
  if (x < 0.0 || x > a) throw DomainError("z_up: need 0 <= x <= a");
  if (x == a || w == 0.0) return 1.0;
  const double la = z_up_zero_detailed(m, w, a, ctrl).log_value;
  const double lx = z_up_zero_detailed(m, w, x, ctrl).log_value;
  return std::min(1.0, std::exp(la - lx));
}

// ---- C-tilde and Z-down -----------------------------------------------------

namespace detail {

struct MpSeries {
  MpFloat value;
  int terms = 0;
};

// (N - D)/D with the l = 0 terms cancelled analytically.
inline MpSeries c_tilde_mp(const ModelParams& m, double w, double b, mpfr_prec_t prec,
                           double rel_tol, int max_terms) {
  MpSeries out{MpFloat(prec), 0};
  if (m.lambda == 0.0) return out;
  const MpFloat s = mp(w, prec) + m.lambda;
  const MpFloat sb = s * b;
  const MpFloat log_q = log(mp(m.lambda, prec) / s);
  const MpFloat log_p = log(mp(m.p, prec));
  const MpFloat pinv = 1.0 / mp(m.p, prec);
  const MpFloat log_tol(
      std::min(std::log(rel_tol), -static_cast<double>(prec - 8) * 0.6931471805599453), prec);

  // D = sum_l e^{-sb p^{-l}} (q/p)^l / P_l, N - D = sum_{l>=1} e^{-sb p^{-l}} q^l / P_{l-1}
  MpFloat num(prec);
  MpFloat den = exp(-sb);
  MpFloat log_abs_p_prev(prec);  // log|P_{l-1}|
  MpFloat pinv_l(1.0, prec);
  int l = 1;
  int small_run = 0;
  for (; l < max_terms; ++l) {
    pinv_l *= pinv;
    const MpFloat ex = -(sb * pinv_l);
    const int sign_prev = ((l - 1) % 2 == 0) ? 1 : -1;
    MpFloat log_num_term = ex + log_q * static_cast<double>(l) - log_abs_p_prev;
    MpFloat log_abs_p = log_abs_p_prev + log(pinv_l - 1.0);
    MpFloat log_den_term = ex + (log_q - log_p) * static_cast<double>(l) - log_abs_p;
    const int sign_cur = -sign_prev;
    MpFloat nt = exp(log_num_term);
    MpFloat dt = exp(log_den_term);
    if (sign_prev > 0) num += nt; else num -= nt;
    if (sign_cur > 0) den += dt; else den -= dt;
    log_abs_p_prev = log_abs_p;
    const bool small_n = num.is_zero() || log_num_term - log(abs(num)) < log_tol;
    const bool small_d = log_den_term - log(abs(den)) < log_tol;
    small_run = (small_n && small_d) ? small_run + 1 : 0;
    if (small_run >= 2) break;
  }
  out.terms = l;
  if (l >= max_terms) {
    throw ConvergenceError("c_tilde: series did not converge within max_terms",
                           (num / den).to_double());
  }
  out.value = num / den;
  return out;
}

struct ZDownMp {
  MpFloat value;
  int terms = 0;
  long lost_bits = 0;
};

// Z-down on the piece with active indices k = 0..n_active-1 (those with b p^{-k} < x).
inline ZDownMp z_down_piece_mp(const ModelParams& m, double w, double x, double b, int n_active,
                               mpfr_prec_t prec, const SeriesControl& ctrl) {
  ZDownMp out{MpFloat(prec), 0, 0};
  const MpSeries ct = c_tilde_mp(m, w, b, prec, ctrl.rel_tol, ctrl.max_terms);
  const MpFloat s = mp(w, prec) + m.lambda;
  const MpFloat w_over_s = mp(w, prec) / s;
  const MpFloat q = mp(m.lambda, prec) / s;
  const MpFloat log_ws = log(w_over_s);
  const MpFloat log_q = log(q);
  const MpFloat mpp = mp(m.p, prec);
  const MpFloat log_p = log(mpp);
  const int K = n_active - 1;

  // lg[K + d] = log|1 - p^d| for d in [-K, K]
  std::vector<MpFloat> lg;
  lg.reserve(static_cast<std::size_t>(2 * K + 1));
  for (int d = -K; d <= K; ++d) {
    if (d == 0) {
      lg.emplace_back(prec);
      continue;
    }
    MpFloat pd = exp(log_p * static_cast<double>(d));
    lg.push_back(d > 0 ? log(1.0 - pd) : log(pd - 1.0));
  }
  auto lgd = [&](int d) -> const MpFloat& { return lg[static_cast<std::size_t>(d + K)]; };

  MpFloat sum(1.0, prec);
  long max_exp = 1;
  MpFloat qk(1.0, prec);
  MpFloat pinv_k(1.0, prec);
  const MpFloat pinv = 1.0 / mpp;
  int terms = 0;
  auto add = [&](const MpFloat& t) {
    sum += t;
    max_exp = std::max(max_exp, t.exponent2());
    ++terms;
  };
  for (int k = 0; k <= K; ++k) {
    if (k > 0) {
      qk *= q;
      pinv_k *= pinv;
    }
    const MpFloat tk = x - pinv_k * b;
    add(-(w_over_s * qk));
    const double kk = static_cast<double>(k);
    const MpFloat base = log_ws + log_q * kk + log_p * (kk * (kk - 1.0) / 2.0);
    MpFloat pi(1.0, prec);
    for (int i = 0; i <= k; ++i) {
      if (i > 0) pi *= mpp;
      const int sign = ((k + i) % 2 == 0) ? -1 : 1;
      MpFloat log_mag = base - log_p * (static_cast<double>(i) * kk);
      for (int j = 0; j < k; ++j) {
        if (j != i) log_mag -= lgd(j - i);
      }
      const MpFloat grow = s * pi * tk;
      if (i < k) {
        MpFloat t = exp(log_mag + grow);
        add(sign > 0 ? t : -t);
      }
      if (!ct.value.is_zero()) {
        MpFloat lb = log_mag;
        if (i != k) lb -= lgd(k - i);
        MpFloat t = exp(lb + grow) * ct.value;
        add(sign > 0 ? t : -t);
      }
    }
  }
  out.terms = terms + ct.terms;
  out.lost_bits = std::max(0L, max_exp - sum.exponent2());
  out.value = sum;
  return out;
}

inline int z_down_active(double x, double b, double p) {
  // number of k >= 0 with b p^{-k} < x, exact in MPFR
  const mpfr_prec_t prec = 256;
  const MpFloat xv(x, prec);
  const MpFloat pinv = 1.0 / mp(p, prec);
  MpFloat lvl(b, prec);
  int n = 0;
  while (lvl < xv) {
    ++n;
    lvl *= pinv;
  }
  return n;
}

inline SeriesResult z_down_piece(const ModelParams& m, double w, double x, double b, int n_active,
                                 const SeriesControl& ctrl) {
  SeriesResult r;
  const double s = w + m.lambda;
  mpfr_prec_t prec = 96 + detail::bits_for(s * std::max(0.0, x - b));
  for (int attempt = 0; attempt < 6; ++attempt) {
    ZDownMp z = z_down_piece_mp(m, w, x, b, n_active, prec, ctrl);
    if (prec - z.lost_bits >= 72 || z.value.is_zero()) {
      r.value = z.value.to_double();
      r.terms = z.terms;
      r.precision_bits = prec;
      r.value = std::clamp(r.value, 0.0, 1.0);
      r.log_value = std::log(r.value);
      return r;
    }
    prec = z.lost_bits + 128;
  }
  throw ConvergenceError("z_down: precision escalation failed", r.value);
}

}  // namespace detail

inline double c_tilde(const ModelParams& m, double w, double b, const SeriesControl& ctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  ctrl.validate();
  detail::check_level(b, "b");
  if (b <= 0.0) throw DomainError("c_tilde: need b > 0");
  return detail::c_tilde_mp(m, w, b, 128, ctrl.rel_tol, ctrl.max_terms).value.to_double();
}

inline SeriesResult z_down_detailed(const ModelParams& m, double w, double x, double b,
                                    const SeriesControl& ctrl = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  ctrl.validate();
  detail::check_level(x, "x");
  detail::check_level(b, "b");
  if (!(b > 0.0 && x > b)) throw DomainError("z_down: need x > b > 0");
  SeriesResult r;
  if (m.lambda == 0.0) {
    r.value = 0.0;
    r.log_value = -std::numeric_limits<double>::infinity();
    return r;
  }
  if (w == 0.0) {
    r.value = 1.0;
    return r;
  }
  return detail::z_down_piece(m, w, x, b, detail::z_down_active(x, b, m.p), ctrl);
}

inline double z_down(const ModelParams& m, double w, double x, double b,
                     const SeriesControl& ctrl = {}) {
  return z_down_detailed(m, w, x, b, ctrl).value;
}

// ---- L-up and L-down --------------------------------------------------------

inline KCoefficients k_up_coeffs(const ModelParams& m, double w, double b, int k) {
  require_normalized(m);
  validate(LaplaceArg{w});
  detail::check_level(b, "b");
  if (b <= 0.0) throw DomainError("k_up_coeffs: need b > 0");
  if (k < 0) throw DomainError("k_up_coeffs: need k >= 0");
  detail::KLadder ladder(m, w, b);
  return ladder.at(k);
}

// log L(w;b,x,b) = -log K(x)
inline double log_l_up_from_b(const ModelParams& m, double w, double b, double x) {
  require_normalized(m);
  validate(LaplaceArg{w});
  detail::check_level(b, "b");
  detail::check_level(x, "x");
  if (b <= 0.0 || x < b) throw DomainError("l_up_from_b: need 0 < b <= x");
  detail::KLadder ladder(m, w, b);
  const double lk = ladder.log_k(x);
  if (!(lk >= -1e-12)) throw ConvergenceError("l_up_from_b: K below 1 (loss of accuracy)", lk);
  return -std::max(lk, 0.0);
}

inline double l_up_from_b(const ModelParams& m, double w, double b, double x,
                          const SeriesControl& = {}) {
  return std::exp(log_l_up_from_b(m, w, b, x));
}

inline double l_up(const ModelParams& m, double w, double x, double a, double b,
                   const SeriesControl& = {}) {
  require_normalized(m);
  validate(LaplaceArg{w});
  detail::check_level(x, "x");
  detail::check_level(a, "a");
  detail::check_level(b, "b");
  if (b <= 0.0) throw DomainError("l_up: need b > 0");
  if (x < b) return 0.0;
  if (x >= a) return 1.0;
  detail::KLadder ladder(m, w, b);
  const double v = std::exp(ladder.log_k(x) - ladder.log_k(a));
  return std::clamp(v, 0.0, 1.0);
}

inline double l_down(const ModelParams& m, double w, double x, double a, double b,
                     const SeriesControl& ctrl = {}) {
  require_normalized(m);
  detail::check_level(x, "x");
  detail::check_level(a, "a");
  detail::check_level(b, "b");
  if (b <= 0.0) throw DomainError("l_down: need b > 0");
  if (x >= a) return 0.0;
  if (x < b) return 1.0;
  const double xe = x > b ? x : b * (1.0 + 1e-12);
  if (xe >= a) return 0.0;
  const double zx = z_down(m, w, xe, b, ctrl);
  const double lu = l_up(m, w, xe, a, b, ctrl);
  // z_down(a) <= 1, so the correction is below rounding
  if (lu <= 0.25 * std::numeric_limits<double>::epsilon() * zx) return std::min(zx, 1.0);
  const double za = z_down(m, w, a, b, ctrl);
  double v = zx - lu * za;
  if (v < 0.0 && v >= -1e-12) v = 0.0;
  if (v < 0.0) throw ConvergenceError("l_down: negative result beyond rounding", v);
  return std::min(v, 1.0);
}

}  // namespace aimd
