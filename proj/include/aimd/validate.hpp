#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "aimd/evaluate.hpp"
#include "aimd/model.hpp"
#include "aimd/quadrature.hpp"
#include "aimd/reflected.hpp"
#include "aimd/scalefn.hpp"
#include "aimd/simulator.hpp"

namespace aimd::check {

// ---- deterministic oracles ---------------------------------------------------

// Trapezoidal forward substitution for g(t) = 1/Z_up(w;0,t) in
//   1 = exp(-(lambda+w) a) g(a) + lambda int_0^a exp(-(lambda+w) t) g(pt) dt.
inline double volterra_oracle_zup(const ModelParams& m, double w, double a, int grid_n) {
  require_normalized(m);
  validate(LaplaceArg{w});
  if (!(a > 0.0)) throw DomainError("volterra_oracle_zup: need a > 0");
  if (grid_n < 64) throw DomainError("volterra_oracle_zup: need grid_n >= 64");
  const double s = w + m.lambda;
  const double h = a / grid_n;
  std::vector<double> g(static_cast<std::size_t>(grid_n) + 1, 1.0);
  // g(p t_i) by linear interpolation; returns (known part, weight of g_i)
  auto at_pt = [&](int i) -> std::pair<double, double> {
    const double pos = m.p * i;
    const int j = static_cast<int>(std::floor(pos));
    const double f = pos - j;
    if (j + 1 < i) return {(1.0 - f) * g[j] + f * g[j + 1], 0.0};
    if (j + 1 == i) return {(1.0 - f) * g[j], f};
    return {0.0, 1.0};
  };
  double integral = 0.5 * g[0];  // integrand at t = 0
  for (int i = 1; i <= grid_n; ++i) {
    const double e = std::exp(-s * h * i);
    const auto [known, wi] = at_pt(i);
    // e g_i = 1 - lambda h (integral + 0.5 e (known + wi g_i))
    const double rhs = 1.0 - m.lambda * h * (integral + 0.5 * e * known);
    const double lhs = e * (1.0 + 0.5 * m.lambda * h * wi);
    g[static_cast<std::size_t>(i)] = rhs / lhs;
    integral += e * (known + wi * g[static_cast<std::size_t>(i)]);
  }
  return 1.0 / g.back();
}

// Recursion for K = 1/L_up(w;b,.,b) level by level, each level tabulated on
// Chebyshev-Lobatto nodes and the integral term done by adaptive quadrature.
class LupQuadratureOracle {
 public:
  static constexpr int kNodes = 40;

  LupQuadratureOracle(const ModelParams& m, double w, double b, int k_max = 8)
      : m_(m), w_(w), b_(b), k_max_(k_max), s_(w + m.lambda) {
    require_normalized(m);
    validate(LaplaceArg{w});
    if (!(b > 0.0)) throw DomainError("quadrature_oracle_lup: need b > 0");
    qctrl_.rel_tol = 1e-14;
    qctrl_.abs_tol = 1e-300;
  }

  double l_up_from_b(double x) {
    if (x <= b_) return 1.0;
    const int k = detail::interval_index(b_, m_.p, x);
    if (k > k_max_) throw DomainError("quadrature_oracle_lup: x beyond k_max");
    return std::exp(-log_k_direct(k, x));
  }

 private:
  struct Level {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> nodes;
    std::vector<double> log_k;
  };

  double edge(int k) const { return detail::level_breakpoint(b_, m_.p, k); }

  double log_k_direct(int k, double x) {
    const double xk = edge(k);
    if (k == 0) return s_ * (x - b_);
    const double lk_edge = log_k_level(k - 1, xk);
    const double prev = edge(k - 1);
    auto f = [&](double t) {
      return m_.lambda * std::exp(-s_ * t + log_k_level(k - 1, prev + m_.p * t) - lk_edge);
    };
    const double integral = integrate(f, 0.0, x - xk, {}, qctrl_).value;
    return s_ * (x - xk) + lk_edge + std::log1p(-integral);
  }

  double log_k_level(int k, double x) {
    if (k == 0) return s_ * (x - b_);
    const Level& lv = level(k);
    // barycentric interpolation on Chebyshev-Lobatto nodes
    double num = 0.0;
    double den = 0.0;
    for (int j = 0; j <= kNodes; ++j) {
      const double d = x - lv.nodes[static_cast<std::size_t>(j)];
      if (d == 0.0) return lv.log_k[static_cast<std::size_t>(j)];
      double wj = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == kNodes) wj *= 0.5;
      num += wj / d * lv.log_k[static_cast<std::size_t>(j)];
      den += wj / d;
    }
    return num / den;
  }

  const Level& level(int k) {
    while (static_cast<int>(levels_.size()) < k) {
      const int j = static_cast<int>(levels_.size()) + 1;
      Level lv;
      lv.lo = edge(j);
      lv.hi = edge(j + 1);
      for (int i = 0; i <= kNodes; ++i) {
        const double t = 0.5 * (1.0 - std::cos(M_PI * i / kNodes));
        const double x = lv.lo + (lv.hi - lv.lo) * t;
        lv.nodes.push_back(x);
      }
      lv.log_k.resize(lv.nodes.size());
      for (std::size_t i = 0; i < lv.nodes.size(); ++i) lv.log_k[i] = log_k_direct(j, lv.nodes[i]);
      levels_.push_back(std::move(lv));
    }
    return levels_[static_cast<std::size_t>(k - 1)];
  }

  ModelParams m_;
  double w_;
  double b_;
  int k_max_;
  double s_;
  QuadratureControl qctrl_;
  std::vector<Level> levels_;
};

inline double quadrature_oracle_lup(const ModelParams& m, double w, double b, double x,
                                    int k_max = 8) {
  LupQuadratureOracle oracle(m, w, b, k_max);
  return oracle.l_up_from_b(x);
}

// Generator identity for the hazard: w + lambda (1 - L_up(w; pz, z, z - c)).
inline double hazard_generator_oracle(const ModelParams& m, double w, double z, double c) {
  if (z <= c) return w + m.lambda * (1.0 - z_up(m, w, m.p * z, z));
  return w + m.lambda * (1.0 - l_up(m, w, m.p * z, z, z - c));
}

// Generator identity for the right derivative of L_down: lambda L_down(w; py, y, y - c).
inline double d_plus_l_down_generator_oracle(const ModelParams& m, double w, double y, double c) {
  if (y <= c) return 0.0;
  if (m.p * y <= y - c) return m.lambda;
  return m.lambda * l_down(m, w, m.p * y, y, y - c);
}

// Drawdown transform rebuilt from the generator identities, with the exact tail
// beyond c/(1-p) where the hazard is the constant w + lambda.
inline double lst_drawdown_generator_oracle(const ModelParams& m, double w, double x, double c) {
  if (!(c > 0.0 && x > c)) throw DomainError("lst_drawdown_generator_oracle: need x > c > 0");
  if (w == 0.0) return 1.0;
  QuadratureControl q;
  q.rel_tol = 1e-11;
  q.abs_tol = 1e-14;
  const double y1 = c / (1.0 - m.p);
  auto h = [&](double z) { return hazard_generator_oracle(m, w, z, c); };
  auto g = [&](double y) { return d_plus_l_down_generator_oracle(m, w, y, c); };
  std::vector<double> edges{x};
  for (double k : detail::drawdown_kinks(c, m.p, x, y1)) edges.push_back(k);
  std::sort(edges.begin(), edges.end());
  if (y1 > x) edges.push_back(y1);
  double total = 0.0;
  double H = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    const double H_lo = H;
    auto f = [&](double y) { return std::exp(-(H_lo + integrate(h, lo, y, {}, q).value)) * g(y); };
    total += integrate(f, lo, hi, {}, q).value;
    H += integrate(h, lo, hi, {}, q).value;
  }
  return total + std::exp(-H) * m.lambda / (w + m.lambda);
}

// Root of a monotone residual by golden-section minimisation of |f| on [lo, hi].
inline double golden_section_root_oracle(const std::function<double(double)>& f, double lo,
                                         double hi, double width = 1e-13) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo;
  double b = hi;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = std::abs(f(c));
  double fd = std::abs(f(d));
  while (b - a > width * std::max(1.0, std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = std::abs(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = std::abs(f(d));
    }
  }
  return 0.5 * (a + b);
}

// ---- Monte Carlo confrontation ------------------------------------------------

struct GridPoint {
  ExitSpec spec;
  ModelParams params;
  LaplaceArg w;
};

struct ComparisonRow {
  GridPoint point;
  double analytic = 0.0;
  Evaluation diagnostics;
  sim::McEstimate mc;
  double z_score = 0.0;
  bool pass = false;
  bool retried = false;
  std::optional<std::string> error;
};

struct SuiteOptions {
  double threshold = 3.0;
  bool retry = true;
  Controls controls;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// A zero sample variance carries no information below 1/n, so the z-score
// uses max(stderr, 1/n) as its scale.
inline double z_score(double analytic, const sim::McEstimate& mc) {
  const double scale = std::max(mc.std_error, 1.0 / static_cast<double>(mc.n_paths));
  return (analytic - mc.mean) / scale;
}

inline ComparisonRow compare_point(const GridPoint& gp, const sim::McConfig& base,
                                   std::uint64_t row_seed, const SuiteOptions& opt = {}) {
  ComparisonRow row;
  row.point = gp;
  try {
    row.diagnostics = evaluate(gp.params, gp.spec, gp.w, opt.controls);
    row.analytic = row.diagnostics.value;
    const NormalizedProblem np = normalize(gp.params, gp.spec, gp.w);
    sim::McConfig cfg = base;
    cfg.w = np.w;
    cfg.seed = row_seed;
    row.mc = sim::mc_lst(np.spec, np.params, cfg);
    row.z_score = check::z_score(row.analytic, row.mc);
    row.pass = std::abs(row.z_score) <= opt.threshold;
    if (!row.pass && opt.retry) {
      cfg.seed = splitmix64(row_seed ^ 0xA5A5A5A5A5A5A5A5ull);
      row.mc = sim::mc_lst(np.spec, np.params, cfg);
      row.z_score = check::z_score(row.analytic, row.mc);
      row.pass = std::abs(row.z_score) <= opt.threshold;
      row.retried = true;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.pass = false;
  }
  return row;
}

inline std::vector<ComparisonRow> run_suite(const std::vector<GridPoint>& grid,
                                            const sim::McConfig& mc_cfg,
                                            const SuiteOptions& opt = {}) {
  if (grid.empty()) throw ValidationError("run_suite: empty grid");
  std::vector<ComparisonRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back(compare_point(grid[i], mc_cfg, splitmix64(mc_cfg.seed + i), opt));
  }
  return rows;
}

inline std::size_t passed(const std::vector<ComparisonRow>& rows) {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; }));
}

// ---- default grid -------------------------------------------------------------

// 20 points per kind over lambda in {0.5,1,2}, p in {0.3,0.5,0.8}, w in {0,0.5,1,3}.
// Levels are in units of 1/lambda; n in 1..4 is the number of scale intervals spanned.
inline std::vector<GridPoint> default_grid(int per_kind = 20) {
  static constexpr double kLambda[] = {0.5, 1.0, 2.0};
  static constexpr double kP[] = {0.3, 0.5, 0.8};
  static constexpr double kW[] = {0.0, 0.5, 1.0, 3.0};
  std::vector<GridPoint> grid;
  for (ExitKind kind : kAllKinds) {
    for (int i = 0; i < per_kind; ++i) {
      const double lambda = kLambda[i % 3];
      const double p = kP[(i / 3) % 3];
      const double w = kW[(i + i / 4) % 4];
      const int n = 1 + (i / 2) % 4;
      const double unit = 1.0 / lambda;
      ExitSpec s;
      s.kind = kind;
      auto lvl = [&](double e) { return unit * std::pow(p, -e); };
      switch (kind) {
        case ExitKind::UpOne:
          s.x = unit * 0.5 * (i % 4);
          s.a = s.x + unit * 0.5 * n;
          break;
        case ExitKind::DownOne:
          // barrier at half the mean level so that w = 0 paths return in reasonable time
          s.b = 0.5 * unit / (1.0 - p);
          s.x = s.b * std::pow(p, -(n - 0.5));
          break;
        case ExitKind::TwoSidedUp:
        case ExitKind::TwoSidedDown:
          s.b = unit;
          s.a = lvl(n);
          s.x = lvl(0.3 + 0.4 * (n - 1));
          break;
        case ExitKind::ReflUpperDown:
          s.c = unit;
          s.a = lvl(n - 0.5);
          s.x = lvl(0.5 * (n - 0.5));
          break;
        case ExitKind::ReflLowerUp:
          s.b = unit;
          s.c = lvl((w == 0.0 ? 1 : n) - 0.2);
          s.x = lvl(0.3 * (w == 0.0 ? 1 : n));
          break;
        case ExitKind::Drawdown:
          s.c = unit;
          s.x = s.c / (1.0 - std::pow(p, n)) * 1.03;
          if (i % 5 == 4) s.xbar0 = s.x + 0.5 * s.c;
          break;
        case ExitKind::Drawup: {
          static constexpr double kU[] = {0.0, 0.5, 1.0, 2.0};
          static constexpr double kC[] = {0.5, 1.0, 1.5};
          static constexpr double kF[] = {0.2, 0.5, 0.8};
          s.u = unit * kU[i % 4];
          s.c = unit * kC[(i / 4) % 3];
          s.x = s.u + s.c * kF[(i / 2) % 3];
          break;
        }
      }
      grid.push_back({s, ModelParams{lambda, p, 1.0}, LaplaceArg{w}});
    }
  }
  return grid;
}

}  // namespace aimd::check
