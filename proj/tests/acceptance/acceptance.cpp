#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "aimd/evaluate.hpp"
#include "aimd/simulator.hpp"
#include "aimd/validate.hpp"

using namespace aimd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

int failures = 0;

void report(const char* id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ExitSpec spec_of(ExitKind k) {
  ExitSpec s;
  s.kind = k;
  return s;
}

// ---- AC1 ----------------------------------------------------------------------
Outcome ac1() {
  const ModelParams drift{0.0, 0.5, 1.0};
  double worst = 0.0;
  double worst_mc = 0.0;
  for (double w : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    for (double d : {0.1, 0.5, 1.0, 2.5, 7.0}) {
      const double x = 0.5;
      const double exact = std::exp(-w * d);
      worst = std::max(worst, std::abs(z_up(drift, w, x, x + d) - exact));
      ExitSpec s = spec_of(ExitKind::UpOne);
      s.x = x;
      s.a = x + d;
      sim::McConfig cfg;
      cfg.n_paths = 64;
      cfg.w = LaplaceArg{w};
      const sim::McEstimate e = sim::mc_lst(s, drift, cfg);
      worst_mc = std::max({worst_mc, std::abs(e.mean - exact), e.std_error});
    }
  }
  return {worst <= 1e-12 && worst_mc <= 1e-12,
          fmt("max |z_up - e^{-w(a-x)}| = %.2e, simulator max dev = %.2e (tol 1e-12)", worst, worst_mc)};
}

// ---- AC2 ----------------------------------------------------------------------
Outcome ac2() {
  double worst = 0.0;
  double worst_limit = 0.0;
  int n = 0;
  for (check::GridPoint gp : check::default_grid()) {
    gp.w = LaplaceArg{0.0};
    const NormalizedProblem np = normalize(gp.params, gp.spec, gp.w);
    const ModelParams& m = np.params;
    const ExitSpec& s = np.spec;
    double v = 1.0;
    switch (s.kind) {
      case ExitKind::DownOne: {
        const double x = s.x > s.b ? s.x : s.b * (1.0 + 1e-12);
        worst_limit = std::max(worst_limit, std::abs(z_down(m, 1e-6, x, s.b) - 1.0));
        v = z_down(m, 0.0, x, s.b);
        break;
      }
      case ExitKind::TwoSidedUp:
      case ExitKind::TwoSidedDown:
        v = l_up(m, 0.0, s.x, s.a, s.b) + l_down(m, 0.0, s.x, s.a, s.b);
        break;
      default: v = evaluate(gp.params, gp.spec, gp.w).value; break;
    }
    worst = std::max(worst, std::abs(v - 1.0));
    ++n;
  }
  return {worst <= 1e-9 && worst_limit <= 1e-4,
          fmt("%g points: max |value - 1| at w=0 = %.2e (tol 1e-9), z_down at w=1e-6 max |1 - v| = %.2e (tol 1e-4)",
              n, worst, worst_limit)};
}

// ---- AC3 ----------------------------------------------------------------------
Outcome ac3() {
  double worst = 0.0;
  double min_order = 1e9;
  const double lambdas[] = {0.5, 1.0, 2.0};
  const double ps[] = {0.3, 0.5, 0.8};
  const double ws[] = {0.5, 1.0, 3.0};
  const double as[] = {0.5, 1.0, 2.0};
  for (int i = 0; i < 9; ++i) {
    const ModelParams m{lambdas[i % 3], ps[i / 3], 1.0};
    const double w = ws[(i + i / 3) % 3];
    const double a = as[(i + 2 * (i / 3)) % 3];
    const double exact = z_up_zero(m, w, a);
    worst = std::max(worst, std::abs(check::volterra_oracle_zup(m, w, a, 1 << 14) - exact));
    const double e1 = std::abs(check::volterra_oracle_zup(m, w, a, 1 << 11) - exact);
    const double e2 = std::abs(check::volterra_oracle_zup(m, w, a, 1 << 12) - exact);
    min_order = std::min(min_order, std::log2(e1 / e2));
  }
  return {worst <= 1e-6 && min_order >= 1.9,
          fmt("9 points: max |z_up_zero - volterra(2^14)| = %.2e (tol 1e-6), min order = %.3f (tol 1.9)",
              worst, min_order)};
}

// ---- AC4 ----------------------------------------------------------------------
Outcome ac4() {
  double worst = 0.0;
  double worst_cont = 0.0;
  const double lambdas[] = {0.5, 1.0, 2.0};
  const double ps[] = {0.3, 0.5, 0.8};
  const double ws[] = {0.0, 0.5, 1.0, 3.0};
  for (int i = 0; i < 12; ++i) {
    const ModelParams m{lambdas[i % 3], ps[i / 4], 1.0};
    const double w = ws[i % 4];
    const double b = 1.0 / m.lambda;
    check::LupQuadratureOracle oracle(m, w, b);
    for (int k = 0; k <= 6; ++k) {
      const double lo = b * std::pow(m.p, -k);
      const double hi = b * std::pow(m.p, -k - 1);
      for (double f : {0.25, 0.5, 1.0}) {
        const double x = lo + f * (hi - lo);
        worst = std::max(worst, rel(l_up_from_b(m, w, b, x), oracle.l_up_from_b(x)));
      }
      if (k > 0) {
        const KCoefficients left = k_up_coeffs(m, w, b, k - 1);
        const KCoefficients right = k_up_coeffs(m, w, b, k);
        worst_cont = std::max(worst_cont, std::abs(std::expm1(left.log_evaluate(lo) - right.log_evaluate(lo))));
      }
    }
  }
  return {worst <= 1e-9 && worst_cont <= 1e-10,
          fmt("12 points, k<=6: max rel |coeff - quadrature| = %.2e (tol 1e-9), breakpoint jump = %.2e (tol 1e-10)",
              worst, worst_cont)};
}

// ---- AC5 ----------------------------------------------------------------------
Outcome ac5() {
  const ModelParams m{1.0, 0.5, 1.0};
  const double k_exact = std::exp(2.0) - 2.0 * std::exp(1.0) + 2.0 * std::exp(0.5);
  const double k = k_up_coeffs(m, 0.0, 1.0, 1).evaluate(3.0);
  const double l = l_up_from_b(m, 0.0, 1.0, 3.0);
  const double q = check::quadrature_oracle_lup(m, 0.0, 1.0, 3.0);
  ExitSpec s = spec_of(ExitKind::TwoSidedUp);
  s.b = 1.0;
  s.x = 1.0;
  s.a = 3.0;
  sim::McConfig cfg;
  cfg.n_paths = 1000000;
  cfg.seed = 5;
  const sim::McEstimate e = sim::mc_lst(s, m, cfg);
  const double z = check::z_score(l, e);
  const bool ok = std::abs(k - 5.2499349) <= 1e-7 && std::abs(k - k_exact) <= 1e-12 * k_exact &&
                  std::abs(l - 0.190479) <= 5e-7 && std::abs(q - l) <= 1e-9 && std::abs(z) <= 3.0;
  return {ok, fmt("K = %.10f, L = %.10f, |oracle - L| = %.2e", k, l, std::abs(q - l)) +
                  fmt(", MC %.6f +- %.6f (z = %+.2f)", e.mean, e.std_error, z)};
}

// ---- AC6 ----------------------------------------------------------------------
Outcome ac6() {
  sim::McConfig cfg;
  cfg.n_paths = 1000000;
  cfg.seed = 20261014;
  const auto rows = check::run_suite(check::default_grid(), cfg);
  std::map<ExitKind, std::pair<int, int>> per_kind;
  int retried = 0;
  double max_z = 0.0;
  std::string bad;
  for (const auto& r : rows) {
    auto& pk = per_kind[r.point.spec.kind];
    ++pk.second;
    if (r.pass) ++pk.first;
    if (r.retried) ++retried;
    max_z = std::max(max_z, std::abs(r.z_score));
    if (!r.pass) {
      bad += " [" + std::string(to_string(r.point.spec.kind)) + fmt(" z=%+.2f", r.z_score) +
             (r.error ? " " + *r.error : "") + "]";
    }
  }
  std::string detail;
  for (const auto& [k, v] : per_kind) {
    detail += std::string(to_string(k)) + " " + std::to_string(v.first) + "/" + std::to_string(v.second) + ", ";
  }
  const std::size_t ok = check::passed(rows);
  detail += "pass " + std::to_string(ok) + "/" + std::to_string(rows.size()) + ", retries " +
            std::to_string(retried) + fmt(", max |z| %.2f", max_z) + bad;
  return {ok == rows.size(), detail};
}

// ---- AC7 ----------------------------------------------------------------------
// gaps under this are at the rounding floor of the evaluation
constexpr double kGapFloor = 64.0 * std::numeric_limits<double>::epsilon();

bool not_increasing(double gap, double prev) { return gap <= std::max(prev, kGapFloor); }

Outcome ac7() {
  double worst_down = 0.0;
  double worst_up = 0.0;
  bool monotone = true;
  for (double p : {0.3, 0.5, 0.8}) {
    for (double w : {0.5, 1.0, 3.0}) {
      const ModelParams m{1.0, p, 1.0};
      const double b = 1.0;
      const double x = 1.0 / std::sqrt(p);
      const double zd = z_down(m, w, x, b);
      double prev = 1e300;
      for (int k = 2; k <= 12; ++k) {
        const double gap = std::abs(zd - l_down(m, w, x, b * std::pow(p, -k), b)) / zd;
        if (!not_increasing(gap, prev)) monotone = false;
        prev = gap;
      }
      worst_down = std::max(worst_down, prev);

      const double xu = 2.0;
      const double au = 3.0;
      const double zu = z_up(m, w, xu, au);
      double prev_up = 1e300;
      for (double f : {1e-1, 1e-2, 1e-3}) {
        const double gap = std::abs(zu - l_up(m, w, xu, au, f * xu)) / zu;
        if (!not_increasing(gap, prev_up)) monotone = false;
        prev_up = gap;
      }
      worst_up = std::max(worst_up, prev_up);
    }
  }
  return {monotone && worst_down <= 1e-4 && worst_up <= 1e-2,
          fmt("l_down vs z_down at a=b p^-12: %.2e (tol 1e-4); l_up vs z_up at b=1e-3 x: %.2e (tol 1e-2)",
              worst_down, worst_up) +
              (monotone ? ", gaps nonincreasing above 64 eps" : ", gaps NOT monotone")};
}

// ---- AC8 ----------------------------------------------------------------------
Outcome ac8() {
  double mult = 0.0;
  double excess = 0.0;
  double eq0 = 0.0;
  double zd_excess = -1.0;
  for (const check::GridPoint& gp : check::default_grid()) {
    const NormalizedProblem np = normalize(gp.params, gp.spec, gp.w);
    const ModelParams& m = np.params;
    const ExitSpec& s = np.spec;
    const double w = np.w.w;
    switch (s.kind) {
      case ExitKind::UpOne: {
        const double mid = 0.5 * (s.x + s.a);
        const double lhs = z_up(m, w, s.x, s.a);
        mult = std::max(mult, rel(z_up(m, w, s.x, mid) * z_up(m, w, mid, s.a), lhs));
        break;
      }
      case ExitKind::TwoSidedUp:
      case ExitKind::TwoSidedDown: {
        const double sum = l_up(m, w, s.x, s.a, s.b) + l_down(m, w, s.x, s.a, s.b);
        excess = std::max(excess, sum - 1.0);
        const double sum0 = l_up(m, 0.0, s.x, s.a, s.b) + l_down(m, 0.0, s.x, s.a, s.b);
        eq0 = std::max(eq0, std::abs(sum0 - 1.0));
        break;
      }
      case ExitKind::DownOne: {
        const double x = s.x > s.b ? s.x : s.b * (1.0 + 1e-12);
        zd_excess = std::max(zd_excess, z_down(m, w, x, s.b) - m.lambda / (m.lambda + w));
        break;
      }
      default: break;
    }
  }
  return {mult <= 1e-12 && excess <= 1e-12 && eq0 <= 1e-9 && zd_excess <= 1e-15,
          fmt("z_up multiplicativity %.2e (tol 1e-12); l_up+l_down-1 max %.2e, at w=0 %.2e", mult, excess, eq0) +
              fmt("; max z_down - lambda/(lambda+w) = %.2e", zd_excess)};
}

// ---- AC9 ----------------------------------------------------------------------
Outcome ac9() {
  double worst_res = 0.0;
  double worst_shift = 0.0;
  double worst_oracle = 0.0;
  double worst_identity = 0.0;
  double worst_boundary = 0.0;
  int n = 0;
  for (double w : {0.5, 1.0, 3.0}) {
    for (double c : {0.5, 1.0}) {
      for (double u : {0.5, 2.0}) {
        const ModelParams m{1.0, 0.5, 1.0};
        const SolveAResult r = solve_a(m, w, c, u);
        const SolveAResult t = solve_a(m, w, c, u, 1e-14);
        worst_res = std::max(worst_res, r.residual);
        worst_shift = std::max(worst_shift, std::abs(r.a - t.a));
        const double zd = z_down(m, w, u + c, u);
        auto f = [&](double a) { return zd + l_up(m, w, u + c, a, u) - 1.0; };
        const double g = check::golden_section_root_oracle(f, u + c, 4.0 * r.a);
        worst_oracle = std::max(worst_oracle, std::abs(g - r.a));
        worst_identity = std::max(worst_identity, std::abs(lst_drawup_level_formula(m, w, u + c, u, c) - 1.0));
        const DrawupResult d = lst_drawup_detailed(m, w, u + 0.5 * c, u, c);
        worst_boundary = std::max(worst_boundary, d.boundary_residual);
        ++n;
      }
    }
  }
  return {worst_res <= 1e-10 && worst_shift <= 1e-8 && worst_oracle <= 1e-8 && worst_identity <= 1e-10,
          fmt("%g points: max residual %.2e (tol 1e-10), tol-tightening shift %.2e (tol 1e-8)", n,
              worst_res, worst_shift) +
              fmt(", golden-section gap %.2e (tol 1e-8), formula at x=u+c |v-1| = %.2e (tol 1e-10)",
                  worst_oracle, worst_identity) +
              fmt(", renewal boundary residual %.2e", worst_boundary)};
}

// ---- AC10 ---------------------------------------------------------------------
std::string capture(const std::string& cmd, int* status) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    *status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  *status = pclose(pipe);
  return out;
}

Outcome ac10() {
  const std::vector<std::string> runs = {
      "compare --suite default --paths 20000 --seed 42",
      "simulate --kind drawup --x 1.5 --u 1 --c 1 --w 1 --paths 1000000 --seed 7 --format json",
  };
  bool ok = true;
  std::string detail;
  for (const std::string& args : runs) {
    std::string first;
    for (int threads : {1, 4, 8}) {
      int status = 0;
      const std::string out = capture(std::string(AIMD_CLI_PATH) + " " + args + " --threads " +
                                          std::to_string(threads) + " 2>/dev/null",
                                      &status);
      if (out.empty()) ok = false;
      if (threads == 1) first = out;
      else if (out != first) ok = false;
    }
    detail += std::to_string(first.size()) + " bytes identical across 1/4/8 threads for '" +
              args.substr(0, args.find(' ')) + "'; ";
  }
  if (!ok) detail = "outputs differ across thread counts";
  return {ok, detail};
}

}  // namespace

int main() {
  report("AC1", "degenerate drift exactness", ac1);
  report("AC2", "w=0 normalization", ac2);
  report("AC3", "Volterra oracle agreement", ac3);
  report("AC4", "quadrature oracle agreement", ac4);
  report("AC5", "golden value", ac5);
  report("AC6", "Monte Carlo confrontation", ac6);
  report("AC7", "limit identities", ac7);
  report("AC8", "structural identities", ac8);
  report("AC9", "root solver", ac9);
  report("AC10", "reproducibility across threads", ac10);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
