#pragma once

#include <cmath>
#include <optional>

#include "aimd/model.hpp"
#include "aimd/reflected.hpp"
#include "aimd/scalefn.hpp"

namespace aimd {

struct Controls {
  SeriesControl series;
  QuadratureControl quadrature;
  DerivativeControl derivative;
  RenewalControl renewal;
  double root_tol = 1e-10;
};

struct Evaluation {
  double value = 0.0;
  int terms = 0;
  long precision_bits = 0;
  double quadrature_error = 0.0;
  std::optional<double> level_a;
  std::optional<double> root_residual;
  std::optional<double> boundary_residual;
  int grid_points = 0;
};

// Analytic transform E[exp(-w tau)] (side-restricted for the two-sided kinds).
inline Evaluation evaluate(const ModelParams& params, const ExitSpec& spec, LaplaceArg warg,
                           const Controls& ctl = {}, bool with_diagnostics = false) {
  const NormalizedProblem np = normalize(params, spec, warg);
  const ModelParams& m = np.params;
  const ExitSpec& s = np.spec;
  const double w = np.w.w;
  Evaluation ev;
  switch (s.kind) {
    case ExitKind::UpOne: {
      ev.value = z_up(m, w, s.x, s.a, ctl.series);
      if (with_diagnostics && w > 0.0) ev.terms = z_up_zero_detailed(m, w, s.a, ctl.series).terms;
      break;
    }
    case ExitKind::DownOne: {
      const double x = s.x > s.b ? s.x : s.b * (1.0 + 1e-12);
      const SeriesResult r = z_down_detailed(m, w, x, s.b, ctl.series);
      ev.value = r.value;
      ev.terms = r.terms;
      ev.precision_bits = r.precision_bits;
      break;
    }
    case ExitKind::TwoSidedUp:
      ev.value = l_up(m, w, s.x, s.a, s.b, ctl.series);
      ev.terms = detail::interval_index(s.b, m.p, s.a) + 1;
      break;
    case ExitKind::TwoSidedDown:
      ev.value = l_down(m, w, s.x, s.a, s.b, ctl.series);
      ev.terms = detail::interval_index(s.b, m.p, s.a) + 1;
      break;
    case ExitKind::ReflUpperDown:
      ev.value = lst_reflected_upper(m, w, s.x, s.a, s.c, ctl.series);
      break;
    case ExitKind::ReflLowerUp:
      ev.value = lst_reflected_lower(m, w, s.x, s.c, s.b, ctl.series);
      break;
    case ExitKind::Drawdown: {
      const double sup = s.running_sup();
      if (sup == s.x) {
        const DrawdownResult r =
            lst_drawdown_detailed(m, w, s.x, s.c, ctl.quadrature, ctl.derivative, ctl.series);
        ev.value = r.value;
        ev.quadrature_error = r.quadrature_error;
      } else {
        ev.value = lst_drawdown_general_start(m, w, s.x, sup, s.c, ctl.quadrature, ctl.derivative,
                                              ctl.series);
      }
      break;
    }
    case ExitKind::Drawup: {
      const DrawupResult r = lst_drawup_detailed(m, w, s.x, s.u, s.c, ctl.renewal, ctl.series);
      ev.value = r.value;
      ev.grid_points = r.grid_points;
      if (r.grid_points > 0) ev.boundary_residual = r.boundary_residual;
      if (with_diagnostics && w > 0.0 && s.u > 0.0 && m.lambda > 0.0) {
        const SolveAResult a = solve_a(m, w, s.c, s.u, ctl.root_tol, ctl.series);
        ev.level_a = a.a;
        ev.root_residual = a.residual;
      }
      break;
    }
  }
  return ev;
}

}  // namespace aimd
