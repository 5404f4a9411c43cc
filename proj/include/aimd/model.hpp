#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "aimd/errors.hpp"

namespace aimd {

// lambda = 0 is accepted as the pure-drift limit.
struct ModelParams {
  double lambda = 1.0;
  double p = 0.5;
  double beta = 1.0;
};

struct LaplaceArg {
  double w = 0.0;
};

enum class ExitKind {
  UpOne,
  DownOne,
  TwoSidedUp,
  TwoSidedDown,
  ReflUpperDown,
  ReflLowerUp,
  Drawdown,
  Drawup,
};

inline constexpr ExitKind kAllKinds[] = {
    ExitKind::UpOne,         ExitKind::DownOne,     ExitKind::TwoSidedUp,
    ExitKind::TwoSidedDown,  ExitKind::ReflUpperDown, ExitKind::ReflLowerUp,
    ExitKind::Drawdown,      ExitKind::Drawup,
};

inline std::string_view to_string(ExitKind kind) {
  switch (kind) {
    case ExitKind::UpOne: return "up-one";
    case ExitKind::DownOne: return "down-one";
    case ExitKind::TwoSidedUp: return "two-sided-up";
    case ExitKind::TwoSidedDown: return "two-sided-down";
    case ExitKind::ReflUpperDown: return "refl-upper";
    case ExitKind::ReflLowerUp: return "refl-lower";
    case ExitKind::Drawdown: return "drawdown";
    case ExitKind::Drawup: return "drawup";
  }
  return "unknown";
}

inline ExitKind parse_kind(std::string_view name) {
  for (ExitKind k : kAllKinds) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown exit kind '" + std::string(name) + "'");
}

// Levels that a kind does not use are ignored.
struct ExitSpec {
  ExitKind kind = ExitKind::UpOne;
  double x = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double u = 0.0;
  std::optional<double> xbar0;

  double running_sup() const { return xbar0.value_or(x); }
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void require_finite(double v, const char* name) {
  require(std::isfinite(v), std::string(name) + " must be finite, got " + fmt(v));
}

}  // namespace detail

inline void validate(const ModelParams& m) {
  using detail::require;
  detail::require_finite(m.lambda, "lambda");
  detail::require_finite(m.p, "p");
  detail::require_finite(m.beta, "beta");
  require(m.lambda >= 0.0, "lambda must be >= 0, got " + detail::fmt(m.lambda));
  require(m.p > 0.0 && m.p < 1.0, "p must lie in (0,1), got " + detail::fmt(m.p));
  require(m.beta > 0.0, "beta must be > 0, got " + detail::fmt(m.beta));
}

inline void validate(LaplaceArg w) {
  detail::require_finite(w.w, "w");
  detail::require(w.w >= 0.0, "w must be >= 0, got " + detail::fmt(w.w));
}

inline void validate(const ExitSpec& s) {
  using detail::fmt;
  using detail::require;
  for (double v : {s.x, s.a, s.b, s.c, s.u}) detail::require_finite(v, "level");
  const std::string kind(to_string(s.kind));
  switch (s.kind) {
    case ExitKind::UpOne:
      require(0.0 <= s.x && s.x < s.a, kind + ": need 0 <= x < a");
      break;
    case ExitKind::DownOne:
      require(s.b > 0.0 && s.x >= s.b, kind + ": need x >= b > 0");
      break;
    case ExitKind::TwoSidedUp:
    case ExitKind::TwoSidedDown:
      require(s.b > 0.0 && s.b <= s.x && s.x < s.a, kind + ": need 0 < b <= x < a");
      break;
    case ExitKind::ReflUpperDown:
      require(s.c > 0.0 && s.c <= s.x && s.x <= s.a && s.c < s.a,
              kind + ": need 0 < c <= x <= a, c < a");
      break;
    case ExitKind::ReflLowerUp:
      require(s.b > 0.0 && s.b <= s.x && s.x < s.c, kind + ": need 0 < b <= x < c");
      break;
    case ExitKind::Drawdown:
      require(s.c > 0.0 && s.x > 0.0, kind + ": need x > 0, c > 0");
      if (s.xbar0) {
        detail::require_finite(*s.xbar0, "xbar0");
        require(*s.xbar0 >= s.x, kind + ": need xbar0 >= x, got xbar0=" + fmt(*s.xbar0));
      }
      break;
    case ExitKind::Drawup:
      require(s.c > 0.0 && 0.0 <= s.u && s.u <= s.x, kind + ": need 0 <= u <= x, c > 0");
      break;
  }
}

struct NormalizedProblem {
  ModelParams params;
  ExitSpec spec;
  LaplaceArg w;
};

// Time is rescaled by beta; levels are unchanged.
inline NormalizedProblem normalize(const ModelParams& params, const ExitSpec& spec,
                                   LaplaceArg w) {
  validate(params);
  validate(spec);
  validate(w);
  NormalizedProblem out{params, spec, w};
  out.params.lambda = params.lambda / params.beta;
  out.params.beta = 1.0;
  out.w.w = w.w / params.beta;
  return out;
}

inline void require_normalized(const ModelParams& m) {
  validate(m);
  if (m.beta != 1.0) {
    throw ValidationError("expected normalized parameters (beta = 1), got beta=" +
                          detail::fmt(m.beta));
  }
}

}  // namespace aimd
