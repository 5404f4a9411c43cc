#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "aimd/detail/philox.hpp"
#include "aimd/errors.hpp"
#include "aimd/model.hpp"

namespace aimd::sim {

enum class Side { Up, Down, Censored };

struct PathState {
  double level = 0.0;
  double time = 0.0;
  double sup = 0.0;
  double inf = 0.0;
};

struct ExitSample {
  double tau = 0.0;
  Side side = Side::Censored;
  PathState at_exit;
  std::uint64_t jumps = 0;
};

inline constexpr double kDefaultZeroWCap = 1e5;

inline double default_horizon_cap(double w) { return w > 0.0 ? 50.0 / w : kDefaultZeroWCap; }

// Event-driven path of the normalized process until the exit event of `spec`.
inline ExitSample simulate_exit(const ExitSpec& spec, const ModelParams& params,
                                std::uint64_t path_index, std::uint64_t seed, double horizon_cap) {
  const double lambda = params.lambda;
  const double p = params.p;
  detail::PathStream rng(seed, path_index);
  auto next_gap = [&]() {
    if (lambda == 0.0) return std::numeric_limits<double>::infinity();
    return -std::log1p(-rng.uniform()) / lambda;
  };

  ExitSample out;
  PathState& st = out.at_exit;
  st.level = spec.x;
  st.sup = spec.kind == ExitKind::Drawdown ? spec.running_sup() : spec.x;
  st.inf = spec.kind == ExitKind::Drawup ? spec.u : spec.x;
  auto finish = [&](double tau, Side side) {
    out.tau = tau;
    out.side = side;
    st.time = tau;
    return out;
  };

  if (spec.kind == ExitKind::Drawdown && st.sup - st.level >= spec.c) return finish(0.0, Side::Down);
  if (spec.kind == ExitKind::Drawup && st.level - st.inf >= spec.c) return finish(0.0, Side::Up);

  while (st.time <= horizon_cap) {
    const double gap = next_gap();
    double up_target = std::numeric_limits<double>::infinity();
    switch (spec.kind) {
      case ExitKind::UpOne:
      case ExitKind::TwoSidedUp:
      case ExitKind::TwoSidedDown: up_target = spec.a; break;
      case ExitKind::ReflLowerUp: up_target = spec.c; break;
      case ExitKind::Drawup: up_target = st.inf + spec.c; break;
      default: break;
    }
    if (st.level + gap >= up_target) {
      const double tau = st.time + (up_target - st.level);
      st.level = up_target;
      st.sup = std::max(st.sup, up_target);
      return finish(tau, Side::Up);
    }
    if (!std::isfinite(gap)) break;
    double pre = st.level + gap;
    if (spec.kind == ExitKind::ReflUpperDown) pre = std::min(pre, spec.a);
    st.time += gap;
    st.sup = std::max(st.sup, pre);
    st.level = p * pre;
    ++out.jumps;
    switch (spec.kind) {
      case ExitKind::DownOne:
      case ExitKind::TwoSidedUp:
      case ExitKind::TwoSidedDown:
        if (st.level <= spec.b) return finish(st.time, Side::Down);
        break;
      case ExitKind::ReflUpperDown:
        if (st.level <= spec.c) return finish(st.time, Side::Down);
        break;
      case ExitKind::ReflLowerUp: st.level = std::max(st.level, spec.b); break;
      case ExitKind::Drawdown:
        if (st.sup - st.level > spec.c) return finish(st.time, Side::Down);
        break;
      case ExitKind::Drawup: st.inf = std::min(st.inf, st.level); break;
      case ExitKind::UpOne: break;
    }
    st.inf = spec.kind == ExitKind::Drawup ? st.inf : std::min(st.inf, st.level);
  }
  return finish(std::numeric_limits<double>::infinity(), Side::Censored);
}

inline Side target_side(ExitKind kind) {
  switch (kind) {
    case ExitKind::UpOne:
    case ExitKind::TwoSidedUp:
    case ExitKind::ReflLowerUp:
    case ExitKind::Drawup: return Side::Up;
    default: return Side::Down;
  }
}

struct McConfig {
  std::uint64_t n_paths = 100000;
  std::uint64_t seed = 1;
  double horizon_cap = 0.0;  // 0 selects default_horizon_cap(w)
  LaplaceArg w;
  unsigned threads = 1;
  std::uint64_t chunk = 4096;

  double resolved_cap() const { return horizon_cap > 0.0 ? horizon_cap : default_horizon_cap(w.w); }

  void validate() const {
    detail::require(n_paths >= 1, "McConfig.n_paths must be >= 1");
    detail::require(threads >= 1, "McConfig.threads must be >= 1");
    detail::require(chunk >= 1, "McConfig.chunk must be >= 1");
    aimd::validate(w);
    const double cap = resolved_cap();
    if (!(cap > 0.0)) throw ConfigError("horizon cap must be > 0");
    if (w.w > 0.0) {
      const double target_se = 0.5 / std::sqrt(static_cast<double>(n_paths));
      if (std::exp(-w.w * cap) > 1e-3 * target_se) {
        throw ConfigError("horizon cap " + detail::fmt(cap) +
                          " too short: exp(-w cap) exceeds 1e-3 x target standard error");
      }
    }
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t n_censored = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct ChunkStats {
  std::uint64_t n = 0;
  std::uint64_t censored = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

inline void merge(ChunkStats& into, const ChunkStats& o) {
  if (o.n == 0) return;
  const double n1 = static_cast<double>(into.n);
  const double n2 = static_cast<double>(o.n);
  const double delta = o.mean - into.mean;
  const double n = n1 + n2;
  into.mean += delta * n2 / n;
  into.m2 += o.m2 + delta * delta * n1 * n2 / n;
  into.n += o.n;
  into.censored += o.censored;
}

}  // namespace detail

// Mean of score(sample) over paths; censored paths score the midpoint of [0, censored_bound].
inline McEstimate mc_estimate(const ExitSpec& spec, const ModelParams& params, const McConfig& cfg,
                              const std::function<double(const ExitSample&)>& score,
                              double censored_bound) {
  aimd::validate(spec);
  require_normalized(params);
  cfg.validate();
  const double cap = cfg.resolved_cap();
  const std::uint64_t n_chunks = (cfg.n_paths + cfg.chunk - 1) / cfg.chunk;
  std::vector<detail::ChunkStats> stats(n_chunks);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&]() {
    for (std::uint64_t ci = next++; ci < n_chunks; ci = next++) {
      detail::ChunkStats cs;
      const std::uint64_t begin = ci * cfg.chunk;
      const std::uint64_t end = std::min(cfg.n_paths, begin + cfg.chunk);
      for (std::uint64_t i = begin; i < end; ++i) {
        const ExitSample s = simulate_exit(spec, params, i, cfg.seed, cap);
        double v;
        if (s.side == Side::Censored) {
          v = 0.5 * censored_bound;
          ++cs.censored;
        } else {
          v = score(s);
        }
        ++cs.n;
        const double delta = v - cs.mean;
        cs.mean += delta / static_cast<double>(cs.n);
        cs.m2 += delta * (v - cs.mean);
      }
      stats[ci] = cs;
    }
  };
  const unsigned nt = static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads, n_chunks));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  detail::ChunkStats total;
  for (const auto& cs : stats) detail::merge(total, cs);

  McEstimate est;
  est.n_paths = total.n;
  est.n_censored = total.censored;
  est.seed = cfg.seed;
  est.mean = total.mean;
  const double n = static_cast<double>(total.n);
  const double var = total.n > 1 ? total.m2 / (n - 1.0) : 0.0;
  est.std_error = std::sqrt(std::max(var, 0.0) / n) +
                  static_cast<double>(total.censored) / n * censored_bound;
  return est;
}

inline McEstimate mc_lst(const ExitSpec& spec, const ModelParams& params, const McConfig& cfg) {
  const double w = cfg.w.w;
  const Side want = target_side(spec.kind);
  auto score = [w, want](const ExitSample& s) {
    if (s.side != want) return 0.0;
    return w == 0.0 ? 1.0 : std::exp(-w * s.tau);
  };
  return mc_estimate(spec, params, cfg, score, std::exp(-w * cfg.resolved_cap()));
}

// Frequency of {running supremum at the drawdown stop > y}.
inline McEstimate mc_supremum_survival(const ExitSpec& spec, const ModelParams& params, double y,
                                       const McConfig& cfg) {
  if (spec.kind != ExitKind::Drawdown) throw ValidationError("supremum survival needs a drawdown spec");
  auto score = [y](const ExitSample& s) { return s.at_exit.sup > y ? 1.0 : 0.0; };
  return mc_estimate(spec, params, cfg, score, 1.0);
}

}  // namespace aimd::sim
