#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "tailrv/errors.hpp"
#include "tailrv/rng.hpp"

namespace tailrv {

/// Uniform return type of every Monte Carlo evaluation.
struct MCEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t clipped = 0;

  /// Scale value and stderr by a constant (single multiply each, so exact
  /// homogeneity statements survive at the bit level).
  MCEstimate scaled(double c) const {
    MCEstimate out = *this;
    out.value = c * value;
    out.stderr_ = std::fabs(c) * stderr_;
    return out;
  }
};

inline double combined_stderr(const MCEstimate& a, const MCEstimate& b) {
  return std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
}

struct McOptions {
  std::uint64_t seed = 1;
  int workers = 1;        // stream-splitting worker count; part of the result's identity
  int threads = 0;        // execution threads; 0 = workers. Never affects values.
  double clip_cap = 1e300;  // extended-real H values are clipped here
};

/// Extended-real H values are clipped here; the counter lands in MCEstimate.
struct McCtx {
  std::uint64_t clipped = 0;
  double cap = 1e300;

  double clip(double v) {
    if (v > cap) {
      ++clipped;
      return cap;
    }
    if (v < -cap) {
      ++clipped;
      return -cap;
    }
    return v;
  }
};

namespace detail {

/// Runs fn(w) for w in [0, workers), across up to `threads` OS threads.
/// Worker exceptions are captured and the first (by worker index) is rethrown
/// after every worker finishes, so error behaviour matches the serial path.
template <class Fn>
inline void parallel_workers(int workers, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
  auto guarded = [&](int w) {
    try {
      fn(w);
    } catch (...) {
      errs[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (threads <= 1 || workers == 1) {
    for (int w = 0; w < workers; ++w) guarded(w);
  } else {
    std::vector<std::thread> pool;
    int tc = std::min(threads, workers);
    pool.reserve(static_cast<std::size_t>(tc));
    for (int t = 0; t < tc; ++t)
      pool.emplace_back([&, t] {
        for (int w = t; w < workers; w += tc) guarded(w);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct WorkerAccum {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t n = 0;
  std::uint64_t clipped = 0;
  // prefix checkpoint sums at 1/4 and 1/2 of this worker's quota
  double sum_q1 = 0.0, sum_q2 = 0.0;
  std::uint64_t n_q1 = 0, n_q2 = 0;
};

/// Runs kernel n times across `workers` substreams, reduced in worker order.
/// Results are bit-identical for fixed (seed, role, workers) regardless of
/// the execution thread count.
template <class Kernel>
inline std::vector<WorkerAccum> run_workers(const McOptions& opt, std::uint64_t role,
                                            std::uint64_t n, Kernel&& kernel) {
  const int workers = std::max(1, opt.workers);
  const int threads = opt.threads > 0 ? opt.threads : workers;
  std::vector<WorkerAccum> acc(static_cast<std::size_t>(workers));
  Rng base = Rng(opt.seed).derive(role);

  auto work = [&](int w) {
    const std::uint64_t lo = n * static_cast<std::uint64_t>(w) / static_cast<std::uint64_t>(workers);
    const std::uint64_t hi = n * static_cast<std::uint64_t>(w + 1) / static_cast<std::uint64_t>(workers);
    const std::uint64_t quota = hi - lo;
    Rng rng = base.derive(static_cast<std::uint64_t>(w));
    McCtx ctx;
    ctx.cap = opt.clip_cap;
    WorkerAccum& a = acc[static_cast<std::size_t>(w)];
    const std::uint64_t q1 = quota / 4, q2 = quota / 2;
    for (std::uint64_t i = 0; i < quota; ++i) {
      double v = kernel(rng, ctx);
      a.sum += v;
      a.sumsq += v * v;
      ++a.n;
      if (a.n == q1) {
        a.sum_q1 = a.sum;
        a.n_q1 = a.n;
      }
      if (a.n == q2) {
        a.sum_q2 = a.sum;
        a.n_q2 = a.n;
      }
    }
    a.clipped = ctx.clipped;
  };

  parallel_workers(workers, threads, work);
  return acc;
}

inline MCEstimate reduce(const std::vector<WorkerAccum>& acc, std::uint64_t seed) {
  MCEstimate est;
  est.seed = seed;
  double sum = 0.0, sumsq = 0.0;
  for (const auto& a : acc) {  // worker order: deterministic reduction
    sum += a.sum;
    sumsq += a.sumsq;
    est.n += a.n;
    est.clipped += a.clipped;
  }
  if (est.n == 0) return est;
  const auto n = static_cast<double>(est.n);
  est.value = sum / n;
  if (est.n >= 2) {
    double var = (sumsq - sum * sum / n) / (n - 1.0);
    est.stderr_ = var > 0.0 ? std::sqrt(var / n) : 0.0;
  }
  return est;
}

}  // namespace detail

/// Mean and stderr of kernel(rng, ctx) over n deterministic draws.
template <class Kernel>
inline MCEstimate mc_estimate(const McOptions& opt, std::uint64_t role, std::uint64_t n,
                              Kernel&& kernel) {
  if (n < 1) throw error(errc::config, "sample count must be >= 1");
  auto acc = detail::run_workers(opt, role, n, kernel);
  return detail::reduce(acc, opt.seed);
}

/// Running means at n/4, n/2, n; used by the divergence heuristic.
struct RunningMeans {
  double m_quarter = 0.0, m_half = 0.0, m_full = 0.0;
};

template <class Kernel>
inline std::pair<MCEstimate, RunningMeans> mc_estimate_with_checkpoints(const McOptions& opt,
                                                                        std::uint64_t role,
                                                                        std::uint64_t n,
                                                                        Kernel&& kernel) {
  auto acc = detail::run_workers(opt, role, n, kernel);
  RunningMeans rm;
  double s1 = 0, s2 = 0;
  std::uint64_t n1 = 0, n2 = 0;
  for (const auto& a : acc) {
    s1 += a.sum_q1;
    n1 += a.n_q1;
    s2 += a.sum_q2;
    n2 += a.n_q2;
  }
  auto est = detail::reduce(acc, opt.seed);
  rm.m_quarter = n1 ? s1 / static_cast<double>(n1) : 0.0;
  rm.m_half = n2 ? s2 / static_cast<double>(n2) : 0.0;
  rm.m_full = est.value;
  return {est, rm};
}

/// Weighted mean  sum(w g)/sum(w)  with delta-method stderr.
struct WeightedMean {
  double mean = 0.0;
  double se = 0.0;
  double weight_sum = 0.0;
  std::uint64_t n = 0;
};

inline WeightedMean weighted_mean(const std::vector<double>& w, const std::vector<double>& g) {
  WeightedMean out;
  out.n = w.size();
  double sw = 0.0, swg = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    swg += w[i] * g[i];
  }
  out.weight_sum = sw;
  if (sw <= 0.0) return out;
  out.mean = swg / sw;
  double s2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double r = w[i] * (g[i] - out.mean);
    s2 += r * r;
  }
  const auto n = static_cast<double>(w.size());
  out.se = std::sqrt(s2 / (n - 1.0)) * std::sqrt(n) / sw;
  return out;
}

}  // namespace tailrv
