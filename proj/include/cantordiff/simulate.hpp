#pragma once

// Monte Carlo realisation of the labelled M-ary tree behind a random Cantor
// set, lag histograms of two independent samples, and per-level statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "cantordiff/error.hpp"
#include "cantordiff/parallel.hpp"
#include "cantordiff/rng.hpp"
#include "cantordiff/spec.hpp"
#include "cantordiff/spectrum.hpp"

namespace cantordiff {

inline constexpr double kDefaultSurvivorCap = 1e7;

/// Survivor sets S_0..S_n of one realisation; level n holds sorted indices in
/// [0, M^n) whose base-M digits are the path from the root.
struct CantorSample {
  int base = 2;
  std::vector<std::vector<std::uint64_t>> levels;

  int max_level() const noexcept { return static_cast<int>(levels.size()) - 1; }
  const std::vector<std::uint64_t>& at(int level) const {
    if (level < 0 || level > max_level()) {
      throw std::out_of_range("sample has no level " + std::to_string(level));
    }
    return levels[static_cast<std::size_t>(level)];
  }
};

/// Fails fast when the expected survivor count at some level exceeds `cap`.
inline void check_survivor_budget(const std::vector<double>& p, int n_max, double cap) {
  const double mean = CantorSpec::sum(p);
  double expected = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    expected *= mean;
    if (expected > cap) {
      throw BudgetExceeded("expected survivors at level " + std::to_string(n) + " (" +
                           std::to_string(expected) + ") exceed the cap of " +
                           std::to_string(cap));
    }
  }
}

/// Child d of a survivor is kept with probability p_d, independently.
inline CantorSample sample(const std::vector<double>& p, int n_max, const CounterRng& rng,
                           std::uint64_t trial, int side, double cap = kDefaultSurvivorCap) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const int m = static_cast<int>(p.size());
  checked_power(m, n_max);
  check_survivor_budget(p, n_max, cap);
  CantorSample s;
  s.base = m;
  s.levels.reserve(static_cast<std::size_t>(n_max) + 1);
  s.levels.push_back({0});
  for (int n = 1; n <= n_max; ++n) {
    std::vector<std::uint64_t> next;
    for (std::uint64_t parent : s.levels.back()) {
      for (int d = 0; d < m; ++d) {
        const std::uint64_t node = parent * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(d);
        if (rng.uniform(trial, side, n, node) < p[static_cast<std::size_t>(d)]) next.push_back(node);
      }
    }
    s.levels.push_back(std::move(next));
  }
  return s;
}

enum class HistogramStrategy { Auto, Direct, SortedMerge, Convolution };

inline const char* to_string(HistogramStrategy s) noexcept {
  switch (s) {
    case HistogramStrategy::Direct: return "direct";
    case HistogramStrategy::SortedMerge: return "sorted-merge";
    case HistogramStrategy::Convolution: return "convolution";
    default: return "auto";
  }
}

inline constexpr std::uint64_t kDirectPairLimit = 1'000'000;
inline constexpr std::uint64_t kConvolutionMaxColumns = std::uint64_t{1} << 22;

/// Counts of index differences t = i - j, i in S_n of F1, j in S_n of F2.
/// An R-triangle with lag t sits in the column at signed offset t, an
/// L-triangle in the column at offset t - 1.
struct ColumnHistogram {
  int level = 0;
  std::uint64_t columns_per_side = 1;
  std::vector<std::pair<std::int64_t, std::uint64_t>> lags;  // sorted by lag, counts > 0
  HistogramStrategy strategy = HistogramStrategy::Direct;

  std::uint64_t lag_count(std::int64_t t) const {
    auto it = std::lower_bound(lags.begin(), lags.end(), t,
                               [](const auto& e, std::int64_t v) { return e.first < v; });
    return it != lags.end() && it->first == t ? it->second : 0;
  }
  std::uint64_t z_r(const ColumnId& c) const { return lag_count(column_offset(c, columns_per_side)); }
  std::uint64_t z_l(const ColumnId& c) const {
    return lag_count(column_offset(c, columns_per_side) + 1);
  }
  /// Sum of z_L + z_R over every column.
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (const auto& [t, c] : lags) s += c;
    return 2 * s;
  }
};

namespace detail {

inline void run_length(std::vector<std::int64_t>& values,
                       std::vector<std::pair<std::int64_t, std::uint64_t>>& out) {
  std::sort(values.begin(), values.end());
  for (std::size_t a = 0; a < values.size();) {
    std::size_t b = a;
    while (b < values.size() && values[b] == values[a]) ++b;
    out.emplace_back(values[a], b - a);
    a = b;
  }
}

inline std::vector<std::pair<std::int64_t, std::uint64_t>> lags_direct(
    const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::vector<std::int64_t> diffs;
  diffs.reserve(a.size() * b.size());
  for (auto i : a)
    for (auto j : b) diffs.push_back(static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j));
  std::vector<std::pair<std::int64_t, std::uint64_t>> out;
  run_length(diffs, out);
  return out;
}

/// k-way merge of the |a| ascending streams i - b[last..0].
inline std::vector<std::pair<std::int64_t, std::uint64_t>> lags_sorted_merge(
    const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  std::vector<std::pair<std::int64_t, std::uint64_t>> out;
  if (a.empty() || b.empty()) return out;
  using Entry = std::tuple<std::int64_t, std::size_t, std::size_t>;  // lag, stream, offset into b
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto lag = [&](std::size_t s, std::size_t k) {
    return static_cast<std::int64_t>(a[s]) - static_cast<std::int64_t>(b[b.size() - 1 - k]);
  };
  for (std::size_t s = 0; s < a.size(); ++s) heap.emplace(lag(s, 0), s, 0);
  while (!heap.empty()) {
    auto [t, s, k] = heap.top();
    heap.pop();
    if (!out.empty() && out.back().first == t) {
      ++out.back().second;
    } else {
      out.emplace_back(t, 1);
    }
    if (k + 1 < b.size()) heap.emplace(lag(s, k + 1), s, k + 1);
  }
  return out;
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Cross-correlation of the two indicator vectors by real FFT.
inline std::vector<std::pair<std::int64_t, std::uint64_t>> lags_convolution(
    const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b, std::uint64_t n) {
  std::vector<std::pair<std::int64_t, std::uint64_t>> out;
  if (a.empty() || b.empty()) return out;
  const std::size_t len = static_cast<std::size_t>(2 * n - 1);
  const std::size_t spectrum_len = len / 2 + 1;
  double* x = fftw_alloc_real(len);
  double* y = fftw_alloc_real(len);
  fftw_complex* fx = fftw_alloc_complex(spectrum_len);
  fftw_complex* fy = fftw_alloc_complex(spectrum_len);
  std::fill(x, x + len, 0.0);
  std::fill(y, y + len, 0.0);
  for (auto i : a) x[i] = 1.0;
  for (auto j : b) y[n - 1 - j] = 1.0;
  fftw_plan px, py, back;
  {
    std::lock_guard lock(fftw_planner_mutex());
    px = fftw_plan_dft_r2c_1d(static_cast<int>(len), x, fx, FFTW_ESTIMATE);
    py = fftw_plan_dft_r2c_1d(static_cast<int>(len), y, fy, FFTW_ESTIMATE);
    back = fftw_plan_dft_c2r_1d(static_cast<int>(len), fx, x, FFTW_ESTIMATE);
  }
  fftw_execute(px);
  fftw_execute(py);
  for (std::size_t k = 0; k < spectrum_len; ++k) {
    const double re = fx[k][0] * fy[k][0] - fx[k][1] * fy[k][1];
    const double im = fx[k][0] * fy[k][1] + fx[k][1] * fy[k][0];
    fx[k][0] = re;
    fx[k][1] = im;
  }
  fftw_execute(back);
  double worst = 0.0;
  for (std::size_t m = 0; m < len; ++m) {
    const double v = x[m] / static_cast<double>(len);
    const double r = std::nearbyint(v);
    worst = std::max(worst, std::abs(v - r));
    if (r >= 1.0) out.emplace_back(static_cast<std::int64_t>(m) - static_cast<std::int64_t>(n - 1),
                                   static_cast<std::uint64_t>(r));
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(px);
    fftw_destroy_plan(py);
    fftw_destroy_plan(back);
  }
  fftw_free(x);
  fftw_free(y);
  fftw_free(fx);
  fftw_free(fy);
  if (worst >= 0.25) {
    throw InconsistencyError("FFT lag counts are not integral (residual " + std::to_string(worst) + ")");
  }
  return out;
}

}  // namespace detail

inline ColumnHistogram column_histogram(const CantorSample& s1, const CantorSample& s2, int level,
                                        HistogramStrategy strategy = HistogramStrategy::Auto) {
  if (s1.base != s2.base) throw std::invalid_argument("samples have different bases");
  const auto& a = s1.at(level);
  const auto& b = s2.at(level);
  ColumnHistogram h;
  h.level = level;
  h.columns_per_side = checked_power(s1.base, level);
  const std::uint64_t n = h.columns_per_side;
  if (strategy == HistogramStrategy::Auto) {
    const auto pairs = static_cast<std::uint64_t>(a.size()) * b.size();
    const bool dense = 2 * a.size() > n && 2 * b.size() > n;
    if (pairs <= kDirectPairLimit) {
      strategy = HistogramStrategy::Direct;
    } else if (dense && n <= kConvolutionMaxColumns) {
      strategy = HistogramStrategy::Convolution;
    } else {
      strategy = HistogramStrategy::SortedMerge;
    }
  }
  h.strategy = strategy;
  switch (strategy) {
    case HistogramStrategy::Direct: h.lags = detail::lags_direct(a, b); break;
    case HistogramStrategy::SortedMerge: h.lags = detail::lags_sorted_merge(a, b); break;
    case HistogramStrategy::Convolution: h.lags = detail::lags_convolution(a, b, n); break;
    case HistogramStrategy::Auto: break;
  }
  return h;
}

/// Whether some i in a, j in b have i - j = t. Both inputs sorted.
inline bool has_lag(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                    std::int64_t t) {
  std::size_t k = 0;
  for (auto i : a) {
    const std::int64_t target = static_cast<std::int64_t>(i) - t;
    while (k < b.size() && static_cast<std::int64_t>(b[k]) < target) ++k;
    if (k == b.size()) return false;
    if (static_cast<std::int64_t>(b[k]) == target) return true;
  }
  return false;
}

/// No triangle at all in C_w or C_w^- at this level.
inline bool column_pair_empty(const std::vector<std::uint64_t>& a,
                              const std::vector<std::uint64_t>& b, std::uint64_t w,
                              std::uint64_t n) {
  const auto t = static_cast<std::int64_t>(w);
  const auto nn = static_cast<std::int64_t>(n);
  for (std::int64_t lag : {t, t + 1, t - nn, t + 1 - nn}) {
    if (has_lag(a, b, lag)) return false;
  }
  return true;
}

struct LevelStats {
  int level = 0;
  std::uint64_t trials = 0;
  double survivors_mean = 0.0;
  double survivors_var = 0.0;
  double survival_rate = 0.0;
  std::optional<double> dim_estimate;  // mean of log Z_n / (n log M) over surviving trials
  bool operator==(const LevelStats&) const = default;
};

/// Level-1 counts over C_k and C_k^- together.
struct ColumnMean {
  int k = 0;
  double z_l_mean = 0.0, z_l_se = 0.0;
  double z_r_mean = 0.0, z_r_se = 0.0;
  double expected_l = 0.0, expected_r = 0.0;  // gamma_{k+1}, gamma_k
  bool operator==(const ColumnMean&) const = default;
};

/// Fraction of trials with nothing in C_w or C_w^-, w = k k ... k.
struct ConstantColumnEmpty {
  int level = 0;
  int digit = 0;
  double empty_fraction = 0.0;
  bool operator==(const ConstantColumnEmpty&) const = default;
};

struct SimulationStats {
  int base = 2;
  int levels = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<LevelStats> f1, f2;
  std::optional<double> dimension_f1, dimension_f2;  // final level
  std::vector<ColumnMean> level1_columns;
  std::vector<ConstantColumnEmpty> constant_columns;
  bool operator==(const SimulationStats&) const = default;
};

struct ExperimentOptions {
  unsigned threads = 1;
  double survivor_cap = kDefaultSurvivorCap;
  bool column_stats = true;
};

namespace detail {

struct TrialRecord {
  std::vector<std::uint64_t> z1, z2;
  std::vector<std::uint64_t> zl, zr;      // level-1, per digit
  std::vector<std::uint8_t> empty;        // (level - 1) * M + digit
};

inline std::vector<LevelStats> level_stats(const std::vector<TrialRecord>& rec, bool first, int levels,
                                           int base) {
  std::vector<LevelStats> out;
  const double t = static_cast<double>(rec.size());
  for (int n = 0; n <= levels; ++n) {
    LevelStats s;
    s.level = n;
    s.trials = rec.size();
    double sum = 0.0, alive = 0.0, dim = 0.0;
    for (const auto& r : rec) {
      const double z = static_cast<double>((first ? r.z1 : r.z2)[static_cast<std::size_t>(n)]);
      sum += z;
      if (z > 0) {
        alive += 1;
        if (n > 0) dim += std::log(z) / (n * std::log(static_cast<double>(base)));
      }
    }
    s.survivors_mean = t > 0 ? sum / t : 0.0;
    double ss = 0.0;
    for (const auto& r : rec) {
      const double d = static_cast<double>((first ? r.z1 : r.z2)[static_cast<std::size_t>(n)]) - s.survivors_mean;
      ss += d * d;
    }
    s.survivors_var = t > 1 ? ss / (t - 1) : 0.0;
    s.survival_rate = t > 0 ? alive / t : 0.0;
    if (n > 0 && alive > 0) s.dim_estimate = dim / alive;
    out.push_back(s);
  }
  return out;
}

inline std::pair<double, double> mean_se(const std::vector<TrialRecord>& rec,
                                         std::vector<std::uint64_t> TrialRecord::*field, int k) {
  const double t = static_cast<double>(rec.size());
  double sum = 0.0;
  for (const auto& r : rec) sum += static_cast<double>((r.*field)[static_cast<std::size_t>(k)]);
  const double mean = sum / t;
  double ss = 0.0;
  for (const auto& r : rec) {
    const double d = static_cast<double>((r.*field)[static_cast<std::size_t>(k)]) - mean;
    ss += d * d;
  }
  const double var = t > 1 ? ss / (t - 1) : 0.0;
  return {mean, std::sqrt(var / t)};
}

}  // namespace detail

inline constexpr std::size_t kTrialsPerChunk = 256;

/// Independent F1/F2 streams per trial (side 1 and 2). Per-trial records are
/// reduced in trial order, so the result does not depend on `threads`.
inline SimulationStats run_experiment(const CantorSpec& spec, int n_max, std::uint64_t trials,
                                      std::uint64_t seed, const ExperimentOptions& opts = {}) {
  if (n_max < 0) throw std::invalid_argument("levels must be >= 0");
  if (trials == 0) throw std::invalid_argument("trials must be positive");
  const int m = spec.base();
  checked_power(m, n_max);
  check_survivor_budget(spec.p(), n_max, opts.survivor_cap);
  check_survivor_budget(spec.q(), n_max, opts.survivor_cap);

  const CounterRng rng(seed);
  std::vector<detail::TrialRecord> records(static_cast<std::size_t>(trials));
  const std::size_t chunks = (records.size() + kTrialsPerChunk - 1) / kTrialsPerChunk;
  parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
    const std::size_t end = std::min(records.size(), (c + 1) * kTrialsPerChunk);
    for (std::size_t t = c * kTrialsPerChunk; t < end; ++t) {
      const CantorSample s1 = sample(spec.p(), n_max, rng, t, 1, opts.survivor_cap);
      const CantorSample s2 = sample(spec.q(), n_max, rng, t, 2, opts.survivor_cap);
      auto& r = records[t];
      for (const auto& lv : s1.levels) r.z1.push_back(lv.size());
      for (const auto& lv : s2.levels) r.z2.push_back(lv.size());
      if (!opts.column_stats || n_max < 1) continue;
      const ColumnHistogram h = column_histogram(s1, s2, 1);
      const auto mm = static_cast<std::int64_t>(m);
      for (int k = 0; k < m; ++k) {
        r.zl.push_back(h.lag_count(k + 1) + h.lag_count(k + 1 - mm));
        r.zr.push_back(h.lag_count(k) + h.lag_count(k - mm));
      }
      for (int n = 1; n <= n_max; ++n) {
        const std::uint64_t cols = checked_power(m, n);
        const std::uint64_t repunit = (cols - 1) / static_cast<std::uint64_t>(m - 1);
        for (int k = 0; k < m; ++k) {
          r.empty.push_back(column_pair_empty(s1.at(n), s2.at(n),
                                              static_cast<std::uint64_t>(k) * repunit, cols));
        }
      }
    }
  });

  SimulationStats s;
  s.base = m;
  s.levels = n_max;
  s.trials = trials;
  s.seed = seed;
  s.f1 = detail::level_stats(records, true, n_max, m);
  s.f2 = detail::level_stats(records, false, n_max, m);
  s.dimension_f1 = s.f1.back().dim_estimate;
  s.dimension_f2 = s.f2.back().dim_estimate;
  if (opts.column_stats && n_max >= 1) {
    const GammaVector g = correlations(spec);
    for (int k = 0; k < m; ++k) {
      ColumnMean c;
      c.k = k;
      std::tie(c.z_l_mean, c.z_l_se) = detail::mean_se(records, &detail::TrialRecord::zl, k);
      std::tie(c.z_r_mean, c.z_r_se) = detail::mean_se(records, &detail::TrialRecord::zr, k);
      c.expected_l = g[static_cast<std::size_t>(k + 1)];
      c.expected_r = g[static_cast<std::size_t>(k)];
      s.level1_columns.push_back(c);
    }
    for (int n = 1; n <= n_max; ++n) {
      for (int k = 0; k < m; ++k) {
        std::uint64_t empty = 0;
        for (const auto& r : records) empty += r.empty[static_cast<std::size_t>((n - 1) * m + k)];
        s.constant_columns.push_back(
            {n, k, static_cast<double>(empty) / static_cast<double>(trials)});
      }
    }
  }
  return s;
}

/// Per-level CSV for F1.
inline void write_csv(std::ostream& os, const SimulationStats& s) {
  os << "level,trials,survivors_mean,survivors_var,survival_rate,dim_estimate\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& l : s.f1) {
    os << l.level << ',' << l.trials << ',' << num(l.survivors_mean) << ','
       << num(l.survivors_var) << ',' << num(l.survival_rate) << ','
       << (l.dim_estimate ? num(*l.dim_estimate) : std::string()) << '\n';
  }
}

/// ||M(prefix k^m)||_1 for m = 1..m_max, the Markov bound on P(Z_m > 0).
inline std::vector<double> expected_column_decay(const CantorSpec& spec, const Word& prefix, Digit k,
                                                 int m_max) {
  const auto level1 = expectation_matrices(spec);
  ExpectationMatrix acc = word_matrix(level1, prefix);
  const Word single{k};
  const ExpectationMatrix step = word_matrix(level1, single);
  std::vector<double> out;
  for (int m = 1; m <= m_max; ++m) {
    acc = acc * step;
    out.push_back(acc.norm1());
  }
  return out;
}

}  // namespace cantordiff
