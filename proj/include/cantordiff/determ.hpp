#pragma once

// Deterministic (0-1) case: reduce level-1 matrices to 0-1 patterns, iterate
// the set map G(C) = {(T T')^red : T, T' in C} to its attractor, and decide
// interval existence by whether the zero matrix T0 lies in the attractor.

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cantordiff/error.hpp"
#include "cantordiff/parallel.hpp"
#include "cantordiff/spec.hpp"
#include "cantordiff/spectrum.hpp"

namespace cantordiff {

/// 0-1 matrix [[a,b],[c,d]] coded as a + 2b + 4c + 8d.
struct ReducedMatrix {
  std::uint8_t code = 0;

  static constexpr ReducedMatrix from_bits(bool a, bool b, bool c, bool d) noexcept {
    return {static_cast<std::uint8_t>(a | (b << 1) | (c << 2) | (d << 3))};
  }
  constexpr bool a() const noexcept { return code & 1; }
  constexpr bool b() const noexcept { return code & 2; }
  constexpr bool c() const noexcept { return code & 4; }
  constexpr bool d() const noexcept { return code & 8; }
  /// Some row holds two ones.
  constexpr bool has_full_row() const noexcept { return (a() && b()) || (c() && d()); }

  constexpr bool operator==(const ReducedMatrix&) const = default;
};

inline constexpr ReducedMatrix kT0{0};

/// Entrywise zero/nonzero indicator of a nonnegative integer matrix.
inline ReducedMatrix reduce(const std::array<std::int64_t, 4>& m) {
  for (auto v : m) {
    if (v < 0) throw std::invalid_argument("reduce: negative entry");
  }
  return ReducedMatrix::from_bits(m[0] != 0, m[1] != 0, m[2] != 0, m[3] != 0);
}

inline ReducedMatrix reduce(const ExpectationMatrix& m) {
  if (!m.nonnegative()) throw std::invalid_argument("reduce: negative entry");
  return ReducedMatrix::from_bits(m.ll > 0, m.lr > 0, m.rl > 0, m.rr > 0);
}

constexpr ReducedMatrix boolean_product(ReducedMatrix x, ReducedMatrix y) noexcept {
  return ReducedMatrix::from_bits((x.a() && y.a()) || (x.b() && y.c()),
                                  (x.a() && y.b()) || (x.b() && y.d()),
                                  (x.c() && y.a()) || (x.d() && y.c()),
                                  (x.c() && y.b()) || (x.d() && y.d()));
}

namespace detail {
constexpr std::array<std::array<std::uint8_t, 16>, 16> make_product_table() {
  std::array<std::array<std::uint8_t, 16>, 16> t{};
  for (int x = 0; x < 16; ++x)
    for (int y = 0; y < 16; ++y)
      t[x][y] = boolean_product({static_cast<std::uint8_t>(x)}, {static_cast<std::uint8_t>(y)}).code;
  return t;
}
inline constexpr auto kProductTable = make_product_table();
}  // namespace detail

/// Subset of the sixteen reduced matrices.
struct MatrixSet {
  std::uint16_t mask = 0;

  bool contains(ReducedMatrix t) const noexcept { return (mask >> t.code) & 1u; }
  void insert(ReducedMatrix t) noexcept { mask = static_cast<std::uint16_t>(mask | (1u << t.code)); }
  bool empty() const noexcept { return mask == 0; }
  bool subset_of(MatrixSet o) const noexcept { return (mask & ~o.mask) == 0; }
  std::vector<int> codes() const {
    std::vector<int> out;
    for (int j = 0; j < 16; ++j)
      if ((mask >> j) & 1u) out.push_back(j);
    return out;
  }
  static MatrixSet of(std::initializer_list<int> codes) {
    MatrixSet s;
    for (int c : codes) s.insert({static_cast<std::uint8_t>(c)});
    return s;
  }

  bool operator==(const MatrixSet&) const = default;
};

/// G(C) = {(T T')^red : T, T' in C}; G of the empty set is empty.
inline MatrixSet g_step(MatrixSet c) noexcept {
  MatrixSet out;
  for (int x = 0; x < 16; ++x) {
    if (!((c.mask >> x) & 1u)) continue;
    for (int y = 0; y < 16; ++y) {
      if ((c.mask >> y) & 1u) out.mask = static_cast<std::uint16_t>(out.mask | (1u << detail::kProductTable[x][y]));
    }
  }
  return out;
}

struct AttractorReport {
  MatrixSet attractor;  // union of the sets on the cycle
  std::vector<MatrixSet> cycle;
  int preperiod = 0;
  int period = 1;
  std::vector<MatrixSet> trajectory;  // visited sets, first repetition excluded

  bool operator==(const AttractorReport&) const = default;
};

/// Iterates G from `initial` until a set repeats. General cycle detection, so
/// periods above one would be reported rather than assumed away.
inline AttractorReport attractor(MatrixSet initial) {
  AttractorReport r;
  std::unordered_map<std::uint16_t, int> first_seen;
  MatrixSet s = initial;
  while (true) {
    auto [it, fresh] = first_seen.emplace(s.mask, static_cast<int>(r.trajectory.size()));
    if (!fresh) {
      r.preperiod = it->second;
      r.period = static_cast<int>(r.trajectory.size()) - it->second;
      break;
    }
    r.trajectory.push_back(s);
    s = g_step(s);
  }
  for (int i = r.preperiod; i < static_cast<int>(r.trajectory.size()); ++i) {
    r.cycle.push_back(r.trajectory[static_cast<std::size_t>(i)]);
    r.attractor.mask = static_cast<std::uint16_t>(r.attractor.mask | r.trajectory[static_cast<std::size_t>(i)].mask);
  }
  return r;
}

enum class DeterministicVerdict { Interval, NoInterval };

inline const char* to_string(DeterministicVerdict v) noexcept {
  return v == DeterministicVerdict::Interval ? "Interval" : "NoInterval";
}

struct DeterministicDecision {
  DeterministicVerdict verdict = DeterministicVerdict::NoInterval;
  bool degenerate = false;  // entry sum <= 1: at most a single point
  MatrixSet initial;
  AttractorReport report;
  bool operator==(const DeterministicDecision&) const = default;
};

inline void require_deterministic(const CantorSpec& spec) {
  if (!spec.is_deterministic()) {
    throw std::invalid_argument("deterministic decision needs every probability in {0,1}");
  }
}

inline MatrixSet initial_set(const CantorSpec& spec) {
  MatrixSet s;
  for (int k = 0; k < spec.base(); ++k) s.insert(reduce(expectation_matrix(spec, k)));
  return s;
}

/// NoInterval iff T0 lies in the attractor of G started from the reduced
/// level-1 matrices. Vectors with entry sum <= 1 are answered directly.
inline DeterministicDecision decide_deterministic(const CantorSpec& spec) {
  require_deterministic(spec);
  DeterministicDecision d;
  d.initial = initial_set(spec);
  d.report = attractor(d.initial);
  if (CantorSpec::sum(spec.p()) <= 1.0 || CantorSpec::sum(spec.q()) <= 1.0) {
    d.degenerate = true;
    d.verdict = DeterministicVerdict::NoInterval;
    return d;
  }
  d.verdict = d.report.attractor.contains(kT0) ? DeterministicVerdict::NoInterval
                                               : DeterministicVerdict::Interval;
  return d;
}

namespace detail {

/// Survivor digit sets of a 0-1 vector are products, so the set of index
/// differences i - j at level n is M * D_{n-1} + D_1. Returned as a bitmap
/// over lags in [-(M^n - 1), M^n - 1], offset by M^n.
inline std::vector<bool> deterministic_lags(const CantorSpec& spec, int level) {
  const int m = spec.base();
  const auto& p = spec.p();
  const auto& q = spec.q();
  std::vector<std::int64_t> first;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (p[a] == 1.0 && q[b] == 1.0) first.push_back(a - b);
  std::vector<std::int64_t> cur{0};
  std::int64_t span = 1;
  for (int l = 1; l <= level; ++l) {
    const std::int64_t next_span = span * m;
    std::vector<bool> seen(static_cast<std::size_t>(2 * next_span), false);
    std::vector<std::int64_t> next;
    for (auto d : cur) {
      for (auto e : first) {
        const std::int64_t v = d * m + e;
        const auto slot = static_cast<std::size_t>(v + next_span);
        if (!seen[slot]) {
          seen[slot] = true;
          next.push_back(v);
        }
      }
    }
    cur = std::move(next);
    span = next_span;
  }
  std::vector<bool> out(static_cast<std::size_t>(2 * span), false);
  for (auto d : cur) out[static_cast<std::size_t>(d + span)] = true;
  return out;
}

}  // namespace detail

/// A column word w of some level holding no triangle at all: both C_w and
/// C_w^- are empty (Z^L(w) + Z^R(w) = 0).
struct EmptyColumnWitness {
  int level = 0;
  std::uint64_t index = 0;
  Word digits;
  bool operator==(const EmptyColumnWitness&) const = default;
};

/// Occupancy of every one-sided column at `level`, indexed by signed column
/// offset + M^level (so negative columns come first).
inline std::vector<bool> column_occupancy(const CantorSpec& spec, int level) {
  require_deterministic(spec);
  const std::uint64_t n = checked_power(spec.base(), level);
  const auto lags = detail::deterministic_lags(spec, level);
  std::vector<bool> occupied(static_cast<std::size_t>(2 * n), false);
  for (std::size_t t = 0; t < lags.size(); ++t) {
    if (!lags[t]) continue;
    const auto lag = static_cast<std::int64_t>(t) - static_cast<std::int64_t>(n);
    for (auto type : {TriangleType::L, TriangleType::R}) {
      const ColumnId c = column_of_lag(level, n, type, lag);
      occupied[static_cast<std::size_t>(column_offset(c, n) + static_cast<std::int64_t>(n))] = true;
    }
  }
  return occupied;
}

inline std::optional<EmptyColumnWitness> first_empty_column(const CantorSpec& spec, int level) {
  const std::uint64_t n = checked_power(spec.base(), level);
  const auto occupied = column_occupancy(spec, level);
  for (std::uint64_t w = 0; w < n; ++w) {
    if (!occupied[static_cast<std::size_t>(n + w)] && !occupied[static_cast<std::size_t>(w)]) {
      return EmptyColumnWitness{level, w, digits_of(w, spec.base(), level)};
    }
  }
  return std::nullopt;
}

inline constexpr int kDefaultEmptyColumnCap = 6;

/// Brute-force occupancy scan, levels 1..cap. Throws InconsistencyError when
/// no empty column is found although T0 lies in the attractor.
inline std::optional<EmptyColumnWitness> empty_column_depth(const CantorSpec& spec,
                                                            int cap = kDefaultEmptyColumnCap) {
  require_deterministic(spec);
  for (int level = 1; level <= cap; ++level) {
    if (auto w = first_empty_column(spec, level)) return w;
  }
  if (attractor(initial_set(spec)).attractor.contains(kT0)) {
    throw InconsistencyError("T0 lies in the attractor but no empty column appears up to level " +
                             std::to_string(cap));
  }
  return std::nullopt;
}

struct AttractorScan {
  std::uint32_t starts = 0;
  int max_period = 0;
  int max_preperiod = 0;
  std::uint32_t non_fixed = 0;  // starts whose attractor has period > 1
  bool operator==(const AttractorScan&) const = default;
};

/// Runs G from every one of the 2^16 initial sets, reusing a precomputed
/// table of G over all masks.
inline AttractorScan scan_all_attractors(unsigned threads = 1) {
  constexpr std::size_t kSets = 1u << 16;
  std::vector<std::uint16_t> g(kSets);
  constexpr std::size_t kChunks = 64;
  parallel_chunks(kChunks, threads, [&](std::size_t c) {
    for (std::size_t s = c * (kSets / kChunks); s < (c + 1) * (kSets / kChunks); ++s)
      g[s] = g_step({static_cast<std::uint16_t>(s)}).mask;
  });
  std::vector<AttractorScan> partial(kChunks);
  parallel_chunks(kChunks, threads, [&](std::size_t c) {
    auto& out = partial[c];
    std::vector<int> seen_at(kSets, -1);
    std::vector<std::uint16_t> visited;
    for (std::size_t s = c * (kSets / kChunks); s < (c + 1) * (kSets / kChunks); ++s) {
      visited.clear();
      std::uint16_t x = static_cast<std::uint16_t>(s);
      while (seen_at[x] < 0) {
        seen_at[x] = static_cast<int>(visited.size());
        visited.push_back(x);
        x = g[x];
      }
      const int pre = seen_at[x];
      const int period = static_cast<int>(visited.size()) - pre;
      for (auto v : visited) seen_at[v] = -1;
      ++out.starts;
      out.max_period = std::max(out.max_period, period);
      out.max_preperiod = std::max(out.max_preperiod, pre);
      if (period != 1) ++out.non_fixed;
    }
  });
  AttractorScan total;
  for (const auto& p : partial) {
    total.starts += p.starts;
    total.max_period = std::max(total.max_period, p.max_period);
    total.max_preperiod = std::max(total.max_preperiod, p.max_preperiod);
    total.non_fixed += p.non_fixed;
  }
  return total;
}

/// Codes with at least one 1 in each row, the only attractor members left
/// once Delta-pairs never occur and T0 is excluded.
inline const MatrixSet kRowCoveringSet = MatrixSet::of({5, 6, 9, 10});

struct CrossValidation {
  int max_base = 0;
  int vectors = 0;
  int no_interval = 0;
  int mismatches = 0;              // NoInterval vs empty column at level <= 3
  int occupancy_checked = 0;       // Interval with attractor in {T5,T6,T9,T10}
  int occupancy_failures = 0;      // some one-sided column empty at level <= 4
  int case2_checked = 0;           // attractor avoids T0 and full rows
  int case2_failures = 0;          // ... yet not inside {T5,T6,T9,T10}
  std::vector<std::string> failures;
  bool ok() const noexcept {
    return mismatches == 0 && occupancy_failures == 0 && case2_failures == 0;
  }
  bool operator==(const CrossValidation&) const = default;
};

/// Checks the deterministic decision against brute-force column occupancy for
/// every 0-1 vector with 2 <= M <= max_base and entry sum >= 2.
inline CrossValidation cross_validate_deterministic(int max_base = 8, int witness_level = 3,
                                                    int occupancy_level = 4) {
  CrossValidation cv;
  cv.max_base = max_base;
  auto describe = [](const std::vector<double>& p) {
    std::string s;
    for (double x : p) s += (s.empty() ? "" : ",") + std::to_string(static_cast<int>(x));
    return s;
  };
  for (int m = 2; m <= max_base; ++m) {
    for (std::uint32_t bits = 0; bits < (1u << m); ++bits) {
      if (std::popcount(bits) < 2) continue;
      std::vector<double> p(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) p[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? 1.0 : 0.0;
      const CantorSpec spec = CantorSpec::create(p);
      ++cv.vectors;
      const auto dec = decide_deterministic(spec);
      const bool no_interval = dec.verdict == DeterministicVerdict::NoInterval;
      cv.no_interval += no_interval;

      std::optional<EmptyColumnWitness> witness;
      for (int level = 1; level <= witness_level && !witness; ++level)
        witness = first_empty_column(spec, level);
      if (no_interval != witness.has_value()) {
        ++cv.mismatches;
        cv.failures.push_back("verdict/empty-column mismatch for (" + describe(p) + ")");
      }

      const MatrixSet a = dec.report.attractor;
      if (!no_interval && a.subset_of(kRowCoveringSet)) {
        ++cv.occupancy_checked;
        for (int level = 1; level <= occupancy_level; ++level) {
          const auto occ = column_occupancy(spec, level);
          bool all = true;
          for (bool b : occ) all = all && b;
          if (!all) {
            ++cv.occupancy_failures;
            cv.failures.push_back("empty one-sided column at level " + std::to_string(level) +
                                  " for (" + describe(p) + ")");
            break;
          }
        }
      }

      bool full_row = false;
      for (int code : a.codes()) full_row = full_row || ReducedMatrix{static_cast<std::uint8_t>(code)}.has_full_row();
      if (!a.contains(kT0) && !full_row) {
        ++cv.case2_checked;
        if (!a.subset_of(kRowCoveringSet)) {
          ++cv.case2_failures;
          cv.failures.push_back("case-2 attractor outside {T5,T6,T9,T10} for (" + describe(p) + ")");
        }
      }
    }
  }
  return cv;
}

}  // namespace cantordiff
