#pragma once

// Correlations, level-1 expectation matrices and their products over digit
// words, Perron-Frobenius eigenvalues, the higher-order lift of a spec, and
// the map from triangles of the rotated square to projection columns.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cantordiff/spec.hpp"

namespace cantordiff {

using Digit = int;
using Word = std::vector<Digit>;

/// Cyclic correlations gamma_k, k = 0..M-1; index M wraps to 0.
struct GammaVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t k) const { return values[k % values.size()]; }
  double min() const { return *std::min_element(values.begin(), values.end()); }

  bool operator==(const GammaVector&) const = default;
};

/// Expected offspring counts: rows are the source triangle type (L, R),
/// columns the offspring type (L, R).
struct ExpectationMatrix {
  double ll = 0.0, lr = 0.0;
  double rl = 0.0, rr = 0.0;

  static constexpr ExpectationMatrix identity() noexcept { return {1.0, 0.0, 0.0, 1.0}; }

  constexpr ExpectationMatrix operator*(const ExpectationMatrix& o) const noexcept {
    return {ll * o.ll + lr * o.rl, ll * o.lr + lr * o.rr,
            rl * o.ll + rr * o.rl, rl * o.lr + rr * o.rr};
  }

  /// Expected number of L offspring over both source types.
  constexpr double l_column_sum() const noexcept { return ll + rl; }
  /// Expected number of R offspring over both source types.
  constexpr double r_column_sum() const noexcept { return lr + rr; }
  constexpr double trace() const noexcept { return ll + rr; }
  constexpr double det() const noexcept { return ll * rr - lr * rl; }
  double norm1() const noexcept {
    return std::abs(ll) + std::abs(lr) + std::abs(rl) + std::abs(rr);
  }
  bool nonnegative() const noexcept { return ll >= 0 && lr >= 0 && rl >= 0 && rr >= 0; }

  bool operator==(const ExpectationMatrix&) const = default;
};

inline double max_abs_diff(const ExpectationMatrix& a, const ExpectationMatrix& b) noexcept {
  return std::max({std::abs(a.ll - b.ll), std::abs(a.lr - b.lr), std::abs(a.rl - b.rl),
                   std::abs(a.rr - b.rr)});
}

enum class TriangleType { L, R };
enum class Side { Positive, Negative };

struct TriangleAddress {
  int level = 1;
  TriangleType type = TriangleType::R;
  std::uint64_t i = 0;  // first-factor (F1) index in [0, M^level)
  std::uint64_t j = 0;  // second-factor (F2) index in [0, M^level)
};

/// Vertical strip over J_k (positive side) or J_k^- (negative side).
struct ColumnId {
  int level = 1;
  Side side = Side::Positive;
  std::uint64_t index = 0;

  bool operator==(const ColumnId&) const = default;
};

/// M^n, or throws when it does not fit in 62 bits.
inline std::uint64_t checked_power(int base, int exponent) {
  if (base < 2 || exponent < 0) throw std::invalid_argument("checked_power: bad arguments");
  std::uint64_t r = 1;
  for (int e = 0; e < exponent; ++e) {
    if (r > (std::uint64_t{1} << 62) / static_cast<std::uint64_t>(base)) {
      throw std::overflow_error(std::to_string(base) + "^" + std::to_string(exponent) +
                                " exceeds the 62-bit index range");
    }
    r *= static_cast<std::uint64_t>(base);
  }
  return r;
}

/// Base-M digits of index, most significant first, padded to `length`.
inline Word digits_of(std::uint64_t index, int base, int length) {
  Word w(static_cast<std::size_t>(length), 0);
  for (int pos = length - 1; pos >= 0; --pos) {
    w[static_cast<std::size_t>(pos)] = static_cast<Digit>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
  return w;
}

inline std::uint64_t index_of(std::span<const Digit> word, int base) {
  std::uint64_t k = 0;
  for (Digit d : word) k = k * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
  return k;
}

/// gamma_k = sum_j q_j p_{(j+k) mod M}; with q absent this is the cyclic
/// autocorrelation of p.
inline GammaVector correlations(const CantorSpec& spec) {
  const int m = spec.base();
  const auto& p = spec.p();
  const auto& q = spec.q();
  GammaVector g;
  g.values.assign(static_cast<std::size_t>(m), 0.0);
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += q[j] * p[(j + k) % m];
    g.values[static_cast<std::size_t>(k)] = s;
  }
  return g;
}

/// Level-1 matrix of column k. Entries are plain (non-wrapping) difference
/// sums over the M x M grid of first-level squares Q_{i,j}, weighted p_i q_j:
/// LL and LR count triangles in C_k^-, RL and RR in C_k.
inline ExpectationMatrix expectation_matrix(const CantorSpec& spec, int k) {
  const int m = spec.base();
  if (k < 0 || k >= m) {
    throw std::out_of_range("column digit " + std::to_string(k) + " outside [0," +
                            std::to_string(m) + ")");
  }
  const auto& p = spec.p();
  const auto& q = spec.q();
  ExpectationMatrix e{0, 0, 0, 0};
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const double w = p[i] * q[j];
      const int d = i - j;
      if (-d == m - k - 1) e.ll += w;
      if (-d == m - k) e.lr += w;
      if (d == k + 1) e.rl += w;
      if (d == k) e.rr += w;
    }
  }
  return e;
}

/// All M level-1 matrices, indexed by digit.
inline std::vector<ExpectationMatrix> expectation_matrices(const CantorSpec& spec) {
  std::vector<ExpectationMatrix> out;
  out.reserve(static_cast<std::size_t>(spec.base()));
  for (int k = 0; k < spec.base(); ++k) out.push_back(expectation_matrix(spec, k));
  return out;
}

/// Left-to-right product M(k_1)...M(k_n); the empty word gives the identity.
inline ExpectationMatrix word_matrix(std::span<const ExpectationMatrix> level1,
                                     std::span<const Digit> word) {
  ExpectationMatrix acc = ExpectationMatrix::identity();
  for (Digit d : word) {
    if (d < 0 || static_cast<std::size_t>(d) >= level1.size()) {
      throw std::out_of_range("digit " + std::to_string(d) + " outside [0," +
                              std::to_string(level1.size()) + ")");
    }
    acc = acc * level1[static_cast<std::size_t>(d)];
  }
  return acc;
}

inline ExpectationMatrix word_matrix(const CantorSpec& spec, std::span<const Digit> word) {
  const auto level1 = expectation_matrices(spec);
  return word_matrix(level1, word);
}

/// Largest eigenvalue of a nonnegative 2x2 matrix. The discriminant
/// (ll-rr)^2 + 4 lr rl is nonnegative, so the root is real.
inline double pf_eigenvalue(const ExpectationMatrix& m) {
  if (!m.nonnegative()) throw std::invalid_argument("pf_eigenvalue: negative entry");
  const double half_gap = 0.5 * (m.ll - m.rr);
  const double disc = half_gap * half_gap + m.lr * m.rl;
  return 0.5 * m.trace() + std::sqrt(std::max(0.0, disc));
}

inline constexpr std::size_t kDefaultLiftCap = 1'000'000;

/// Base M^n spec with entry p_{i_1}...p_{i_n} at the index whose base-M
/// digits are i_1...i_n. Applied to p and q independently.
inline CantorSpec higher_order(const CantorSpec& spec, int order,
                               std::size_t cap = kDefaultLiftCap) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (order == 1) return spec;
  const int m = spec.base();
  std::uint64_t size = 1;
  for (int e = 0; e < order; ++e) {
    size *= static_cast<std::uint64_t>(m);
    if (size > cap) {
      throw std::length_error("higher_order: M^" + std::to_string(order) +
                              " exceeds the lifted-vector cap of " + std::to_string(cap));
    }
  }
  auto lift = [&](const std::vector<double>& v) {
    std::vector<double> cur = v;
    for (int e = 1; e < order; ++e) {
      std::vector<double> next;
      next.reserve(cur.size() * v.size());
      for (double a : cur)
        for (double b : v) next.push_back(a * b);
      cur = std::move(next);
    }
    return cur;
  };
  std::optional<std::vector<double>> q;
  if (spec.has_q()) q = lift(spec.q());
  return CantorSpec::create(lift(spec.p()), std::move(q));
}

/// gamma^{(n)}_k without materialising the lifted vector: the R-offspring
/// column sum of the word matrix over the base-M digits of k.
inline double gamma_at(const CantorSpec& spec, int order, std::uint64_t k) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  const std::uint64_t count = checked_power(spec.base(), order);
  if (k >= count) {
    throw std::out_of_range("column index " + std::to_string(k) + " outside [0," +
                            std::to_string(count) + ")");
  }
  const Word w = digits_of(k, spec.base(), order);
  return word_matrix(spec, w).r_column_sum();
}

/// Column of the triangle whose squares have index difference `lag` = i - j.
/// R-triangles sit at offset lag, L-triangles one step to the left.
inline ColumnId column_of_lag(int level, std::uint64_t columns_per_side, TriangleType type,
                              std::int64_t lag) {
  const std::int64_t d = type == TriangleType::R ? lag : lag - 1;
  if (d >= 0) return {level, Side::Positive, static_cast<std::uint64_t>(d)};
  return {level, Side::Negative,
          static_cast<std::uint64_t>(d + static_cast<std::int64_t>(columns_per_side))};
}

inline ColumnId column_of(const TriangleAddress& t, int base) {
  const std::uint64_t n = checked_power(base, t.level);
  if (t.i >= n || t.j >= n) throw std::out_of_range("triangle index outside [0, M^level)");
  const std::int64_t lag = static_cast<std::int64_t>(t.i) - static_cast<std::int64_t>(t.j);
  return column_of_lag(t.level, n, t.type, lag);
}

/// Signed lag of the left edge of a column, in units of M^-level:
/// positive column k starts at k, negative column k at k - M^level.
inline std::int64_t column_offset(const ColumnId& c, std::uint64_t columns_per_side) {
  const auto idx = static_cast<std::int64_t>(c.index);
  return c.side == Side::Positive ? idx : idx - static_cast<std::int64_t>(columns_per_side);
}

}  // namespace cantordiff
