#pragma once

// Checkable certificates for interval existence in F2 - F1:
//  - all gamma values of some order above one     -> IntervalAS
//  - two cyclically consecutive gammas below one  -> NoIntervalAS
//  - a digit word whose matrix has PF eigenvalue below one -> NoIntervalAS
// plus bisection of a one-parameter family between certified endpoints.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cantordiff/error.hpp"
#include "cantordiff/parallel.hpp"
#include "cantordiff/spec.hpp"
#include "cantordiff/spectrum.hpp"

namespace cantordiff {

enum class Verdict { IntervalAS, NoIntervalAS, Inconclusive };

inline const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::IntervalAS: return "IntervalAS";
    case Verdict::NoIntervalAS: return "NoIntervalAS";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// Every gamma^{(order)} value exceeds one; min_gamma is the smallest.
struct AllAboveCertificate {
  int order = 1;
  double min_gamma = 0.0;
  bool operator==(const AllAboveCertificate&) const = default;
};

/// gamma^{(order)}_index and gamma^{(order)}_{index+1 mod M^order} both below one.
struct ConsecutivePairCertificate {
  int order = 1;
  std::uint64_t index = 0;
  double gamma = 0.0;
  double gamma_next = 0.0;
  bool operator==(const ConsecutivePairCertificate&) const = default;
};

/// pf_eigenvalue(word_matrix(word)) < 1.
struct SpectralCertificate {
  Word word;
  double eigenvalue = 0.0;
  bool operator==(const SpectralCertificate&) const = default;
};

struct InconclusiveCertificate {
  int max_order = 0;
  int max_word_len = 0;
  bool operator==(const InconclusiveCertificate&) const = default;
};

using Certificate = std::variant<AllAboveCertificate, ConsecutivePairCertificate,
                                 SpectralCertificate, InconclusiveCertificate>;

struct SearchEffort {
  int orders_scanned = 0;
  int word_len_scanned = 0;
  std::uint64_t words_scanned = 0;
  bool operator==(const SearchEffort&) const = default;
};

struct Decision {
  Verdict verdict = Verdict::Inconclusive;
  Certificate certificate = InconclusiveCertificate{};
  SearchEffort effort{};
  bool operator==(const Decision&) const = default;
};

struct SearchOptions {
  int max_order = 10;
  int max_word_len = 6;
  std::uint64_t word_budget = 100'000'000;
  unsigned threads = 1;
};

/// Order-1 decision from a correlation vector. Strict inequalities: values
/// equal to one never trigger either branch.
inline Decision decide_order1(const GammaVector& gamma) {
  const std::size_t m = gamma.size();
  if (m == 0) throw std::invalid_argument("empty gamma vector");
  Decision d;
  d.effort = {1, 0, m};
  const double lo = gamma.min();
  if (lo > 1.0) {
    d.verdict = Verdict::IntervalAS;
    d.certificate = AllAboveCertificate{1, lo};
    return d;
  }
  for (std::size_t k = 0; k < m; ++k) {
    const double a = gamma.values[k];
    const double b = gamma.values[(k + 1) % m];
    if (a < 1.0 && b < 1.0) {
      d.verdict = Verdict::NoIntervalAS;
      d.certificate = ConsecutivePairCertificate{1, k, a, b};
      return d;
    }
  }
  d.certificate = InconclusiveCertificate{1, 0};
  return d;
}

namespace detail {

/// Visits every word of `length` whose first digit lies in [first_lo, first_hi),
/// in increasing integer order, with the product carried along the prefix.
/// visit(index, digits, matrix) returns false to stop early.
template <class Visit>
void enumerate_words(std::span<const ExpectationMatrix> level1, int length, int first_lo,
                     int first_hi, std::uint64_t first_index, Visit&& visit) {
  const int m = static_cast<int>(level1.size());
  if (length < 1 || first_lo >= first_hi) return;
  std::vector<ExpectationMatrix> prefix(static_cast<std::size_t>(length) + 1);
  Word digits(static_cast<std::size_t>(length), 0);
  digits[0] = first_lo;
  prefix[0] = ExpectationMatrix::identity();
  for (int d = 0; d < length; ++d) prefix[d + 1] = prefix[d] * level1[digits[d]];
  std::uint64_t index = first_index;
  while (true) {
    if (!visit(index, std::as_const(digits), std::as_const(prefix[length]))) return;
    ++index;
    int pos = length - 1;
    while (true) {
      if (++digits[pos] < (pos == 0 ? first_hi : m)) break;
      if (pos == 0) return;
      digits[pos] = 0;
      --pos;
    }
    for (int d = pos; d < length; ++d) prefix[d + 1] = prefix[d] * level1[digits[d]];
  }
}

struct OrderChunk {
  double first = 0.0;
  double last = 0.0;
  double min = std::numeric_limits<double>::infinity();
  std::optional<std::uint64_t> witness;  // pair internal to the chunk
  double witness_gamma = 0.0;
  double witness_next = 0.0;
  std::uint64_t scanned = 0;
};

inline void require_supercritical(const CantorSpec& spec) {
  if (!spec.is_supercritical()) {
    throw std::invalid_argument(
        "spec is not supercritical (needs sum(p) > 1 and sum(q) > 1); the sets die out");
  }
}

}  // namespace detail

/// Scans gamma^{(m)}_k for k in [0, M^m), m = 1..max_order, via shared-prefix
/// word products. Returns IntervalAS at the first order where all values
/// exceed one, NoIntervalAS at the first order with a cyclically consecutive
/// pair below one (lowest index wins), else Inconclusive.
inline Decision decide_escalating(const CantorSpec& spec, int max_order,
                                  const SearchOptions& opts = {}) {
  detail::require_supercritical(spec);
  if (max_order < 1) throw std::invalid_argument("max_order must be >= 1");
  const int m = spec.base();
  const auto level1 = expectation_matrices(spec);

  Decision d;
  std::uint64_t total = 0;
  for (int order = 1; order <= max_order; ++order) {
    const std::uint64_t count = checked_power(m, order);
    if (total + count > opts.word_budget) {
      throw BudgetExceeded("order " + std::to_string(order) + " needs " + std::to_string(count) +
                           " more words; enumeration budget is " +
                           std::to_string(opts.word_budget));
    }
    const std::uint64_t per_digit = count / static_cast<std::uint64_t>(m);
    std::vector<detail::OrderChunk> chunks(static_cast<std::size_t>(m));
    parallel_chunks(chunks.size(), opts.threads, [&](std::size_t c) {
      auto& ch = chunks[c];
      bool have_prev = false;
      double prev = 0.0;
      detail::enumerate_words(
          level1, order, static_cast<int>(c), static_cast<int>(c) + 1, c * per_digit,
          [&](std::uint64_t index, const Word&, const ExpectationMatrix& mat) {
            const double v = mat.r_column_sum();
            ++ch.scanned;
            if (!have_prev) ch.first = v;
            if (v < ch.min) ch.min = v;
            if (have_prev && prev < 1.0 && v < 1.0) {
              ch.witness = index - 1;
              ch.witness_gamma = prev;
              ch.witness_next = v;
              ch.last = v;
              return false;
            }
            prev = v;
            have_prev = true;
            ch.last = v;
            return true;
          });
    });

    double min_value = std::numeric_limits<double>::infinity();
    std::optional<ConsecutivePairCertificate> pair;
    for (const auto& ch : chunks) total += ch.scanned;
    for (std::size_t c = 0; c < chunks.size() && !pair; ++c) {
      const auto& ch = chunks[c];
      min_value = std::min(min_value, ch.min);
      if (ch.witness) {
        pair = ConsecutivePairCertificate{order, *ch.witness, ch.witness_gamma, ch.witness_next};
        break;
      }
      const auto& next = chunks[(c + 1) % chunks.size()];
      if (ch.last < 1.0 && next.first < 1.0) {
        const std::uint64_t k = (c + 1) * per_digit - 1;
        pair = ConsecutivePairCertificate{order, k, ch.last, next.first};
      }
    }
    d.effort.orders_scanned = order;
    d.effort.words_scanned = total;
    if (pair) {
      d.verdict = Verdict::NoIntervalAS;
      d.certificate = *pair;
      return d;
    }
    if (min_value > 1.0) {
      d.verdict = Verdict::IntervalAS;
      d.certificate = AllAboveCertificate{order, min_value};
      return d;
    }
  }
  d.verdict = Verdict::Inconclusive;
  d.certificate = InconclusiveCertificate{max_order, 0};
  return d;
}

/// Depth-first search over words of length 1..max_word_len (prefixes before
/// extensions, digits ascending) for a word matrix with PF eigenvalue below
/// one. Returns the lexicographically first such word.
inline std::optional<SpectralCertificate> spectral_certificate(const CantorSpec& spec,
                                                               int max_word_len,
                                                               const SearchOptions& opts = {},
                                                               std::uint64_t* scanned = nullptr) {
  detail::require_supercritical(spec);
  if (max_word_len < 1) throw std::invalid_argument("max_word_len must be >= 1");
  const int m = spec.base();
  std::uint64_t needed = 0;
  for (int len = 1; len <= max_word_len; ++len) {
    needed += checked_power(m, len);
    if (needed > opts.word_budget) {
      throw BudgetExceeded("spectral search up to length " + std::to_string(max_word_len) +
                           " exceeds the enumeration budget of " +
                           std::to_string(opts.word_budget) + " words");
    }
  }
  const auto level1 = expectation_matrices(spec);

  struct Found {
    std::optional<SpectralCertificate> cert;
    std::uint64_t visited = 0;
  };
  std::vector<Found> per_digit(static_cast<std::size_t>(m));
  parallel_chunks(per_digit.size(), opts.threads, [&](std::size_t first) {
    auto& out = per_digit[first];
    Word word{static_cast<Digit>(first)};
    std::vector<ExpectationMatrix> stack{level1[first]};
    // Iterative pre-order DFS; `word` and `stack` always describe the current node.
    while (true) {
      ++out.visited;
      const double lambda = pf_eigenvalue(stack.back());
      if (lambda < 1.0) {
        out.cert = SpectralCertificate{word, lambda};
        return;
      }
      if (static_cast<int>(word.size()) < max_word_len) {
        word.push_back(0);
        stack.push_back(stack.back() * level1[0]);
        continue;
      }
      // advance to next sibling, popping exhausted levels
      while (true) {
        if (word.size() == 1) return;
        if (++word.back() < m) {
          stack.pop_back();
          stack.push_back(stack.back() * level1[word.back()]);
          break;
        }
        word.pop_back();
        stack.pop_back();
      }
    }
  });

  std::uint64_t visited = 0;
  std::optional<SpectralCertificate> result;
  for (auto& f : per_digit) {
    visited += f.visited;
    if (f.cert && !result) result = f.cert;
  }
  if (scanned) *scanned = visited;
  return result;
}

/// Escalating gamma scan, then the spectral search if still undecided.
inline Decision decide(const CantorSpec& spec, const SearchOptions& opts = {}) {
  Decision d = decide_escalating(spec, opts.max_order, opts);
  if (d.verdict != Verdict::Inconclusive) return d;
  std::uint64_t visited = 0;
  auto cert = spectral_certificate(spec, opts.max_word_len, opts, &visited);
  d.effort.word_len_scanned = opts.max_word_len;
  d.effort.words_scanned += visited;
  if (cert) {
    d.verdict = Verdict::NoIntervalAS;
    d.certificate = std::move(*cert);
  } else {
    d.certificate = InconclusiveCertificate{opts.max_order, opts.max_word_len};
  }
  return d;
}

/// Lower bound on the probability that C_00 holds a level-2 Delta-pair:
/// max over adjacent digits i, i+1 of P(Q_{i(i+1),ii} and
/// Q_{(i+1)(i+1),(i+1)(i+1)} both selected) = p_i p_{i+1}^3 q_i^2 q_{i+1}^2,
/// which is p_i^3 p_{i+1}^5 when q = p.
inline double delta_start_lower_bound(const CantorSpec& spec) {
  const GammaVector g = correlations(spec);
  if (!(g.min() > 1.0)) {
    throw std::domain_error("delta_start_lower_bound requires min_k gamma_k > 1; got min " +
                            std::to_string(g.min()));
  }
  const auto& p = spec.p();
  const auto& q = spec.q();
  double best = 0.0;
  for (int i = 0; i + 1 < spec.base(); ++i) {
    const double v = p[i] * std::pow(p[i + 1], 3) * q[i] * q[i] * q[i + 1] * q[i + 1];
    best = std::max(best, v);
  }
  return best;
}

/// One-parameter family: each entry is a literal probability or the parameter.
class FamilyTemplate {
 public:
  static FamilyTemplate parse(std::string_view csv, std::string_view symbol = "rho") {
    FamilyTemplate f;
    bool has_symbol = false;
    for (const auto& field : split_csv(csv)) {
      if (field == symbol) {
        f.entries_.push_back(std::nullopt);
        has_symbol = true;
      } else {
        f.entries_.push_back(parse_real(field));
      }
    }
    if (!has_symbol) {
      throw std::invalid_argument("family '" + std::string(csv) + "' never uses '" +
                                  std::string(symbol) + "'");
    }
    if (f.entries_.size() < 2) throw std::invalid_argument("family needs at least two entries");
    f.at(0.5);  // validates literal entries
    return f;
  }

  int base() const noexcept { return static_cast<int>(entries_.size()); }

  CantorSpec at(double rho) const {
    std::vector<double> p;
    p.reserve(entries_.size());
    for (const auto& e : entries_) p.push_back(e ? *e : rho);
    return CantorSpec::create(std::move(p));
  }

  const std::vector<std::optional<double>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::optional<double>> entries_;
};

/// Bisects [good, bad] where pred(good) holds and pred(bad) does not, until
/// |bad - good| <= tol. Returns the final (good, bad).
inline std::pair<double, double> bisect_boundary(double good, double bad,
                                                 const std::function<bool(double)>& pred,
                                                 double tol) {
  while (std::abs(bad - good) > tol) {
    const double mid = 0.5 * (good + bad);
    if (pred(mid)) good = mid;
    else bad = mid;
  }
  return {good, bad};
}

struct BracketEffort {
  int max_order = 0;
  int max_word_len = 0;
  int evaluations = 0;
  bool operator==(const BracketEffort&) const = default;
};

/// lo is the largest parameter certified NoIntervalAS and hi the smallest
/// certified IntervalAS found by the search.
struct Bracket {
  double lo = 0.0;
  double hi = 1.0;
  Decision lo_certificate;
  Decision hi_certificate;
  BracketEffort effort;
  std::string assumption = "assumed-monotone";
  bool operator==(const Bracket&) const = default;
};

/// Bisection on the family parameter, assuming the verdict is monotone in it.
/// Midpoints certified either way shrink the bracket; when a midpoint is
/// undecided at full budget, the NoIntervalAS and IntervalAS boundaries are
/// refined separately on either side of it.
inline Bracket critical_bracket(const FamilyTemplate& family, double lo0, double hi0,
                                double tol, const SearchOptions& opts) {
  if (!(0.0 <= lo0 && lo0 < hi0 && hi0 <= 1.0)) {
    throw std::invalid_argument("bracket endpoints must satisfy 0 <= lo < hi <= 1");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  Bracket b;
  b.effort.max_order = opts.max_order;
  b.effort.max_word_len = opts.max_word_len;
  auto certify = [&](double rho) {
    ++b.effort.evaluations;
    const CantorSpec s = family.at(rho);
    if (!s.is_supercritical()) {
      Decision d;
      d.verdict = Verdict::Inconclusive;
      return d;
    }
    return decide(s, opts);
  };

  Decision at_lo = certify(lo0);
  if (at_lo.verdict != Verdict::NoIntervalAS) {
    throw std::runtime_error("lower endpoint " + std::to_string(lo0) +
                             " is not certifiably NoIntervalAS (got " +
                             to_string(at_lo.verdict) + ")");
  }
  Decision at_hi = certify(hi0);
  if (at_hi.verdict != Verdict::IntervalAS) {
    throw std::runtime_error("upper endpoint " + std::to_string(hi0) +
                             " is not certifiably IntervalAS (got " +
                             to_string(at_hi.verdict) + ")");
  }
  double lo = lo0, hi = hi0;
  b.lo_certificate = at_lo;
  b.hi_certificate = at_hi;

  std::optional<double> undecided;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    Decision d = certify(mid);
    if (d.verdict == Verdict::NoIntervalAS) {
      lo = mid;
      b.lo_certificate = std::move(d);
    } else if (d.verdict == Verdict::IntervalAS) {
      hi = mid;
      b.hi_certificate = std::move(d);
    } else {
      undecided = mid;
      break;
    }
  }

  if (undecided) {
    double no_bad = *undecided;
    while (no_bad - lo > tol) {
      const double mid = 0.5 * (lo + no_bad);
      Decision d = certify(mid);
      if (d.verdict == Verdict::NoIntervalAS) {
        lo = mid;
        b.lo_certificate = std::move(d);
      } else {
        no_bad = mid;
      }
    }
    double yes_bad = *undecided;
    while (hi - yes_bad > tol) {
      const double mid = 0.5 * (yes_bad + hi);
      Decision d = certify(mid);
      if (d.verdict == Verdict::IntervalAS) {
        hi = mid;
        b.hi_certificate = std::move(d);
      } else {
        yes_bad = mid;
      }
    }
  }
  b.lo = lo;
  b.hi = hi;
  return b;
}

}  // namespace cantordiff
