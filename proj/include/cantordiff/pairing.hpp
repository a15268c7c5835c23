#pragma once

// Delta-pair combinatorics within one column: labels are stacked bottom to
// top, odd labels are R-triangles and even labels L-triangles. Two labels
// that differ by one share an edge.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cantordiff/error.hpp"

namespace cantordiff {

using Label = std::int64_t;

inline bool is_odd(Label x) noexcept { return (x % 2 + 2) % 2 == 1; }

struct ColumnOccupancy {
  std::vector<Label> odds;
  std::vector<Label> evens;
  bool operator==(const ColumnOccupancy&) const = default;
};

struct Couple {
  Label even = 0;
  Label odd = 0;
  bool operator==(const Couple&) const = default;
};

enum class Color { r, g, b };

inline const char* to_string(Color c) noexcept {
  switch (c) {
    case Color::r: return "r";
    case Color::g: return "g";
    default: return "b";
  }
}

/// One gluing step: J1 = [j1_first, j1_last] and J2 = [j2_first, j2_last]
/// (current coordinates) become one interval starting at new_start.
struct PhiStep {
  Label j1_first = 0, j1_last = 0;
  Label j2_first = 0, j2_last = 0;
  Label new_start = 0;
  bool operator==(const PhiStep&) const = default;
};

/// couples[i] carries colors[i]; uncoloured couples have no constraint.
struct ColoredPairing {
  std::vector<Couple> pairs;
  std::vector<std::optional<Color>> colors;
  std::vector<PhiStep> trace;
  bool operator==(const ColoredPairing&) const = default;
};

inline void validate_labels(const std::vector<Label>& odds, const std::vector<Label>& evens) {
  for (Label o : odds)
    if (!is_odd(o)) throw std::invalid_argument("odd list contains even label " + std::to_string(o));
  for (Label e : evens)
    if (is_odd(e)) throw std::invalid_argument("even list contains odd label " + std::to_string(e));
  auto distinct = [](std::vector<Label> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!distinct(odds)) throw std::invalid_argument("duplicate odd label");
  if (!distinct(evens)) throw std::invalid_argument("duplicate even label");
}

namespace detail {

/// Maximal run of consecutive positions; orig[k] is the input label now
/// sitting at position start + k.
struct Run {
  Label start = 0;
  std::vector<Label> orig;
  Label last() const { return start + static_cast<Label>(orig.size()) - 1; }
};

inline std::vector<Run> maximal_runs(std::vector<Label> labels) {
  std::sort(labels.begin(), labels.end());
  std::vector<Run> runs;
  for (Label x : labels) {
    if (runs.empty() || runs.back().last() + 1 != x) runs.push_back({x, {}});
    runs.back().orig.push_back(x);
  }
  return runs;
}

/// Smallest even shift n >= 0 placing [start+n, start+n+len-1] at distance
/// >= 2 from every run in `others`. The minimum is n = 0 or lies just past
/// some other run.
inline Label glue_shift(Label start, Label len, const std::vector<const Run*>& others) {
  auto fits = [&](Label s) {
    for (const Run* o : others) {
      if (!(s + len - 1 + 2 <= o->start || o->last() + 2 <= s)) return false;
    }
    return true;
  };
  Label best = -1;
  auto consider = [&](Label s) {
    if (s < start) return;
    if ((s - start) % 2 != 0) ++s;
    if (fits(s) && (best < 0 || s - start < best)) best = s - start;
  };
  consider(start);
  for (const Run* o : others) consider(o->last() + 2);
  if (best < 0) throw InconsistencyError("no admissible shift for glued interval");
  return best;
}

inline bool parity_break(const Run& j1, const Run& j2) { return is_odd(j1.last()) != is_odd(j2.start); }

/// Applies one gluing step if some pair qualifies; returns false at the fixed point.
inline bool phi(std::vector<Run>& runs, std::vector<PhiStep>& trace) {
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      std::size_t i1, i2;
      if (parity_break(runs[a], runs[b])) {
        i1 = a;
        i2 = b;
      } else if (parity_break(runs[b], runs[a])) {
        i1 = b;
        i2 = a;
      } else {
        continue;
      }
      const Run& j1 = runs[i1];
      const Run& j2 = runs[i2];
      std::vector<const Run*> others;
      for (std::size_t c = 0; c < runs.size(); ++c)
        if (c != a && c != b) others.push_back(&runs[c]);
      const Label len = static_cast<Label>(j1.orig.size() + j2.orig.size());
      const Label n = glue_shift(j1.start, len, others);
      Run glued{j1.start + n, j1.orig};
      glued.orig.insert(glued.orig.end(), j2.orig.begin(), j2.orig.end());
      trace.push_back({j1.start, j1.last(), j2.start, j2.last(), glued.start});
      runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(b));
      runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(a));
      runs.push_back(std::move(glued));
      std::sort(runs.begin(), runs.end(), [](const Run& x, const Run& y) { return x.start < y.start; });
      return true;
    }
  }
  return false;
}

inline Couple couple_of(Label x, Label y) {
  if (is_odd(x) == is_odd(y)) {
    throw InconsistencyError("coupled labels " + std::to_string(x) + " and " + std::to_string(y) +
                             " have equal parity");
  }
  return is_odd(x) ? Couple{y, x} : Couple{x, y};
}

}  // namespace detail

/// Couples N odd with N even labels and colours at least floor(N/3) couples
/// per colour so that no two labels of one colour class are adjacent.
/// Intervals are glued until at most two even-length runs remain, those are
/// coloured in blocks of six, and the remainders are fixed up across runs.
inline ColoredPairing three_color_pairing(const std::vector<Label>& odds,
                                          const std::vector<Label>& evens) {
  validate_labels(odds, evens);
  if (odds.size() != evens.size()) {
    throw std::invalid_argument("need equally many odd and even labels (" +
                                std::to_string(odds.size()) + " vs " +
                                std::to_string(evens.size()) + ")");
  }
  ColoredPairing out;
  std::vector<Label> all = odds;
  all.insert(all.end(), evens.begin(), evens.end());
  auto runs = detail::maximal_runs(all);
  while (detail::phi(runs, out.trace)) {
  }
  if (runs.size() > 2) throw InconsistencyError("gluing stopped with more than two intervals");
  for (const auto& r : runs) {
    if (r.orig.size() % 2 != 0) throw InconsistencyError("terminal interval of odd length");
  }

  auto add = [&](Label x, Label y, std::optional<Color> c) {
    out.pairs.push_back(detail::couple_of(x, y));
    out.colors.push_back(c);
  };
  std::vector<int> rem;
  for (const auto& r : runs) {
    const auto& u = r.orig;
    const std::size_t half = u.size() / 2;
    const std::size_t blocks = half / 3;
    for (std::size_t k = 0; k < blocks; ++k) {
      add(u[6 * k], u[6 * k + 3], Color::r);
      add(u[6 * k + 1], u[6 * k + 4], Color::g);
      add(u[6 * k + 2], u[6 * k + 5], Color::b);
    }
    rem.push_back(static_cast<int>(half % 3));
  }
  auto tail = [&](std::size_t run, std::size_t k) {
    const auto& u = runs[run].orig;
    const std::size_t r = static_cast<std::size_t>(rem[run]);
    return u[u.size() - 2 * r + k];
  };
  if (runs.size() == 2 && rem[0] + rem[1] == 3) {
    const std::size_t one = rem[0] == 1 ? 0 : 1;
    const std::size_t two = 1 - one;
    add(tail(two, 0), tail(two, 3), Color::r);
    add(tail(one, 0), tail(two, 2), Color::g);
    add(tail(one, 1), tail(two, 1), Color::b);
  } else if (runs.size() == 2 && rem[0] == 2 && rem[1] == 2) {
    add(tail(0, 0), tail(0, 3), Color::r);
    add(tail(1, 0), tail(1, 3), Color::r);
    add(tail(0, 1), tail(1, 1), Color::g);
    add(tail(0, 2), tail(1, 2), Color::b);
  } else {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (rem[i] == 1) {
        add(tail(i, 0), tail(i, 1), std::nullopt);
      } else if (rem[i] == 2) {
        add(tail(i, 0), tail(i, 3), std::nullopt);
        add(tail(i, 1), tail(i, 2), std::nullopt);
      }
    }
  }
  return out;
}

/// First violated invariant, or nothing when the pairing is valid.
inline std::optional<std::string> check_coloring(const std::vector<Label>& odds,
                                                 const std::vector<Label>& evens,
                                                 const ColoredPairing& c) {
  if (c.colors.size() != c.pairs.size()) return "colors and pairs differ in length";
  const std::set<Label> odd_set(odds.begin(), odds.end());
  const std::set<Label> even_set(evens.begin(), evens.end());
  std::set<Label> used;
  for (const auto& p : c.pairs) {
    if (is_odd(p.even) || !is_odd(p.odd)) {
      return "couple (" + std::to_string(p.even) + "," + std::to_string(p.odd) + ") has wrong parity";
    }
    if (!even_set.count(p.even) || !odd_set.count(p.odd)) {
      return "couple (" + std::to_string(p.even) + "," + std::to_string(p.odd) +
             ") uses a label not in the input";
    }
    for (Label x : {p.even, p.odd}) {
      if (!used.insert(x).second) return "label reused: " + std::to_string(x);
    }
  }
  for (Color col : {Color::r, Color::g, Color::b}) {
    std::vector<Label> es, os;
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
      if (c.colors[i] == col) {
        es.push_back(c.pairs[i].even);
        os.push_back(c.pairs[i].odd);
      }
    }
    for (Label e : es) {
      for (Label o : os) {
        if (e - o <= 1 && o - e <= 1) {
          return std::string("color ") + to_string(col) + ": |" + std::to_string(e) + "-" +
                 std::to_string(o) + "|=1";
        }
      }
    }
    const std::size_t need = c.pairs.size() / 3;
    if (es.size() < need) {
      return std::string("color ") + to_string(col) + " used " + std::to_string(es.size()) +
             " times, fewer than " + std::to_string(need);
    }
  }
  return std::nullopt;
}

/// Maximum set of disjoint (even, odd) couples with |e - o| > 1, by augmenting paths.
inline std::vector<Couple> max_delta_pairs(const ColumnOccupancy& occ) {
  validate_labels(occ.odds, occ.evens);
  std::vector<Label> es = occ.evens, os = occ.odds;
  std::sort(es.begin(), es.end());
  std::sort(os.begin(), os.end());
  std::vector<int> match_odd(os.size(), -1);
  std::vector<char> seen;
  auto adjacent = [](Label e, Label o) { return e - o <= 1 && o - e <= 1; };
  auto augment = [&](auto&& self, std::size_t e) -> bool {
    for (std::size_t o = 0; o < os.size(); ++o) {
      if (adjacent(es[e], os[o]) || seen[o]) continue;
      seen[o] = 1;
      if (match_odd[o] < 0 || self(self, static_cast<std::size_t>(match_odd[o]))) {
        match_odd[o] = static_cast<int>(e);
        return true;
      }
    }
    return false;
  };
  for (std::size_t e = 0; e < es.size(); ++e) {
    seen.assign(os.size(), 0);
    augment(augment, e);
  }
  std::vector<Couple> out;
  for (std::size_t o = 0; o < os.size(); ++o) {
    if (match_odd[o] >= 0) out.push_back({es[static_cast<std::size_t>(match_odd[o])], os[o]});
  }
  std::sort(out.begin(), out.end(), [](const Couple& a, const Couple& b) { return a.even < b.even; });
  return out;
}

}  // namespace cantordiff
