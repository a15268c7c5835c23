// Acceptance suite: one PASS/FAIL line per criterion. Reference values come
// from the oracles in tests/oracles, never from the routines under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cantordiff/cantordiff.hpp"
#include "oracles/brute.hpp"

using namespace cantordiff;

namespace {

/// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 3) notes_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(10);
    os << what << ": got " << got << ", want " << want << " +- " << tol;
    expect(std::abs(got - want) <= tol, os.str());
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(failures_) + " failed check(s)";
    for (const auto& n : notes_) s += "; " + n;
    return s;
  }

 private:
  int failures_ = 0;
  std::vector<std::string> notes_;
};

oracle::Mat2 oracle_matrix(const CantorSpec& spec, int k) {
  return oracle::expectation_by_geometry(spec.p(), spec.q(), k);
}

oracle::Mat2 oracle_word(const CantorSpec& spec, const Word& w) {
  oracle::Mat2 acc{1, 0, 0, 1};
  for (int d : w) acc = oracle::mul(acc, oracle_matrix(spec, d));
  return acc;
}

void near_matrix(Check& c, const ExpectationMatrix& m, const oracle::Mat2& want, double tol,
                 const std::string& what) {
  c.near(m.ll, want.ll, tol, what + " LL");
  c.near(m.lr, want.lr, tol, what + " LR");
  c.near(m.rl, want.rl, tol, what + " RL");
  c.near(m.rr, want.rr, tol, what + " RR");
}

oracle::Mat2 swap_sides(const oracle::Mat2& m) { return {m.rr, m.rl, m.lr, m.ll}; }

double bisect(double lo, double hi, const std::function<bool(double)>& below, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CantorSpec family_one(double rho) { return CantorSpec::create({1, 0, 1, rho}); }
CantorSpec family_two(double rho) { return CantorSpec::create({1, 0, rho, 0, 1}); }

Check gamma_closed_forms() {
  Check c;
  for (int i = 0; i < 20; ++i) {
    const double rho = i / 19.0;
    const auto g = correlations(family_one(rho));
    const double want[4] = {2 + rho * rho, 2 * rho, 2, 2 * rho};
    for (int k = 0; k < 4; ++k) c.near(g[static_cast<std::size_t>(k)], want[k], 1e-12, "family gamma");
    const double eps = (i + 1) / 21.0;
    const auto e = correlations(CantorSpec::create({1, 0, 1 - eps}));
    c.near(e[1], 1 - eps, 1e-12, "gamma_1");
    c.near(e[2], 1 - eps, 1e-12, "gamma_2");
    const std::vector<double> p{1, 0, 1 - eps};
    c.near(e[0], oracle::cyclic_correlation(p, p, 0), 1e-12, "gamma_0");
  }
  return c;
}

Check matrix_identities() {
  Check c;
  for (double rho : {0.0, 0.2, 0.3, 0.5, 0.77, 1.0}) {
    const auto s1 = family_one(rho);
    const double r2 = rho * rho, r3 = r2 * rho;
    const oracle::Mat2 want1[4] = {{rho, 0, rho, 2 + r2}, {1, rho, 1, rho}, {rho, 1, rho, 1}, {2 + r2, rho, 0, rho}};
    for (int k = 0; k < 4; ++k) {
      near_matrix(c, expectation_matrix(s1, k), want1[k], 1e-12, "family one k=" + std::to_string(k));
      near_matrix(c, expectation_matrix(s1, k), oracle_matrix(s1, k), 1e-12, "geometry k=" + std::to_string(k));
    }
    near_matrix(c, word_matrix(s1, Word{0, 3}), {2 * rho + r3, r2, 2 * rho + r3, r2 + 2 * rho + r3}, 1e-12,
                "order-2 matrix at 3");
    near_matrix(c, expectation_matrix(higher_order(s1, 2), 3), {2 * rho + r3, r2, 2 * rho + r3, r2 + 2 * rho + r3},
                1e-12, "lifted matrix at 3");

    const auto s2 = family_two(rho);
    const oracle::Mat2 m0{1, 0, 0, 2 + r2}, m1{0, 1, 2 * rho, 0}, m2{2 * rho, 0, 0, 2 * rho};
    const oracle::Mat2 want2[5] = {m0, m1, m2, swap_sides(m1), swap_sides(m0)};
    for (int k = 0; k < 5; ++k) {
      near_matrix(c, expectation_matrix(s2, k), want2[k], 1e-12, "family two k=" + std::to_string(k));
    }
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 2 + rep % 6;
    std::vector<double> p(static_cast<std::size_t>(m)), q(static_cast<std::size_t>(m));
    for (auto& x : p) x = u(rng);
    for (auto& x : q) x = u(rng);
    const auto spec = rep % 2 ? CantorSpec::create(p, q) : CantorSpec::create(p);
    const auto g = correlations(spec);
    for (int k = 0; k < m; ++k) {
      const auto e = expectation_matrix(spec, k);
      c.near(e.l_column_sum(), g[static_cast<std::size_t>(k + 1) % static_cast<std::size_t>(m)], 1e-12, "L column sum");
      c.near(e.r_column_sum(), g[static_cast<std::size_t>(k)], 1e-12, "R column sum");
    }
    for (int len = 1; len <= 6; ++len) {
      Word w(static_cast<std::size_t>(len));
      for (auto& d : w) d = static_cast<Digit>(rng() % static_cast<std::uint64_t>(m));
      const auto lib = word_matrix(spec, w);
      const auto ref = oracle_word(spec, w);
      const double scale = 1 + std::max({ref.ll, ref.lr, ref.rl, ref.rr});
      near_matrix(c, lib, ref, 1e-9 * scale, "product law");
      // column sums of a word are consecutive correlations of the lifted vectors
      if (len <= 3) {
        const auto lp = oracle::lifted(spec.p(), len), lq = oracle::lifted(spec.q(), len);
        const std::uint64_t idx = index_of(w, m), n = lp.size();
        c.near(lib.r_column_sum(), oracle::cyclic_correlation(lp, lq, idx), 1e-9 * scale, "word R column sum");
        c.near(lib.l_column_sum(), oracle::cyclic_correlation(lp, lq, (idx + 1) % n), 1e-9 * scale,
               "word L column sum");
      }
    }
  }
  return c;
}

Check eigenvalue_anchor() {
  Check c;
  auto lib = [](double rho) { return pf_eigenvalue(word_matrix(family_one(rho), Word{0, 3})) < 1; };
  auto ref = [](double rho) {
    const auto s = family_one(rho);
    return oracle::largest_eigenvalue(oracle_word(s, Word{0, 3})) < 1;
  };
  c.expect(lib(0.3) && !lib(0.4), "eigenvalue does not cross 1 in [0.3, 0.4]");
  const double root = bisect(0.3, 0.4, lib, 1e-9);
  c.near(root, 0.3221, 5e-4, "library crossing");
  c.near(bisect(0.3, 0.4, ref, 1e-9), root, 1e-8, "oracle crossing");
  return c;
}

Check decision_thresholds() {
  Check c;
  c.expect(decide_escalating(family_one(0.24), 2).verdict == Verdict::NoIntervalAS, "rho=0.24 not NoIntervalAS");
  c.expect(decide_escalating(family_one(0.37), 2).verdict == Verdict::IntervalAS, "rho=0.37 not IntervalAS");
  double cubic = 0.25;
  for (int i = 0; i < 60; ++i) cubic -= (4 * cubic + 2 * cubic * cubic * cubic - 1) / (4 + 6 * cubic * cubic);
  const auto [nb, ng] = bisect_boundary(
      0.2, 0.3, [](double r) { return decide_escalating(family_one(r), 2).verdict == Verdict::NoIntervalAS; }, 1e-9);
  c.near(0.5 * (nb + ng), cubic, 1e-3, "order-2 NoIntervalAS boundary");
  const auto [ib, ig] = bisect_boundary(
      0.5, 0.3, [](double r) { return decide_escalating(family_one(r), 2).verdict == Verdict::IntervalAS; }, 1e-10);
  c.near(0.5 * (ib + ig), (std::sqrt(3.0) - 1) / 2, 1e-6, "order-2 IntervalAS boundary");
  return c;
}

Check critical_bracket_check() {
  Check c;
  SearchOptions o;
  o.max_order = 10;
  o.max_word_len = 6;
  try {
    const auto b = critical_bracket(FamilyTemplate::parse("1,0,1,rho"), 0.3, 0.37, 1e-4, o);
    c.expect(b.lo >= 0.30 && b.lo <= 0.3226, "lo=" + std::to_string(b.lo) + " outside [0.30, 0.3226]");
    c.expect(b.hi >= 0.3222 && b.hi <= 0.37, "hi=" + std::to_string(b.hi) + " outside [0.3222, 0.37]");
    c.expect(decide(family_one(b.lo), o).verdict == Verdict::NoIntervalAS, "lo not certified");
    c.expect(decide(family_one(b.hi), o).verdict == Verdict::IntervalAS, "hi not certified");
  } catch (const std::exception& e) {
    c.expect(false, e.what());
  }
  return c;
}

Check mandelbrot_corollary() {
  Check c;
  for (int m = 2; m <= 6; ++m) {
    for (int step = 1; step <= 99; ++step) {
      const double cval = step / 100.0;
      const std::vector<double> p(static_cast<std::size_t>(m), cval);
      const Verdict v = decide_order1(correlations(CantorSpec::create(p))).verdict;
      const double mc2 = m * cval * cval;
      if (mc2 > 1) c.expect(v == Verdict::IntervalAS, "M=" + std::to_string(m) + " c=" + std::to_string(cval));
      if (mc2 < 1) c.expect(v == Verdict::NoIntervalAS, "M=" + std::to_string(m) + " c=" + std::to_string(cval));
    }
  }
  return c;
}

Check second_family() {
  Check c;
  for (double rho : {0.3, 0.6, 0.9}) {
    const auto spec = family_two(rho);
    for (int n = 1; n <= 6; ++n) {
      c.near(gamma_at(spec, n, 1), 1.0, 1e-12, "gamma_1 at order " + std::to_string(n));
      const auto lp = oracle::lifted(spec.p(), n);
      c.near(oracle::cyclic_correlation(lp, lp, 1), 1.0, 1e-12, "oracle gamma_1");
    }
    const auto level1 = expectation_matrices(spec);
    const double bound = std::pow(std::sqrt(2 * rho), 6);
    std::uint64_t violations = 0;
    Word first;
    for (std::uint64_t k = 0; k < checked_power(5, 6); ++k) {
      const Word w = digits_of(k, 5, 6);
      if (pf_eigenvalue(word_matrix(level1, w)) < bound * (1 - 1e-12)) {
        if (violations++ == 0) first = w;
      }
    }
    std::string word;
    for (int d : first) word += std::to_string(d);
    c.expect(violations == 0, "rho=" + std::to_string(rho).substr(0, 3) + ": " + std::to_string(violations) +
                                  " words below (sqrt(2 rho))^6, first " + word);
    c.expect(decide_escalating(spec, 4).verdict == Verdict::Inconclusive,
             "not Inconclusive through order 4 at rho=" + std::to_string(rho));
  }
  return c;
}

Check deterministic_engine() {
  Check c;
  const auto scan = scan_all_attractors(1);
  c.expect(scan.starts == 65536 && scan.max_period == 1 && scan.non_fixed == 0, "attractor with period > 1");
  int max_period = 0;
  for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
    max_period = std::max(max_period, attractor(MatrixSet{static_cast<std::uint16_t>(mask)}).period);
  }
  c.expect(max_period == 1, "single-start cycle detection found period " + std::to_string(max_period));
  c.expect(decide_deterministic(CantorSpec::create({1, 0, 1, 0, 1})).verdict == DeterministicVerdict::Interval,
           "(1,0,1,0,1)");
  c.expect(decide_deterministic(CantorSpec::create({1, 0, 1})).verdict == DeterministicVerdict::Interval, "(1,0,1)");
  c.expect(decide_deterministic(CantorSpec::create({1, 0, 0, 1})).verdict == DeterministicVerdict::NoInterval,
           "(1,0,0,1)");
  for (int m = 2; m <= 8; ++m) {
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      if (__builtin_popcount(mask) < 2) continue;
      std::vector<int> bits(static_cast<std::size_t>(m));
      for (int i = 0; i < m; ++i) bits[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      const auto spec = CantorSpec::create(std::vector<double>(bits.begin(), bits.end()));
      const bool no = decide_deterministic(spec).verdict == DeterministicVerdict::NoInterval;
      const bool empty = oracle::first_paired_empty_level(bits, 3).has_value();
      c.expect(no == empty, "verdict and empty column disagree for M=" + std::to_string(m) +
                                " mask=" + std::to_string(mask));
    }
  }
  return c;
}

Check monte_carlo() {
  Check c;
  const std::uint64_t trials = 100000;
  const std::vector<CantorSpec> specs{CantorSpec::create({0.7, 0.7}),
                                      CantorSpec::create({0.9, 0.2, 0.6}, std::vector<double>{0.5, 0.8, 0.7})};
  for (const auto& spec : specs) {
    ExperimentOptions one, eight;
    eight.threads = 8;
    const auto s = run_experiment(spec, 1, trials, 99, one);
    const auto t = run_experiment(spec, 1, trials, 99, eight);
    const double sum_p = CantorSpec::sum(spec.p()), sum_q = CantorSpec::sum(spec.q());
    c.near(s.f1[1].survivors_mean, sum_p, 3 * std::sqrt(s.f1[1].survivors_var / trials), "mean Z1 of F1");
    c.near(s.f2[1].survivors_mean, sum_q, 3 * std::sqrt(s.f2[1].survivors_var / trials), "mean Z1 of F2");
    const auto& p = spec.p();
    const auto& q = spec.q();
    const std::size_t m = p.size();
    for (const auto& col : s.level1_columns) {
      const auto k = static_cast<std::size_t>(col.k);
      c.near(col.z_l_mean, oracle::cyclic_correlation(p, q, (k + 1) % m), 3 * col.z_l_se, "mean z_L");
      c.near(col.z_r_mean, oracle::cyclic_correlation(p, q, k), 3 * col.z_r_se, "mean z_R");
    }
    std::ostringstream a, b;
    write_csv(a, s);
    write_csv(b, t);
    c.expect(a.str() == b.str(), "CSV differs between 1 and 8 workers");
    c.expect(json(s).dump() == json(t).dump(), "JSON differs between 1 and 8 workers");
  }
  return c;
}

Check pairing() {
  Check c;
  std::mt19937_64 rng(7);
  auto draw = [&](std::size_t n, bool odd, Label max_label) {
    std::vector<Label> pool;
    for (Label x = 1; x <= max_label; ++x)
      if (is_odd(x) == odd) pool.push_back(x);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(n);
    return pool;
  };
  for (int rep = 0; rep < 10000; ++rep) {
    const std::size_t n = rng() % 41;
    const auto odds = draw(n, true, 200), evens = draw(n, false, 200);
    const auto col = three_color_pairing(odds, evens);
    std::vector<oracle::LiteralPair> lit;
    for (std::size_t i = 0; i < col.pairs.size(); ++i) {
      lit.push_back({col.pairs[i].even, col.pairs[i].odd, col.colors[i] ? static_cast<int>(*col.colors[i]) : -1});
    }
    const auto lib = check_coloring(odds, evens, col);
    c.expect(!lib.has_value(), "check_coloring: " + lib.value_or(""));
    const auto ref = oracle::check_pairs_literally(odds, evens, lit);
    c.expect(ref.empty(), "literal checker: " + ref);
    c.expect(col.pairs.size() == n, "not every label paired");
  }
  for (int rep = 0; rep < 5000; ++rep) {
    const auto odds = draw(rng() % 9, true, 24), evens = draw(rng() % 9, false, 24);
    c.expect(static_cast<int>(max_delta_pairs({odds, evens}).size()) == oracle::max_matching_dp(evens, odds),
             "matching below the DP optimum");
  }
  for (int k = 1; k <= 14; ++k) {
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<Label> odds, evens;
      for (int i = 0; i < k; ++i)
        if ((mask >> i) & 1u) (is_odd(i + 1) ? odds : evens).push_back(i + 1);
      const std::size_t m = std::min(odds.size(), evens.size());
      if (m < 3) continue;
      c.expect(max_delta_pairs({odds, evens}).size() >= m,
               "fewer than m couples for K=" + std::to_string(k) + " mask=" + std::to_string(mask));
    }
  }
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gamma closed forms", 1, gamma_closed_forms},
      {2, "matrix identities", 10, matrix_identities},
      {3, "eigenvalue anchor", 1, eigenvalue_anchor},
      {4, "order-2 decision thresholds", 5, decision_thresholds},
      {5, "critical bracket", 300, critical_bracket_check},
      {6, "uniform-vector corollary", 1, mandelbrot_corollary},
      {7, "second family", 120, second_family},
      {8, "deterministic engine", 60, deterministic_engine},
      {9, "Monte Carlo validation", 120, monte_carlo},
      {10, "pairing", 300, pairing},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    c.expect(dt.count() <= cr.limit_seconds, "runtime above " + std::to_string(cr.limit_seconds) + " s");
    const bool ok = c.ok();
    failed += !ok;
    std::printf("%s %d %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", cr.id, cr.name, dt.count(), ok ? "" : ": ",
                ok ? "" : c.summary().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
