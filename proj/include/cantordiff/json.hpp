#pragma once

// JSON forms of every result type. Doubles are written in shortest
// round-trip form, so parse(dump(x)) == x exactly.

#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "cantordiff/decision.hpp"
#include "cantordiff/determ.hpp"
#include "cantordiff/pairing.hpp"
#include "cantordiff/simulate.hpp"
#include "cantordiff/spec.hpp"
#include "cantordiff/spectrum.hpp"

namespace cantordiff {

using nlohmann::json;

namespace detail {

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key) || j.at(key).is_null()) {
    v.reset();
  } else {
    v = j.at(key).get<T>();
  }
}

template <class E>
E enum_from(const json& j, std::initializer_list<E> all) {
  const auto s = j.get<std::string>();
  for (E e : all) {
    if (s == to_string(e)) return e;
  }
  throw std::invalid_argument("unknown enum value '" + s + "'");
}

}  // namespace detail

inline void to_json(json& j, const CantorSpec& s) {
  j = json{{"M", s.base()}, {"p", s.p()}};
  detail::put_optional(j, "q", s.q_opt());
}
inline void from_json(const json& j, CantorSpec& s) {
  std::optional<std::vector<double>> q;
  detail::get_optional(j, "q", q);
  s = CantorSpec::create(j.at("p").get<std::vector<double>>(), std::move(q));
  if (j.contains("M") && j.at("M").get<int>() != s.base()) {
    throw std::invalid_argument("M does not match the length of p");
  }
}

inline void to_json(json& j, const GammaVector& g) { j = g.values; }
inline void from_json(const json& j, GammaVector& g) { g.values = j.get<std::vector<double>>(); }

inline void to_json(json& j, const ExpectationMatrix& m) {
  j = json::array({json::array({m.ll, m.lr}), json::array({m.rl, m.rr})});
}
inline void from_json(const json& j, ExpectationMatrix& m) {
  m = {j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(), j.at(1).at(0).get<double>(),
       j.at(1).at(1).get<double>()};
}

inline void to_json(json& j, Verdict v) { j = to_string(v); }
inline void from_json(const json& j, Verdict& v) {
  v = detail::enum_from(j, {Verdict::IntervalAS, Verdict::NoIntervalAS, Verdict::Inconclusive});
}

inline void to_json(json& j, const Certificate& c) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AllAboveCertificate>) {
          j = json{{"kind", "all-above"}, {"order", x.order}, {"min_gamma", x.min_gamma}};
        } else if constexpr (std::is_same_v<T, ConsecutivePairCertificate>) {
          j = json{{"kind", "consecutive-pair"}, {"order", x.order}, {"index", x.index},
                   {"gamma", x.gamma}, {"gamma_next", x.gamma_next}};
        } else if constexpr (std::is_same_v<T, SpectralCertificate>) {
          j = json{{"kind", "spectral"}, {"word", x.word}, {"eigenvalue", x.eigenvalue}};
        } else {
          j = json{{"kind", "inconclusive"}, {"max_order", x.max_order},
                   {"max_word_len", x.max_word_len}};
        }
      },
      c);
}
inline void from_json(const json& j, Certificate& c) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "all-above") {
    c = AllAboveCertificate{j.at("order").get<int>(), j.at("min_gamma").get<double>()};
  } else if (kind == "consecutive-pair") {
    c = ConsecutivePairCertificate{j.at("order").get<int>(), j.at("index").get<std::uint64_t>(),
                                   j.at("gamma").get<double>(), j.at("gamma_next").get<double>()};
  } else if (kind == "spectral") {
    c = SpectralCertificate{j.at("word").get<Word>(), j.at("eigenvalue").get<double>()};
  } else if (kind == "inconclusive") {
    c = InconclusiveCertificate{j.at("max_order").get<int>(), j.at("max_word_len").get<int>()};
  } else {
    throw std::invalid_argument("unknown certificate kind '" + kind + "'");
  }
}

inline void to_json(json& j, const SearchEffort& e) {
  j = json{{"orders_scanned", e.orders_scanned},
           {"word_len_scanned", e.word_len_scanned},
           {"words_scanned", e.words_scanned}};
}
inline void from_json(const json& j, SearchEffort& e) {
  j.at("orders_scanned").get_to(e.orders_scanned);
  j.at("word_len_scanned").get_to(e.word_len_scanned);
  j.at("words_scanned").get_to(e.words_scanned);
}

inline void to_json(json& j, const Decision& d) {
  j = json{{"verdict", d.verdict}, {"certificate", d.certificate}, {"effort", d.effort}};
}
inline void from_json(const json& j, Decision& d) {
  j.at("verdict").get_to(d.verdict);
  j.at("certificate").get_to(d.certificate);
  j.at("effort").get_to(d.effort);
}

inline void to_json(json& j, const BracketEffort& e) {
  j = json{{"max_order", e.max_order}, {"max_word_len", e.max_word_len},
           {"evaluations", e.evaluations}};
}
inline void from_json(const json& j, BracketEffort& e) {
  j.at("max_order").get_to(e.max_order);
  j.at("max_word_len").get_to(e.max_word_len);
  j.at("evaluations").get_to(e.evaluations);
}

inline void to_json(json& j, const Bracket& b) {
  j = json{{"lo", b.lo},
           {"hi", b.hi},
           {"lo_certificate", b.lo_certificate},
           {"hi_certificate", b.hi_certificate},
           {"effort", b.effort},
           {"assumption", b.assumption}};
}
inline void from_json(const json& j, Bracket& b) {
  j.at("lo").get_to(b.lo);
  j.at("hi").get_to(b.hi);
  j.at("lo_certificate").get_to(b.lo_certificate);
  j.at("hi_certificate").get_to(b.hi_certificate);
  j.at("effort").get_to(b.effort);
  j.at("assumption").get_to(b.assumption);
}

/// Listed as T-codes, e.g. ["T6","T9"].
inline void to_json(json& j, const MatrixSet& s) {
  j = json::array();
  for (int c : s.codes()) j.push_back("T" + std::to_string(c));
}
inline void from_json(const json& j, MatrixSet& s) {
  s = {};
  for (const auto& e : j) {
    const auto t = e.get<std::string>();
    if (t.size() < 2 || t[0] != 'T') throw std::invalid_argument("bad T-code '" + t + "'");
    const int code = std::stoi(t.substr(1));
    if (code < 0 || code > 15) throw std::invalid_argument("bad T-code '" + t + "'");
    s.insert({static_cast<std::uint8_t>(code)});
  }
}

inline void to_json(json& j, const AttractorReport& r) {
  j = json{{"attractor", r.attractor}, {"cycle", r.cycle},         {"preperiod", r.preperiod},
           {"period", r.period},       {"trajectory", r.trajectory}};
}
inline void from_json(const json& j, AttractorReport& r) {
  j.at("attractor").get_to(r.attractor);
  j.at("cycle").get_to(r.cycle);
  j.at("preperiod").get_to(r.preperiod);
  j.at("period").get_to(r.period);
  j.at("trajectory").get_to(r.trajectory);
}

inline void to_json(json& j, DeterministicVerdict v) { j = to_string(v); }
inline void from_json(const json& j, DeterministicVerdict& v) {
  v = detail::enum_from(j, {DeterministicVerdict::Interval, DeterministicVerdict::NoInterval});
}

inline void to_json(json& j, const EmptyColumnWitness& w) {
  j = json{{"level", w.level}, {"index", w.index}, {"digits", w.digits}};
}
inline void from_json(const json& j, EmptyColumnWitness& w) {
  j.at("level").get_to(w.level);
  j.at("index").get_to(w.index);
  j.at("digits").get_to(w.digits);
}

inline void to_json(json& j, const DeterministicDecision& d) {
  j = json{{"verdict", d.verdict}, {"degenerate", d.degenerate}, {"initial", d.initial},
           {"report", d.report}};
}
inline void from_json(const json& j, DeterministicDecision& d) {
  j.at("verdict").get_to(d.verdict);
  j.at("degenerate").get_to(d.degenerate);
  j.at("initial").get_to(d.initial);
  j.at("report").get_to(d.report);
}

inline void to_json(json& j, const AttractorScan& s) {
  j = json{{"starts", s.starts}, {"max_period", s.max_period},
           {"max_preperiod", s.max_preperiod}, {"non_fixed", s.non_fixed}};
}
inline void from_json(const json& j, AttractorScan& s) {
  j.at("starts").get_to(s.starts);
  j.at("max_period").get_to(s.max_period);
  j.at("max_preperiod").get_to(s.max_preperiod);
  j.at("non_fixed").get_to(s.non_fixed);
}

inline void to_json(json& j, const CrossValidation& c) {
  j = json{{"max_base", c.max_base},
           {"vectors", c.vectors},
           {"no_interval", c.no_interval},
           {"mismatches", c.mismatches},
           {"occupancy_checked", c.occupancy_checked},
           {"occupancy_failures", c.occupancy_failures},
           {"case2_checked", c.case2_checked},
           {"case2_failures", c.case2_failures},
           {"failures", c.failures}};
}
inline void from_json(const json& j, CrossValidation& c) {
  j.at("max_base").get_to(c.max_base);
  j.at("vectors").get_to(c.vectors);
  j.at("no_interval").get_to(c.no_interval);
  j.at("mismatches").get_to(c.mismatches);
  j.at("occupancy_checked").get_to(c.occupancy_checked);
  j.at("occupancy_failures").get_to(c.occupancy_failures);
  j.at("case2_checked").get_to(c.case2_checked);
  j.at("case2_failures").get_to(c.case2_failures);
  j.at("failures").get_to(c.failures);
}

inline void to_json(json& j, const LevelStats& s) {
  j = json{{"level", s.level},
           {"trials", s.trials},
           {"survivors_mean", s.survivors_mean},
           {"survivors_var", s.survivors_var},
           {"survival_rate", s.survival_rate}};
  detail::put_optional(j, "dim_estimate", s.dim_estimate);
}
inline void from_json(const json& j, LevelStats& s) {
  j.at("level").get_to(s.level);
  j.at("trials").get_to(s.trials);
  j.at("survivors_mean").get_to(s.survivors_mean);
  j.at("survivors_var").get_to(s.survivors_var);
  j.at("survival_rate").get_to(s.survival_rate);
  detail::get_optional(j, "dim_estimate", s.dim_estimate);
}

inline void to_json(json& j, const ColumnMean& c) {
  j = json{{"k", c.k},
           {"z_l_mean", c.z_l_mean},
           {"z_l_se", c.z_l_se},
           {"z_r_mean", c.z_r_mean},
           {"z_r_se", c.z_r_se},
           {"expected_l", c.expected_l},
           {"expected_r", c.expected_r}};
}
inline void from_json(const json& j, ColumnMean& c) {
  j.at("k").get_to(c.k);
  j.at("z_l_mean").get_to(c.z_l_mean);
  j.at("z_l_se").get_to(c.z_l_se);
  j.at("z_r_mean").get_to(c.z_r_mean);
  j.at("z_r_se").get_to(c.z_r_se);
  j.at("expected_l").get_to(c.expected_l);
  j.at("expected_r").get_to(c.expected_r);
}

inline void to_json(json& j, const ConstantColumnEmpty& c) {
  j = json{{"level", c.level}, {"digit", c.digit}, {"empty_fraction", c.empty_fraction}};
}
inline void from_json(const json& j, ConstantColumnEmpty& c) {
  j.at("level").get_to(c.level);
  j.at("digit").get_to(c.digit);
  j.at("empty_fraction").get_to(c.empty_fraction);
}

inline void to_json(json& j, const SimulationStats& s) {
  j = json{{"M", s.base},
           {"levels", s.levels},
           {"trials", s.trials},
           {"seed", s.seed},
           {"f1", s.f1},
           {"f2", s.f2},
           {"level1_columns", s.level1_columns},
           {"constant_columns", s.constant_columns}};
  detail::put_optional(j, "dimension_f1", s.dimension_f1);
  detail::put_optional(j, "dimension_f2", s.dimension_f2);
}
inline void from_json(const json& j, SimulationStats& s) {
  j.at("M").get_to(s.base);
  j.at("levels").get_to(s.levels);
  j.at("trials").get_to(s.trials);
  j.at("seed").get_to(s.seed);
  j.at("f1").get_to(s.f1);
  j.at("f2").get_to(s.f2);
  j.at("level1_columns").get_to(s.level1_columns);
  j.at("constant_columns").get_to(s.constant_columns);
  detail::get_optional(j, "dimension_f1", s.dimension_f1);
  detail::get_optional(j, "dimension_f2", s.dimension_f2);
}

inline void to_json(json& j, const Couple& c) { j = json::array({c.even, c.odd}); }
inline void from_json(const json& j, Couple& c) {
  c = {j.at(0).get<Label>(), j.at(1).get<Label>()};
}

inline void to_json(json& j, Color c) { j = to_string(c); }
inline void from_json(const json& j, Color& c) {
  c = detail::enum_from(j, {Color::r, Color::g, Color::b});
}

inline void to_json(json& j, const PhiStep& s) {
  j = json{{"j1", {s.j1_first, s.j1_last}}, {"j2", {s.j2_first, s.j2_last}},
           {"new_start", s.new_start}};
}
inline void from_json(const json& j, PhiStep& s) {
  s.j1_first = j.at("j1").at(0).get<Label>();
  s.j1_last = j.at("j1").at(1).get<Label>();
  s.j2_first = j.at("j2").at(0).get<Label>();
  s.j2_last = j.at("j2").at(1).get<Label>();
  j.at("new_start").get_to(s.new_start);
}

inline void to_json(json& j, const ColoredPairing& c) {
  json colors = json::array();
  for (const auto& col : c.colors) colors.push_back(col ? json(*col) : json(nullptr));
  j = json{{"pairs", c.pairs}, {"colors", colors}, {"trace", c.trace}};
}
inline void from_json(const json& j, ColoredPairing& c) {
  j.at("pairs").get_to(c.pairs);
  c.colors.clear();
  for (const auto& e : j.at("colors")) {
    c.colors.push_back(e.is_null() ? std::nullopt : std::optional<Color>(e.get<Color>()));
  }
  j.at("trace").get_to(c.trace);
}

}  // namespace cantordiff
