#pragma once

// Command-line front end: argument parsing with budget layering
// (flags > --config file > environment > built-in defaults), dispatch to the
// modules, and rendering of the result envelope as text or JSON.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "cantordiff/decision.hpp"
#include "cantordiff/determ.hpp"
#include "cantordiff/json.hpp"
#include "cantordiff/pairing.hpp"
#include "cantordiff/parallel.hpp"
#include "cantordiff/simulate.hpp"
#include "cantordiff/spec.hpp"

namespace cantordiff {

inline constexpr const char* kVersion = "0.1.0";

enum class OutputFormat { Text, Json };

struct Budgets {
  std::optional<int> max_order;  // unset: largest order <= 10 within word_budget
  int max_word_len = 6;
  std::uint64_t trials = 10'000;
  int levels = 8;
  double survivor_cap = kDefaultSurvivorCap;
  std::uint64_t word_budget = 100'000'000;
  bool operator==(const Budgets&) const = default;
};

struct RunConfig {
  std::string subcommand;
  std::optional<CantorSpec> spec;
  Budgets budgets;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  OutputFormat format = OutputFormat::Text;
  std::optional<std::string> out_path;
  std::optional<std::string> csv_path;
  bool timings = true;
  // bracket
  std::string family;
  double lo = 0.0, hi = 1.0, tol = 1e-3;
  // deterministic
  int empty_column_cap = kDefaultEmptyColumnCap;
  // pair
  std::vector<Label> odds, evens;
  // selfcheck
  int max_base = 8;
};

/// Help, version or usage error: print `text` and exit with `code`.
struct EarlyExit {
  int code = 0;
  std::string text;
};

using ParseResult = std::variant<RunConfig, EarlyExit>;
using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::optional<std::string>(v) : std::nullopt;
}

namespace detail {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(text, &used));
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      v = static_cast<T>(std::stoull(text, &used));
    } else {
      v = static_cast<T>(std::stoll(text, &used));
    }
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": malformed value '" + text + "'");
  }
}

inline std::vector<Label> parse_labels(const std::string& text, const std::string& what) {
  std::vector<Label> out;
  if (text.empty()) return out;
  try {
    for (const auto& f : split_csv(text)) out.push_back(parse_number<Label>(f, what));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
  return out;
}

inline void apply_env(Budgets& b, const EnvLookup& env) {
  if (auto v = env("CANTORDIFF_MAX_ORDER")) b.max_order = parse_number<int>(*v, "CANTORDIFF_MAX_ORDER");
  if (auto v = env("CANTORDIFF_MAX_WORD_LEN")) b.max_word_len = parse_number<int>(*v, "CANTORDIFF_MAX_WORD_LEN");
  if (auto v = env("CANTORDIFF_TRIALS")) b.trials = parse_number<std::uint64_t>(*v, "CANTORDIFF_TRIALS");
  if (auto v = env("CANTORDIFF_LEVELS")) b.levels = parse_number<int>(*v, "CANTORDIFF_LEVELS");
  if (auto v = env("CANTORDIFF_SURVIVOR_CAP")) b.survivor_cap = parse_number<double>(*v, "CANTORDIFF_SURVIVOR_CAP");
  if (auto v = env("CANTORDIFF_WORD_BUDGET")) b.word_budget = parse_number<std::uint64_t>(*v, "CANTORDIFF_WORD_BUDGET");
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("--config: top level must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "max_order") c.budgets.max_order = value.get<int>();
      else if (key == "max_word_len") c.budgets.max_word_len = value.get<int>();
      else if (key == "trials") c.budgets.trials = value.get<std::uint64_t>();
      else if (key == "levels") c.budgets.levels = value.get<int>();
      else if (key == "survivor_cap") c.budgets.survivor_cap = value.get<double>();
      else if (key == "word_budget") c.budgets.word_budget = value.get<std::uint64_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<unsigned>();
      else throw UsageError("--config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
}

inline void check_budgets(const RunConfig& c) {
  const auto& b = c.budgets;
  if (b.max_order && *b.max_order < 1) throw UsageError("max-order must be positive");
  if (b.max_word_len < 1) throw UsageError("max-word-len must be positive");
  if (b.trials < 1) throw UsageError("trials must be positive");
  if (b.levels < 1) throw UsageError("levels must be positive");
  if (!(b.survivor_cap > 0)) throw UsageError("survivor-cap must be positive");
  if (b.word_budget < 1) throw UsageError("word-budget must be positive");
  if (c.threads < 1) throw UsageError("threads must be positive");
}

}  // namespace detail

/// Largest order m <= 10 whose cumulative word count M + ... + M^m fits the budget.
inline int default_max_order(int base, std::uint64_t word_budget) {
  std::uint64_t total = 0, count = 1;
  int best = 1;
  for (int m = 1; m <= 10; ++m) {
    if (count > word_budget / static_cast<std::uint64_t>(base)) break;
    count *= static_cast<std::uint64_t>(base);
    total += count;
    if (total > word_budget) break;
    best = m;
  }
  return best;
}

inline ParseResult parse_args(const std::vector<std::string>& args,
                              const EnvLookup& env = process_env) {
  CLI::App app{"Interval certificates for differences of random Cantor sets", "cantordiff"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig c;
  c.threads = default_threads();
  std::string p_csv, q_csv, odds_csv, evens_csv, config_path, out_path, csv_path;
  std::optional<int> max_order;
  std::optional<int> max_word_len, levels;
  std::optional<std::uint64_t> trials, word_budget;
  std::optional<double> survivor_cap;
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  bool as_json = false, no_timings = false;

  app.add_option("--threads", threads, "Worker threads (default: available parallelism)");
  app.add_option("--out", out_path, "Write the result to this file instead of stdout");
  app.add_option("--config", config_path, "JSON file with budget defaults");
  app.add_flag("--no-timings", no_timings, "Omit wall-clock timings from the output");

  auto spec_options = [&](CLI::App* sub, bool required) {
    auto* p = sub->add_option("--p", p_csv, "Selection probabilities of F1, comma separated");
    if (required) p->required();
    sub->add_option("--q", q_csv, "Selection probabilities of F2 (default: same as p)");
  };
  auto search_options = [&](CLI::App* sub) {
    sub->add_option("--max-order", max_order, "Highest order of the gamma scan");
    sub->add_option("--max-word-len", max_word_len, "Longest word in the spectral search");
    sub->add_option("--word-budget", word_budget, "Cap on enumerated words");
  };

  auto* analyze = app.add_subcommand("analyze", "Decide interval existence for one spec");
  spec_options(analyze, true);
  search_options(analyze);
  analyze->add_flag("--json", as_json, "JSON output");

  auto* bracket = app.add_subcommand("bracket", "Bracket the critical parameter of a family");
  bracket->add_option("--family", c.family, "Template such as 1,0,1,rho")->required();
  bracket->add_option("--lo", c.lo, "Parameter certified NoIntervalAS")->required();
  bracket->add_option("--hi", c.hi, "Parameter certified IntervalAS")->required();
  bracket->add_option("--tol", c.tol, "Target bracket width")->capture_default_str();
  search_options(bracket);
  bracket->add_flag("--json", as_json, "JSON output");

  auto* determ = app.add_subcommand("deterministic", "Decide a 0-1 spec via the attractor of G");
  spec_options(determ, true);
  determ->add_option("--cap", c.empty_column_cap, "Deepest level of the empty-column scan")
      ->capture_default_str();
  determ->add_flag("--json", as_json, "JSON output");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo statistics of the construction");
  spec_options(sim, true);
  sim->add_option("--levels", levels, "Deepest level");
  sim->add_option("--trials", trials, "Number of independent trials");
  sim->add_option("--seed", seed, "Generator seed");
  sim->add_option("--survivor-cap", survivor_cap, "Cap on expected survivors per level");
  sim->add_option("--csv", csv_path, "Write per-level CSV rows to this file");
  sim->add_flag("--json", as_json, "JSON output");

  auto* pair = app.add_subcommand("pair", "Three-colour Delta-pairing of a column");
  pair->add_option("--odds", odds_csv, "Odd labels (R-triangles)")->required();
  pair->add_option("--evens", evens_csv, "Even labels (L-triangles)")->required();
  pair->add_flag("--json", as_json, "JSON output");

  auto* self = app.add_subcommand("selfcheck", "Exhaustive attractor scan and cross-validation");
  self->add_option("--max-base", c.max_base, "Largest base in the cross-validation")
      ->capture_default_str();
  self->add_flag("--json", as_json, "JSON output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    return EarlyExit{0, app.help()};
  } catch (const CLI::CallForVersion&) {
    return EarlyExit{0, std::string(kVersion) + "\n"};
  } catch (const CLI::ParseError& e) {
    return EarlyExit{1, std::string("error: ") + e.what() + "\n"};
  }

  try {
    c.subcommand = app.get_subcommands().front()->get_name();
    detail::apply_env(c.budgets, env);
    if (!config_path.empty()) detail::apply_config_file(c, config_path);
    if (max_order) c.budgets.max_order = *max_order;
    if (max_word_len) c.budgets.max_word_len = *max_word_len;
    if (word_budget) c.budgets.word_budget = *word_budget;
    if (trials) c.budgets.trials = *trials;
    if (levels) c.budgets.levels = *levels;
    if (survivor_cap) c.budgets.survivor_cap = *survivor_cap;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    detail::check_budgets(c);
    c.format = as_json ? OutputFormat::Json : OutputFormat::Text;
    c.timings = !no_timings;
    if (!out_path.empty()) c.out_path = out_path;
    if (!csv_path.empty()) c.csv_path = csv_path;

    if (!p_csv.empty()) {
      std::vector<double> p, q;
      try {
        p = parse_probability_csv(p_csv);
      } catch (const std::exception& e) {
        throw detail::UsageError(std::string("--p: ") + e.what());
      }
      std::optional<std::vector<double>> qo;
      if (!q_csv.empty()) {
        try {
          qo = parse_probability_csv(q_csv);
        } catch (const std::exception& e) {
          throw detail::UsageError(std::string("--q: ") + e.what());
        }
      }
      try {
        c.spec = CantorSpec::create(std::move(p), std::move(qo));
      } catch (const std::exception& e) {
        throw detail::UsageError(std::string("--p/--q: ") + e.what());
      }
    }
    if (c.subcommand == "pair") {
      c.odds = detail::parse_labels(odds_csv, "--odds");
      c.evens = detail::parse_labels(evens_csv, "--evens");
    }
    if (c.subcommand == "bracket") {
      if (!(c.tol > 0)) throw detail::UsageError("--tol must be positive");
      if (!(0.0 <= c.lo && c.lo < c.hi && c.hi <= 1.0)) {
        throw detail::UsageError("--lo/--hi must satisfy 0 <= lo < hi <= 1");
      }
    }
    if (c.subcommand == "deterministic" && c.empty_column_cap < 1) {
      throw detail::UsageError("--cap must be positive");
    }
    if (c.subcommand == "selfcheck" && (c.max_base < 2 || c.max_base > 16)) {
      throw detail::UsageError("--max-base must lie in [2,16]");
    }
  } catch (const detail::UsageError& e) {
    return EarlyExit{1, std::string("error: ") + e.what() + "\n"};
  }
  return c;
}

inline ParseResult parse_args(int argc, const char* const* argv, const EnvLookup& env = process_env) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args, env);
}

struct AnalyzePayload {
  GammaVector gamma;
  Decision decision;
  bool operator==(const AnalyzePayload&) const = default;
};

struct DeterministicPayload {
  DeterministicDecision decision;
  std::optional<EmptyColumnWitness> empty_column;
  bool operator==(const DeterministicPayload&) const = default;
};

struct PairPayload {
  ColoredPairing coloring;
  std::vector<Couple> max_delta_pairs;
  std::optional<std::string> violation;
  bool operator==(const PairPayload&) const = default;
};

struct SelfcheckPayload {
  AttractorScan scan;
  CrossValidation cross;
  bool ok = false;
  bool operator==(const SelfcheckPayload&) const = default;
};

using Payload = std::variant<AnalyzePayload, Bracket, DeterministicPayload, SimulationStats,
                             PairPayload, SelfcheckPayload>;

struct Timing {
  std::string phase;
  double seconds = 0.0;
  bool operator==(const Timing&) const = default;
};

struct ResultEnvelope {
  std::string version = kVersion;
  std::string subcommand;
  json input;
  std::vector<Timing> timings;
  Payload payload;
  bool operator==(const ResultEnvelope&) const = default;
};

inline void to_json(json& j, const AnalyzePayload& p) {
  j = json{{"gamma", p.gamma}, {"decision", p.decision}};
}
inline void from_json(const json& j, AnalyzePayload& p) {
  j.at("gamma").get_to(p.gamma);
  j.at("decision").get_to(p.decision);
}
inline void to_json(json& j, const DeterministicPayload& p) {
  j = json{{"decision", p.decision}};
  detail::put_optional(j, "empty_column", p.empty_column);
}
inline void from_json(const json& j, DeterministicPayload& p) {
  j.at("decision").get_to(p.decision);
  detail::get_optional(j, "empty_column", p.empty_column);
}
inline void to_json(json& j, const PairPayload& p) {
  j = json{{"coloring", p.coloring}, {"max_delta_pairs", p.max_delta_pairs}};
  detail::put_optional(j, "violation", p.violation);
}
inline void from_json(const json& j, PairPayload& p) {
  j.at("coloring").get_to(p.coloring);
  j.at("max_delta_pairs").get_to(p.max_delta_pairs);
  detail::get_optional(j, "violation", p.violation);
}
inline void to_json(json& j, const SelfcheckPayload& p) {
  j = json{{"scan", p.scan}, {"cross_validation", p.cross}, {"ok", p.ok}};
}
inline void from_json(const json& j, SelfcheckPayload& p) {
  j.at("scan").get_to(p.scan);
  j.at("cross_validation").get_to(p.cross);
  j.at("ok").get_to(p.ok);
}
inline void to_json(json& j, const Timing& t) { j = json{{"phase", t.phase}, {"seconds", t.seconds}}; }
inline void from_json(const json& j, Timing& t) {
  j.at("phase").get_to(t.phase);
  j.at("seconds").get_to(t.seconds);
}

inline void to_json(json& j, const ResultEnvelope& e) {
  j = json{{"tool", "cantordiff"}, {"version", e.version}, {"subcommand", e.subcommand},
           {"input", e.input}};
  j["timings"] = e.timings;
  std::visit([&](const auto& p) { j["payload"] = p; }, e.payload);
}
inline void from_json(const json& j, ResultEnvelope& e) {
  j.at("version").get_to(e.version);
  j.at("subcommand").get_to(e.subcommand);
  e.input = j.at("input");
  j.at("timings").get_to(e.timings);
  const json& p = j.at("payload");
  if (e.subcommand == "analyze") e.payload = p.get<AnalyzePayload>();
  else if (e.subcommand == "bracket") e.payload = p.get<Bracket>();
  else if (e.subcommand == "deterministic") e.payload = p.get<DeterministicPayload>();
  else if (e.subcommand == "simulate") e.payload = p.get<SimulationStats>();
  else if (e.subcommand == "pair") e.payload = p.get<PairPayload>();
  else if (e.subcommand == "selfcheck") e.payload = p.get<SelfcheckPayload>();
  else throw std::invalid_argument("unknown subcommand '" + e.subcommand + "'");
}

struct RunResult {
  ResultEnvelope envelope;
  int exit_code = 0;
};

namespace detail {

inline SearchOptions search_options(const RunConfig& c, int base) {
  SearchOptions o;
  o.word_budget = c.budgets.word_budget;
  o.max_order = c.budgets.max_order.value_or(default_max_order(base, c.budgets.word_budget));
  o.max_word_len = c.budgets.max_word_len;
  o.threads = c.threads;
  return o;
}

inline json input_echo(const RunConfig& c) {
  json in = json::object();
  if (c.spec) in["spec"] = *c.spec;
  const auto& b = c.budgets;
  if (c.subcommand == "analyze" || c.subcommand == "bracket") {
    const int base = c.spec ? c.spec->base() : FamilyTemplate::parse(c.family).base();
    const auto o = search_options(c, base);
    in["max_order"] = o.max_order;
    in["max_word_len"] = o.max_word_len;
    in["word_budget"] = o.word_budget;
  }
  if (c.subcommand == "bracket") {
    in["family"] = c.family;
    in["lo"] = c.lo;
    in["hi"] = c.hi;
    in["tol"] = c.tol;
  }
  if (c.subcommand == "deterministic") in["cap"] = c.empty_column_cap;
  if (c.subcommand == "simulate") {
    in["levels"] = b.levels;
    in["trials"] = b.trials;
    in["seed"] = c.seed;
    in["survivor_cap"] = b.survivor_cap;
  }
  if (c.subcommand == "pair") {
    in["odds"] = c.odds;
    in["evens"] = c.evens;
  }
  if (c.subcommand == "selfcheck") in["max_base"] = c.max_base;
  return in;
}

class PhaseClock {
 public:
  explicit PhaseClock(std::vector<Timing>& out) : out_(out) {}
  template <class Fn>
  auto time(const std::string& phase, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    out_.push_back({phase, dt.count()});
    return r;
  }

 private:
  std::vector<Timing>& out_;
};

inline const CantorSpec& need_spec(const RunConfig& c) {
  if (!c.spec) throw std::invalid_argument(c.subcommand + " needs --p");
  return *c.spec;
}

}  // namespace detail

/// Exit code 0 for a definitive result, 2 for Inconclusive, 1 for a failed
/// check. Module errors propagate as exceptions.
inline RunResult run(const RunConfig& c) {
  RunResult r;
  auto& env = r.envelope;
  env.subcommand = c.subcommand;
  env.input = detail::input_echo(c);
  detail::PhaseClock clock(env.timings);

  if (c.subcommand == "analyze") {
    const CantorSpec& spec = detail::need_spec(c);
    AnalyzePayload p;
    p.gamma = correlations(spec);
    const auto opts = detail::search_options(c, spec.base());
    p.decision = clock.time("decide", [&] { return decide(spec, opts); });
    r.exit_code = p.decision.verdict == Verdict::Inconclusive ? 2 : 0;
    env.payload = std::move(p);
  } else if (c.subcommand == "bracket") {
    const auto family = FamilyTemplate::parse(c.family);
    const auto opts = detail::search_options(c, family.base());
    env.payload = clock.time("bracket", [&] { return critical_bracket(family, c.lo, c.hi, c.tol, opts); });
  } else if (c.subcommand == "deterministic") {
    const CantorSpec& spec = detail::need_spec(c);
    DeterministicPayload p;
    p.decision = clock.time("attractor", [&] { return decide_deterministic(spec); });
    p.empty_column = clock.time("empty-column", [&] { return empty_column_depth(spec, c.empty_column_cap); });
    env.payload = std::move(p);
  } else if (c.subcommand == "simulate") {
    const CantorSpec& spec = detail::need_spec(c);
    ExperimentOptions o;
    o.threads = c.threads;
    o.survivor_cap = c.budgets.survivor_cap;
    auto stats = clock.time("simulate", [&] {
      return run_experiment(spec, c.budgets.levels, c.budgets.trials, c.seed, o);
    });
    if (c.csv_path) {
      std::ofstream f(*c.csv_path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write '" + *c.csv_path + "'");
      write_csv(f, stats);
    }
    env.payload = std::move(stats);
  } else if (c.subcommand == "pair") {
    PairPayload p;
    p.coloring = clock.time("three-color", [&] { return three_color_pairing(c.odds, c.evens); });
    p.violation = check_coloring(c.odds, c.evens, p.coloring);
    p.max_delta_pairs = clock.time("matching", [&] { return max_delta_pairs({c.odds, c.evens}); });
    r.exit_code = p.violation ? 1 : 0;
    env.payload = std::move(p);
  } else if (c.subcommand == "selfcheck") {
    SelfcheckPayload p;
    p.scan = clock.time("attractor-scan", [&] { return scan_all_attractors(c.threads); });
    p.cross = clock.time("cross-validation", [&] { return cross_validate_deterministic(c.max_base); });
    p.ok = p.scan.non_fixed == 0 && p.cross.ok();
    r.exit_code = p.ok ? 0 : 1;
    env.payload = std::move(p);
  } else {
    throw std::invalid_argument("unknown subcommand '" + c.subcommand + "'");
  }
  if (!c.timings) env.timings.clear();
  return r;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::string word_text(const Word& w) {
  std::string s = "(";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s + ")";
}

inline void render_decision(std::ostream& os, const Decision& d) {
  os << "verdict: " << to_string(d.verdict) << '\n';
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, AllAboveCertificate>) {
          os << "certificate: all gamma values of order " << x.order << " exceed 1 (min "
             << fmt(x.min_gamma) << ")\n";
        } else if constexpr (std::is_same_v<T, ConsecutivePairCertificate>) {
          os << "certificate: order " << x.order << ", gamma[" << x.index << "] = " << fmt(x.gamma)
             << ", next = " << fmt(x.gamma_next) << "\n";
        } else if constexpr (std::is_same_v<T, SpectralCertificate>) {
          os << "certificate: word " << word_text(x.word) << ", eigenvalue " << fmt(x.eigenvalue)
             << "\n";
        } else {
          os << "certificate: none up to order " << x.max_order << " and word length "
             << x.max_word_len << "\n";
        }
      },
      d.certificate);
  os << "effort: orders " << d.effort.orders_scanned << ", word length "
     << d.effort.word_len_scanned << ", words " << d.effort.words_scanned << '\n';
}

inline void render_text(std::ostream& os, const ResultEnvelope& e) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, AnalyzePayload>) {
          os << "gamma:";
          for (double g : p.gamma.values) os << ' ' << fmt(g);
          os << '\n';
          render_decision(os, p.decision);
        } else if constexpr (std::is_same_v<T, Bracket>) {
          os << "lo: " << fmt(p.lo) << "\nhi: " << fmt(p.hi) << "\nassumption: " << p.assumption
             << "\nevaluations: " << p.effort.evaluations << "\n[lo]\n";
          render_decision(os, p.lo_certificate);
          os << "[hi]\n";
          render_decision(os, p.hi_certificate);
        } else if constexpr (std::is_same_v<T, DeterministicPayload>) {
          os << "verdict: " << to_string(p.decision.verdict)
             << (p.decision.degenerate ? " (degenerate)" : "") << "\nattractor:";
          for (int code : p.decision.report.attractor.codes()) os << " T" << code;
          os << "\npreperiod: " << p.decision.report.preperiod
             << "\nperiod: " << p.decision.report.period << '\n';
          if (p.empty_column) {
            os << "empty column: level " << p.empty_column->level << ", digits "
               << word_text(p.empty_column->digits) << '\n';
          } else {
            os << "empty column: none\n";
          }
        } else if constexpr (std::is_same_v<T, SimulationStats>) {
          os << "level trials survivors_mean survivors_var survival_rate dim_estimate\n";
          for (const auto& l : p.f1) {
            os << l.level << ' ' << l.trials << ' ' << fmt(l.survivors_mean) << ' '
               << fmt(l.survivors_var) << ' ' << fmt(l.survival_rate) << ' '
               << (l.dim_estimate ? fmt(*l.dim_estimate) : "-") << '\n';
          }
          for (const auto& c : p.level1_columns) {
            os << "column " << c.k << ": z_L " << fmt(c.z_l_mean) << " +- " << fmt(c.z_l_se)
               << " (expected " << fmt(c.expected_l) << "), z_R " << fmt(c.z_r_mean) << " +- "
               << fmt(c.z_r_se) << " (expected " << fmt(c.expected_r) << ")\n";
          }
        } else if constexpr (std::is_same_v<T, PairPayload>) {
          for (std::size_t i = 0; i < p.coloring.pairs.size(); ++i) {
            const auto& c = p.coloring.pairs[i];
            const auto& col = p.coloring.colors[i];
            os << '(' << c.even << ',' << c.odd << ") " << (col ? to_string(*col) : "-") << '\n';
          }
          os << "max delta pairs: " << p.max_delta_pairs.size() << '\n';
          os << "check: " << (p.violation ? *p.violation : std::string("ok")) << '\n';
        } else {
          os << "attractor scan: " << p.scan.starts << " starts, max period " << p.scan.max_period
             << ", max preperiod " << p.scan.max_preperiod << '\n'
             << "cross-validation (M <= " << p.cross.max_base << "): " << p.cross.vectors
             << " vectors, " << p.cross.mismatches << " mismatches, " << p.cross.occupancy_failures
             << " occupancy failures, " << p.cross.case2_failures << " case-2 failures\n";
          for (const auto& f : p.cross.failures) os << "  " << f << '\n';
          os << "selfcheck: " << (p.ok ? "ok" : "FAILED") << '\n';
        }
      },
      e.payload);
  for (const auto& t : e.timings) os << "time " << t.phase << ": " << fmt(t.seconds) << " s\n";
}

}  // namespace detail

inline std::string render(const ResultEnvelope& e, OutputFormat format) {
  if (format == OutputFormat::Json) return json(e).dump(2) + "\n";
  std::ostringstream os;
  detail::render_text(os, e);
  return os.str();
}

/// Full program: parse, run, write. Returns the process exit code.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                      const EnvLookup& env = process_env) {
  auto parsed = parse_args(args, env);
  if (auto* early = std::get_if<EarlyExit>(&parsed)) {
    (early->code == 0 ? out : err) << early->text;
    return early->code;
  }
  const auto& config = std::get<RunConfig>(parsed);
  try {
    const RunResult r = run(config);
    const std::string text = render(r.envelope, config.format);
    if (config.out_path) {
      std::ofstream f(*config.out_path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write '" + *config.out_path + "'");
      f << text;
    } else {
      out << text;
    }
    return r.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << config.subcommand << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cantordiff
