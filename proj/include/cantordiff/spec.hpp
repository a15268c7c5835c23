#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cantordiff {

/// Base M plus selection probabilities for the two independent random Cantor
/// sets. F1 is generated by p, F2 by q; an absent q means F2 uses p as well.
class CantorSpec {
 public:
  CantorSpec() = default;

  static CantorSpec create(std::vector<double> p,
                           std::optional<std::vector<double>> q = std::nullopt) {
    if (p.size() < 2) {
      throw std::invalid_argument("base M must be at least 2 (got " +
                                  std::to_string(p.size()) + " probabilities)");
    }
    check_probabilities(p, "p");
    if (q) {
      if (q->size() != p.size()) {
        throw std::invalid_argument("q has length " + std::to_string(q->size()) +
                                    " but p has length " + std::to_string(p.size()));
      }
      check_probabilities(*q, "q");
    }
    CantorSpec s;
    s.p_ = std::move(p);
    s.q_ = std::move(q);
    return s;
  }

  int base() const noexcept { return static_cast<int>(p_.size()); }
  const std::vector<double>& p() const noexcept { return p_; }
  const std::vector<double>& q() const noexcept { return q_ ? *q_ : p_; }
  bool has_q() const noexcept { return q_.has_value(); }
  const std::optional<std::vector<double>>& q_opt() const noexcept { return q_; }

  /// Both generating vectors have expected offspring count above one.
  bool is_supercritical() const noexcept { return sum(p()) > 1.0 && sum(q()) > 1.0; }

  bool is_deterministic() const noexcept { return zero_one(p()) && zero_one(q()); }

  bool operator==(const CantorSpec&) const = default;

  static double sum(const std::vector<double>& v) noexcept {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }

 private:
  static void check_probabilities(const std::vector<double>& v, std::string_view name) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0) {
        std::ostringstream os;
        os << name << "[" << i << "] = " << v[i] << " is not a probability in [0,1]";
        throw std::invalid_argument(os.str());
      }
    }
  }

  static bool zero_one(const std::vector<double>& v) noexcept {
    for (double x : v) {
      if (x != 0.0 && x != 1.0) return false;
    }
    return true;
  }

  std::vector<double> p_;
  std::optional<std::vector<double>> q_;
};

/// Splits a comma-separated list, trimming blanks. Empty fields are rejected.
inline std::vector<std::string> split_csv(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    std::string_view field = text.substr(start, comma == std::string_view::npos
                                                    ? std::string_view::npos
                                                    : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    if (field.empty()) {
      throw std::invalid_argument("malformed csv '" + std::string(text) + "': empty field");
    }
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_real(const std::string& field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed number '" + field + "'");
  }
  if (used != field.size()) throw std::invalid_argument("malformed number '" + field + "'");
  return v;
}

/// "1,0,1,0.3" -> {1,0,1,0.3}; the length defines M.
inline std::vector<double> parse_probability_csv(std::string_view text) {
  std::vector<double> out;
  for (const auto& f : split_csv(text)) out.push_back(parse_real(f));
  return out;
}

}  // namespace cantordiff
