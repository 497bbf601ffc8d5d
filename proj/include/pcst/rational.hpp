#pragma once

#include <compare>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace pcst {

// Arbitrary-precision, always-normalized rational. Every tightness test in the
// solvers is an exact equality on these.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "-12", "7", "3/4" or "-5/10" (normalized on construction).
/// Returns nullopt on anything else, including a zero denominator.
std::optional<Rational> parse_rational(std::string_view text);

/// Lowest-terms rendering: "3", "-1/2".
std::string format_rational(const Rational& value);

// A rational extended with a single +infinity element, ordered above every
// finite value. Used for epsilon candidates and proceed timestamps.
class ExtRational {
 public:
  ExtRational() = default;  // +infinity
  ExtRational(Rational value) : value_(std::move(value)) {}  // NOLINT(implicit)
  ExtRational(long long value) : value_(Rational(value)) {}  // NOLINT(implicit)

  static ExtRational infinity() { return ExtRational(); }

  bool is_infinite() const { return !value_.has_value(); }
  bool is_finite() const { return value_.has_value(); }

  /// Precondition: is_finite().
  const Rational& value() const;

  friend bool operator==(const ExtRational& a, const ExtRational& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b);

  /// "inf" or the format_rational rendering.
  std::string str() const;
  static std::optional<ExtRational> parse(std::string_view text);

 private:
  std::optional<Rational> value_;
};

std::ostream& operator<<(std::ostream& os, const ExtRational& value);

}  // namespace pcst
