#include "pcst/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace pcst {
namespace {

bool parse_integer(std::string_view text, bool allow_sign, boost::multiprecision::cpp_int& out) {
  std::size_t pos = 0;
  bool negative = false;
  if (allow_sign && pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  if (pos == text.size()) return false;
  boost::multiprecision::cpp_int acc = 0;
  for (; pos < text.size(); ++pos) {
    const unsigned char c = static_cast<unsigned char>(text[pos]);
    if (!std::isdigit(c)) return false;
    acc = acc * 10 + (c - '0');
  }
  out = negative ? -acc : acc;
  return true;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  boost::multiprecision::cpp_int num;
  if (slash == std::string_view::npos) {
    if (!parse_integer(text, true, num)) return std::nullopt;
    return Rational(num);
  }
  boost::multiprecision::cpp_int den;
  if (!parse_integer(text.substr(0, slash), true, num)) return std::nullopt;
  if (!parse_integer(text.substr(slash + 1), false, den)) return std::nullopt;
  if (den == 0) return std::nullopt;
  return Rational(num, den);
}

std::string format_rational(const Rational& value) {
  std::string out = boost::multiprecision::numerator(value).str();
  const auto den = boost::multiprecision::denominator(value);
  if (den != 1) {
    out += '/';
    out += den.str();
  }
  return out;
}

const Rational& ExtRational::value() const {
  if (!value_) throw std::logic_error("ExtRational::value() on infinity");
  return *value_;
}

std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
  if (a.is_infinite() || b.is_infinite()) {
    return a.is_infinite() <=> b.is_infinite();
  }
  if (*a.value_ < *b.value_) return std::strong_ordering::less;
  if (*b.value_ < *a.value_) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string ExtRational::str() const {
  return is_infinite() ? std::string("inf") : format_rational(*value_);
}

std::optional<ExtRational> ExtRational::parse(std::string_view text) {
  if (text == "inf") return ExtRational::infinity();
  auto r = parse_rational(text);
  if (!r) return std::nullopt;
  return ExtRational(std::move(*r));
}

std::ostream& operator<<(std::ostream& os, const ExtRational& value) { return os << value.str(); }

}  // namespace pcst
