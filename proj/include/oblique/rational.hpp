#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace oblique {

/// Exact arbitrary-precision rational. Every probability, utility and
/// confidence in the library is one of these; nothing is ever rounded.
using Rational = boost::multiprecision::cpp_rational;

/// Parses `p/q`, an integer, or a decimal literal (optionally signed).
/// Decimals are converted digit by digit, so "0.015" is exactly 3/200.
std::optional<Rational> parse_rational(std::string_view text);

/// Always `p/q` with q > 0, including integers ("-50/1").
std::string to_string(const Rational& value);

/// Shortest exact literal: "-50", "3/200". Used by the serializer.
std::string to_literal(const Rational& value);

}  // namespace oblique
