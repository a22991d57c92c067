#include "oblique/rational.hpp"

#include <cctype>

namespace oblique {

namespace {

using boost::multiprecision::cpp_int;

std::optional<cpp_int> parse_digits(std::string_view digits) {
    if (digits.empty()) return std::nullopt;
    cpp_int value = 0;
    for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    if (text.empty()) return std::nullopt;

    Rational result;
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        auto num = parse_digits(text.substr(0, slash));
        auto den = parse_digits(text.substr(slash + 1));
        if (!num || !den || *den == 0) return std::nullopt;
        result = Rational(*num, *den);
    } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
        auto whole = parse_digits(text.substr(0, dot));
        auto frac_text = text.substr(dot + 1);
        auto frac = parse_digits(frac_text);
        if (!whole || !frac) return std::nullopt;
        cpp_int scale = 1;
        for (std::size_t i = 0; i < frac_text.size(); ++i) scale *= 10;
        result = Rational(*whole * scale + *frac, scale);
    } else {
        auto whole = parse_digits(text);
        if (!whole) return std::nullopt;
        result = Rational(*whole);
    }
    return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& value) {
    return boost::multiprecision::numerator(value).str() + "/" +
           boost::multiprecision::denominator(value).str();
}

std::string to_literal(const Rational& value) {
    if (boost::multiprecision::denominator(value) == 1) {
        return boost::multiprecision::numerator(value).str();
    }
    return to_string(value);
}

}  // namespace oblique
