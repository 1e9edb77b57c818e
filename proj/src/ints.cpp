#include "bvm/ints.hpp"

#include <cctype>
#include <stdexcept>

namespace bvm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

BigInt parse_bigint(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("malformed integer: " + text);
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw std::invalid_argument("malformed integer: " + text);
    return BigInt(s);
}

Rational parse_rational(const std::string& text) {
    const std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    if (auto slash = s.find('/'); slash != std::string::npos) {
        BigInt num = parse_bigint(s.substr(0, slash));
        BigInt den = parse_bigint(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + text);
        return Rational(num, den);
    }

    std::size_t i = 0;
    bool negative = false;
    if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';

    BigInt mantissa = 0;
    long frac_digits = 0;
    bool seen_digit = false, seen_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mantissa = mantissa * 10 + (c - '0');
            if (seen_dot) ++frac_digits;
            seen_digit = true;
        } else if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if ((c == 'e' || c == 'E') && seen_digit) {
            break;
        } else {
            throw std::invalid_argument("malformed rational: " + text);
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed rational: " + text);

    long exponent = 0;
    if (i < s.size()) {  // exponent part
        ++i;
        bool exp_neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) exp_neg = s[i++] == '-';
        if (i == s.size()) throw std::invalid_argument("malformed exponent: " + text);
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i])))
                throw std::invalid_argument("malformed exponent: " + text);
            exponent = exponent * 10 + (s[i] - '0');
            if (exponent > 100000) throw std::invalid_argument("exponent out of range: " + text);
        }
        if (exp_neg) exponent = -exponent;
    }

    long shift = exponent - frac_digits;
    Rational value(mantissa);
    if (shift > 0) {
        BigInt scale = 1;
        for (long k = 0; k < shift; ++k) scale *= 10;
        value *= Rational(scale);
    } else if (shift < 0) {
        BigInt scale = 1;
        for (long k = 0; k < -shift; ++k) scale *= 10;
        value /= Rational(scale);
    }
    return negative ? -value : value;
}

std::string rational_to_string(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace bvm
