#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace bvm {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses "7", "-0.31", "1e-3", "25e2" or "3/10" into an exact rational.
/// Throws std::invalid_argument on malformed input.
Rational parse_rational(const std::string& text);

/// "num/den" form, den always positive, "n/1" collapsed to "n".
std::string rational_to_string(const Rational& r);

double to_double(const Rational& r);

BigInt parse_bigint(const std::string& text);

}  // namespace bvm
