#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace linlam {

// Exact probability arithmetic. Evaluation only ever produces dyadic
// rationals, but sums of many of them need arbitrary precision.
using Rational = boost::multiprecision::cpp_rational;

// "2/3", "-1/2", "1", "0".
std::string rational_to_string(const Rational& r);

// Accepts "a/b" and plain integers; throws std::invalid_argument otherwise.
Rational rational_from_string(const std::string& s);

// Exact value of the binary floating-point number (every double is a dyadic
// rational).
Rational rational_from_double(double d);

double rational_to_double(const Rational& r);

} // namespace linlam
