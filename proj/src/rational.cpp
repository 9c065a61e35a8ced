#include "linlam/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace linlam {

std::string rational_to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos)
            return Rational(boost::multiprecision::cpp_int(s));
        boost::multiprecision::cpp_int num(s.substr(0, slash));
        boost::multiprecision::cpp_int den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::runtime_error&) {
        throw std::invalid_argument("not a rational: '" + s + "'");
    }
}

Rational rational_from_double(double d) {
    if (!std::isfinite(d)) throw std::invalid_argument("non-finite probability");
    return Rational(d);
}

double rational_to_double(const Rational& r) {
    return r.convert_to<double>();
}

} // namespace linlam
