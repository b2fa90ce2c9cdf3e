#ifndef HAARPERM_RATIONAL_HPP
#define HAARPERM_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace haarperm {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Serializes q as "p/q" with decimal integers; the denominator is always
/// present and positive ("3" becomes "3/1").
std::string format_rational(const Rational& q);

/// Parses "p" or "p/q" (q > 0 after sign normalization). Throws ParseError.
Rational parse_rational(const std::string& text);

/// Square root of a nonnegative rational, correctly rounded to double
/// precision up to 1 ulp.
double rational_sqrt(const Rational& q);

/// Exact double conversion may overflow for huge rationals; fine at the
/// magnitudes this library produces.
double rational_to_double(const Rational& q);

inline Rational pow2(int e) {
    Rational r = 1;
    if (e >= 0) {
        return Rational(Int(1) << e);
    }
    return Rational(1, Int(1) << (-e));
}

} // namespace haarperm

#endif
