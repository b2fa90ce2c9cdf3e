#include "haarperm/rational.hpp"

#include "haarperm/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cctype>

namespace haarperm {

std::string format_rational(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

Rational parse_rational(const std::string& text) {
    auto is_int = [](const std::string& s) {
        if (s.empty()) return false;
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        }
        return true;
    };
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            if (!is_int(text)) throw ParseError("invalid rational: \"" + text + "\"");
            return Rational(Int(text));
        }
        const std::string p = text.substr(0, slash);
        const std::string q = text.substr(slash + 1);
        if (!is_int(p) || !is_int(q)) {
            throw ParseError("invalid rational: \"" + text + "\"");
        }
        Int num(p);
        Int den(q);
        if (den == 0) throw ParseError("zero denominator in \"" + text + "\"");
        if (den < 0) {
            den = -den;
            num = -num;
        }
        return Rational(num, den);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("invalid rational: \"" + text + "\"");
    }
}

double rational_sqrt(const Rational& q) {
    using BigFloat = boost::multiprecision::cpp_bin_float_50;
    if (q < 0) throw ParamError("square root of negative rational");
    BigFloat value = BigFloat(numerator(q)) / BigFloat(denominator(q));
    return static_cast<double>(sqrt(value));
}

double rational_to_double(const Rational& q) {
    return static_cast<double>(q);
}

} // namespace haarperm
