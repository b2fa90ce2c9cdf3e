#ifndef HAARPERM_BMO_HPP
#define HAARPERM_BMO_HPP

#include "haarperm/dyadic.hpp"
#include "haarperm/rational.hpp"

#include <map>
#include <optional>

namespace haarperm {

/// A finitely supported Haar expansion x = sum x_I h_I with exact rational
/// coefficients; h_I is the L^infinity-normalized Haar function. Zero
/// coefficients are never stored.
class HaarExpansion {
public:
    HaarExpansion() = default;

    void set(const DyadicInterval& I, const Rational& value);
    Rational coeff(const DyadicInterval& I) const;

    bool empty() const { return coeffs_.empty(); }
    std::size_t size() const { return coeffs_.size(); }
    IntervalSet support() const;

    const std::map<DyadicInterval, Rational>& coefficients() const { return coeffs_; }

    /// Coefficient-wise sum.
    HaarExpansion operator+(const HaarExpansion& o) const;
    HaarExpansion scaled(const Rational& c) const;

    bool operator==(const HaarExpansion& o) const = default;

private:
    std::map<DyadicInterval, Rational> coeffs_;
};

struct CarlesonReport {
    Rational constant;                       // exact [[S]]; 0 for the empty set
    std::optional<DyadicInterval> witness;   // canonically least attaining J
    std::map<DyadicInterval, Rational> per_interval_sums; // filled on request
};

/// Exact Carleson packing constant sup_J (1/|J|) sum_{I in S, I subset J} |I|.
/// The supremum over all dyadic J is attained on the ancestor closure of S.
CarlesonReport carleson_constant(const IntervalSet& S, bool want_sums = false);

/// Packing sum of S under J, exact; convenience for report re-checks.
DyadicRational packing_sum(const IntervalSet& S, const DyadicInterval& J);

/// Exact squared dyadic BMO norm sup_J (1/|J|) sum_{I subset J} x_I^2 |I|.
Rational bmo_norm_sq(const HaarExpansion& x);

/// Square root of bmo_norm_sq, correctly rounded to within 1 ulp.
double bmo_norm(const HaarExpansion& x);

/// The expansion sum_{I in S} h_I.
HaarExpansion indicator_expansion(const IntervalSet& S);

/// Shared packing-supremum core: given exact weights w(I) >= 0, computes
/// sup_J (1/|J|) sum_{I subset J} w(I) with the canonically least witness.
struct PackingResult {
    Rational value;
    std::optional<DyadicInterval> witness;
    std::map<DyadicInterval, Rational> sums; // normalized, on request
};
PackingResult sup_normalized_packing(const std::map<DyadicInterval, Rational>& weights,
                                     bool want_sums = false);

} // namespace haarperm

#endif
