#ifndef HAARPERM_TESTS_HELPERS_HPP
#define HAARPERM_TESTS_HELPERS_HPP

#include "haarperm/bmo.hpp"
#include "haarperm/dyadic.hpp"

#include <random>

namespace haarperm::testing {

/// Each interval of U_D joins independently with probability num/den.
inline IntervalSet random_interval_set(int depth, std::mt19937_64& rng,
                                       unsigned num = 1, unsigned den = 3) {
    std::vector<DyadicInterval> items;
    for (const auto& I : Universe(depth).all_intervals()) {
        if (rng() % den < num) items.push_back(I);
    }
    return IntervalSet(std::move(items));
}

/// Sparse expansion with coefficients p/4, p in [-8, 8].
inline HaarExpansion random_expansion(int depth, std::mt19937_64& rng) {
    HaarExpansion x;
    for (const auto& I : Universe(depth).all_intervals()) {
        if (rng() % 3 == 0) {
            const int p = static_cast<int>(rng() % 17) - 8;
            if (p != 0) x.set(I, Rational(p, 4));
        }
    }
    return x;
}

} // namespace haarperm::testing

#endif
