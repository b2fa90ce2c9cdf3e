#ifndef HAARPERM_DYADIC_HPP
#define HAARPERM_DYADIC_HPP

#include "haarperm/errors.hpp"
#include "haarperm/rational.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace haarperm {

/// A dyadic rational n * 2^-e with e >= 0, kept canonical (n odd or zero,
/// and e = 0 when n = 0). All arithmetic is exact.
class DyadicRational {
public:
    DyadicRational() : num_(0), exp_(0) {}
    DyadicRational(Int numerator, int exponent);
    static DyadicRational zero() { return DyadicRational(); }
    static DyadicRational one() { return DyadicRational(1, 0); }

    const Int& numerator() const { return num_; }
    int exponent() const { return exp_; }
    bool is_zero() const { return num_ == 0; }

    DyadicRational operator+(const DyadicRational& o) const;
    DyadicRational operator-(const DyadicRational& o) const;
    DyadicRational operator*(const DyadicRational& o) const;
    DyadicRational& operator+=(const DyadicRational& o) { return *this = *this + o; }
    DyadicRational& operator-=(const DyadicRational& o) { return *this = *this - o; }

    /// Multiplies by 2^s; s may be negative.
    DyadicRational times_pow2(int s) const;

    std::strong_ordering operator<=>(const DyadicRational& o) const;
    bool operator==(const DyadicRational& o) const = default;

    Rational to_rational() const;
    std::string to_string() const; // "p/q" with q = 2^e in decimal

private:
    Int num_;
    int exp_;
};

/// The dyadic interval [k 2^-n, (k+1) 2^-n) in [0,1), encoded as the integer
/// pair (depth n, index k). No floating point anywhere.
struct DyadicInterval {
    static constexpr int kMaxDepth = 62;

    int depth = 0;
    std::uint64_t index = 0;

    DyadicInterval() = default;
    DyadicInterval(int n, std::uint64_t k);

    DyadicRational measure() const { return DyadicRational(1, depth); }
    DyadicRational left_endpoint() const { return DyadicRational(Int(index), depth); }

    DyadicInterval left_child() const { return DyadicInterval(depth + 1, 2 * index); }
    DyadicInterval right_child() const { return DyadicInterval(depth + 1, 2 * index + 1); }

    /// Throws DomainError for the root.
    DyadicInterval parent() const;

    /// Ancestor at the given shallower depth.
    DyadicInterval ancestor_at(int d) const;

    /// True iff this interval contains K, allowing equality.
    bool covers(const DyadicInterval& K) const {
        return depth <= K.depth && (K.index >> (K.depth - depth)) == index;
    }

    /// Left endpoint scaled by 2^kMaxDepth; exact total order on endpoints.
    unsigned __int128 left_key() const {
        return static_cast<unsigned __int128>(index) << (kMaxDepth - depth);
    }

    auto operator<=>(const DyadicInterval& o) const = default;

    std::string to_string() const; // "[n,k]"
};

enum class Relation { equal, contains, contained_in, disjoint };

Relation relation(const DyadicInterval& I, const DyadicInterval& K);

struct Universe;

/// Both halves of I; throws DomainError when I sits at the universe floor.
std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& I, const Universe& U);

/// Canonical order: by depth, then index.
struct CanonicalLess {
    bool operator()(const DyadicInterval& a, const DyadicInterval& b) const {
        return a < b;
    }
};

/// The truncated universe U_D = { I : depth(I) <= D }.
struct Universe {
    int max_depth = 0;

    explicit Universe(int D);

    bool contains(const DyadicInterval& I) const { return I.depth <= max_depth; }
    std::uint64_t size() const { return (std::uint64_t(1) << (max_depth + 1)) - 1; }
    DyadicInterval root() const { return DyadicInterval(0, 0); }

    /// All intervals in canonical order; feasible for small depths only.
    std::vector<DyadicInterval> all_intervals() const;
};

/// A finite set of dyadic intervals with deterministic canonical iteration
/// order (depth, then index) and no duplicates.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<DyadicInterval> items);
    IntervalSet(std::initializer_list<DyadicInterval> items);

    bool contains(const DyadicInterval& I) const;
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }

    /// Inserts keeping canonical order; O(n) worst case.
    void insert(const DyadicInterval& I);
    void erase(const DyadicInterval& I);

    const std::vector<DyadicInterval>& items() const { return items_; }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    bool operator==(const IntervalSet& o) const = default;

private:
    std::vector<DyadicInterval> items_; // sorted canonical, unique
};

/// Members of S contained in J (including J itself when present).
IntervalSet restrict(const IntervalSet& S, const DyadicInterval& J);

/// Members contained in no other member; pairwise disjoint, same cover.
IntervalSet maximal_elements(const IntervalSet& S);

/// Exact measure of the union of S.
DyadicRational covered_measure(const IntervalSet& S);

/// All intervals of U contained in some member of S.
IntervalSet down_set(const IntervalSet& S, const Universe& U);

/// The full subtree of J inside U.
IntervalSet subtree(const DyadicInterval& J, const Universe& U);

/// True iff I is contained in some member of S.
bool covered_by(const DyadicInterval& I, const IntervalSet& S);

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);

/// All ancestors of members of S, members included; the nodes at which a
/// packing supremum can be attained.
IntervalSet ancestor_closure(const IntervalSet& S);

/// Incrementally maintained union of dyadic intervals with exact measure.
/// Stores the maximal (pairwise disjoint) cover ordered by left endpoint.
class DyadicUnion {
public:
    DyadicUnion() = default;

    bool covered(const DyadicInterval& I) const;
    void add(const DyadicInterval& I);

    /// Measure of the union if I were added, without mutating.
    DyadicRational measure_if_added(const DyadicInterval& I) const;

    const DyadicRational& measure() const { return measure_; }

private:
    struct LeftKeyLess {
        bool operator()(const DyadicInterval& a, const DyadicInterval& b) const {
            if (a.left_key() != b.left_key()) return a.left_key() < b.left_key();
            return a.depth < b.depth;
        }
    };
    std::set<DyadicInterval, LeftKeyLess> maximal_;
    DyadicRational measure_;
};

} // namespace haarperm

#endif
