#include "haarperm/dyadic.hpp"

#include <algorithm>
#include <unordered_set>

namespace haarperm {

DyadicRational::DyadicRational(Int numerator, int exponent) : num_(std::move(numerator)), exp_(exponent) {
    if (exp_ < 0) throw ParamError("dyadic rational exponent must be nonnegative");
    if (num_ == 0) {
        exp_ = 0;
        return;
    }
    while (exp_ > 0 && (num_ & 1) == 0) {
        num_ >>= 1;
        --exp_;
    }
}

DyadicRational DyadicRational::operator+(const DyadicRational& o) const {
    const int e = std::max(exp_, o.exp_);
    Int a = num_ << (e - exp_);
    Int b = o.num_ << (e - o.exp_);
    return DyadicRational(a + b, e);
}

DyadicRational DyadicRational::operator-(const DyadicRational& o) const {
    const int e = std::max(exp_, o.exp_);
    Int a = num_ << (e - exp_);
    Int b = o.num_ << (e - o.exp_);
    return DyadicRational(a - b, e);
}

DyadicRational DyadicRational::operator*(const DyadicRational& o) const {
    return DyadicRational(num_ * o.num_, exp_ + o.exp_);
}

DyadicRational DyadicRational::times_pow2(int s) const {
    if (num_ == 0) return DyadicRational();
    if (s >= 0) {
        const int use = std::min(s, exp_);
        return DyadicRational(num_ << (s - use), exp_ - use);
    }
    return DyadicRational(num_, exp_ - s);
}

std::strong_ordering DyadicRational::operator<=>(const DyadicRational& o) const {
    const int e = std::max(exp_, o.exp_);
    Int a = num_ << (e - exp_);
    Int b = o.num_ << (e - o.exp_);
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

Rational DyadicRational::to_rational() const {
    return Rational(num_, Int(1) << exp_);
}

std::string DyadicRational::to_string() const {
    return num_.str() + "/" + (Int(1) << exp_).str();
}

DyadicInterval::DyadicInterval(int n, std::uint64_t k) : depth(n), index(k) {
    if (n < 0 || n > kMaxDepth) {
        throw ValidationError("interval depth " + std::to_string(n) + " out of range [0, " +
                              std::to_string(kMaxDepth) + "]");
    }
    if (n < 64 && k >= (std::uint64_t(1) << n)) {
        throw ValidationError("interval index " + std::to_string(k) + " out of range at depth " +
                              std::to_string(n));
    }
}

DyadicInterval DyadicInterval::parent() const {
    if (depth == 0) throw DomainError("root has no parent");
    return DyadicInterval(depth - 1, index / 2);
}

DyadicInterval DyadicInterval::ancestor_at(int d) const {
    if (d < 0 || d > depth) throw DomainError("ancestor depth out of range");
    return DyadicInterval(d, index >> (depth - d));
}

std::string DyadicInterval::to_string() const {
    return "[" + std::to_string(depth) + "," + std::to_string(index) + "]";
}

Relation relation(const DyadicInterval& I, const DyadicInterval& K) {
    if (I == K) return Relation::equal;
    if (I.covers(K)) return Relation::contains;
    if (K.covers(I)) return Relation::contained_in;
    return Relation::disjoint;
}

std::pair<DyadicInterval, DyadicInterval> children(const DyadicInterval& I, const Universe& U) {
    if (I.depth >= U.max_depth) {
        throw DomainError("interval " + I.to_string() + " has no children in universe");
    }
    return {I.left_child(), I.right_child()};
}

Universe::Universe(int D) : max_depth(D) {
    if (D < 0 || D > DyadicInterval::kMaxDepth) {
        throw ParamError("universe depth must lie in [0, " +
                         std::to_string(DyadicInterval::kMaxDepth) + "]");
    }
}

std::vector<DyadicInterval> Universe::all_intervals() const {
    std::vector<DyadicInterval> out;
    out.reserve(size());
    for (int n = 0; n <= max_depth; ++n) {
        for (std::uint64_t k = 0; k < (std::uint64_t(1) << n); ++k) {
            out.emplace_back(n, k);
        }
    }
    return out;
}

IntervalSet::IntervalSet(std::vector<DyadicInterval> items) : items_(std::move(items)) {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

IntervalSet::IntervalSet(std::initializer_list<DyadicInterval> items)
    : IntervalSet(std::vector<DyadicInterval>(items)) {}

bool IntervalSet::contains(const DyadicInterval& I) const {
    return std::binary_search(items_.begin(), items_.end(), I);
}

void IntervalSet::insert(const DyadicInterval& I) {
    auto it = std::lower_bound(items_.begin(), items_.end(), I);
    if (it != items_.end() && *it == I) return;
    items_.insert(it, I);
}

void IntervalSet::erase(const DyadicInterval& I) {
    auto it = std::lower_bound(items_.begin(), items_.end(), I);
    if (it != items_.end() && *it == I) items_.erase(it);
}

IntervalSet restrict(const IntervalSet& S, const DyadicInterval& J) {
    std::vector<DyadicInterval> out;
    for (const auto& I : S) {
        if (J.covers(I)) out.push_back(I);
    }
    return IntervalSet(std::move(out));
}

IntervalSet maximal_elements(const IntervalSet& S) {
    // A member is maximal iff none of its proper ancestors is in S.
    std::vector<DyadicInterval> out;
    for (const auto& I : S) {
        bool dominated = false;
        for (int d = I.depth - 1; d >= 0 && !dominated; --d) {
            dominated = S.contains(I.ancestor_at(d));
        }
        if (!dominated) out.push_back(I);
    }
    return IntervalSet(std::move(out));
}

DyadicRational covered_measure(const IntervalSet& S) {
    DyadicRational total;
    for (const auto& I : maximal_elements(S)) {
        total += I.measure();
    }
    return total;
}

IntervalSet down_set(const IntervalSet& S, const Universe& U) {
    std::vector<DyadicInterval> out;
    for (const auto& I : maximal_elements(S)) {
        if (!U.contains(I)) throw DomainError("interval " + I.to_string() + " exceeds max depth");
        for (int n = I.depth; n <= U.max_depth; ++n) {
            const std::uint64_t lo = I.index << (n - I.depth);
            const std::uint64_t count = std::uint64_t(1) << (n - I.depth);
            for (std::uint64_t k = lo; k < lo + count; ++k) {
                out.emplace_back(n, k);
            }
        }
    }
    return IntervalSet(std::move(out));
}

IntervalSet subtree(const DyadicInterval& J, const Universe& U) {
    return down_set(IntervalSet{J}, U);
}

bool covered_by(const DyadicInterval& I, const IntervalSet& S) {
    for (int d = I.depth; d >= 0; --d) {
        if (S.contains(I.ancestor_at(d))) return true;
    }
    return false;
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
    std::vector<DyadicInterval> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IntervalSet(std::move(out));
}

IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
    std::vector<DyadicInterval> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IntervalSet(std::move(out));
}

IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
    std::vector<DyadicInterval> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IntervalSet(std::move(out));
}

IntervalSet ancestor_closure(const IntervalSet& S) {
    std::vector<DyadicInterval> out;
    for (const auto& I : S) {
        for (int d = I.depth; d >= 0; --d) {
            out.push_back(I.ancestor_at(d));
        }
    }
    return IntervalSet(std::move(out));
}

bool DyadicUnion::covered(const DyadicInterval& I) const {
    if (maximal_.empty()) return false;
    // Members are disjoint, so the only candidate cover is the member with
    // the largest (left endpoint, depth) key not exceeding I's.
    auto it = maximal_.upper_bound(I);
    if (it == maximal_.begin()) return false;
    --it;
    return it->covers(I);
}

void DyadicUnion::add(const DyadicInterval& I) {
    if (covered(I)) return;
    // Every member starting inside I is strictly below it; swallow them.
    auto it = maximal_.lower_bound(I);
    const auto end_key = I.left_key() + (static_cast<unsigned __int128>(1)
                                         << (DyadicInterval::kMaxDepth - I.depth));
    while (it != maximal_.end() && it->left_key() < end_key) {
        measure_ -= it->measure();
        it = maximal_.erase(it);
    }
    maximal_.insert(I);
    measure_ += I.measure();
}

DyadicRational DyadicUnion::measure_if_added(const DyadicInterval& I) const {
    if (covered(I)) return measure_;
    DyadicRational m = measure_ + I.measure();
    auto it = maximal_.lower_bound(I);
    const auto end_key = I.left_key() + (static_cast<unsigned __int128>(1)
                                         << (DyadicInterval::kMaxDepth - I.depth));
    while (it != maximal_.end() && it->left_key() < end_key) {
        m -= it->measure();
        ++it;
    }
    return m;
}

} // namespace haarperm
