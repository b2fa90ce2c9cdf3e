#include "haarperm/generators.hpp"

#include "haarperm/errors.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

namespace haarperm {

namespace {

using Pair = Rearrangement::Pair;

void check_enumeration_depth(int depth) {
    if (depth > kEnumerationDepthCap) {
        throw ParamError("universe depth " + std::to_string(depth) +
                         " too large to enumerate (cap " +
                         std::to_string(kEnumerationDepthCap) + ")");
    }
}

/// Same-length extension toward totality: identity where the slot is free,
/// then first-fit among the remaining same-depth images, both in canonical
/// order. Domain intervals left without a free same-length image are
/// skipped, keeping the map partial but injective.
std::pair<std::vector<Pair>, ExtensionStats> extend_same_length(const Universe& U,
                                                                const std::vector<Pair>& core) {
    std::set<DyadicInterval> used_img;
    std::set<DyadicInterval> core_dom;
    for (const auto& [from, to] : core) {
        core_dom.insert(from);
        used_img.insert(to);
    }
    std::vector<Pair> pairs = core;
    ExtensionStats stats;
    for (int d = 0; d <= U.max_depth; ++d) {
        std::vector<DyadicInterval> leftover;
        for (std::uint64_t k = 0; k < (std::uint64_t(1) << d); ++k) {
            const DyadicInterval I(d, k);
            if (core_dom.count(I)) continue;
            if (used_img.insert(I).second) {
                pairs.emplace_back(I, I);
                ++stats.identity;
            } else {
                leftover.push_back(I);
            }
        }
        std::vector<DyadicInterval> free_slots;
        for (std::uint64_t k = 0; k < (std::uint64_t(1) << d); ++k) {
            const DyadicInterval I(d, k);
            if (!used_img.count(I)) free_slots.push_back(I);
        }
        std::size_t next = 0;
        for (const auto& I : leftover) {
            if (next < free_slots.size()) {
                pairs.emplace_back(I, free_slots[next]);
                used_img.insert(free_slots[next]);
                ++next;
                ++stats.first_fit;
            } else {
                ++stats.skipped;
            }
        }
    }
    return {std::move(pairs), stats};
}

} // namespace

CascadeParams CascadeParams::defaults(int depth, int num_stages) {
    CascadeParams p;
    p.depth = depth;
    int kn = 3; // |K_1| = 1/8
    for (int n = 1; n <= num_stages; ++n) {
        const int eps = n;
        const int l_default = (kn - 1 < 30) ? (1 << (kn - 1)) : INT32_MAX;
        const int l = std::min<long>(l_default, depth - kn - eps);
        if (l < 1) {
            throw ParamError("universe depth " + std::to_string(depth) +
                             " too shallow for stage " + std::to_string(n));
        }
        p.stages.push_back({kn, static_cast<int>(l), eps});
        if (kn > 30) {
            throw ParamError("stage " + std::to_string(n + 1) + " base interval underflows");
        }
        kn = 2 * kn + 2; // |K_{n+1}| = |K_n|^2 / 4
    }
    return p;
}

CascadeBundle build_cascade(const CascadeParams& params) {
    const int D = params.depth;
    check_enumeration_depth(D);
    const Universe U(D);

    std::vector<Pair> rho_core, sigma_core, tau_core;
    std::vector<StageReport> reports;
    DyadicRational cumulative;

    // Left-to-right placement inside [0, 1/4), in units of 2^-D.
    std::uint64_t next_start = 0;
    const std::uint64_t quarter = std::uint64_t(1) << (D - 2 >= 0 ? D - 2 : 0);
    if (D < 2 && !params.stages.empty()) {
        throw ParamError("universe depth must be at least 2 for any stage");
    }

    int stage_no = 0;
    for (const auto& st : params.stages) {
        ++stage_no;
        const std::string tag = "stage " + std::to_string(stage_no);
        if (st.kn_depth < 2) throw ParamError(tag + ": base interval must fit inside [0,1/4)");
        if (st.l_n < 1) throw ParamError(tag + ": need at least one generation");
        if (st.eps_exp < 1) throw ParamError(tag + ": compression exponent must be positive");
        if (st.kn_depth + st.l_n > D) {
            throw ParamError(tag + ": generations exceed the universe depth");
        }
        if (st.kn_depth + st.l_n + st.eps_exp > D) {
            throw ParamError(tag + ": compressed images exceed the universe depth");
        }
        // Slot overflow: l_n |K_n| must fit in [1/2, 1).
        if (st.l_n > (std::uint64_t(1) << (st.kn_depth - 1))) {
            throw ParamError(tag + ": slot overflow, l_n |K_n| > 1/2");
        }

        const std::uint64_t size_units = std::uint64_t(1) << (D - st.kn_depth);
        std::uint64_t start = ((next_start + size_units - 1) / size_units) * size_units;
        if (start + size_units > quarter) {
            throw ParamError(tag + ": base intervals do not fit inside [0,1/4)");
        }
        next_start = start + size_units;

        const std::uint64_t kn_index = start / size_units;
        const DyadicInterval Kn(st.kn_depth, kn_index);
        const DyadicInterval Sn(st.kn_depth + st.eps_exp, kn_index << st.eps_exp);

        StageReport rep;
        rep.used = st;
        rep.l_n_default = (st.kn_depth - 1 < 30) ? (1 << (st.kn_depth - 1)) : INT32_MAX;
        rep.base = Kn;
        rep.compressed = Sn;

        // rho on generation 0: translate K_n by +1/4.
        rho_core.emplace_back(Kn, DyadicInterval(st.kn_depth,
                                                 kn_index + (std::uint64_t(1) << (st.kn_depth - 2))));
        // rho on generations 1..l_n: generation i fills the slot
        // [1/2 + (i-1)|K_n|, 1/2 + i|K_n|).
        for (int i = 0; i <= st.l_n; ++i) {
            const int d = st.kn_depth + i;
            const std::uint64_t lo = kn_index << i;
            IntervalSet gen;
            for (std::uint64_t k = lo; k < lo + (std::uint64_t(1) << i); ++k) {
                gen.insert(DyadicInterval(d, k));
            }
            rep.generation_covers.push_back(covered_measure(gen));
            if (i >= 1) {
                // new index = k + 2^{d-1} + (i-1) 2^i - kn_index 2^i
                const std::uint64_t shift =
                    (std::uint64_t(1) << (d - 1)) + std::uint64_t(i - 1) * (std::uint64_t(1) << i);
                for (std::uint64_t k = lo; k < lo + (std::uint64_t(1) << i); ++k) {
                    rho_core.emplace_back(DyadicInterval(d, k),
                                          DyadicInterval(d, k - lo + shift));
                }
            }
        }
        // sigma: the scale bijection from the K_n-tree onto the S_n-tree.
        for (int i = 0; i <= st.l_n; ++i) {
            const int d = st.kn_depth + i;
            const std::uint64_t lo = kn_index << i;
            for (std::uint64_t k = lo; k < lo + (std::uint64_t(1) << i); ++k) {
                const std::uint64_t k2 =
                    k + (kn_index << (d - st.kn_depth)) * ((std::uint64_t(1) << st.eps_exp) - 1);
                sigma_core.emplace_back(DyadicInterval(d, k),
                                        DyadicInterval(d + st.eps_exp, k2));
            }
        }

        // Exact stage identities: every generation covers K_n, and the slot
        // mass adds up to l_n |K_n|.
        for (const auto& cover : rep.generation_covers) {
            if (cover != Kn.measure()) {
                throw std::logic_error(tag + ": generation does not cover its base");
            }
        }
        rep.slot_mass = DyadicRational(st.l_n, 0) * Kn.measure();
        cumulative += rep.slot_mass;
        rep.cumulative_mass = cumulative;
        reports.push_back(std::move(rep));
    }

    // tau = rho o sigma^{-1} on the compressed trees.
    {
        std::map<DyadicInterval, DyadicInterval> rho_map;
        for (const auto& [from, to] : rho_core) rho_map.emplace(from, to);
        for (const auto& [from, to] : sigma_core) {
            tau_core.emplace_back(to, rho_map.at(from));
        }
    }

    auto build = [&U](const std::vector<Pair>& core, const char* name) {
        try {
            return Rearrangement::validate(U, core);
        } catch (const ValidationError& e) {
            throw ParamError(std::string(name) + " construction collides: " + e.what());
        }
    };
    build(rho_core, "rho");
    build(sigma_core, "sigma");
    build(tau_core, "tau");

    auto [rho_pairs, rho_stats] = extend_same_length(U, rho_core);
    auto [sigma_pairs, sigma_stats] = extend_same_length(U, sigma_core);
    auto [tau_pairs, tau_stats] = extend_same_length(U, tau_core);
    if (rho_stats.skipped != 0) {
        throw std::logic_error("level-preserving map failed to extend to a total map");
    }

    CascadeBundle bundle{build(rho_pairs, "extended rho"),
                         build(sigma_pairs, "extended sigma"),
                         build(tau_pairs, "extended tau"),
                         std::move(reports),
                         rho_stats,
                         sigma_stats,
                         tau_stats};
    return bundle;
}

Rearrangement random_rearrangement(int depth, std::uint64_t seed, bool level_preserving) {
    check_enumeration_depth(depth);
    const Universe U(depth);
    std::mt19937_64 rng(seed);
    auto rand_below = [&rng](std::uint64_t n) {
        // rejection sampling keeps the draw unbiased and reproducible
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = rng();
        } while (v >= limit);
        return v % n;
    };
    auto shuffle_tail = [&](std::vector<std::uint64_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[rand_below(i)]);
        }
    };

    std::vector<Pair> pairs;
    pairs.reserve(U.size());
    if (level_preserving) {
        for (int d = 0; d <= depth; ++d) {
            std::vector<std::uint64_t> img(std::uint64_t(1) << d);
            for (std::uint64_t k = 0; k < img.size(); ++k) img[k] = k;
            shuffle_tail(img);
            for (std::uint64_t k = 0; k < img.size(); ++k) {
                pairs.emplace_back(DyadicInterval(d, k), DyadicInterval(d, img[k]));
            }
        }
    } else {
        const std::vector<DyadicInterval> ivs = U.all_intervals();
        std::vector<std::uint64_t> img(ivs.size());
        for (std::uint64_t i = 0; i < img.size(); ++i) img[i] = i;
        shuffle_tail(img);
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            pairs.emplace_back(ivs[i], ivs[img[i]]);
        }
    }
    return Rearrangement::validate(U, std::move(pairs));
}

} // namespace haarperm
