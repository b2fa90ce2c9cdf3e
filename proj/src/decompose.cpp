#include "haarperm/decompose.hpp"

#include "haarperm/errors.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace haarperm {

std::string TraceEntry::to_string() const {
    return "rule" + std::to_string(rule) + " " + interval.to_string() + " " +
           (green ? "green" : "red");
}

MainLemmaResult main_lemma(const Rearrangement& tau, const DyadicInterval& I0,
                           const Rational& A, const std::optional<IntervalSet>& family,
                           const MainLemmaOptions& opts) {
    if (A < 1) throw ParamError("A must be at least 1");
    const Universe& U = tau.universe();
    if (!U.contains(I0)) throw DomainError("interval " + I0.to_string() + " exceeds max depth");

    const IntervalSet F = family ? restrict(*family, I0) : subtree(I0, U);
    for (const auto& X : F) {
        if (!tau.in_domain(X)) {
            throw DomainError("interval " + X.to_string() + " not in domain of tau");
        }
    }

    // Route every family member to its nearest family ancestor (or to I0);
    // these are the candidate lists unlocked when that ancestor turns green.
    std::map<DyadicInterval, std::vector<DyadicInterval>> kids;
    for (const auto& X : F) {
        if (X == I0) continue;
        DyadicInterval p = X.parent();
        while (p != I0 && !F.contains(p)) p = p.parent();
        kids[p].push_back(X);
    }

    enum class Color { green, red };
    std::map<DyadicInterval, Color> color;
    DyadicUnion images;
    std::set<DyadicInterval> available;
    std::vector<TraceEntry> trace;

    auto activate_children = [&](const DyadicInterval& G) {
        if (auto it = kids.find(G); it != kids.end()) {
            available.insert(it->second.begin(), it->second.end());
        }
    };

    if (F.contains(I0)) {
        color.emplace(I0, Color::green);
        images.add(tau.image_of(I0));
    }
    activate_children(I0);

    const Rational mI0 = I0.measure().to_rational();

    auto saturate_rule1 = [&]() {
        while (!available.empty()) {
            const DyadicInterval X = *available.begin();
            available.erase(available.begin());
            const DyadicInterval img = tau.image_of(X);
            const Rational lhs = img.measure().to_rational() * mI0;
            const Rational rhs =
                A * images.measure_if_added(img).to_rational() * X.measure().to_rational();
            const bool green = lhs <= rhs;
            images.add(img);
            color.emplace(X, green ? Color::green : Color::red);
            trace.push_back({1, X, green});
            if (green) activate_children(X);
        }
    };

    auto rule2_sweep = [&]() {
        std::vector<DyadicInterval> reds;
        for (const auto& [I, c] : color) {
            if (c == Color::red) reds.push_back(I);
        }
        if (opts.rule2_reverse) std::reverse(reds.begin(), reds.end());
        // Recoloring adds no members, so the image measure is a sweep constant.
        const Rational m = images.measure().to_rational();
        bool changed = false;
        for (const auto& I : reds) {
            const Rational lhs = tau.image_of(I).measure().to_rational() * mI0;
            if (lhs <= A * m * I.measure().to_rational()) {
                color[I] = Color::green;
                trace.push_back({2, I, true});
                activate_children(I);
                changed = true;
            }
        }
        return changed;
    };

    saturate_rule1();
    while (rule2_sweep()) saturate_rule1();

    std::vector<DyadicInterval> reds, greens;
    for (const auto& [I, c] : color) {
        (c == Color::red ? reds : greens).push_back(I);
    }
    MainLemmaResult res{IntervalSet(std::move(reds)), IntervalSet(std::move(greens)),
                        std::move(trace)};

    // Construction invariants; violations are bugs, not input errors.
    if (maximal_elements(res.red) != res.red) {
        throw std::logic_error("red collection not pairwise disjoint");
    }
    const Rational green_img = covered_measure(tau.map_collection(res.green)).to_rational();
    const Rational red_img = covered_measure(tau.map_collection(res.red)).to_rational();
    const Rational cap = A * (green_img + red_img);
    for (const auto& I : res.green) {
        if (tau.image_of(I).measure().to_rational() * mI0 > cap * I.measure().to_rational()) {
            throw std::logic_error("homogeneity bound violated at " + I.to_string());
        }
    }
    const Rational mfinal = images.measure().to_rational();
    for (const auto& I : res.red) {
        if (tau.image_of(I).measure().to_rational() * mI0 <= A * mfinal * I.measure().to_rational()) {
            throw std::logic_error("stopping criterion fails at red " + I.to_string());
        }
    }
    return res;
}

namespace {

struct CertConstants {
    Rational error_carleson = 0;
    Rational homogeneity = 0;
    Rational raw_mass = 0; // sum_i |tau(L_i)*| / |J|
    Rational weak_sup = 0;
};

CertConstants compute_constants(const Rearrangement& tau, const DyadicInterval& J,
                                const std::vector<CertificateBlock>& blocks) {
    std::map<DyadicInterval, DyadicInterval> inv;
    for (const auto& [from, to] : tau.pairs()) inv.emplace(to, from);

    CertConstants c;
    IntervalSet all_errors;
    Rational mass_sum = 0;
    for (const auto& b : blocks) {
        all_errors = set_union(all_errors, b.error);
        if (b.preimage.empty()) continue;
        const IntervalSet img = tau.map_collection(b.preimage);
        const Rational img_m = covered_measure(img).to_rational();
        const Rational pre_m = covered_measure(b.preimage).to_rational();
        const Rational err_m = covered_measure(b.error).to_rational();
        mass_sum += img_m;
        Rational max_ratio = 0;
        for (const auto& I : b.preimage) {
            const Rational r =
                tau.image_of(I).measure().to_rational() / I.measure().to_rational();
            if (r > max_ratio) max_ratio = r;
        }
        const Rational homog = max_ratio * pre_m / (img_m + err_m);
        if (homog > c.homogeneity) c.homogeneity = homog;

        IntervalSet pre_of_max;
        for (const auto& M : maximal_elements(img)) pre_of_max.insert(inv.at(M));
        const Rational w = carleson_constant(pre_of_max).constant;
        if (w > c.weak_sup) c.weak_sup = w;
    }
    c.error_carleson = carleson_constant(all_errors).constant;
    c.raw_mass = mass_sum / J.measure().to_rational();
    return c;
}

IntervalSet target_family(const Rearrangement& tau, const DyadicInterval& J,
                          const IntervalSet* B) {
    std::vector<DyadicInterval> t;
    for (const auto& [from, to] : tau.pairs()) {
        if (B && !B->contains(from)) continue;
        if (J.covers(to)) t.push_back(to);
    }
    return IntervalSet(std::move(t));
}

} // namespace

std::pair<PropertyPCertificate, GenerationTree> generational_decomposition(
    const Rearrangement& tau, const DyadicInterval& J,
    const std::optional<IntervalSet>& family, const Rational& A) {
    if (A < 1) throw ParamError("A must be at least 1");
    const Universe& U = tau.universe();
    if (!U.contains(J)) throw DomainError("interval " + J.to_string() + " exceeds max depth");

    std::vector<DyadicInterval> fam;
    for (const auto& [from, to] : tau.pairs()) {
        if (family && !family->contains(from)) continue;
        if (J.covers(to)) fam.push_back(from);
    }
    const std::optional<IntervalSet> F(IntervalSet(std::move(fam)));

    GenerationTree tree;
    std::vector<CertificateBlock> blocks;
    IntervalSet assigned;

    IntervalSet current = maximal_elements(*F);
    int k = 0;
    while (!current.empty()) {
        tree.generations.push_back(current);
        IntervalSet next;
        for (const auto& node : current) {
            MainLemmaResult res = main_lemma(tau, node, A, F);
            for (const auto& C : res.red) {
                if (C.depth < U.max_depth) {
                    next.insert(C.left_child());
                    next.insert(C.right_child());
                }
            }
            if (!res.green.empty() || !res.red.empty()) {
                assigned = set_union(assigned, set_union(res.green, res.red));
                blocks.push_back({res.green, tau.map_collection(res.red)});
            }
            tree.nodes.push_back({node, k, std::move(res)});
        }
        current = std::move(next);
        ++k;
    }
    if (assigned != *F) {
        throw std::logic_error("decomposition blocks do not partition the preimage family");
    }

    // Strict nesting across generations, disjointness within one.
    for (std::size_t g = 0; g < tree.generations.size() && tree.nesting_ok; ++g) {
        const IntervalSet& G = tree.generations[g];
        if (maximal_elements(G) != G) {
            tree.nesting_ok = false;
            tree.violation = "generation " + std::to_string(g) + " not pairwise disjoint";
            break;
        }
        if (g == 0) continue;
        for (const auto& K : G) {
            bool nested = false;
            for (const auto& I : tree.generations[g - 1]) {
                if (I.covers(K) && I != K) {
                    nested = true;
                    break;
                }
            }
            if (!nested) {
                tree.nesting_ok = false;
                tree.violation = "generation member " + K.to_string() +
                                 " not strictly inside generation " + std::to_string(g - 1);
                break;
            }
        }
    }
    // Geometric decay of generation mass inside any node.
    for (std::size_t g = 0; g < tree.generations.size() && tree.packing_ok; ++g) {
        for (const auto& I : tree.generations[g]) {
            for (std::size_t l = 1; g + l < tree.generations.size(); ++l) {
                DyadicRational sum;
                for (const auto& K : tree.generations[g + l]) {
                    if (I.covers(K)) sum += K.measure();
                }
                if (sum.times_pow2(static_cast<int>(l)) > I.measure()) {
                    tree.packing_ok = false;
                    tree.violation = "generation mass decay fails below " + I.to_string() +
                                     " at offset " + std::to_string(l);
                    break;
                }
            }
            if (!tree.packing_ok) break;
        }
    }

    PropertyPCertificate cert;
    cert.root = J;
    cert.weak_mode = family.has_value();
    cert.blocks = std::move(blocks);
    const CertConstants c = compute_constants(tau, J, cert.blocks);
    cert.error_carleson = c.error_carleson;
    cert.homogeneity = c.homogeneity;
    cert.mass = c.raw_mass;
    cert.weak_sup = c.weak_sup;
    return {std::move(cert), std::move(tree)};
}

Rational lemma2_union_bound(const std::vector<IntervalSet>& generations,
                            const std::vector<IntervalSet>& V) {
    if (V.size() > generations.size()) {
        throw ParamError("more V layers than generations");
    }
    for (std::size_t k = 0; k < generations.size(); ++k) {
        const IntervalSet& G = generations[k];
        for (const auto& I : G) {
            for (int d = I.depth - 1; d >= 0; --d) {
                if (G.contains(I.ancestor_at(d))) {
                    throw HypothesisError("generation " + std::to_string(k) +
                                          " not pairwise disjoint at " + I.to_string());
                }
            }
        }
    }
    for (std::size_t k = 0; k < generations.size(); ++k) {
        for (std::size_t m = k + 1; m < generations.size(); ++m) {
            for (const auto& K : generations[m]) {
                for (const auto& I : generations[k]) {
                    if (K.covers(I)) {
                        throw HypothesisError("nesting hypothesis fails at generation " +
                                              std::to_string(m) + ", interval " + K.to_string());
                    }
                }
            }
        }
    }
    for (std::size_t k = 0; k < generations.size(); ++k) {
        for (const auto& I : generations[k]) {
            for (std::size_t l = 1; k + l < generations.size(); ++l) {
                DyadicRational sum;
                for (const auto& K : generations[k + l]) {
                    if (I.covers(K)) sum += K.measure();
                }
                if (sum.times_pow2(static_cast<int>(l)) > I.measure()) {
                    throw HypothesisError("decay hypothesis fails at generation " +
                                          std::to_string(k) + ", interval " + I.to_string());
                }
            }
        }
    }
    IntervalSet all;
    Rational sup = 0;
    for (std::size_t k = 0; k < V.size(); ++k) {
        for (const auto& X : V[k]) {
            if (!covered_by(X, generations[k])) {
                throw HypothesisError("layer " + std::to_string(k) + " interval " +
                                      X.to_string() + " not below its generation");
            }
            if (k + 1 < generations.size() && covered_by(X, generations[k + 1])) {
                throw HypothesisError("layer " + std::to_string(k) + " interval " +
                                      X.to_string() + " reaches below the next generation");
            }
        }
        all = set_union(all, V[k]);
        const Rational ck = carleson_constant(V[k]).constant;
        if (ck > sup) sup = ck;
    }
    const Rational value = carleson_constant(all).constant;
    if (value > 2 * sup) {
        throw std::logic_error("union bound exceeds twice the layer supremum");
    }
    return value;
}

std::vector<IntervalSet> jones_split(const IntervalSet& B) {
    if (B.empty()) throw ParamError("cannot split an empty collection");
    std::vector<IntervalSet> parts;
    IntervalSet R = B;
    const DyadicRational four(4, 0);
    while (!R.empty()) {
        // Subtree packing sums over the remainder, deepest nodes first.
        std::map<DyadicInterval, DyadicRational> totals;
        const IntervalSet closure = ancestor_closure(R);
        const auto& nodes = closure.items();
        for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
            DyadicRational t = R.contains(*it) ? it->measure() : DyadicRational();
            if (auto c = totals.find(it->left_child()); c != totals.end()) t += c->second;
            if (auto c = totals.find(it->right_child()); c != totals.end()) t += c->second;
            totals.emplace(*it, std::move(t));
        }
        std::vector<DyadicInterval> peel;
        for (const auto& I : R) {
            if (totals.at(I).times_pow2(I.depth) <= four) peel.push_back(I);
        }
        if (peel.empty()) {
            throw std::logic_error("density peeling stalled"); // minimal members have density 1
        }
        IntervalSet part(std::move(peel));
        if (carleson_constant(part).constant > 4) {
            throw std::logic_error("peeled part exceeds the 4 Carleson condition");
        }
        R = set_difference(R, part);
        parts.push_back(std::move(part));
    }
    return parts;
}

CoeffSquares squares_of(const HaarExpansion& x) {
    CoeffSquares s;
    for (const auto& [I, c] : x.coefficients()) s.emplace(I, c * c);
    return s;
}

CoeffSquares floor_to_grid(const CoeffSquares& squares, int K) {
    if (K < 1) throw ParamError("K must be a positive integer");
    CoeffSquares out;
    for (const auto& [I, s] : squares) {
        if (s < 0) throw ParamError("negative coefficient square at " + I.to_string());
        const Rational scaled = s * K;
        const Int k = numerator(scaled) / denominator(scaled);
        if (k > 0) out.emplace(I, Rational(k, K));
    }
    return out;
}

Rational grid_norm_sq(const CoeffSquares& squares) {
    std::map<DyadicInterval, Rational> weights;
    for (const auto& [I, s] : squares) {
        if (s != 0) weights.emplace(I, s * I.measure().to_rational());
    }
    return sup_normalized_packing(weights).value;
}

std::vector<IntervalSet> coefficient_split(const CoeffSquares& squares, int K,
                                           const DyadicInterval& J,
                                           const Rearrangement& tau) {
    if (K < 1) throw ParamError("K must be a positive integer");
    // Scale-wise entry vectors: intervals in left-endpoint order, each
    // repeated K s_I times. Only intervals mapped inside J take part.
    std::map<int, std::vector<std::pair<DyadicInterval, long>>> by_scale;
    for (const auto& [I, s] : squares) {
        if (s < 0) throw ParamError("negative coefficient square at " + I.to_string());
        if (s == 0) continue;
        const Rational scaled = s * K;
        if (denominator(scaled) != 1) {
            throw ParamError("coefficient square at " + I.to_string() +
                             " is not a multiple of 1/" + std::to_string(K));
        }
        const Int k = numerator(scaled);
        if (k > K) {
            throw ParamError("coefficient square at " + I.to_string() + " exceeds 1");
        }
        const auto img = tau.apply(I);
        if (!img || !J.covers(*img)) continue;
        by_scale[I.depth].emplace_back(I, k.convert_to<long>());
    }

    std::vector<std::vector<DyadicInterval>> entries(K);
    for (const auto& [n, scale] : by_scale) {
        long p = 0;
        for (const auto& [I, k] : scale) {
            for (long c = 0; c < k; ++c) {
                entries[p % K].push_back(I);
                ++p;
            }
        }
    }
    std::vector<IntervalSet> classes;
    classes.reserve(K);
    for (auto& v : entries) {
        const std::size_t n = v.size();
        IntervalSet cls(std::move(v));
        if (cls.size() != n) {
            throw std::logic_error("class received a duplicate interval");
        }
        classes.push_back(std::move(cls));
    }
    // Scale-wise image-mass identity between the weighted family and the
    // classes; exact by the dealing rule.
    for (const auto& [n, scale] : by_scale) {
        DyadicRational lhs;
        for (const auto& [I, k] : scale) {
            lhs += DyadicRational(k, 0) * tau.image_of(I).measure();
        }
        DyadicRational rhs;
        for (const auto& cls : classes) {
            for (const auto& I : cls) {
                if (I.depth == n) rhs += tau.image_of(I).measure();
            }
        }
        if (lhs != rhs) {
            throw std::logic_error("scale identity broken at depth " + std::to_string(n));
        }
    }
    return classes;
}

namespace {

VerifyVerdict structural_failure(std::string message, const DyadicInterval& offending) {
    VerifyVerdict v;
    v.structural_ok = false;
    v.offending = offending;
    v.message = std::move(message) + " at " + offending.to_string();
    return v;
}

VerifyVerdict verify_blocks(const Rearrangement& tau, const DyadicInterval& J,
                            const std::vector<CertificateBlock>& blocks,
                            const IntervalSet* B) {
    const IntervalSet target = target_family(tau, J, B);
    IntervalSet seen;
    for (const auto& b : blocks) {
        for (const auto& I : b.preimage) {
            if (B && !B->contains(I)) {
                return structural_failure("preimage outside the restricted family", I);
            }
            const auto img = tau.apply(I);
            if (!img) return structural_failure("interval not in domain of tau", I);
            if (!J.covers(*img)) return structural_failure("image escapes the root", I);
            if (seen.contains(*img)) return structural_failure("blocks overlap", *img);
            seen.insert(*img);
        }
        for (const auto& E : b.error) {
            if (!target.contains(E)) {
                return structural_failure("error interval outside the target family", E);
            }
            if (seen.contains(E)) return structural_failure("blocks overlap", E);
            seen.insert(E);
        }
    }
    for (const auto& T : target) {
        if (!seen.contains(T)) return structural_failure("blocks do not cover", T);
    }

    const CertConstants c = compute_constants(tau, J, blocks);
    VerifyVerdict v;
    v.structural_ok = true;
    v.message = "ok";
    v.error_carleson = c.error_carleson;
    v.homogeneity = c.homogeneity;
    if (B) {
        v.weak_sup = c.weak_sup;
        v.mass = c.weak_sup == 0 ? Rational(0) : c.raw_mass / c.weak_sup;
    } else {
        v.weak_sup = c.weak_sup; // informational in strong mode
        v.mass = c.raw_mass;
    }
    v.overall = std::max({v.error_carleson, v.homogeneity, v.mass});
    return v;
}

} // namespace

VerifyVerdict verify_property_p(const Rearrangement& tau, const DyadicInterval& J,
                                const PropertyPCertificate& cert) {
    return verify_blocks(tau, J, cert.blocks, nullptr);
}

VerifyVerdict verify_weak_property_p(const Rearrangement& tau, const IntervalSet& B,
                                     const DyadicInterval& J,
                                     const PropertyPCertificate& cert) {
    return verify_blocks(tau, J, cert.blocks, &B);
}

VerifyVerdict verify_condition_s(const Rearrangement& tau, const DyadicInterval& J,
                                 const IntervalSet& L, const IntervalSet& E) {
    const IntervalSet target = target_family(tau, J, nullptr);
    IntervalSet seen;
    for (const auto& I : L) {
        const auto img = tau.apply(I);
        if (!img) return structural_failure("interval not in domain of tau", I);
        if (!J.covers(*img)) return structural_failure("image escapes the root", I);
        if (seen.contains(*img)) return structural_failure("blocks overlap", *img);
        seen.insert(*img);
    }
    for (const auto& X : E) {
        if (!target.contains(X)) {
            return structural_failure("error interval outside the target family", X);
        }
        if (seen.contains(X)) return structural_failure("blocks overlap", X);
        seen.insert(X);
    }
    for (const auto& T : target) {
        if (!seen.contains(T)) return structural_failure("blocks do not cover", T);
    }

    VerifyVerdict v;
    v.structural_ok = true;
    v.message = "ok";
    v.error_carleson = carleson_constant(E).constant;
    v.homogeneity = 0;
    if (!L.empty()) {
        const Rational img_m = covered_measure(tau.map_collection(L)).to_rational();
        const Rational pre_m = covered_measure(L).to_rational();
        Rational max_ratio = 0;
        for (const auto& I : L) {
            const Rational r =
                tau.image_of(I).measure().to_rational() / I.measure().to_rational();
            if (r > max_ratio) max_ratio = r;
        }
        v.homogeneity = max_ratio * pre_m / img_m;
    }
    v.mass = 0;
    v.overall = std::max(v.error_carleson, v.homogeneity);
    return v;
}

} // namespace haarperm
