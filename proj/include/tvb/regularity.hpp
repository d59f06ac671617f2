#pragma once
// Densities, irregularity witnesses, classification of collections,
// typical elements, the parameter ledger, and half-super -> super
// sparsification of k-partite k-graphs.

#include <functional>

#include "core.hpp"

namespace tvb {

// ---------------------------------------------------------------- k-partite tensors

// A k-partite k-graph in local coordinates. Parts 0..k-2 are "enumerated"
// parts (at most 64 elements each, subsets are uint64 masks); the last part
// is "optimised": for fixed subsets of the other parts, the best subset of
// the last part of each size is read off sorted per-element weights.
class LocalTensor {
public:
    // k == 2: masks_[l] is the neighbourhood of last element l in part 0.
    // k == 3: masks_[l * sizes[0] + i] is the part-1 neighbourhood of the
    //         pair (i, l).
    // k >= 4: tuples_[l] lists (k-1)-tuples joined to last element l.
    std::vector<std::size_t> sizes;
    std::vector<std::uint64_t> masks;
    std::vector<std::vector<std::vector<std::uint8_t>>> tuples;

    std::size_t k() const { return sizes.size(); }
    std::size_t last() const { return sizes.back(); }

    static LocalTensor bipartite(std::size_t a, std::size_t b) {
        check_enumerable(a);
        LocalTensor t;
        t.sizes = {a, b};
        t.masks.assign(b, 0);
        return t;
    }
    static LocalTensor tripartite(std::size_t a, std::size_t b, std::size_t c) {
        check_enumerable(a);
        check_enumerable(b);
        LocalTensor t;
        t.sizes = {a, b, c};
        t.masks.assign(a * c, 0);
        return t;
    }
    static LocalTensor general(std::vector<std::size_t> sizes) {
        if (sizes.size() < 2) throw Error("InvalidUniformity", "k must be at least 2");
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) check_enumerable(sizes[i]);
        LocalTensor t;
        t.sizes = std::move(sizes);
        if (t.k() == 2) t.masks.assign(t.last(), 0);
        else if (t.k() == 3) t.masks.assign(t.sizes[0] * t.last(), 0);
        else t.tuples.assign(t.last(), {});
        return t;
    }

    // coordinate vector with one local index per part, last part last.
    void add(const std::vector<std::size_t>& x) {
        const std::size_t l = x.back();
        if (k() == 2) masks[l] |= std::uint64_t{1} << x[0];
        else if (k() == 3) masks[l * sizes[0] + x[0]] |= std::uint64_t{1} << x[1];
        else {
            std::vector<std::uint8_t> t(x.begin(), x.end() - 1);
            tuples[l].push_back(std::move(t));
        }
    }

    // weight of each last element for the given subsets of parts 0..k-2.
    void weights(const std::vector<std::uint64_t>& S, std::vector<std::int64_t>& out) const {
        out.assign(last(), 0);
        if (k() == 2) {
            for (std::size_t l = 0; l < last(); ++l) out[l] = std::popcount(masks[l] & S[0]);
        } else if (k() == 3) {
            const std::size_t a = sizes[0];
            for (std::size_t l = 0; l < last(); ++l) {
                std::int64_t w = 0;
                for (std::uint64_t rest = S[0]; rest; rest &= rest - 1) {
                    std::size_t i = static_cast<std::size_t>(std::countr_zero(rest));
                    w += std::popcount(masks[l * a + i] & S[1]);
                }
                out[l] = w;
            }
        } else {
            for (std::size_t l = 0; l < last(); ++l) {
                std::int64_t w = 0;
                for (const auto& t : tuples[l]) {
                    bool in = true;
                    for (std::size_t i = 0; i < t.size() && in; ++i) in = (S[i] >> t[i]) & 1U;
                    w += in;
                }
                out[l] = w;
            }
        }
    }

    static void check_enumerable(std::size_t s) {
        if (s > 64) throw Error("PartTooLarge", "enumerated parts are limited to 64 elements");
    }
};

inline std::uint64_t full_mask(std::size_t s) { return s >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << s) - 1); }

// Exhaustive enumeration applies when every enumerated part is small enough
// (12 for pairs, 8 for triples, 16 total bits beyond that).
inline bool exhaustive_feasible(const std::vector<std::size_t>& sizes) {
    const std::size_t k = sizes.size();
    std::size_t bits = 0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (k == 2 && sizes[i] > 12) return false;
        if (k == 3 && sizes[i] > 8) return false;
        bits += sizes[i];
    }
    return bits <= 16;
}

inline std::size_t min_subset_size(double eps, std::size_t s) {
    return static_cast<std::size_t>(std::max<std::int64_t>(1, ceil_to_int(eps * static_cast<double>(s))));
}

// Visits candidate sub-tuples: for each choice of subsets of the enumerated
// parts, calls visit(S, sorted_desc_weights, prefix_sums). Exhaustive mode
// enumerates all subsets of size >= min sizes; sampled mode draws `budget`
// random subsets of exactly the minimum sizes. visit returns true to stop.
struct EnumerationStats {
    bool exhaustive = false;
    std::size_t visited = 0;
};

template <class Visit>
EnumerationStats enumerate_subtuples(const LocalTensor& t, const std::vector<std::size_t>& min_sizes, bool exhaustive, std::size_t budget, std::uint64_t seed, Visit&& visit) {
    EnumerationStats st;
    st.exhaustive = exhaustive;
    const std::size_t ke = t.k() - 1;
    std::vector<std::uint64_t> S(ke, 0);
    std::vector<std::int64_t> w, prefix;
    auto run = [&]() {
        t.weights(S, w);
        std::sort(w.begin(), w.end(), std::greater<>());
        prefix.assign(w.size() + 1, 0);
        for (std::size_t i = 0; i < w.size(); ++i) prefix[i + 1] = prefix[i] + w[i];
        ++st.visited;
        return visit(S, w, prefix);
    };
    if (exhaustive) {
        std::function<bool(std::size_t)> rec = [&](std::size_t part) -> bool {
            if (part == ke) return run();
            const std::uint64_t top = full_mask(t.sizes[part]);
            for (std::uint64_t m = top;; m = (m - 1) & top) {
                if (static_cast<std::size_t>(std::popcount(m)) >= min_sizes[part]) {
                    S[part] = m;
                    if (rec(part + 1)) return true;
                }
                if (m == 0) break;
            }
            return false;
        };
        rec(0);
    } else {
        Rng rng(seed);
        for (std::size_t b = 0; b < budget; ++b) {
            for (std::size_t p = 0; p < ke; ++p) {
                std::vector<std::size_t> idx(t.sizes[p]);
                std::iota(idx.begin(), idx.end(), 0);
                auto pick = rng.sample(idx, min_sizes[p]);
                S[p] = 0;
                for (std::size_t i : pick) S[p] |= std::uint64_t{1} << i;
            }
            if (run()) break;
        }
    }
    return st;
}

// ---------------------------------------------------------------- witnesses

struct IrregularityWitness {
    std::vector<std::vector<Vertex>> subsets;  // per part, caller's ids
    Rational observed{0}, reference{0}, deviation{0};
};

struct WitnessResult {
    std::optional<IrregularityWitness> witness;
    bool exhaustive = false;
    std::size_t tuples_examined = 0;
    bool budget_exhausted = false;  // sampled mode ran out without a witness
    Json metadata() const {
        return Json{{"mode", exhaustive ? "exhaustive" : "sampled"}, {"tuples_examined", tuples_examined}, {"budget_exhausted", budget_exhausted}, {"found", witness.has_value()}};
    }
};

// Parts in caller ids with the tensor built over them; the last part is the
// optimised one.
struct TupleInstance {
    std::vector<std::vector<Vertex>> parts;
    LocalTensor tensor;
    std::int64_t total_edges = 0;
};

inline Rational tuple_density(std::int64_t edges, const std::vector<std::size_t>& sizes) {
    std::int64_t prod = 1;
    for (std::size_t s : sizes) {
        if (s == 0) throw Error("EmptyPart", "density of a tuple with an empty part");
        prod *= static_cast<std::int64_t>(s);
    }
    return Rational(edges, prod);
}

namespace detail {
inline std::vector<Vertex> decode(const std::vector<Vertex>& part, std::uint64_t mask) {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < part.size(); ++i)
        if ((mask >> i) & 1U) out.push_back(part[i]);
    return out;
}
}  // namespace detail

// Searches for a sub-tuple with |V_i'| >= eps|V_i| whose density deviates
// from the whole by at least eps. With maximise set, the search continues
// and returns the witness of largest |deviation| (used by refinement).
inline WitnessResult find_witness(const TupleInstance& inst, double eps, std::size_t budget, std::uint64_t seed, std::optional<bool> force_exhaustive = std::nullopt, bool maximise = false) {
    const LocalTensor& t = inst.tensor;
    WitnessResult res;
    const Rational ref = tuple_density(inst.total_edges, t.sizes);
    const Rational eps_r = to_rational(eps);
    std::vector<std::size_t> mins(t.k());
    for (std::size_t i = 0; i < t.k(); ++i) mins[i] = min_subset_size(eps, t.sizes[i]);
    const bool exhaustive = force_exhaustive.value_or(exhaustive_feasible(t.sizes));
    auto visit = [&](const std::vector<std::uint64_t>& S, const std::vector<std::int64_t>& w, const std::vector<std::int64_t>& prefix) {
        std::int64_t prod = 1;
        for (std::size_t i = 0; i + 1 < t.k(); ++i) prod *= std::popcount(S[i]);
        const std::size_t L = w.size();
        const std::size_t s_hi = exhaustive ? L : mins.back();
        for (std::size_t s = mins.back(); s <= s_hi; ++s) {
            Rational hi(prefix[s], prod * static_cast<std::int64_t>(s));
            Rational lo(prefix[L] - prefix[L - s], prod * static_cast<std::int64_t>(s));
            for (int side = 0; side < 2; ++side) {
                const Rational& obs = side == 0 ? hi : lo;
                Rational dev = obs - ref;
                if (boost::abs(dev) >= eps_r && (!res.witness || boost::abs(dev) > boost::abs(res.witness->deviation))) {
                    IrregularityWitness wit;
                    for (std::size_t i = 0; i + 1 < t.k(); ++i) wit.subsets.push_back(detail::decode(inst.parts[i], S[i]));
                    // recover which last elements realise the extreme
                    std::vector<std::int64_t> raw;
                    t.weights(S, raw);
                    std::vector<std::size_t> order(raw.size());
                    std::iota(order.begin(), order.end(), 0);
                    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return side == 0 ? raw[a] > raw[b] : raw[a] < raw[b]; });
                    std::vector<Vertex> lastset;
                    for (std::size_t i = 0; i < s; ++i) lastset.push_back(inst.parts.back()[order[i]]);
                    std::sort(lastset.begin(), lastset.end());
                    wit.subsets.push_back(std::move(lastset));
                    wit.observed = obs;
                    wit.reference = ref;
                    wit.deviation = dev;
                    res.witness = std::move(wit);
                    if (!maximise) return true;
                }
            }
        }
        return false;
    };
    auto st = enumerate_subtuples(t, mins, exhaustive, budget, seed, visit);
    res.exhaustive = st.exhaustive;
    res.tuples_examined = st.visited;
    res.budget_exhausted = !exhaustive && !res.witness;
    return res;
}

// Minimum density over sub-tuples with |V_i'| >= eps|V_i| (exact in
// exhaustive mode, an upper bound on the true minimum in sampled mode).
struct MinDensityResult {
    Rational min_density{1};
    std::vector<std::vector<Vertex>> subsets;
    bool exhaustive = false;
    std::size_t tuples_examined = 0;
};

inline MinDensityResult min_subtuple_density(const TupleInstance& inst, double eps, std::size_t budget, std::uint64_t seed) {
    const LocalTensor& t = inst.tensor;
    MinDensityResult res;
    res.min_density = tuple_density(inst.total_edges, t.sizes);
    std::vector<std::size_t> mins(t.k());
    for (std::size_t i = 0; i < t.k(); ++i) mins[i] = min_subset_size(eps, t.sizes[i]);
    const bool exhaustive = exhaustive_feasible(t.sizes);
    std::vector<std::uint64_t> bestS;
    std::size_t best_s = t.last();
    auto visit = [&](const std::vector<std::uint64_t>& S, const std::vector<std::int64_t>& w, const std::vector<std::int64_t>& prefix) {
        std::int64_t prod = 1;
        for (std::size_t i = 0; i + 1 < t.k(); ++i) prod *= std::popcount(S[i]);
        const std::size_t L = w.size();
        const std::size_t s_hi = exhaustive ? L : mins.back();
        for (std::size_t s = mins.back(); s <= s_hi; ++s) {
            Rational lo(prefix[L] - prefix[L - s], prod * static_cast<std::int64_t>(s));
            if (lo < res.min_density || bestS.empty()) {
                if (lo <= res.min_density) { res.min_density = lo; bestS = S; best_s = s; }
            }
        }
        return false;
    };
    auto st = enumerate_subtuples(t, mins, exhaustive, budget, seed, visit);
    res.exhaustive = st.exhaustive;
    res.tuples_examined = st.visited;
    if (!bestS.empty()) {
        for (std::size_t i = 0; i + 1 < t.k(); ++i) res.subsets.push_back(detail::decode(inst.parts[i], bestS[i]));
        std::vector<std::int64_t> raw;
        t.weights(bestS, raw);
        std::vector<std::size_t> order(raw.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
        std::vector<Vertex> lastset;
        for (std::size_t i = 0; i < best_s; ++i) lastset.push_back(inst.parts.back()[order[i]]);
        std::sort(lastset.begin(), lastset.end());
        res.subsets.push_back(std::move(lastset));
    }
    return res;
}

// ---------------------------------------------------------------- tuple builders

namespace detail {
inline std::vector<std::int64_t> position_map(std::size_t universe, const std::vector<Vertex>& part) {
    std::vector<std::int64_t> pos(universe, -1);
    for (std::size_t i = 0; i < part.size(); ++i) {
        if (part[i] >= universe) throw Error("InvalidPart", "part element outside universe");
        if (pos[part[i]] >= 0) throw Error("InvalidPart", "repeated element in part");
        pos[part[i]] = static_cast<std::int64_t>(i);
    }
    return pos;
}
inline void check_disjoint(std::size_t universe, const std::vector<std::vector<Vertex>>& parts) {
    std::vector<char> used(universe, 0);
    for (const auto& p : parts) {
        if (p.empty()) throw Error("EmptyPart", "parts must be nonempty");
        for (Vertex v : p) {
            if (v >= universe) throw Error("InvalidPart", "part element outside universe");
            if (used[v]) throw Error("InvalidPart", "parts must be pairwise disjoint");
            used[v] = 1;
        }
    }
}
}  // namespace detail

// Bipartite pair (A, B) of a simple graph; B is the optimised part.
inline TupleInstance pair_instance(const SimpleGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B) {
    detail::check_disjoint(g.n(), {A, B});
    TupleInstance inst{{A, B}, LocalTensor::bipartite(A.size(), B.size()), 0};
    auto pa = detail::position_map(g.n(), A);
    for (std::size_t l = 0; l < B.size(); ++l)
        for_each_bit(g.nbrs(B[l]), [&](Vertex a) {
            if (pa[a] >= 0) { inst.tensor.add({static_cast<std::size_t>(pa[a]), l}); ++inst.total_edges; }
        });
    return inst;
}

// Collection triple (V1, V2, colours); colours are the optimised part and are
// reported in the witness as colour indices.
inline TupleInstance collection_instance(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C) {
    detail::check_disjoint(gc.n(), {V1, V2});
    if (C.empty()) throw Error("EmptyPart", "colour part must be nonempty");
    TupleInstance inst{{V1, V2, C}, LocalTensor::tripartite(V1.size(), V2.size(), C.size()), 0};
    auto p2 = detail::position_map(gc.n(), V2);
    Bitset v2bits = vector_to_bits(gc.n(), V2);
    for (std::size_t l = 0; l < C.size(); ++l)
        for (std::size_t i = 0; i < V1.size(); ++i) {
            Bitset nb = gc.nbrs(C[l], V1[i]) & v2bits;
            for_each_bit(nb, [&](Vertex y) {
                inst.tensor.add({i, static_cast<std::size_t>(p2[y]), l});
                ++inst.total_edges;
            });
        }
    return inst;
}

// Tripartite triple of a 3-graph; parts are permuted so the largest is last,
// and the witness is mapped back to the caller's order by the wrapper below.
inline TupleInstance threegraph_instance(const ThreeGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B, const std::vector<Vertex>& C) {
    detail::check_disjoint(g.n(), {A, B, C});
    TupleInstance inst{{A, B, C}, LocalTensor::tripartite(A.size(), B.size(), C.size()), 0};
    auto pa = detail::position_map(g.n(), A), pb = detail::position_map(g.n(), B), pc = detail::position_map(g.n(), C);
    for (const Triple& t : g.edges()) {
        std::array<std::size_t, 3> perm{0, 1, 2};
        do {
            Vertex a = t[perm[0]], b = t[perm[1]], c = t[perm[2]];
            if (pa[a] >= 0 && pb[b] >= 0 && pc[c] >= 0) {
                inst.tensor.add({static_cast<std::size_t>(pa[a]), static_cast<std::size_t>(pb[b]), static_cast<std::size_t>(pc[c])});
                ++inst.total_edges;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return inst;
}

// ---------------------------------------------------------------- density

inline Rational density(const SimpleGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B) {
    auto inst = pair_instance(g, A, B);
    return tuple_density(inst.total_edges, inst.tensor.sizes);
}
inline Rational density(const ThreeGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B, const std::vector<Vertex>& C) {
    auto inst = threegraph_instance(g, A, B, C);
    return tuple_density(inst.total_edges, inst.tensor.sizes);
}
inline Rational density(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C) {
    auto inst = collection_instance(gc, V1, V2, C);
    return tuple_density(inst.total_edges, inst.tensor.sizes);
}

// Irregularity witnesses on the three supported host shapes.
inline WitnessResult irregularity_witness(const SimpleGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B, double eps, std::size_t budget = 2000, std::uint64_t seed = 1) {
    // enumerate the smaller side
    if (A.size() > B.size()) {
        auto r = find_witness(pair_instance(g, B, A), eps, budget, seed);
        if (r.witness) std::swap(r.witness->subsets[0], r.witness->subsets[1]);
        return r;
    }
    return find_witness(pair_instance(g, A, B), eps, budget, seed);
}

inline WitnessResult irregularity_witness(const ThreeGraph& g, const std::vector<Vertex>& A, const std::vector<Vertex>& B, const std::vector<Vertex>& C, double eps, std::size_t budget = 2000, std::uint64_t seed = 1) {
    std::array<const std::vector<Vertex>*, 3> parts{&A, &B, &C};
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return parts[a]->size() < parts[b]->size(); });
    auto r = find_witness(threegraph_instance(g, *parts[order[0]], *parts[order[1]], *parts[order[2]]), eps, budget, seed);
    if (r.witness) {
        std::vector<std::vector<Vertex>> back(3);
        for (std::size_t i = 0; i < 3; ++i) back[order[i]] = r.witness->subsets[i];
        r.witness->subsets = std::move(back);
    }
    return r;
}

inline WitnessResult irregularity_witness(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C, double eps, std::size_t budget = 2000, std::uint64_t seed = 1) {
    return find_witness(collection_instance(gc, V1, V2, C), eps, budget, seed);
}

// ---------------------------------------------------------------- classification

enum class RegularityMode { regular, semi_super, super, half_super, uniformly_dense };

inline std::string to_string(RegularityMode m) {
    switch (m) {
        case RegularityMode::regular: return "regular";
        case RegularityMode::semi_super: return "semi-super";
        case RegularityMode::super: return "super";
        case RegularityMode::half_super: return "half-super";
        case RegularityMode::uniformly_dense: return "uniformly-dense";
    }
    return "?";
}

inline RegularityMode parse_mode(const std::string& s) {
    if (s == "regular") return RegularityMode::regular;
    if (s == "semi-super") return RegularityMode::semi_super;
    if (s == "super") return RegularityMode::super;
    if (s == "half-super") return RegularityMode::half_super;
    if (s == "uniformly-dense") return RegularityMode::uniformly_dense;
    throw Error("InvalidMode", s);
}

struct DensitySpec {
    double d = 0.3;
    double eta = 0.0;
    double epsilon = 0.1;
    RegularityMode mode = RegularityMode::regular;
};

struct ClassificationReport {
    RegularityMode mode = RegularityMode::regular;
    Rational density{0};
    bool regular = false;         // no irregularity witness found
    bool dense_enough = false;    // density >= d (regular / semi / super)
    std::optional<IrregularityWitness> witness;
    bool exhaustive = false;
    std::vector<Vertex> failing_vertices;
    std::vector<Colour> failing_colours;
    std::optional<Rational> min_subset_density;  // half-super
    std::optional<bool> uniformly_dense;
    bool passed = false;
    Json metadata = Json::object();
};

// Sum over colours of |N_c(v) ∩ other| for each vertex.
inline std::int64_t colour_degree(const GraphCollection& gc, Vertex v, const Bitset& other, const std::vector<Colour>& C) {
    std::int64_t s = 0;
    for (Colour c : C) s += static_cast<std::int64_t>((gc.nbrs(c, v) & other).count());
    return s;
}

inline std::int64_t cross_edges(const GraphCollection& gc, Colour c, const std::vector<Vertex>& V1, const Bitset& v2bits) {
    std::int64_t s = 0;
    for (Vertex x : V1) s += static_cast<std::int64_t>((gc.nbrs(c, x) & v2bits).count());
    return s;
}

namespace detail {
// min over A ⊆ V1, B ⊆ V2 of sum_c min(0, e_c(A,B) - d|A||B|) + eta*n^3 >= 0
inline bool uniformly_dense_check(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C, double d, double eta, std::size_t budget, std::uint64_t seed, bool& exhaustive) {
    const double n = static_cast<double>(V1.size() + V2.size());
    const double slack = eta * n * n * n;
    exhaustive = V1.size() <= 10 && V2.size() <= 10;
    auto score = [&](std::uint64_t a, std::uint64_t b) {
        std::vector<Vertex> A = decode(V1, a);
        Bitset bb(gc.n());
        std::size_t nb = 0;
        for (std::size_t i = 0; i < V2.size(); ++i)
            if ((b >> i) & 1U) { bb.set(V2[i]); ++nb; }
        double total = 0;
        const double need = d * static_cast<double>(A.size() * nb);
        for (Colour c : C) total += std::min(0.0, static_cast<double>(cross_edges(gc, c, A, bb)) - need);
        return total;
    };
    if (exhaustive) {
        for (std::uint64_t a = 1; a <= full_mask(V1.size()); ++a)
            for (std::uint64_t b = 1; b <= full_mask(V2.size()); ++b)
                if (score(a, b) < -slack - 1e-9) return false;
        return true;
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < budget; ++i) {
        std::uint64_t a = 0, b = 0;
        while (!a) for (std::size_t j = 0; j < V1.size() && j < 64; ++j) if (rng.bernoulli(0.5)) a |= std::uint64_t{1} << j;
        while (!b) for (std::size_t j = 0; j < V2.size() && j < 64; ++j) if (rng.bernoulli(0.5)) b |= std::uint64_t{1} << j;
        if (score(a, b) < -slack - 1e-9) return false;
    }
    return true;
}
}  // namespace detail

inline ClassificationReport classify_collection(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C, const DensitySpec& spec, std::size_t budget = 2000, std::uint64_t seed = 1) {
    ClassificationReport rep;
    rep.mode = spec.mode;
    auto inst = collection_instance(gc, V1, V2, C);
    rep.density = tuple_density(inst.total_edges, inst.tensor.sizes);
    const Rational d_r = to_rational(spec.d);
    rep.dense_enough = rep.density >= d_r;
    auto wit = find_witness(inst, spec.epsilon, budget, seed);
    rep.regular = !wit.witness.has_value();
    rep.witness = wit.witness;
    rep.exhaustive = wit.exhaustive;
    rep.metadata["witness_search"] = wit.metadata();

    const bool need_vertex = spec.mode != RegularityMode::regular && spec.mode != RegularityMode::uniformly_dense;
    const bool need_colour = spec.mode == RegularityMode::super || spec.mode == RegularityMode::half_super;
    const Bitset b1 = vector_to_bits(gc.n(), V1), b2 = vector_to_bits(gc.n(), V2);
    if (need_vertex) {
        auto check_side = [&](const std::vector<Vertex>& side, const Bitset& other, std::size_t other_size) {
            const Rational need = d_r * Rational(static_cast<std::int64_t>(other_size * C.size()));
            for (Vertex v : side)
                if (Rational(colour_degree(gc, v, other, C)) < need) rep.failing_vertices.push_back(v);
        };
        check_side(V1, b2, V2.size());
        check_side(V2, b1, V1.size());
    }
    if (need_colour) {
        const Rational need = d_r * Rational(static_cast<std::int64_t>(V1.size() * V2.size()));
        for (Colour c : C)
            if (Rational(cross_edges(gc, c, V1, b2)) < need) rep.failing_colours.push_back(c);
    }
    switch (spec.mode) {
        case RegularityMode::regular:
            rep.passed = rep.regular && rep.dense_enough;
            break;
        case RegularityMode::semi_super:
            rep.passed = rep.regular && rep.dense_enough && rep.failing_vertices.empty();
            break;
        case RegularityMode::super:
            rep.passed = rep.regular && rep.dense_enough && rep.failing_vertices.empty() && rep.failing_colours.empty();
            break;
        case RegularityMode::half_super: {
            auto md = min_subtuple_density(inst, spec.epsilon, budget, seed);
            rep.min_subset_density = md.min_density;
            rep.metadata["min_density_search"] = Json{{"mode", md.exhaustive ? "exhaustive" : "sampled"}, {"tuples_examined", md.tuples_examined}};
            rep.passed = md.min_density >= d_r && rep.failing_vertices.empty() && rep.failing_colours.empty();
            break;
        }
        case RegularityMode::uniformly_dense: {
            bool exh = false;
            rep.uniformly_dense = detail::uniformly_dense_check(gc, V1, V2, C, spec.d, spec.eta, budget, seed, exh);
            rep.metadata["uniform_density_search"] = exh ? "exhaustive" : "sampled";
            rep.passed = *rep.uniformly_dense;
            break;
        }
    }
    return rep;
}

inline std::vector<Colour> all_colours(const GraphCollection& gc) {
    std::vector<Colour> C(gc.colours());
    std::iota(C.begin(), C.end(), 0);
    return C;
}

// ---------------------------------------------------------------- typical elements

struct TypicalElements {
    std::vector<Vertex> atypical_v1, atypical_v2;
    std::vector<Colour> atypical_colours;
};

// Vertices whose colour-degree falls below (d - eps)|V_{3-i}||C| and colours
// with fewer than (d - eps)|V1||V2| edges, by exact counting.
inline TypicalElements typical_elements(const GraphCollection& gc, const std::vector<Vertex>& V1, const std::vector<Vertex>& V2, const std::vector<Colour>& C, const DensitySpec& spec) {
    TypicalElements out;
    const Rational f = to_rational(spec.d) - to_rational(spec.epsilon);
    const Bitset b1 = vector_to_bits(gc.n(), V1), b2 = vector_to_bits(gc.n(), V2);
    const auto k = static_cast<std::int64_t>(C.size());
    for (Vertex v : V1)
        if (Rational(colour_degree(gc, v, b2, C)) < f * Rational(static_cast<std::int64_t>(V2.size()) * k)) out.atypical_v1.push_back(v);
    for (Vertex v : V2)
        if (Rational(colour_degree(gc, v, b1, C)) < f * Rational(static_cast<std::int64_t>(V1.size()) * k)) out.atypical_v2.push_back(v);
    for (Colour c : C)
        if (Rational(cross_edges(gc, c, V1, b2)) < f * Rational(static_cast<std::int64_t>(V1.size() * V2.size()))) out.atypical_colours.push_back(c);
    return out;
}

// ---------------------------------------------------------------- parameter ledger

struct LedgerEntry {
    std::string rule;           // e.g. "proportional-slice"
    std::string justification;  // closed-form rule applied
    Rational alpha{1};
    std::int64_t k = 1;
    Rational eps_prime{0};
    std::string class_before;
    Rational m_before{0}, eps_before{0}, d_before{0}, delta_before{0};
    Rational m_after{0}, eps_after{0}, d_after{0}, delta_after{0};
    std::string class_after;
};

struct ParameterLedger {
    Rational m{0}, epsilon{0}, d{0}, delta{1};
    RegularityMode klass = RegularityMode::regular;
    std::vector<LedgerEntry> lineage;
};

enum class SliceRuleKind {
    proportional,      // (eps/alpha, d/2)
    near_spanning,     // (2 eps, d/2), super preserved
    random,            // (eps/alpha, d^2/16), super preserved
    sparsify,          // (eps', d^2/2), half-super -> super
    template_i,        // (alpha m, eps/alpha, d/2, delta/k)
    template_ii,       // (m/2, 2 eps, d/2, delta/2), super preserved
    template_iii,      // (alpha m, eps/alpha, d^2/16, delta/k), super preserved
    template_iv        // (m, eps', d^2/2, delta), half-super -> super
};

struct SliceRule {
    SliceRuleKind kind = SliceRuleKind::proportional;
    Rational alpha{1};
    std::int64_t k = 1;
    Rational eps_prime{0};
};

inline std::string to_string(SliceRuleKind k) {
    switch (k) {
        case SliceRuleKind::proportional: return "proportional-slice";
        case SliceRuleKind::near_spanning: return "near-spanning-slice";
        case SliceRuleKind::random: return "random-slice";
        case SliceRuleKind::sparsify: return "sparsify";
        case SliceRuleKind::template_i: return "template-slice-i";
        case SliceRuleKind::template_ii: return "template-slice-ii";
        case SliceRuleKind::template_iii: return "template-slice-iii";
        case SliceRuleKind::template_iv: return "template-slice-iv";
    }
    return "?";
}

inline SliceRuleKind parse_slice_rule(const std::string& s) {
    for (auto k : {SliceRuleKind::proportional, SliceRuleKind::near_spanning, SliceRuleKind::random, SliceRuleKind::sparsify, SliceRuleKind::template_i, SliceRuleKind::template_ii, SliceRuleKind::template_iii, SliceRuleKind::template_iv})
        if (to_string(k) == s) return k;
    throw Error("InvalidRule", s);
}

inline bool is_super_like(RegularityMode m) { return m == RegularityMode::super; }

inline ParameterLedger ledger_slice(const ParameterLedger& in, const SliceRule& rule) {
    auto inapplicable = [&](const std::string& why) { throw Error("RuleInapplicable", to_string(rule.kind) + ": " + why); };
    const bool alpha_rule = rule.kind == SliceRuleKind::proportional || rule.kind == SliceRuleKind::random || rule.kind == SliceRuleKind::template_i || rule.kind == SliceRuleKind::template_iii || rule.kind == SliceRuleKind::near_spanning;
    if (alpha_rule && (rule.alpha <= Rational(0) || rule.alpha > Rational(1))) inapplicable("alpha must lie in (0,1]");
    if (rule.k < 1) inapplicable("k must be positive");
    ParameterLedger out = in;
    LedgerEntry e;
    e.rule = to_string(rule.kind);
    e.eps_prime = rule.eps_prime;
    e.class_before = to_string(in.klass);
    e.alpha = rule.alpha;
    e.k = rule.k;
    e.m_before = in.m; e.eps_before = in.epsilon; e.d_before = in.d; e.delta_before = in.delta;
    const Rational two(2), sixteen(16);
    switch (rule.kind) {
        case SliceRuleKind::proportional:
            out.epsilon = in.epsilon / rule.alpha;
            out.d = in.d / two;
            out.klass = RegularityMode::regular;
            e.justification = "regular slice: (eps/alpha, d/2)";
            break;
        case SliceRuleKind::near_spanning:
            if (in.klass != RegularityMode::super) inapplicable("near-spanning slice needs a super input");
            out.epsilon = two * in.epsilon;
            out.d = in.d / two;
            e.justification = "near-spanning slice: (2 eps, d/2), class preserved";
            break;
        case SliceRuleKind::random:
            if (in.klass != RegularityMode::super) inapplicable("random slice needs a super input");
            out.epsilon = in.epsilon / rule.alpha;
            out.d = in.d * in.d / sixteen;
            e.justification = "random slice: (eps/alpha, d^2/16), super preserved";
            break;
        case SliceRuleKind::sparsify:
            if (in.klass != RegularityMode::half_super) inapplicable("sparsification needs a half-super input");
            if (rule.eps_prime <= Rational(0)) inapplicable("eps' must be positive");
            out.epsilon = rule.eps_prime;
            out.d = in.d * in.d / two;
            out.klass = RegularityMode::super;
            e.justification = "half-super to super sparsification: (eps', d^2/2)";
            break;
        case SliceRuleKind::template_i:
            out.m = rule.alpha * in.m;
            out.epsilon = in.epsilon / rule.alpha;
            out.d = in.d / two;
            out.delta = in.delta / Rational(rule.k);
            out.klass = RegularityMode::regular;
            e.justification = "template slicing (i): (alpha m, eps/alpha, d/2, delta/k)";
            break;
        case SliceRuleKind::template_ii:
            out.m = in.m / two;
            out.klass = in.klass == RegularityMode::super ? RegularityMode::super : RegularityMode::regular;
            out.epsilon = two * in.epsilon;
            out.d = in.d / two;
            out.delta = in.delta / two;
            e.justification = "template slicing (ii): (m/2, 2 eps, d/2, delta/2), super preserved if super";
            break;
        case SliceRuleKind::template_iii:
            if (in.klass != RegularityMode::super) inapplicable("template slicing (iii) needs a super template");
            out.m = rule.alpha * in.m;
            out.epsilon = in.epsilon / rule.alpha;
            out.d = in.d * in.d / sixteen;
            out.delta = in.delta / Rational(rule.k);
            e.justification = "template slicing (iii): (alpha m, eps/alpha, d^2/16, delta/k), super preserved";
            break;
        case SliceRuleKind::template_iv:
            if (in.klass != RegularityMode::half_super) inapplicable("template slicing (iv) needs a half-super template");
            if (rule.eps_prime <= Rational(0)) inapplicable("eps' must be positive");
            out.epsilon = rule.eps_prime;
            out.d = in.d * in.d / two;
            out.klass = RegularityMode::super;
            e.justification = "template slicing (iv): (m, eps', d^2/2, delta), half-super to super";
            break;
    }
    // floating-point shadow of the closed forms, cross-checking the exact arithmetic
    {
        const double ed = to_double(in.d), ee = to_double(in.epsilon), a = to_double(rule.alpha), kk = static_cast<double>(rule.k);
        double want_d = ed / 2, want_e = ee;
        switch (rule.kind) {
            case SliceRuleKind::proportional: case SliceRuleKind::template_i: want_e = ee / a; break;
            case SliceRuleKind::near_spanning: case SliceRuleKind::template_ii: want_e = 2 * ee; break;
            case SliceRuleKind::random: case SliceRuleKind::template_iii: want_e = ee / a; want_d = ed * ed / 16; break;
            case SliceRuleKind::sparsify: case SliceRuleKind::template_iv: want_e = to_double(rule.eps_prime); want_d = ed * ed / 2; break;
        }
        (void)kk;
        auto close = [](double x, double y) { return std::fabs(x - y) <= 1e-9 * std::max(1.0, std::fabs(y)); };
        if (!close(to_double(out.d), want_d) || !close(to_double(out.epsilon), want_e) || out.m < Rational(0) || out.delta < Rational(0))
            throw Error("LedgerInconsistent", to_string(rule.kind) + ": exact result disagrees with the closed form");
    }
    e.m_after = out.m; e.eps_after = out.epsilon; e.d_after = out.d; e.delta_after = out.delta;
    e.class_after = to_string(out.klass);
    out.lineage.push_back(e);
    return out;
}

// Re-applies the recorded lineage, rule by rule, to the root parameters.
inline ParameterLedger replay_lineage(const ParameterLedger& final_ledger) {
    if (final_ledger.lineage.empty()) return final_ledger;
    const auto& first = final_ledger.lineage.front();
    ParameterLedger cur;
    cur.m = first.m_before; cur.epsilon = first.eps_before; cur.d = first.d_before; cur.delta = first.delta_before;
    cur.klass = parse_mode(first.class_before);
    for (const auto& e : final_ledger.lineage) cur = ledger_slice(cur, SliceRule{parse_slice_rule(e.rule), e.alpha, e.k, e.eps_prime});
    return cur;
}

inline bool same_parameters(const ParameterLedger& a, const ParameterLedger& b) {
    return a.m == b.m && a.epsilon == b.epsilon && a.d == b.d && a.delta == b.delta && a.klass == b.klass && a.lineage.size() == b.lineage.size();
}

// ---------------------------------------------------------------- k-partite k-graphs

struct KPartiteGraph {
    std::size_t universe = 0;
    std::vector<std::vector<Vertex>> parts;  // disjoint
    std::vector<std::vector<Vertex>> edges;  // edges[e][i] in parts[i]

    std::size_t k() const { return parts.size(); }
    std::vector<std::int64_t> degrees() const {
        std::vector<std::int64_t> deg(universe, 0);
        for (const auto& e : edges)
            for (Vertex v : e) ++deg[v];
        return deg;
    }
};

inline TupleInstance kpartite_instance(const KPartiteGraph& g, const std::vector<std::vector<Vertex>>& sub) {
    detail::check_disjoint(g.universe, sub);
    std::vector<std::size_t> sizes;
    for (const auto& p : sub) sizes.push_back(p.size());
    TupleInstance inst{sub, LocalTensor::general(sizes), 0};
    std::vector<std::vector<std::int64_t>> pos;
    for (const auto& p : sub) pos.push_back(detail::position_map(g.universe, p));
    std::vector<std::size_t> x(g.k());
    for (const auto& e : g.edges) {
        bool in = true;
        for (std::size_t i = 0; i < g.k() && in; ++i) {
            in = pos[i][e[i]] >= 0;
            if (in) x[i] = static_cast<std::size_t>(pos[i][e[i]]);
        }
        if (in) { inst.tensor.add(x); ++inst.total_edges; }
    }
    return inst;
}

inline Rational density(const KPartiteGraph& g, const std::vector<std::vector<Vertex>>& sub) {
    auto inst = kpartite_instance(g, sub);
    return tuple_density(inst.total_edges, inst.tensor.sizes);
}

struct SparsifyReport {
    std::vector<std::vector<std::vector<Vertex>>> subparts;  // per part
    std::size_t regular_tuples = 0, irregular_tuples = 0, rounds = 0, attempts = 0;
    std::int64_t min_degree_ratio_num = 0;
};

// Weak-regularity refinement of the k parts (witness-driven splitting),
// followed by random edge deletion with probability 1 - d/d' inside each
// regular tuple of subparts; degrees are re-checked against d^2 prod/(2|V_i|).
inline Expected<KPartiteGraph> sparsify_to_superregular(const KPartiteGraph& g, double eps, double eps_prime, double d, std::uint64_t seed, std::size_t retries = 20, SparsifyReport* report = nullptr) {
    (void)eps;
    const std::size_t k = g.k();
    const double eps2 = eps_prime / 2.0;  // tuple regularity tolerance for the refinement
    // refinement
    std::vector<std::vector<std::vector<Vertex>>> sub(k);
    for (std::size_t i = 0; i < k; ++i) sub[i] = {g.parts[i]};
    std::size_t rounds = 0;
    const std::size_t max_rounds = static_cast<std::size_t>(std::ceil(1.0 / eps2));
    std::vector<char> tuple_regular;
    auto tuple_index = [&](const std::vector<std::size_t>& idx) {
        std::size_t t = 0;
        for (std::size_t i = 0; i < k; ++i) t = t * sub[i].size() + idx[i];
        return t;
    };
    auto for_each_tuple = [&](auto&& f) {
        std::vector<std::size_t> idx(k, 0);
        while (true) {
            f(idx);
            std::size_t i = k;
            while (i > 0) {
                --i;
                if (++idx[i] < sub[i].size()) break;
                idx[i] = 0;
                if (i == 0) return;
            }
            if (k == 0) return;
        }
    };
    while (true) {
        std::size_t total = 1;
        for (std::size_t i = 0; i < k; ++i) total *= sub[i].size();
        tuple_regular.assign(total, 1);
        std::size_t irregular = 0;
        // one splitting witness per subpart
        std::vector<std::vector<std::optional<std::vector<Vertex>>>> split(k);
        for (std::size_t i = 0; i < k; ++i) split[i].assign(sub[i].size(), std::nullopt);
        for_each_tuple([&](const std::vector<std::size_t>& idx) {
            std::vector<std::vector<Vertex>> parts;
            for (std::size_t i = 0; i < k; ++i) parts.push_back(sub[i][idx[i]]);
            // keep the largest part optimised (last)
            std::vector<std::size_t> order(k);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return parts[a].size() < parts[b].size(); });
            std::vector<std::vector<Vertex>> ordered;
            for (std::size_t i : order) ordered.push_back(parts[i]);
            if (ordered[k - 2].size() > 64) return;  // too large to test; treated as regular
            // restrict edges to ordered parts
            KPartiteGraph reordered{g.universe, ordered, {}};
            for (const auto& e : g.edges) {
                std::vector<Vertex> re(k);
                for (std::size_t i = 0; i < k; ++i) re[i] = e[order[i]];
                reordered.edges.push_back(std::move(re));
            }
            auto w = find_witness(kpartite_instance(reordered, ordered), eps2, 200, derive_seed(seed, tuple_index(idx)));
            if (w.witness) {
                tuple_regular[tuple_index(idx)] = 0;
                ++irregular;
                for (std::size_t j = 0; j < k; ++j) {
                    const std::size_t part = order[j];
                    auto& slot = split[part][idx[part]];
                    const auto& ws = w.witness->subsets[j];
                    if (!slot && ws.size() < sub[part][idx[part]].size()) slot = ws;
                }
            }
        });
        if (report) { report->irregular_tuples = irregular; report->regular_tuples = total - irregular; }
        if (static_cast<double>(irregular) <= eps2 * static_cast<double>(total) || rounds >= max_rounds) break;
        ++rounds;
        bool changed = false;
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<std::vector<Vertex>> next;
            for (std::size_t j = 0; j < sub[i].size(); ++j) {
                if (!split[i][j]) { next.push_back(sub[i][j]); continue; }
                std::vector<Vertex> a = *split[i][j], b;
                std::set_difference(sub[i][j].begin(), sub[i][j].end(), a.begin(), a.end(), std::back_inserter(b));
                next.push_back(a);
                if (!b.empty()) next.push_back(b);
                changed = true;
            }
            sub[i] = std::move(next);
            for (auto& p : sub[i]) std::sort(p.begin(), p.end());
        }
        if (!changed) break;
    }
    if (report) { report->subparts = sub; report->rounds = rounds; }

    // per-tuple densities and deletion probabilities
    std::vector<std::int64_t> owner(g.universe, -1);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < sub[i].size(); ++j)
            for (Vertex v : sub[i][j]) owner[v] = static_cast<std::int64_t>(j);
    std::size_t total = tuple_regular.size();
    std::vector<std::int64_t> tuple_edges(total, 0);
    std::vector<std::size_t> edge_tuple(g.edges.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        std::vector<std::size_t> idx(k);
        for (std::size_t i = 0; i < k; ++i) idx[i] = static_cast<std::size_t>(owner[g.edges[e][i]]);
        edge_tuple[e] = tuple_index(idx);
        ++tuple_edges[edge_tuple[e]];
    }
    std::vector<double> keep_prob(total, 1.0);
    for_each_tuple([&](const std::vector<std::size_t>& idx) {
        std::size_t t = tuple_index(idx);
        if (!tuple_regular[t]) return;
        double prod = 1;
        for (std::size_t i = 0; i < k; ++i) prod *= static_cast<double>(sub[i][idx[i]].size());
        const double dprime = static_cast<double>(tuple_edges[t]) / prod;
        if (dprime > d) keep_prob[t] = d / dprime;
    });

    double prod_all = 1;
    for (const auto& p : g.parts) prod_all *= static_cast<double>(p.size());
    for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, retries); ++attempt) {
        Rng rng(derive_seed(seed, 1000 + attempt));
        KPartiteGraph out{g.universe, g.parts, {}};
        for (std::size_t e = 0; e < g.edges.size(); ++e)
            if (keep_prob[edge_tuple[e]] >= 1.0 || rng.bernoulli(keep_prob[edge_tuple[e]])) out.edges.push_back(g.edges[e]);
        auto deg = out.degrees();
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
            const double need = d * d * prod_all / (2.0 * static_cast<double>(g.parts[i].size()));
            for (Vertex v : g.parts[i])
                if (static_cast<double>(deg[v]) < need - 1e-9) { ok = false; break; }
        }
        if (report) report->attempts = attempt + 1;
        if (ok) return out;
    }
    return make_failure("sparsify", "PromiseViolated", seed, Json{{"why", "post-hoc degree check failed on every retry"}});
}

}  // namespace tvb
