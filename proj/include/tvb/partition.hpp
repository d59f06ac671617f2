#pragma once
// Regularity partition of a graph collection: equal-size vertex and colour
// clusters, a pruned collection G' and the reduced collection.

#include "regularity.hpp"

namespace tvb {

struct PartitionParams {
    double epsilon = 0.3;
    double d = 0.2;
    double delta = 0.5;            // size band delta*n <= |C| <= n/delta
    std::size_t L0 = 2;            // initial number of vertex clusters (lower bound on L)
    std::size_t max_rounds = 40;   // further capped by ceil(eps^-3)
    std::size_t min_cluster = 2;   // refinement never shrinks clusters below this
    std::size_t sample_budget = 400;
};

struct RegularityPartition {
    std::vector<std::vector<Vertex>> vertex_clusters;  // V_1..V_L
    std::vector<Vertex> V0;
    std::vector<std::vector<Colour>> colour_clusters;  // C_1..C_M
    std::vector<Colour> C0;
    std::size_t m = 0;
    GraphCollection pruned{0, 0};      // G'
    std::vector<SimpleGraph> reduced;  // R_1..R_M on [L]
    std::vector<double> energy_history;
    std::size_t rounds = 0;
    bool converged = false;
    std::size_t irregular_triples = 0, total_triples = 0;
    bool exhaustive_tests = false;
    Json diagnostics = Json::object();

    std::size_t L() const { return vertex_clusters.size(); }
    std::size_t M() const { return colour_clusters.size(); }
};

// Mean-square density index of f(x,y,c) = [xy in G_c] over the product
// partition (vertex parts x vertex parts x colour parts); exceptional
// elements count as singleton parts so that refinement never lowers it.
inline double partition_energy(const GraphCollection& gc, const std::vector<std::vector<Vertex>>& vparts, const std::vector<Vertex>& v0, const std::vector<std::vector<Colour>>& cparts, const std::vector<Colour>& c0) {
    std::vector<std::size_t> vp(gc.n()), vsize, cp(gc.colours()), csize;
    for (const auto& p : vparts) { for (Vertex v : p) vp[v] = vsize.size(); vsize.push_back(p.size()); }
    for (Vertex v : v0) { vp[v] = vsize.size(); vsize.push_back(1); }
    for (const auto& p : cparts) { for (Colour c : p) cp[c] = csize.size(); csize.push_back(p.size()); }
    for (Colour c : c0) { cp[c] = csize.size(); csize.push_back(1); }
    const std::size_t PV = vsize.size(), PC = csize.size();
    std::vector<double> e(PV * PV * PC, 0.0);
    for (Colour c = 0; c < gc.colours(); ++c)
        for (const Edge& ed : gc.edges(c)) {
            e[(vp[ed.u] * PV + vp[ed.v]) * PC + cp[c]] += 1;
            e[(vp[ed.v] * PV + vp[ed.u]) * PC + cp[c]] += 1;
        }
    double total = 0;
    for (std::size_t a = 0; a < PV; ++a)
        for (std::size_t b = 0; b < PV; ++b)
            for (std::size_t c = 0; c < PC; ++c) {
                double x = e[(a * PV + b) * PC + c];
                if (x > 0) total += x * x / static_cast<double>(vsize[a] * vsize[b] * csize[c]);
            }
    const double n = static_cast<double>(gc.n());
    return gc.colours() ? total / (n * n * static_cast<double>(gc.colours())) : 0.0;
}

namespace detail {

// Largest common size m' <= cap such that chunking every piece into m'-blocks
// leaves at most `budget` elements over.
inline std::size_t common_chunk_size(const std::vector<std::size_t>& pieces, std::size_t cap, std::size_t budget, std::size_t floor_size) {
    for (std::size_t m = cap; m >= std::max<std::size_t>(1, floor_size); --m) {
        std::size_t left = 0;
        for (std::size_t s : pieces) left += s % m;
        if (left <= budget) return m;
        if (m == 1) break;
    }
    return 0;
}

template <class T>
void chunk_into(const std::vector<std::vector<T>>& pieces, std::size_t m, std::vector<std::vector<T>>& out, std::vector<T>& leftover) {
    for (const auto& p : pieces) {
        std::size_t full = p.size() / m;
        for (std::size_t i = 0; i < full; ++i) out.emplace_back(p.begin() + static_cast<std::ptrdiff_t>(i * m), p.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
        leftover.insert(leftover.end(), p.begin() + static_cast<std::ptrdiff_t>(full * m), p.end());
    }
}

struct TripleVerdict {
    bool regular = true;
    Rational density{0};
    std::optional<IrregularityWitness> witness;
    bool exhaustive = false;
};

inline TripleVerdict test_triple(const GraphCollection& gc, const std::vector<Vertex>& A, const std::vector<Vertex>& B, const std::vector<Colour>& C, double eps, std::size_t budget, std::uint64_t seed, bool maximise) {
    auto inst = collection_instance(gc, A, B, C);
    TripleVerdict v;
    v.density = tuple_density(inst.total_edges, inst.tensor.sizes);
    auto w = find_witness(inst, eps, budget, seed, std::nullopt, maximise);
    v.regular = !w.witness;
    v.witness = std::move(w.witness);
    v.exhaustive = w.exhaustive;
    return v;
}

}  // namespace detail

struct PartitionPropertyReport {
    bool exceptional_ok = false;      // (i)
    bool equal_sizes_ok = false;      // (ii)
    bool degree_loss_ok = false;      // (iii)
    bool intra_cluster_ok = false;    // (iv)
    bool regular_or_empty_ok = false; // (v)
    bool subgraph_ok = false;         // G'_c ⊆ G_c
    std::vector<std::string> violations;
    bool all() const { return exceptional_ok && equal_sizes_ok && degree_loss_ok && intra_cluster_ok && regular_or_empty_ok && subgraph_ok; }
};

// Literal checks of the five structural properties on a returned partition.
inline PartitionPropertyReport check_partition_properties(const GraphCollection& gc, const RegularityPartition& P, const PartitionParams& prm, std::uint64_t seed = 1) {
    PartitionPropertyReport r;
    const double n = static_cast<double>(gc.n());
    auto note = [&](std::string s) { r.violations.push_back(std::move(s)); };
    // (i)
    r.exceptional_ok = static_cast<double>(P.V0.size() + P.C0.size()) <= prm.epsilon * n + 1e-9;
    if (!r.exceptional_ok) note("exceptional sets exceed eps*n");
    // (ii) plus coverage
    r.equal_sizes_ok = P.m > 0;
    std::vector<int> vseen(gc.n(), 0), cseen(gc.colours(), 0);
    for (const auto& V : P.vertex_clusters) { r.equal_sizes_ok &= V.size() == P.m; for (Vertex v : V) ++vseen[v]; }
    for (const auto& C : P.colour_clusters) { r.equal_sizes_ok &= C.size() == P.m; for (Colour c : C) ++cseen[c]; }
    for (Vertex v : P.V0) ++vseen[v];
    for (Colour c : P.C0) ++cseen[c];
    for (int x : vseen) r.equal_sizes_ok &= x == 1;
    for (int x : cseen) r.equal_sizes_ok &= x == 1;
    if (!r.equal_sizes_ok) note("clusters are not equal-size partitions");
    // subgraph
    r.subgraph_ok = P.pruned.n() == gc.n() && P.pruned.colours() == gc.colours();
    if (r.subgraph_ok)
        for (Colour c = 0; c < gc.colours() && r.subgraph_ok; ++c)
            for (Vertex v = 0; v < gc.n(); ++v)
                if (!(P.pruned.nbrs(c, v) - gc.nbrs(c, v)).none()) { r.subgraph_ok = false; break; }
    if (!r.subgraph_ok) { note("G' is not a subcollection of G"); return r; }
    // (iii) degree loss with the implementation's delta
    const double bound = (3.0 * prm.d / (prm.delta * prm.delta) + prm.epsilon) * n * n;
    r.degree_loss_ok = true;
    for (Vertex v = 0; v < gc.n(); ++v) {
        double loss = 0;
        for (Colour c = 0; c < gc.colours(); ++c) loss += static_cast<double>(gc.degree(c, v)) - static_cast<double>(P.pruned.degree(c, v));
        if (loss > bound + 1e-9) { r.degree_loss_ok = false; note("vertex " + std::to_string(v) + " loses too much degree"); }
    }
    for (Colour c = 0; c < gc.colours(); ++c) {
        double loss = 2.0 * (static_cast<double>(gc.edge_count(c)) - static_cast<double>(P.pruned.edge_count(c)));
        if (loss > bound + 1e-9) { r.degree_loss_ok = false; note("colour " + std::to_string(c) + " loses too much degree"); }
    }
    // (iv)
    r.intra_cluster_ok = true;
    for (const auto& C : P.colour_clusters)
        for (Colour c : C)
            for (const auto& V : P.vertex_clusters) {
                Bitset b = vector_to_bits(gc.n(), V);
                for (Vertex v : V)
                    if ((P.pruned.nbrs(c, v) & b).any()) { r.intra_cluster_ok = false; }
            }
    if (!r.intra_cluster_ok) note("intra-cluster edge in a non-exceptional colour");
    // (v)
    r.regular_or_empty_ok = true;
    std::size_t t = 0;
    for (std::size_t h = 0; h < P.L(); ++h)
        for (std::size_t i = h + 1; i < P.L(); ++i)
            for (std::size_t j = 0; j < P.M(); ++j, ++t) {
                auto inst = collection_instance(P.pruned, P.vertex_clusters[h], P.vertex_clusters[i], P.colour_clusters[j]);
                if (inst.total_edges == 0) {
                    if (P.reduced[j].has_edge(static_cast<Vertex>(h), static_cast<Vertex>(i))) { r.regular_or_empty_ok = false; note("reduced edge on an empty triple"); }
                    continue;
                }
                auto w = find_witness(inst, prm.epsilon, prm.sample_budget, derive_seed(seed, t));
                const bool dense = tuple_density(inst.total_edges, inst.tensor.sizes) >= to_rational(prm.d);
                if (w.witness || !dense || !P.reduced[j].has_edge(static_cast<Vertex>(h), static_cast<Vertex>(i))) {
                    r.regular_or_empty_ok = false;
                    note("triple (" + std::to_string(h) + "," + std::to_string(i) + "," + std::to_string(j) + ") neither empty nor regular");
                }
            }
    return r;
}

// Witness-driven refinement followed by the pruning cleanup. Returns the
// partition; on failure to converge a DidNotConverge failure carries the best
// partition's summary in its diagnostics (the partition itself is also
// available through `best` when provided).
inline Expected<RegularityPartition> partition_collection(const GraphCollection& gc, const PartitionParams& prm, std::uint64_t seed, RegularityPartition* best = nullptr) {
    const std::size_t n = gc.n(), K = gc.colours();
    if (n == 0 || K == 0) throw Error("PreconditionViolated", "empty collection");
    if (static_cast<double>(K) < prm.delta * static_cast<double>(n) - 1e-9 || static_cast<double>(K) > static_cast<double>(n) / prm.delta + 1e-9)
        throw Error("PreconditionViolated", "colour count outside [delta n, n/delta]");
    if (prm.L0 < 2) throw Error("PreconditionViolated", "L0 must be at least 2");
    const auto budget = static_cast<std::size_t>(floor_to_int(prm.epsilon * static_cast<double>(n)));

    // initial equal clusters in index order
    std::vector<Vertex> allv(n);
    std::iota(allv.begin(), allv.end(), 0);
    std::vector<Colour> allc(K);
    std::iota(allc.begin(), allc.end(), 0);
    std::size_t m0 = detail::common_chunk_size({n, K}, n / prm.L0, budget, prm.min_cluster);
    if (m0 == 0) throw Error("PreconditionViolated", "no common cluster size fits the exceptional budget");
    RegularityPartition P;
    detail::chunk_into<Vertex>({allv}, m0, P.vertex_clusters, P.V0);
    detail::chunk_into<Colour>({allc}, m0, P.colour_clusters, P.C0);
    P.m = m0;

    const std::size_t cap = static_cast<std::size_t>(std::ceil(std::pow(prm.epsilon, -3.0)));
    const std::size_t max_rounds = std::min(prm.max_rounds, cap);
    std::vector<detail::TripleVerdict> verdicts;
    for (std::size_t round = 0;; ++round) {
        P.energy_history.push_back(partition_energy(gc, P.vertex_clusters, P.V0, P.colour_clusters, P.C0));
        // test all triples
        verdicts.clear();
        std::size_t irregular = 0;
        bool exhaustive = true;
        std::size_t t = 0;
        for (std::size_t h = 0; h < P.L(); ++h)
            for (std::size_t i = h + 1; i < P.L(); ++i)
                for (std::size_t j = 0; j < P.M(); ++j, ++t) {
                    verdicts.push_back(detail::test_triple(gc, P.vertex_clusters[h], P.vertex_clusters[i], P.colour_clusters[j], prm.epsilon, prm.sample_budget, derive_seed(seed, round * 1000003 + t), true));
                    irregular += !verdicts.back().regular;
                    exhaustive &= verdicts.back().exhaustive;
                }
        P.irregular_triples = irregular;
        P.total_triples = verdicts.size();
        P.exhaustive_tests = exhaustive;
        P.rounds = round;
        const bool few_irregular = static_cast<double>(irregular) <= prm.epsilon * static_cast<double>(verdicts.size()) + 1e-9;
        if (few_irregular && P.L() >= 2) { P.converged = true; break; }
        if (round >= max_rounds) break;

        // split every cluster by the first witness set touching it
        std::vector<std::optional<std::vector<Vertex>>> vsplit(P.L());
        std::vector<std::optional<std::vector<Colour>>> csplit(P.M());
        t = 0;
        for (std::size_t h = 0; h < P.L(); ++h)
            for (std::size_t i = h + 1; i < P.L(); ++i)
                for (std::size_t j = 0; j < P.M(); ++j, ++t) {
                    const auto& w = verdicts[t].witness;
                    if (!w) continue;
                    if (!vsplit[h] && w->subsets[0].size() < P.m) vsplit[h] = w->subsets[0];
                    if (!vsplit[i] && w->subsets[1].size() < P.m) vsplit[i] = w->subsets[1];
                    if (!csplit[j] && w->subsets[2].size() < P.m) csplit[j] = w->subsets[2];
                }
        auto split_all = [&](const auto& clusters, const auto& splits) {
            using T = typename std::decay_t<decltype(clusters)>::value_type::value_type;
            std::vector<std::vector<T>> pieces;
            for (std::size_t a = 0; a < clusters.size(); ++a) {
                if (!splits[a]) { pieces.push_back(clusters[a]); continue; }
                std::vector<T> in = *splits[a], out;
                std::vector<T> sorted = clusters[a];
                std::sort(sorted.begin(), sorted.end());
                std::set_difference(sorted.begin(), sorted.end(), in.begin(), in.end(), std::back_inserter(out));
                pieces.push_back(std::move(in));
                if (!out.empty()) pieces.push_back(std::move(out));
            }
            return pieces;
        };
        auto vpieces = split_all(P.vertex_clusters, vsplit);
        auto cpieces = split_all(P.colour_clusters, csplit);
        std::vector<std::size_t> sizes;
        for (const auto& p : vpieces) sizes.push_back(p.size());
        for (const auto& p : cpieces) sizes.push_back(p.size());
        const std::size_t used = P.V0.size() + P.C0.size();
        const std::size_t m1 = used > budget ? 0 : detail::common_chunk_size(sizes, P.m, budget - used, prm.min_cluster);
        if (m1 == 0) break;
        RegularityPartition Q;
        Q.V0 = P.V0;
        Q.C0 = P.C0;
        detail::chunk_into(vpieces, m1, Q.vertex_clusters, Q.V0);
        detail::chunk_into(cpieces, m1, Q.colour_clusters, Q.C0);
        if (Q.vertex_clusters.size() < 2 || Q.colour_clusters.empty()) break;
        Q.m = m1;
        Q.energy_history = std::move(P.energy_history);
        P = std::move(Q);
    }

    // cleanup: G' keeps exceptional colours untouched; for clustered colours
    // it drops intra-cluster edges and edges of irregular or sparse triples.
    std::sort(P.V0.begin(), P.V0.end());
    std::sort(P.C0.begin(), P.C0.end());
    P.pruned = gc;
    std::vector<std::int64_t> vcl(n, -1);
    for (std::size_t h = 0; h < P.L(); ++h)
        for (Vertex v : P.vertex_clusters[h]) vcl[v] = static_cast<std::int64_t>(h);
    P.reduced.assign(P.M(), SimpleGraph(P.L()));
    const Rational d_r = to_rational(prm.d);
    std::size_t t = 0;
    std::vector<char> keep_triple(verdicts.size(), 0);
    for (std::size_t h = 0; h < P.L(); ++h)
        for (std::size_t i = h + 1; i < P.L(); ++i)
            for (std::size_t j = 0; j < P.M(); ++j, ++t) {
                keep_triple[t] = verdicts[t].regular && verdicts[t].density >= d_r;
                if (keep_triple[t]) P.reduced[j].add_edge(static_cast<Vertex>(h), static_cast<Vertex>(i));
            }
    auto triple_of = [&](std::size_t h, std::size_t i, std::size_t j) {
        if (h > i) std::swap(h, i);
        // index of (h,i,j) in the h<i, j enumeration
        std::size_t L = P.L(), idx = 0;
        for (std::size_t a = 0; a < h; ++a) idx += (L - a - 1);
        idx += (i - h - 1);
        return idx * P.M() + j;
    };
    for (std::size_t j = 0; j < P.M(); ++j)
        for (Colour c : P.colour_clusters[j])
            for (const Edge& e : gc.edges(c)) {
                const auto hu = vcl[e.u], hv = vcl[e.v];
                if (hu < 0 || hv < 0) continue;  // touches V0: kept
                if (hu == hv || !keep_triple[triple_of(static_cast<std::size_t>(hu), static_cast<std::size_t>(hv), j)]) P.pruned.remove_edge(c, e.u, e.v);
            }
    P.diagnostics = Json{{"rounds", P.rounds}, {"irregular_triples", P.irregular_triples}, {"total_triples", P.total_triples}, {"m", P.m}, {"L", P.L()}, {"M", P.M()}, {"exhaustive_tests", P.exhaustive_tests}, {"energy_history", P.energy_history}};
    if (best) *best = P;
    if (!P.converged) return make_failure("partition", "DidNotConverge", seed, P.diagnostics);
    return P;
}

// ---------------------------------------------------------------- degree inheritance

struct DegreeInheritanceReport {
    std::vector<Colour> low_min_degree_colours;  // delta(G_c) < (p+gamma) n
    std::vector<std::size_t> good_colours_per_cluster;   // #j with d_{R_j}(i) >= (p+gamma/2)L
    std::vector<std::size_t> good_clusters_per_colour;   // #i with d_{R_j}(i) >= (p+gamma/2)L
    double cluster_threshold = 0, colour_threshold = 0;  // (1-d^{1/4})M, (1-d^{1/4})L
    std::vector<std::size_t> failing_clusters, failing_colour_clusters;
    bool precondition_ok = false;
    bool passed = false;
};

inline DegreeInheritanceReport degree_inheritance_report(const GraphCollection& gc, const RegularityPartition& P, double p, double gamma, double d) {
    DegreeInheritanceReport r;
    const double n = static_cast<double>(gc.n());
    for (Colour c = 0; c < gc.colours(); ++c) {
        std::size_t mind = gc.n();
        for (Vertex v = 0; v < gc.n(); ++v) mind = std::min(mind, gc.degree(c, v));
        if (static_cast<double>(mind) < (p + gamma) * n - 1e-9) r.low_min_degree_colours.push_back(c);
    }
    r.precondition_ok = r.low_min_degree_colours.empty();
    const double L = static_cast<double>(P.L()), M = static_cast<double>(P.M());
    const double need = (p + gamma / 2.0) * L;
    r.good_colours_per_cluster.assign(P.L(), 0);
    r.good_clusters_per_colour.assign(P.M(), 0);
    for (std::size_t j = 0; j < P.M(); ++j)
        for (std::size_t i = 0; i < P.L(); ++i)
            if (static_cast<double>(P.reduced[j].degree(static_cast<Vertex>(i))) >= need - 1e-9) {
                ++r.good_colours_per_cluster[i];
                ++r.good_clusters_per_colour[j];
            }
    const double f = 1.0 - std::pow(d, 0.25);
    r.cluster_threshold = f * M;
    r.colour_threshold = f * L;
    for (std::size_t i = 0; i < P.L(); ++i)
        if (static_cast<double>(r.good_colours_per_cluster[i]) < r.cluster_threshold - 1e-9) r.failing_clusters.push_back(i);
    for (std::size_t j = 0; j < P.M(); ++j)
        if (static_cast<double>(r.good_clusters_per_colour[j]) < r.colour_threshold - 1e-9) r.failing_colour_clusters.push_back(j);
    r.passed = r.failing_clusters.empty() && r.failing_colour_clusters.empty();
    return r;
}

}  // namespace tvb
