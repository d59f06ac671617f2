#pragma once
// Seeded instance generators: random collections, the cyclic-triangle
// construction, the parity 3-graph, 1-expansions, separable pattern families
// and the Mantel extremal host.

#include <cmath>

#include "core.hpp"

namespace tvb {

// Threshold constant (26 - 2*sqrt(7))/81 ~ 0.2557 for rainbow triangles in
// collections of three graphs; shipped for threshold experiments only.
inline const double kRainbowTriangleThreshold = (26.0 - 2.0 * std::sqrt(7.0)) / 81.0;

struct GenSpec {
    std::size_t n = 10;
    std::size_t colours = 10;
    double density = 0.5;
    std::uint64_t seed = 1;
    std::string construction = "random";

    void validate() const {
        if (n < 1 || colours < 1) throw Error("InvalidParameter", "n and colour count must be at least 1");
        if (!(density >= 0.0 && density <= 1.0)) throw Error("InvalidParameter", "density must lie in [0,1]");
    }
};

// Every (pair, colour) incidence independently with probability `density`.
inline GraphCollection random_collection(const GenSpec& spec) {
    spec.validate();
    GraphCollection gc(spec.n, spec.colours);
    Rng rng(derive_seed(spec.seed, "random_collection"));
    for (Colour c = 0; c < spec.colours; ++c)
        for (Vertex u = 0; u < spec.n; ++u)
            for (Vertex v = u + 1; v < spec.n; ++v)
                if (rng.bernoulli(spec.density)) gc.add_edge(c, u, v);
    return gc;
}

// Random bipartite collection: only pairs across sides (sides listed as
// vertex ranges [0,a) and [a,a+b)) receive edges.
inline GraphCollection random_bipartite_collection(std::size_t a, std::size_t b, std::size_t colours, double density, std::uint64_t seed) {
    GraphCollection gc(a + b, colours);
    Rng rng(derive_seed(seed, "random_bipartite_collection"));
    for (Colour c = 0; c < colours; ++c)
        for (Vertex u = 0; u < a; ++u)
            for (Vertex v = static_cast<Vertex>(a); v < a + b; ++v)
                if (rng.bernoulli(density)) gc.add_edge(c, u, v);
    return gc;
}

inline SimpleGraph random_bipartite_graph(std::size_t a, std::size_t b, double density, std::uint64_t seed) {
    SimpleGraph g(a + b);
    Rng rng(derive_seed(seed, "random_bipartite_graph"));
    for (Vertex u = 0; u < a; ++u)
        for (Vertex v = static_cast<Vertex>(a); v < a + b; ++v)
            if (rng.bernoulli(density)) g.add_edge(u, v);
    return g;
}

// A tournament on V ⊎ C stored as arc bits: arc(x,y) true iff x -> y.
struct Tournament {
    std::size_t size = 0;
    std::vector<char> arcs;  // size*size
    bool arc(std::size_t x, std::size_t y) const { return arcs[x * size + y] != 0; }
};

inline Tournament random_tournament(std::size_t size, std::uint64_t seed) {
    Tournament t{size, std::vector<char>(size * size, 0)};
    Rng rng(derive_seed(seed, "tournament"));
    for (std::size_t x = 0; x < size; ++x)
        for (std::size_t y = x + 1; y < size; ++y) {
            const bool fwd = rng.bernoulli(0.5);
            t.arcs[x * size + y] = fwd;
            t.arcs[y * size + x] = !fwd;
        }
    return t;
}

inline Tournament reversed(const Tournament& t) {
    Tournament r = t;
    for (std::size_t x = 0; x < t.size; ++x)
        for (std::size_t y = 0; y < t.size; ++y)
            if (x != y) r.arcs[x * t.size + y] = !t.arc(x, y);
    return r;
}

// Vertices are 0..n-1, colour c is tournament node n+c; xy ∈ G_c iff x, y, c
// span a directed 3-cycle.
inline GraphCollection collection_from_tournament(const Tournament& t, std::size_t n, std::size_t colours) {
    if (t.size != n + colours) throw Error("InvalidParameter", "tournament size must equal n + colours");
    GraphCollection gc(n, colours);
    for (Colour c = 0; c < colours; ++c) {
        const std::size_t z = n + c;
        for (Vertex x = 0; x < n; ++x)
            for (Vertex y = x + 1; y < n; ++y) {
                const bool cyc = (t.arc(x, y) && t.arc(y, z) && t.arc(z, x)) || (t.arc(y, x) && t.arc(x, z) && t.arc(z, y));
                if (cyc) gc.add_edge(c, x, y);
            }
    }
    return gc;
}

inline GraphCollection cyclic_triangle_collection(std::size_t n, std::uint64_t seed, std::optional<std::size_t> colours = std::nullopt) {
    if (n < 3) throw Error("InvalidParameter", "cyclic-triangle construction needs n >= 3");
    const std::size_t k = colours.value_or(n);
    return collection_from_tournament(random_tournament(n + k, seed), n, k);
}

// Density of the 3-graph of a collection: 3-edges over n(n-1)/2 * |C|.
inline double collection_density(const GraphCollection& gc) {
    const double slots = static_cast<double>(gc.n()) * static_cast<double>(gc.n() - 1) / 2.0 * static_cast<double>(gc.colours());
    return slots > 0 ? static_cast<double>(gc.total_edges()) / slots : 0.0;
}

// ---------------------------------------------------------------- parity 3-graph

// Part i occupies vertices [i*k, (i+1)*k). J is a 3-partite graph given as
// an adjacency bitset per vertex (only cross-part pairs are meaningful).
struct ParityInstance {
    ThreeGraph graph;
    std::size_t part_size = 0;
    std::vector<Bitset> J;
    Bitset X;
};

inline std::vector<Bitset> random_tripartite_graph(std::size_t k, std::uint64_t seed) {
    const std::size_t n = 3 * k;
    std::vector<Bitset> J(n, Bitset(n));
    Rng rng(derive_seed(seed, "parity_J"));
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v)
            if (u / k != v / k && rng.bernoulli(0.5)) {
                J[u].set(v);
                J[v].set(u);
            }
    return J;
}

// abc (one vertex per part) is an edge iff |abc ∩ X| is even and abc is a
// triangle of J, or |abc ∩ X| is odd and abc is independent in J.
inline ParityInstance parity_threegraph_from(std::size_t k, std::vector<Bitset> J, const Bitset& X) {
    const std::size_t n = 3 * k;
    if (J.size() != n || X.size() != n) throw Error("InvalidParameter", "J and X must live on 3k vertices");
    ParityInstance out{ThreeGraph(n), k, std::move(J), X};
    std::vector<int> labels(n);
    for (Vertex v = 0; v < n; ++v) labels[v] = static_cast<int>(v / k);
    out.graph.set_partition_labels(labels);
    for (Vertex a = 0; a < k; ++a)
        for (Vertex b = static_cast<Vertex>(k); b < 2 * k; ++b)
            for (Vertex c = static_cast<Vertex>(2 * k); c < n; ++c) {
                const int inside = static_cast<int>(out.J[a].test(b)) + out.J[a].test(c) + out.J[b].test(c);
                const int parity = static_cast<int>(X.test(a)) + X.test(b) + X.test(c);
                const bool keep = parity % 2 == 0 ? inside == 3 : inside == 0;
                if (keep) out.graph.add_edge(a, b, c);
            }
    return out;
}

inline ParityInstance parity_threegraph(std::size_t n_per_part, const Bitset& X, std::uint64_t seed) {
    if (n_per_part < 1) throw Error("InvalidParameter", "parts must be non-empty");
    return parity_threegraph_from(n_per_part, random_tripartite_graph(n_per_part, seed), X);
}

// Cross-part complement of a 3-partite graph.
inline std::vector<Bitset> tripartite_complement(const std::vector<Bitset>& J, std::size_t k) {
    std::vector<Bitset> out(J.size(), Bitset(J.size()));
    for (Vertex u = 0; u < J.size(); ++u)
        for (Vertex v = 0; v < J.size(); ++v)
            if (u / k != v / k && !J[u].test(v)) out[u].set(v);
    return out;
}

// Edge density relative to the k^3 transversal triples.
inline double tripartite_density(const ThreeGraph& g, std::size_t k) {
    return k ? static_cast<double>(g.edge_count()) / static_cast<double>(k * k * k) : 0.0;
}

// ---------------------------------------------------------------- expansions

// Every edge xy of H becomes t 3-edges xyc_1..xyc_t with fresh c_i, numbered
// after V(H) in edge order.
inline ThreeGraph one_expansion(const PatternGraph& H, std::size_t t_per_edge = 1) {
    if (t_per_edge < 1) throw Error("InvalidParameter", "each edge needs at least one new vertex");
    ThreeGraph g(H.n() + H.edge_count() * t_per_edge);
    Vertex next = static_cast<Vertex>(H.n());
    for (const Edge& e : H.edges())
        for (std::size_t i = 0; i < t_per_edge; ++i) g.add_edge(e.u, e.v, next++);
    return g;
}

inline bool is_linear(const ThreeGraph& g) {
    const auto& es = g.edges();
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = i + 1; j < es.size(); ++j) {
            int common = 0;
            for (Vertex a : es[i])
                for (Vertex b : es[j]) common += a == b;
            if (common > 1) return false;
        }
    return true;
}

// ---------------------------------------------------------------- patterns

inline PatternGraph path_graph(std::size_t n) {
    PatternGraph H(n);
    for (Vertex v = 0; v + 1 < n; ++v) H.add_edge(v, v + 1);
    return H;
}

inline PatternGraph cycle_graph(std::size_t n) {
    if (n < 3) throw Error("InvalidParameter", "cycles need at least 3 vertices");
    PatternGraph H = path_graph(n);
    H.add_edge(static_cast<Vertex>(n - 1), 0);
    return H;
}

inline PatternGraph complete_graph(std::size_t n) {
    PatternGraph H(n);
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) H.add_edge(u, v);
    return H;
}

// Disjoint union of `copies` copies of F.
inline PatternGraph factor_of(const PatternGraph& F, std::size_t copies) {
    PatternGraph H(F.n() * copies);
    for (std::size_t i = 0; i < copies; ++i)
        for (const Edge& e : F.edges()) H.add_edge(static_cast<Vertex>(i * F.n() + e.u), static_cast<Vertex>(i * F.n() + e.v));
    return H;
}

inline PatternGraph cycle_union(const std::vector<std::size_t>& lengths) {
    std::size_t total = 0;
    for (auto l : lengths) {
        if (l < 3) throw Error("InvalidParameter", "cycles need at least 3 vertices");
        total += l;
    }
    PatternGraph H(total);
    Vertex base = 0;
    for (auto l : lengths) {
        for (Vertex i = 0; i < l; ++i) H.add_edge(base + i, base + static_cast<Vertex>((i + 1) % l));
        base += static_cast<Vertex>(l);
    }
    return H;
}

// k-th power of the Hamilton cycle on n vertices.
inline PatternGraph hamilton_power(std::size_t n, std::size_t k) {
    if (n < 2 * k + 1) throw Error("InvalidParameter", "cycle power needs n >= 2k+1");
    PatternGraph H(n);
    for (Vertex v = 0; v < n; ++v)
        for (std::size_t j = 1; j <= k; ++j) {
            const Vertex w = static_cast<Vertex>((v + j) % n);
            if (!H.has_edge(v, w)) H.add_edge(v, w);
        }
    return H;
}

// b-th power of the path on n vertices: bandwidth exactly b in vertex order.
inline PatternGraph bandwidth_path(std::size_t n, std::size_t b) {
    PatternGraph H(n);
    for (Vertex v = 0; v < n; ++v)
        for (std::size_t j = 1; j <= b && v + j < n; ++j) H.add_edge(v, static_cast<Vertex>(v + j));
    return H;
}

// Random tree with maximum degree at most max_degree (>= 2): each new vertex
// attaches to a uniformly chosen earlier vertex with spare degree.
inline PatternGraph random_tree(std::size_t n, std::size_t max_degree, std::uint64_t seed) {
    if (max_degree < 2 && n > 2) throw Error("InvalidParameter", "trees on more than 2 vertices need max degree >= 2");
    PatternGraph H(n);
    Rng rng(derive_seed(seed, "random_tree"));
    std::vector<Vertex> open;
    if (n) open.push_back(0);
    for (Vertex v = 1; v < n; ++v) {
        const std::size_t i = rng.below(open.size());
        const Vertex p = open[i];
        H.add_edge(p, v);
        if (H.degree(p) >= max_degree) {
            open[i] = open.back();
            open.pop_back();
        }
        open.push_back(v);
    }
    return H;
}

inline std::size_t bandwidth_of_order(const PatternGraph& H) {
    std::size_t b = 0;
    for (const Edge& e : H.edges()) b = std::max<std::size_t>(b, e.u > e.v ? e.u - e.v : e.v - e.u);
    return b;
}

struct FamilySpec {
    std::string kind = "F-factor";  // F-factor, cycle-union, hamilton-power, bandwidth-b, tree
    std::size_t n = 12;             // vertex count (power, bandwidth, tree)
    std::size_t k = 2;              // power / bandwidth / max tree degree
    std::size_t copies = 4;         // F-factor copies
    std::vector<std::size_t> cycle_lengths{4, 4, 4};
    std::optional<PatternGraph> F;  // default: triangle
    double mu = 0.3;
    std::uint64_t seed = 1;
};

struct FamilyInstance {
    PatternGraph pattern;
    std::optional<SeparabilityCertificate> certificate;
    double mu = 0;
};

inline FamilyInstance separable_family(const FamilySpec& spec) {
    PatternGraph H;
    if (spec.kind == "F-factor") H = factor_of(spec.F.value_or(complete_graph(3)), spec.copies);
    else if (spec.kind == "cycle-union") H = cycle_union(spec.cycle_lengths);
    else if (spec.kind == "hamilton-power") H = hamilton_power(spec.n, spec.k);
    else if (spec.kind == "bandwidth-b") H = bandwidth_path(spec.n, spec.k);
    else if (spec.kind == "tree") H = random_tree(spec.n, spec.k, spec.seed);
    else throw Error("InvalidParameter", "unknown family kind: " + spec.kind);
    auto cert = separability_certificate(H, spec.mu);
    return FamilyInstance{std::move(H), std::move(cert), spec.mu};
}

// Complete balanced bipartite graph K_{floor(n/2), ceil(n/2)} in every colour.
inline GraphCollection mantel_extremal(std::size_t n, std::size_t colours = 1) {
    if (n < 2) throw Error("InvalidParameter", "Mantel host needs n >= 2");
    if (colours < 1) throw Error("InvalidParameter", "need at least one colour");
    GraphCollection gc(n, colours);
    const std::size_t a = n / 2;
    for (Colour c = 0; c < colours; ++c)
        for (Vertex u = 0; u < a; ++u)
            for (Vertex v = static_cast<Vertex>(a); v < n; ++v) gc.add_edge(c, u, v);
    return gc;
}

// Dispatch on GenSpec::construction for the command line.
inline GraphCollection generate_collection(const GenSpec& spec) {
    spec.validate();
    if (spec.construction == "random") return random_collection(spec);
    if (spec.construction == "cyclic-triangle") return cyclic_triangle_collection(spec.n, spec.seed, spec.colours);
    if (spec.construction == "mantel") return mantel_extremal(spec.n, spec.colours);
    if (spec.construction == "random-bipartite") return random_bipartite_collection(spec.n / 2, spec.n - spec.n / 2, spec.colours, spec.density, spec.seed);
    throw Error("InvalidParameter", "unknown construction: " + spec.construction);
}

}  // namespace tvb
