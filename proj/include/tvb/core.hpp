#pragma once
// Graph collections, their 3-graph view, pattern graphs, transversal
// embeddings, the embedding verifier, and separability certificates.

#include <array>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "util.hpp"

namespace tvb {

struct Edge {
    Vertex u = 0, v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

inline Edge normalized(Edge e) { return e.u < e.v ? e : Edge{e.v, e.u}; }

// ---------------------------------------------------------------- SimpleGraph

// Undirected simple graph with bitset adjacency. Used for hosts of the
// uncoloured blow-up embedder and for thick graphs.
class SimpleGraph {
public:
    SimpleGraph() = default;
    explicit SimpleGraph(std::size_t n) : n_(n), adj_(n, Bitset(n)) {}

    std::size_t n() const { return n_; }
    std::size_t edge_count() const { return m_; }

    void add_edge(Vertex u, Vertex v) {
        check(u, v);
        if (adj_[u].test(v)) return;
        adj_[u].set(v);
        adj_[v].set(u);
        ++m_;
    }
    void remove_edge(Vertex u, Vertex v) {
        check(u, v);
        if (!adj_[u].test(v)) return;
        adj_[u].reset(v);
        adj_[v].reset(u);
        --m_;
    }
    bool has_edge(Vertex u, Vertex v) const { return u < n_ && v < n_ && adj_[u].test(v); }
    const Bitset& nbrs(Vertex v) const { return adj_.at(v); }
    std::size_t degree(Vertex v) const { return adj_.at(v).count(); }
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (Vertex u = 0; u < n_; ++u)
            for (auto w = adj_[u].find_next(u); w != Bitset::npos; w = adj_[u].find_next(w)) out.push_back({u, static_cast<Vertex>(w)});
        return out;
    }

private:
    void check(Vertex u, Vertex v) const {
        if (u >= n_ || v >= n_) throw Error("InvalidEdge", "endpoint outside vertex set");
        if (u == v) throw Error("InvalidEdge", "loops are not allowed");
    }
    std::size_t n_ = 0, m_ = 0;
    std::vector<Bitset> adj_;
};

// ---------------------------------------------------------------- GraphCollection

// A family (G_c : c in colours) of graphs on the vertex set {0..n-1}.
// Colours are dense indices; external names map through colour_name().
class GraphCollection {
public:
    GraphCollection() = default;
    GraphCollection(std::size_t n, std::size_t k) : GraphCollection(n, default_names(k)) {}
    GraphCollection(std::size_t n, std::vector<std::string> colour_names)
        : n_(n), names_(std::move(colour_names)), adj_(names_.size() * n, Bitset(n)), count_(names_.size(), 0),
          bipartition_(names_.size()) {
        for (std::size_t c = 0; c < names_.size(); ++c) {
            if (!index_.emplace(names_[c], static_cast<Colour>(c)).second) throw Error("DuplicateColour", names_[c]);
        }
    }

    std::size_t n() const { return n_; }
    std::size_t colours() const { return names_.size(); }
    const std::string& colour_name(Colour c) const { return names_.at(c); }
    const std::vector<std::string>& colour_names() const { return names_; }
    std::optional<Colour> find_colour(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    void add_edge(Colour c, Vertex u, Vertex v) {
        check(c, u, v);
        if (const auto& bp = bipartition_[c]) {
            bool cross = (bp->first.test(u) && bp->second.test(v)) || (bp->first.test(v) && bp->second.test(u));
            if (!cross) throw Error("BipartitionViolated", "edge does not cross the declared bipartition of colour " + names_[c]);
        }
        Bitset& a = adj_[c * n_ + u];
        if (a.test(v)) return;
        a.set(v);
        adj_[c * n_ + v].set(u);
        ++count_[c];
    }
    void remove_edge(Colour c, Vertex u, Vertex v) {
        check(c, u, v);
        Bitset& a = adj_[c * n_ + u];
        if (!a.test(v)) return;
        a.reset(v);
        adj_[c * n_ + v].reset(u);
        --count_[c];
    }
    bool has_edge(Colour c, Vertex u, Vertex v) const {
        return c < colours() && u < n_ && v < n_ && adj_[c * n_ + u].test(v);
    }
    const Bitset& nbrs(Colour c, Vertex v) const { return adj_[c * n_ + v]; }
    std::size_t degree(Colour c, Vertex v) const { return nbrs(c, v).count(); }
    std::size_t edge_count(Colour c) const { return count_.at(c); }
    std::size_t total_edges() const { return std::accumulate(count_.begin(), count_.end(), std::size_t{0}); }

    std::vector<Edge> edges(Colour c) const {
        std::vector<Edge> out;
        for (Vertex u = 0; u < n_; ++u) {
            const Bitset& a = nbrs(c, u);
            for (auto w = a.find_next(u); w != Bitset::npos; w = a.find_next(w)) out.push_back({u, static_cast<Vertex>(w)});
        }
        return out;
    }

    // Colours c with uv in G_c.
    Bitset colours_of_pair(Vertex u, Vertex v) const {
        Bitset out(colours());
        for (Colour c = 0; c < colours(); ++c)
            if (adj_[c * n_ + u].test(v)) out.set(c);
        return out;
    }

    void declare_bipartition(Colour c, const Bitset& left, const Bitset& right) {
        if (left.size() != n_ || right.size() != n_ || left.intersects(right)) throw Error("InvalidBipartition", "sides must be disjoint subsets of V");
        for (const Edge& e : edges(c)) {
            bool cross = (left.test(e.u) && right.test(e.v)) || (left.test(e.v) && right.test(e.u));
            if (!cross) throw Error("BipartitionViolated", "existing edge does not cross declared bipartition");
        }
        bipartition_.at(c) = std::make_pair(left, right);
    }
    const std::optional<std::pair<Bitset, Bitset>>& bipartition(Colour c) const { return bipartition_.at(c); }

    friend bool operator==(const GraphCollection& a, const GraphCollection& b) {
        return a.n_ == b.n_ && a.names_ == b.names_ && a.adj_ == b.adj_;
    }

    static std::vector<std::string> default_names(std::size_t k) {
        std::vector<std::string> out(k);
        for (std::size_t i = 0; i < k; ++i) out[i] = std::to_string(i);
        return out;
    }

private:
    void check(Colour c, Vertex u, Vertex v) const {
        if (c >= colours()) throw Error("InvalidEdge", "unknown colour");
        if (u >= n_ || v >= n_) throw Error("InvalidEdge", "endpoint outside vertex set");
        if (u == v) throw Error("InvalidEdge", "loops are not allowed");
    }

    std::size_t n_ = 0;
    std::vector<std::string> names_;
    std::unordered_map<std::string, Colour> index_;
    std::vector<Bitset> adj_;  // adj_[c*n + v]
    std::vector<std::size_t> count_;
    std::vector<std::optional<std::pair<Bitset, Bitset>>> bipartition_;
};

// ---------------------------------------------------------------- ThreeGraph

using Triple = std::array<Vertex, 3>;

inline Triple sorted_triple(Vertex a, Vertex b, Vertex c) {
    Triple t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

class ThreeGraph {
public:
    ThreeGraph() = default;
    explicit ThreeGraph(std::size_t n) : n_(n) {}

    std::size_t n() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Triple>& edges() const { return edges_; }

    void add_edge(Vertex a, Vertex b, Vertex c) {
        if (a >= n_ || b >= n_ || c >= n_) throw Error("InvalidEdge", "3-edge endpoint outside vertex set");
        if (a == b || b == c || a == c) throw Error("InvalidEdge", "3-edge with repeated vertex");
        Triple t = sorted_triple(a, b, c);
        if (keys_.insert(key(t)).second) edges_.push_back(t);
    }
    bool has_edge(Vertex a, Vertex b, Vertex c) const {
        if (a == b || b == c || a == c || a >= n_ || b >= n_ || c >= n_) return false;
        return keys_.count(key(sorted_triple(a, b, c))) > 0;
    }
    std::size_t degree(Vertex v) const {
        std::size_t d = 0;
        for (const Triple& t : edges_) d += (t[0] == v || t[1] == v || t[2] == v);
        return d;
    }
    // link[a*n+b] = { c : abc is an edge }.
    std::vector<Bitset> pair_links() const {
        std::vector<Bitset> link(n_ * n_, Bitset(n_));
        for (const Triple& t : edges_) {
            auto put = [&](Vertex a, Vertex b, Vertex c) {
                link[a * n_ + b].set(c);
                link[b * n_ + a].set(c);
            };
            put(t[0], t[1], t[2]);
            put(t[0], t[2], t[1]);
            put(t[1], t[2], t[0]);
        }
        return link;
    }

    void set_partition_labels(std::vector<int> labels) {
        if (labels.size() != n_) throw Error("InvalidPartition", "labels must cover every vertex");
        labels_ = std::move(labels);
    }
    const std::optional<std::vector<int>>& partition_labels() const { return labels_; }

private:
    std::uint64_t key(const Triple& t) const {
        return (static_cast<std::uint64_t>(t[0]) * n_ + t[1]) * n_ + t[2];
    }
    std::size_t n_ = 0;
    std::vector<Triple> edges_;
    std::unordered_set<std::uint64_t> keys_;
    std::optional<std::vector<int>> labels_;
};

// ---------------------------------------------------------------- PatternGraph

// The graph H to be embedded, with optional homomorphism phi into a reduced
// graph R and optional target sets T_x (host vertices) for marked vertices.
class PatternGraph {
public:
    PatternGraph() = default;
    explicit PatternGraph(std::size_t n) : n_(n), adj_(n) {}

    std::size_t n() const { return n_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(std::size_t i) const { return edges_.at(i); }

    // Returns the index of the new edge.
    std::size_t add_edge(Vertex u, Vertex v) {
        if (u >= n_ || v >= n_) throw Error("InvalidEdge", "pattern edge endpoint outside vertex set");
        if (u == v) throw Error("InvalidEdge", "pattern loops are not allowed");
        if (edge_index(u, v)) throw Error("InvalidEdge", "duplicate pattern edge");
        std::size_t idx = edges_.size();
        edges_.push_back({u, v});
        adj_[u].push_back({v, idx});
        adj_[v].push_back({u, idx});
        index_.emplace(pair_key(u, v), idx);
        return idx;
    }
    // Adds vertices; returns the first new index.
    Vertex add_vertices(std::size_t k) {
        Vertex first = static_cast<Vertex>(n_);
        n_ += k;
        adj_.resize(n_);
        return first;
    }

    std::optional<std::size_t> edge_index(Vertex u, Vertex v) const {
        auto it = index_.find(pair_key(u, v));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    bool has_edge(Vertex u, Vertex v) const { return edge_index(u, v).has_value(); }

    struct Incidence {
        Vertex nbr;
        std::size_t edge;
    };
    const std::vector<Incidence>& incident(Vertex v) const { return adj_.at(v); }
    std::size_t degree(Vertex v) const { return adj_.at(v).size(); }
    std::size_t max_degree() const {
        std::size_t d = 0;
        for (const auto& a : adj_) d = std::max(d, a.size());
        return d;
    }
    std::vector<Vertex> neighbours(Vertex v) const {
        std::vector<Vertex> out;
        for (const auto& inc : adj_.at(v)) out.push_back(inc.nbr);
        return out;
    }

    // Declared maximum-degree bound (Delta); defaults to the actual maximum.
    std::size_t delta_bound() const { return delta_bound_.value_or(max_degree()); }
    void set_delta_bound(std::size_t d) {
        if (max_degree() > d) throw Error("DegreeBoundViolated", "pattern exceeds declared maximum degree");
        delta_bound_ = d;
    }

    const std::optional<std::vector<Vertex>>& phi() const { return phi_; }
    void set_phi(std::vector<Vertex> phi) {
        if (phi.size() != n_) throw Error("InvalidPhi", "phi must map every pattern vertex");
        phi_ = std::move(phi);
    }
    void clear_phi() { phi_.reset(); }

    // Target sets keyed by pattern vertex; values are sorted host vertex lists.
    const std::map<Vertex, std::vector<Vertex>>& targets() const { return targets_; }
    void set_target(Vertex x, std::vector<Vertex> hosts) {
        if (x >= n_) throw Error("InvalidTarget", "target for unknown pattern vertex");
        std::sort(hosts.begin(), hosts.end());
        hosts.erase(std::unique(hosts.begin(), hosts.end()), hosts.end());
        targets_[x] = std::move(hosts);
    }
    void clear_targets() { targets_.clear(); }

    // Marked set U_i: marked vertices with phi(x) == i.
    std::vector<Vertex> marked(Vertex cluster) const {
        std::vector<Vertex> out;
        if (!phi_) return out;
        for (const auto& [x, _] : targets_)
            if ((*phi_)[x] == cluster) out.push_back(x);
        return out;
    }

private:
    static std::uint64_t pair_key(Vertex u, Vertex v) {
        if (u > v) std::swap(u, v);
        return (static_cast<std::uint64_t>(u) << 32) | v;
    }
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<Incidence>> adj_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::optional<std::size_t> delta_bound_;
    std::optional<std::vector<Vertex>> phi_;
    std::map<Vertex, std::vector<Vertex>> targets_;
};

// Sub-pattern induced on `keep` (in the given order); returns the new pattern
// and the map new-index -> old-index. Edges kept only if both ends kept and
// `edge_filter(old_edge_index)` holds.
template <class Filter>
std::pair<PatternGraph, std::vector<Vertex>> sub_pattern(const PatternGraph& H, const std::vector<Vertex>& keep, Filter&& edge_filter) {
    std::vector<std::int64_t> pos(H.n(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<std::int64_t>(i);
    PatternGraph S(keep.size());
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const Edge& ed = H.edge(e);
        if (pos[ed.u] >= 0 && pos[ed.v] >= 0 && edge_filter(e))
            S.add_edge(static_cast<Vertex>(pos[ed.u]), static_cast<Vertex>(pos[ed.v]));
    }
    if (H.phi()) {
        std::vector<Vertex> phi(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) phi[i] = (*H.phi())[keep[i]];
        S.set_phi(std::move(phi));
    }
    for (const auto& [x, t] : H.targets())
        if (pos[x] >= 0) S.set_target(static_cast<Vertex>(pos[x]), t);
    return {std::move(S), keep};
}

inline std::pair<PatternGraph, std::vector<Vertex>> sub_pattern(const PatternGraph& H, const std::vector<Vertex>& keep) {
    return sub_pattern(H, keep, [](std::size_t) { return true; });
}

// ---------------------------------------------------------------- embeddings

struct TransversalEmbedding {
    std::vector<Vertex> tau;    // indexed by pattern vertex
    std::vector<Colour> sigma;  // indexed by pattern edge
    friend bool operator==(const TransversalEmbedding&, const TransversalEmbedding&) = default;
};

struct VerificationReport {
    bool accepted = false;
    std::vector<std::string> violations;
};

inline VerificationReport verify_transversal_embedding(const GraphCollection& gc, const PatternGraph& H, const TransversalEmbedding& emb) {
    VerificationReport rep;
    auto fail = [&](std::string s) { rep.violations.push_back(std::move(s)); };
    if (emb.tau.size() != H.n()) fail("tau has " + std::to_string(emb.tau.size()) + " entries, pattern has " + std::to_string(H.n()) + " vertices");
    if (emb.sigma.size() != H.edge_count()) fail("sigma has " + std::to_string(emb.sigma.size()) + " entries, pattern has " + std::to_string(H.edge_count()) + " edges");
    if (!rep.violations.empty()) return rep;

    std::vector<std::int64_t> vertex_owner(gc.n(), -1);
    for (Vertex x = 0; x < H.n(); ++x) {
        Vertex v = emb.tau[x];
        if (v >= gc.n()) { fail("tau(" + std::to_string(x) + ") outside host"); continue; }
        if (vertex_owner[v] >= 0) fail("tau not injective: " + std::to_string(vertex_owner[v]) + " and " + std::to_string(x) + " -> " + std::to_string(v));
        else vertex_owner[v] = x;
    }
    std::vector<std::int64_t> colour_owner(gc.colours(), -1);
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        Colour c = emb.sigma[e];
        if (c >= gc.colours()) { fail("sigma(edge " + std::to_string(e) + ") outside colour set"); continue; }
        if (colour_owner[c] >= 0) fail("sigma not injective: edges " + std::to_string(colour_owner[c]) + " and " + std::to_string(e) + " -> colour " + gc.colour_name(c));
        else colour_owner[c] = static_cast<std::int64_t>(e);
    }
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const Edge& ed = H.edge(e);
        Vertex a = emb.tau[ed.u], b = emb.tau[ed.v];
        Colour c = emb.sigma[e];
        if (a >= gc.n() || b >= gc.n() || c >= gc.colours()) continue;
        if (a == b || !gc.has_edge(c, a, b))
            fail("edge " + std::to_string(ed.u) + "-" + std::to_string(ed.v) + " maps to non-edge of colour " + gc.colour_name(c));
    }
    for (const auto& [x, T] : H.targets()) {
        if (!std::binary_search(T.begin(), T.end(), emb.tau[x])) fail("tau(" + std::to_string(x) + ") outside its target set");
    }
    rep.accepted = rep.violations.empty();
    return rep;
}

// ---------------------------------------------------------------- conversions

struct ThreeGraphView {
    ThreeGraph graph;
    Bitset v_side, c_side;  // V occupies [0,n), colours occupy [n, n+|C|)
};

inline ThreeGraphView to_three_graph(const GraphCollection& gc) {
    const std::size_t n = gc.n(), k = gc.colours();
    ThreeGraphView out{ThreeGraph(n + k), Bitset(n + k), Bitset(n + k)};
    for (std::size_t i = 0; i < n; ++i) out.v_side.set(i);
    for (std::size_t i = n; i < n + k; ++i) out.c_side.set(i);
    for (Colour c = 0; c < k; ++c)
        for (const Edge& e : gc.edges(c)) out.graph.add_edge(e.u, e.v, static_cast<Vertex>(n + c));
    std::vector<int> labels(n + k, 0);
    for (std::size_t i = n; i < n + k; ++i) labels[i] = 1;
    out.graph.set_partition_labels(std::move(labels));
    return out;
}

// v_side vertices become collection vertices (in increasing order), c_side
// vertices become colours named by their 3-graph index.
struct CollectionView {
    GraphCollection collection;
    std::vector<Vertex> vertex_of;  // collection vertex -> 3-graph vertex
    std::vector<Vertex> colour_of;  // collection colour -> 3-graph vertex
};

inline CollectionView from_three_graph_view(const ThreeGraph& g, const Bitset& v_side, const Bitset& c_side, bool ignore_outside = false) {
    if (v_side.size() != g.n() || c_side.size() != g.n()) throw Error("InvalidSides", "side sets must be subsets of the 3-graph's vertices");
    if (v_side.intersects(c_side)) throw Error("InvalidSides", "sides overlap");
    if (!ignore_outside && (v_side | c_side).count() != g.n()) throw Error("InvalidSides", "sides must partition the vertex set");
    std::vector<Vertex> vpos(g.n(), 0), cpos(g.n(), 0);
    CollectionView out;
    for_each_bit(v_side, [&](Vertex v) { vpos[v] = static_cast<Vertex>(out.vertex_of.size()); out.vertex_of.push_back(v); });
    std::vector<std::string> names;
    for_each_bit(c_side, [&](Vertex c) { cpos[c] = static_cast<Vertex>(out.colour_of.size()); out.colour_of.push_back(c); names.push_back(std::to_string(c)); });
    out.collection = GraphCollection(out.vertex_of.size(), std::move(names));
    for (const Triple& t : g.edges()) {
        int in_c = 0, in_v = 0;
        for (Vertex x : t) { in_c += c_side.test(x); in_v += v_side.test(x); }
        if (in_c != 1 || in_v != 2) {
            if (ignore_outside) continue;
            throw Error("EdgeStraddlesSides", "3-edge {" + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," + std::to_string(t[2]) + "} has " + std::to_string(in_c) + " vertices on the colour side");
        }
        Vertex c = 0, a = 0, b = 0;
        bool first = true;
        for (Vertex x : t) {
            if (c_side.test(x)) c = x;
            else if (first) { a = x; first = false; }
            else b = x;
        }
        out.collection.add_edge(cpos[c], vpos[a], vpos[b]);
    }
    return out;
}

inline GraphCollection from_three_graph(const ThreeGraph& g, const Bitset& v_side, const Bitset& c_side) {
    return from_three_graph_view(g, v_side, c_side).collection;
}

// Restores the original colour names when round-tripping a view produced by
// to_three_graph.
inline GraphCollection from_three_graph(const ThreeGraphView& view, const std::vector<std::string>& colour_names) {
    GraphCollection raw = from_three_graph(view.graph, view.v_side, view.c_side);
    GraphCollection out(raw.n(), colour_names);
    for (Colour c = 0; c < raw.colours(); ++c)
        for (const Edge& e : raw.edges(c)) out.add_edge(c, e.u, e.v);
    return out;
}

// ---------------------------------------------------------------- separability

struct SeparabilityCertificate {
    std::vector<Vertex> separator;
    std::vector<std::vector<Vertex>> components;  // of H - X, each sorted
    std::string strategy;
};

// Components of H restricted to vertices not in `removed`.
inline std::vector<std::vector<Vertex>> components_without(const PatternGraph& H, const std::vector<char>& removed) {
    std::vector<std::vector<Vertex>> comps;
    std::vector<char> seen(H.n(), 0);
    std::vector<Vertex> stack;
    for (Vertex s = 0; s < H.n(); ++s) {
        if (removed[s] || seen[s]) continue;
        comps.emplace_back();
        stack.assign(1, s);
        seen[s] = 1;
        while (!stack.empty()) {
            Vertex x = stack.back();
            stack.pop_back();
            comps.back().push_back(x);
            for (const auto& inc : H.incident(x))
                if (!removed[inc.nbr] && !seen[inc.nbr]) { seen[inc.nbr] = 1; stack.push_back(inc.nbr); }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return comps;
}

inline std::vector<std::vector<Vertex>> components(const PatternGraph& H) {
    return components_without(H, std::vector<char>(H.n(), 0));
}

inline std::size_t separability_limit(std::size_t n, double mu) { return static_cast<std::size_t>(floor_to_int(mu * static_cast<double>(n))); }

// Re-checks a certificate with an independent component-labelling pass.
inline bool check_certificate(const PatternGraph& H, const SeparabilityCertificate& cert, double mu) {
    const std::size_t limit = separability_limit(H.n(), mu);
    if (cert.separator.size() > limit) return false;
    std::vector<char> removed(H.n(), 0);
    for (Vertex x : cert.separator) {
        if (x >= H.n() || removed[x]) return false;
        removed[x] = 1;
    }
    // union-find labelling, independent of the DFS used elsewhere
    std::vector<Vertex> parent(H.n());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Vertex x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Edge& e : H.edges())
        if (!removed[e.u] && !removed[e.v]) parent[find(e.u)] = find(e.v);
    std::map<Vertex, std::size_t> sizes;
    for (Vertex x = 0; x < H.n(); ++x)
        if (!removed[x]) ++sizes[find(x)];
    for (const auto& [_, s] : sizes)
        if (s > limit) return false;
    // the recorded component list must partition V(H) - X
    std::vector<char> covered(H.n(), 0);
    std::size_t total = 0;
    for (const auto& comp : cert.components) {
        if (comp.size() > limit) return false;
        for (Vertex x : comp) {
            if (x >= H.n() || removed[x] || covered[x]) return false;
            covered[x] = 1;
            ++total;
        }
        for (Vertex x : comp)
            if (find(x) != find(comp.front())) return false;
    }
    return total + cert.separator.size() == H.n() && cert.components.size() == sizes.size();
}

namespace detail {

inline std::size_t largest(const std::vector<std::vector<Vertex>>& comps) {
    std::size_t m = 0;
    for (const auto& c : comps) m = std::max(m, c.size());
    return m;
}

// Greedy: repeatedly remove the vertex whose removal most reduces the largest
// component (ties: fewer oversized components, then smaller sum of squares,
// then lowest index).
inline std::optional<std::vector<Vertex>> greedy_separator(const PatternGraph& H, std::size_t limit) {
    std::vector<char> removed(H.n(), 0);
    std::vector<Vertex> X;
    while (true) {
        auto comps = components_without(H, removed);
        if (largest(comps) <= limit) return X;
        if (X.size() >= limit) return std::nullopt;
        std::tuple<std::size_t, std::size_t, std::size_t> best{SIZE_MAX, SIZE_MAX, SIZE_MAX};
        Vertex best_v = 0;
        for (const auto& comp : comps) {
            if (comp.size() <= limit) continue;
            for (Vertex v : comp) {
                removed[v] = 1;
                auto after = components_without(H, removed);
                removed[v] = 0;
                std::size_t big = 0, sq = 0;
                for (const auto& c : after) { big += c.size() > limit; sq += c.size() * c.size(); }
                std::tuple<std::size_t, std::size_t, std::size_t> score{largest(after), big, sq};
                if (score < best) { best = score; best_v = v; }
            }
        }
        removed[best_v] = 1;
        X.push_back(best_v);
    }
}

// Sweep along a vertex order, adding each vertex to the union of its already
// placed neighbours unless that would create a component larger than limit,
// in which case the vertex joins the separator.
inline std::vector<Vertex> sweep_separator(const PatternGraph& H, const std::vector<Vertex>& order, std::size_t limit) {
    std::vector<Vertex> parent(H.n()), size(H.n(), 1);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<char> placed(H.n(), 0), sep(H.n(), 0);
    auto find = [&](Vertex x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<Vertex> X;
    for (Vertex v : order) {
        std::vector<Vertex> roots;
        for (const auto& inc : H.incident(v))
            if (placed[inc.nbr]) roots.push_back(find(inc.nbr));
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        std::size_t total = 1;
        for (Vertex r : roots) total += size[r];
        if (total > limit) {
            sep[v] = 1;
            X.push_back(v);
            continue;
        }
        placed[v] = 1;
        for (Vertex r : roots) { parent[r] = v; size[v] += size[r]; }
    }
    return X;
}

inline std::vector<Vertex> bfs_order(const PatternGraph& H, Vertex start, std::vector<char>& seen) {
    std::vector<Vertex> order{start};
    seen[start] = 1;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (const auto& inc : H.incident(order[i]))
            if (!seen[inc.nbr]) { seen[inc.nbr] = 1; order.push_back(inc.nbr); }
    return order;
}

// BFS order of every component, each started from a pseudo-peripheral vertex
// (last vertex of a BFS from the component's lowest vertex).
inline std::vector<Vertex> peripheral_bfs_order(const PatternGraph& H) {
    std::vector<char> seen(H.n(), 0), seen2(H.n(), 0);
    std::vector<Vertex> out;
    for (Vertex s = 0; s < H.n(); ++s) {
        if (seen[s]) continue;
        auto first = bfs_order(H, s, seen);
        auto second = bfs_order(H, first.back(), seen2);
        out.insert(out.end(), second.begin(), second.end());
    }
    return out;
}

}  // namespace detail

// Finds X with |X| <= mu*v(H) such that all components of H - X have at most
// mu*v(H) vertices. Strategies: greedy removal, then order sweeps (natural
// order and pseudo-peripheral BFS order); the smallest separator wins.
// nullopt means no strategy succeeded; it does not prove non-separability.
inline std::optional<SeparabilityCertificate> separability_certificate(const PatternGraph& H, double mu) {
    if (!(mu > 0.0 && mu <= 1.0)) throw Error("InvalidParameter", "mu must lie in (0,1]");
    const std::size_t limit = separability_limit(H.n(), mu);
    std::vector<std::pair<std::vector<Vertex>, std::string>> found;
    if (auto g = detail::greedy_separator(H, limit)) found.emplace_back(*g, "greedy");
    std::vector<Vertex> natural(H.n());
    std::iota(natural.begin(), natural.end(), 0);
    found.emplace_back(detail::sweep_separator(H, natural, limit), "sweep-index");
    found.emplace_back(detail::sweep_separator(H, detail::peripheral_bfs_order(H), limit), "sweep-bfs");
    std::optional<SeparabilityCertificate> best;
    for (auto& [X, name] : found) {
        if (X.size() > limit) continue;
        if (best && best->separator.size() <= X.size()) continue;
        std::vector<char> removed(H.n(), 0);
        for (Vertex x : X) removed[x] = 1;
        SeparabilityCertificate cert{X, components_without(H, removed), name};
        std::sort(cert.separator.begin(), cert.separator.end());
        if (detail::largest(cert.components) <= limit) best = std::move(cert);
    }
    return best;
}

}  // namespace tvb
