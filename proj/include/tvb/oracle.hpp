#pragma once
// Exact brute-force solvers used as ground truth: transversal embedding by
// backtracking over vertex images with a colour-matching feasibility check
// at every node, rainbow copy counting, and tight Hamilton cycle search.

#include <chrono>
#include <functional>

#include "core.hpp"
#include "matching.hpp"

namespace tvb {

struct SearchBudget {
    std::uint64_t node_limit = 50'000'000;
    std::uint64_t time_limit_ms = 0;  // 0: unlimited
    bool symmetry_breaking = false;

    void validate() const {
        if (node_limit == 0) throw Error("InvalidParameter", "node limit must be positive");
    }
};

enum class OracleStatus { found, infeasible, budget_exceeded };

inline std::string to_string(OracleStatus s) {
    switch (s) {
        case OracleStatus::found: return "Found";
        case OracleStatus::infeasible: return "Infeasible";
        case OracleStatus::budget_exceeded: return "BudgetExceeded";
    }
    return "?";
}

struct OracleResult {
    OracleStatus status = OracleStatus::infeasible;
    std::optional<TransversalEmbedding> embedding;
    std::uint64_t nodes = 0;
    double elapsed_ms = 0;
    bool symmetry_broken = false;
};

inline Json to_json(const OracleResult& r) {
    Json j{{"status", to_string(r.status)}, {"nodes", r.nodes}, {"elapsed_ms", r.elapsed_ms}, {"symmetry_broken", r.symmetry_broken}};
    if (r.embedding) j["embedding"] = Json{{"tau", r.embedding->tau}, {"sigma", r.embedding->sigma}};
    return j;
}

namespace detail {

class BudgetClock {
public:
    explicit BudgetClock(const SearchBudget& b) : b_(b), start_(std::chrono::steady_clock::now()) {}
    // Counts one node; false once the budget is spent.
    bool tick() {
        ++nodes_;
        if (nodes_ > b_.node_limit) return false;
        if (b_.time_limit_ms && (nodes_ & 1023) == 0 && elapsed_ms() > static_cast<double>(b_.time_limit_ms)) return false;
        return true;
    }
    std::uint64_t nodes() const { return nodes_; }
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    SearchBudget b_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t nodes_ = 0;
};

// All permutations p of V(F) with p(E) = E.
inline std::vector<std::vector<Vertex>> automorphisms(const PatternGraph& F) {
    std::vector<std::vector<Vertex>> out;
    std::vector<Vertex> p(F.n());
    std::iota(p.begin(), p.end(), 0);
    do {
        bool ok = true;
        for (const Edge& e : F.edges())
            if (!F.has_edge(p[e.u], p[e.v])) { ok = false; break; }
        if (ok) out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

inline bool vertex_transitive(const PatternGraph& F) {
    if (F.n() > 9) return false;  // permutation scan only for small patterns
    std::vector<char> reach(F.n(), 0);
    for (const auto& p : automorphisms(F)) reach[p[0]] = 1;
    return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

// Search order: repeatedly the unplaced vertex with most placed neighbours.
inline std::vector<Vertex> connected_order(const PatternGraph& H) {
    std::vector<Vertex> order;
    std::vector<char> placed(H.n(), 0);
    std::vector<std::size_t> score(H.n(), 0);
    for (std::size_t k = 0; k < H.n(); ++k) {
        Vertex best = 0;
        bool have = false;
        for (Vertex x = 0; x < H.n(); ++x) {
            if (placed[x]) continue;
            if (!have || score[x] > score[best] || (score[x] == score[best] && H.degree(x) > H.degree(best))) { best = x; have = true; }
        }
        placed[best] = 1;
        order.push_back(best);
        for (Vertex y : H.neighbours(best)) ++score[y];
    }
    return order;
}

}  // namespace detail

// Complete search over vertex images; after every placement the colours of
// the already-embedded edges must admit a system of distinct representatives
// (Hall check by maximum matching), which is exact for the colour part.
inline OracleResult exact_transversal_embed(const GraphCollection& gc, const PatternGraph& H, const SearchBudget& budget = {}) {
    budget.validate();
    OracleResult res;
    detail::BudgetClock clock(budget);
    const std::size_t n = gc.n(), K = gc.colours();
    if (H.n() > n || H.edge_count() > K) {
        res.status = OracleStatus::infeasible;
        res.elapsed_ms = clock.elapsed_ms();
        return res;
    }
    const auto order = detail::connected_order(H);
    std::vector<Bitset> allowed(H.n(), Bitset(n));
    for (Vertex x = 0; x < H.n(); ++x) {
        auto it = H.targets().find(x);
        if (it == H.targets().end()) allowed[x].set();
        else
            for (Vertex v : it->second)
                if (v < n) allowed[x].set(v);
    }
    if (budget.symmetry_breaking && H.n() == n && H.targets().empty() && detail::vertex_transitive(H)) {
        // host vertex 0 is used by some pattern vertex; by transitivity it may
        // be taken to be the first one searched
        allowed[order.front()].reset();
        allowed[order.front()].set(0);
        res.symmetry_broken = true;
    }
    std::vector<std::int64_t> tau(H.n(), -1);
    std::vector<char> used(n, 0);
    std::vector<std::size_t> placed_edges;  // edge indices with both ends placed
    std::vector<std::vector<std::size_t>> edge_colours;  // adjacency for the matching
    bool out_of_budget = false;
    std::optional<std::vector<std::int64_t>> final_match;

    auto colours_ok = [&]() -> std::optional<std::vector<std::int64_t>> {
        auto mm = hopcroft_karp(placed_edges.size(), K, edge_colours);
        if (!mm.perfect_on_left()) return std::nullopt;
        return mm.left_to_right;
    };
    std::function<bool(std::size_t)> rec = [&](std::size_t k) -> bool {
        if (k == order.size()) {
            final_match = colours_ok();
            return final_match.has_value();
        }
        const Vertex x = order[k];
        for (Vertex v = 0; v < n; ++v) {
            if (used[v] || !allowed[x].test(v)) continue;
            if (!clock.tick()) { out_of_budget = true; return false; }
            // every edge to a placed neighbour needs some colour
            const std::size_t before = placed_edges.size();
            bool ok = true;
            for (const auto& inc : H.incident(x)) {
                if (tau[inc.nbr] < 0) continue;
                std::vector<std::size_t> cs;
                const Bitset pc = gc.colours_of_pair(v, static_cast<Vertex>(tau[inc.nbr]));
                for_each_bit(pc, [&](Vertex c) { cs.push_back(c); });
                if (cs.empty()) { ok = false; break; }
                placed_edges.push_back(inc.edge);
                edge_colours.push_back(std::move(cs));
            }
            if (ok && placed_edges.size() > before) ok = colours_ok().has_value();
            if (ok) {
                tau[x] = v;
                used[v] = 1;
                if (rec(k + 1)) return true;
                used[v] = 0;
                tau[x] = -1;
            }
            placed_edges.resize(before);
            edge_colours.resize(before);
            if (out_of_budget) return false;
        }
        return false;
    };
    const bool found = rec(0);
    res.nodes = clock.nodes();
    res.elapsed_ms = clock.elapsed_ms();
    if (found) {
        TransversalEmbedding emb;
        for (auto v : tau) emb.tau.push_back(static_cast<Vertex>(v));
        emb.sigma.assign(H.edge_count(), 0);
        for (std::size_t i = 0; i < placed_edges.size(); ++i) emb.sigma[placed_edges[i]] = static_cast<Colour>((*final_match)[i]);
        if (!verify_transversal_embedding(gc, H, emb).accepted) throw Error("InternalError", "oracle produced an unverified embedding");
        res.status = OracleStatus::found;
        res.embedding = std::move(emb);
    } else {
        res.status = out_of_budget ? OracleStatus::budget_exceeded : OracleStatus::infeasible;
    }
    return res;
}

// ---------------------------------------------------------------- counting

struct CopyCount {
    std::uint64_t copies = 0;      // labelled / |Aut(F)|
    std::uint64_t labelled = 0;    // injective (tau, sigma) pairs
    std::uint64_t automorphisms = 0;
    std::uint64_t nodes = 0;
    bool complete = true;          // false when the budget ran out
};

inline Json to_json(const CopyCount& c) {
    return Json{{"copies", c.copies}, {"labelled", c.labelled}, {"automorphisms", c.automorphisms}, {"nodes", c.nodes}, {"complete", c.complete},
                {"convention", "labelled embeddings (injective tau and sigma) divided by |Aut(F)|"}};
}

// Transversal copies of F: vertex images together with colour choices,
// counted as labelled embeddings divided by the automorphism count.
inline CopyCount count_rainbow_copies(const GraphCollection& gc, const PatternGraph& F, const SearchBudget& budget = {}) {
    if (F.n() > 5) throw Error("PreconditionViolated", "copy counting is limited to patterns on at most 5 vertices");
    budget.validate();
    CopyCount out;
    out.automorphisms = detail::automorphisms(F).size();
    const std::size_t n = gc.n();
    if (gc.colours() < F.edge_count() || n < F.n()) return out;
    detail::BudgetClock clock(budget);
    std::vector<Vertex> tau(F.n(), 0);
    std::vector<char> used(n, 0);
    std::vector<std::vector<Colour>> options(F.edge_count());
    std::vector<char> cused(gc.colours(), 0);
    // number of injective colourings of the embedded edges
    std::function<std::uint64_t(std::size_t)> colourings = [&](std::size_t e) -> std::uint64_t {
        if (e == F.edge_count()) return 1;
        std::uint64_t total = 0;
        for (Colour c : options[e]) {
            if (cused[c]) continue;
            if (!clock.tick()) { out.complete = false; return total; }
            cused[c] = 1;
            total += colourings(e + 1);
            cused[c] = 0;
        }
        return total;
    };
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (!out.complete) return;
        if (k == F.n()) {
            for (std::size_t e = 0; e < F.edge_count(); ++e) {
                options[e].clear();
                for_each_bit(gc.colours_of_pair(tau[F.edge(e).u], tau[F.edge(e).v]), [&](Vertex c) { options[e].push_back(c); });
                if (options[e].empty()) return;
            }
            out.labelled += colourings(0);
            return;
        }
        for (Vertex v = 0; v < n; ++v) {
            if (used[v]) continue;
            if (!clock.tick()) { out.complete = false; return; }
            tau[k] = v;
            used[v] = 1;
            rec(k + 1);
            used[v] = 0;
        }
    };
    rec(0);
    out.nodes = clock.nodes();
    out.copies = out.automorphisms ? out.labelled / out.automorphisms : 0;
    return out;
}

// Triangles inside a single colour class, summed over colours.
inline std::uint64_t count_monochromatic_triangles(const GraphCollection& gc) {
    std::uint64_t total = 0;
    for (Colour c = 0; c < gc.colours(); ++c)
        for (const Edge& e : gc.edges(c)) {
            Bitset common = gc.nbrs(c, e.u) & gc.nbrs(c, e.v);
            for_each_bit(common, [&](Vertex w) { total += w > e.v && w > e.u; });
        }
    return total;
}

// ---------------------------------------------------------------- tight cycles

struct CycleResult {
    OracleStatus status = OracleStatus::infeasible;
    std::vector<Vertex> cycle;
    std::uint64_t nodes = 0;
    double elapsed_ms = 0;
};

inline Json to_json(const CycleResult& r) {
    return Json{{"status", to_string(r.status)}, {"cycle", r.cycle}, {"nodes", r.nodes}, {"elapsed_ms", r.elapsed_ms}};
}

inline bool is_tight_hamilton_cycle(const ThreeGraph& g, const std::vector<Vertex>& cyc) {
    const std::size_t n = g.n();
    if (cyc.size() != n || n < 3) return false;
    std::vector<char> seen(n, 0);
    for (Vertex v : cyc) {
        if (v >= n || seen[v]) return false;
        seen[v] = 1;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!g.has_edge(cyc[i], cyc[(i + 1) % n], cyc[(i + 2) % n])) return false;
    return true;
}

// Cyclic orders starting at vertex 0 in which every three consecutive
// vertices span an edge.
inline CycleResult tight_hamilton_search(const ThreeGraph& g, const SearchBudget& budget = {}) {
    budget.validate();
    CycleResult res;
    detail::BudgetClock clock(budget);
    const std::size_t n = g.n();
    auto done = [&](OracleStatus s) {
        res.status = s;
        res.nodes = clock.nodes();
        res.elapsed_ms = clock.elapsed_ms();
        return res;
    };
    if (n < 3) return done(OracleStatus::infeasible);
    for (Vertex v = 0; v < n; ++v)
        if (g.degree(v) == 0) return done(OracleStatus::infeasible);
    const auto link = g.pair_links();
    std::vector<Vertex> seq{0};
    std::vector<char> used(n, 0);
    used[0] = 1;
    bool out_of_budget = false;
    std::function<bool()> rec = [&]() -> bool {
        const std::size_t k = seq.size();
        if (k == n) {
            return g.has_edge(seq[n - 2], seq[n - 1], seq[0]) && g.has_edge(seq[n - 1], seq[0], seq[1]);
        }
        Bitset cand(n);
        if (k == 1) {
            cand.set();
        } else {
            cand = link[static_cast<std::size_t>(seq[k - 2]) * n + seq[k - 1]];
        }
        for (Vertex v = 0; v < n; ++v) {
            if (!cand.test(v) || used[v]) continue;
            if (!clock.tick()) { out_of_budget = true; return false; }
            // the new pair must still extend to an unused vertex or close up
            if (k >= 1 && k + 1 < n) {
                Bitset nxt = link[static_cast<std::size_t>(seq[k - 1]) * n + v];
                bool any = false;
                for_each_bit(nxt, [&](Vertex w) { any = any || (!used[w] && w != v); });
                if (!any && k + 1 < n) continue;
            }
            seq.push_back(v);
            used[v] = 1;
            if (rec()) return true;
            used[v] = 0;
            seq.pop_back();
            if (out_of_budget) return false;
        }
        return false;
    };
    if (rec()) {
        res.cycle = seq;
        if (!is_tight_hamilton_cycle(g, res.cycle)) throw Error("InternalError", "oracle produced an invalid cycle");
        return done(OracleStatus::found);
    }
    return done(out_of_budget ? OracleStatus::budget_exceeded : OracleStatus::infeasible);
}

}  // namespace tvb
