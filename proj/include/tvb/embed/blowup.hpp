#pragma once
// Classical (uncoloured) blow-up embedder. Randomised greedy with candidate
// sets: the most constrained vertex goes first, onto the host vertex that
// keeps its unembedded neighbours' candidate sets largest. An independent
// reserve of about buffer_fraction of each cluster is placed last by a
// maximum bipartite matching. If either phase gets stuck, the partial map is
// completed arbitrarily inside the clusters and repaired by swapping images
// within a cluster (min-conflicts). Whole attempts restart up to the retry
// budget.

#include "params.hpp"

namespace tvb {

struct BlowupResult {
    std::vector<Vertex> tau;
    std::size_t attempts = 0;
    Json trace = Json::object();
};

// Structural verification of an uncoloured embedding into one host graph.
inline std::vector<std::string> verify_blowup(const SimpleGraph& host, const std::vector<std::vector<Vertex>>& clusters, const PatternGraph& H, const std::vector<Vertex>& tau) {
    std::vector<std::string> bad;
    if (tau.size() != H.n()) { bad.push_back("tau has wrong size"); return bad; }
    std::vector<char> used(host.n(), 0);
    for (Vertex x = 0; x < H.n(); ++x) {
        const Vertex v = tau[x];
        if (v >= host.n()) { bad.push_back("tau(" + std::to_string(x) + ") outside host"); continue; }
        if (used[v]++) bad.push_back("tau not injective at host vertex " + std::to_string(v));
        if (H.phi()) {
            const auto& V = clusters.at((*H.phi())[x]);
            if (std::find(V.begin(), V.end(), v) == V.end()) bad.push_back("tau(" + std::to_string(x) + ") outside its cluster");
        }
    }
    for (const Edge& e : H.edges())
        if (tau[e.u] < host.n() && tau[e.v] < host.n() && !host.has_edge(tau[e.u], tau[e.v])) bad.push_back("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " not mapped to a host edge");
    for (const auto& [x, T] : H.targets())
        if (!std::binary_search(T.begin(), T.end(), tau[x])) bad.push_back("tau(" + std::to_string(x) + ") outside its target set");
    return bad;
}

namespace detail {

// Min-conflicts repair of a complete cluster-respecting map: a conflict is an
// H-edge not mapped onto a host edge or a vertex outside its allowed set.
// Moves swap the images of two pattern vertices of the same cluster (or move
// one onto a free host vertex). Returns true when no conflict remains.
inline bool repair_by_swaps(const SimpleGraph& host, const std::vector<std::vector<Vertex>>& clusters, const PatternGraph& H, const std::vector<Bitset>& allowed, std::vector<std::int64_t>& tau, Rng& rng, std::size_t max_steps, std::size_t& steps_used) {
    const auto& phi = *H.phi();
    std::vector<std::int64_t> owner(host.n(), -1);
    for (Vertex x = 0; x < H.n(); ++x) owner[static_cast<std::size_t>(tau[x])] = x;
    auto vcost = [&](Vertex x) -> std::size_t {
        std::size_t c = !allowed[x].test(static_cast<std::size_t>(tau[x]));
        for (const auto& inc : H.incident(x)) c += !host.has_edge(static_cast<Vertex>(tau[x]), static_cast<Vertex>(tau[inc.nbr]));
        return c;
    };
    auto pair_cost = [&](Vertex x, std::int64_t y) -> std::size_t {
        std::size_t c = vcost(x);
        if (y >= 0) {
            c += vcost(static_cast<Vertex>(y));
            if (H.has_edge(x, static_cast<Vertex>(y))) c -= !host.has_edge(static_cast<Vertex>(tau[x]), static_cast<Vertex>(tau[y]));
        }
        return c;
    };
    auto conflicted = [&]() {
        std::vector<Vertex> out;
        for (Vertex x = 0; x < H.n(); ++x)
            if (vcost(x) > 0) out.push_back(x);
        return out;
    };
    auto place = [&](Vertex x, std::int64_t y, Vertex v) {
        const auto old = tau[x];
        tau[x] = v;
        owner[v] = x;
        if (y >= 0) { tau[y] = old; owner[static_cast<std::size_t>(old)] = y; }
        else owner[static_cast<std::size_t>(old)] = -1;
    };
    for (steps_used = 0; steps_used < max_steps; ++steps_used) {
        auto bad = conflicted();
        if (bad.empty()) return true;
        const Vertex x = bad[rng.below(bad.size())];
        const auto& V = clusters[phi[x]];
        std::int64_t best_delta = std::numeric_limits<std::int64_t>::max();
        std::vector<Vertex> best;
        for (Vertex v : V) {
            if (static_cast<std::int64_t>(v) == tau[x]) continue;
            const std::int64_t y = owner[v];
            const auto old = tau[x];
            const auto before = static_cast<std::int64_t>(pair_cost(x, y));
            place(x, y, v);
            const auto after = static_cast<std::int64_t>(pair_cost(x, y));
            // revert
            if (y >= 0) place(static_cast<Vertex>(y), x, v);
            else { tau[x] = old; owner[static_cast<std::size_t>(old)] = x; owner[v] = -1; }
            const std::int64_t delta = after - before;
            if (delta < best_delta) { best_delta = delta; best.assign(1, v); }
            else if (delta == best_delta) best.push_back(v);
        }
        if (best.empty()) return false;
        // occasional random move to leave plateaus
        Vertex v = best[rng.below(best.size())];
        if (best_delta >= 0 && rng.bernoulli(0.1)) v = V[rng.below(V.size())];
        if (static_cast<std::int64_t>(v) != tau[x]) place(x, owner[v], v);
    }
    return conflicted().empty();
}

}  // namespace detail

inline Expected<BlowupResult> blowup_embed(const SimpleGraph& host, const std::vector<std::vector<Vertex>>& clusters, const PatternGraph& R, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed) {
    const std::size_t n = host.n();
    if (clusters.size() != R.n()) throw Error("PreconditionViolated", "one cluster per R-vertex required");
    detail::r_edge_of(H, R);
    const auto& phi = *H.phi();
    const auto pre = detail::preimages(H, R.n());
    for (std::size_t i = 0; i < R.n(); ++i)
        if (pre[i].size() > clusters[i].size()) throw Error("PreconditionViolated", "cluster " + std::to_string(i) + " smaller than its preimage");
    std::vector<Bitset> base(H.n());
    std::vector<Bitset> cluster_bits;
    for (const auto& V : clusters) cluster_bits.push_back(vector_to_bits(n, V));
    for (Vertex x = 0; x < H.n(); ++x) {
        base[x] = cluster_bits[phi[x]];
        auto it = H.targets().find(x);
        if (it != H.targets().end()) base[x] &= vector_to_bits(n, detail::sorted_intersection(it->second, clusters[phi[x]]));
    }
    Json last_failure;
    for (std::size_t attempt = 0; attempt < plan.retries; ++attempt) {
        Rng rng(derive_seed(seed, attempt));
        // reserve: an independent set, target-free, about buffer_fraction per cluster
        std::vector<char> reserve(H.n(), 0);
        for (std::size_t i = 0; i < R.n(); ++i) {
            std::vector<Vertex> cand = pre[i];
            rng.shuffle(cand);
            const std::size_t want = static_cast<std::size_t>(std::floor(plan.buffer_fraction * static_cast<double>(pre[i].size())));
            std::size_t got = 0;
            for (Vertex x : cand) {
                if (got == want) break;
                if (H.targets().count(x)) continue;
                bool ok = true;
                for (const auto& inc : H.incident(x)) ok &= !reserve[inc.nbr];
                if (ok) { reserve[x] = 1; ++got; }
            }
        }
        std::vector<Bitset> cand = base;
        std::vector<std::int64_t> tau(H.n(), -1);
        std::vector<std::size_t> embedded_nbrs(H.n(), 0);
        std::vector<Vertex> tie(H.n());
        for (Vertex x = 0; x < H.n(); ++x) tie[x] = x;
        rng.shuffle(tie);
        std::vector<std::size_t> rank(H.n());
        for (std::size_t i = 0; i < tie.size(); ++i) rank[tie[i]] = i;
        std::size_t todo = 0;
        for (Vertex x = 0; x < H.n(); ++x) todo += !reserve[x];
        bool failed = false;
        std::string why;
        for (std::size_t step = 0; step < todo && !failed; ++step) {
            // most constrained unembedded non-reserve vertex
            std::int64_t pick = -1;
            for (Vertex x = 0; x < H.n(); ++x) {
                if (reserve[x] || tau[x] >= 0) continue;
                if (pick < 0) { pick = x; continue; }
                const auto cx = cand[x].count(), cp = cand[pick].count();
                if (cx < cp || (cx == cp && (embedded_nbrs[x] > embedded_nbrs[pick] || (embedded_nbrs[x] == embedded_nbrs[pick] && rank[x] < rank[pick])))) pick = x;
            }
            const Vertex x = static_cast<Vertex>(pick);
            if (cand[x].none()) { failed = true; why = "candidate set of " + std::to_string(x) + " empty"; break; }
            std::vector<Vertex> opts = bits_to_vector(cand[x]);
            rng.shuffle(opts);
            Vertex best = opts.front();
            std::pair<std::size_t, std::size_t> best_score{0, 0};
            bool first = true;
            for (Vertex v : opts) {
                std::size_t mn = SIZE_MAX, sum = 0;
                for (const auto& inc : H.incident(x)) {
                    if (tau[inc.nbr] >= 0) continue;
                    Bitset c = cand[inc.nbr] & host.nbrs(v);
                    c.reset(v);
                    std::size_t k = c.count();
                    mn = std::min(mn, k);
                    sum += k;
                }
                std::pair<std::size_t, std::size_t> score{mn, sum};
                if (first || score > best_score) { best_score = score; best = v; first = false; }
            }
            tau[x] = best;
            for (auto& c : cand) c.reset(best);
            for (const auto& inc : H.incident(x)) {
                if (tau[inc.nbr] >= 0) continue;
                cand[inc.nbr] &= host.nbrs(best);
                ++embedded_nbrs[inc.nbr];
                if (cand[inc.nbr].none()) { failed = true; why = "candidate set of " + std::to_string(inc.nbr) + " emptied"; }
            }
        }
        if (!failed) {
            // reserve placement: per-cluster perfect matching into free candidates
            for (std::size_t i = 0; i < R.n() && !failed; ++i) {
                std::vector<Vertex> left;
                for (Vertex x : pre[i])
                    if (reserve[x]) left.push_back(x);
                if (left.empty()) continue;
                const auto& V = clusters[i];
                std::vector<std::vector<std::size_t>> adj(left.size());
                for (std::size_t a = 0; a < left.size(); ++a)
                    for (std::size_t b = 0; b < V.size(); ++b)
                        if (cand[left[a]].test(V[b])) adj[a].push_back(b);
                auto mm = hopcroft_karp(left.size(), V.size(), adj);
                if (!mm.perfect_on_left()) { failed = true; why = "reserve matching deficient in cluster " + std::to_string(i); break; }
                for (std::size_t a = 0; a < left.size(); ++a) tau[left[a]] = V[static_cast<std::size_t>(mm.left_to_right[a])];
            }
        }
        std::size_t repair_steps = 0;
        if (failed) {
            // complete the partial map inside the clusters, then repair
            std::vector<char> taken(n, 0);
            for (auto v : tau)
                if (v >= 0) taken[static_cast<std::size_t>(v)] = 1;
            for (Vertex x = 0; x < H.n(); ++x) {
                if (tau[x] >= 0) continue;
                std::vector<Vertex> freev;
                for (Vertex v : clusters[phi[x]])
                    if (!taken[v]) freev.push_back(v);
                std::vector<Vertex> good;
                for (Vertex v : freev)
                    if (cand[x].test(v)) good.push_back(v);
                const auto& pool = good.empty() ? freev : good;
                const Vertex v = pool[rng.below(pool.size())];
                tau[x] = v;
                taken[v] = 1;
            }
            const std::size_t cap = 200 * H.n() + 1000;
            if (!detail::repair_by_swaps(host, clusters, H, base, tau, rng, cap, repair_steps)) {
                last_failure = Json{{"attempt", attempt}, {"reason", why + "; swap repair did not converge"}};
                continue;
            }
        }
        BlowupResult res;
        for (auto v : tau) res.tau.push_back(static_cast<Vertex>(v));
        auto bad = verify_blowup(host, clusters, H, res.tau);
        if (!bad.empty()) return make_failure("blowup_embed", "VerificationFailed", seed, Json{{"violations", bad}});
        res.attempts = attempt + 1;
        std::size_t reserved = 0;
        for (char c : reserve) reserved += c;
        res.trace = Json{{"attempts", res.attempts}, {"reserve", reserved}, {"repaired", failed}, {"repair_steps", repair_steps}};
        return res;
    }
    return make_failure("blowup_embed", "EmbeddingFailed", seed, Json{{"attempts", plan.retries}, {"last", last_failure}});
}

}  // namespace tvb
