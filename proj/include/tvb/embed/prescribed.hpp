#pragma once
// Prescribed colours: every colour of D must appear in the embedding. The
// prescribed colours go onto an induced matching of H chosen greedily from
// edge-colouring classes; matched edges are embedded through degree-filtered
// vertex sets, and the remainder is finished by the partial embedder.

#include "partial.hpp"

namespace tvb {

struct InducedMatching {
    std::vector<std::vector<std::size_t>> per_r_edge;  // H-edge indices
    std::vector<std::size_t> all() const {
        std::vector<std::size_t> out;
        for (const auto& v : per_r_edge) out.insert(out.end(), v.begin(), v.end());
        return out;
    }
};

// Brute-force predicate: W-avoidance, inducedness, and every outside vertex
// sees at most one matching edge.
inline std::vector<std::string> check_induced_matching(const PatternGraph& H, const std::vector<std::size_t>& M, const std::vector<Vertex>& W) {
    std::vector<std::string> bad;
    std::vector<std::int64_t> owner(H.n(), -1);
    for (std::size_t i = 0; i < M.size(); ++i) {
        const Edge& e = H.edge(M[i]);
        for (Vertex v : {e.u, e.v}) {
            if (owner[v] >= 0) bad.push_back("matching edges share vertex " + std::to_string(v));
            owner[v] = static_cast<std::int64_t>(i);
        }
    }
    for (Vertex w : W)
        if (w < H.n() && owner[w] >= 0) bad.push_back("matching uses forbidden vertex " + std::to_string(w));
    for (const Edge& e : H.edges())
        if (owner[e.u] >= 0 && owner[e.v] >= 0 && owner[e.u] != owner[e.v]) bad.push_back("matching not induced at " + std::to_string(e.u) + "-" + std::to_string(e.v));
    for (Vertex y = 0; y < H.n(); ++y) {
        if (owner[y] >= 0) continue;
        std::set<std::int64_t> seen;
        for (const auto& inc : H.incident(y))
            if (owner[inc.nbr] >= 0) seen.insert(owner[inc.nbr]);
        if (seen.size() > 1) bad.push_back("vertex " + std::to_string(y) + " sees two matching edges");
    }
    return bad;
}

// sizes[e]: number of matching edges needed between phi^{-1}(i), phi^{-1}(j)
// for R-edge e = ij. Selection is greedy at distance >= 3 in H minus M.
inline Expected<InducedMatching> find_induced_matching(const PatternGraph& H, const PatternGraph& R, const std::vector<std::size_t>& sizes, const std::vector<Vertex>& W, std::uint64_t seed = 1) {
    if (sizes.size() != R.edge_count()) throw Error("PreconditionViolated", "one size per R-edge required");
    const auto redge = detail::r_edge_of(H, R);
    InducedMatching out;
    out.per_r_edge.assign(R.edge_count(), {});
    std::vector<char> blocked(H.n(), 0), in_m_edge(H.edge_count(), 0);
    for (Vertex w : W)
        if (w < H.n()) blocked[w] = 1;
    // vertices within distance 2 of v in H minus the matching edges
    auto block_ball = [&](Vertex v) {
        blocked[v] = 1;
        for (const auto& a : H.incident(v)) {
            if (in_m_edge[a.edge]) continue;
            blocked[a.nbr] = 1;
            for (const auto& b : H.incident(a.nbr))
                if (!in_m_edge[b.edge]) blocked[b.nbr] = 1;
        }
    };
    std::vector<char> in_m_vertex(H.n(), 0);
    for (std::size_t e = 0; e < R.edge_count(); ++e) {
        if (sizes[e] == 0) continue;
        std::vector<std::size_t> J;
        std::vector<Edge> Jedges;
        for (std::size_t he = 0; he < H.edge_count(); ++he)
            if (redge[he] == e) { J.push_back(he); Jedges.push_back(H.edge(he)); }
        std::vector<std::size_t> pool;
        if (!J.empty()) {
            auto classes = colour_classes_by_size(misra_gries_edge_colouring(H.n(), Jedges));
            for (const auto& cls : classes)
                for (std::size_t k : cls) pool.push_back(J[k]);
        }
        std::size_t got = 0;
        for (std::size_t he : pool) {
            if (got == sizes[e]) break;
            const Edge& ed = H.edge(he);
            if (blocked[ed.u] || blocked[ed.v]) continue;
            out.per_r_edge[e].push_back(he);
            in_m_edge[he] = 1;
            in_m_vertex[ed.u] = in_m_vertex[ed.v] = 1;
            block_ball(ed.u);
            block_ball(ed.v);
            ++got;
        }
        if (got < sizes[e])
            return make_failure("find_induced_matching", "MatchingTooSmall", seed, Json{{"r_edge", e}, {"requested", sizes[e]}, {"found", got}, {"edges_available", J.size()}});
    }
    return out;
}

struct PrescribedOptions {
    std::optional<double> d;        // filtering density; template ledger d by default
    std::optional<double> d_dense;  // e(G_c) floor for prescribed colours
    std::optional<double> d_free;   // fraction of non-prescribed colours required
};

inline EmbedOutcome embed_prescribed_colours(const Template& t, const PatternGraph& H, const std::vector<std::vector<Colour>>& prescribed, const SplitPlan& plan, std::uint64_t seed, const PrescribedOptions& opt = {}) {
    const std::size_t n = t.gc.n();
    if (prescribed.size() != t.R.edge_count()) throw Error("PreconditionViolated", "one prescribed set per R-edge required");
    const auto redge = detail::r_edge_of(H, t.R);
    const double d = opt.d.value_or(to_double(t.ledger.d));
    const double d_dense = opt.d_dense.value_or(d);
    const double d_free = opt.d_free.value_or(d);
    std::set<Colour> Dall;
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        const Bitset vj = vector_to_bits(n, t.V(re.v));
        for (Colour c : prescribed[e]) {
            if (!std::binary_search(t.C(e).begin(), t.C(e).end(), c)) throw Error("PreconditionViolated", "prescribed colour outside its colour cluster");
            const double ec = static_cast<double>(cross_edges(t.gc, c, t.V(re.u), vj));
            if (ec < d_dense * static_cast<double>(t.V(re.u).size() * t.V(re.v).size()) - 1e-9)
                throw Error("PreconditionViolated", "prescribed colour " + t.gc.colour_name(c) + " has e(G_c) below d|V_i||V_j|");
            Dall.insert(c);
        }
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        std::size_t free_c = 0;
        for (Colour c : t.C(e)) free_c += !Dall.count(c);
        if (static_cast<double>(free_c) < d_free * static_cast<double>(t.C(e).size()) - 1e-9)
            throw Error("PreconditionViolated", "fewer than d|C_e| non-prescribed colours on R-edge " + std::to_string(e));
    }
    if (Dall.empty()) return embed_by_partial(t, H, plan, seed);

    // disjoint prescribed sets D'_e, in R-edge order
    std::vector<std::vector<Colour>> Dp(t.R.edge_count());
    {
        std::set<Colour> seen;
        for (std::size_t e = 0; e < t.R.edge_count(); ++e)
            for (Colour c : prescribed[e])
                if (seen.insert(c).second) Dp[e].push_back(c);
    }
    std::vector<Vertex> W;
    for (const auto& [w, _] : H.targets()) W.push_back(w);
    std::vector<std::size_t> sizes;
    for (const auto& D : Dp) sizes.push_back(D.size());
    auto M = find_induced_matching(H, t.R, sizes, W, seed);
    if (!M) { auto f = M.error(); f.stage = "embed_prescribed_colours/matching"; return f; }

    Rng rng(derive_seed(seed, "prescribed"));
    std::vector<std::int64_t> tau(H.n(), -1), sigma(H.edge_count(), -1);
    Bitset used_v(n);
    std::set<Colour> used_c;
    std::map<Vertex, Bitset> T;  // new target sets for neighbours of V(M)
    std::vector<char> in_x(H.n(), 0);
    for (std::size_t he : M->all()) in_x[H.edge(he).u] = in_x[H.edge(he).v] = 1;
    auto cluster_bits = [&](std::size_t i) { return vector_to_bits(n, t.V(i)) - used_v; };
    auto own_target = [&](Vertex y, Bitset base) {
        auto it = H.targets().find(y);
        if (it == H.targets().end()) return base;
        Bitset tb(n);
        for (Vertex v : it->second)
            if (v < n) tb.set(v);
        return base & tb;
    };
    auto fail = [&](const std::string& what) { return make_failure("embed_prescribed_colours", "CandidateExhausted", seed, Json{{"element", what}}); };

    // Colour-and-filter iteration shared by both matching endpoints: for each
    // neighbour w (with candidate set S_w), pick an unused non-prescribed colour
    // c in C_{j phi(w)} keeping many z with d_{G_c}(z, S_w) >= d|S_w|/6.
    auto iterate = [&](Bitset Z, Vertex self, const std::vector<std::pair<Vertex, std::size_t>>& nbrs, const std::vector<Bitset>& S, std::vector<Colour>& chosen) -> std::optional<Bitset> {
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            const auto& Ce = t.C(redge[nbrs[i].second]);
            const Bitset& Sw = S[i];
            const double sw = static_cast<double>(Sw.count());
            std::vector<Colour> opts;
            for (Colour c : Ce)
                if (!Dall.count(c) && !used_c.count(c) && std::find(chosen.begin(), chosen.end(), c) == chosen.end()) opts.push_back(c);
            rng.shuffle(opts);
            std::optional<Colour> best;
            Bitset bestZ;
            std::size_t best_sz = 0;
            for (Colour c : opts) {
                std::size_t edges = 0;
                Bitset Znext(n);
                for_each_bit(Z, [&](Vertex z) {
                    std::size_t deg = (t.gc.nbrs(c, z) & Sw).count();
                    edges += deg;
                    if (static_cast<double>(deg) >= d * sw / 6.0 - 1e-9 && deg > 0) Znext.set(z);
                });
                if (static_cast<double>(edges) < d * static_cast<double>(Z.count()) * sw / 3.0 - 1e-9) continue;
                if (Znext.count() > best_sz) { best_sz = Znext.count(); best = c; bestZ = Znext; }
            }
            if (!best) return std::nullopt;
            chosen.push_back(*best);
            Z = bestZ;
        }
        (void)self;
        return Z;
    };
    auto pick = [&](const Bitset& Z, const std::vector<Colour>& cols, const std::vector<Bitset>& S) {
        std::vector<Vertex> cand = bits_to_vector(Z);
        rng.shuffle(cand);
        Vertex best = cand.front();
        std::size_t best_score = 0;
        bool first = true;
        for (Vertex z : cand) {
            std::size_t score = SIZE_MAX;
            for (std::size_t i = 0; i < cols.size(); ++i) score = std::min(score, (t.gc.nbrs(cols[i], z) & S[i]).count());
            if (first || score > best_score) { best_score = score; best = z; first = false; }
        }
        return best;
    };

    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        for (std::size_t k = 0; k < M->per_r_edge[e].size(); ++k) {
            const std::size_t he = M->per_r_edge[e][k];
            const Colour cstar = Dp[e][k];
            Vertex x = H.edge(he).u, xp = H.edge(he).v;
            if ((*H.phi())[x] != re.u) std::swap(x, xp);
            const Bitset Uj = cluster_bits(re.u), Ujp = cluster_bits(re.v);
            Bitset Z(n);
            for_each_bit(Uj, [&](Vertex v) {
                if (static_cast<double>((t.gc.nbrs(cstar, v) & Ujp).count()) >= d * static_cast<double>(Ujp.count()) / 4.0 - 1e-9 && (t.gc.nbrs(cstar, v) & Ujp).any()) Z.set(v);
            });
            if (Z.none()) return fail("Z(x) for matching edge " + std::to_string(he));
            // neighbours of x off the matching
            std::vector<std::pair<Vertex, std::size_t>> Nx, Nxp;
            for (const auto& inc : H.incident(x))
                if (inc.nbr != xp) Nx.emplace_back(inc.nbr, inc.edge);
            for (const auto& inc : H.incident(xp))
                if (inc.nbr != x) Nxp.emplace_back(inc.nbr, inc.edge);
            std::vector<Bitset> Sx;
            for (const auto& [y, _] : Nx) Sx.push_back(own_target(y, cluster_bits((*H.phi())[y])));
            std::vector<Colour> cx;
            auto Zl = iterate(Z, x, Nx, Sx, cx);
            if (!Zl || Zl->none()) return fail("Z_l(x) for matching edge " + std::to_string(he));
            const Vertex vx = pick(*Zl, cx, Sx);
            tau[x] = vx;
            used_v.set(vx);
            std::map<Vertex, Bitset> Cy;
            for (std::size_t i = 0; i < Nx.size(); ++i) {
                sigma[Nx[i].second] = cx[i];
                used_c.insert(cx[i]);
                Bitset c = t.gc.nbrs(cx[i], vx) & Sx[i];
                c.reset(vx);
                Cy[Nx[i].first] = c;
            }
            // x': Z(x') = N_{G_c*}(tau(x), U_j')
            Bitset Zp = t.gc.nbrs(cstar, vx) & Ujp;
            std::vector<Bitset> Sxp;
            for (const auto& [w, _] : Nxp) {
                auto it = Cy.find(w);
                Sxp.push_back(it != Cy.end() ? it->second : own_target(w, cluster_bits((*H.phi())[w])));
            }
            std::vector<Colour> cxp;
            used_c.insert(cstar);
            auto Zk = iterate(Zp, xp, Nxp, Sxp, cxp);
            if (!Zk || Zk->none()) return fail("Z_k(x') for matching edge " + std::to_string(he));
            const Vertex vxp = pick(*Zk, cxp, Sxp);
            tau[xp] = vxp;
            used_v.set(vxp);
            sigma[he] = cstar;
            for (std::size_t i = 0; i < Nxp.size(); ++i) {
                sigma[Nxp[i].second] = cxp[i];
                used_c.insert(cxp[i]);
                Bitset c = t.gc.nbrs(cxp[i], vxp) & Sxp[i];
                Cy[Nxp[i].first] = c;
            }
            for (auto& [y, c] : Cy) {
                c.reset(vx);
                c.reset(vxp);
                T[y] = c;
            }
        }
    }
    // the remaining vertices: subtemplate without used vertices/colours
    std::vector<Vertex> rest;
    for (Vertex v = 0; v < H.n(); ++v)
        if (!in_x[v]) rest.push_back(v);
    auto [Hr, back] = sub_pattern(H, rest, [&](std::size_t e) { return sigma[e] < 0; });
    for (std::size_t i = 0; i < rest.size(); ++i) {
        auto it = T.find(rest[i]);
        if (it != T.end()) Hr.set_target(static_cast<Vertex>(i), bits_to_vector(it->second & ~used_v));
    }
    TemplateSelection sel;
    std::int64_t removed = 0;
    for (std::size_t i = 0; i < t.r(); ++i) {
        std::vector<Vertex> keep;
        for (Vertex v : t.V(i))
            if (!used_v.test(v)) keep.push_back(v);
        removed = std::max<std::int64_t>(removed, static_cast<std::int64_t>(t.V(i).size() - keep.size()));
        sel.clusters.push_back(std::move(keep));
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        std::vector<Colour> keep;
        for (Colour c : t.C(e))
            if (!used_c.count(c)) keep.push_back(c);
        removed = std::max<std::int64_t>(removed, static_cast<std::int64_t>(t.C(e).size() - keep.size()));
        sel.colour_clusters.push_back(std::move(keep));
    }
    SliceRule rule{SliceRuleKind::template_ii, Rational(std::max<std::int64_t>(removed, 1)) / (t.ledger.m > Rational(0) ? t.ledger.m : Rational(1)), 1, Rational(0)};
    Template sub = slice_template(t, sel, rule, seed);
    std::vector<Vertex> Xr(Hr.n());
    std::iota(Xr.begin(), Xr.end(), 0);
    auto pe = partial_embed(sub, Hr, Xr, {}, plan, derive_seed(seed, "prescribed-rest"));
    if (!pe) { auto f = pe.error(); f.stage = "embed_prescribed_colours/" + f.stage; return f; }
    for (std::size_t i = 0; i < rest.size(); ++i) tau[rest[i]] = pe->tau[i];
    {
        std::size_t k = 0;
        for (std::size_t e = 0; e < H.edge_count(); ++e)
            if (sigma[e] < 0) sigma[e] = pe->sigma[k++];
    }
    TransversalEmbedding emb;
    for (auto v : tau) emb.tau.push_back(static_cast<Vertex>(v));
    for (auto c : sigma) emb.sigma.push_back(static_cast<Colour>(c));
    Json trace{{"matching", M->all()}, {"prescribed", Dall.size()}, {"ledger", detail::ledger_json(sub.ledger)}};
    return finish_embedding(t.gc, H, std::move(emb), trace, "embed_prescribed_colours", seed);
}

}  // namespace tvb
