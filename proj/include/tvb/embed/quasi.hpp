#pragma once
// Transversal embedding into a uniformly dense collection, and the
// 1-expansion embedding into a dense 3-graph built on top of it.
//   r = Delta+1 parts of an equitable colouring of H; a random vertex
//   partition of the host with matching sizes (checked and retried); the
//   complete r-partite template is sliced to a super one; a ladder level
//   separates sparse pairs (embedded first by the partial embedder, leaving
//   candidate sets) from dense pairs (embedded by the transversal blow-up
//   pipeline on a random colour split sized by the dense edge counts).

#include "equitable.hpp"
#include "transversal.hpp"

namespace tvb {

struct QuasiOptions {
    std::optional<double> d;  // declared density; measured when absent
    double eta = 0.0;
};

namespace detail {

struct LadderChoice {
    std::size_t level = 0;
    bool fallback = false;  // no level separated the pair densities
    std::vector<char> sparse;  // per K_r edge
};

// Smallest level l in [1, pairs] with no pair density strictly between
// delta_l and delta_{l+1}; otherwise the level with fewest such pairs,
// whose in-between pairs are treated as dense.
inline LadderChoice choose_level(const std::vector<double>& dij, const SplitPlan& plan) {
    const std::size_t P = std::max<std::size_t>(1, dij.size());
    LadderChoice best;
    std::size_t best_band = SIZE_MAX;
    for (std::size_t l = 1; l <= P; ++l) {
        const double lo = plan.ladder(l), hi = plan.ladder(l + 1);
        std::size_t band = 0;
        for (double x : dij) band += (x > lo + 1e-12 && x < hi - 1e-12);
        if (band < best_band) {
            best_band = band;
            best.level = l;
            best.sparse.assign(dij.size(), 0);
            for (std::size_t k = 0; k < dij.size(); ++k) best.sparse[k] = dij[k] <= lo + 1e-12;
        }
        if (band == 0) break;
    }
    best.fallback = best_band > 0;
    return best;
}

}  // namespace detail

inline EmbedOutcome quasi_embed(const GraphCollection& gc, const PatternGraph& H0, const SplitPlan& plan, std::uint64_t seed, const QuasiOptions& opt = {}) {
    plan.validate();
    const std::size_t n = gc.n(), K = gc.colours();
    if (K != H0.edge_count()) throw Error("PreconditionViolated", "the number of colours must equal e(H)");
    if (H0.n() > n) throw Error("PreconditionViolated", "v(H) exceeds the number of host vertices");
    Json trace = Json::object();
    // isolated padding so that H spans the host
    PatternGraph H(n);
    for (const Edge& e : H0.edges()) H.add_edge(e.u, e.v);
    for (const auto& [x, T] : H0.targets()) H.set_target(x, T);
    trace["padding_vertices"] = n - H0.n();
    auto finish = [&](TransversalEmbedding emb) {
        emb.tau.resize(H0.n());
        return finish_embedding(gc, H0, std::move(emb), trace, "quasi_embed", seed);
    };
    if (H.edge_count() == 0) {
        TransversalEmbedding emb;
        std::vector<char> taken(n, 0);
        for (Vertex x = 0; x < n; ++x) {
            auto it = H.targets().find(x);
            Vertex pick = 0;
            bool found = false;
            for (Vertex v = 0; v < n && !found; ++v)
                if (!taken[v] && (it == H.targets().end() || std::binary_search(it->second.begin(), it->second.end(), v))) { pick = v; found = true; }
            if (!found) return EmbedOutcome(make_failure("quasi_embed/isolated", "TargetExhausted", seed));
            taken[pick] = 1;
            emb.tau.push_back(pick);
        }
        return finish(std::move(emb));
    }
    // declared hypotheses are recorded, not enforced
    {
        double min_vertex = 1e18, min_colour = 1e18;
        for (Vertex v = 0; v < n; ++v) {
            double s = 0;
            for (Colour c = 0; c < K; ++c) s += static_cast<double>(gc.nbrs(c, v).count());
            min_vertex = std::min(min_vertex, s / (static_cast<double>(K) * static_cast<double>(n)));
        }
        for (Colour c = 0; c < K; ++c) min_colour = std::min(min_colour, static_cast<double>(gc.edge_count(c)) / (static_cast<double>(n) * static_cast<double>(n)));
        trace["hypotheses"] = Json{{"alpha", plan.alpha}, {"min_vertex_colour_degree_fraction", min_vertex}, {"min_colour_edge_fraction", min_colour},
                                   {"vertex_condition_holds", min_vertex + 1e-12 >= plan.alpha}, {"colour_condition_holds", min_colour + 1e-12 >= plan.alpha}};
    }

    // ---- equitable colouring of H
    const std::size_t r = H.max_degree() + 1;
    auto eq = equitable_colouring(H, r, 0, derive_seed(seed, "equitable"));
    if (!eq) return eq.error();
    const auto& A = eq->parts;
    std::vector<Vertex> phi(n);
    for (std::size_t i = 0; i < r; ++i)
        for (Vertex x : A[i]) phi[x] = static_cast<Vertex>(i);
    trace["r"] = r;
    trace["part_sizes"] = Json::array();
    for (const auto& a : A) trace["part_sizes"].push_back(a.size());

    // ---- random host partition with the degree and density checks
    PatternGraph Kr(r);
    for (Vertex i = 0; i < r; ++i)
        for (Vertex j = i + 1; j < r; ++j) Kr.add_edge(i, j);
    std::vector<Colour> allc(K);
    std::iota(allc.begin(), allc.end(), 0);
    std::vector<std::vector<Vertex>> V(r);
    std::vector<double> pair_density(Kr.edge_count(), 0.0);
    const double a2 = plan.alpha * plan.alpha / 6.0;
    std::size_t attempt = 0;
    std::string last;
    for (;; ++attempt) {
        if (attempt == plan.retries) return make_failure("quasi_embed/partition", "ChernoffRetryExhausted", seed, Json{{"last_check", last}});
        Rng rng(derive_seed(seed, "host-partition", attempt));
        std::vector<Vertex> all(n);
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(all);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < r; ++i) {
            V[i].assign(all.begin() + static_cast<std::ptrdiff_t>(pos), all.begin() + static_cast<std::ptrdiff_t>(pos + A[i].size()));
            pos += A[i].size();
            std::sort(V[i].begin(), V[i].end());
        }
        bool ok = true;
        for (std::size_t e = 0; e < Kr.edge_count() && ok; ++e) {
            const Edge& re = Kr.edge(e);
            const auto& Vi = V[re.u];
            const auto& Vj = V[re.v];
            if (Vi.empty() || Vj.empty()) continue;
            const Bitset bi = vector_to_bits(n, Vi), bj = vector_to_bits(n, Vj);
            double total = 0;
            const double need3 = std::floor(a2 * static_cast<double>(Vi.size() * Vj.size()) + 1e-9);
            for (Colour c : allc) {
                const double ec = static_cast<double>(cross_edges(gc, c, Vi, bj));
                total += ec;
                if (ec < need3) { ok = false; last = "(iii)"; break; }
            }
            if (!ok) break;
            const double dens = total / (static_cast<double>(K) * static_cast<double>(Vi.size() * Vj.size()));
            pair_density[e] = dens;
            if (opt.d && dens + 1e-12 < *opt.d / 2) { ok = false; last = "(i)"; break; }
            for (int dir = 0; dir < 2 && ok; ++dir) {
                const auto& from = dir ? Vj : Vi;
                const Bitset& to = dir ? bi : bj;
                const double need2 = std::floor(a2 * static_cast<double>((dir ? Vi : Vj).size() * K) + 1e-9);
                for (Vertex v : from)
                    if (static_cast<double>(colour_degree(gc, v, to, allc)) < need2) { ok = false; last = "(ii)"; break; }
            }
        }
        if (ok) break;
    }
    trace["partition_attempts"] = attempt + 1;
    trace["pair_density"] = pair_density;

    // ---- the complete r-partite template, half-super, sliced to super
    double dmeas = 1.0;
    for (double x : pair_density) dmeas = std::min(dmeas, x);
    // rounded down to hundredths so the ledger's rationals stay small
    const double d0 = std::floor(opt.d.value_or(dmeas) * 100.0 + 1e-9) / 100.0;
    const std::size_t m = n / r;
    const double delta = std::floor(100.0 * std::min({1.0, static_cast<double>(K) / static_cast<double>(n), static_cast<double>(n) / static_cast<double>(K)}) + 1e-9) / 100.0;
    std::vector<std::vector<Colour>> every(Kr.edge_count(), allc);
    Template F = make_template(Kr, V, every, gc, static_cast<double>(std::max<std::size_t>(1, m)), plan.epsilon, std::max(0.01, d0), std::max(0.01, delta), RegularityMode::half_super);
    Json templates = Json::object();
    F.ledger = ledger_slice(F.ledger, SliceRule{SliceRuleKind::template_iv, Rational(1), 1, to_rational(plan.epsilon)});
    templates["F"] = detail::ledger_json(F.ledger);

    // ---- ladder level on the pair densities of H
    std::vector<double> dij(Kr.edge_count(), 0.0);
    const auto redge = [&](const Edge& e) { return *Kr.edge_index(phi[e.u], phi[e.v]); };
    for (const Edge& e : H.edges()) dij[redge(e)] += 1.0 / static_cast<double>(n);
    const auto lvl = detail::choose_level(dij, plan);
    std::size_t nsparse = 0;
    for (char s : lvl.sparse) nsparse += s;
    trace["ladder"] = Json{{"level", lvl.level}, {"delta_l", plan.ladder(lvl.level)}, {"delta_l_plus_1", plan.ladder(lvl.level + 1)},
                           {"d_ij", dij}, {"sparse", lvl.sparse}, {"fallback", lvl.fallback}, {"degenerate", nsparse == Kr.edge_count()}};

    // ---- sparse part: X, Y and the edges touching X
    std::vector<char> inX(n, 0), inY(n, 0);
    for (const Edge& e : H.edges())
        if (lvl.sparse[redge(e)]) inX[e.u] = inX[e.v] = 1;
    std::vector<Vertex> X, Y;
    for (Vertex x = 0; x < n; ++x)
        if (inX[x]) X.push_back(x);
    for (Vertex x : X)
        for (const auto& inc : H.incident(x))
            if (!inX[inc.nbr] && !inY[inc.nbr]) { inY[inc.nbr] = 1; Y.push_back(inc.nbr); }
    std::sort(Y.begin(), Y.end());
    TransversalEmbedding emb;
    emb.tau.assign(n, 0);
    emb.sigma.assign(H.edge_count(), 0);
    std::vector<char> vdone(n, 0);
    std::vector<char> cused(K, 0);
    std::map<Vertex, std::vector<Vertex>> cand;
    if (!X.empty()) {
        std::vector<Vertex> keep = X;
        keep.insert(keep.end(), Y.begin(), Y.end());
        auto [Hs, back] = sub_pattern(H, keep, [&](std::size_t e) { return inX[H.edge(e).u] || inX[H.edge(e).v]; });
        std::vector<Vertex> sphi;
        for (Vertex x : back) sphi.push_back(phi[x]);
        Hs.set_phi(sphi);
        std::vector<Vertex> Xl(X.size()), Yl(Y.size());
        std::iota(Xl.begin(), Xl.end(), 0);
        std::iota(Yl.begin(), Yl.end(), static_cast<Vertex>(X.size()));
        Expected<PartialEmbedding> pe = make_failure("", "", seed);
        try {
            pe = partial_embed(F, Hs, Xl, Yl, plan, derive_seed(seed, "sparse"));
        } catch (const Error& err) {
            return make_failure("quasi_embed/sparse/partial_embed", err.kind(), seed, Json{{"what", err.what()}, {"trace", trace}});
        }
        if (!pe) {
            Failure f = pe.error();
            f.stage = "quasi_embed/sparse/" + f.stage;
            f.diagnostics["quasi_trace"] = trace;
            return f;
        }
        for (std::size_t i = 0; i < X.size(); ++i) {
            emb.tau[X[i]] = static_cast<Vertex>(pe->tau[i]);
            vdone[X[i]] = 1;
        }
        for (std::size_t k = 0; k < Hs.edge_count(); ++k) {
            const Edge& ed = Hs.edge(k);
            emb.sigma[*H.edge_index(back[ed.u], back[ed.v])] = static_cast<Colour>(pe->sigma[k]);
            cused[static_cast<std::size_t>(pe->sigma[k])] = 1;
        }
        for (const auto& [yl, C] : pe->candidates) cand[back[yl]] = C;
        trace["sparse"] = Json{{"X", X.size()}, {"Y", Y.size()}, {"edges", Hs.edge_count()}, {"partial", pe->trace}};
    }

    // ---- remaining clusters and colours
    std::vector<std::vector<Vertex>> Vp(r);
    std::set<Vertex> usedv;
    for (Vertex x : X) usedv.insert(emb.tau[x]);
    for (std::size_t i = 0; i < r; ++i)
        for (Vertex v : V[i])
            if (!usedv.count(v)) Vp[i].push_back(v);
    std::vector<Colour> Cp;
    for (Colour c = 0; c < K; ++c)
        if (!cused[c]) Cp.push_back(c);
    {
        std::vector<std::vector<Colour>> every2(Kr.edge_count(), Cp);
        Json notes = Json::object();
        const Rational removed(static_cast<std::int64_t>(std::max<std::size_t>(1, X.size())), static_cast<std::int64_t>(std::max<std::size_t>(1, m)));
        F = detail::derive_template(F, Vp, every2, SliceRule{SliceRuleKind::template_ii, removed, 1, Rational(0)}, "F_prime", notes);
        templates["F_prime"] = notes["F_prime"];
    }

    // ---- dense part H^> = H - X with a random colour split
    std::vector<Vertex> rest;
    for (Vertex x = 0; x < n; ++x)
        if (!inX[x]) rest.push_back(x);
    auto [Hd, dback] = sub_pattern(H, rest);
    std::vector<std::size_t> dsize(Kr.edge_count(), 0);
    for (const Edge& e : Hd.edges()) ++dsize[*Kr.edge_index(phi[dback[e.u]], phi[dback[e.v]])];
    std::size_t dtotal = 0;
    for (auto s : dsize) dtotal += s;
    trace["colour_split"] = Json{{"sizes", dsize}, {"total", dtotal}, {"dense_edges", Hd.edge_count()}, {"available", Cp.size()}};
    if (dtotal != Cp.size()) return make_failure("quasi_embed/colour_split", "CountingIdentityViolated", seed, trace);
    if (Hd.edge_count() == 0) {
        // every pair sparse: the partial embedding already coloured all edges
        std::vector<std::size_t> next(r, 0);
        for (Vertex x : rest) {
            const std::size_t i = phi[x];
            if (next[i] >= Vp[i].size()) return make_failure("quasi_embed/isolated", "TargetExhausted", seed, trace);
            emb.tau[x] = Vp[i][next[i]++];
        }
        trace["templates"] = templates;
        return finish(std::move(emb));
    }
    Rng crng(derive_seed(seed, "colour-split"));
    std::vector<Colour> shuffled = Cp;
    crng.shuffle(shuffled);
    // drop K_r edges with no dense pattern edge
    PatternGraph R(r);
    std::vector<std::vector<Colour>> Cdd;
    std::size_t pos = 0;
    for (std::size_t e = 0; e < Kr.edge_count(); ++e) {
        if (dsize[e] == 0) continue;
        R.add_edge(Kr.edge(e).u, Kr.edge(e).v);
        Cdd.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(pos), shuffled.begin() + static_cast<std::ptrdiff_t>(pos + dsize[e]));
        pos += dsize[e];
    }
    trace["dense_r_edges"] = R.edge_count();
    Template F2 = F;
    F2.R = R;
    F2.colour_clusters = Cdd;
    for (auto& C : F2.colour_clusters) std::sort(C.begin(), C.end());
    F2.rainbow = true;
    {
        const double a = plan.ladder(lvl.level + 1);
        F2.ledger = ledger_slice(F.ledger, SliceRule{SliceRuleKind::template_iii, to_rational(std::min(1.0, a * a)), 1, Rational(0)});
        templates["F_double_prime"] = detail::ledger_json(F2.ledger);
    }
    trace["templates"] = templates;
    std::vector<Vertex> dphi;
    for (Vertex x : dback) dphi.push_back(phi[x]);
    Hd.set_phi(dphi);
    Hd.clear_targets();
    for (std::size_t i = 0; i < dback.size(); ++i) {
        auto it = cand.find(dback[i]);
        if (it != cand.end()) Hd.set_target(static_cast<Vertex>(i), it->second);
        else if (auto jt = H.targets().find(dback[i]); jt != H.targets().end()) Hd.set_target(static_cast<Vertex>(i), jt->second);
    }
    EmbedOutcome dense = make_failure("", "", seed);
    try {
        dense = transversal_blowup(F2, Hd, plan, derive_seed(seed, "dense"));
    } catch (const Error& err) {
        return make_failure("quasi_embed/dense/transversal_blowup", err.kind(), seed, Json{{"what", err.what()}, {"trace", trace}});
    }
    if (!dense) {
        Failure f = dense.error();
        f.stage = "quasi_embed/dense/" + f.stage;
        f.diagnostics["quasi_trace"] = trace;
        return f;
    }
    for (std::size_t i = 0; i < dback.size(); ++i) emb.tau[dback[i]] = dense->emb.tau[i];
    for (std::size_t k = 0; k < Hd.edge_count(); ++k) {
        const Edge& ed = Hd.edge(k);
        emb.sigma[*H.edge_index(dback[ed.u], dback[ed.v])] = dense->emb.sigma[k];
    }
    trace["dense"] = dense->trace;
    return finish(std::move(emb));
}

// ---------------------------------------------------------------- 1-expansions

struct ExpansionEmbedding {
    std::vector<Vertex> vertex_image;  // per H vertex, a 3-graph vertex
    std::vector<Vertex> edge_image;    // per H edge, a 3-graph vertex
    Json trace = Json::object();
};

inline Json to_json(const ExpansionEmbedding& e) {
    return Json{{"vertex_image", e.vertex_image}, {"edge_image", e.edge_image}, {"trace", e.trace}};
}

// Injectivity and membership of every triple.
inline std::vector<std::string> verify_expansion(const ThreeGraph& g, const PatternGraph& H, const ExpansionEmbedding& x) {
    std::vector<std::string> out;
    if (x.vertex_image.size() != H.n() || x.edge_image.size() != H.edge_count()) {
        out.push_back("image sizes do not match the pattern");
        return out;
    }
    std::set<Vertex> seen;
    for (Vertex v : x.vertex_image) {
        if (v >= g.n()) out.push_back("image outside the 3-graph");
        if (!seen.insert(v).second) out.push_back("image vertex " + std::to_string(v) + " used twice");
    }
    for (Vertex v : x.edge_image) {
        if (v >= g.n()) out.push_back("image outside the 3-graph");
        if (!seen.insert(v).second) out.push_back("image vertex " + std::to_string(v) + " used twice");
    }
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const Edge& ed = H.edge(e);
        if (!g.has_edge(x.vertex_image[ed.u], x.vertex_image[ed.v], x.edge_image[e]))
            out.push_back("triple for pattern edge " + std::to_string(e) + " is not an edge");
    }
    return out;
}

inline Expected<ExpansionEmbedding> expand_embed_3graph(const ThreeGraph& g, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed) {
    const std::size_t N = g.n();
    if (H.n() + H.edge_count() > N) throw Error("PreconditionViolated", "v(H) + e(H) exceeds the number of 3-graph vertices");
    Json trace = Json::object();
    // H': H padded by edges between isolated vertices, then restricted to
    // non-isolated vertices; fresh vertices are used once H has none left.
    std::vector<Vertex> isolated;
    for (Vertex x = 0; x < H.n(); ++x)
        if (H.degree(x) == 0) isolated.push_back(x);
    std::vector<Edge> edges = H.edges();
    std::size_t next_fresh = H.n(), iso_used = 0, fresh = 0;
    const double target = static_cast<double>(N) / 4.0 - 1.0;
    while (static_cast<double>(edges.size()) <= target) {
        Vertex a, b;
        if (iso_used + 2 <= isolated.size()) {
            a = isolated[iso_used++];
            b = isolated[iso_used++];
        } else {
            a = static_cast<Vertex>(next_fresh++);
            b = static_cast<Vertex>(next_fresh++);
            fresh += 2;
        }
        edges.push_back({a, b});
    }
    std::vector<std::int64_t> local(next_fresh, -1);
    std::vector<Vertex> back;
    for (const Edge& e : edges)
        for (Vertex x : {e.u, e.v})
            if (local[x] < 0) { local[x] = static_cast<std::int64_t>(back.size()); back.push_back(x); }
    PatternGraph Hp(back.size());
    for (const Edge& e : edges) Hp.add_edge(static_cast<Vertex>(local[e.u]), static_cast<Vertex>(local[e.v]));
    trace["padding_edges"] = edges.size() - H.edge_count();
    trace["fresh_vertices"] = fresh;
    trace["H_prime"] = Json{{"vertices", Hp.n()}, {"edges", Hp.edge_count()}};
    if (Hp.n() + Hp.edge_count() > N) return make_failure("expand_embed_3graph/padding", "PaddingImpossible", seed, trace);

    // random disjoint vertex and colour sides
    Rng rng(derive_seed(seed, "sides"));
    std::vector<Vertex> all(N);
    std::iota(all.begin(), all.end(), 0);
    rng.shuffle(all);
    Bitset vs(N), cs(N);
    for (std::size_t i = 0; i < Hp.n(); ++i) vs.set(all[i]);
    for (std::size_t i = 0; i < Hp.edge_count(); ++i) cs.set(all[Hp.n() + i]);
    auto view = from_three_graph_view(g, vs, cs, true);
    auto q = quasi_embed(view.collection, Hp, plan, derive_seed(seed, "quasi"));
    if (!q) {
        Failure f = q.error();
        f.stage = "expand_embed_3graph/" + f.stage;
        f.diagnostics["expansion_trace"] = trace;
        return f;
    }
    ExpansionEmbedding out;
    std::set<Vertex> used;
    out.vertex_image.assign(H.n(), 0);
    std::vector<char> placed(H.n(), 0);
    for (std::size_t i = 0; i < Hp.n(); ++i)
        if (back[i] < H.n()) {
            out.vertex_image[back[i]] = view.vertex_of[q->emb.tau[i]];
            placed[back[i]] = 1;
            used.insert(out.vertex_image[back[i]]);
        }
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const Edge& ed = H.edge(e);
        const std::size_t k = *Hp.edge_index(static_cast<Vertex>(local[ed.u]), static_cast<Vertex>(local[ed.v]));
        out.edge_image.push_back(view.colour_of[q->emb.sigma[k]]);
        used.insert(out.edge_image.back());
    }
    // isolated vertices of H left out of the padding go to unused vertices
    std::size_t cursor = 0;
    for (Vertex x = 0; x < H.n(); ++x) {
        if (placed[x]) continue;
        while (used.count(all[cursor])) ++cursor;
        out.vertex_image[x] = all[cursor];
        used.insert(all[cursor]);
    }
    trace["quasi"] = q->trace;
    out.trace = trace;
    auto bad = verify_expansion(g, H, out);
    if (!bad.empty()) return make_failure("expand_embed_3graph", "VerificationFailed", seed, Json{{"violations", bad}});
    return out;
}

}  // namespace tvb
