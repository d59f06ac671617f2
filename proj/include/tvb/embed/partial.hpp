#pragma once
// Partial embedding with target and candidate sets: embeds X, colours every
// edge (all edges touch X), and leaves candidate sets C_y for the vertices of
// Y. Candidate-set maintenance follows steps (x,1)-(x,4) literally.

#include "params.hpp"

namespace tvb {

struct PartialEmbedding {
    std::vector<std::int64_t> tau;    // per pattern vertex, -1 for Y
    std::vector<std::int64_t> sigma;  // per pattern edge
    std::map<Vertex, std::vector<Vertex>> candidates;  // C_y for y in Y
    Json trace = Json::object();
};

inline Json to_json(const PartialEmbedding& p) {
    Json c = Json::object();
    for (const auto& [y, C] : p.candidates) c[std::to_string(y)] = C;
    return Json{{"tau", p.tau}, {"sigma", p.sigma}, {"candidates", c}, {"trace", p.trace}};
}

struct PartialOptions {
    std::optional<double> d;        // defaults to the template ledger d
    std::optional<double> epsilon;  // defaults to the template ledger epsilon
    std::optional<double> m;        // scale for the nu'm floor; ledger m by default
};

namespace detail {

// Initial target set T_w intersected with the template cluster V_phi(w).
inline Bitset initial_target(const Template& t, const PatternGraph& H, Vertex w) {
    const std::size_t n = t.gc.n();
    Bitset cluster = vector_to_bits(n, t.V((*H.phi())[w]));
    auto it = H.targets().find(w);
    if (it == H.targets().end()) return cluster;
    Bitset T(n);
    for (Vertex v : it->second)
        if (v < n) T.set(v);
    return T & cluster;
}

}  // namespace detail

inline Expected<PartialEmbedding> partial_embed(const Template& t, const PatternGraph& H, const std::vector<Vertex>& X, const std::vector<Vertex>& Y, const SplitPlan& plan, std::uint64_t seed, const PartialOptions& opt = {}) {
    const auto redge = detail::r_edge_of(H, t.R);
    // ordering: X first (given order), then Y
    std::vector<std::int64_t> pos(H.n(), -1);
    std::size_t p = 0;
    for (Vertex x : X) {
        if (x >= H.n() || pos[x] >= 0) throw Error("PreconditionViolated", "X must list distinct pattern vertices");
        pos[x] = static_cast<std::int64_t>(p++);
    }
    std::vector<char> in_y(H.n(), 0);
    for (Vertex y : Y) {
        if (y >= H.n() || pos[y] >= 0) throw Error("PreconditionViolated", "X and Y must partition V(H)");
        pos[y] = static_cast<std::int64_t>(p++);
        in_y[y] = 1;
    }
    if (p != H.n()) throw Error("PreconditionViolated", "X and Y must partition V(H)");
    for (const Edge& e : H.edges())
        if (in_y[e.u] && in_y[e.v]) throw Error("PreconditionViolated", "E(H[Y]) must be empty");

    const double d = opt.d.value_or(to_double(t.ledger.d));
    const double eps = opt.epsilon.value_or(to_double(t.ledger.epsilon));
    const double m = opt.m.value_or(to_double(t.ledger.m));

    Json diag = Json::object();
    {
        // quantitative hypotheses are diagnostics only
        auto pre = detail::preimages(H, t.r());
        std::size_t worst = 0;
        for (const auto& P : pre) worst = std::max(worst, P.size());
        diag["max_preimage"] = worst;
        diag["gamma_m"] = plan.gamma * m;
        diag["preimage_hypothesis_holds"] = static_cast<double>(worst) <= plan.gamma * m + 1e-9;
    }

    std::vector<Bitset> C(H.n());
    for (Vertex w = 0; w < H.n(); ++w) C[w] = detail::initial_target(t, H, w);
    std::vector<std::vector<Colour>> Cxy(H.edge_count());
    for (std::size_t e = 0; e < H.edge_count(); ++e) Cxy[e] = t.C(redge[e]);

    PartialEmbedding out;
    out.tau.assign(H.n(), -1);
    out.sigma.assign(H.edge_count(), -1);
    Rng rng(seed);
    auto fail = [&](const std::string& element, const std::string& step) {
        Json dg = diag;
        dg["element"] = element;
        dg["step"] = step;
        return make_failure("partial_embed", "CandidateExhausted", seed, dg);
    };
    auto later_nbrs = [&](Vertex x) {
        std::vector<std::pair<Vertex, std::size_t>> out_n;
        for (const auto& inc : H.incident(x))
            if (pos[inc.nbr] > pos[x]) out_n.emplace_back(inc.nbr, inc.edge);
        std::sort(out_n.begin(), out_n.end(), [&](const auto& a, const auto& b) { return pos[a.first] < pos[b.first]; });
        return out_n;
    };
    auto overlap_sum = [&](Vertex v, std::size_t e, const Bitset& Cy) {
        std::size_t s = 0;
        for (Colour c : Cxy[e]) s += (t.gc.nbrs(c, v) & Cy).count();
        return s;
    };

    for (Vertex x : X) {
        const auto nb = later_nbrs(x);
        // (x,1): prune C_x by the colour-sum test
        for (const auto& [y, e] : nb) {
            const double need = (d - eps) * static_cast<double>(Cxy[e].size()) * static_cast<double>(C[y].count());
            if (need <= 0) continue;
            Bitset keep = C[x];
            for_each_bit(C[x], [&](Vertex v) {
                if (static_cast<double>(overlap_sum(v, e, C[y])) < need - 1e-9) keep.reset(v);
            });
            C[x] = keep;
        }
        if (C[x].none()) return fail("vertex " + std::to_string(x), "(x,1)");
        // (x,2): choose tau(x); prefer the candidate keeping the best normalised colour sums
        std::vector<Vertex> cand = bits_to_vector(C[x]);
        rng.shuffle(cand);
        Vertex best = cand.front();
        double best_score = -1;
        for (Vertex v : cand) {
            double score = 1.0;
            for (const auto& [y, e] : nb) {
                double denom = static_cast<double>(Cxy[e].size()) * static_cast<double>(C[y].count());
                double s = denom > 0 ? static_cast<double>(overlap_sum(v, e, C[y])) / denom : 0.0;
                score = std::min(score, s);
            }
            if (score > best_score + 1e-12) { best_score = score; best = v; }
        }
        out.tau[x] = best;
        // (x,3): remove tau(x) from every candidate set
        for (auto& Cu : C) Cu.reset(best);
        // (x,4): colour each forward edge
        for (const auto& [y, e] : nb) {
            const Bitset& Nx_any = C[y];
            const double need = d * static_cast<double>(Nx_any.count()) / 2.0;
            std::vector<Colour> kept;
            for (Colour c : Cxy[e])
                if (static_cast<double>((t.gc.nbrs(c, best) & C[y]).count()) >= need - 1e-9) kept.push_back(c);
            Cxy[e] = kept;  // (x,y,4.1)
            if (Cxy[e].empty()) return fail("edge " + std::to_string(x) + "-" + std::to_string(y), "(x,y,4.1)");
            std::vector<Colour> order = Cxy[e];
            rng.shuffle(order);
            Colour sc = order.front();
            std::size_t best_ov = 0;
            bool first = true;
            for (Colour c : order) {
                std::size_t ov = (t.gc.nbrs(c, best) & C[y]).count();
                if (first || ov > best_ov) { best_ov = ov; sc = c; first = false; }
            }
            out.sigma[e] = sc;  // (x,y,4.2)
            for (auto& L : Cxy) {  // (x,y,4.3)
                auto it = std::find(L.begin(), L.end(), sc);
                if (it != L.end()) L.erase(it);
            }
            C[y] &= t.gc.nbrs(sc, best);  // (x,y,4.4)
        }
    }
    for (Vertex y : Y) {
        if (static_cast<double>(C[y].count()) < plan.nu_prime * m - 1e-9 || C[y].none())
            return fail("vertex " + std::to_string(y), "candidate set below nu'm");
        out.candidates[y] = bits_to_vector(C[y]);
    }
    out.trace = diag;
    out.trace["embedded"] = X.size();
    out.trace["candidate_vertices"] = Y.size();
    return out;
}

// Literal re-check of properties (i)-(iii); returns every violation.
inline std::vector<std::string> check_partial_embedding(const Template& t, const PatternGraph& H, const std::vector<Vertex>& X, const std::vector<Vertex>& Y, const PartialEmbedding& pe, double nu_prime_m) {
    std::vector<std::string> bad;
    const auto redge = detail::r_edge_of(H, t.R);
    std::set<std::int64_t> used_v, used_c;
    std::vector<char> in_x(H.n(), 0);
    for (Vertex x : X) {
        in_x[x] = 1;
        const std::int64_t v = pe.tau.at(x);
        if (v < 0) { bad.push_back("tau undefined on " + std::to_string(x)); continue; }
        if (!used_v.insert(v).second) bad.push_back("tau not injective at " + std::to_string(x));
        if (!detail::initial_target(t, H, x).test(static_cast<std::size_t>(v))) bad.push_back("tau(" + std::to_string(x) + ") outside T_x");
    }
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const std::int64_t c = pe.sigma.at(e);
        if (c < 0) { bad.push_back("sigma undefined on edge " + std::to_string(e)); continue; }
        if (!used_c.insert(c).second) bad.push_back("sigma not injective at edge " + std::to_string(e));
        const auto& Ce = t.C(redge[e]);
        if (!std::binary_search(Ce.begin(), Ce.end(), static_cast<Colour>(c))) bad.push_back("sigma(edge " + std::to_string(e) + ") outside its colour cluster");
        const Edge& ed = H.edge(e);
        if (in_x[ed.u] && in_x[ed.v] && pe.tau[ed.u] >= 0 && pe.tau[ed.v] >= 0 && !t.gc.has_edge(static_cast<Colour>(c), static_cast<Vertex>(pe.tau[ed.u]), static_cast<Vertex>(pe.tau[ed.v])))
            bad.push_back("edge " + std::to_string(e) + " not in its colour graph");
    }
    for (Vertex y : Y) {
        auto it = pe.candidates.find(y);
        if (it == pe.candidates.end()) { bad.push_back("no candidate set for " + std::to_string(y)); continue; }
        const auto& Cy = it->second;
        if (static_cast<double>(Cy.size()) < nu_prime_m - 1e-9) bad.push_back("candidate set of " + std::to_string(y) + " below nu'm");
        const Bitset T = detail::initial_target(t, H, y);
        for (Vertex v : Cy) {
            if (!T.test(v)) bad.push_back("C_" + std::to_string(y) + " leaves T_y");
            if (used_v.count(v)) bad.push_back("C_" + std::to_string(y) + " meets tau(X)");
            for (const auto& inc : H.incident(y)) {
                if (!in_x[inc.nbr] || pe.sigma[inc.edge] < 0 || pe.tau[inc.nbr] < 0) continue;
                if (!t.gc.has_edge(static_cast<Colour>(pe.sigma[inc.edge]), static_cast<Vertex>(pe.tau[inc.nbr]), v))
                    bad.push_back("C_" + std::to_string(y) + " vertex " + std::to_string(v) + " not adjacent in colour " + std::to_string(pe.sigma[inc.edge]));
            }
        }
    }
    return bad;
}

// A partial embedding with Y empty is a full transversal embedding.
inline TransversalEmbedding to_embedding(const PartialEmbedding& pe) {
    TransversalEmbedding emb;
    for (auto v : pe.tau) emb.tau.push_back(static_cast<Vertex>(v < 0 ? 0 : v));
    for (auto c : pe.sigma) emb.sigma.push_back(static_cast<Colour>(c < 0 ? 0 : c));
    return emb;
}

// Full embedding of H via the partial-embedding procedure with Y empty.
inline EmbedOutcome embed_by_partial(const Template& t, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed, const PartialOptions& opt = {}) {
    std::vector<Vertex> X(H.n());
    std::iota(X.begin(), X.end(), 0);
    auto pe = partial_embed(t, H, X, {}, plan, seed, opt);
    if (!pe) return pe.error();
    return finish_embedding(t.gc, H, to_embedding(*pe), pe->trace, "partial_embed", seed);
}

}  // namespace tvb
