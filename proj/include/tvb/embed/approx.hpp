#pragma once
// Embedding with spare colours: components of H are grouped into chunks
// B^1..B^s plus a final chunk B^0; each chunk is placed by the uncoloured
// blow-up embedder inside the thick graph of a fresh subtemplate and then
// coloured by a maximum matching between its edges and the unused colours.
// The final chunk only uses a reserved colour buffer.

#include "blowup.hpp"

namespace tvb {

struct ApproxOptions {
    std::optional<double> d;       // ledger d by default
    std::optional<double> m;       // ledger m by default
    std::optional<double> lambda;  // thick-graph threshold; plan.lambda3 by default
    bool enforce_chunk_bounds = true;  // false: bound violations are only recorded
};

struct ChunkPlan {
    std::size_t t_star = 0;                          // components placed in chunks 1..s
    std::vector<std::vector<std::size_t>> b;         // b[i][j], i = 0..s
    std::vector<std::vector<std::size_t>> members;   // components per chunk, i = 0..s
    double q = 0;
    std::vector<std::string> violations;             // bound checks that failed
};

inline Json to_json(const ChunkPlan& c) {
    return Json{{"t_star", c.t_star}, {"s", c.b.empty() ? 0 : c.b.size() - 1}, {"b", c.b}, {"q", c.q}, {"violations", c.violations}};
}

namespace detail {

// Component chunking respecting components; bounds are checked and reported.
inline ChunkPlan chunk_components(const std::vector<std::vector<std::size_t>>& a, const std::vector<char>& active, double m, double mu_prime, double gamma, double delta, std::size_t Delta) {
    const std::size_t t = a.size(), r = active.size();
    ChunkPlan cp;
    const double base = static_cast<double>(Delta + 1);
    const double pw1 = std::pow(base, static_cast<double>(r) - 1.0);
    cp.q = 2.0 * pw1 * gamma * m;
    auto ok_all = [&](const std::vector<std::size_t>& b, double floor_v) {
        for (std::size_t j = 0; j < r; ++j)
            if (active[j] && static_cast<double>(b[j]) + 1e-9 < floor_v) return false;
        return true;
    };
    // largest t* with the suffix B_0 at least mu'm in every active cluster
    std::optional<std::size_t> tstar;
    std::vector<std::size_t> suffix(r, 0);
    for (std::size_t tt = t; tt-- > 0;) {
        for (std::size_t j = 0; j < r; ++j) suffix[j] += a[tt][j];
        if (ok_all(suffix, mu_prime * m)) { tstar = tt; break; }
    }
    if (!tstar) { cp.violations.push_back("no t* with b_0j >= mu'm for all j"); return cp; }
    cp.t_star = *tstar;
    std::vector<std::size_t> b0(r, 0), total(r, 0);
    std::vector<std::size_t> m0;
    for (std::size_t h = 0; h < t; ++h)
        for (std::size_t j = 0; j < r; ++j) total[j] += a[h][j];
    for (std::size_t h = cp.t_star; h < t; ++h) {
        m0.push_back(h);
        for (std::size_t j = 0; j < r; ++j) b0[j] += a[h][j];
    }
    cp.b.push_back(b0);
    cp.members.push_back(m0);
    std::vector<std::size_t> consumed(r, 0);
    std::size_t cursor = 0;
    while (cursor < cp.t_star) {
        bool all_big = true;
        for (std::size_t j = 0; j < r; ++j)
            if (active[j] && static_cast<double>(total[j] - consumed[j]) <= cp.q) all_big = false;
        std::vector<std::size_t> bi(r, 0), mem;
        if (all_big) {
            while (cursor < cp.t_star && !(mem.size() && ok_all(bi, gamma * m))) {
                mem.push_back(cursor);
                for (std::size_t j = 0; j < r; ++j) bi[j] += a[cursor][j];
                ++cursor;
            }
        } else {
            while (cursor < cp.t_star) {
                mem.push_back(cursor);
                for (std::size_t j = 0; j < r; ++j) bi[j] += a[cursor][j];
                ++cursor;
            }
        }
        for (std::size_t j = 0; j < r; ++j) consumed[j] += bi[j];
        cp.b.push_back(bi);
        cp.members.push_back(mem);
    }
    const std::size_t s = cp.b.size() - 1;
    const double hi0 = 2.0 * pw1 * mu_prime * m, hii = pw1 * cp.q;
    for (std::size_t j = 0; j < r; ++j) {
        if (!active[j]) continue;
        const double v0 = static_cast<double>(cp.b[0][j]);
        if (v0 + 1e-9 < mu_prime * m || v0 > hi0 + 1e-9) cp.violations.push_back("b_0" + std::to_string(j) + " = " + std::to_string(cp.b[0][j]) + " outside [mu'm, 2(D+1)^(r-1) mu'm]");
        for (std::size_t i = 1; i <= s; ++i) {
            const double v = static_cast<double>(cp.b[i][j]);
            if (v + 1e-9 < gamma * m || v > hii + 1e-9) cp.violations.push_back("b_" + std::to_string(i) + std::to_string(j) + " = " + std::to_string(cp.b[i][j]) + " outside [gamma m, 2(D+1)^(2r-2) gamma m]");
        }
    }
    if (delta > 0 && static_cast<double>(s) > 1.0 / (delta * gamma) + 1e-9) cp.violations.push_back("s = " + std::to_string(s) + " exceeds 1/(delta gamma)");
    return cp;
}

// Injective colour assignment: maximum matching between pattern edges and
// colours present on their host pair. Returns nullopt unless perfect.
inline std::optional<std::vector<Colour>> assign_colours(const GraphCollection& gc, const std::vector<Edge>& host_pairs, const std::vector<std::vector<Colour>>& allowed) {
    std::vector<Colour> all;
    for (const auto& A : allowed) all.insert(all.end(), A.begin(), A.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<std::vector<std::size_t>> adj(host_pairs.size());
    for (std::size_t k = 0; k < host_pairs.size(); ++k)
        for (Colour c : allowed[k])
            if (gc.has_edge(c, host_pairs[k].u, host_pairs[k].v))
                adj[k].push_back(static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), c) - all.begin()));
    auto mm = hopcroft_karp(host_pairs.size(), all.size(), adj);
    if (!mm.perfect_on_left()) return std::nullopt;
    std::vector<Colour> out;
    for (std::size_t k = 0; k < host_pairs.size(); ++k) out.push_back(all[static_cast<std::size_t>(mm.left_to_right[k])]);
    return out;
}

}  // namespace detail

inline EmbedOutcome approx_embed(const Template& t, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed, const ApproxOptions& opt = {}) {
    const std::size_t n = t.gc.n(), r = t.r();
    const auto redge = detail::r_edge_of(H, t.R);
    if (!t.rainbow) throw Error("PreconditionViolated", "approx_embed needs a rainbow template");
    const auto pre = detail::preimages(H, r);
    for (std::size_t j = 0; j < r; ++j)
        if (pre[j].size() > t.V(j).size()) throw Error("PreconditionViolated", "cluster " + std::to_string(j) + " smaller than its preimage");
    std::vector<std::size_t> e_count(t.R.edge_count(), 0);
    for (std::size_t e = 0; e < H.edge_count(); ++e) ++e_count[redge[e]];
    Json surplus = Json::array();
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        if (e_count[e] > t.C(e).size()) throw Error("PreconditionViolated", "R-edge " + std::to_string(e) + " has more pattern edges than colours");
        surplus.push_back(t.C(e).size() - e_count[e]);
    }
    const double m = opt.m.value_or(to_double(t.ledger.m));
    const double d = opt.d.value_or(to_double(t.ledger.d));
    const double lambda = opt.lambda.value_or(plan.lambda3);
    const double eps = to_double(t.ledger.epsilon);
    Json trace{{"surplus", surplus}, {"d", d}, {"m", m}};
    if (H.n() == 0) return finish_embedding(t.gc, H, TransversalEmbedding{}, trace, "approx_embed", seed);

    // ---- component chunking
    Rng crng(derive_seed(seed, "components"));
    auto comps = components(H);
    crng.shuffle(comps);
    std::vector<std::vector<std::size_t>> a(comps.size(), std::vector<std::size_t>(r, 0));
    for (std::size_t h = 0; h < comps.size(); ++h)
        for (Vertex x : comps[h]) ++a[h][(*H.phi())[x]];
    std::vector<char> active(r, 0);
    for (std::size_t j = 0; j < r; ++j) active[j] = !pre[j].empty();
    const ChunkPlan cp = detail::chunk_components(a, active, m, plan.mu_prime, plan.gamma, to_double(t.ledger.delta), H.max_degree());
    trace["chunks"] = to_json(cp);
    if (cp.b.empty() || (opt.enforce_chunk_bounds && !cp.violations.empty())) return make_failure("approx_embed/chunking", "ChunkingFailed", seed, trace);
    const std::size_t s = cp.b.size() - 1;

    // ---- slack per cluster
    std::vector<std::size_t> extra(r), slack(r, 0);
    for (std::size_t j = 0; j < r; ++j) {
        extra[j] = t.V(j).size() - pre[j].size();
        if (s == 0) continue;
        const auto nominal = static_cast<std::size_t>(std::ceil(static_cast<double>(r) * std::cbrt(eps) * m - 1e-9));
        slack[j] = std::min(nominal, (cp.b[0][j] / 2 + extra[j]) / s);
    }
    trace["slack"] = slack;

    // ---- colour-multiplicity data for the concentration checks
    struct PairData {
        std::size_t e;
        std::size_t from, to;                       // cluster indices
        std::vector<std::vector<Vertex>> M;         // per position in V(from): high-multiplicity partners
        std::vector<std::vector<Bitset>> colours;   // per position, per partner: c(xy) within C_e
    };
    std::vector<PairData> pairs;
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        const Bitset Ce = vector_to_bits(t.gc.colours(), t.C(e));
        for (int dir = 0; dir < 2; ++dir) {
            PairData pd{e, dir ? re.v : re.u, dir ? re.u : re.v, {}, {}};
            for (Vertex x : t.V(pd.from)) {
                std::vector<Vertex> Mx;
                std::vector<Bitset> cx;
                for (Vertex y : t.V(pd.to)) {
                    Bitset c = t.gc.colours_of_pair(x, y) & Ce;
                    if (static_cast<double>(c.count()) + 1e-9 >= d * static_cast<double>(t.C(e).size()) / 2.0) {
                        Mx.push_back(y);
                        cx.push_back(std::move(c));
                    }
                }
                pd.M.push_back(std::move(Mx));
                pd.colours.push_back(std::move(cx));
            }
            pairs.push_back(std::move(pd));
        }
    }

    // ---- random vertex partition and colour buffer, checked and retried
    std::vector<std::vector<std::vector<Vertex>>> part;  // part[i][j] = V^i_j
    std::vector<std::vector<Colour>> C0(t.R.edge_count()), Ctilde(t.R.edge_count());
    std::vector<std::size_t> e0(t.R.edge_count(), 0);
    std::vector<std::int64_t> chunk_of(H.n(), -1);
    for (std::size_t i = 0; i <= s; ++i)
        for (std::size_t h : cp.members[i])
            for (Vertex x : comps[h]) chunk_of[x] = static_cast<std::int64_t>(i);
    for (std::size_t e = 0; e < H.edge_count(); ++e)
        if (chunk_of[H.edge(e).u] == 0) ++e0[redge[e]];
    std::size_t attempt = 0;
    std::string last_check;
    for (;; ++attempt) {
        if (attempt == plan.retries) {
            trace["last_check"] = last_check;
            return make_failure("approx_embed/partition", "ChernoffRetryExhausted", seed, trace);
        }
        Rng rng(derive_seed(seed, "partition", attempt));
        part.assign(s + 1, std::vector<std::vector<Vertex>>(r));
        for (std::size_t j = 0; j < r; ++j) {
            auto V = t.V(j);
            rng.shuffle(V);
            std::size_t pos = 0;
            for (std::size_t i = 1; i <= s; ++i) {
                const std::size_t sz = cp.b[i][j] + slack[j];
                part[i][j].assign(V.begin() + static_cast<std::ptrdiff_t>(pos), V.begin() + static_cast<std::ptrdiff_t>(pos + sz));
                pos += sz;
            }
            part[0][j].assign(V.begin() + static_cast<std::ptrdiff_t>(pos), V.end());
            for (auto& P : part) std::sort(P[j].begin(), P[j].end());
        }
        for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
            const std::size_t ce = t.C(e).size();
            // the buffer also takes half of any spare colours, so the final
            // colour matching is not forced to be perfect on a tight set
            std::size_t want = std::max<std::size_t>(static_cast<std::size_t>(std::ceil(plan.zeta * static_cast<double>(ce) - 1e-9)), e0[e] + (ce - std::min(ce, e_count[e])) / 2);
            want = std::min(want, ce - (e_count[e] - e0[e]));
            auto c0 = rng.sample(t.C(e), want);
            std::sort(c0.begin(), c0.end());
            C0[e] = c0;
            Ctilde[e] = detail::sorted_difference(t.C(e), c0);
        }
        bool good = true;
        // (C1) and (C2)
        for (const auto& pd : pairs) {
            const Bitset c0b = vector_to_bits(t.gc.colours(), C0[pd.e]);
            const Bitset v0b = vector_to_bits(n, part[0][pd.to]);
            const auto need1 = static_cast<std::size_t>(std::floor(d * static_cast<double>(C0[pd.e].size()) / 4.0 + 1e-9));
            const auto need2 = static_cast<std::size_t>(std::floor(d * static_cast<double>(part[0][pd.to].size()) / 4.0 + 1e-9));
            for (std::size_t k = 0; k < pd.M.size() && good; ++k) {
                std::size_t in0 = 0;
                for (std::size_t q = 0; q < pd.M[k].size(); ++q) {
                    if ((pd.colours[k][q] & c0b).count() < need1) { good = false; last_check = "C1"; break; }
                    in0 += v0b.test(pd.M[k][q]);
                }
                if (good && in0 < need2) { good = false; last_check = "C2"; }
            }
            if (!good) break;
        }
        // (C3): target sets keep half their expected share of their part
        for (const auto& [x, T] : H.targets()) {
            if (!good) break;
            const std::size_t i = static_cast<std::size_t>(chunk_of[x]);
            const std::size_t j = (*H.phi())[x];
            const auto inV = detail::sorted_intersection(T, t.V(j));
            const double expected = static_cast<double>(inV.size()) * static_cast<double>(part[i][j].size()) / static_cast<double>(t.V(j).size());
            const auto inPart = detail::sorted_intersection(inV, part[i][j]);
            if (!detail::half_expectation_ok(static_cast<double>(inPart.size()), expected)) { good = false; last_check = "C3"; }
        }
        if (good) break;
    }
    trace["partition_attempts"] = attempt + 1;

    // ---- rounds
    std::vector<std::int64_t> tau(H.n(), -1), sigma(H.edge_count(), -1);
    std::set<Colour> used;
    std::vector<std::vector<Vertex>> Z(r);  // leftover vertices for the final round
    for (std::size_t j = 0; j < r; ++j) Z[j] = part[0][j];
    Json rounds = Json::array();
    auto run_round = [&](std::size_t i, const std::vector<std::vector<Vertex>>& hosts, const std::vector<std::vector<Colour>>& cols) -> std::optional<Failure> {
        std::vector<Vertex> keep;
        for (std::size_t h : cp.members[i])
            for (Vertex x : comps[h]) keep.push_back(x);
        std::sort(keep.begin(), keep.end());
        auto [B, back] = sub_pattern(H, keep);
        Template sub = t;
        sub.clusters = hosts;
        sub.colour_clusters = cols;
        const ThickGraph T = thick_graph(sub, lambda);
        // the colour matching can fail for an unlucky vertex embedding; the
        // round is re-embedded with a fresh seed before giving up
        std::optional<BlowupResult> res;
        std::optional<std::vector<Colour>> colours;
        std::vector<std::size_t> which;
        std::size_t round_attempts = 0;
        for (; round_attempts < plan.retries && !colours; ++round_attempts) {
            auto got = blowup_embed(T.graph, hosts, t.R, B, plan, derive_seed(derive_seed(seed, "round", i), round_attempts));
            if (!got) {
                Failure f = got.error();
                f.stage = "approx_embed/round" + std::to_string(i) + "/" + f.stage;
                return f;
            }
            res = std::move(*got);
            std::vector<Edge> host_pairs;
            std::vector<std::vector<Colour>> allowed;
            which.clear();
            for (const Edge& ed : B.edges()) {
                const std::size_t he = *H.edge_index(back[ed.u], back[ed.v]);
                which.push_back(he);
                host_pairs.push_back(Edge{res->tau[ed.u], res->tau[ed.v]});
                std::vector<Colour> av;
                for (Colour c : cols[redge[he]])
                    if (!used.count(c)) av.push_back(c);
                allowed.push_back(std::move(av));
            }
            colours = detail::assign_colours(t.gc, host_pairs, allowed);
        }
        if (!colours) return make_failure("approx_embed/round" + std::to_string(i), "ColourExhausted", seed, Json{{"edges", B.edge_count()}, {"round_attempts", round_attempts}});
        for (std::size_t k = 0; k < which.size(); ++k) {
            sigma[which[k]] = (*colours)[k];
            used.insert((*colours)[k]);
        }
        for (std::size_t x = 0; x < B.n(); ++x) tau[back[x]] = res->tau[x];
        rounds.push_back(Json{{"round", i}, {"vertices", B.n()}, {"edges", B.edge_count()}, {"thick_edges", T.graph.edge_count()}, {"round_attempts", round_attempts}, {"blowup", res->trace}});
        return std::nullopt;
    };
    std::size_t bad_kept = 0;
    for (std::size_t i = 1; i <= s; ++i) {
        std::vector<std::vector<Colour>> Ci(t.R.edge_count());
        for (std::size_t e = 0; e < t.R.edge_count(); ++e)
            for (Colour c : Ctilde[e])
                if (!used.count(c)) Ci[e].push_back(c);
        // Y^i_j: drop the vertices with the lowest normalised colour degree
        std::vector<std::vector<Vertex>> Y(r);
        for (std::size_t j = 0; j < r; ++j) {
            std::vector<std::pair<double, Vertex>> scored;
            for (Vertex v : part[i][j]) {
                double score = std::numeric_limits<double>::infinity();
                for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
                    const Edge& re = t.R.edge(e);
                    if (re.u != j && re.v != j) continue;
                    const std::size_t other = re.u == j ? re.v : re.u;
                    const Bitset ob = vector_to_bits(n, part[i][other]);
                    const double denom = static_cast<double>(part[i][other].size() * Ci[e].size());
                    const double sum = static_cast<double>(colour_degree(t.gc, v, ob, Ci[e]));
                    score = std::min(score, denom > 0 ? sum / denom : 1.0);
                }
                scored.push_back({score, v});
            }
            std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
            for (std::size_t k = 0; k < scored.size(); ++k) {
                if (k < cp.b[i][j]) {
                    Y[j].push_back(scored[k].second);
                    bad_kept += scored[k].first < 2.0 * d / 3.0;
                } else {
                    Z[j].push_back(scored[k].second);
                }
            }
            std::sort(Y[j].begin(), Y[j].end());
        }
        if (auto f = run_round(i, Y, Ci)) { f->diagnostics["trace"] = trace; return *f; }
    }
    for (auto& z : Z) std::sort(z.begin(), z.end());
    // the final round may also draw on colours the chunk rounds left unused
    std::vector<std::vector<Colour>> Cfinal(t.R.edge_count());
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        Cfinal[e] = C0[e];
        for (Colour c : Ctilde[e])
            if (!used.count(c)) Cfinal[e].push_back(c);
        std::sort(Cfinal[e].begin(), Cfinal[e].end());
    }
    if (auto f = run_round(0, Z, Cfinal)) { f->diagnostics["trace"] = trace; return *f; }
    trace["rounds"] = rounds;
    trace["bad_vertices_kept"] = bad_kept;
    Json unused = Json::array();
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        std::size_t u = 0;
        for (Colour c : t.C(e)) u += !used.count(c);
        unused.push_back(u);
    }
    trace["unused_colours"] = unused;
    TransversalEmbedding emb;
    for (auto v : tau) emb.tau.push_back(static_cast<Vertex>(v));
    for (auto c : sigma) emb.sigma.push_back(static_cast<Colour>(c));
    return finish_embedding(t.gc, H, std::move(emb), trace, "approx_embed", seed);
}

}  // namespace tvb
