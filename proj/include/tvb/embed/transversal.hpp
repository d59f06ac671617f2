#pragma once
// Transversal blow-up pipeline for a rainbow super template whose colour
// clusters have exactly as many colours as H has edges over each R-edge.
//   Step 0  embed the separator X (and colour every edge touching it) by the
//           partial embedder; candidate sets become target sets;
//   Step 1  embed H_abs into the thick graph and build the colour absorber;
//   Step 2  H_app by the spare-colour embedder on colours outside A and B;
//   Step 3  H_col with the leftover app colours prescribed, plus colours of B;
//   Step 4  H_vx by the spare-colour embedder on the rest of B;
//   Step 5  colour H_abs with A and the exactly-l leftover colours of B.
// Every random choice is followed by the corresponding check and retried.

#include "absorber.hpp"
#include "approx.hpp"
#include "partial.hpp"
#include "prescribed.hpp"

namespace tvb {

namespace detail {

// Subtemplate with the given clusters and colours; the ledger follows `rule`.
// Size hypotheses of the slicing rule are recorded rather than enforced.
inline Template derive_template(const Template& t, std::vector<std::vector<Vertex>> clusters, std::vector<std::vector<Colour>> colours, const SliceRule& rule, const std::string& label, Json& notes) {
    Template out = t;
    for (auto& V : clusters) std::sort(V.begin(), V.end());
    for (auto& C : colours) std::sort(C.begin(), C.end());
    const double alpha = to_double(rule.alpha), k = static_cast<double>(rule.k), m = to_double(t.ledger.m);
    Json bad = Json::array();
    for (std::size_t i = 0; i < t.r(); ++i) {
        const double a = static_cast<double>(t.V(i).size()), b = static_cast<double>(clusters[i].size());
        if (rule.kind == SliceRuleKind::template_ii) {
            if (a - b > alpha * m + 1e-9) bad.push_back("|V_" + std::to_string(i) + " \\ V_" + std::to_string(i) + "'| > alpha m");
        } else if (b < alpha * a - 1e-9 || b > k * alpha * a + 1e-9) {
            bad.push_back("|V_" + std::to_string(i) + "'| outside [alpha|V_i|, k alpha|V_i|]");
        }
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const double a = static_cast<double>(t.C(e).size()), b = static_cast<double>(colours[e].size());
        if (rule.kind == SliceRuleKind::template_ii) {
            if (a - b > alpha * m + 1e-9) bad.push_back("|C_e \\ C_e'| > alpha m for R-edge " + std::to_string(e));
        } else if (b < alpha * a / k - 1e-9) {
            bad.push_back("|C_e'| < alpha|C_e|/k for R-edge " + std::to_string(e));
        }
    }
    out.clusters = std::move(clusters);
    out.colour_clusters = std::move(colours);
    out.ledger = ledger_slice(t.ledger, rule);
    out.stamp = Stamp::unchecked;
    notes[label] = Json{{"ledger", ledger_json(out.ledger)}, {"hypotheses_not_met", bad}};
    return out;
}

struct Extracted {
    PatternGraph H{0};
    std::vector<Vertex> back;          // local vertex -> H vertex
    std::vector<std::size_t> edge_back;  // local edge -> H edge
};

// Induced sub-pattern on `verts` with target sets taken from `targets`.
inline Extracted extract(const PatternGraph& H, const std::vector<Vertex>& verts, const std::map<Vertex, std::vector<Vertex>>& targets) {
    auto [S, back] = sub_pattern(H, verts);
    S.clear_targets();
    for (std::size_t i = 0; i < back.size(); ++i) {
        auto it = targets.find(back[i]);
        if (it != targets.end()) S.set_target(static_cast<Vertex>(i), it->second);
    }
    Extracted ex{std::move(S), std::move(back), {}};
    for (const Edge& e : ex.H.edges()) ex.edge_back.push_back(*H.edge_index(ex.back[e.u], ex.back[e.v]));
    return ex;
}

inline Failure tag_failure(Failure f, const std::string& step, const Json& trace) {
    f.stage = "transversal_blowup/" + step + "/" + f.stage;
    f.diagnostics["pipeline_trace"] = trace;
    return f;
}

// The spare-colour embedder reseeded a few times: its vertex partition is a
// fresh random draw on every call.
inline Expected<EmbedResult> approx_with_retries(const Template& F, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed, const ApproxOptions& opt, std::size_t& calls) {
    const std::size_t budget = std::max<std::size_t>(1, plan.retries / 4);
    Expected<EmbedResult> out = make_failure("", "", seed);
    for (calls = 1;; ++calls) {
        out = approx_embed(F, H, plan, derive_seed(seed, calls), opt);
        if (out || calls == budget) return out;
    }
}

inline std::size_t min_cluster(const Template& t) {
    std::size_t m = SIZE_MAX;
    for (const auto& V : t.clusters) m = std::min(m, V.size());
    return m == SIZE_MAX ? 0 : m;
}

}  // namespace detail

inline EmbedOutcome transversal_blowup(const Template& t, const PatternGraph& H, const SplitPlan& plan, std::uint64_t seed) {
    plan.validate();
    const std::size_t n = t.gc.n(), r = t.r(), E = t.R.edge_count();
    const auto redge = detail::r_edge_of(H, t.R);
    if (!t.rainbow) throw Error("PreconditionViolated", "transversal_blowup needs a rainbow template");
    if (t.klass() != RegularityMode::super) throw Error("PreconditionViolated", "transversal_blowup needs a super template");
    const auto& phi = *H.phi();
    const auto pre = detail::preimages(H, r);
    for (std::size_t i = 0; i < r; ++i)
        if (pre[i].size() != t.V(i).size()) throw Error("PreconditionViolated", "|phi^-1(" + std::to_string(i) + ")| must equal |V_" + std::to_string(i) + "|");
    std::vector<std::size_t> hcount(E, 0);
    for (std::size_t e = 0; e < H.edge_count(); ++e) ++hcount[redge[e]];
    for (std::size_t e = 0; e < E; ++e)
        if (hcount[e] != t.C(e).size()) throw Error("PreconditionViolated", "R-edge " + std::to_string(e) + ": pattern edges must equal colours");
    const double m = to_double(t.ledger.m), d = to_double(t.ledger.d);
    Json trace = Json::object();
    Json templates = Json::object();
    std::vector<std::int64_t> tau(H.n(), -1), sigma(H.edge_count(), -1);
    std::set<Colour> used_c;

    // ---- separability (mu doubled until a certificate exists)
    double mu = plan.mu;
    std::optional<SeparabilityCertificate> cert;
    while (!(cert = separability_certificate(H, mu))) mu = std::min(1.0, 2 * mu);
    trace["mu_used"] = mu;
    trace["separator"] = cert->separator;
    std::vector<char> inX(H.n(), 0);
    for (Vertex x : cert->separator) inX[x] = 1;

    // ---- Step 0: separator and every edge touching it
    std::map<Vertex, std::vector<Vertex>> T1 = H.targets();
    std::vector<std::vector<Vertex>> V1(r);
    std::vector<std::vector<Colour>> C1(E);
    Template F1 = t;
    if (!cert->separator.empty()) {
        std::vector<Vertex> Xv = cert->separator, Yv;
        std::vector<char> inY(H.n(), 0);
        for (Vertex x : Xv)
            for (const auto& inc : H.incident(x))
                if (!inX[inc.nbr] && !inY[inc.nbr]) { inY[inc.nbr] = 1; Yv.push_back(inc.nbr); }
        std::vector<Vertex> keep = Xv;
        keep.insert(keep.end(), Yv.begin(), Yv.end());
        auto [Hc, back] = sub_pattern(H, keep, [&](std::size_t e) { return inX[H.edge(e).u] || inX[H.edge(e).v]; });
        std::vector<Vertex> Xl(Xv.size()), Yl(Yv.size());
        std::iota(Xl.begin(), Xl.end(), 0);
        std::iota(Yl.begin(), Yl.end(), static_cast<Vertex>(Xv.size()));
        Expected<PartialEmbedding> pe = make_failure("", "", seed);
        try {
            pe = partial_embed(t, Hc, Xl, Yl, plan, derive_seed(seed, "step0"));
        } catch (const Error& err) {
            return detail::tag_failure(make_failure("partial_embed", err.kind(), seed, Json{{"what", err.what()}}), "step0", trace);
        }
        if (!pe) return detail::tag_failure(pe.error(), "step0", trace);
        for (std::size_t i = 0; i < Xv.size(); ++i) tau[Xv[i]] = pe->tau[i];
        for (std::size_t k = 0; k < Hc.edge_count(); ++k) {
            const Edge& ed = Hc.edge(k);
            const std::size_t he = *H.edge_index(back[ed.u], back[ed.v]);
            sigma[he] = pe->sigma[k];
            used_c.insert(static_cast<Colour>(pe->sigma[k]));
        }
        for (const auto& [yl, Cy] : pe->candidates) T1[back[yl]] = Cy;
        trace["step0"] = Json{{"separator", Xv.size()}, {"connectors", Yv.size()}, {"edges", Hc.edge_count()}};
    }
    std::set<Vertex> used_v;
    for (auto v : tau)
        if (v >= 0) used_v.insert(static_cast<Vertex>(v));
    std::int64_t removed = 1;
    for (std::size_t i = 0; i < r; ++i) {
        for (Vertex v : t.V(i))
            if (!used_v.count(v)) V1[i].push_back(v);
        removed = std::max<std::int64_t>(removed, static_cast<std::int64_t>(t.V(i).size() - V1[i].size()));
    }
    for (std::size_t e = 0; e < E; ++e) {
        for (Colour c : t.C(e))
            if (!used_c.count(c)) C1[e].push_back(c);
        removed = std::max<std::int64_t>(removed, static_cast<std::int64_t>(t.C(e).size() - C1[e].size()));
    }
    const Rational mrat = t.ledger.m > Rational(0) ? t.ledger.m : Rational(1);
    F1 = detail::derive_template(t, V1, C1, SliceRule{SliceRuleKind::template_ii, Rational(removed) / mrat, 1, Rational(0)}, "F_prime", templates);

    // ---- component split into abs / app / vx / col
    enum Part { ABS = 0, APP = 1, VX = 2, COL = 3 };
    const std::array<double, 4> p{plan.p_abs, plan.p_app(), plan.p_vx, plan.p_col};
    const std::array<const char*, 4> pname{"abs", "app", "vx", "col"};
    const auto& comps = cert->components;
    std::vector<int> part_of(H.n(), -1);
    std::array<std::vector<std::size_t>, 4> nsz, hsz;
    std::size_t split_attempt = 0;
    std::string last_split;
    for (;; ++split_attempt) {
        if (split_attempt == plan.retries) return detail::tag_failure(make_failure("component_split", "ChernoffRetryExhausted", seed, Json{{"last_check", last_split}}), "step0", trace);
        Rng rng(derive_seed(seed, "split", split_attempt));
        std::fill(part_of.begin(), part_of.end(), -1);
        if (split_attempt < plan.retries / 2) {
            // independent choice per component
            for (const auto& comp : comps) {
                const double u = rng.unit();
                int k = 0;
                double acc = p[0];
                while (k < 3 && u >= acc) acc += p[++k];
                for (Vertex x : comp) part_of[x] = k;
            }
        } else {
            // few large components: random order, each to the part furthest
            // below its expected share
            std::vector<std::size_t> order(comps.size());
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            std::array<double, 4> got{0, 0, 0, 0};
            const double total = static_cast<double>(H.n() - cert->separator.size());
            for (std::size_t c : order) {
                int best = 0;
                double gap = -1e18;
                for (int k = 0; k < 4; ++k) {
                    const double g = (p[k] * total - got[k] - static_cast<double>(comps[c].size()) / 2) / (p[k] * total);
                    if (g > gap) { gap = g; best = k; }
                }
                got[best] += static_cast<double>(comps[c].size());
                for (Vertex x : comps[c]) part_of[x] = best;
            }
        }
        for (int k = 0; k < 4; ++k) { nsz[k].assign(r, 0); hsz[k].assign(E, 0); }
        for (Vertex x = 0; x < H.n(); ++x)
            if (part_of[x] >= 0) ++nsz[part_of[x]][phi[x]];
        for (std::size_t e = 0; e < H.edge_count(); ++e) {
            const Edge& ed = H.edge(e);
            if (!inX[ed.u] && !inX[ed.v]) ++hsz[part_of[ed.u]][redge[e]];
        }
        bool ok = true;
        auto within = [](std::size_t v, double mean) {
            return static_cast<double>(v) + 1e-9 >= std::floor(mean / 2 + 1e-9) && static_cast<double>(v) <= std::ceil(3 * mean / 2 - 1e-9);
        };
        for (int k = 0; k < 4 && ok; ++k) {
            for (std::size_t i = 0; i < r && ok; ++i)
                if (!within(nsz[k][i], p[k] * static_cast<double>(t.V(i).size()))) { ok = false; last_split = std::string("n_") + pname[k]; }
            for (std::size_t e = 0; e < E && ok; ++e)
                if (!within(hsz[k][e], p[k] * static_cast<double>(t.C(e).size()))) { ok = false; last_split = std::string("h_") + pname[k]; }
        }
        if (ok) break;
    }
    auto members = [&](int k) {
        std::vector<Vertex> out;
        for (Vertex x = 0; x < H.n(); ++x)
            if (part_of[x] == k) out.push_back(x);
        return out;
    };
    // counting: l_e, leftover app colours s_e, |B_e|, |A_e|
    std::vector<std::size_t> ell(E), s_left(E), bsize(E);
    {
        // l_e rounded up: a non-empty absorber always carries spare colours.
        // Prescribed colours sit on an induced matching of H_col; each
        // component supplies at most one matching edge, so components are
        // shared out among the R-edges, largest remaining demand first
        // the colour-prescribing step also needs a d/4 share of its colours
        // to stay free, which bounds s_e by (1 - d/4)(h_col + h_vx + l_e)
        std::vector<std::size_t> want(E), cap(E, 0);
        for (std::size_t e = 0; e < E; ++e) {
            ell[e] = static_cast<std::size_t>(std::ceil(plan.lambda1 * static_cast<double>(hsz[ABS][e]) - 1e-9));
            const double pool = static_cast<double>(hsz[COL][e] + hsz[VX][e] + ell[e]);
            const auto free_cap = static_cast<std::size_t>(std::floor((1.0 - d / 4.0) * pool + 1e-9));
            want[e] = std::min({static_cast<std::size_t>(std::ceil(plan.p_abs * static_cast<double>(C1[e].size()) - 1e-9)), hsz[COL][e], free_cap});
        }
        for (const auto& comp : comps) {
            if (part_of[comp.front()] != COL) continue;
            std::set<std::size_t> over;
            for (Vertex x : comp)
                for (const auto& inc : H.incident(x))
                    if (!inX[inc.nbr] && !T1.count(x) && !T1.count(inc.nbr)) over.insert(redge[inc.edge]);
            std::size_t best = E;
            for (auto e : over)
                if (cap[e] < want[e] && (best == E || want[e] - cap[e] > want[best] - cap[best])) best = e;
            if (best != E) ++cap[best];
        }
        for (std::size_t e = 0; e < E; ++e) {
            s_left[e] = cap[e];
            bsize[e] = hsz[COL][e] + hsz[VX][e] + ell[e] - s_left[e];
        }
    }
    Json split = Json::object();
    for (int k = 0; k < 4; ++k) split[pname[k]] = Json{{"n", nsz[k]}, {"h", hsz[k]}};
    trace["split"] = split;
    trace["split_attempts"] = split_attempt + 1;
    trace["ell"] = ell;
    trace["leftover_app_colours"] = s_left;
    trace["B_size"] = bsize;

    // ---- Step 1: absorber vertices
    std::vector<std::vector<Vertex>> Vabs(r), V2(r);
    std::size_t s1 = 0;
    for (;; ++s1) {
        if (s1 == plan.retries) return detail::tag_failure(make_failure("absorber_vertices", "ChernoffRetryExhausted", seed), "step1", trace);
        Rng rng(derive_seed(seed, "step1", s1));
        for (std::size_t i = 0; i < r; ++i) {
            Vabs[i] = rng.sample(V1[i], nsz[ABS][i]);
            std::sort(Vabs[i].begin(), Vabs[i].end());
            V2[i] = detail::sorted_difference(V1[i], Vabs[i]);
        }
        bool ok = true;
        for (const auto& [y, T] : T1) {
            if (inX[y]) continue;
            const std::size_t i = phi[y];
            const auto inV1 = detail::sorted_intersection(T, V1[i]);
            const auto& target = part_of[y] == ABS ? Vabs[i] : V2[i];
            const double expected = static_cast<double>(inV1.size()) * static_cast<double>(target.size()) / std::max<double>(1.0, static_cast<double>(V1[i].size()));
            if (!detail::half_expectation_ok(static_cast<double>(detail::sorted_intersection(inV1, target).size()), expected)) { ok = false; break; }
        }
        if (ok) break;
    }
    const Template Fabs = detail::derive_template(F1, Vabs, C1, SliceRule{SliceRuleKind::template_iii, to_rational(plan.p_abs / 3), 6, Rational(0)}, "F_abs", templates);
    auto Habs = detail::extract(H, members(ABS), T1);
    const ThickGraph thick = thick_graph(Fabs, plan.lambda3);
    auto bres = blowup_embed(thick.graph, Vabs, t.R, Habs.H, plan, derive_seed(seed, "step1-blowup"));
    if (!bres) return detail::tag_failure(bres.error(), "step1", trace);
    for (std::size_t i = 0; i < Habs.back.size(); ++i) tau[Habs.back[i]] = bres->tau[i];
    std::vector<std::vector<Edge>> Z(E);
    std::vector<std::vector<std::size_t>> Zedges(E);
    for (std::size_t k = 0; k < Habs.H.edge_count(); ++k) {
        const std::size_t he = Habs.edge_back[k];
        Z[redge[he]].push_back(Edge{static_cast<Vertex>(tau[H.edge(he).u]), static_cast<Vertex>(tau[H.edge(he).v])});
        Zedges[redge[he]].push_back(he);
    }
    auto absorber = build_absorber(Fabs, Z, ell, bsize, plan, derive_seed(seed, "step1-absorber"));
    if (!absorber) return detail::tag_failure(absorber.error(), "step1", trace);
    trace["absorber"] = to_json(*absorber);

    // ---- preparation for Steps 2-4
    const Template F2 = detail::derive_template(t, V2, C1, SliceRule{SliceRuleKind::template_ii, to_rational(2 * plan.p_abs), 1, Rational(0)}, "F_double_prime", templates);
    std::vector<std::vector<Colour>> A(E), B(E), Capp(E);
    for (std::size_t e = 0; e < E; ++e) {
        A[e] = absorber->per_edge[e].A;
        B[e] = absorber->per_edge[e].B;
        std::vector<Colour> AB = A[e];
        AB.insert(AB.end(), B[e].begin(), B[e].end());
        Capp[e] = detail::sorted_difference(C1[e], AB);
    }
    std::vector<std::size_t> ncolvx(r);
    for (std::size_t i = 0; i < r; ++i) ncolvx[i] = nsz[COL][i] + nsz[VX][i];
    // vertices with low B-degree stay out of V^colvx when possible
    std::vector<std::vector<Vertex>> good(r), weak(r);
    for (std::size_t i = 0; i < r; ++i) {
        for (Vertex v : V2[i]) {
            bool bad = false;
            for (std::size_t e = 0; e < E && !bad; ++e) {
                const Edge& re = t.R.edge(e);
                if (re.u != i && re.v != i) continue;
                const std::size_t j = re.u == i ? re.v : re.u;
                const double sum = static_cast<double>(colour_degree(t.gc, v, vector_to_bits(n, V2[j]), B[e]));
                bad = sum + 1e-9 < d * static_cast<double>(V2[j].size() * B[e].size()) / 5.0;
            }
            (bad ? weak : good)[i].push_back(v);
        }
    }
    std::vector<std::vector<Vertex>> Vapp(r), Vcolvx(r);
    std::map<Vertex, std::vector<Vertex>> T2;
    std::size_t s2 = 0, weak_used = 0;
    std::string last_prep;
    for (;; ++s2) {
        if (s2 == plan.retries) return detail::tag_failure(make_failure("vertex_split", "ChernoffRetryExhausted", seed, Json{{"last_check", last_prep}}), "step2", trace);
        Rng rng(derive_seed(seed, "prep", s2));
        weak_used = 0;
        for (std::size_t i = 0; i < r; ++i) {
            std::vector<Vertex> pick = rng.sample(good[i], std::min(ncolvx[i], good[i].size()));
            if (pick.size() < ncolvx[i]) {
                auto more = rng.sample(weak[i], ncolvx[i] - pick.size());
                weak_used += more.size();
                pick.insert(pick.end(), more.begin(), more.end());
            }
            std::sort(pick.begin(), pick.end());
            Vcolvx[i] = pick;
            Vapp[i] = detail::sorted_difference(V2[i], pick);
        }
        bool ok = true;
        T2.clear();
        for (const auto& [y, T] : T1) {
            if (inX[y] || part_of[y] == ABS) continue;
            const std::size_t i = phi[y];
            const bool app = part_of[y] == APP;
            T2[y] = detail::sorted_intersection(T, app ? Vapp[i] : Vcolvx[i]);
            const double pp = app ? plan.p_app() : plan.p_col + plan.p_vx;
            if (static_cast<double>(T2[y].size()) + 1e-9 < std::floor(pp * plan.nu_prime * m / 6 + 1e-9) || T2[y].empty()) { ok = false; last_prep = "C1"; break; }
        }
        for (std::size_t e = 0; e < E && ok; ++e) {
            const Edge& re = t.R.edge(e);
            const Bitset vb = vector_to_bits(n, Vcolvx[re.v]);
            const double need2 = std::floor(d * static_cast<double>(Vcolvx[re.u].size() * Vcolvx[re.v].size()) / 13 + 1e-9);
            for (Colour c : C1[e])
                if (static_cast<double>(cross_edges(t.gc, c, Vcolvx[re.u], vb)) < need2) { ok = false; last_prep = "C2"; break; }
            for (int dir = 0; dir < 2 && ok; ++dir) {
                const std::size_t i = dir ? re.v : re.u, j = dir ? re.u : re.v;
                const Bitset jb = vector_to_bits(n, Vcolvx[j]);
                const double need3 = std::floor(d * static_cast<double>(Vcolvx[j].size() * B[e].size()) / 12 + 1e-9);
                for (Vertex v : Vcolvx[i])
                    if (static_cast<double>(colour_degree(t.gc, v, jb, B[e])) < need3) { ok = false; last_prep = "C3"; break; }
            }
        }
        if (ok) break;
    }
    trace["prep"] = Json{{"attempts", s2 + 1}, {"weak_vertices_used", weak_used}};

    // ---- Step 2: H_app
    const Template Fapp = detail::derive_template(F2, Vapp, Capp, SliceRule{SliceRuleKind::template_ii, to_rational(std::sqrt(plan.p_vx)), 1, Rational(0)}, "F_app", templates);
    auto Happ = detail::extract(H, members(APP), T2);
    ApproxOptions aopt;
    aopt.enforce_chunk_bounds = false;
    aopt.m = static_cast<double>(detail::min_cluster(Fapp));
    Expected<EmbedResult> r2 = make_failure("", "", seed);
    std::size_t calls2 = 0;
    try {
        r2 = detail::approx_with_retries(Fapp, Happ.H, plan, derive_seed(seed, "step2"), aopt, calls2);
    } catch (const Error& err) {
        return detail::tag_failure(make_failure("approx_embed", err.kind(), seed, Json{{"what", err.what()}}), "step2", trace);
    }
    if (!r2) return detail::tag_failure(r2.error(), "step2", trace);
    for (std::size_t i = 0; i < Happ.back.size(); ++i) tau[Happ.back[i]] = r2->emb.tau[i];
    for (std::size_t k = 0; k < Happ.edge_back.size(); ++k) { sigma[Happ.edge_back[k]] = r2->emb.sigma[k]; used_c.insert(r2->emb.sigma[k]); }
    trace["step2"] = r2->trace;
    trace["step2"]["calls"] = calls2;
    std::vector<std::vector<Colour>> D(E), Ccol(E);
    for (std::size_t e = 0; e < E; ++e) {
        for (Colour c : Capp[e])
            if (!used_c.count(c)) D[e].push_back(c);
        Ccol[e] = B[e];
        Ccol[e].insert(Ccol[e].end(), D[e].begin(), D[e].end());
    }

    // ---- Step 3: H_col with the leftover app colours prescribed
    const Template Fcol = detail::derive_template(F2, Vcolvx, Ccol, SliceRule{SliceRuleKind::template_i, to_rational(plan.p_vx / 4), 12, Rational(0)}, "F_col", templates);
    auto Hcol = detail::extract(H, members(COL), T2);
    PrescribedOptions popt;
    popt.d_dense = d / 22;
    popt.d_free = d / 4;
    Expected<EmbedResult> r3 = make_failure("", "", seed);
    try {
        r3 = embed_prescribed_colours(Fcol, Hcol.H, D, plan, derive_seed(seed, "step3"), popt);
    } catch (const Error& err) {
        return detail::tag_failure(make_failure("embed_prescribed_colours", err.kind(), seed, Json{{"what", err.what()}}), "step3", trace);
    }
    if (!r3) return detail::tag_failure(r3.error(), "step3", trace);
    std::set<Vertex> col_images;
    for (std::size_t i = 0; i < Hcol.back.size(); ++i) { tau[Hcol.back[i]] = r3->emb.tau[i]; col_images.insert(r3->emb.tau[i]); }
    for (std::size_t k = 0; k < Hcol.edge_back.size(); ++k) { sigma[Hcol.edge_back[k]] = r3->emb.sigma[k]; used_c.insert(r3->emb.sigma[k]); }
    trace["step3"] = r3->trace;

    // ---- Step 4: H_vx on the rest of B
    std::vector<std::vector<Vertex>> Vvx(r);
    std::vector<std::vector<Colour>> Cvx(E);
    for (std::size_t i = 0; i < r; ++i)
        for (Vertex v : Vcolvx[i])
            if (!col_images.count(v)) Vvx[i].push_back(v);
    for (std::size_t e = 0; e < E; ++e)
        for (Colour c : B[e])
            if (!used_c.count(c)) Cvx[e].push_back(c);
    const Template Fvx = detail::derive_template(F2, Vcolvx, Cvx, SliceRule{SliceRuleKind::template_i, to_rational(plan.p_vx / 4), 12, Rational(0)}, "F_vx", templates);
    const Template Fvx2 = detail::derive_template(Fvx, Vvx, Cvx, SliceRule{SliceRuleKind::template_ii, to_rational(plan.p_vx), 1, Rational(0)}, "F_vx_prime", templates);
    std::map<Vertex, std::vector<Vertex>> T3;
    for (const auto& [y, T] : T2)
        if (part_of[y] == VX) T3[y] = detail::sorted_intersection(T, Vvx[phi[y]]);
    auto Hvx = detail::extract(H, members(VX), T3);
    aopt.m = static_cast<double>(detail::min_cluster(Fvx2));
    Expected<EmbedResult> r4 = make_failure("", "", seed);
    std::size_t calls4 = 0;
    try {
        r4 = detail::approx_with_retries(Fvx2, Hvx.H, plan, derive_seed(seed, "step4"), aopt, calls4);
    } catch (const Error& err) {
        return detail::tag_failure(make_failure("approx_embed", err.kind(), seed, Json{{"what", err.what()}}), "step4", trace);
    }
    if (!r4) return detail::tag_failure(r4.error(), "step4", trace);
    for (std::size_t i = 0; i < Hvx.back.size(); ++i) tau[Hvx.back[i]] = r4->emb.tau[i];
    for (std::size_t k = 0; k < Hvx.edge_back.size(); ++k) { sigma[Hvx.edge_back[k]] = r4->emb.sigma[k]; used_c.insert(r4->emb.sigma[k]); }
    trace["step4"] = r4->trace;
    trace["step4"]["calls"] = calls4;

    // ---- Step 5: the absorber takes A and exactly l_e leftover colours of B
    Json identity = Json::array();
    for (std::size_t e = 0; e < E; ++e) {
        std::vector<Colour> B0;
        for (Colour c : Cvx[e])
            if (!used_c.count(c)) B0.push_back(c);
        identity.push_back(Json{{"r_edge", e}, {"ell", ell[e]}, {"leftover_B", B0.size()}});
        if (B0.size() != ell[e]) return detail::tag_failure(make_failure("absorber", "CountingIdentityViolated", seed, Json{{"r_edge", e}, {"ell", ell[e]}, {"leftover", B0.size()}}), "step5", trace);
        auto cols = absorber_colouring(t.gc, absorber->per_edge[e], B0);
        if (!cols) return detail::tag_failure(make_failure("absorber", "AbsorberUnverifiable", seed, Json{{"r_edge", e}}), "step5", trace);
        for (std::size_t k = 0; k < Zedges[e].size(); ++k) { sigma[Zedges[e][k]] = (*cols)[k]; used_c.insert((*cols)[k]); }
    }
    trace["absorber_identity"] = identity;
    trace["templates"] = templates;

    // ---- colour conservation: every colour of every cluster used once
    std::size_t total = 0;
    bool conserved = true;
    for (std::size_t e = 0; e < E; ++e) {
        total += t.C(e).size();
        for (Colour c : t.C(e)) conserved &= used_c.count(c) > 0;
    }
    conserved &= used_c.size() == total;
    trace["colour_conservation"] = conserved;
    for (auto v : tau)
        if (v < 0) conserved = false;
    for (auto c : sigma)
        if (c < 0) conserved = false;
    if (!conserved) return detail::tag_failure(make_failure("assembly", "ColourConservationViolated", seed), "final", trace);
    TransversalEmbedding emb;
    for (auto v : tau) emb.tau.push_back(static_cast<Vertex>(v));
    for (auto c : sigma) emb.sigma.push_back(static_cast<Colour>(c));
    return finish_embedding(t.gc, H, std::move(emb), trace, "transversal_blowup", seed);
}

}  // namespace tvb
