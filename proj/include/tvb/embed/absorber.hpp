#pragma once
// Colour absorbers. For one R-edge: a list Z of embedded host edges and a
// pool of colours; find disjoint colour sets A and B with |A| = |Z| - l such
// that A together with ANY l-subset of B colours Z injectively (a perfect
// matching in the edge-colour incidence graph). Construction is
// verification-first: candidates are generated, then every l-subset (or a
// recorded sample when there are too many) is checked by matching.

#include "params.hpp"

namespace tvb {

struct AbsorberEdge {
    std::vector<Edge> Z;               // embedded host edges
    std::vector<Colour> A, B;          // sorted, disjoint
    std::size_t ell = 0;
    std::vector<std::size_t> flexible; // indices into Z designated flexible
    std::size_t subsets_tested = 0;
    bool exhaustive = false;
    std::string strategy;
    std::size_t attempts = 0;
    std::size_t thin_edges = 0;        // Z elements below the lambda_3 multiplicity promise
};

struct Absorber {
    std::vector<AbsorberEdge> per_edge;
};

inline Json to_json(const AbsorberEdge& a) {
    Json z = Json::array();
    for (const Edge& e : a.Z) z.push_back({e.u, e.v});
    return Json{{"Z", z}, {"A", a.A}, {"B", a.B}, {"ell", a.ell}, {"flexible", a.flexible}, {"subsets_tested", a.subsets_tested},
                {"exhaustive", a.exhaustive}, {"strategy", a.strategy}, {"attempts", a.attempts}, {"thin_edges", a.thin_edges}};
}

inline Json to_json(const Absorber& a) {
    Json out = Json::array();
    for (const auto& e : a.per_edge) out.push_back(to_json(e));
    return out;
}

// C(n, k), saturating at `cap`.
inline std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    long double v = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        v = v * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        if (v > static_cast<long double>(cap)) return cap + 1;
    }
    return static_cast<std::uint64_t>(v + 0.5L);
}

namespace detail {

// Perfect matching of Z into `colours` (each Z element needs a colour whose
// graph contains it). Returns the colour per Z element.
inline std::optional<std::vector<Colour>> colour_edges(const GraphCollection& gc, const std::vector<Edge>& Z, const std::vector<Colour>& colours) {
    std::vector<std::vector<std::size_t>> adj(Z.size());
    for (std::size_t z = 0; z < Z.size(); ++z)
        for (std::size_t k = 0; k < colours.size(); ++k)
            if (gc.has_edge(colours[k], Z[z].u, Z[z].v)) adj[z].push_back(k);
    auto mm = hopcroft_karp(Z.size(), colours.size(), adj);
    if (!mm.perfect_on_left()) return std::nullopt;
    std::vector<Colour> out;
    for (std::size_t z = 0; z < Z.size(); ++z) out.push_back(colours[static_cast<std::size_t>(mm.left_to_right[z])]);
    return out;
}

// Visit l-subsets of {0..b-1}: all of them, or `samples` random ones.
template <class Visit>
bool for_subsets(std::size_t b, std::size_t l, bool exhaustive, std::size_t samples, Rng& rng, std::size_t& tested, Visit&& visit) {
    tested = 0;
    if (exhaustive) {
        std::vector<std::size_t> idx(l);
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            ++tested;
            if (!visit(idx)) return false;
            std::size_t i = l;
            while (i > 0 && idx[i - 1] == b - l + (i - 1)) --i;
            if (i == 0) return true;
            ++idx[i - 1];
            for (std::size_t k = i; k < l; ++k) idx[k] = idx[k - 1] + 1;
        }
    }
    std::vector<std::size_t> all(b);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t s = 0; s < samples; ++s) {
        auto pick = rng.sample(all, l);
        std::sort(pick.begin(), pick.end());
        ++tested;
        if (!visit(pick)) return false;
    }
    return true;
}

}  // namespace detail

// Flexibility check: A together with every tested l-subset of B colours Z.
inline bool verify_absorber_edge(const GraphCollection& gc, AbsorberEdge& a, std::uint64_t seed, std::uint64_t exhaustive_cap = 100000, std::size_t samples = 2000) {
    Rng rng(seed);
    a.exhaustive = binomial_capped(a.B.size(), a.ell, exhaustive_cap) <= exhaustive_cap;
    std::size_t tested = 0;
    const bool ok = detail::for_subsets(a.B.size(), a.ell, a.exhaustive, samples, rng, tested, [&](const std::vector<std::size_t>& idx) {
        std::vector<Colour> cols = a.A;
        for (std::size_t i : idx) cols.push_back(a.B[i]);
        return detail::colour_edges(gc, a.Z, cols).has_value();
    });
    a.subsets_tested = tested;
    return ok;
}

// Colouring of Z using A and the given l-subset B0 of B.
inline std::optional<std::vector<Colour>> absorber_colouring(const GraphCollection& gc, const AbsorberEdge& a, const std::vector<Colour>& B0) {
    if (B0.size() != a.ell) return std::nullopt;
    for (Colour c : B0)
        if (!std::binary_search(a.B.begin(), a.B.end(), c)) return std::nullopt;
    std::vector<Colour> cols = a.A;
    cols.insert(cols.end(), B0.begin(), B0.end());
    return detail::colour_edges(gc, a.Z, cols);
}

// One R-edge. `pool` is the colour cluster the absorber draws from.
inline Expected<AbsorberEdge> build_absorber_edge(const GraphCollection& gc, const std::vector<Edge>& Z, const std::vector<Colour>& pool, std::size_t ell, std::size_t b, const SplitPlan& plan, std::uint64_t seed) {
    if (ell > Z.size()) throw Error("PreconditionViolated", "flexibility exceeds the number of absorber edges");
    if (b < ell) throw Error("PreconditionViolated", "|B| must be at least the flexibility");
    if (Z.size() - ell + b > pool.size()) throw Error("PreconditionViolated", "colour pool too small for the absorber");
    // incidence
    std::vector<std::vector<Colour>> inc(Z.size());
    std::size_t thin = 0;
    for (std::size_t z = 0; z < Z.size(); ++z) {
        for (Colour c : pool)
            if (gc.has_edge(c, Z[z].u, Z[z].v)) inc[z].push_back(c);
        thin += static_cast<double>(inc[z].size()) + 1e-9 < plan.lambda3 * static_cast<double>(pool.size());
    }
    Json last = Json::object();
    for (std::size_t attempt = 0; attempt < plan.retries; ++attempt) {
        Rng rng(derive_seed(seed, "absorber", attempt));
        AbsorberEdge a;
        a.Z = Z;
        a.ell = ell;
        a.thin_edges = thin;
        a.attempts = attempt + 1;
        std::vector<std::size_t> order(Z.size());
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<Colour> B;
        std::vector<std::size_t> flex;
        if (attempt < (plan.retries + 1) / 2) {
            // random B, then flexible elements with many B-colours
            a.strategy = "random";
            B = rng.sample(pool, b);
            std::sort(B.begin(), B.end());
            std::vector<std::pair<std::size_t, std::size_t>> deg;
            for (std::size_t z : order) deg.push_back({detail::sorted_intersection(inc[z], B).size(), z});
            std::stable_sort(deg.begin(), deg.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
            const double need = plan.lambda3 * static_cast<double>(b) / 2.0;
            for (std::size_t k = 0; k < ell; ++k) {
                if (k >= deg.size() || static_cast<double>(deg[k].first) + 1e-9 < need) break;
                flex.push_back(deg[k].second);
            }
            if (flex.size() < ell) { last = Json{{"attempt", attempt}, {"reason", "too few flexible candidates"}}; continue; }
        } else {
            // flexible elements first, B from their common colours
            a.strategy = "common-neighbourhood";
            std::vector<Colour> common = pool;
            std::vector<char> chosen(Z.size(), 0);
            for (std::size_t k = 0; k < ell; ++k) {
                std::size_t best = Z.size(), best_sz = 0;
                for (std::size_t z : order) {
                    if (chosen[z]) continue;
                    const std::size_t sz = detail::sorted_intersection(common, inc[z]).size();
                    if (best == Z.size() || sz > best_sz) { best = z; best_sz = sz; }
                }
                chosen[best] = 1;
                flex.push_back(best);
                common = detail::sorted_intersection(common, inc[best]);
            }
            rng.shuffle(common);
            B.assign(common.begin(), common.begin() + static_cast<std::ptrdiff_t>(std::min(b, common.size())));
            if (B.size() < b) {
                // top up with colours covering the most flexible elements
                std::vector<std::pair<std::size_t, Colour>> rest;
                for (Colour c : pool) {
                    if (std::find(B.begin(), B.end(), c) != B.end()) continue;
                    std::size_t cov = 0;
                    for (std::size_t z : flex) cov += std::binary_search(inc[z].begin(), inc[z].end(), c);
                    rest.push_back({cov, c});
                }
                rng.shuffle(rest);
                std::stable_sort(rest.begin(), rest.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
                for (std::size_t k = 0; B.size() < b; ++k) B.push_back(rest[k].second);
            }
            std::sort(B.begin(), B.end());
        }
        std::sort(flex.begin(), flex.end());
        // A: match the non-flexible elements into colours outside B
        std::vector<Edge> rigid;
        for (std::size_t z = 0; z < Z.size(); ++z)
            if (!std::binary_search(flex.begin(), flex.end(), z)) rigid.push_back(Z[z]);
        std::vector<Colour> others;
        for (Colour c : pool)
            if (!std::binary_search(B.begin(), B.end(), c)) others.push_back(c);
        rng.shuffle(others);
        auto Acols = detail::colour_edges(gc, rigid, others);
        if (!Acols) { last = Json{{"attempt", attempt}, {"reason", "non-flexible edges have no system of distinct colours"}}; continue; }
        a.A = *Acols;
        std::sort(a.A.begin(), a.A.end());
        a.B = B;
        a.flexible = flex;
        if (!verify_absorber_edge(gc, a, derive_seed(seed, "absorber-verify", attempt))) {
            last = Json{{"attempt", attempt}, {"reason", "a subset of B admits no perfect colouring"}, {"subsets_tested", a.subsets_tested}};
            continue;
        }
        return a;
    }
    return make_failure("build_absorber", "AbsorberUnverifiable", seed, Json{{"attempts", plan.retries}, {"last", last}, {"thin_edges", thin}});
}

// One absorber per R-edge of the template: Z[e] are the embedded host edges
// over e, drawing colours from t.C(e); ell[e] and b[e] are the sizes.
inline Expected<Absorber> build_absorber(const Template& t, const std::vector<std::vector<Edge>>& Z, const std::vector<std::size_t>& ell, const std::vector<std::size_t>& b, const SplitPlan& plan, std::uint64_t seed) {
    if (Z.size() != t.R.edge_count() || ell.size() != Z.size() || b.size() != Z.size()) throw Error("PreconditionViolated", "one absorber specification per R-edge required");
    Absorber out;
    for (std::size_t e = 0; e < Z.size(); ++e) {
        auto a = build_absorber_edge(t.gc, Z[e], t.C(e), ell[e], b[e], plan, derive_seed(seed, e));
        if (!a) {
            Failure f = a.error();
            f.diagnostics["r_edge"] = e;
            return f;
        }
        out.per_edge.push_back(std::move(*a));
    }
    return out;
}

}  // namespace tvb
