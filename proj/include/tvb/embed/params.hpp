#pragma once
// Parameters shared by the embedding procedures, and the verified outcome
// type every procedure returns.

#include "../matching.hpp"
#include "../templates.hpp"

namespace tvb {

// Concrete constants replacing the asymptotic hierarchy; all overridable.
struct SplitPlan {
    double epsilon = 0.05;
    double mu = 0.1;
    double alpha = 0.05;
    double lambda1 = 0.1;
    double lambda3 = 0.2;
    double nu_prime = 0.1;
    double zeta = 0.1;
    double p_abs = 0.05;
    double p_col = 0.08;
    double p_vx = 0.15;
    double gamma = 0.1;
    double mu_prime = 0.05;
    double ladder_base = 0.02;   // delta_l = base * ratio^l
    double ladder_ratio = 3.0;
    double buffer_fraction = 0.2;  // blow-up embedder matching reserve
    std::size_t retries = 20;

    double p_app() const { return 1.0 - (p_abs + p_col + p_vx); }
    double ladder(std::size_t level) const { return ladder_base * std::pow(ladder_ratio, static_cast<double>(level)); }

    void validate() const {
        auto frac = [](double x, const char* name) {
            if (!(x > 0.0 && x < 1.0)) throw Error("InvalidParameter", std::string(name) + " must lie in (0,1)");
        };
        frac(epsilon, "epsilon");
        frac(alpha, "alpha");
        frac(lambda1, "lambda1");
        frac(lambda3, "lambda3");
        frac(nu_prime, "nu_prime");
        frac(zeta, "zeta");
        frac(p_abs, "p_abs");
        frac(p_col, "p_col");
        frac(p_vx, "p_vx");
        frac(gamma, "gamma");
        frac(mu_prime, "mu_prime");
        frac(ladder_base, "ladder_base");
        frac(buffer_fraction, "buffer_fraction");
        if (!(mu > 0.0 && mu <= 1.0)) throw Error("InvalidParameter", "mu must lie in (0,1]");
        if (!(p_app() > 0.0)) throw Error("InvalidParameter", "p_abs + p_col + p_vx must be below 1");
        if (!(ladder_ratio > 1.0)) throw Error("InvalidParameter", "ladder must be strictly increasing");
        if (retries == 0) throw Error("InvalidParameter", "retries must be positive");
    }
};

inline Json to_json(const SplitPlan& p) {
    return Json{{"epsilon", p.epsilon}, {"mu", p.mu}, {"alpha", p.alpha}, {"lambda1", p.lambda1}, {"lambda3", p.lambda3},
                {"nu_prime", p.nu_prime}, {"zeta", p.zeta}, {"p_abs", p.p_abs}, {"p_col", p.p_col}, {"p_vx", p.p_vx},
                {"p_app", p.p_app()}, {"gamma", p.gamma}, {"mu_prime", p.mu_prime}, {"ladder_base", p.ladder_base},
                {"ladder_ratio", p.ladder_ratio}, {"buffer_fraction", p.buffer_fraction}, {"retries", p.retries}};
}

inline SplitPlan split_plan_from_json(const Json& j) {
    SplitPlan p;
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("epsilon", p.epsilon);
    get("mu", p.mu);
    get("alpha", p.alpha);
    get("lambda1", p.lambda1);
    get("lambda3", p.lambda3);
    get("nu_prime", p.nu_prime);
    get("zeta", p.zeta);
    get("p_abs", p.p_abs);
    get("p_col", p.p_col);
    get("p_vx", p.p_vx);
    get("gamma", p.gamma);
    get("mu_prime", p.mu_prime);
    get("ladder_base", p.ladder_base);
    get("ladder_ratio", p.ladder_ratio);
    get("buffer_fraction", p.buffer_fraction);
    if (j.contains("retries")) p.retries = j.at("retries").get<std::size_t>();
    if (j.contains("p_app") && std::fabs(j.at("p_app").get<double>() - p.p_app()) > 1e-9)
        throw Error("InvalidParameter", "p_app must equal 1 - (p_abs + p_col + p_vx)");
    p.validate();
    return p;
}

struct EmbedResult {
    TransversalEmbedding emb;
    VerificationReport verification;
    Json trace = Json::object();
};

using EmbedOutcome = Expected<EmbedResult>;

// The only way procedures produce a success: the embedding is verified and an
// unverified result becomes a typed failure.
inline EmbedOutcome finish_embedding(const GraphCollection& gc, const PatternGraph& H, TransversalEmbedding emb, Json trace, const std::string& stage, std::uint64_t seed) {
    auto rep = verify_transversal_embedding(gc, H, emb);
    if (!rep.accepted) return make_failure(stage, "VerificationFailed", seed, Json{{"violations", rep.violations}, {"trace", trace}});
    return EmbedResult{std::move(emb), std::move(rep), std::move(trace)};
}

namespace detail {

// Host vertex -> cluster index (or -1).
inline std::vector<std::int64_t> cluster_index(std::size_t n, const std::vector<std::vector<Vertex>>& clusters) {
    std::vector<std::int64_t> idx(n, -1);
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (Vertex v : clusters[i]) idx.at(v) = static_cast<std::int64_t>(i);
    return idx;
}

// R-edge index for each H-edge under phi; throws when phi is not a
// homomorphism into R.
inline std::vector<std::size_t> r_edge_of(const PatternGraph& H, const PatternGraph& R) {
    if (!H.phi()) throw Error("PreconditionViolated", "pattern has no homomorphism phi");
    const auto& phi = *H.phi();
    for (Vertex x = 0; x < H.n(); ++x)
        if (phi[x] >= R.n()) throw Error("PreconditionViolated", "phi maps outside R");
    std::vector<std::size_t> out(H.edge_count());
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const Edge& ed = H.edge(e);
        auto idx = R.edge_index(phi[ed.u], phi[ed.v]);
        if (!idx) throw Error("PreconditionViolated", "phi is not a homomorphism into R: edge " + std::to_string(ed.u) + "-" + std::to_string(ed.v));
        out[e] = *idx;
    }
    return out;
}

inline std::vector<std::vector<Vertex>> preimages(const PatternGraph& H, std::size_t r) {
    std::vector<std::vector<Vertex>> out(r);
    for (Vertex x = 0; x < H.n(); ++x) out.at((*H.phi())[x]).push_back(x);
    return out;
}

// Chernoff-style check, integerised: an observed count must reach half of
// its expectation (rounded down), and at least one when anything is expected.
inline bool half_expectation_ok(double observed, double expected) {
    double need = std::floor(expected / 2.0 + 1e-9);
    if (expected > 0 && need < 1) need = 1;
    return observed + 1e-9 >= need;
}

inline std::vector<Vertex> sorted_difference(const std::vector<Vertex>& a, std::vector<Vertex> remove) {
    std::sort(remove.begin(), remove.end());
    std::vector<Vertex> out;
    for (Vertex v : a)
        if (!std::binary_search(remove.begin(), remove.end(), v)) out.push_back(v);
    return out;
}

inline std::vector<Vertex> sorted_intersection(std::vector<Vertex> a, std::vector<Vertex> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<Vertex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline Json ledger_json(const ParameterLedger& L) {
    Json lineage = Json::array();
    for (const auto& e : L.lineage)
        lineage.push_back(Json{{"rule", e.rule}, {"justification", e.justification}, {"class_before", e.class_before}, {"class_after", e.class_after},
                               {"m", rational_string(e.m_after)}, {"epsilon", rational_string(e.eps_after)}, {"d", rational_string(e.d_after)}, {"delta", rational_string(e.delta_after)}});
    return Json{{"m", rational_string(L.m)}, {"epsilon", rational_string(L.epsilon)}, {"d", rational_string(L.d)}, {"delta", rational_string(L.delta)}, {"class", to_string(L.klass)}, {"lineage", lineage}};
}

}  // namespace detail
}  // namespace tvb
