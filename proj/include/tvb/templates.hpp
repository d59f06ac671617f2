#pragma once
// R-templates: vertex clusters per R-vertex, colour clusters per R-edge, a
// shared graph collection, a parameter ledger and a declared class with a
// verification stamp. Also template slicing and thick graphs.

#include "regularity.hpp"

namespace tvb {

enum class Stamp { unchecked, sampled, exhaustive };

inline std::string to_string(Stamp s) {
    switch (s) {
        case Stamp::unchecked: return "unchecked";
        case Stamp::sampled: return "sampled";
        case Stamp::exhaustive: return "exhaustive";
    }
    return "?";
}

inline Stamp parse_stamp(const std::string& s) {
    if (s == "unchecked") return Stamp::unchecked;
    if (s == "sampled") return Stamp::sampled;
    if (s == "exhaustive") return Stamp::exhaustive;
    throw Error("InvalidStamp", s);
}

// G^e_c is G_c restricted to V_i x V_j for e = ij; the collection is shared.
struct Template {
    PatternGraph R{0};
    std::vector<std::vector<Vertex>> clusters;         // V_1..V_r (host ids)
    std::vector<std::vector<Colour>> colour_clusters;  // C_e per R-edge index
    GraphCollection gc{0, 0};
    ParameterLedger ledger;
    bool rainbow = false;
    Stamp stamp = Stamp::unchecked;

    RegularityMode klass() const { return ledger.klass; }
    std::size_t r() const { return R.n(); }
    const std::vector<Vertex>& V(std::size_t i) const { return clusters.at(i); }
    const std::vector<Colour>& C(std::size_t e) const { return colour_clusters.at(e); }
    DensitySpec density_spec() const { return DensitySpec{to_double(ledger.d), 0.0, to_double(ledger.epsilon), ledger.klass}; }
};

// Convenience constructor; the ledger starts at (m, eps, d, delta) with the
// given declared class.
inline Template make_template(PatternGraph R, std::vector<std::vector<Vertex>> clusters, std::vector<std::vector<Colour>> colour_clusters, GraphCollection gc, double m, double eps, double d, double delta, RegularityMode klass) {
    if (clusters.size() != R.n()) throw Error("InvalidTemplate", "one vertex cluster per R-vertex required");
    if (colour_clusters.size() != R.edge_count()) throw Error("InvalidTemplate", "one colour cluster per R-edge required");
    Template t;
    t.R = std::move(R);
    t.clusters = std::move(clusters);
    for (auto& V : t.clusters) std::sort(V.begin(), V.end());
    t.colour_clusters = std::move(colour_clusters);
    for (auto& C : t.colour_clusters) std::sort(C.begin(), C.end());
    t.gc = std::move(gc);
    t.ledger.m = to_rational(m);
    t.ledger.epsilon = to_rational(eps);
    t.ledger.d = to_rational(d);
    t.ledger.delta = to_rational(delta);
    t.ledger.klass = klass;
    std::vector<int> seen(t.gc.colours(), 0);
    t.rainbow = true;
    for (const auto& C : t.colour_clusters)
        for (Colour c : C) t.rainbow &= (seen.at(c)++ == 0);
    return t;
}

// ---------------------------------------------------------------- validation

struct TemplateReport {
    std::vector<ClassificationReport> per_edge;
    std::vector<std::string> size_violations;
    std::vector<Colour> rainbow_violations;  // colours in more than one C_e (rainbow flag set)
    bool passed = false;
    Stamp stamp = Stamp::unchecked;
};

inline TemplateReport validate_template(const Template& t, std::size_t budget = 2000, std::uint64_t seed = 1) {
    TemplateReport rep;
    const Rational m = t.ledger.m, delta = t.ledger.delta;
    for (std::size_t i = 0; i < t.r(); ++i) {
        Rational s(static_cast<std::int64_t>(t.V(i).size()));
        if (s < m || s * delta > m) rep.size_violations.push_back("cluster " + std::to_string(i) + " size outside [m, m/delta]");
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e)
        if (Rational(static_cast<std::int64_t>(t.C(e).size())) < delta * m) rep.size_violations.push_back("colour cluster " + std::to_string(e) + " smaller than delta*m");
    if (t.rainbow) {
        std::vector<int> seen(t.gc.colours(), 0);
        for (const auto& C : t.colour_clusters)
            for (Colour c : C)
                if (seen[c]++ == 1) rep.rainbow_violations.push_back(c);
    }
    bool all_exhaustive = true;
    bool edges_ok = true;
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        auto cr = classify_collection(t.gc, t.V(re.u), t.V(re.v), t.C(e), t.density_spec(), budget, derive_seed(seed, e));
        all_exhaustive &= cr.exhaustive;
        edges_ok &= cr.passed;
        rep.per_edge.push_back(std::move(cr));
    }
    rep.stamp = all_exhaustive ? Stamp::exhaustive : Stamp::sampled;
    rep.passed = edges_ok && rep.size_violations.empty() && rep.rainbow_violations.empty();
    return rep;
}

// ---------------------------------------------------------------- slicing

struct TemplateSelection {
    std::vector<std::vector<Vertex>> clusters;         // V_i' ⊆ V_i
    std::vector<std::vector<Colour>> colour_clusters;  // C_e' ⊆ C_e
};

// Uniform random subsets of the requested sizes (random slice).
inline TemplateSelection random_selection(const Template& t, const std::vector<std::size_t>& n_sizes, const std::vector<std::size_t>& h_sizes, std::uint64_t seed) {
    if (n_sizes.size() != t.r() || h_sizes.size() != t.R.edge_count()) throw Error("PreconditionViolated", "one size per cluster required");
    Rng rng(seed);
    TemplateSelection s;
    for (std::size_t i = 0; i < t.r(); ++i) {
        auto v = rng.sample(t.V(i), n_sizes[i]);
        std::sort(v.begin(), v.end());
        s.clusters.push_back(std::move(v));
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        auto c = rng.sample(t.C(e), h_sizes[e]);
        std::sort(c.begin(), c.end());
        s.colour_clusters.push_back(std::move(c));
    }
    return s;
}

inline TemplateSelection full_selection(const Template& t) { return TemplateSelection{t.clusters, t.colour_clusters}; }

namespace detail {
template <class T>
bool is_subset_of(std::vector<T> a, std::vector<T> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return std::includes(b.begin(), b.end(), a.begin(), a.end()) && std::adjacent_find(a.begin(), a.end()) == a.end();
}
}  // namespace detail

// Induced subtemplate (cases i-iii) or sparsified template (case iv); the
// ledger is transformed by the matching closed-form rule.
inline Template slice_template(const Template& t, const TemplateSelection& sel, const SliceRule& rule, std::uint64_t seed = 1) {
    auto violated = [](const std::string& why) { throw Error("PreconditionViolated", why); };
    const double alpha = to_double(rule.alpha);
    const double k = static_cast<double>(rule.k);
    const double m = to_double(t.ledger.m);
    if (rule.kind == SliceRuleKind::template_iv) {
        if (t.klass() != RegularityMode::half_super) violated("case (iv) needs a half-super template");
        Template out = t;
        const double d = to_double(t.ledger.d);
        const std::size_t n = t.gc.n();
        for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
            const Edge& re = t.R.edge(e);
            KPartiteGraph kg;
            kg.universe = n + t.gc.colours();
            kg.parts = {t.V(re.u), t.V(re.v), {}};
            for (Colour c : t.C(e)) kg.parts[2].push_back(static_cast<Vertex>(n + c));
            const Bitset vj = vector_to_bits(n, t.V(re.v));
            for (Colour c : t.C(e))
                for (Vertex x : t.V(re.u))
                    for_each_bit(t.gc.nbrs(c, x) & vj, [&](Vertex y) { kg.edges.push_back({x, y, static_cast<Vertex>(n + c)}); });
            auto sp = sparsify_to_superregular(kg, to_double(t.ledger.epsilon), to_double(rule.eps_prime), d, derive_seed(seed, e));
            if (!sp) violated("sparsification of R-edge " + std::to_string(e) + " failed its degree check");
            std::set<std::tuple<Vertex, Vertex, Vertex>> kept;
            for (const auto& ed : sp->edges) kept.insert({ed[0], ed[1], ed[2]});
            for (const auto& ed : kg.edges)
                if (!kept.count({ed[0], ed[1], ed[2]})) out.gc.remove_edge(ed[2] - static_cast<Vertex>(n), ed[0], ed[1]);
        }
        out.ledger = ledger_slice(t.ledger, rule);
        out.stamp = Stamp::unchecked;
        return out;
    }
    if (sel.clusters.size() != t.r() || sel.colour_clusters.size() != t.R.edge_count()) violated("selection shape does not match the template");
    for (std::size_t i = 0; i < t.r(); ++i)
        if (!detail::is_subset_of(sel.clusters[i], t.V(i))) violated("V_" + std::to_string(i) + "' is not a subset of V_" + std::to_string(i));
    for (std::size_t e = 0; e < t.R.edge_count(); ++e)
        if (!detail::is_subset_of(sel.colour_clusters[e], t.C(e))) violated("C_e' is not a subset of C_e for R-edge " + std::to_string(e));
    for (std::size_t i = 0; i < t.r(); ++i) {
        const double vi = static_cast<double>(t.V(i).size()), vi2 = static_cast<double>(sel.clusters[i].size());
        switch (rule.kind) {
            case SliceRuleKind::template_i:
            case SliceRuleKind::template_iii:
                if (vi2 < alpha * vi - 1e-9 || vi2 > k * alpha * vi + 1e-9)
                    violated("|V_" + std::to_string(i) + "'| = " + std::to_string(sel.clusters[i].size()) + " outside [alpha|V_i|, k alpha|V_i|]");
                break;
            case SliceRuleKind::template_ii:
                if (vi - vi2 > alpha * m + 1e-9) violated("|V_" + std::to_string(i) + " \\ V_" + std::to_string(i) + "'| exceeds alpha*m");
                break;
            default: violated("rule is not a template slicing case");
        }
    }
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const double ce = static_cast<double>(t.C(e).size()), ce2 = static_cast<double>(sel.colour_clusters[e].size());
        if (rule.kind == SliceRuleKind::template_ii) {
            if (ce - ce2 > alpha * m + 1e-9) violated("|C_e \\ C_e'| exceeds alpha*m for R-edge " + std::to_string(e));
        } else if (ce2 < alpha * ce / k - 1e-9) {
            violated("|C_e'| below alpha|C_e|/k for R-edge " + std::to_string(e));
        }
    }
    Template out = t;
    out.clusters = sel.clusters;
    for (auto& V : out.clusters) std::sort(V.begin(), V.end());
    out.colour_clusters = sel.colour_clusters;
    for (auto& C : out.colour_clusters) std::sort(C.begin(), C.end());
    out.ledger = ledger_slice(t.ledger, rule);
    out.stamp = Stamp::unchecked;
    return out;
}

// ---------------------------------------------------------------- thick graphs

struct ThickGraph {
    double lambda = 0;
    SimpleGraph graph{0};
};

// Number of colours c in C_e with xy in G_c.
inline std::size_t colour_multiplicity(const Template& t, std::size_t e, Vertex x, Vertex y) {
    std::size_t cnt = 0;
    for (Colour c : t.C(e)) cnt += t.gc.has_edge(c, x, y);
    return cnt;
}

inline ThickGraph thick_graph(const Template& t, double lambda) {
    if (!(lambda > 0 && lambda <= 1)) throw Error("InvalidParameter", "lambda must lie in (0,1]");
    ThickGraph T{lambda, SimpleGraph(t.gc.n())};
    const Rational lam = to_rational(lambda);
    std::vector<std::size_t> mult;
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        const auto& Vi = t.V(re.u);
        const auto& Vj = t.V(re.v);
        const Bitset bj = vector_to_bits(t.gc.n(), Vj);
        const Rational need = lam * Rational(static_cast<std::int64_t>(t.C(e).size()));
        for (Vertex x : Vi) {
            mult.assign(t.gc.n(), 0);
            for (Colour c : t.C(e)) for_each_bit(t.gc.nbrs(c, x) & bj, [&](Vertex y) { ++mult[y]; });
            for (Vertex y : Vj)
                if (Rational(static_cast<std::int64_t>(mult[y])) >= need && !t.C(e).empty()) T.graph.add_edge(x, y);
        }
    }
    return T;
}

struct ThickDegreeReport {
    struct Slice {
        std::size_t edge = 0;
        std::size_t min_degree_i = 0, min_degree_j = 0;  // into the other side
        double bound_i = 0, bound_j = 0;                 // (d/2)|V_other|
        bool ok = true;
    };
    std::vector<Slice> slices;
    bool passed = true;
    std::optional<Rational> sampled_min_density;  // subset-density half, sampled
};

// Degree half of the half-superregularity of each thick slice, exactly;
// subset-density half only by sampling.
inline ThickDegreeReport thick_degree_report(const Template& t, const ThickGraph& T, std::size_t samples = 0, std::uint64_t seed = 1) {
    ThickDegreeReport rep;
    const double dhalf = to_double(t.ledger.d) / 2.0;
    for (std::size_t e = 0; e < t.R.edge_count(); ++e) {
        const Edge& re = t.R.edge(e);
        const auto& Vi = t.V(re.u);
        const auto& Vj = t.V(re.v);
        const Bitset bi = vector_to_bits(t.gc.n(), Vi), bj = vector_to_bits(t.gc.n(), Vj);
        ThickDegreeReport::Slice s;
        s.edge = e;
        s.min_degree_i = SIZE_MAX;
        s.min_degree_j = SIZE_MAX;
        for (Vertex x : Vi) s.min_degree_i = std::min(s.min_degree_i, (T.graph.nbrs(x) & bj).count());
        for (Vertex y : Vj) s.min_degree_j = std::min(s.min_degree_j, (T.graph.nbrs(y) & bi).count());
        s.bound_i = dhalf * static_cast<double>(Vj.size());
        s.bound_j = dhalf * static_cast<double>(Vi.size());
        s.ok = static_cast<double>(s.min_degree_i) >= s.bound_i - 1e-9 && static_cast<double>(s.min_degree_j) >= s.bound_j - 1e-9;
        rep.passed &= s.ok;
        rep.slices.push_back(s);
        if (samples > 0) {
            auto inst = pair_instance(T.graph, Vi.size() <= Vj.size() ? Vi : Vj, Vi.size() <= Vj.size() ? Vj : Vi);
            auto md = min_subtuple_density(inst, to_double(t.ledger.epsilon), samples, derive_seed(seed, e));
            if (!rep.sampled_min_density || md.min_density < *rep.sampled_min_density) rep.sampled_min_density = md.min_density;
        }
    }
    return rep;
}

}  // namespace tvb
