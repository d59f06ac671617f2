#include <gtest/gtest.h>

#include "tvb/embed.hpp"
#include "tvb/generators.hpp"

using namespace tvb;

namespace {

std::vector<Vertex> iota_vec(Vertex lo, Vertex hi) {
    std::vector<Vertex> v;
    for (Vertex x = lo; x < hi; ++x) v.push_back(x);
    return v;
}

// Pattern: disjoint paths on 2*per vertices alternating between the two
// clusters of a single R-edge, each cluster holding s pattern vertices.
PatternGraph bipartite_paths(std::size_t s, std::size_t per) {
    PatternGraph H(2 * s);
    std::vector<Vertex> phi(2 * s);
    for (std::size_t i = 0; i < s; ++i) {
        phi[i] = 0;
        phi[s + i] = 1;
    }
    for (std::size_t b = 0; b + per <= s; b += per) {
        std::vector<Vertex> path;
        for (std::size_t k = 0; k < per; ++k) {
            path.push_back(static_cast<Vertex>(b + k));
            path.push_back(static_cast<Vertex>(s + b + k));
        }
        for (std::size_t k = 0; k + 1 < path.size(); ++k) H.add_edge(path[k], path[k + 1]);
    }
    H.set_phi(phi);
    return H;
}

// Template on one R-edge whose colour cluster has exactly e(H) colours.
Template exact_template(std::size_t s, std::size_t colours, double p, std::uint64_t seed) {
    PatternGraph R(2);
    R.add_edge(0, 1);
    auto gc = random_bipartite_collection(s, s, colours, p, seed);
    std::vector<Colour> C(colours);
    std::iota(C.begin(), C.end(), 0);
    return make_template(R, {iota_vec(0, static_cast<Vertex>(s)), iota_vec(static_cast<Vertex>(s), static_cast<Vertex>(2 * s))}, {C}, gc, static_cast<double>(s), 0.05, p, 0.5,
                         RegularityMode::super);
}

GraphCollection dense_collection(std::size_t n, std::size_t k, double p, std::uint64_t seed) {
    GenSpec s;
    s.n = n;
    s.colours = k;
    s.density = p;
    s.seed = seed;
    return random_collection(s);
}

PatternGraph matching(std::size_t n) {
    PatternGraph H(n);
    for (Vertex i = 0; i + 1 < n; i += 2) H.add_edge(i, i + 1);
    return H;
}

}  // namespace

// ---------------------------------------------------------------- transversal

TEST(Transversal, SpanningPathsIntoDenseTemplate) {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto H = bipartite_paths(24, 2);
        auto t = exact_template(24, H.edge_count(), 0.9, seed);
        auto r = transversal_blowup(t, H, SplitPlan{}, seed);
        if (!r.ok()) continue;
        ++ok;
        EXPECT_TRUE(r->verification.accepted);
        EXPECT_TRUE(verify_transversal_embedding(t.gc, H, r->emb).accepted);
        // spanning on both sides
        std::set<Vertex> vs(r->emb.tau.begin(), r->emb.tau.end());
        EXPECT_EQ(vs.size(), t.gc.n());
        EXPECT_TRUE(r->trace.at("colour_conservation").get<bool>());
    }
    EXPECT_GE(ok, 9);
}

TEST(Transversal, ColourClusterMustMatchEdgeCount) {
    auto H = bipartite_paths(12, 2);
    auto t = exact_template(12, H.edge_count() + 3, 0.9, 1);
    EXPECT_THROW(transversal_blowup(t, H, SplitPlan{}, 1), Error);
}

TEST(Transversal, SameSeedSameEmbedding) {
    auto H = bipartite_paths(16, 2);
    auto t = exact_template(16, H.edge_count(), 0.9, 3);
    auto a = transversal_blowup(t, H, SplitPlan{}, 11);
    auto b = transversal_blowup(t, H, SplitPlan{}, 11);
    ASSERT_EQ(a.ok(), b.ok());
    if (a.ok()) {
        EXPECT_EQ(a->emb.tau, b->emb.tau);
        EXPECT_EQ(a->emb.sigma, b->emb.sigma);
    } else {
        EXPECT_EQ(a.error().stage, b.error().stage);
    }
}

// ---------------------------------------------------------------- quasi

TEST(Quasi, PerfectMatchingIntoDenseCollection) {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto H = matching(12);
        auto gc = dense_collection(12, H.edge_count(), 0.7, seed);
        auto r = quasi_embed(gc, H, SplitPlan{}, seed);
        if (!r.ok()) {
            // failures carry a stage path and a reason
            EXPECT_FALSE(r.error().stage.empty());
            EXPECT_FALSE(r.error().reason.empty());
            continue;
        }
        ++ok;
        EXPECT_TRUE(verify_transversal_embedding(gc, H, r->emb).accepted);
        // every colour used exactly once
        std::set<Colour> cs(r->emb.sigma.begin(), r->emb.sigma.end());
        EXPECT_EQ(cs.size(), gc.colours());
    }
    EXPECT_GE(ok, 12);
}

TEST(Quasi, HamiltonCycleIntoDenseCollection) {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto H = cycle_graph(12);
        auto gc = dense_collection(12, 12, 0.8, seed);
        auto r = quasi_embed(gc, H, SplitPlan{}, seed);
        if (!r.ok()) continue;
        ++ok;
        EXPECT_TRUE(verify_transversal_embedding(gc, H, r->emb).accepted);
    }
    EXPECT_GE(ok, 12);
}

TEST(Quasi, ColourCountMustEqualEdgeCount) {
    auto gc = dense_collection(8, 3, 0.7, 1);
    EXPECT_THROW(quasi_embed(gc, cycle_graph(8), SplitPlan{}, 1), Error);
}

TEST(Quasi, EmptyPatternIsTrivial) {
    GraphCollection gc(5, 0);
    auto r = quasi_embed(gc, PatternGraph(5), SplitPlan{}, 1);
    ASSERT_TRUE(r.ok());
    std::set<Vertex> vs(r->emb.tau.begin(), r->emb.tau.end());
    EXPECT_EQ(vs.size(), 5u);
}

TEST(Quasi, Deterministic) {
    auto H = matching(10);
    auto gc = dense_collection(10, 5, 0.8, 4);
    auto a = quasi_embed(gc, H, SplitPlan{}, 9);
    auto b = quasi_embed(gc, H, SplitPlan{}, 9);
    ASSERT_EQ(a.ok(), b.ok());
    if (a.ok()) {
        EXPECT_EQ(a->emb.tau, b->emb.tau);
        EXPECT_EQ(a->emb.sigma, b->emb.sigma);
    }
}

// ---------------------------------------------------------------- expansions

TEST(Expansion, LooseCycleIntoDenseThreeGraph) {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t N = 24;
        ThreeGraph g(N);
        Rng rng(seed);
        for (Vertex a = 0; a < N; ++a)
            for (Vertex b = a + 1; b < N; ++b)
                for (Vertex c = b + 1; c < N; ++c)
                    if (rng.bernoulli(0.8)) g.add_edge(a, b, c);
        auto H = cycle_graph(5);
        auto r = expand_embed_3graph(g, H, SplitPlan{}, seed);
        if (!r.ok()) continue;
        ++ok;
        EXPECT_TRUE(verify_expansion(g, H, *r).empty());
        // independent recheck of the expansion
        std::set<Vertex> used(r->vertex_image.begin(), r->vertex_image.end());
        used.insert(r->edge_image.begin(), r->edge_image.end());
        EXPECT_EQ(used.size(), H.n() + H.edge_count());
        for (std::size_t e = 0; e < H.edge_count(); ++e)
            EXPECT_TRUE(g.has_edge(r->vertex_image[H.edge(e).u], r->vertex_image[H.edge(e).v], r->edge_image[e]));
    }
    EXPECT_GE(ok, 7);
}

TEST(Expansion, TooLargePatternIsRejected) {
    ThreeGraph g(6);
    EXPECT_THROW(expand_embed_3graph(g, cycle_graph(4), SplitPlan{}, 1), Error);
}

TEST(Expansion, VerifierRejectsMissingTriple) {
    ThreeGraph g(3);
    PatternGraph H(2);
    H.add_edge(0, 1);
    ExpansionEmbedding x;
    x.vertex_image = {0, 1};
    x.edge_image = {2};
    EXPECT_FALSE(verify_expansion(g, H, x).empty());
    g.add_edge(0, 1, 2);
    EXPECT_TRUE(verify_expansion(g, H, x).empty());
    x.edge_image = {1};
    EXPECT_FALSE(verify_expansion(g, H, x).empty());
}
