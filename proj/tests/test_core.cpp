#include <gtest/gtest.h>

#include "tvb/core.hpp"
#include "tvb/generators.hpp"
#include "tvb/oracle.hpp"

using namespace tvb;

namespace {

GraphCollection small_random(std::size_t n, std::size_t k, std::uint64_t seed, double p = 0.5) {
    GenSpec s;
    s.n = n;
    s.colours = k;
    s.density = p;
    s.seed = seed;
    return random_collection(s);
}

Bitset range_bits(std::size_t universe, std::size_t lo, std::size_t hi) {
    Bitset b(universe);
    for (std::size_t v = lo; v < hi; ++v) b.set(v);
    return b;
}

// Independent recheck of an embedding by scanning H-edge by H-edge.
bool recheck(const GraphCollection& gc, const PatternGraph& H, const TransversalEmbedding& emb) {
    if (emb.tau.size() != H.n() || emb.sigma.size() != H.edge_count()) return false;
    std::set<Vertex> vs(emb.tau.begin(), emb.tau.end());
    std::set<Colour> cs(emb.sigma.begin(), emb.sigma.end());
    if (vs.size() != emb.tau.size() || cs.size() != emb.sigma.size()) return false;
    for (std::size_t e = 0; e < H.edge_count(); ++e) {
        const auto [x, y] = H.edge(e);
        if (emb.tau[x] >= gc.n() || emb.tau[y] >= gc.n() || emb.sigma[e] >= gc.colours()) return false;
        if (!gc.nbrs(emb.sigma[e], emb.tau[x]).test(emb.tau[y])) return false;
    }
    for (const auto& [x, T] : H.targets())
        if (std::find(T.begin(), T.end(), emb.tau[x]) == T.end()) return false;
    return true;
}

}  // namespace

TEST(ThreeGraphView, EmptyCollectionHasColourVerticesAndNoEdges) {
    GraphCollection gc(3, 2);
    auto view = to_three_graph(gc);
    EXPECT_EQ(view.graph.n(), 5u);
    EXPECT_EQ(view.graph.edge_count(), 0u);
}

TEST(ThreeGraphView, SingleEdgeGivesSingleTriple) {
    GraphCollection gc(4, 2);
    gc.add_edge(1, 0, 3);
    auto view = to_three_graph(gc);
    ASSERT_EQ(view.graph.edge_count(), 1u);
    EXPECT_TRUE(view.graph.has_edge(0, 3, 4 + 1));
}

TEST(ThreeGraphView, EdgeCountMatchesRecount) {
    auto gc = small_random(8, 5, 1);
    std::size_t recount = 0;
    for (Colour c = 0; c < gc.colours(); ++c)
        for (Vertex u = 0; u < gc.n(); ++u)
            for (Vertex v = u + 1; v < gc.n(); ++v) recount += gc.has_edge(c, u, v);
    EXPECT_EQ(to_three_graph(gc).graph.edge_count(), recount);
}

TEST(ThreeGraphView, RoundTripIsIdentity) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::size_t n = 2 + seed % 5, k = 1 + seed % 4;
        auto gc = small_random(n, k, seed);
        auto view = to_three_graph(gc);
        auto back = from_three_graph(view.graph, range_bits(n + k, 0, n), range_bits(n + k, n, n + k));
        ASSERT_EQ(back.n(), gc.n());
        ASSERT_EQ(back.colours(), gc.colours());
        for (Colour c = 0; c < k; ++c) {
            auto a = gc.edges(c), b = back.edges(c);
            EXPECT_EQ(a, b) << "seed " << seed << " colour " << c;
        }
    }
}

TEST(ThreeGraphView, FromThreeGraphSingleton) {
    ThreeGraph g(3);
    g.add_edge(0, 1, 2);
    auto gc = from_three_graph(g, range_bits(3, 0, 2), range_bits(3, 2, 3));
    EXPECT_TRUE(gc.has_edge(0, 0, 1));
    EXPECT_EQ(gc.total_edges(), 1u);
}

TEST(ThreeGraphView, EdgeInsideVertexSideIsRejected) {
    ThreeGraph g(4);
    g.add_edge(0, 1, 2);
    try {
        from_three_graph(g, range_bits(4, 0, 3), range_bits(4, 3, 4));
        FAIL() << "expected EdgeStraddlesSides";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), "EdgeStraddlesSides");
    }
}

TEST(Collection, BipartitionIsEnforced) {
    GraphCollection gc(4, 1);
    gc.declare_bipartition(0, range_bits(4, 0, 2), range_bits(4, 2, 4));
    gc.add_edge(0, 0, 3);
    EXPECT_THROW(gc.add_edge(0, 0, 1), Error);
}

TEST(Verifier, AcceptsRainbowTriangle) {
    GraphCollection gc(3, 3);
    gc.add_edge(0, 0, 1);
    gc.add_edge(1, 1, 2);
    gc.add_edge(2, 0, 2);
    PatternGraph H(3);
    H.add_edge(0, 1);
    H.add_edge(1, 2);
    H.add_edge(0, 2);
    TransversalEmbedding emb{{0, 1, 2}, {0, 1, 2}};
    auto rep = verify_transversal_embedding(gc, H, emb);
    EXPECT_TRUE(rep.accepted);
    EXPECT_TRUE(rep.violations.empty());
}

TEST(Verifier, RejectsColourCollision) {
    GraphCollection gc(3, 3);
    for (Colour c = 0; c < 3; ++c) {
        gc.add_edge(c, 0, 1);
        gc.add_edge(c, 1, 2);
        gc.add_edge(c, 0, 2);
    }
    PatternGraph H(3);
    H.add_edge(0, 1);
    H.add_edge(1, 2);
    H.add_edge(0, 2);
    TransversalEmbedding emb{{0, 1, 2}, {0, 0, 2}};
    auto rep = verify_transversal_embedding(gc, H, emb);
    EXPECT_FALSE(rep.accepted);
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_NE(rep.violations.front().find("sigma not injective"), std::string::npos);
}

TEST(Verifier, ChecksTargets) {
    GraphCollection gc(3, 1);
    gc.add_edge(0, 0, 1);
    PatternGraph H(2);
    H.add_edge(0, 1);
    H.set_target(0, {1});
    EXPECT_FALSE(verify_transversal_embedding(gc, H, {{0, 1}, {0}}).accepted);
    EXPECT_TRUE(verify_transversal_embedding(gc, H, {{1, 0}, {0}}).accepted);
}

TEST(Verifier, OracleEmbeddingsVerifyAndMatchIndependentRecheck) {
    int found = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto gc = small_random(7, 6, seed, 0.6);
        auto H = cycle_graph(5);
        auto r = exact_transversal_embed(gc, H);
        if (r.status != OracleStatus::found) continue;
        ++found;
        EXPECT_TRUE(verify_transversal_embedding(gc, H, *r.embedding).accepted);
        EXPECT_TRUE(recheck(gc, H, *r.embedding));
    }
    EXPECT_GT(found, 0);
}

TEST(Verifier, AgreesWithRecheckOnRandomMaps) {
    Rng rng(5);
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto gc = small_random(5, 4, seed, 0.7);
        auto H = path_graph(4);
        TransversalEmbedding emb;
        for (Vertex x = 0; x < H.n(); ++x) emb.tau.push_back(static_cast<Vertex>(rng.below(5)));
        for (std::size_t e = 0; e < H.edge_count(); ++e) emb.sigma.push_back(static_cast<Colour>(rng.below(4)));
        EXPECT_EQ(verify_transversal_embedding(gc, H, emb).accepted, recheck(gc, H, emb)) << seed;
    }
}

TEST(Separability, DisjointCyclesNeedNoSeparator) {
    auto H = cycle_union(std::vector<std::size_t>(10, 4));
    auto cert = separability_certificate(H, 0.2);
    ASSERT_TRUE(cert.has_value());
    EXPECT_TRUE(cert->separator.empty());
    EXPECT_TRUE(check_certificate(H, *cert, 0.2));
}

TEST(Separability, LongPathIsCertified) {
    auto H = path_graph(100);
    auto cert = separability_certificate(H, 0.1);
    ASSERT_TRUE(cert.has_value());
    EXPECT_LE(cert->separator.size(), 10u);
    for (const auto& comp : cert->components) EXPECT_LE(comp.size(), 10u);
    // independent component scan
    std::vector<char> removed(H.n(), 0);
    for (Vertex x : cert->separator) removed[x] = 1;
    for (const auto& comp : components_without(H, removed)) EXPECT_LE(comp.size(), 10u);
}

TEST(Separability, CompleteGraphIsNotCertified) {
    EXPECT_FALSE(separability_certificate(complete_graph(10), 0.2).has_value());
}

TEST(Separability, ComponentsPartitionTheRemainder) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto H = random_tree(40, 3, seed);
        auto cert = separability_certificate(H, 0.25);
        ASSERT_TRUE(cert.has_value()) << seed;
        std::vector<int> seen(H.n(), 0);
        for (Vertex x : cert->separator) ++seen[x];
        for (const auto& c : cert->components)
            for (Vertex x : c) ++seen[x];
        for (int s : seen) EXPECT_EQ(s, 1);
    }
}
