#include <gtest/gtest.h>

#include "tvb/generators.hpp"
#include "tvb/oracle.hpp"

using namespace tvb;

namespace {

GenSpec spec(std::size_t n, std::size_t k, double p, std::uint64_t seed, std::string construction = "random") {
    GenSpec s;
    s.n = n;
    s.colours = k;
    s.density = p;
    s.seed = seed;
    s.construction = std::move(construction);
    return s;
}

bool same_collection(const GraphCollection& a, const GraphCollection& b) {
    if (a.n() != b.n() || a.colours() != b.colours()) return false;
    for (Colour c = 0; c < a.colours(); ++c)
        if (a.edges(c) != b.edges(c)) return false;
    return true;
}

}  // namespace

TEST(RandomCollection, DensityExtremes) {
    auto empty = random_collection(spec(10, 4, 0.0, 1));
    EXPECT_EQ(empty.total_edges(), 0u);
    auto full = random_collection(spec(10, 4, 1.0, 1));
    EXPECT_EQ(full.total_edges(), 4u * 45u);
    EXPECT_DOUBLE_EQ(collection_density(full), 1.0);
}

TEST(RandomCollection, EdgeCountWithinThreeSigma) {
    const double p = 0.3;
    const double slots = 45.0 * 20.0;
    const double sd = std::sqrt(slots * p * (1 - p));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto gc = random_collection(spec(10, 20, p, seed));
        EXPECT_NEAR(static_cast<double>(gc.total_edges()), slots * p, 3 * sd) << seed;
    }
}

TEST(RandomCollection, SeedDeterminesOutput) {
    EXPECT_TRUE(same_collection(random_collection(spec(12, 5, 0.4, 7)), random_collection(spec(12, 5, 0.4, 7))));
    EXPECT_FALSE(same_collection(random_collection(spec(12, 5, 0.4, 7)), random_collection(spec(12, 5, 0.4, 8))));
}

TEST(RandomCollection, InvalidSpecRejected) {
    EXPECT_THROW(generate_collection(spec(0, 3, 0.5, 1)), Error);
    EXPECT_THROW(generate_collection(spec(5, 3, 1.5, 1)), Error);
    EXPECT_THROW(generate_collection(spec(5, 3, 0.5, 1, "nope")), Error);
}

TEST(RandomBipartite, EdgesStayAcrossSides) {
    auto gc = random_bipartite_collection(5, 7, 3, 0.6, 2);
    EXPECT_EQ(gc.n(), 12u);
    for (Colour c = 0; c < 3; ++c)
        for (const Edge& e : gc.edges(c)) EXPECT_TRUE((e.u < 5) != (e.v < 5));
    auto g = random_bipartite_graph(5, 7, 1.0, 2);
    EXPECT_EQ(g.edge_count(), 35u);
}

TEST(CyclicTriangle, NoMonochromaticTriangles) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto gc = cyclic_triangle_collection(12, seed);
        EXPECT_EQ(count_monochromatic_triangles(gc), 0u) << seed;
    }
}

TEST(CyclicTriangle, EdgesAreDirectedTriangles) {
    auto T = random_tournament(15, 3);
    auto gc = collection_from_tournament(T, 10, 5);
    for (Colour c = 0; c < 5; ++c)
        for (Vertex x = 0; x < 10; ++x)
            for (Vertex y = 0; y < 10; ++y) {
                if (x == y) continue;
                const std::size_t z = 10 + c;
                // recount: x->y->z->x in one of the two orientations
                const bool cyc = (T.arc(x, y) && T.arc(y, z) && T.arc(z, x)) || (T.arc(y, x) && T.arc(x, z) && T.arc(z, y));
                EXPECT_EQ(gc.has_edge(c, x, y), cyc);
            }
}

TEST(CyclicTriangle, ReversalKeepsTheCollection) {
    // reversing every arc maps directed triangles onto directed triangles
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto T = random_tournament(16, seed);
        auto a = collection_from_tournament(T, 8, 8);
        auto b = collection_from_tournament(reversed(T), 8, 8);
        for (Colour c = 0; c < 8; ++c) EXPECT_EQ(a.edges(c).size(), b.edges(c).size());
        EXPECT_TRUE(same_collection(a, b));
    }
}

TEST(CyclicTriangle, DensityNearOneQuarter) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) sum += collection_density(cyclic_triangle_collection(40, seed));
    EXPECT_NEAR(sum / 10, 0.25, 0.05);
}

TEST(CyclicTriangle, TournamentIsAntisymmetric) {
    auto T = random_tournament(9, 4);
    for (std::size_t x = 0; x < 9; ++x)
        for (std::size_t y = 0; y < 9; ++y)
            if (x != y) {
                EXPECT_NE(T.arc(x, y), T.arc(y, x));
            }
}

TEST(Parity, EdgeRuleRecount) {
    const std::size_t k = 3;
    auto J = random_tripartite_graph(k, 5);
    Bitset X(3 * k);
    X.set(0);
    X.set(4);
    X.set(8);
    auto inst = parity_threegraph_from(k, J, X);
    for (Vertex a = 0; a < k; ++a)
        for (Vertex b = k; b < 2 * k; ++b)
            for (Vertex c = 2 * k; c < 3 * k; ++c) {
                const int inside = J[a].test(b) + J[a].test(c) + J[b].test(c);
                const int parity = X.test(a) + X.test(b) + X.test(c);
                const bool expect = parity % 2 == 0 ? inside == 3 : inside == 0;
                EXPECT_EQ(inst.graph.has_edge(a, b, c), expect);
            }
}

TEST(Parity, ComplementingJAndFlippingXTogetherPreservesEdges) {
    // flipping X on a whole part swaps the parity of every transversal
    // triple; complementing J swaps triangles with independent triples
    const std::size_t k = 3;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto J = random_tripartite_graph(k, seed);
        Bitset X(3 * k);
        X.set(1);
        X.set(5);
        Bitset Xf = X;
        for (Vertex v = 0; v < k; ++v) Xf.flip(v);
        auto a = parity_threegraph_from(k, J, X);
        auto both = parity_threegraph_from(k, tripartite_complement(J, k), Xf);
        auto x_only = parity_threegraph_from(k, J, Xf);
        std::set<Triple> ea(a.graph.edges().begin(), a.graph.edges().end());
        std::set<Triple> eb(both.graph.edges().begin(), both.graph.edges().end());
        EXPECT_EQ(ea, eb) << seed;
        // flipping X alone yields a disjoint edge set
        for (const Triple& t : x_only.graph.edges()) EXPECT_FALSE(ea.count(t)) << seed;
    }
}

TEST(Parity, ComplementIsInvolution) {
    const std::size_t k = 4;
    auto J = random_tripartite_graph(k, 3);
    auto back = tripartite_complement(tripartite_complement(J, k), k);
    EXPECT_EQ(back, J);
    auto C = tripartite_complement(J, k);
    for (Vertex u = 0; u < 3 * k; ++u) {
        EXPECT_FALSE(C[u].test(u));
        for (Vertex v = 0; v < 3 * k; ++v)
            if (u / k == v / k) {
                EXPECT_FALSE(C[u].test(v));
            }
    }
}

TEST(Parity, EmptyXDensityNearOneEighth) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) sum += tripartite_density(parity_threegraph(20, Bitset(60), seed).graph, 20);
    EXPECT_NEAR(sum / 5, 0.125, 0.05);
}

TEST(Parity, LabelsMarkParts) {
    auto inst = parity_threegraph(3, Bitset(9), 1);
    ASSERT_TRUE(inst.graph.partition_labels().has_value());
    const auto& L = *inst.graph.partition_labels();
    for (Vertex v = 0; v < 9; ++v) EXPECT_EQ(L[v], static_cast<int>(v / 3));
}

TEST(Expansion, CountsAndLinearity) {
    auto H = cycle_graph(5);
    auto g = one_expansion(H);
    EXPECT_EQ(g.n(), 10u);
    EXPECT_EQ(g.edge_count(), 5u);
    EXPECT_TRUE(is_linear(g));
    auto g2 = one_expansion(H, 2);
    EXPECT_EQ(g2.n(), 15u);
    EXPECT_EQ(g2.edge_count(), 10u);
    EXPECT_FALSE(is_linear(g2));  // two 3-edges share the pair xy
}

TEST(Expansion, CycleBecomesLooseCycle) {
    auto g = one_expansion(cycle_graph(6));
    // original vertices have degree 2, new vertices degree 1, consecutive
    // 3-edges share exactly one vertex
    for (Vertex v = 0; v < 6; ++v) EXPECT_EQ(g.degree(v), 2u);
    for (Vertex v = 6; v < 12; ++v) EXPECT_EQ(g.degree(v), 1u);
    const auto& es = g.edges();
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = i + 1; j < es.size(); ++j) {
            int common = 0;
            for (Vertex a : es[i])
                for (Vertex b : es[j]) common += a == b;
            EXPECT_LE(common, 1);
        }
}

TEST(Patterns, BasicShapes) {
    EXPECT_EQ(path_graph(5).edge_count(), 4u);
    EXPECT_EQ(cycle_graph(5).edge_count(), 5u);
    EXPECT_EQ(complete_graph(5).edge_count(), 10u);
    EXPECT_EQ(factor_of(complete_graph(3), 4).n(), 12u);
    EXPECT_EQ(factor_of(complete_graph(3), 4).edge_count(), 12u);
    EXPECT_EQ(cycle_union({3, 4, 5}).n(), 12u);
    EXPECT_EQ(cycle_union({3, 4, 5}).edge_count(), 12u);
    auto sq = hamilton_power(10, 2);
    EXPECT_EQ(sq.edge_count(), 20u);
    for (Vertex v = 0; v < 10; ++v) EXPECT_EQ(sq.degree(v), 4u);
}

TEST(Patterns, RandomTreeIsATreeWithBoundedDegree) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto T = random_tree(30, 3, seed);
        EXPECT_EQ(T.edge_count(), 29u);
        EXPECT_LE(T.max_degree(), 3u);
        std::vector<char> removed(30, 0);
        EXPECT_EQ(components_without(T, removed).size(), 1u);
    }
}

TEST(Families, BandwidthWitness) {
    FamilySpec fs;
    fs.kind = "bandwidth-b";
    fs.n = 30;
    fs.k = 2;
    auto inst = separable_family(fs);
    EXPECT_LE(bandwidth_of_order(inst.pattern), 2u);
    ASSERT_TRUE(inst.certificate.has_value());
    EXPECT_TRUE(check_certificate(inst.pattern, *inst.certificate, fs.mu));
}

TEST(Families, HamiltonSquareIsSeparable) {
    FamilySpec fs;
    fs.kind = "hamilton-power";
    fs.n = 20;
    fs.k = 2;
    fs.mu = 0.3;
    auto inst = separable_family(fs);
    ASSERT_TRUE(inst.certificate.has_value());
    EXPECT_TRUE(check_certificate(inst.pattern, *inst.certificate, 0.3));
}

TEST(Families, TriangleFactorNeedsNoSeparator) {
    FamilySpec fs;
    fs.copies = 5;
    auto inst = separable_family(fs);
    EXPECT_EQ(inst.pattern.n(), 15u);
    ASSERT_TRUE(inst.certificate.has_value());
    EXPECT_TRUE(inst.certificate->separator.empty());
}

TEST(Families, UnknownKindRejected) {
    FamilySpec fs;
    fs.kind = "wheel";
    EXPECT_THROW(separable_family(fs), Error);
}

TEST(MantelHost, ShapeAndEdgeCount) {
    for (std::size_t n : {6u, 7u, 10u}) {
        auto gc = mantel_extremal(n, 2);
        EXPECT_EQ(gc.edges(0).size(), n * n / 4);
        EXPECT_EQ(gc.edges(1), gc.edges(0));
        EXPECT_EQ(count_monochromatic_triangles(gc), 0u);
    }
}

TEST(Dispatch, ConstructionsRoute) {
    EXPECT_TRUE(same_collection(generate_collection(spec(7, 2, 0.5, 1, "mantel")), mantel_extremal(7, 2)));
    EXPECT_TRUE(same_collection(generate_collection(spec(9, 9, 0.5, 3, "cyclic-triangle")), cyclic_triangle_collection(9, 3, 9)));
    EXPECT_TRUE(same_collection(generate_collection(spec(10, 3, 0.5, 2, "random-bipartite")), random_bipartite_collection(5, 5, 3, 0.5, 2)));
}

TEST(Threshold, ConstantValue) { EXPECT_NEAR(kRainbowTriangleThreshold, 0.2557, 1e-4); }
