#include <gtest/gtest.h>

#include "tvb/generators.hpp"
#include "tvb/regularity.hpp"

using namespace tvb;

namespace {

std::vector<Vertex> iota_vec(Vertex lo, Vertex hi) {
    std::vector<Vertex> v;
    for (Vertex x = lo; x < hi; ++x) v.push_back(x);
    return v;
}

GraphCollection bipartite_random(std::size_t side, std::size_t k, double p, std::uint64_t seed) {
    return random_bipartite_collection(side, side, k, p, seed);
}

Rational R(std::int64_t a, std::int64_t b = 1) { return Rational(BigInt(a), BigInt(b)); }

ParameterLedger ledger(Rational m, Rational eps, Rational d, Rational delta, RegularityMode klass) {
    ParameterLedger L;
    L.m = m;
    L.epsilon = eps;
    L.d = d;
    L.delta = delta;
    L.klass = klass;
    return L;
}

KPartiteGraph complete_tripartite(std::size_t s) {
    KPartiteGraph g;
    g.universe = 3 * s;
    for (std::size_t i = 0; i < 3; ++i) g.parts.push_back(iota_vec(static_cast<Vertex>(i * s), static_cast<Vertex>((i + 1) * s)));
    for (Vertex a : g.parts[0])
        for (Vertex b : g.parts[1])
            for (Vertex c : g.parts[2]) g.edges.push_back({a, b, c});
    return g;
}

}  // namespace

// ---------------------------------------------------------------- density

TEST(Density, CompleteBipartiteIsOne) {
    SimpleGraph g(5);
    for (Vertex a : {0u, 1u})
        for (Vertex b : {2u, 3u, 4u}) g.add_edge(a, b);
    EXPECT_EQ(density(g, {0, 1}, {2, 3, 4}), R(1));
}

TEST(Density, EmptyTripartiteIsZero) {
    ThreeGraph g(6);
    EXPECT_EQ(density(g, {0, 1}, {2, 3}, {4, 5}), R(0));
}

TEST(Density, OneTripleOverTwoSlots) {
    ThreeGraph g(4);
    g.add_edge(0, 1, 2);
    EXPECT_EQ(density(g, {0}, {1}, {2, 3}), R(1, 2));
}

TEST(Density, EmptyPartIsRejected) {
    SimpleGraph g(3);
    EXPECT_THROW(density(g, {}, {1, 2}), Error);
}

// ---------------------------------------------------------------- witnesses

TEST(IrregularityWitness, CompletePairIsProvedRegular) {
    SimpleGraph g(12);
    for (Vertex a = 0; a < 6; ++a)
        for (Vertex b = 6; b < 12; ++b) g.add_edge(a, b);
    auto r = irregularity_witness(g, iota_vec(0, 6), iota_vec(6, 12), 0.1);
    EXPECT_FALSE(r.witness.has_value());
    EXPECT_TRUE(r.exhaustive);
}

TEST(IrregularityWitness, SplitPairHasWitness) {
    SimpleGraph g(12);
    for (Vertex a = 0; a < 6; ++a)
        for (Vertex b = 6; b < 12; ++b)
            if ((a < 3) == (b < 9)) g.add_edge(a, b);
    auto r = irregularity_witness(g, iota_vec(0, 6), iota_vec(6, 12), 0.3);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_GE(r.witness->deviation, to_rational(0.3));
    // re-scored by density()
    auto obs = density(g, r.witness->subsets[0], r.witness->subsets[1]);
    EXPECT_EQ(obs, r.witness->observed);
    auto ref = density(g, iota_vec(0, 6), iota_vec(6, 12));
    EXPECT_EQ(ref, r.witness->reference);
    EXPECT_EQ(r.witness->deviation, obs > ref ? obs - ref : ref - obs);
}

TEST(IrregularityWitness, RandomPairWitnessesAreGenuine) {
    int none_found = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto g = random_bipartite_graph(12, 12, 0.5, seed);
        auto r = irregularity_witness(g, iota_vec(0, 12), iota_vec(12, 24), 0.45, 2000, seed);
        if (!r.witness) {
            ++none_found;
            continue;
        }
        auto obs = density(g, r.witness->subsets[0], r.witness->subsets[1]);
        EXPECT_EQ(obs, r.witness->observed);
        EXPECT_GE(r.witness->deviation, to_rational(0.45));
    }
    EXPECT_GE(none_found, 5);
}

TEST(IrregularityWitness, SampledWitnessImpliesExhaustiveWitness) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto g = random_bipartite_graph(10, 10, 0.5, seed);
        auto sampled = irregularity_witness(g, iota_vec(0, 10), iota_vec(10, 20), 0.2, 50, seed);
        auto inst = pair_instance(g, iota_vec(0, 10), iota_vec(10, 20));
        auto full = find_witness(inst, 0.2, 50, seed, true);
        EXPECT_TRUE(full.exhaustive);
        if (sampled.witness) {
            EXPECT_TRUE(full.witness.has_value()) << seed;
        }
    }
}

TEST(IrregularityWitness, ThreeGraphWitnessRescoresExactly) {
    ThreeGraph g(9);
    // dense in the first two vertices of every part, empty elsewhere
    for (Vertex a : {0u, 1u})
        for (Vertex b : {3u, 4u})
            for (Vertex c : {6u, 7u}) g.add_edge(a, b, c);
    auto r = irregularity_witness(g, {0, 1, 2}, {3, 4, 5}, {6, 7, 8}, 0.3);
    ASSERT_TRUE(r.witness.has_value());
    const auto& s = r.witness->subsets;
    EXPECT_EQ(density(g, s[0], s[1], s[2]), r.witness->observed);
}

// ---------------------------------------------------------------- classification

TEST(Classify, IdenticalCompleteCollectionIsSuper) {
    auto gc = bipartite_random(5, 4, 1.0, 1);
    DensitySpec spec{1.0, 0.0, 0.2, RegularityMode::super};
    auto rep = classify_collection(gc, iota_vec(0, 5), iota_vec(5, 10), all_colours(gc), spec);
    EXPECT_TRUE(rep.passed);
    EXPECT_EQ(rep.density, R(1));
}

TEST(Classify, EmptyColourFailsSuperOnly) {
    auto gc = bipartite_random(5, 4, 1.0, 1);
    for (Vertex a = 0; a < 5; ++a)
        for (Vertex b = 5; b < 10; ++b) gc.remove_edge(2, a, b);
    DensitySpec spec{0.5, 0.0, 0.3, RegularityMode::super};
    auto rep = classify_collection(gc, iota_vec(0, 5), iota_vec(5, 10), all_colours(gc), spec);
    EXPECT_FALSE(rep.passed);
    ASSERT_EQ(rep.failing_colours.size(), 1u);
    EXPECT_EQ(rep.failing_colours[0], 2u);
    spec.mode = RegularityMode::semi_super;
    EXPECT_TRUE(classify_collection(gc, iota_vec(0, 5), iota_vec(5, 10), all_colours(gc), spec).failing_colours.empty());
}

TEST(Classify, AgreesWithRecount) {
    auto gc = bipartite_random(10, 10, 0.5, 3);
    const auto V1 = iota_vec(0, 10), V2 = iota_vec(10, 20);
    const auto C = all_colours(gc);
    DensitySpec spec{0.4, 0.0, 0.3, RegularityMode::super};
    auto rep = classify_collection(gc, V1, V2, C, spec, 500, 3);
    std::int64_t total = 0;
    std::vector<Vertex> low_v;
    std::vector<Colour> low_c;
    for (Colour c : C) {
        std::int64_t ec = 0;
        for (Vertex a : V1)
            for (Vertex b : V2) ec += gc.has_edge(c, a, b);
        total += ec;
        if (Rational(ec) < to_rational(0.4) * R(100)) low_c.push_back(c);
    }
    for (Vertex v = 0; v < 20; ++v) {
        std::int64_t deg = 0;
        for (Colour c : C)
            for (Vertex w = (v < 10 ? 10 : 0); w < (v < 10 ? 20u : 10u); ++w) deg += gc.has_edge(c, v, w);
        if (Rational(deg) < to_rational(0.4) * R(100)) low_v.push_back(v);
    }
    EXPECT_EQ(rep.density, R(total, 1000));
    EXPECT_EQ(rep.failing_colours, low_c);
    EXPECT_EQ(rep.failing_vertices, low_v);
}

// ---------------------------------------------------------------- typical elements

TEST(TypicalElements, CompleteCollectionHasNone) {
    auto gc = bipartite_random(4, 3, 1.0, 1);
    auto t = typical_elements(gc, iota_vec(0, 4), iota_vec(4, 8), all_colours(gc), DensitySpec{0.9, 0, 0.1, RegularityMode::regular});
    EXPECT_TRUE(t.atypical_v1.empty());
    EXPECT_TRUE(t.atypical_v2.empty());
    EXPECT_TRUE(t.atypical_colours.empty());
}

TEST(TypicalElements, PlantedIsolatedVertexIsAtypical) {
    auto gc = bipartite_random(5, 3, 1.0, 1);
    for (Colour c = 0; c < 3; ++c)
        for (Vertex b = 5; b < 10; ++b) gc.remove_edge(c, 2, b);
    auto t = typical_elements(gc, iota_vec(0, 5), iota_vec(5, 10), all_colours(gc), DensitySpec{0.5, 0, 0.1, RegularityMode::regular});
    ASSERT_EQ(t.atypical_v1.size(), 1u);
    EXPECT_EQ(t.atypical_v1[0], 2u);
}

// ---------------------------------------------------------------- ledger

TEST(Ledger, ProportionalSlice) {
    auto L = ledger_slice(ledger(R(10), R(1, 100), R(2, 5), R(1), RegularityMode::regular), {SliceRuleKind::proportional, R(1, 2)});
    EXPECT_EQ(L.epsilon, R(1, 50));
    EXPECT_EQ(L.d, R(1, 5));
}

TEST(Ledger, NearSpanningSlicePreservesSuper) {
    auto L = ledger_slice(ledger(R(10), R(1, 100), R(2, 5), R(1), RegularityMode::super), {SliceRuleKind::near_spanning, R(1, 2)});
    EXPECT_EQ(L.epsilon, R(1, 50));
    EXPECT_EQ(L.d, R(1, 5));
    EXPECT_EQ(L.klass, RegularityMode::super);
}

TEST(Ledger, RandomSliceSquaresDensity) {
    auto L = ledger_slice(ledger(R(10), R(1, 100), R(2, 5), R(1), RegularityMode::super), {SliceRuleKind::random, R(1, 2)});
    EXPECT_EQ(L.epsilon, R(1, 50));
    EXPECT_EQ(L.d, R(1, 100));
    EXPECT_EQ(L.klass, RegularityMode::super);
}

TEST(Ledger, SparsifyHalfSuperToSuper) {
    auto L = ledger_slice(ledger(R(10), R(1, 100), R(1, 2), R(1), RegularityMode::half_super), {SliceRuleKind::sparsify, R(1), 1, R(1, 20)});
    EXPECT_EQ(L.epsilon, R(1, 20));
    EXPECT_EQ(L.d, R(1, 8));
    EXPECT_EQ(L.klass, RegularityMode::super);
}

TEST(Ledger, TemplateCases) {
    const auto base = ledger(R(40), R(1, 100), R(2, 5), R(1, 2), RegularityMode::super);
    auto i = ledger_slice(base, {SliceRuleKind::template_i, R(1, 2), 3});
    EXPECT_EQ(std::tie(i.m, i.epsilon, i.d, i.delta), std::make_tuple(R(20), R(1, 50), R(1, 5), R(1, 6)));
    auto ii = ledger_slice(base, {SliceRuleKind::template_ii});
    EXPECT_EQ(std::tie(ii.m, ii.epsilon, ii.d, ii.delta), std::make_tuple(R(20), R(1, 50), R(1, 5), R(1, 4)));
    EXPECT_EQ(ii.klass, RegularityMode::super);
    auto iii = ledger_slice(base, {SliceRuleKind::template_iii, R(1, 4), 2});
    EXPECT_EQ(std::tie(iii.m, iii.epsilon, iii.d, iii.delta), std::make_tuple(R(10), R(1, 25), R(1, 100), R(1, 4)));
    auto half = base;
    half.klass = RegularityMode::half_super;
    auto iv = ledger_slice(half, {SliceRuleKind::template_iv, R(1), 1, R(1, 10)});
    EXPECT_EQ(std::tie(iv.m, iv.epsilon, iv.d, iv.delta), std::make_tuple(R(40), R(1, 10), R(2, 25), R(1, 2)));
    EXPECT_EQ(iv.klass, RegularityMode::super);
}

TEST(Ledger, InapplicableRulesThrow) {
    const auto reg = ledger(R(10), R(1, 100), R(2, 5), R(1), RegularityMode::regular);
    EXPECT_THROW(ledger_slice(reg, {SliceRuleKind::random, R(1, 2)}), Error);
    EXPECT_THROW(ledger_slice(reg, {SliceRuleKind::template_iii, R(1, 2)}), Error);
    EXPECT_THROW(ledger_slice(reg, {SliceRuleKind::sparsify, R(1), 1, R(1, 10)}), Error);
    EXPECT_THROW(ledger_slice(reg, {SliceRuleKind::proportional, R(0)}), Error);
}

TEST(Ledger, LineageReplaysToFinalParameters) {
    auto L = ledger(R(64), R(1, 100), R(1, 2), R(1), RegularityMode::half_super);
    L = ledger_slice(L, {SliceRuleKind::template_iv, R(1), 1, R(1, 20)});
    L = ledger_slice(L, {SliceRuleKind::template_ii});
    L = ledger_slice(L, {SliceRuleKind::template_iii, R(1, 3), 2});
    L = ledger_slice(L, {SliceRuleKind::template_i, R(1, 2), 4});
    EXPECT_EQ(L.lineage.size(), 4u);
    EXPECT_TRUE(same_parameters(replay_lineage(L), L));
}

TEST(Ledger, LongChainsStayExact) {
    // repeated squaring would overflow fixed-width rationals
    auto L = ledger(R(1000), R(1, 97), R(3, 7), R(1), RegularityMode::super);
    Rational d = R(3, 7);
    for (int i = 0; i < 6; ++i) {
        L = ledger_slice(L, {SliceRuleKind::random, R(1)});
        d = d * d / R(16);
    }
    EXPECT_EQ(L.d, d);
    EXPECT_GT(L.d, R(0));
}

// ---------------------------------------------------------------- sparsification

TEST(Sparsify, CompleteTripartiteHalvesDensity) {
    auto g = complete_tripartite(4);
    auto out = sparsify_to_superregular(g, 0.1, 0.3, 0.5, 7);
    ASSERT_TRUE(out.ok()) << to_json(out.error()).dump();
    const auto& h = out.value();
    const double dens = to_double(density(h, h.parts));
    EXPECT_NEAR(dens, 0.5, 0.1);
    // never adds edges; degrees shrink
    std::set<std::vector<Vertex>> orig(g.edges.begin(), g.edges.end());
    for (const auto& e : h.edges) EXPECT_TRUE(orig.count(e));
    auto dg = g.degrees(), dh = h.degrees();
    const double floor_deg = 0.5 * 0.5 / 2.0 * 16.0;  // d^2/2 of the 4x4 link
    for (Vertex v = 0; v < g.universe; ++v) {
        EXPECT_LE(dh[v], dg[v]);
        EXPECT_GE(static_cast<double>(dh[v]), floor_deg);
    }
}

TEST(Sparsify, ExactDensityIsIdentity) {
    auto g = complete_tripartite(3);
    auto out = sparsify_to_superregular(g, 0.1, 0.3, 1.0, 3);
    ASSERT_TRUE(out.ok());
    EXPECT_EQ(out.value().edges.size(), g.edges.size());
}

TEST(Sparsify, SeededRunsAreReproducible) {
    auto g = complete_tripartite(4);
    auto a = sparsify_to_superregular(g, 0.1, 0.3, 0.5, 11);
    auto b = sparsify_to_superregular(g, 0.1, 0.3, 0.5, 11);
    ASSERT_TRUE(a.ok() && b.ok());
    EXPECT_EQ(a.value().edges, b.value().edges);
}
