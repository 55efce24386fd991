#include <gtest/gtest.h>

#include "actk/audit.hpp"

using namespace actk;

namespace {

json with_group(const Group& g) { return group_to_json(g); }

elem_t basis(const Group& g, std::size_t i) {
    std::vector<std::int64_t> c(g.rank(), 0);
    c[i] = 1;
    return g.from_coords(c);
}

}  // namespace

TEST(Audit, ShkredovEntryHoldsOnRandomInstances) {
    Rng rng(1);
    for (int t = 0; t < 20; ++t) {
        auto g = Group::cyclic(211);
        GSet a = detail::nonempty_random_set(g, 0.05 + 0.3 * rng.uniform(), rng);
        const double eta = 0.1 + 0.2 * rng.uniform();
        auto spec = set_spectrum(a, eta).members;
        json j = with_group(g);
        j["A"] = a.elements();
        j["eta"] = eta;
        j["Delta"] = detail::random_subset(spec, 1 + rng.below(spec.size()), rng).elements();
        j["m"] = 1 + t % 3;
        auto e = audit("shenergy", j);
        EXPECT_TRUE(e.certified);
        EXPECT_EQ(e.verdict, "holds");
        EXPECT_GE(e.ratio, 1 - 1e-12);
        EXPECT_EQ(e.constant, 1);
    }
    // Delta outside the spectrum is a hypothesis failure, not a verdict
    auto g = Group::cyclic(31);
    json j = with_group(g);
    j["A"] = std::vector<elem_t>{0, 1, 2};
    j["eta"] = 0.99;
    j["Delta"] = std::vector<elem_t>{5};
    j["m"] = 2;
    EXPECT_EQ(audit("shenergy", j).verdict, "hypothesis-unmet");
}

TEST(Audit, EnergyChainAndCubeBound) {
    Rng rng(2);
    auto g = Group::elementary(3, 4);
    for (int t = 0; t < 10; ++t) {
        json j = with_group(g);
        j["Delta"] = detail::nonempty_random_set(g, 0.2, rng).elements();
        auto e = audit("e8_ge_e4cubed", j);
        EXPECT_EQ(e.verdict, "holds");
        j["Gamma"] = std::vector<elem_t>{0, static_cast<elem_t>(1 + rng.below(80))};
        j["n"] = 2;
        j["m"] = 4;
        EXPECT_EQ(audit("energy_chain", j).verdict, "holds");
    }
    // a subgroup is the equality case of e_8 >= e_4^3
    json s = with_group(g);
    s["Delta"] = generated_subgroup(g, {basis(g, 0), basis(g, 1)}).elements();
    auto e = audit("e8_ge_e4cubed", s);
    EXPECT_NEAR(e.ratio, 1.0, 1e-12);
}

TEST(Audit, OrthogonalBesselParsevalCase) {
    auto g = Group::elementary(3, 4);
    auto h = generated_subgroup(g, {basis(g, 0), basis(g, 1)});
    json j = with_group(g);
    j["A"] = h.elements();
    j["eta"] = 1.0;
    j["Delta"] = annihilator(h).elements();  // the full 1-spectrum, 9 = eta^-2 alpha^-1
    auto e = audit("orthbessel", j);
    EXPECT_TRUE(e.certified);
    EXPECT_EQ(e.verdict, "holds");
    EXPECT_NEAR(e.ratio, 1.0, 1e-12);
    EXPECT_EQ(e.constant, 1);
    // relative form is ratio-only
    j["Bprime"] = {{"frequencies", {1}}, {"widths", {1.0}}};
    auto r = audit("orthbessel", j);
    EXPECT_FALSE(r.certified);
    EXPECT_NE(r.verdict, "fails");
}

TEST(Audit, ParsevalSpectrumEquality) {
    auto g = Group::elementary(3, 4);
    auto h = generated_subgroup(g, {basis(g, 2), basis(g, 3)});
    json j = with_group(g);
    j["A"] = translate(h, basis(g, 0)).elements();
    j["eta"] = 1.0;
    auto e = audit("parseval_spectrum", j);
    EXPECT_EQ(e.lhs, 9);
    EXPECT_NEAR(*e.rhs, 9, 1e-9);
    EXPECT_EQ(e.verdict, "holds");
}

TEST(Audit, DissociatedEnergy) {
    auto g = Group::elementary(2, 3);
    json j = with_group(g);
    j["Gamma"] = std::vector<elem_t>{0};
    j["m"] = 2;
    j["Lambda"] = std::vector<elem_t>{1, 2, 4};
    auto e = audit("dimenergy", j);
    EXPECT_EQ(e.verdict, "holds");
    EXPECT_EQ(e.constant, std::pow(2.0, 14) * 6);
    j["Lambda"] = std::vector<elem_t>{1, 2, 3, 4, 5, 6, 7};
    EXPECT_EQ(audit("dimenergy", j).verdict, "hypothesis-unmet");
}

TEST(Audit, CollapserEqualityAndOrthogonality) {
    auto g = Group::cyclic(23);
    json j = with_group(g);
    // summing over the whole group with trivial Gamma, Gamma' is an equality case
    j["A"] = GSet::full(g).elements();
    j["Gamma"] = std::vector<elem_t>{0};
    j["GammaP"] = std::vector<elem_t>{0};
    j["f"] = json::array({{1, 2}, {7, 3}});
    j["g"] = json::array({{1, 1}, {8, 5}});
    j["a"] = 3;
    j["b"] = 3;
    auto e = audit("collapser", j);
    EXPECT_EQ(e.verdict, "holds");
    EXPECT_EQ(e.detail["lhs_exact"], e.detail["rhs_exact"]);
    EXPECT_NE(e.detail["lhs_exact"], "0");
    j["A"] = std::vector<elem_t>{4, 5};
    j["GammaP"] = std::vector<elem_t>{0, 1};
    EXPECT_EQ(audit("collapser", j).verdict, "hypothesis-unmet");
}

TEST(Audit, BohrEntries) {
    auto g = Group::cyclic(2003);
    auto b = regularize(bohr_build(g, {1, 7}, {0.9, 1.3}));
    json j = with_group(g);
    j["B"] = detail::bohr_spec(b);
    j["rel"] = 1.0 / 200;
    auto conv = audit("regconv", j);
    EXPECT_EQ(conv.verdict, "holds");
    EXPECT_EQ(conv.constant, 200);
    j["rel"] = 0.5;
    EXPECT_EQ(audit("regconv", j).verdict, "hypothesis-unmet");
    for (double rel : {0.5, 0.1, 0.01}) {
        j["rel"] = rel;
        auto s = audit("bohrsiz", j);
        EXPECT_EQ(s.verdict, "holds");
        EXPECT_GE(s.lhs, s.detail["power_form"].get<double>());
    }
    j["rel"] = 0.1;
    j["delta"] = 0.3;
    auto p2 = audit("bohrspectra2", j);
    EXPECT_EQ(p2.verdict, "holds-with-ratio");
    EXPECT_GT(p2.ratio, 0);
    // the proof constant 200 bounds the measured ratio
    EXPECT_LE(p2.ratio, 200);
    j["eps"] = 0.2;
    auto p4 = audit("bohrspectra4", j);
    EXPECT_GT(p4.ratio, 0);
    EXPECT_LE(p4.ratio, 400);
}

TEST(Audit, MeshulamOnCapset) {
    auto g = Group::elementary(3, 4);
    auto cap = find_ap_free_set(g, 20, {0, 1, 3, 9, 27});
    ASSERT_TRUE(cap.has_value());
    json j = with_group(g);
    j["A"] = cap->elements();
    auto e = audit("meshulam", j);
    EXPECT_EQ(e.verdict, "holds");
    EXPECT_EQ(e.constant, 0.5);
    j["A"] = GSet::full(g).elements();
    EXPECT_EQ(audit("meshulam", j).verdict, "hypothesis-unmet");
    EXPECT_THROW(audit("meshulam", [] {
                     json k = with_group(Group::cyclic(8));
                     k["A"] = std::vector<elem_t>{1};
                     return k;
                 }()),
                 SchemaError);
}

TEST(Audit, StructPieceOnCosets) {
    auto g = Group::elementary(2, 6);
    auto h = generated_subgroup(g, {basis(g, 0), basis(g, 1), basis(g, 2)});
    GSet d = h;
    d |= translate(h, basis(g, 3));
    json j = with_group(g);
    j["Delta"] = d.elements();
    j["DeltaP"] = h.elements();
    j["Gamma"] = std::vector<elem_t>{0};
    // S = popular differences: both cosets of H meet their translates fully
    GSet s = h;
    s |= translate(h, basis(g, 3));
    j["S"] = s.elements();
    j["delta"] = 0.5;
    j["tau"] = 0.5;
    auto e = audit("structpiece", j);
    EXPECT_EQ(e.verdict, "holds-with-ratio");
    // <1_H, 1_S * 1_Delta> = 8 * 16 against tau |Delta|^2 = 128
    EXPECT_EQ(e.lhs, 128);
    EXPECT_NEAR(e.ratio, 1.0, 1e-12);
}

TEST(Audit, ErrorsNameTheProblem) {
    auto g = Group::cyclic(11);
    json j = with_group(g);
    EXPECT_THROW(audit("no_such_lemma", j), SchemaError);
    EXPECT_THROW(audit("shenergy", j), SchemaError);
    j["A"] = "not a set";
    j["eta"] = 0.5;
    j["Delta"] = std::vector<elem_t>{0};
    j["m"] = 1;
    EXPECT_THROW(audit("shenergy", j), SchemaError);
    j["A"] = std::vector<elem_t>{0, 1};
    j["m"] = "two";
    EXPECT_THROW(audit("shenergy", j), SchemaError);
    j["m"] = 1;
    j["A"] = std::vector<elem_t>{0, 11};
    EXPECT_THROW(audit("shenergy", j), SchemaError);
    EXPECT_THROW(audit("shenergy", json::array()), SchemaError);
}

TEST(AuditSuite, CertifiedEntriesHoldAndRatiosArePositive) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto b = audit_suite(seed, {101, 401});
        EXPECT_EQ(b.certified_failures, 0u);
        EXPECT_EQ(b.nonpositive_ratios, 0u);
        std::size_t certified_holds = 0;
        for (const auto& r : b.rows) {
            if (!r.entry.certified) {
                EXPECT_NE(r.entry.verdict, "fails") << r.lemma;
            }
            if (r.entry.certified && r.entry.verdict == "holds") ++certified_holds;
        }
        EXPECT_GT(certified_holds, 10u);
        // every registry entry appears for every size
        std::set<std::string> seen;
        for (const auto& r : b.rows) seen.insert(r.lemma);
        EXPECT_EQ(seen.size(), audit_registry().size());
    }
}

TEST(AuditSuite, DeterministicAndRecomputable) {
    auto a = audit_suite(7, {101, 401}, 1);
    auto b = audit_suite(7, {101, 401}, 4);
    EXPECT_EQ(audit_csv(a), audit_csv(b));
    EXPECT_EQ(audit_bundle_to_json(a).dump(), audit_bundle_to_json(b).dump());
    EXPECT_NE(audit_csv(a), audit_csv(audit_suite(8, {101, 401})));
    // every row re-evaluates from its serialized instance
    const json bundle = json::parse(audit_bundle_to_json(a).dump());
    for (const auto& row : bundle["rows"]) {
        auto e = audit(row["lemma"].get<std::string>(), row["instance"]);
        EXPECT_EQ(audit_to_json(e).dump(), row["result"].dump()) << row["lemma"];
    }
    auto empty = audit_suite(7, {});
    EXPECT_TRUE(empty.rows.empty());
    EXPECT_EQ(audit_csv(empty), "lemma,size,variant,tier,verdict,lhs,rhs,ratio\n");
}

TEST(AuditSuite, BaselineComparison) {
    auto a = audit_suite(7, {101});
    const std::string csv = audit_csv(a);
    EXPECT_TRUE(compare_baseline(csv, a).empty());
    auto moved = a;
    for (auto& r : moved.rows)
        if (r.lemma == "specboost1") r.entry.ratio *= 3;
    auto flags = compare_baseline(csv, moved);
    ASSERT_EQ(flags.size(), 1u);
    EXPECT_EQ(flags[0].key, "specboost1/101/0");
}
