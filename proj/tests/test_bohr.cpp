#include <gtest/gtest.h>

#include "actk/bohr.hpp"
#include "oracles.hpp"

using namespace actk;

namespace {

BohrSet random_bohr(const Group& g, std::size_t d, Rng& rng, double wlo = 0.05, double whi = 1.5) {
    std::vector<elem_t> f;
    std::vector<double> w;
    for (std::size_t i = 0; i < d; ++i) {
        f.push_back(static_cast<elem_t>(1 + rng.below(g.order() - 1)));
        w.push_back(wlo + (whi - wlo) * rng.uniform());
    }
    return bohr_build(g, f, w);
}

// direct membership from |1 - exp(2 pi i theta)|; nullopt when within 1e-9 of a boundary
std::optional<bool> oracle_member(const BohrSet& b, elem_t x, double rho) {
    bool in = true;
    for (std::size_t i = 0; i < b.rank(); ++i) {
        const double v = std::abs(1.0 - oracle::chi(b.group, b.frequencies[i], x));
        const double w = std::min(2.0, rho * b.widths[i]);
        if (std::abs(v - w) < 1e-9) return std::nullopt;
        if (v > w) in = false;
    }
    return in;
}

std::size_t oracle_size(const BohrSet& b, double rho) {
    std::size_t c = 0;
    for (elem_t x = 0; x < b.group.order(); ++x) {
        auto m = oracle_member(b, x, rho);
        if (m && *m) ++c;
    }
    return c;
}

// regularity by definition on a fine kappa grid, using direct chord values
bool oracle_regular(const BohrSet& b, int grid) {
    const std::size_t n = b.group.order();
    std::vector<std::vector<double>> v(b.rank(), std::vector<double>(n));
    for (std::size_t i = 0; i < b.rank(); ++i)
        for (elem_t x = 0; x < n; ++x) v[i][x] = std::abs(1.0 - oracle::chi(b.group, b.frequencies[i], x));
    auto size_at = [&](double rho) {
        std::size_t c = 0;
        for (elem_t x = 0; x < n; ++x) {
            bool in = true;
            for (std::size_t i = 0; i < b.rank() && in; ++i) in = v[i][x] <= std::min(2.0, rho * b.widths[i]) + 1e-12;
            c += in;
        }
        return static_cast<double>(c);
    };
    const double d = static_cast<double>(b.rank());
    const double w = 1.0 / (100 * d);
    const double s0 = size_at(b.rho);
    for (int j = 0; j <= grid; ++j) {
        const double kappa = -w + 2 * w * j / grid;
        const double s = size_at(b.rho * (1 + kappa));
        if (s > (1 + 100 * d * std::abs(kappa)) * s0 + 1e-9) return false;
        if (s < (1 - 100 * d * std::abs(kappa)) * s0 - 1e-9) return false;
    }
    return true;
}

}  // namespace

TEST(BohrBuild, Examples) {
    auto g = Group::cyclic(17);
    EXPECT_EQ(bohr_build(g, {3, 5}, {2.0, 2.0}).size(), 17u);
    EXPECT_EQ(bohr_build(g, {3}, {0.0}).realized.elements(), (std::vector<elem_t>{0}));
    auto z12 = Group::cyclic(12);
    EXPECT_EQ(bohr_build(z12, {4}, {0.0}).realized.elements(), (std::vector<elem_t>{0, 3, 6, 9}));
    EXPECT_THROW(bohr_build(g, {}, {}), PreconditionError);
    EXPECT_THROW(bohr_build(g, {1}, {2.5}), PreconditionError);
}

TEST(BohrBuild, MatchesDirectMembershipAndIsSymmetric) {
    Rng rng(1);
    for (auto g : {Group::cyclic(1009), Group::elementary(3, 5), Group::build({5, 25})}) {
        for (int t = 0; t < 10; ++t) {
            auto b = random_bohr(g, 1 + rng.below(3), rng);
            for (elem_t x = 0; x < g.order(); ++x) {
                auto m = oracle_member(b, x, 1.0);
                if (m) {
                    EXPECT_EQ(b.contains(x), *m);
                }
            }
            EXPECT_TRUE(b.contains(0));
            EXPECT_TRUE(is_symmetric(b.realized));
            // rebuilding from (Gamma, nu) is bit-exact
            EXPECT_EQ(bohr_build(g, b.frequencies, b.widths).realized, b.realized);
        }
    }
}

TEST(BohrBuild, ExactTiesAtRationalChords) {
    // 2 sin(pi/6) = 1: x = 1 in Z/6 with gamma = 1 sits exactly on width 1
    auto g = Group::cyclic(6);
    auto b = bohr_build(g, {1}, {1.0});
    EXPECT_EQ(b.realized.elements(), (std::vector<elem_t>{0, 1, 5}));
    // 2 sin(pi/2) = 2
    auto c = bohr_build(g, {1}, {2.0});
    EXPECT_EQ(c.size(), 6u);
}

TEST(Dilate, NestingAndSizeLemma) {
    Rng rng(2);
    auto g = Group::cyclic(2003);
    for (int t = 0; t < 30; ++t) {
        auto b = random_bohr(g, 1 + rng.below(3), rng);
        EXPECT_EQ(dilate(b, 1.0).realized, b.realized);
        auto half = dilate(b, 0.5);
        EXPECT_TRUE(half.realized.subset_of(b.realized));
        EXPECT_THROW(dilate(b, 0.0), PreconditionError);
        for (double rho : {0.9, 0.5, 0.25, 0.1, 0.03}) {
            auto s = dilate(b, rho);
            const double bound = std::pow(rho / 4, static_cast<double>(b.rank())) * static_cast<double>(b.size());
            EXPECT_GE(static_cast<double>(s.size()), bound);
            EXPECT_GE(static_cast<double>(s.size()), bohr_size_factor(b, s) * static_cast<double>(b.size()));
        }
    }
}

TEST(Dilate, SizeLemmaWithIndependentWidths) {
    Rng rng(3);
    for (auto g : {Group::cyclic(1009), Group::elementary(3, 6), Group::elementary(5, 4)}) {
        for (int t = 0; t < 30; ++t) {
            const std::size_t d = 1 + rng.below(3);
            auto b = random_bohr(g, d, rng, 0.2, 2.0);
            std::vector<double> w2;
            for (double w : b.widths) w2.push_back(w * rng.uniform());
            auto s = bohr_build(g, b.frequencies, w2);
            EXPECT_GE(static_cast<double>(s.size()), bohr_size_factor(b, s) * static_cast<double>(b.size()));
        }
    }
}

TEST(IsRegular, TrivialCases) {
    auto g = Group::cyclic(101);
    EXPECT_TRUE(is_regular(whole_group_bohr(g)).pass);
    EXPECT_TRUE(is_regular(bohr_build(Group::elementary(3, 4), {1, 5, 10}, {2.0, 2.0, 2.0})).pass);
    EXPECT_TRUE(is_regular(bohr_build(Group::elementary(3, 4), {1, 3}, {0.0, 0.0})).pass);
    EXPECT_TRUE(is_regular(bohr_build(Group::cyclic(12), {4}, {0.0})).pass);
}

TEST(IsRegular, WholeGroupWithNonzeroFrequencyCanFail) {
    // nu = 2 on gamma = 1 in Z/1009: the two elements nearest 1009/2 leave B_{1-k} at k ~ 1e-6
    auto b = bohr_build(Group::cyclic(1009), {1}, {2.0});
    EXPECT_EQ(b.size(), 1009u);
    EXPECT_FALSE(is_regular(b).pass);
}

TEST(IsRegular, MatchesBruteForceRecount) {
    Rng rng(4);
    auto g = Group::cyclic(1009);
    int agree = 0, total = 0;
    for (int t = 0; t < 25; ++t) {
        auto b = random_bohr(g, 2, rng);
        auto rep = is_regular(b);
        // near-critical instances can be separated only by breakpoints the grid misses
        if (rep.worst_ratio > 0.8 && rep.worst_ratio < 1.25) continue;
        ++total;
        const bool brute = oracle_regular(b, 4000);
        if (brute == rep.pass) ++agree;
        if (!rep.pass) {
            // a failure must be real: re-evaluate the reported kappa directly
            const double d = 2;
            const double s0 = static_cast<double>(oracle_size(b, b.rho));
            const double k = rep.worst_kappa;
            const double s = static_cast<double>(k > 0 ? oracle_size(b, b.rho * (1 + k)) : oracle_size(b, b.rho * (1 + k) * (1 - 1e-12)));
            EXPECT_GT(std::abs(s / s0 - 1), 100 * d * std::abs(k) * (1 - 1e-9));
        } else {
            EXPECT_TRUE(brute);
        }
    }
    EXPECT_EQ(agree, total);
    EXPECT_GT(total, 10);
}

TEST(FindRegularDilate, RandomAndAdversarial) {
    Rng rng(5);
    for (auto g : {Group::cyclic(1009), Group::cyclic(2003)}) {
        for (int t = 0; t < 10; ++t) {
            auto b = random_bohr(g, 1 + rng.below(2), rng);
            const double rho = find_regular_dilate(b);
            EXPECT_GE(rho, 0.5);
            EXPECT_LE(rho, 1.0);
            EXPECT_TRUE(is_regular(dilate(b, rho)).pass);
        }
    }
    // widths equal to realized chord values put elements exactly on the boundary
    auto g = Group::cyclic(1009);
    std::vector<elem_t> f{1, 2, 3};
    std::vector<double> w{g.circle_distance(1, 40), g.circle_distance(2, 40), g.circle_distance(3, 40)};
    auto b = bohr_build(g, f, w);
    const double rho = find_regular_dilate(b);
    EXPECT_TRUE(is_regular(dilate(b, rho)).pass);
    // whole-group B from above is not regular but has a regular dilate
    auto whole = bohr_build(g, {1}, {2.0});
    EXPECT_TRUE(is_regular(dilate(whole, find_regular_dilate(whole))).pass);
}

TEST(RegConv, Examples) {
    auto g = Group::cyclic(2003);
    auto b = regularize(bohr_build(g, {1, 7}, {0.9, 1.3}));
    ASSERT_TRUE(is_regular(b).pass);
    const double d = 2;
    GFunction point(g, Side::physical);
    point[0] = static_cast<double>(g.order());
    auto r0 = reg_conv_defect(b, point, 1 / (100 * d));
    EXPECT_NEAR(r0.defect, 0, 1e-12);

    double last = 1e9;
    for (double rho : {1 / (100 * d), 1 / (200 * d), 1 / (400 * d)}) {
        auto mu = uniform_measure(dilate(b, rho).realized);
        auto rep = reg_conv_defect(b, mu, rho);
        EXPECT_TRUE(rep.rho_condition);
        EXPECT_TRUE(rep.holds);
        EXPECT_LE(rep.defect, 200 * rho * d);
        EXPECT_LE(rep.defect, last + 1e-12);
        last = rep.defect;
    }
    GFunction bad(g, Side::physical);
    bad[1000] = static_cast<double>(g.order());
    EXPECT_THROW(reg_conv_defect(b, bad, 0.001), PreconditionError);
}

TEST(Envelope, Examples) {
    auto g = Group::cyclic(2003);
    auto b = regularize(bohr_build(g, {1}, {0.8}));
    auto zero = GSet::from_elements(g, {0});
    EXPECT_TRUE(envelope_check(b, zero, 0.001, 1).holds);
    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        auto bb = regularize(random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5));
        const double rho = 1.0 / (200.0 * 2 * static_cast<double>(bb.rank()));
        auto rep = envelope_check(bb, dilate(bb, rho).realized, rho, 2);
        EXPECT_TRUE(rep.precondition);
        EXPECT_TRUE(rep.holds) << "min ratio " << rep.min_ratio;
    }
    // an oversized B' breaks the inequality; the witness is reported
    bool found = false;
    for (double rho : {0.5, 1.0, 2.0}) {
        auto rep = envelope_check(b, dilate(b, rho).realized, rho, 1);
        EXPECT_FALSE(rep.precondition);
        if (!rep.holds) {
            found = true;
            ASSERT_TRUE(rep.witness.has_value());
            auto mb = uniform_measure(b.realized);
            auto wide = uniform_measure(dilate(b, 1 + rho).realized);
            auto gg = convolve(wide, uniform_measure(dilate(b, rho).realized));
            EXPECT_GT(mb[*rep.witness].real(), 2 * gg[*rep.witness].real());
        }
    }
    EXPECT_TRUE(found);
}

TEST(BohrSpectra, PropertyOneExhaustive) {
    Rng rng(7);
    auto g = Group::cyclic(2003);
    for (int t = 0; t < 6; ++t) {
        auto b = regularize(random_bohr(g, 1 + rng.below(2), rng, 0.3, 1.5));
        const double d = static_cast<double>(b.rank());
        auto mh = dft(uniform_measure(b.realized));
        for (double delta : {0.25, 0.5, 0.9}) {
            for (double rho : {1 / (100 * d), 1 / (400 * d)}) {
                const auto brho = dilate(b, rho).realized.elements();
                for (elem_t gam = 0; gam < g.order(); ++gam) {
                    if (std::abs(mh[gam]) < delta) continue;
                    for (auto x : brho) EXPECT_LE(g.circle_distance(gam, x), 200 * rho * d / delta + 1e-12);
                }
            }
        }
    }
}

TEST(BohrSpectra, PropertyThreeIteratedSums) {
    auto g = Group::cyclic(2003);
    auto b = regularize(bohr_build(g, {1}, {0.6}));
    const double d = 1;
    auto mh = dft(uniform_measure(b.realized));
    GSet half(g);
    for (elem_t gam = 0; gam < g.order(); ++gam)
        if (std::abs(mh[gam]) >= 0.5) half.insert(gam);
    for (double rho : {1 / (800 * d), 1 / (1600 * d)}) {
        const double eps = 400 * rho * d;
        auto bp = dilate(b, rho);
        auto mph = dft(uniform_measure(bp.realized));
        for (unsigned k = 1; k <= 3; ++k) {
            auto ks = iterated_sumset(half, k);
            for (auto gam : ks.elements()) EXPECT_GE(std::abs(mph[gam]), 1 - k * eps - 1e-12);
        }
    }
}
