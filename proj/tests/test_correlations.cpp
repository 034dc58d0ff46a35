#include <doctest.h>

#include <cmath>
#include <random>

#include "modrec/correlations.hpp"
#include "modrec/errors.hpp"
#include "oracles.hpp"

using namespace modrec;
using doctest::Approx;

namespace
{
BranchSet set_of(std::initializer_list<int> one_based)
{
    BranchSet s;
    for (int i : one_based)
        s.bits |= 1u << (i - 1);
    return s;
}

}  // namespace

TEST_CASE("branch sets")
{
    auto s = set_of({1, 3, 4});
    CHECK(s.size() == 3);
    CHECK(s.label() == "1-3-4");
    CHECK(s.indices() == std::vector<int>{0, 2, 3});
    CHECK(subsets_of_size(4, 2).size() == 6);
    CHECK(subsets_of_size(4, 4).size() == 1);
    CHECK(BranchSet::all(4).bits == 15u);
}

TEST_CASE("detector tree validation")
{
    CHECK_NOTHROW(DetectorTree({0.5, 0.5}, {1, 0.6}));
    try
    {
        DetectorTree({0.3, 0.3, 0.3}, {1, 1, 1});
        FAIL("split summing to 0.9 must be rejected");
    }
    catch (ValidationError const& e)
    {
        CHECK(std::string(e.what()).find("split") != std::string::npos);
    }
    CHECK_THROWS_AS(DetectorTree({0.5, 0.5}, {1, 0}), ValidationError);
    CHECK_THROWS_AS(DetectorTree({0.5, 0.5}, {1}), ValidationError);
    CHECK_THROWS_AS(DetectorTree({1.0}, {1}), ValidationError);
    auto t = DetectorTree::uniform(4, 0.6);
    CHECK(t.detection_weight(set_of({1, 2})) == Approx(0.3));
}

TEST_CASE("photon-number g anchors")
{
    for (int k = 2; k <= 4; ++k)
    {
        double fact = std::tgamma(k + 1.0);
        CHECK(g_theory(FieldSpec({OpticalMode::thermal(0.8)}), k) == Approx(fact).epsilon(1e-12));
        CHECK(g_theory(FieldSpec({OpticalMode::poissonian(0.8)}), k) == Approx(1).epsilon(1e-12));
        CHECK(g_theory(FieldSpec({OpticalMode::single_photon(0.8)}), k) == 0.0);
    }
    auto three = FieldSpec({OpticalMode::single_photon(0.3), OpticalMode::single_photon(0.3),
                            OpticalMode::single_photon(0.3)});
    CHECK(g_theory(three, 2) == Approx(2.0 / 3).epsilon(1e-12));
    auto mixed = FieldSpec({OpticalMode::single_photon(0.1), OpticalMode::poissonian(0.5)});
    auto p = oracle::distribution(mixed, 40);
    double ref = oracle::factorial_moment(p, 2) / std::pow(oracle::factorial_moment(p, 1), 2);
    CHECK(g_theory(mixed, 2) == Approx(0.35 / 0.36).epsilon(1e-12));
    CHECK(g_theory(mixed, 2) == Approx(ref).epsilon(1e-10));
    CHECK_THROWS_AS(g_theory(FieldSpec{}, 2), UndefinedStatistic);
}

TEST_CASE("g is independent of detection efficiency")
{
    // Loss with transmission eta scales f_k by eta^k, so g is unchanged.
    // Build the attenuated law by binomial thinning of truncated sums.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto field = FieldSpec({OpticalMode::thermal(0.4), OpticalMode::single_photon(0.6),
                            OpticalMode::poissonian(0.3)});
    auto p = oracle::distribution(field, 60);
    for (int trial = 0; trial < 20; ++trial)
    {
        double eta = u(rng);
        std::vector<double> thinned(p.size(), 0.0);
        for (std::size_t n = 0; n < p.size(); ++n)
            for (std::size_t m = 0; m <= n; ++m)
                thinned[m] += p[n] * std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0)
                                              - std::lgamma(n - m + 1.0))
                              * std::pow(eta, double(m)) * std::pow(1 - eta, double(n - m));
        for (int k = 2; k <= 4; ++k)
        {
            double g = oracle::factorial_moment(thinned, k)
                       / std::pow(oracle::factorial_moment(thinned, 1), k);
            CHECK(g == Approx(g_theory(field, k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("no-click probabilities")
{
    auto two = DetectorTree::uniform(2, 1.0);
    CHECK(q_noclick_subset(FieldSpec({OpticalMode::single_photon(1)}), two, set_of({1, 2}))
          == Approx(0).epsilon(1e-15));
    auto th = FieldSpec({OpticalMode::thermal(1)});
    CHECK(q_noclick_subset(th, two, set_of({1})) == Approx(2.0 / 3).epsilon(1e-15));
    CHECK(q_noclick_subset(th, two, set_of({1}))
          == Approx(oracle::no_click(oracle::distribution(th, 400), 0.5)).epsilon(1e-12));
    CHECK(q_noclick_subset(FieldSpec{}, DetectorTree::uniform(4, 0.3), set_of({2, 3})) == 1.0);
    CHECK_THROWS_AS(q_noclick_subset(th, two, BranchSet{}), DomainError);
    CHECK_THROWS_AS(q_noclick_subset(th, two, set_of({3})), DomainError);
}

TEST_CASE("no-click probabilities factorize over modes")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 40; ++trial)
    {
        auto field = oracle::random_field(rng, 4, 2.0);
        auto tree = oracle::random_tree(rng, 4);
        for (std::uint32_t bits = 1; bits < 16; ++bits)
        {
            BranchSet s{bits};
            double prod = 1;
            for (auto const& m : field.modes())
                prod *= q_noclick_subset(FieldSpec({m}), tree, s);
            CHECK(std::abs(q_noclick_subset(field, tree, s) - prod) < 1e-12);
        }
    }
}

TEST_CASE("equal-split no-click matches truncated sums")
{
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial)
    {
        auto field = oracle::random_field(rng, 3, 1.5);
        double eta = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        auto tree = DetectorTree::uniform(4, eta);
        auto p = oracle::distribution(field, 150);
        CHECK(std::abs(q_noclick_subset(field, tree, set_of({2})) - oracle::no_click(p, eta / 4))
              < 1e-12);
        CHECK(std::abs(q_noclick_subset(field, tree, BranchSet::all(4)) - oracle::no_click(p, eta))
              < 1e-12);
    }
}

TEST_CASE("theta anchors")
{
    auto two = DetectorTree::uniform(2, 1.0);
    CHECK(theta_theory(FieldSpec({OpticalMode::thermal(1)}), two, set_of({1, 2}))
          == Approx(1.125).epsilon(1e-14));
    CHECK(theta_theory(FieldSpec({OpticalMode::single_photon(1)}), two, set_of({1, 2}))
          == Approx(0).epsilon(1e-15));
    auto tree = DetectorTree({0.1, 0.2, 0.3, 0.4}, {0.9, 0.5, 0.7, 0.6});
    for (std::uint32_t bits = 1; bits < 16; ++bits)
    {
        if (std::popcount(bits) < 2)
            continue;
        CHECK(theta_theory(FieldSpec({OpticalMode::poissonian(2.7)}), tree, BranchSet{bits})
              == Approx(1).epsilon(1e-12));
    }
    // A branch that clicks with certainty leaves theta undefined
    CHECK_THROWS_AS(theta_theory(FieldSpec({OpticalMode::single_photon(1)}),
                                 DetectorTree({1.0, 0.0}, {1, 1}), set_of({1, 2})),
                    DomainError);
    CHECK_THROWS_AS(theta_theory(FieldSpec({OpticalMode::thermal(1)}), two, set_of({1})),
                    DomainError);
}

TEST_CASE("theta is insensitive to Poissonian light")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> mu(1e-3, 5.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<OpticalMode> modes;
        auto const drawn = oracle::random_field(rng, 4, 1.5);
        for (auto const& m : drawn.modes())
            if (m.kind() != ModeKind::poissonian)
                modes.push_back(m);
        if (modes.empty())
            modes.push_back(OpticalMode::thermal(0.3));
        FieldSpec field(modes);
        auto tree = oracle::random_tree(rng, 4);
        auto polluted = field.with(OpticalMode::poissonian(mu(rng)));
        for (std::uint32_t bits = 3; bits < 16; ++bits)
        {
            if (std::popcount(bits) < 2)
                continue;
            BranchSet s{bits};
            CHECK(std::abs(theta_theory(polluted, tree, s) - theta_theory(field, tree, s))
                  < 1e-10);
        }
    }
}

TEST_CASE("classical fields obey the classical bounds")
{
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 60; ++trial)
    {
        std::vector<OpticalMode> modes;
        auto const drawn = oracle::random_field(rng, 4, 2.0);
        for (auto const& m : drawn.modes())
            if (m.kind() != ModeKind::single_photon)
                modes.push_back(m);
        if (modes.empty())
            continue;
        FieldSpec field(modes);
        auto tree = oracle::random_tree(rng, 4);
        CHECK(g_theory(field, 2) >= 1 - 1e-12);
        for (std::uint32_t bits = 3; bits < 16; ++bits)
            if (std::popcount(bits) >= 2)
                CHECK(theta_theory(field, tree, BranchSet{bits}) >= 1 - 1e-12);
    }
}

TEST_CASE("click-based g matches direct pattern counting")
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto field = oracle::random_field(rng, 3, 1.0);
        auto tree = oracle::random_tree(rng, 4);
        auto probs = oracle::pattern_probabilities(field, tree, 120);
        for (int k = 2; k <= 4; ++k)
            CHECK(g_click_theory(field, tree, k)
                  == Approx(oracle::click_g(probs, 4, k)).epsilon(1e-9));
    }
}

TEST_CASE("theoretical correlation sets")
{
    auto tree4 = DetectorTree::uniform(4, 0.5);
    CHECK_THROWS_AS(correlation_set_theory(FieldSpec{}, tree4, 4), UndefinedStatistic);

    auto coh = correlation_set_theory(FieldSpec({OpticalMode::poissonian(1)}), tree4, 4);
    CHECK(coh.g.size() == 3);
    CHECK(coh.theta.size() == 11);
    for (auto const& [k, m] : coh.g)
        CHECK(m.value == Approx(1).epsilon(1e-12));
    for (auto const& [s, m] : coh.theta)
        CHECK(m.value == Approx(1).epsilon(1e-12));

    auto th = correlation_set_theory(FieldSpec({OpticalMode::thermal(0.5)}),
                                     DetectorTree::uniform(4, 1.0), 4);
    CHECK(th.g.at(2).value == Approx(2).epsilon(1e-12));
    CHECK(th.g.at(3).value == Approx(6).epsilon(1e-12));
    CHECK(th.g.at(4).value == Approx(24).epsilon(1e-12));
    CHECK(th.theta.at(BranchSet::all(4)).value
          == Approx((1 / 1.5) / std::pow(1 / 1.125, 4)).epsilon(1e-12));
    CHECK(th.q_noclick_all == Approx(1 / 1.5).epsilon(1e-14));
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(th.q_click[i] + th.q_noclick[i] == Approx(1).epsilon(1e-15));
    CHECK(th.n_pulses == 0);
    CHECK_THROWS_AS(correlation_set_theory(FieldSpec({OpticalMode::thermal(0.5)}), tree4, 5),
                    DomainError);

    auto click = correlation_set_theory(FieldSpec({OpticalMode::thermal(0.5)}), tree4, 4,
                                        GBasis::click);
    CHECK(click.g_basis == GBasis::click);
    CHECK(click.g.at(2).value
          == Approx(g_click_theory(FieldSpec({OpticalMode::thermal(0.5)}), tree4, 2)));
}
