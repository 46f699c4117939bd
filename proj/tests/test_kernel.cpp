#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "csa/kernel.hpp"
#include "generators.hpp"

using namespace csa;

namespace {

std::vector<Rational> q(std::initializer_list<const char*> xs) {
    std::vector<Rational> out;
    for (auto x : xs) out.push_back(parse_rational(x));
    return out;
}

}  // namespace

TEST(Rational, ParsesCanonicalForms) {
    EXPECT_EQ(parse_rational("9/10"), Rational(9, 10));
    EXPECT_EQ(parse_rational("-4/6"), Rational(-2, 3));
    EXPECT_EQ(parse_rational("7"), Rational(7));
    EXPECT_THROW(parse_rational("0.9"), std::invalid_argument);
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_rational(""), std::invalid_argument);
}

TEST(Rational, PowerTableMatchesPow) {
    PowerTable t(Rational(2, 3));
    for (std::int64_t k = -20; k <= 20; ++k) EXPECT_EQ(t(k), pow(Rational(2, 3), k)) << k;
    EXPECT_EQ(t(0), 1);
}

TEST(ModelSpec, RejectsBadInput) {
    EXPECT_THROW(ModelSpec::make(3, Rational(0), Interaction::A1), std::invalid_argument);
    EXPECT_THROW(ModelSpec::make(3, Rational(-1), Interaction::A1), std::invalid_argument);
    EXPECT_THROW(ModelSpec::make(2, Rational(1), Interaction::A1), std::invalid_argument);
    EXPECT_NO_THROW(ModelSpec::make(2, Rational(1), Interaction::A1, true));
    EXPECT_EQ(parse_interaction("A3"), Interaction::A3);
    EXPECT_THROW(parse_interaction("A4"), std::invalid_argument);
}

TEST(Neighbourhood, MatchesDefinitions) {
    // 0-based: site 0 is site 1 in the usual labels.
    auto a3 = ModelSpec::make(4, Rational(2), Interaction::A3);
    EXPECT_EQ(neighbourhood(a3, 0), (std::vector<std::size_t>{3, 0, 1}));
    auto a2 = ModelSpec::make(3, Rational(2), Interaction::A2);
    EXPECT_EQ(neighbourhood(a2, 2), (std::vector<std::size_t>{2, 0}));
    auto a1 = ModelSpec::make(5, Rational(2), Interaction::A1);
    EXPECT_EQ(neighbourhood(a1, 4), (std::vector<std::size_t>{4}));
    EXPECT_THROW(neighbourhood(a1, 5), std::out_of_range);
}

TEST(Potentials, Examples) {
    auto a3 = ModelSpec::make(4, Rational(2), Interaction::A3);
    EXPECT_EQ(potentials(a3, HeightState{0, 1, 0, 0}), (PotentialState{1, 1, 1, 0}));
    auto a2 = ModelSpec::make(3, Rational(2), Interaction::A2);
    EXPECT_EQ(potentials(a2, HeightState{2, 0, 1}), (PotentialState{2, 1, 3}));
}

TEST(TransitionDistribution, Example) {
    auto spec = ModelSpec::make(3, Rational(1, 2), Interaction::A1);
    auto d = transition_distribution(spec, HeightState{1, 0, 0});
    EXPECT_EQ(d.probs, q({"1/5", "2/5", "2/5"}));
}

TEST(TransitionDistribution, ExponentCapRefuses) {
    auto spec = ModelSpec::make(3, Rational(2), Interaction::A1);
    EXPECT_THROW(transition_distribution(spec, HeightState{5000, 0, 0}), ExponentCapError);
    EXPECT_NO_THROW(transition_distribution(spec, HeightState{5000, 0, 0}, 6000));
}

TEST(TransitionDistributionProperty, SumsToOneAndPositive) {
    Rng rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        for (auto mode : testgen::modes()) {
            for (const auto& beta : testgen::betas()) {
                const std::size_t n = static_cast<std::size_t>(testgen::int_in(rng, 3, 8));
                auto spec = ModelSpec::make(n, beta, mode);
                auto d = transition_distribution(spec, testgen::heights(rng, n, 12));
                EXPECT_EQ(d.total(), 1);
                for (const auto& p : d.probs) EXPECT_GT(p, 0);
            }
        }
    }
}

TEST(TransitionDistributionProperty, ShiftInvariant) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto mode : testgen::modes()) {
            const std::size_t n = static_cast<std::size_t>(testgen::int_in(rng, 3, 7));
            auto spec = ModelSpec::make(n, testgen::betas()[trial % 3], mode);
            auto xi = testgen::heights(rng, n, 10);
            auto shifted = xi;
            const auto c = testgen::int_in(rng, -50, 50);
            for (auto& x : shifted) x += c;
            EXPECT_EQ(transition_distribution(spec, xi).probs, transition_distribution(spec, shifted).probs);
        }
    }
}

TEST(TransitionDistributionProperty, RotationEquivariant) {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto mode : testgen::modes()) {
            const std::size_t n = static_cast<std::size_t>(testgen::int_in(rng, 3, 7));
            auto spec = ModelSpec::make(n, testgen::betas()[trial % 3], mode);
            auto xi = testgen::heights(rng, n, 10);
            const std::size_t r = static_cast<std::size_t>(testgen::int_in(rng, 1, static_cast<std::int64_t>(n) - 1));
            HeightState rotated;
            rotated.values.resize(n);
            for (std::size_t i = 0; i < n; ++i) rotated[(i + r) % n] = xi[i];
            auto p = transition_distribution(spec, xi).probs;
            auto pr = transition_distribution(spec, rotated).probs;
            for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(pr[(i + r) % n], p[i]);
        }
    }
}

TEST(TransitionDistributionProperty, MonotoneInBeta) {
    // With beta > 1 the site of largest potential is the most likely one; with
    // beta < 1 the smallest. Raising one site's potential moves its weight
    // the same way.
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        for (auto mode : testgen::modes()) {
            const std::size_t n = static_cast<std::size_t>(testgen::int_in(rng, 3, 7));
            auto xi = testgen::heights(rng, n, 6);
            for (const auto& beta : testgen::betas()) {
                auto spec = ModelSpec::make(n, beta, mode);
                auto u = potentials(spec, xi);
                auto p = transition_distribution(spec, xi).probs;
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (u[i] > u[j]) {
                            if (beta > 1) EXPECT_GT(p[i], p[j]);
                            else EXPECT_LT(p[i], p[j]);
                        }
                        if (u[i] == u[j]) EXPECT_EQ(p[i], p[j]);
                    }
                }
            }
        }
    }
}

TEST(TransitionDistribution, NeutralIsUniform) {
    auto spec = ModelSpec::make(5, Rational(1), Interaction::A3);
    auto d = transition_distribution(spec, HeightState{9, -3, 0, 4, 1});
    for (const auto& p : d.probs) EXPECT_EQ(p, Rational(1, 5));
}

TEST(Sampling, Uniform01IsDyadic) {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = uniform01(rng);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_EQ(u * 9007199254740992.0, static_cast<double>(static_cast<std::uint64_t>(u * 9007199254740992.0)));
    }
}

TEST(Sampling, SameSeedSamePath) {
    for (auto mode : testgen::modes()) {
        auto spec = ModelSpec::make(5, Rational(9, 10), mode);
        auto a = simulate(spec, flat_state(5), 2000, 77);
        auto b = simulate(spec, flat_state(5), 2000, 77);
        EXPECT_EQ(a.sites, b.sites);
        EXPECT_EQ(a.final_state, b.final_state);
        auto c = simulate(spec, flat_state(5), 2000, 78);
        EXPECT_NE(a.sites, c.sites);
    }
}

TEST(Sampling, ChainMatchesStep) {
    // The incremental chain and the stateless step draw the same sites.
    auto spec = ModelSpec::make(6, Rational(2), Interaction::A3);
    Chain chain(spec, flat_state(6), 5);
    Rng rng(5);
    HeightState xi = flat_state(6);
    for (int t = 0; t < 500; ++t) {
        auto r = step(spec, xi, rng);
        EXPECT_EQ(chain.step(), r.site);
        xi = r.state;
        EXPECT_EQ(chain.state(), xi);
        EXPECT_EQ(chain.potentials(), potentials(spec, xi));
    }
}

TEST(Sampling, FloatAndExactAgreeInDistribution) {
    // Empirical frequencies of both samplers against the exact law at a
    // lopsided state; 4 standard errors is a loose but deterministic bound.
    auto spec = ModelSpec::make(4, Rational(9, 10), Interaction::A2);
    HeightState xi{3, -1, 0, 2};
    auto d = transition_distribution(spec, xi);
    for (auto mode : {SamplingMode::Float, SamplingMode::Exact}) {
        Rng rng(99);
        std::map<std::size_t, int> counts;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i) ++counts[step(spec, xi, rng, mode).site];
        for (std::size_t i = 0; i < 4; ++i) {
            const double p = d.probs[i].get_d();
            const double se = std::sqrt(p * (1 - p) / draws);
            EXPECT_NEAR(counts[i] / static_cast<double>(draws), p, 4 * se) << i;
        }
    }
}

TEST(Sampling, LogDomainHandlesHugeExponents) {
    LogDomainWeights w(Rational(2));
    Rng rng(3);
    std::vector<double> scratch;
    std::vector<std::int64_t> e{100000, 99999, -100000};
    std::map<std::size_t, int> counts;
    for (int i = 0; i < 3000; ++i) ++counts[w.sample(e, rng, scratch)];
    EXPECT_EQ(counts[2], 0);
    EXPECT_NEAR(counts[0] / 3000.0, 2.0 / 3.0, 0.05);
}

TEST(Sampling, ExactModeRefusesPastCap) {
    auto spec = ModelSpec::make(3, Rational(2), Interaction::A1);
    Rng rng(1);
    EXPECT_THROW(step(spec, HeightState{5000, 0, 0}, rng, SamplingMode::Exact), ExponentCapError);
    EXPECT_NO_THROW(step(spec, HeightState{5000, 0, 0}, rng, SamplingMode::Float));
}

TEST(Simulate, ThinningKeepsEveryKth) {
    auto spec = ModelSpec::make(3, Rational(1, 2), Interaction::A1);
    auto tr = simulate(spec, flat_state(3), 100, 1, 10);
    ASSERT_EQ(tr.snapshots.size(), 10u);
    EXPECT_EQ(tr.snapshots.front().t, 10u);
    EXPECT_EQ(tr.snapshots.back().state, tr.final_state);
    std::int64_t total = 0;
    for (auto x : tr.final_state) total += x;
    EXPECT_EQ(total, 100);
}
