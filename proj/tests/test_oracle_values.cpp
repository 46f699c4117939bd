#include <gtest/gtest.h>

#include "csa/lyapunov.hpp"

// Reference values from tests/oracles/oracle.py, which works from the height
// process with Python fractions and shares no code with the library.

using namespace csa;

namespace {

struct DistCase {
    Interaction mode;
    const char* beta;
    std::vector<std::int64_t> heights;
    std::vector<const char*> probs;
};

const std::vector<DistCase> kDistributions = {
    {Interaction::A1, "1/2", {1, 0, 0}, {"1/5", "2/5", "2/5"}},
    {Interaction::A1, "2", {3, -1, 0, 2}, {"16/27", "1/27", "2/27", "8/27"}},
    {Interaction::A2, "1/2", {0, 0, 1}, {"1/2", "1/4", "1/4"}},
    {Interaction::A2, "9/10", {2, -3, 1, 0, 4}, {"90000000/359090821", "100000000/359090821", "72900000/359090821", "53144100/359090821", "43046721/359090821"}},
    {Interaction::A3, "2", {0, 1, 0, 0}, {"2/7", "2/7", "2/7", "1/7"}},
    {Interaction::A3, "9/10", {5, 0, -2, 1, 1, 0, 3, -4}, {"10125/78451", "32805/313804", "12500/78451", "11250/78451", "18225/156902", "59049/627608", "12500/78451", "59049/627608"}},
};

struct BetaCase {
    const char* beta;
    std::vector<std::int64_t> x;
    const char* drift;
};

const std::vector<BetaCase> kQuadratic = {
    {"1/2", {0, 0}, "4/3"},
    {"1/2", {3, -2}, "-89/41"},
    {"1/2", {-7, 5}, "-53045/4129"},
    {"1/2", {0, 0, 0}, "3/2"},
    {"1/2", {4, -1, 2}, "-115/53"},
    {"1/2", {-3, -3, 6}, "-4915/1089"},
    {"9/10", {0, 0}, "4/3"},
    {"9/10", {3, -2}, "113343/240049"},
    {"9/10", {-7, 5}, "-7023493698709/1760726436481"},
    {"9/10", {0, 0, 0}, "3/2"},
    {"9/10", {4, -1, 2}, "165941/321949"},
    {"9/10", {-3, -3, 6}, "-213579511/239724653"},
    {"2", {0, 0}, "4/3"},
    {"2", {3, -2}, "221/37"},
    {"2", {-7, 5}, "45811/4225"},
    {"2", {0, 0, 0}, "3/2"},
    {"2", {4, -1, 2}, "313/43"},
    {"2", {-3, -3, 6}, "115/9"},
};

const std::vector<BetaCase> kExpSum = {
    {"1/2", {0, 0}, "793/48"},
    {"1/2", {3, -2}, "755081335/1212416"},
    {"1/2", {-5, 4}, "-121146829993045357/114294784"},
    {"1/2", {10, 10}, "-2668139080433982607658881/4613937818241073152"},
    {"1/2", {-15, 15}, "-50219494347248389578521641017422333379507854548796876386305/2475955638740329473335361536"},
    {"9/10", {0, 0}, "303221809/1771470000"},
    {"9/10", {3, -2}, "3264374119710173050995880953539/25273629844610906250000000000000"},
    {"9/10", {-5, 4}, "-71021565518566520165098975917427565871888640294490961778489/77964480439061591507629030762396819760100000000000000000000"},
    {"9/10", {10, 10}, "-81369043611830541217165596068453475572576785673506972358350467715995809322355201/285544467456354779534294433201000000000000000000000000000000000000000000000000000"},
    {"9/10", {-15, 15}, "-1335790419698423286002949662685904323923903595412028865661874196278711583798036539454631689941029207303095047863005767022334912452552402239185746879592887767803391870403360740957035874327326175449/195783595655879428275289144084856726326366914203902132504326976230084209251943746826289619738003917234557098432916146289842144418490000000000000000000000000000000000000000000000000000000000000"},
};

struct Case {
    std::vector<std::int64_t> x;
    const char* drift;
};

const std::vector<Case> kReciprocalMax = {
    {{0, 0, 0}, "0"},
    {{1, 2, -3}, "-1/78"},
    {{5, -5, 0}, "-16/975"},
    {{4, 0, -1, -3}, "-43/1530"},
    {{-2, 7, -1, -4}, "-752/45045"},
};

const std::vector<Case> kVGap = {
    {{0, 3, 1}, "-1/32"},
    {{5, 4, -2}, "-7/788"},
    {{3, 6, 1, 2, -1}, "-525/6784"},
    {{4, 9, 2, 3, 0}, "-1307/34688"},
};

}  // namespace

TEST(Oracle, TransitionDistributions) {
    for (const auto& c : kDistributions) {
        auto spec = ModelSpec::make(c.heights.size(), parse_rational(c.beta), c.mode);
        auto d = transition_distribution(spec, HeightState(c.heights));
        ASSERT_EQ(d.probs.size(), c.probs.size());
        for (std::size_t i = 0; i < d.probs.size(); ++i) EXPECT_EQ(d.probs[i], parse_rational(c.probs[i]));
    }
}

TEST(Oracle, QuadraticDriftA1) {
    for (const auto& c : kQuadratic) {
        auto spec = ModelSpec::make(c.x.size() + 1, parse_rational(c.beta), Interaction::A1);
        EXPECT_EQ(drift(spec, Process::Zeta, quadratic(), c.x).drift, parse_rational(c.drift)) << c.beta;
        EXPECT_EQ(quadratic_drift_closed_form(spec, c.x), parse_rational(c.drift)) << c.beta;
    }
}

TEST(Oracle, ExpSumDriftA2) {
    for (const auto& c : kExpSum) {
        auto spec = ModelSpec::make(3, parse_rational(c.beta), Interaction::A2);
        EXPECT_EQ(drift(spec, Process::Zeta, exp_sum_a2(), c.x).drift, parse_rational(c.drift)) << c.beta;
    }
}

TEST(Oracle, ReciprocalMaxDriftEta) {
    for (const auto& c : kReciprocalMax) {
        auto spec = ModelSpec::make(c.x.size(), Rational(2), Interaction::A2);
        EXPECT_EQ(drift(spec, Process::Eta, reciprocal_max(), c.x).drift, parse_rational(c.drift));
    }
}

TEST(Oracle, VGapDrift) {
    for (const auto& c : kVGap) {
        auto spec = ModelSpec::make(c.x.size() + 1, Rational(2), Interaction::A3);
        EXPECT_EQ(drift(spec, Process::V, v_gap_function(c.x.size()), c.x).drift, parse_rational(c.drift));
    }
}
