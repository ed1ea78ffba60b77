#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "diffsched/oracle.hpp"
#include "diffsched/samplers.hpp"

using namespace diffsched;

namespace {

Vector v1(double a) {
    Vector v(1);
    v << a;
    return v;
}

SigmaWindow window(double s, double t) { return SigmaWindow{std::nullopt, s, t}; }

const Node kHalf{0, 0.5};

}  // namespace

TEST(Names, RoundTrip) {
    for (SamplerKind k : kAllSamplerKinds) EXPECT_EQ(parse_sampler_name(canonical_name(k)), k);
    EXPECT_FALSE(parse_sampler_name("ddim").has_value());
    EXPECT_EQ(sampler_class(SamplerKind::DpmPP2M), SamplerClass::Ode);
    EXPECT_EQ(sampler_class(SamplerKind::DpmPP2MSDE), SamplerClass::Sde);
    EXPECT_TRUE(is_multistep(SamplerKind::DpmPP2MSDE));
    EXPECT_FALSE(is_multistep(SamplerKind::Heun));
}

TEST(NfeCost, Examples) {
    EXPECT_EQ(nfe_cost(SamplerKind::Euler, false), 1);
    EXPECT_EQ(nfe_cost(SamplerKind::Heun, false), 2);
    EXPECT_EQ(nfe_cost(SamplerKind::Heun, true), 1);
    EXPECT_EQ(nfe_cost(SamplerKind::DpmPP2M, false), 1);
    EXPECT_EQ(nfe_cost(SamplerKind::Dpm2A, false), 2);
    EXPECT_EQ(nfe_cost(SamplerKind::DpmPPSDE, true), 1);
}

TEST(Coefficients, PerKind) {
    const auto euler = coefficient_vector(SamplerKind::Euler, 0, window(7, 3), false);
    EXPECT_EQ(euler.size(), 1u);
    EXPECT_EQ(euler.weight(Node::at(0)), 1.0);

    const auto heun = coefficient_vector(SamplerKind::Heun, 0, window(2, 1), false);
    EXPECT_EQ(heun.weight(Node::at(0)), 0.0);
    EXPECT_EQ(heun.weight(Node::at(1)), 1.0);

    const auto dpm2 = coefficient_vector(SamplerKind::Dpm2, 0, window(4, 1), false);
    EXPECT_EQ(dpm2.weight(Node::at(0)), -1.0);
    EXPECT_EQ(dpm2.weight(kHalf), 2.0);

    const auto sde = coefficient_vector(SamplerKind::DpmPPSDE, 0, window(9, 2), false);
    EXPECT_EQ(sde.weight(Node::at(0)), 0.5);
    EXPECT_EQ(sde.weight(Node::at(1)), 0.5);

    const auto sa = coefficient_vector(SamplerKind::DpmPP2SA, 0, window(9, 2), false);
    EXPECT_EQ(sa.weight(Node::at(1)), 1.0);
    EXPECT_EQ(sa.weight(Node::at(0)), 0.0);
}

TEST(Coefficients, MultistepUsesHistoryRatio) {
    const SigmaWindow w{4.0, 2.0, 1.0};
    for (SamplerKind k : {SamplerKind::DpmPP2M, SamplerKind::DpmPP2MSDE}) {
        const auto c = coefficient_vector(k, 5, w, true);
        EXPECT_DOUBLE_EQ(c.weight(Node::at(5)), 1.5);
        EXPECT_DOUBLE_EQ(c.weight(Node::at(4)), -0.5);
        const auto cold = coefficient_vector(k, 5, window(2, 1), false);
        EXPECT_EQ(cold.size(), 1u);
        EXPECT_EQ(cold.weight(Node::at(5)), 1.0);
    }
}

TEST(Coefficients, Dpm2aVariants) {
    const auto literal = coefficient_vector(SamplerKind::Dpm2A, 0, window(2, 1), false);
    EXPECT_DOUBLE_EQ(literal.weight(Node::at(0)), -1.0);
    EXPECT_DOUBLE_EQ(literal.weight(kHalf), 2.0);
    CoefficientOptions opt;
    opt.dpm2a_variant = Dpm2aVariant::Ancestral;
    const auto ancestral = coefficient_vector(SamplerKind::Dpm2A, 0, window(3, 1), false, opt);
    EXPECT_DOUBLE_EQ(ancestral.weight(Node::at(0)), -2.0);
    EXPECT_DOUBLE_EQ(ancestral.weight(Node::at(1)), 3.0);
    EXPECT_EQ(parse_dpm2a_variant("ancestral"), Dpm2aVariant::Ancestral);
    EXPECT_THROW(parse_dpm2a_variant("x"), std::invalid_argument);
}

TEST(Coefficients, ZeroTargetDegradesToCurrentNode) {
    for (SamplerKind k : kAllSamplerKinds) {
        const auto c = coefficient_vector(k, 3, SigmaWindow{5.0, 2.0, 0.0}, true);
        EXPECT_EQ(c.size(), 1u) << canonical_name(k);
        EXPECT_EQ(c.weight(Node::at(3)), 1.0);
    }
}

TEST(Coefficients, CorrectionScale) {
    CoefficientOptions opt;
    opt.correction_scale = 2.0;
    const auto c = coefficient_vector(SamplerKind::DpmPPSDE, 0, window(3, 1), false, opt);
    EXPECT_EQ(c.weight(Node::at(0)), 0.0);
    EXPECT_EQ(c.weight(Node::at(1)), 1.0);
    EXPECT_THROW(coefficient_vector(SamplerKind::EulerA, 0, window(3, 1), false, opt), std::invalid_argument);
    EXPECT_THROW(coefficient_vector(SamplerKind::Euler, 0, window(3, 1), false, opt), std::invalid_argument);
}

TEST(Coefficients, RejectsBadWindows) {
    EXPECT_THROW(coefficient_vector(SamplerKind::Euler, 0, window(1, 2), false), std::invalid_argument);
    EXPECT_THROW(coefficient_vector(SamplerKind::DpmPP2M, 1, SigmaWindow{1.0, 2.0, 1.0}, true),
                 std::invalid_argument);
}

TEST(Coefficients, SumToOneOnRandomWindows) {
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (SamplerKind k : kAllSamplerKinds)
        for (int n = 0; n < 1000; ++n) {
            const double s = 80.0 * u(g);
            const SigmaWindow w{s / u(g), s, s * u(g)};
            EXPECT_NEAR(coefficient_vector(k, n, w, n % 2 == 0).sum(), 1.0, 1e-12);
        }
}

TEST(Prediction, Conversion) {
    EXPECT_DOUBLE_EQ(convert_prediction(v1(2.0), v1(4.0), 2.0, PredictionDirection::DataToNoise)[0], 1.0);
    EXPECT_EQ(convert_prediction(v1(0.0), v1(3.0), 5.0, PredictionDirection::NoiseToData)[0], 3.0);
    Vector x(3), d(3);
    x << 1.5, -2, 7;
    d << 0.3, 0.1, -4;
    const Vector eps = convert_prediction(d, x, 1.7, PredictionDirection::DataToNoise);
    EXPECT_LE((convert_prediction(eps, x, 1.7, PredictionDirection::NoiseToData) - d).norm(), 1e-12);
    EXPECT_THROW(convert_prediction(d, x, 0.0, PredictionDirection::DataToNoise), std::invalid_argument);
}

TEST(Prediction, EulerBaselineEstimate) {
    EXPECT_DOUBLE_EQ(euler_baseline_estimate(v1(4), v1(2), 4, 2)[0], 3.0);
    EXPECT_EQ(euler_baseline_estimate(v1(4), v1(2), 4, 4)[0], 4.0);
    EXPECT_EQ(euler_baseline_estimate(v1(4), v1(2), 4, 0)[0], 2.0);
    EXPECT_THROW(euler_baseline_estimate(v1(4), v1(2), 4, 5), std::invalid_argument);
}

TEST(OdeStep, EulerHandValue) {
    const auto r = ode_step(SamplerKind::Euler, SampleState{v1(4), 0, 2}, 1, constant_denoiser(v1(2)), {});
    EXPECT_DOUBLE_EQ(r.state.x[0], 3.0);
    EXPECT_EQ(r.state.sigma, 1.0);
    EXPECT_EQ(r.state.step_index, 1);
    EXPECT_EQ(r.nfe, 1);
}

TEST(OdeStep, HeunHandValueOnGaussianOracle) {
    const auto r = ode_step(SamplerKind::Heun, SampleState{v1(4), 0, 2}, 1, gaussian_denoiser(1.0), {});
    EXPECT_NEAR(r.state.x[0], 2.6, 1e-14);
    EXPECT_EQ(r.nfe, 2);
}

TEST(OdeStep, FixedPointInvariance) {
    Vector x(2);
    x << 1.25, -3.5;
    PredictionCache cache;
    cache.store(Node::at(1), CachedPrediction{x, 6.0, Provenance::History});
    for (SamplerKind k : kAllSamplerKinds) {
        if (sampler_class(k) != SamplerClass::Ode) continue;
        for (double t : {1.0, 0.0}) {
            const auto r = ode_step(k, SampleState{x, 2, 3.0}, t, identity_denoiser(), cache);
            EXPECT_LE((r.state.x - x).norm(), 1e-14) << canonical_name(k);
        }
    }
}

TEST(OdeStep, CacheHoldsOnlyCurrentPrediction) {
    PredictionCache cache;
    cache.store(Node::at(3), CachedPrediction{v1(9), 6.0, Provenance::History});
    const auto r = ode_step(SamplerKind::DpmPP2M, SampleState{v1(4), 4, 3.0}, 1.0, gaussian_denoiser(1.0), cache);
    ASSERT_EQ(r.cache.size(), 1u);
    const auto* got = r.cache.find(Node::at(4));
    ASSERT_NE(got, nullptr);
    EXPECT_EQ(got->sigma, 3.0);
    EXPECT_EQ(got->provenance, Provenance::History);
    EXPECT_DOUBLE_EQ(got->value[0], 0.4);
    EXPECT_EQ(r.coefficients.size(), 2u);
}

TEST(OdeStep, MissingHistoryIsAContractViolation) {
    StepOptions opt;
    opt.expect_history = true;
    EXPECT_THROW(ode_step(SamplerKind::DpmPP2M, SampleState{v1(4), 4, 3.0}, 1.0, identity_denoiser(), {}, opt),
                 ContractViolation);
    EXPECT_NO_THROW(ode_step(SamplerKind::DpmPP2M, SampleState{v1(4), 4, 3.0}, 1.0, identity_denoiser(), {}));
}

TEST(OdeStep, ArgumentChecks) {
    EXPECT_THROW(ode_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, identity_denoiser(), {}),
                 std::invalid_argument);
    EXPECT_THROW(ode_step(SamplerKind::Euler, SampleState{v1(4), 0, 2}, 2, identity_denoiser(), {}),
                 std::invalid_argument);
    StepOptions opt;
    opt.correction_scale = 2.0;
    EXPECT_THROW(ode_step(SamplerKind::Heun, SampleState{v1(4), 0, 2}, 1, identity_denoiser(), {}, opt),
                 std::invalid_argument);
}

TEST(OdeStep, ZeroTargetUsesOneEvaluation) {
    for (SamplerKind k : {SamplerKind::Heun, SamplerKind::Dpm2}) {
        const auto r = ode_step(k, SampleState{v1(4), 0, 2}, 0.0, gaussian_denoiser(1.0), {});
        EXPECT_EQ(r.nfe, 1);
        EXPECT_DOUBLE_EQ(r.state.x[0], 0.8);
    }
}

TEST(SdeStep, EulerAncestralHandValues) {
    const auto D = constant_denoiser(v1(2));
    const auto quiet = sde_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, D, {}, NoiseDraw{v1(0)});
    EXPECT_DOUBLE_EQ(quiet.state.x[0], 2.5);
    const auto noisy = sde_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, D, {}, NoiseDraw{v1(1)});
    EXPECT_NEAR(noisy.state.x[0], 2.5 + 0.5 * std::sqrt(3.0), 1e-14);
    EXPECT_NEAR(noisy.state.x[0], 3.3660, 1e-4);
    const auto last = sde_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 0, D, {}, NoiseDraw{v1(5)});
    EXPECT_EQ(last.state.x[0], 2.0);
}

TEST(SdeStep, DegeneracyIdentity) {
    const auto D = gaussian_denoiser(0.7);
    std::mt19937_64 g(4);
    std::normal_distribution<double> n01;
    StepOptions opt;
    opt.correction_scale = 2.0;
    for (int k = 0; k < 200; ++k) {
        Vector x(2), e(2);
        x << 3 * n01(g), 3 * n01(g);
        e << n01(g), n01(g);
        const SampleState st{x, k, 3.0};
        const auto a = sde_step(SamplerKind::DpmPPSDE, st, 1.2, D, {}, NoiseDraw{e}, opt);
        const auto b = sde_step(SamplerKind::DpmPP2SA, st, 1.2, D, {}, NoiseDraw{e});
        EXPECT_LE((a.state.x - b.state.x).norm(), 1e-12);
    }
}

TEST(SdeStep, DeterministicPartUnderPerfectDenoiser) {
    const Vector x0 = v1(0.7);
    const double s = 2.0, t = 0.8, e0 = 1.3;
    for (SamplerKind k : kAllSamplerKinds) {
        if (sampler_class(k) != SamplerClass::Sde) continue;
        const auto r = sde_step(k, SampleState{x0 + s * v1(e0), 0, s}, t, constant_denoiser(x0), {}, NoiseDraw{v1(0)});
        EXPECT_NEAR(r.state.x[0], x0[0] + t * t / s * e0, 1e-14) << canonical_name(k);
    }
}

TEST(SdeStep, ArgumentChecks) {
    const auto D = identity_denoiser();
    EXPECT_THROW(sde_step(SamplerKind::Heun, SampleState{v1(4), 0, 2}, 1, D, {}, NoiseDraw{v1(0)}),
                 std::invalid_argument);
    EXPECT_THROW(sde_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, D, {}, NoiseDraw::zeros(2)),
                 std::invalid_argument);
    StepOptions opt;
    opt.correction_scale = 1.5;
    EXPECT_THROW(sde_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, D, {}, NoiseDraw{v1(0)}, opt),
                 std::invalid_argument);
    EXPECT_THROW(take_step(SamplerKind::EulerA, SampleState{v1(4), 0, 2}, 1, D, {}, nullptr), std::invalid_argument);
}

TEST(CoeffVector, SortedAndMerged) {
    CoeffVector c;
    c.add(Node::at(2), 0.25);
    c.add(Node{1, 0.5}, 0.5);
    c.add(Node::at(2), 0.25);
    EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(c.begin()->first, (Node{1, 0.5}));
    EXPECT_EQ(c.weight(Node::at(2)), 0.5);
    EXPECT_EQ(c.sum(), 1.0);
    EXPECT_EQ(Node::between(FractionalNode(3, 1.0)), Node::at(4));
}
