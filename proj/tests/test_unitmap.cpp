#include "nanoevo/unitmap.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nanoevo::units;

namespace {

bool same_to_3_sig_figs(double a, double b)
{
    const double scale = std::pow(10.0, std::floor(std::log10(std::abs(b))) - 2);
    return std::lround(a / scale) == std::lround(b / scale);
}

} // namespace

TEST(StepDuration, NanoparticleDiffusionGivesFiveThousandSeconds)
{
    EXPECT_EQ(step_duration(1e-10, 1e-3), 5000.0);
}

TEST(StepDuration, InverselyProportionalToDiffusion)
{
    EXPECT_DOUBLE_EQ(step_duration(2e-10, 1e-3), 0.5 * step_duration(1e-10, 1e-3));
}

TEST(StepDuration, FourDtFormHalvesTheStep)
{
    EXPECT_DOUBLE_EQ(step_duration(1e-10, 1e-3, 4.0), 2500.0);
}

TEST(StepDuration, RejectsNonPositiveInputs)
{
    EXPECT_THROW(step_duration(1e-10, 0.0), nanoevo::DomainError);
    EXPECT_THROW(step_duration(0.0, 1e-3), nanoevo::DomainError);
    EXPECT_THROW(step_duration(-1e-10, 1e-3), nanoevo::DomainError);
}

TEST(Concentration, HundredThousandParticlesPerCell)
{
    EXPECT_DOUBLE_EQ(cube_volume_litres(1e-3), 1e-12);
    const double c = na_molar_concentration(1e5, 1e-12);
    EXPECT_TRUE(same_to_3_sig_figs(c, 1.66e-7)) << c;
    EXPECT_EQ(na_molar_concentration(0.0, 1e-12), 0.0);
    EXPECT_TRUE(same_to_3_sig_figs(na_molar_concentration(2e5, 1e-12), 3.32e-7));
    EXPECT_THROW(na_molar_concentration(1e5, 0.0), nanoevo::DomainError);
}

TEST(Association, WorkedExample)
{
    const double ka = pa_to_ka(0.3, 1.66e-7, 5000.0);
    EXPECT_NEAR(ka, 3.61e2, 0.005 * 3.61e2);
    EXPECT_EQ(pa_to_ka(0.0, 1.66e-7, 5000.0), 0.0);
    // the scale factor 1 / (C dt)
    EXPECT_NEAR(pa_to_ka(1.0, 1.66e-7, 5000.0), 1.2e3, 0.005 * 1.2e3);
}

TEST(Association, KaRangeInParticlesPerStep)
{
    EXPECT_NEAR(ka_to_particles_per_step(1e4, 1.66e-7, 5000.0), 8.3, 0.005 * 8.3);
    EXPECT_NEAR(ka_to_particles_per_step(1e6, 1.66e-7, 5000.0), 8.3e2, 0.005 * 8.3e2);
    EXPECT_EQ(ka_to_particles_per_step(0.0, 1.66e-7, 5000.0), 0.0);
}

TEST(FirstOrder, ProbabilityToRate)
{
    EXPECT_EQ(prob_to_rate(1.0, 5000.0), 2e-4);
    EXPECT_EQ(prob_to_rate(0.0, 5000.0), 0.0);
    EXPECT_DOUBLE_EQ(prob_to_rate(0.5, 5000.0), 1e-4);
    EXPECT_THROW(prob_to_rate(1.2, 5000.0), nanoevo::DomainError);
}

TEST(Conversions, RoundTripsAndLinearity)
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> prob(0.0, 1.0);
    std::uniform_real_distribution<double> log_c(-9.0, -5.0);
    std::uniform_real_distribution<double> dt(1.0, 1e4);
    for (int i = 0; i < 2000; ++i) {
        const double p = prob(gen);
        const double c = std::pow(10.0, log_c(gen));
        const double t = dt(gen);
        const double alpha = prob(gen);
        const double ka = pa_to_ka(p, c, t);
        EXPECT_NEAR(ka_to_pa(ka, c, t), p, 1e-12 * std::max(p, 1e-300));
        EXPECT_NEAR(particles_per_step_to_ka(ka_to_particles_per_step(ka, c, t), c, t), ka, 1e-12 * ka);
        EXPECT_NEAR(rate_to_prob(prob_to_rate(p, t), t), p, 1e-12 * std::max(p, 1e-300));
        EXPECT_NEAR(pa_to_ka(alpha * p, c, t), alpha * ka, 1e-12 * ka);
        // ka expressed per step is the per-step probability itself
        EXPECT_NEAR(ka_to_particles_per_step(ka, c, t), p, 1e-12);
    }
}

TEST(MapProbabilities, DefaultsAndRangeFlag)
{
    const auto k = map_probabilities(0.3, 1.0, 0.5, UnitsConfig{});
    EXPECT_EQ(k.step_duration_s, 5000.0);
    EXPECT_NEAR(k.ka, 361.0, 0.005 * 361.0);
    EXPECT_EQ(k.kd, 2e-4);
    EXPECT_DOUBLE_EQ(k.ki, 1e-4);
    EXPECT_FALSE(k.ka_in_range);
    EXPECT_NEAR(k.particles_per_step, 0.3, 1e-12);
}
