#pragma once

#include "nanoevo/error.hpp"

#include <string>

namespace nanoevo::units {

inline constexpr double kAvogadro = 6.02214076e23;
/// Association constants outside this window (1/(M s)) are flagged by reports.
inline constexpr double kKaLow = 1e4;
inline constexpr double kKaHigh = 1e6;

namespace detail {
inline void require_positive(double value, const char* name)
{
    if (!(value > 0.0))
        throw DomainError(std::string(name) + " must be positive");
}
inline void require_probability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(std::string(name) + " must lie in [0, 1]");
}
} // namespace detail

/// Time for a particle to cross one site: d^2 / (msd_factor * D).
/// msd_factor 2 gives the 5000 s step for D = 1e-10 cm^2/s and d = 10 um;
/// 4 is the textbook two-dimensional mean-squared-displacement form.
inline double step_duration(double diffusion_cm2_s, double diameter_cm, double msd_factor = 2.0)
{
    detail::require_positive(diffusion_cm2_s, "diffusion coefficient");
    detail::require_positive(diameter_cm, "cell diameter");
    detail::require_positive(msd_factor, "msd dimension factor");
    return diameter_cm * diameter_cm / (msd_factor * diffusion_cm2_s);
}

/// Volume in litres of a cube with edge `diameter_cm` (1 cm^3 = 1e-3 L).
inline double cube_volume_litres(double diameter_cm)
{
    detail::require_positive(diameter_cm, "cell diameter");
    return diameter_cm * diameter_cm * diameter_cm * 1e-3;
}

/// Molar concentration of `particles` spread over `volume_litres`.
inline double na_molar_concentration(double particles, double volume_litres)
{
    detail::require_positive(volume_litres, "volume");
    if (particles < 0.0)
        throw DomainError("particle count must be non-negative");
    return particles / (kAvogadro * volume_litres);
}

// Per-step association probability <-> association constant in 1/(M s).
// ka = p_a / (C * dt); 1 / (1.66e-7 M * 5000 s) ~ 1.2e3 is the scale factor.
inline double pa_to_ka(double pa, double na_molar, double step_s)
{
    detail::require_probability(pa, "p_a");
    detail::require_positive(na_molar, "NA concentration");
    detail::require_positive(step_s, "step duration");
    return pa / (na_molar * step_s);
}

inline double ka_to_pa(double ka, double na_molar, double step_s)
{
    detail::require_positive(na_molar, "NA concentration");
    detail::require_positive(step_s, "step duration");
    if (ka < 0.0)
        throw DomainError("ka must be non-negative");
    return ka * na_molar * step_s;
}

/// Association constant expressed as particles bound per time step.
inline double ka_to_particles_per_step(double ka, double na_molar, double step_s)
{
    detail::require_positive(na_molar, "NA concentration");
    detail::require_positive(step_s, "step duration");
    if (ka < 0.0)
        throw DomainError("ka must be non-negative");
    return ka * na_molar * step_s;
}

inline double particles_per_step_to_ka(double per_step, double na_molar, double step_s)
{
    detail::require_positive(na_molar, "NA concentration");
    detail::require_positive(step_s, "step duration");
    return per_step / (na_molar * step_s);
}

/// First-order rate constant (1/s) of a per-step probability. Used for kd and ki.
inline double prob_to_rate(double p, double step_s)
{
    detail::require_probability(p, "probability");
    detail::require_positive(step_s, "step duration");
    return p / step_s;
}

inline double rate_to_prob(double rate, double step_s)
{
    detail::require_positive(step_s, "step duration");
    if (rate < 0.0)
        throw DomainError("rate must be non-negative");
    return rate * step_s;
}

/// Physical constants shared by the grid and compartment models.
struct UnitsConfig {
    double diffusion_cm2_s = 1e-10;
    double cell_diameter_cm = 1e-3;
    double particles_per_na = 1e5;
    double msd_dimension_factor = 2.0;
};

struct KineticConstants {
    double ka = 0.0; ///< 1/(M s)
    double kd = 0.0; ///< 1/s
    double ki = 0.0; ///< 1/s
    double diffusion_cm2_s = 0.0;
    double cell_diameter_cm = 0.0;
    double particles_per_na = 0.0;
    double na_molar = 0.0;
    double step_duration_s = 0.0;
    double particles_per_step = 0.0; ///< ka expressed per step
    bool ka_in_range = false;
};

inline KineticConstants map_probabilities(double pa, double pd, double pi, const UnitsConfig& u)
{
    KineticConstants k;
    k.diffusion_cm2_s = u.diffusion_cm2_s;
    k.cell_diameter_cm = u.cell_diameter_cm;
    k.particles_per_na = u.particles_per_na;
    k.step_duration_s = step_duration(u.diffusion_cm2_s, u.cell_diameter_cm, u.msd_dimension_factor);
    k.na_molar = na_molar_concentration(u.particles_per_na, cube_volume_litres(u.cell_diameter_cm));
    k.ka = pa_to_ka(pa, k.na_molar, k.step_duration_s);
    k.kd = prob_to_rate(pd, k.step_duration_s);
    k.ki = prob_to_rate(pi, k.step_duration_s);
    k.particles_per_step = ka_to_particles_per_step(k.ka, k.na_molar, k.step_duration_s);
    k.ka_in_range = k.ka >= kKaLow && k.ka <= kKaHigh;
    return k;
}

} // namespace nanoevo::units
