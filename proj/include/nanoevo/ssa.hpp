#pragma once

#include "nanoevo/error.hpp"
#include "nanoevo/rng.hpp"
#include "nanoevo/settings.hpp"
#include "nanoevo/unitmap.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace nanoevo::ssa {

struct ChainRates {
    double ka_stoch = 0.0; ///< 1/s per (particle, receptor) pair
    double kd = 0.0;       ///< 1/s
    double ki = 0.0;       ///< 1/s
    double k_hop = 0.0;    ///< 1/s per particle per direction
};

/// 1D chain of well-mixed compartments, one cell each, compartment 0 facing the vessel.
struct CompartmentChain {
    int n = 0;
    long r0 = 0;
    Boundary boundary = Boundary::Bolus;
    long source_level = 0;
    long kill_threshold = 1;
    ChainRates rates;
    std::vector<long> np_free;
    std::vector<long> receptors_free;
    std::vector<long> complexes;
    std::vector<long> np_internal;
    std::vector<char> cell_alive;

    long total_particles() const
    {
        long t = 0;
        for (int i = 0; i < n; ++i)
            t += np_free[i] + complexes[i] + np_internal[i];
        return t;
    }
};

/// Fresh chain: every compartment holds r0 free receptors and a living cell; compartment 0
/// starts with `initial_free` particles (the bolus, or the clamped source level).
inline CompartmentChain make_chain(int n, long r0, const ChainRates& rates, Boundary boundary, long initial_free,
                                   long kill_threshold = 1)
{
    if (n < 1)
        throw ConfigError("ssa.n_compartments", "must be at least 1");
    if (r0 < 0)
        throw ConfigError("ssa.receptors_per_cell", "must be non-negative");
    if (initial_free < 0)
        throw ConfigError(boundary == Boundary::Bolus ? "ssa.bolus" : "ssa.source_level", "must be non-negative");
    CompartmentChain c;
    c.n = n;
    c.r0 = r0;
    c.boundary = boundary;
    c.source_level = boundary == Boundary::Source ? initial_free : 0;
    c.kill_threshold = kill_threshold;
    c.rates = rates;
    c.np_free.assign(n, 0);
    c.receptors_free.assign(n, r0);
    c.complexes.assign(n, 0);
    c.np_internal.assign(n, 0);
    c.cell_alive.assign(n, 1);
    c.np_free[0] = initial_free;
    return c;
}

/// Rates of the shipped chain: p_a/p_d/p_i mapped to ka/kd/ki, ka converted to a
/// per-pair stochastic constant over one cubic compartment, k_hop = D / d^2.
inline ChainRates chain_rates(const SsaConfig& cfg, const units::UnitsConfig& u)
{
    const auto k = units::map_probabilities(cfg.p_a, cfg.p_d, cfg.p_i, u);
    const double volume_l = units::cube_volume_litres(u.cell_diameter_cm);
    ChainRates r;
    r.ka_stoch = k.ka / (volume_l * units::kAvogadro);
    r.kd = k.kd;
    r.ki = k.ki;
    r.k_hop = cfg.k_hop_override ? *cfg.k_hop_override : u.diffusion_cm2_s / (u.cell_diameter_cm * u.cell_diameter_cm);
    return r;
}

inline CompartmentChain build_chain(const SsaConfig& cfg, const units::UnitsConfig& u)
{
    if (cfg.kill_threshold < 1)
        throw ConfigError("ssa.kill_threshold", "must be at least 1");
    if (cfg.k_hop_override && *cfg.k_hop_override < 0.0)
        throw ConfigError("ssa.k_hop_override", "must be non-negative");
    const long initial = cfg.boundary == Boundary::Bolus ? cfg.bolus : cfg.source_level;
    return make_chain(cfg.n_compartments, cfg.receptors_per_cell, chain_rates(cfg, u), cfg.boundary, initial,
                      cfg.kill_threshold);
}

/// Species counts of every compartment at one instant.
struct State {
    std::vector<double> np_free;
    std::vector<double> receptors_free;
    std::vector<double> complexes;
    std::vector<double> np_internal;
    std::vector<double> cell_alive; ///< 1 alive, 0 dead; fraction alive for averaged trajectories
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;

    const State& final_state() const { return states.back(); }
};

inline State snapshot(const CompartmentChain& c)
{
    State s;
    s.np_free.assign(c.np_free.begin(), c.np_free.end());
    s.receptors_free.assign(c.receptors_free.begin(), c.receptors_free.end());
    s.complexes.assign(c.complexes.begin(), c.complexes.end());
    s.np_internal.assign(c.np_internal.begin(), c.np_internal.end());
    s.cell_alive.assign(c.cell_alive.begin(), c.cell_alive.end());
    return s;
}

/// 0, dt, 2dt, ... up to t_end, with t_end always included.
inline std::vector<double> sample_times(double t_end, double sample_dt)
{
    if (!(t_end > 0.0))
        throw std::invalid_argument("t_end must be positive");
    if (!(sample_dt > 0.0))
        throw std::invalid_argument("sample interval must be positive");
    std::vector<double> t;
    for (long k = 0;; ++k) {
        const double tk = static_cast<double>(k) * sample_dt;
        if (tk >= t_end * (1.0 - 1e-12))
            break;
        t.push_back(tk);
    }
    t.push_back(t_end);
    return t;
}

struct Reaction {
    std::size_t channel = 0;
    double tau = 0.0;
};

/// Direct-method draw: waiting time ~ Exp(a0), channel with probability a_j / a0.
/// Empty when every propensity is zero.
inline std::optional<Reaction> next_reaction(std::span<const double> propensities, Rng& rng)
{
    double a0 = 0.0;
    for (const double a : propensities)
        a0 += a;
    if (!(a0 > 0.0))
        return std::nullopt;
    Reaction r;
    r.tau = rng.exponential(a0);
    const double target = rng.uniform() * a0;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < propensities.size(); ++j) {
        if (propensities[j] <= 0.0)
            continue;
        last_positive = j;
        acc += propensities[j];
        if (target < acc) {
            r.channel = j;
            return r;
        }
    }
    r.channel = last_positive; // rounding at the top end
    return r;
}

namespace detail {

enum Channel : std::size_t { kBind = 0, kUnbind, kInternalize, kHopLeft, kHopRight, kChannels };

inline void update_propensities(const CompartmentChain& c, int i, std::vector<double>& a)
{
    if (i < 0 || i >= c.n)
        return;
    const auto base = static_cast<std::size_t>(i) * kChannels;
    const auto F = static_cast<double>(c.np_free[i]);
    const auto C = static_cast<double>(c.complexes[i]);
    a[base + kBind] = c.rates.ka_stoch * F * static_cast<double>(c.receptors_free[i]);
    a[base + kUnbind] = c.rates.kd * C;
    a[base + kInternalize] = c.rates.ki * C;
    a[base + kHopLeft] = i > 0 ? c.rates.k_hop * F : 0.0;
    a[base + kHopRight] = i < c.n - 1 ? c.rates.k_hop * F : 0.0;
}

inline void fire(CompartmentChain& c, int i, Channel ch)
{
    switch (ch) {
    case kBind:
        --c.np_free[i];
        --c.receptors_free[i];
        ++c.complexes[i];
        break;
    case kUnbind:
        --c.complexes[i];
        ++c.receptors_free[i];
        ++c.np_free[i];
        break;
    case kInternalize:
        --c.complexes[i];
        ++c.receptors_free[i];
        ++c.np_internal[i];
        if (c.cell_alive[i] && c.np_internal[i] >= c.kill_threshold)
            c.cell_alive[i] = 0;
        break;
    case kHopLeft:
        --c.np_free[i];
        ++c.np_free[i - 1];
        break;
    case kHopRight:
        --c.np_free[i];
        ++c.np_free[i + 1];
        break;
    default:
        break;
    }
    if (c.boundary == Boundary::Source)
        c.np_free[0] = c.source_level;
}

} // namespace detail

/// Exact Gillespie direct-method run of binding, unbinding, internalization and hopping
/// up to t_end, sampled every sample_dt. The chain is left in its final state.
inline Trajectory run_ssa(CompartmentChain& chain, double t_end, double sample_dt, Rng& rng)
{
    const auto times = sample_times(t_end, sample_dt);
    std::vector<double> a(static_cast<std::size_t>(chain.n) * detail::kChannels, 0.0);
    for (int i = 0; i < chain.n; ++i)
        detail::update_propensities(chain, i, a);

    Trajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());
    double t = 0.0;
    std::size_t next_sample = 0;
    while (next_sample < times.size()) {
        const auto reaction = next_reaction(a, rng);
        const double t_next = reaction ? t + reaction->tau : std::numeric_limits<double>::infinity();
        while (next_sample < times.size() && times[next_sample] < t_next)
            traj.states.push_back(snapshot(chain)), ++next_sample;
        if (next_sample == times.size())
            break;
        const int i = static_cast<int>(reaction->channel / detail::kChannels);
        detail::fire(chain, i, static_cast<detail::Channel>(reaction->channel % detail::kChannels));
        for (int j = i - 1; j <= i + 1; ++j)
            detail::update_propensities(chain, j, a);
        if (chain.boundary == Boundary::Source)
            detail::update_propensities(chain, 0, a);
        t = t_next;
    }
    return traj;
}

namespace detail {

// y layout: [F_0..F_{n-1}, R_0.., C_0.., I_0..]
inline void meanfield_rhs(const CompartmentChain& c, const std::vector<double>& y, std::vector<double>& dy)
{
    const int n = c.n;
    const auto& k = c.rates;
    for (int i = 0; i < n; ++i) {
        const double F = y[i];
        const double R = y[n + i];
        const double C = y[2 * n + i];
        const double bind = k.ka_stoch * F * R;
        const double unbind = k.kd * C;
        const double intern = k.ki * C;
        double hop = 0.0;
        if (i > 0)
            hop += k.k_hop * (y[i - 1] - F);
        if (i < n - 1)
            hop += k.k_hop * (y[i + 1] - F);
        dy[i] = -bind + unbind + hop;
        dy[n + i] = -bind + unbind + intern;
        dy[2 * n + i] = bind - unbind - intern;
        dy[3 * n + i] = intern;
    }
    if (c.boundary == Boundary::Source)
        dy[0] = 0.0;
}

} // namespace detail

/// Deterministic rate equations of the same channels, classical RK4 with step <= dt,
/// sampled on the same grid as run_ssa (sample_dt <= 0 means every dt).
inline Trajectory meanfield_ode(const CompartmentChain& chain, double t_end, double dt, double sample_dt = 0.0)
{
    if (!(dt > 0.0))
        throw std::invalid_argument("meanfield_ode: dt must be positive");
    const auto times = sample_times(t_end, sample_dt > 0.0 ? sample_dt : dt);
    const int n = chain.n;
    const auto N = static_cast<std::size_t>(4 * n);
    std::vector<double> y(N), k1(N), k2(N), k3(N), k4(N), tmp(N);
    for (int i = 0; i < n; ++i) {
        y[i] = static_cast<double>(chain.np_free[i]);
        y[n + i] = static_cast<double>(chain.receptors_free[i]);
        y[2 * n + i] = static_cast<double>(chain.complexes[i]);
        y[3 * n + i] = static_cast<double>(chain.np_internal[i]);
    }
    auto record = [&](Trajectory& tr) {
        State s;
        s.np_free.assign(y.begin(), y.begin() + n);
        s.receptors_free.assign(y.begin() + n, y.begin() + 2 * n);
        s.complexes.assign(y.begin() + 2 * n, y.begin() + 3 * n);
        s.np_internal.assign(y.begin() + 3 * n, y.end());
        s.cell_alive.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            s.cell_alive[i] = (chain.cell_alive[i] && s.np_internal[i] < static_cast<double>(chain.kill_threshold)) ? 1.0 : 0.0;
        tr.states.push_back(std::move(s));
    };

    Trajectory traj;
    traj.times = times;
    record(traj);
    for (std::size_t s = 1; s < times.size(); ++s) {
        const double span = times[s] - times[s - 1];
        const auto substeps = static_cast<long>(std::ceil(span / dt - 1e-9));
        const double h = span / static_cast<double>(substeps);
        for (long step = 0; step < substeps; ++step) {
            detail::meanfield_rhs(chain, y, k1);
            for (std::size_t j = 0; j < N; ++j)
                tmp[j] = y[j] + 0.5 * h * k1[j];
            detail::meanfield_rhs(chain, tmp, k2);
            for (std::size_t j = 0; j < N; ++j)
                tmp[j] = y[j] + 0.5 * h * k2[j];
            detail::meanfield_rhs(chain, tmp, k3);
            for (std::size_t j = 0; j < N; ++j)
                tmp[j] = y[j] + h * k3[j];
            detail::meanfield_rhs(chain, tmp, k4);
            for (std::size_t j = 0; j < N; ++j) {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                if (!std::isfinite(y[j]))
                    throw NumericalError("meanfield_ode: non-finite state, reduce dt");
            }
        }
        record(traj);
    }
    return traj;
}

/// Bound-plus-internalized signal per compartment.
inline std::vector<double> retained_signal(const State& s)
{
    std::vector<double> out(s.complexes.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = s.complexes[i] + s.np_internal[i];
    return out;
}

/// Depth in cells of the deepest compartment whose final retained signal is at least
/// threshold_fraction of compartment 0's.
inline int penetration_depth(const Trajectory& traj, double threshold_fraction)
{
    if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0))
        throw std::invalid_argument("penetration_depth: threshold fraction must lie in (0, 1]");
    if (traj.states.empty())
        throw std::invalid_argument("penetration_depth: empty trajectory");
    const auto signal = retained_signal(traj.final_state());
    if (!(signal.at(0) > 0.0))
        throw DomainError("penetration_depth: compartment 0 retains nothing, depth undefined");
    int deepest = 0;
    for (std::size_t i = 0; i < signal.size(); ++i)
        if (signal[i] >= threshold_fraction * signal[0])
            deepest = static_cast<int>(i);
    return deepest + 1;
}

/// Compartment i is killed iff np_internal_i >= kill_threshold.
inline std::vector<bool> kill_report(std::span<const long> np_internal, long kill_threshold)
{
    std::vector<bool> killed(np_internal.size());
    for (std::size_t i = 0; i < killed.size(); ++i)
        killed[i] = np_internal[i] >= kill_threshold;
    return killed;
}

inline std::vector<bool> kill_report(const CompartmentChain& chain)
{
    return kill_report(std::span<const long>(chain.np_internal), chain.kill_threshold);
}

/// Element-wise mean over replicate trajectories sampled on the same grid.
inline Trajectory mean_trajectory(const std::vector<Trajectory>& reps)
{
    if (reps.empty())
        throw std::invalid_argument("mean_trajectory: no replicates");
    Trajectory m = reps.front();
    const double inv = 1.0 / static_cast<double>(reps.size());
    auto accumulate = [&](auto member) {
        for (std::size_t s = 0; s < m.states.size(); ++s) {
            auto& dst = m.states[s].*member;
            for (std::size_t i = 0; i < dst.size(); ++i) {
                double sum = 0.0;
                for (const auto& r : reps)
                    sum += (r.states[s].*member)[i];
                dst[i] = sum * inv;
            }
        }
    };
    accumulate(&State::np_free);
    accumulate(&State::receptors_free);
    accumulate(&State::complexes);
    accumulate(&State::np_internal);
    accumulate(&State::cell_alive);
    return m;
}

} // namespace nanoevo::ssa
