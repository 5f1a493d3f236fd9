#pragma once

#include "nanoevo/rng.hpp"
#include "nanoevo/types.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace nanoevo {

struct EffectiveRates {
    double pa = 0.0;
    double pd = 0.0;
    double pi = 0.0;
    double pk = 0.0;

    friend bool operator==(const EffectiveRates&, const EffectiveRates&) = default;
};

/// Sign with which a modifier's strength acts on each target, indexed by RateTarget.
/// -1 scales by (1 - strength), +1 by (1 + strength). The default works against the
/// nano-agent: binding, internalization and killing drop, dissociation rises.
using ResistanceDirections = std::array<int, 4>;
inline constexpr ResistanceDirections kDetrimentalDirections = {-1, +1, -1, -1};

inline double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

/// Rates an agent applies to one cell: p_a is damped by `curiosity` for cells absent from
/// memory, then the cell's resistance modifier (if any) scales its target parameter.
inline EffectiveRates effective_rates(const Genome& g, bool familiar, double curiosity,
                                      const std::optional<ResistanceModifier>& modifier,
                                      const ResistanceDirections& directions = kDetrimentalDirections)
{
    EffectiveRates r{g.p_a * (familiar ? 1.0 : curiosity), g.p_d, g.p_i, g.p_k};
    if (modifier) {
        const double factor = 1.0 + directions[static_cast<int>(modifier->target)] * modifier->strength;
        switch (modifier->target) {
        case RateTarget::Association: r.pa *= factor; break;
        case RateTarget::Dissociation: r.pd *= factor; break;
        case RateTarget::Internalization: r.pi *= factor; break;
        case RateTarget::Killing: r.pk *= factor; break;
        }
    }
    r.pa = clamp_probability(r.pa);
    r.pd = clamp_probability(r.pd);
    r.pi = clamp_probability(r.pi);
    r.pk = clamp_probability(r.pk);
    return r;
}

enum class KineticEvent { None, Bind, Unbind, Internalize };

/// Exit weights of the Bound state {internalize, dissociate}. Rescaled proportionally
/// when they would exceed 1; the remainder is the probability of staying bound.
inline std::array<double, 2> bound_exit_weights(const EffectiveRates& r)
{
    const double total = r.pi + r.pd;
    if (total > 1.0)
        return {r.pi / total, r.pd / total};
    return {r.pi, r.pd};
}

struct KineticOutcome {
    AgentState state;
    KineticEvent event;
};

/// One step of free + receptor <-> complex -> internalized + receptor.
/// A Free caller must be co-located with a living cell. Internalized and Spent are
/// left untouched; killing is handled by attempt_kill.
inline KineticOutcome kinetic_step(AgentState state, const EffectiveRates& r, Rng& rng)
{
    switch (state) {
    case AgentState::Free:
        if (rng.bernoulli(r.pa))
            return {AgentState::Bound, KineticEvent::Bind};
        return {state, KineticEvent::None};
    case AgentState::Bound: {
        const auto [w_int, w_dis] = bound_exit_weights(r);
        const double u = rng.uniform();
        if (u < w_int)
            return {AgentState::Internalized, KineticEvent::Internalize};
        if (u < w_int + w_dis)
            return {AgentState::Free, KineticEvent::Unbind};
        return {state, KineticEvent::None};
    }
    default:
        return {state, KineticEvent::None};
    }
}

/// One-shot kill attempt by an agent internalized in `cell`. The agent is released
/// (Learning) or consumed (Simulation) whatever the outcome.
inline bool attempt_kill(NanoAgent& agent, CellAgent& cell, double pk_eff, Mode mode, Rng& rng)
{
    bool killed = false;
    if (cell.alive && rng.bernoulli(pk_eff)) {
        cell.alive = false;
        killed = true;
        if (cell.kind == CellKind::Cancer)
            ++agent.cc_killed;
        else
            ++agent.hc_killed;
    }
    agent.state = mode == Mode::Learning ? AgentState::Free : AgentState::Spent;
    agent.cell_id = -1;
    return killed;
}

} // namespace nanoevo
