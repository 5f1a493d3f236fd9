#pragma once

#include "nanoevo/evolution.hpp"
#include "nanoevo/kinetics.hpp"
#include "nanoevo/settings.hpp"
#include "nanoevo/unitmap.hpp"
#include "nanoevo/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nanoevo {

inline constexpr std::array<const char*, 5> kGenomeFields = {"speed", "p_a", "p_d", "p_i", "p_k"};

/// Per-step summary of a grid run.
struct RunStats {
    long step = 0;
    double time_s = 0.0;
    int alive_cc = 0;
    int alive_hc = 0;
    int free = 0; ///< circulating agents
    int bound = 0;
    int internalized = 0;
    int spent = 0;
    int kills_cc = 0; ///< this step
    int kills_hc = 0;
    long injected = 0;
    long cleared = 0;
    std::array<double, 5> genome_mean{}; ///< in kGenomeFields order
    std::array<double, 5> genome_sd{};
    int best_fitness = 0;
    double median_fitness = 0.0;

    friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct TreatmentOutcome {
    long total_dose = 0;
    int cc_initial = 0;
    int cc_final = 0;
    int hc_initial = 0;
    int hc_final = 0;
    double kill_fraction_cc = 0.0;
    double step_duration_s = 0.0;
    std::vector<RunStats> series;
};

struct LearningResult {
    std::vector<RunStats> stats;
    std::vector<NanoAgent> population;
};

using StepObserver = std::function<void(const GridWorld&, const RunStats&)>;

inline std::array<double, 5> genome_values(const Genome& g)
{
    return {static_cast<double>(g.speed), g.p_a, g.p_d, g.p_i, g.p_k};
}

inline RunStats collect_stats(const GridWorld& w, int kills_cc, int kills_hc)
{
    RunStats s;
    s.step = w.step_index;
    s.alive_cc = w.count_alive(CellKind::Cancer);
    s.alive_hc = w.count_alive(CellKind::Healthy);
    s.kills_cc = kills_cc;
    s.kills_hc = kills_hc;
    std::vector<int> fitness;
    fitness.reserve(w.agents.size());
    for (const auto& a : w.agents) {
        switch (a.state) {
        case AgentState::Free: ++s.free; break;
        case AgentState::Bound: ++s.bound; break;
        case AgentState::Internalized: ++s.internalized; break;
        case AgentState::Spent: ++s.spent; break;
        }
        fitness.push_back(local_fitness(a));
        const auto v = genome_values(a.genome);
        for (std::size_t i = 0; i < v.size(); ++i)
            s.genome_mean[i] += v[i];
    }
    const auto n = static_cast<double>(w.agents.size());
    if (w.agents.empty())
        return s;
    for (auto& m : s.genome_mean)
        m /= n;
    for (const auto& a : w.agents) {
        const auto v = genome_values(a.genome);
        for (std::size_t i = 0; i < v.size(); ++i)
            s.genome_sd[i] += (v[i] - s.genome_mean[i]) * (v[i] - s.genome_mean[i]);
    }
    for (auto& sd : s.genome_sd)
        sd = std::sqrt(sd / n);
    std::sort(fitness.begin(), fitness.end());
    s.best_fitness = fitness.back();
    const std::size_t mid = fitness.size() / 2;
    s.median_fitness = fitness.size() % 2 ? fitness[mid] : 0.5 * (fitness[mid - 1] + fitness[mid]);
    return s;
}

struct StepKills {
    int cc = 0;
    int hc = 0;
};

/// One interaction sweep over all agents in a fresh random order:
/// Free agents walk, look, remember and may bind; Bound agents may dissociate or be
/// internalized; Internalized agents make their kill attempt and are released or spent.
inline StepKills advance_agents(GridWorld& w, const KineticsConfig& kc, Mode mode)
{
    StepKills kills;
    std::vector<std::size_t> order(w.agents.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[w.rng.index(i)]);

    for (const std::size_t idx : order) {
        NanoAgent& a = w.agents[idx];
        switch (a.state) {
        case AgentState::Free: {
            move_agent(w, a);
            CellAgent* cell = perceive(w, a);
            if (!cell)
                break;
            const bool familiar = is_familiar(a, cell->signature);
            if (!familiar)
                memorize(a, cell->signature, w.memory_capacity);
            const auto rates = effective_rates(a.genome, familiar, kc.curiosity, cell->resistance, kc.directions);
            if (kinetic_step(a.state, rates, w.rng).event == KineticEvent::Bind) {
                a.state = AgentState::Bound;
                a.cell_id = cell->id;
            }
            break;
        }
        case AgentState::Bound: {
            CellAgent& cell = w.cells[static_cast<std::size_t>(a.cell_id)];
            if (!cell.alive) {
                a.state = AgentState::Free;
                a.cell_id = -1;
                break;
            }
            const auto rates = effective_rates(a.genome, true, kc.curiosity, cell.resistance, kc.directions);
            const auto out = kinetic_step(a.state, rates, w.rng);
            a.state = out.state;
            if (out.event == KineticEvent::Unbind)
                a.cell_id = -1;
            break;
        }
        case AgentState::Internalized: {
            CellAgent& cell = w.cells[static_cast<std::size_t>(a.cell_id)];
            if (!cell.alive) {
                a.state = mode == Mode::Learning ? AgentState::Free : AgentState::Spent;
                a.cell_id = -1;
                break;
            }
            const auto rates = effective_rates(a.genome, true, kc.curiosity, cell.resistance, kc.directions);
            if (attempt_kill(a, cell, rates.pk, mode, w.rng)) {
                if (cell.kind == CellKind::Cancer)
                    ++kills.cc;
                else
                    ++kills.hc;
            }
            break;
        }
        case AgentState::Spent:
            break;
        }
    }
    return kills;
}

/// Tumour proliferation for one step plus per-step signature drift when configured.
inline void grow_tumour(GridWorld& w, const EvolutionConfig& ec)
{
    const std::size_t existing = w.cells.size();
    for (std::size_t i = 0; i < existing; ++i) {
        if (!w.cells[i].alive || w.cells[i].kind != CellKind::Cancer)
            continue;
        if (ec.signature_drift == SignatureDrift::PerStep)
            mutate_cc_signature(w.cells[i], ec.signature_flip_prob, w.rng);
        divide_cell(w, static_cast<int>(i), ec);
    }
}

/// Open-ended learning: agents recycle after every interaction and a selection round runs
/// every round_period steps. Returns one RunStats per step and the final population.
inline LearningResult run_learning(const SimConfig& cfg, std::uint64_t seed, const StepObserver& observer = {})
{
    GridWorld w = init_world(cfg, seed);
    LearningResult result;
    result.stats.reserve(static_cast<std::size_t>(std::max(cfg.learning.steps, 0)));
    for (long s = 0; s < cfg.learning.steps; ++s) {
        w.step_index = s;
        const StepKills kills = advance_agents(w, cfg.kinetics, Mode::Learning);
        if (cfg.evolution.growth_in_learning)
            grow_tumour(w, cfg.evolution);
        RunStats st = collect_stats(w, kills.cc, kills.hc);
        if ((s + 1) % cfg.evolution.round_period == 0) {
            selection_mutation_round(w.agents, cfg.evolution, cfg.world.speed_max, w.rng);
            if (cfg.evolution.fitness_window)
                for (auto& a : w.agents)
                    a.cc_killed = a.hc_killed = 0;
        }
        if (observer)
            observer(w, st);
        result.stats.push_back(st);
    }
    result.population = std::move(w.agents);
    return result;
}

/// The k fittest genomes, ties broken by agent id.
inline std::vector<Genome> top_performers(const std::vector<NanoAgent>& pop, std::size_t k)
{
    if (k > pop.size())
        throw std::invalid_argument("top_performers: k exceeds population size");
    const auto order = rank_by_fitness(pop);
    std::vector<Genome> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        out.push_back(pop[order[i]].genome);
    return out;
}

/// Agents injected at `step`: total/ramp each ramp step, remainder spread over the earliest steps.
inline long injection_count(long step, const Schedule& sched)
{
    if (step < 0 || step >= sched.ramp_steps)
        return 0;
    const long base = sched.total_dose / sched.ramp_steps;
    const long rem = sched.total_dose % sched.ramp_steps;
    return base + (step < rem ? 1 : 0);
}

/// Ceiling on circulating Free agents during the linear decline from `peak` to zero.
inline long clearance_cap(long step, long peak, const Schedule& sched)
{
    if (step < sched.ramp_steps)
        throw std::invalid_argument("clearance_cap: step precedes the decline phase");
    if (sched.decline_steps <= 0)
        return 0;
    const double remaining = static_cast<double>(sched.ramp_steps + sched.decline_steps - step);
    const double cap = std::round(static_cast<double>(peak) * remaining / sched.decline_steps);
    return std::max(0L, static_cast<long>(cap));
}

inline Schedule make_schedule(const SimConfig& cfg)
{
    Schedule s;
    s.total_dose = cfg.simulation.total_dose;
    s.ramp_steps = cfg.simulation.ramp_steps;
    s.decline_steps = cfg.simulation.decline_steps;
    s.step_duration_s = units::step_duration(cfg.units.diffusion_cm2_s, cfg.units.cell_diameter_cm,
                                             cfg.units.msd_dimension_factor);
    return s;
}

inline std::vector<Position> entry_sites(const GridWorld& w, EntrySites entry)
{
    std::vector<Position> sites;
    for (int r = 0; r < w.height; ++r)
        for (int c = 0; c < w.width; ++c) {
            const bool border = entry == EntrySites::LeftEdge
                                    ? c == 0
                                    : (r == 0 || c == 0 || r == w.height - 1 || c == w.width - 1);
            if (border)
                sites.push_back({r, c});
        }
    return sites;
}

/// Treatment evaluation with fixed genomes: dose ramp, linear clearance of circulating
/// agents, agents spent after internalization, no selection.
inline TreatmentOutcome run_simulation(const SimConfig& cfg, const std::vector<Genome>& genomes, std::uint64_t seed,
                                       const StepObserver& observer = {})
{
    if (genomes.empty())
        throw std::invalid_argument("run_simulation: empty genome pool");
    SimConfig local = cfg;
    local.world.agent_count = 0;
    GridWorld w = init_world(local, seed);
    const Schedule sched = make_schedule(cfg);
    const long steps = cfg.simulation.steps > 0 ? cfg.simulation.steps : sched.ramp_steps + sched.decline_steps + 1;
    const auto entries = entry_sites(w, cfg.simulation.entry);

    TreatmentOutcome out;
    out.total_dose = sched.total_dose;
    out.step_duration_s = sched.step_duration_s;
    out.cc_initial = w.count_alive(CellKind::Cancer);
    out.hc_initial = w.count_alive(CellKind::Healthy);
    out.series.reserve(static_cast<std::size_t>(steps));

    long peak = 0;
    std::vector<Position> open;
    for (long s = 0; s < steps; ++s) {
        w.step_index = s;
        const long inject = injection_count(s, sched);
        if (inject > 0) {
            open.clear();
            for (const auto& p : entries)
                if (!w.living_cell_at(p))
                    open.push_back(p);
            const auto& pool = open.empty() ? entries : open;
            for (long i = 0; i < inject; ++i) {
                const Genome& g = genomes[w.rng.index(genomes.size())];
                w.agents.push_back(make_agent(w, g, pool[w.rng.index(pool.size())]));
            }
        }

        const StepKills kills = advance_agents(w, cfg.kinetics, Mode::Simulation);
        if (cfg.simulation.growth)
            grow_tumour(w, cfg.evolution);

        long cleared = 0;
        if (s == sched.ramp_steps - 1)
            peak = std::count_if(w.agents.begin(), w.agents.end(),
                                 [](const NanoAgent& a) { return a.state == AgentState::Free; });
        if (s >= sched.ramp_steps) {
            std::vector<std::size_t> circulating;
            for (std::size_t i = 0; i < w.agents.size(); ++i)
                if (w.agents[i].state == AgentState::Free)
                    circulating.push_back(i);
            const long cap = clearance_cap(s, peak, sched);
            const long excess = static_cast<long>(circulating.size()) - cap;
            if (excess > 0) {
                std::vector<char> remove(w.agents.size(), 0);
                for (long i = 0; i < excess; ++i) {
                    const std::size_t j = static_cast<std::size_t>(i) + w.rng.index(circulating.size() - static_cast<std::size_t>(i));
                    std::swap(circulating[static_cast<std::size_t>(i)], circulating[j]);
                    remove[circulating[static_cast<std::size_t>(i)]] = 1;
                }
                std::vector<NanoAgent> kept;
                kept.reserve(w.agents.size() - static_cast<std::size_t>(excess));
                for (std::size_t i = 0; i < w.agents.size(); ++i)
                    if (!remove[i])
                        kept.push_back(std::move(w.agents[i]));
                w.agents = std::move(kept);
                cleared = excess;
            }
        }

        RunStats st = collect_stats(w, kills.cc, kills.hc);
        st.time_s = static_cast<double>(s + 1) * sched.step_duration_s;
        st.injected = inject;
        st.cleared = cleared;
        if (observer)
            observer(w, st);
        out.series.push_back(st);
    }

    out.cc_final = w.count_alive(CellKind::Cancer);
    out.hc_final = w.count_alive(CellKind::Healthy);
    out.kill_fraction_cc = out.cc_initial > 0
                               ? static_cast<double>(out.cc_initial - out.cc_final) / out.cc_initial
                               : 0.0;
    return out;
}

} // namespace nanoevo
