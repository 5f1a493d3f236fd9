#pragma once

#include "nanoevo/error.hpp"
#include "nanoevo/rng.hpp"
#include "nanoevo/settings.hpp"
#include "nanoevo/types.hpp"
#include "nanoevo/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace nanoevo {

inline int local_fitness(const NanoAgent& a) { return a.cc_killed - a.hc_killed; }

/// Gaussian perturbation of each probability (clipped to [0,1]); speed steps -1 or +1
/// with probability sigma each (capped at 1/2), clipped to [1, speed_max].
inline Genome mutate_genome(const Genome& g, double sigma, int speed_max, Rng& rng)
{
    if (sigma <= 0.0)
        return g;
    Genome m = g;
    m.p_a = clamp_probability(g.p_a + rng.normal(0.0, sigma));
    m.p_d = clamp_probability(g.p_d + rng.normal(0.0, sigma));
    m.p_i = clamp_probability(g.p_i + rng.normal(0.0, sigma));
    m.p_k = clamp_probability(g.p_k + rng.normal(0.0, sigma));
    const double step = std::min(sigma, 0.5);
    const double u = rng.uniform();
    if (u < step)
        m.speed = g.speed - 1;
    else if (u < 2.0 * step)
        m.speed = g.speed + 1;
    m.speed = std::clamp(m.speed, 1, speed_max);
    return m;
}

/// Population indices ordered by descending fitness, ties by ascending agent id.
inline std::vector<std::size_t> rank_by_fitness(const std::vector<NanoAgent>& pop)
{
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const int fa = local_fitness(pop[a]);
        const int fb = local_fitness(pop[b]);
        return fa != fb ? fa > fb : pop[a].id < pop[b].id;
    });
    return order;
}

/// Truncation round: the bottom floor(replace_fraction * N) agents are overwritten, at their
/// own positions, by fresh agents carrying mutated copies of genomes drawn uniformly from the
/// top floor(replace_fraction * N). A population whose fitness values are all equal carries no
/// selection signal and is left alone, as are populations smaller than 2. Returns the number
/// replaced.
inline int selection_mutation_round(std::vector<NanoAgent>& pop, const EvolutionConfig& cfg, int speed_max, Rng& rng)
{
    const std::size_t n = pop.size();
    if (n < 2)
        return 0;
    const auto k = static_cast<std::size_t>(std::floor(cfg.replace_fraction * static_cast<double>(n)));
    if (k == 0)
        return 0;
    const auto order = rank_by_fitness(pop);
    if (local_fitness(pop[order.front()]) == local_fitness(pop[order.back()]))
        return 0;
    int next_id = 0;
    for (const auto& a : pop)
        next_id = std::max(next_id, a.id + 1);

    int replaced = 0;
    for (std::size_t r = n - k; r < n; ++r) {
        const std::size_t victim = order[r];
        const std::size_t parent = order[rng.index(k)];
        NanoAgent child;
        child.id = next_id++;
        child.genome = mutate_genome(pop[parent].genome, cfg.mutation_sigma, speed_max, rng);
        child.pos = pop[victim].pos;
        pop[victim] = std::move(child);
        ++replaced;
    }
    return replaced;
}

/// Independent bit flips of a cancer cell's signature.
inline void mutate_cc_signature(CellAgent& cell, double flip_prob, Rng& rng)
{
    if (cell.kind != CellKind::Cancer)
        throw ContractError("mutate_cc_signature called on a healthy cell");
    for (int b = 0; b < cell.signature.length; ++b)
        if (rng.bernoulli(flip_prob))
            cell.signature.bits ^= std::uint64_t{1} << b;
}

/// With probability division_prob, places a daughter of a living cancer cell on a uniformly
/// chosen free Moore neighbour. The daughter inherits the resistance modifier verbatim and a
/// copy of the signature (mutated here when drift happens at division). Returns its id.
inline std::optional<int> divide_cell(GridWorld& w, int cell_id, const EvolutionConfig& cfg)
{
    const CellAgent parent = w.cells[static_cast<std::size_t>(cell_id)];
    if (!parent.alive || parent.kind != CellKind::Cancer)
        throw ContractError("divide_cell requires a living cancer cell");
    if (!w.rng.bernoulli(cfg.division_prob))
        return std::nullopt;

    std::array<Position, 8> nb{};
    std::array<Position, 8> free{};
    const int n = moore_neighbours(w, parent.pos, nb);
    int n_free = 0;
    for (int i = 0; i < n; ++i)
        if (!w.living_cell_at(nb[i]))
            free[n_free++] = nb[i];
    if (n_free == 0)
        return std::nullopt;

    CellAgent daughter = parent;
    daughter.id = static_cast<int>(w.cells.size());
    daughter.pos = free[w.rng.index(static_cast<std::size_t>(n_free))];
    if (cfg.signature_drift == SignatureDrift::AtDivision)
        mutate_cc_signature(daughter, cfg.signature_flip_prob, w.rng);
    w.site[w.site_index(daughter.pos)] = daughter.id;
    w.cells.push_back(daughter);
    return daughter.id;
}

} // namespace nanoevo
