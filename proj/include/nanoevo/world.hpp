#pragma once

#include "nanoevo/error.hpp"
#include "nanoevo/rng.hpp"
#include "nanoevo/settings.hpp"
#include "nanoevo/types.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

namespace nanoevo {

struct GridWorld {
    int width = 0;
    int height = 0;
    std::vector<CellAgent> cells; ///< indexed by cell id, dead cells kept
    std::vector<int> site;        ///< cell id per site, -1 when never occupied
    std::vector<NanoAgent> agents;
    Rng rng;
    long step_index = 0;
    int next_agent_id = 0;
    int memory_capacity = 4;

    bool in_bounds(Position p) const { return p.row >= 0 && p.row < height && p.col >= 0 && p.col < width; }
    std::size_t site_index(Position p) const { return static_cast<std::size_t>(p.row) * width + p.col; }

    CellAgent* living_cell_at(Position p)
    {
        const int id = site[site_index(p)];
        return id >= 0 && cells[id].alive ? &cells[id] : nullptr;
    }
    const CellAgent* living_cell_at(Position p) const
    {
        const int id = site[site_index(p)];
        return id >= 0 && cells[id].alive ? &cells[id] : nullptr;
    }

    int count_alive(CellKind kind) const
    {
        return static_cast<int>(std::count_if(cells.begin(), cells.end(),
                                              [kind](const CellAgent& c) { return c.alive && c.kind == kind; }));
    }
};

inline constexpr std::array<Position, 8> kMooreOffsets = {
    Position{-1, -1}, Position{-1, 0}, Position{-1, 1}, Position{0, -1},
    Position{0, 1},   Position{1, -1}, Position{1, 0},  Position{1, 1}};

/// In-bounds Moore neighbours of p, in fixed offset order.
inline int moore_neighbours(const GridWorld& w, Position p, std::array<Position, 8>& out)
{
    int n = 0;
    for (const auto& d : kMooreOffsets) {
        const Position q{p.row + d.row, p.col + d.col};
        if (w.in_bounds(q))
            out[n++] = q;
    }
    return n;
}

inline Genome random_genome(const KineticsConfig& k, int speed_max, Rng& rng)
{
    Genome g;
    g.speed = rng.integer(1, speed_max);
    g.p_a = rng.uniform(k.init_prob_min, k.init_prob_max);
    g.p_d = rng.uniform(k.init_prob_min, k.init_prob_max);
    g.p_i = rng.uniform(k.init_prob_min, k.init_prob_max);
    g.p_k = rng.uniform(k.init_prob_min, k.init_prob_max);
    return g;
}

inline NanoAgent make_agent(GridWorld& w, const Genome& g, Position pos)
{
    NanoAgent a;
    a.id = w.next_agent_id++;
    a.genome = g;
    a.pos = pos;
    return a;
}

/// Picks round(resistance_fraction * |CC|) distinct cancer cells and gives each one
/// modifier with a uniform target and a strength uniform on the configured range.
/// Returns the number of modifiers assigned.
inline int assign_resistance(std::vector<CellAgent>& cells, const EvolutionConfig& cfg, Rng& rng)
{
    std::vector<int> cancer;
    for (const auto& c : cells)
        if (c.kind == CellKind::Cancer)
            cancer.push_back(c.id);
    const auto count = static_cast<std::size_t>(std::lround(cfg.resistance_fraction * static_cast<double>(cancer.size())));
    // partial Fisher-Yates
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.index(cancer.size() - i);
        std::swap(cancer[i], cancer[j]);
        ResistanceModifier m;
        m.target = kAllTargets[rng.index(kAllTargets.size())];
        m.strength = rng.uniform(cfg.resistance_strength_min, cfg.resistance_strength_max);
        cells[cancer[i]].resistance = m;
    }
    return static_cast<int>(count);
}

/// Builds the initial world: cancer disk, healthy ring, resistance modifiers and a
/// learning population of agent_count random genomes at uniform positions with empty memory.
inline GridWorld init_world(const SimConfig& cfg, std::uint64_t seed)
{
    const WorldConfig& wc = cfg.world;
    if (wc.width < 8)
        throw ConfigError("world.width", "must be at least 8");
    if (wc.height < 8)
        throw ConfigError("world.height", "must be at least 8");
    if (wc.cc_count < 0)
        throw ConfigError("world.cc_count", "must be non-negative");
    if (wc.hc_count < 0)
        throw ConfigError("world.hc_count", "must be non-negative");
    if (static_cast<long>(wc.cc_count) + wc.hc_count > static_cast<long>(wc.width) * wc.height)
        throw ConfigError("world.cc_count", "cc_count + hc_count exceeds the number of grid sites");
    if (wc.signature_bits < 1 || wc.signature_bits > 64)
        throw ConfigError("world.signature_bits", "must lie in [1, 64]");
    if (wc.memory_capacity < 1)
        throw ConfigError("world.memory_capacity", "must be at least 1");
    if (wc.agent_count < 0)
        throw ConfigError("world.agent_count", "must be non-negative");
    if (wc.speed_max < 1)
        throw ConfigError("world.speed_max", "must be at least 1");

    GridWorld w;
    w.width = wc.width;
    w.height = wc.height;
    w.rng = Rng(seed);
    w.memory_capacity = wc.memory_capacity;
    w.site.assign(static_cast<std::size_t>(w.width) * w.height, -1);

    std::vector<int> order(w.site.size());
    std::iota(order.begin(), order.end(), 0);
    if (wc.placement == Placement::Disk) {
        const double cr = (w.height - 1) / 2.0;
        const double cc = (w.width - 1) / 2.0;
        auto dist2 = [&](int s) {
            const double dr = s / w.width - cr;
            const double dc = s % w.width - cc;
            return dr * dr + dc * dc;
        };
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist2(a) < dist2(b); });
    } else {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[w.rng.index(i)]);
    }

    const std::uint64_t mask = signature_mask(wc.signature_bits);
    const Signature tumour{w.rng.bits() & mask, wc.signature_bits};
    Signature healthy{w.rng.bits() & mask, wc.signature_bits};
    while (healthy == tumour)
        healthy.bits = w.rng.bits() & mask;

    const int total = wc.cc_count + wc.hc_count;
    w.cells.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        CellAgent c;
        c.id = i;
        c.founder_id = i;
        c.kind = i < wc.cc_count ? CellKind::Cancer : CellKind::Healthy;
        c.signature = c.kind == CellKind::Cancer ? tumour : healthy;
        c.pos = Position{order[i] / w.width, order[i] % w.width};
        w.site[order[i]] = i;
        w.cells.push_back(c);
    }
    assign_resistance(w.cells, cfg.evolution, w.rng);

    w.agents.reserve(static_cast<std::size_t>(wc.agent_count));
    for (int i = 0; i < wc.agent_count; ++i) {
        const Genome g = random_genome(cfg.kinetics, wc.speed_max, w.rng);
        const Position p{w.rng.integer(0, w.height - 1), w.rng.integer(0, w.width - 1)};
        w.agents.push_back(make_agent(w, g, p));
    }
    return w;
}

/// Random walk of up to genome.speed Moore hops; stops on entering a living cell's site.
inline Position move_agent(GridWorld& w, NanoAgent& agent)
{
    if (agent.state != AgentState::Free)
        throw ContractError("move_agent requires a Free agent");
    std::array<Position, 8> nb{};
    for (int hop = 0; hop < agent.genome.speed; ++hop) {
        const int n = moore_neighbours(w, agent.pos, nb);
        agent.pos = nb[w.rng.index(static_cast<std::size_t>(n))];
        if (w.living_cell_at(agent.pos))
            break;
    }
    return agent.pos;
}

/// The living cell at the agent's site, or nullptr.
inline CellAgent* perceive(GridWorld& w, const NanoAgent& agent) { return w.living_cell_at(agent.pos); }

inline bool is_familiar(const NanoAgent& agent, const Signature& sig)
{
    return std::find(agent.memory.begin(), agent.memory.end(), sig) != agent.memory.end();
}

/// FIFO insert; the oldest entry is evicted once capacity is exceeded.
inline void memorize(NanoAgent& agent, const Signature& sig, int capacity)
{
    if (is_familiar(agent, sig))
        throw ContractError("memorize: signature already in memory");
    agent.memory.push_back(sig);
    if (static_cast<int>(agent.memory.size()) > capacity)
        agent.memory.erase(agent.memory.begin());
}

/// Every living cell sits on its own site and the site map points back at it.
inline bool check_site_uniqueness(const GridWorld& w)
{
    std::vector<int> seen(w.site.size(), -1);
    for (const auto& c : w.cells) {
        if (!c.alive)
            continue;
        if (!w.in_bounds(c.pos))
            return false;
        const auto s = w.site_index(c.pos);
        if (seen[s] != -1 || w.site[s] != c.id)
            return false;
        seen[s] = c.id;
    }
    return true;
}

} // namespace nanoevo
