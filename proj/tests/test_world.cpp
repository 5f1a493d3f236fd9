#include "nanoevo/runner.hpp"
#include "nanoevo/world.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <map>

using namespace nanoevo;

namespace {

SimConfig empty_world(int width = 20, int height = 20)
{
    SimConfig cfg;
    cfg.world.width = width;
    cfg.world.height = height;
    cfg.world.cc_count = 0;
    cfg.world.hc_count = 0;
    cfg.world.agent_count = 0;
    return cfg;
}

// Puts a living cancer cell on p.
int place_cell(GridWorld& w, Position p, CellKind kind = CellKind::Cancer)
{
    CellAgent c;
    c.id = static_cast<int>(w.cells.size());
    c.founder_id = c.id;
    c.kind = kind;
    c.signature = Signature{0x5A, 8};
    c.pos = p;
    w.site[w.site_index(p)] = c.id;
    w.cells.push_back(c);
    return c.id;
}

} // namespace

TEST(InitWorld, DefaultCountsAndResistance)
{
    const SimConfig cfg;
    const GridWorld w = init_world(cfg, 42);
    EXPECT_EQ(w.width, 50);
    EXPECT_EQ(w.height, 50);
    EXPECT_EQ(w.count_alive(CellKind::Cancer), 200);
    EXPECT_EQ(w.count_alive(CellKind::Healthy), cfg.world.hc_count);
    int resistant = 0;
    for (const auto& c : w.cells) {
        if (c.resistance) {
            ++resistant;
            EXPECT_EQ(c.kind, CellKind::Cancer);
            EXPECT_GE(c.resistance->strength, 0.30);
            EXPECT_LE(c.resistance->strength, 0.80);
        }
    }
    EXPECT_EQ(resistant, 20);
    EXPECT_EQ(w.agents.size(), 200u);
    for (const auto& a : w.agents) {
        EXPECT_TRUE(a.memory.empty());
        EXPECT_EQ(a.state, AgentState::Free);
        EXPECT_TRUE(w.in_bounds(a.pos));
    }
    EXPECT_TRUE(check_site_uniqueness(w));
}

TEST(InitWorld, DiskPlacesTumourInsideHealthyRing)
{
    const GridWorld w = init_world(SimConfig{}, 1);
    const double cr = 24.5, cc = 24.5;
    double max_cancer = 0, min_healthy = 1e9;
    for (const auto& c : w.cells) {
        const double d = std::hypot(c.pos.row - cr, c.pos.col - cc);
        if (c.kind == CellKind::Cancer)
            max_cancer = std::max(max_cancer, d);
        else
            min_healthy = std::min(min_healthy, d);
    }
    EXPECT_LE(max_cancer, min_healthy);
}

TEST(InitWorld, ZeroCancerCellsMeansNoResistance)
{
    SimConfig cfg;
    cfg.world.cc_count = 0;
    const GridWorld w = init_world(cfg, 3);
    for (const auto& c : w.cells)
        EXPECT_FALSE(c.resistance.has_value());
}

TEST(InitWorld, Deterministic)
{
    const GridWorld a = init_world(SimConfig{}, 9);
    const GridWorld b = init_world(SimConfig{}, 9);
    ASSERT_EQ(a.cells.size(), b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        EXPECT_EQ(a.cells[i].pos, b.cells[i].pos);
        EXPECT_EQ(a.cells[i].signature, b.cells[i].signature);
        EXPECT_EQ(a.cells[i].resistance, b.cells[i].resistance);
    }
    for (std::size_t i = 0; i < a.agents.size(); ++i) {
        EXPECT_EQ(a.agents[i].genome, b.agents[i].genome);
        EXPECT_EQ(a.agents[i].pos, b.agents[i].pos);
    }
}

TEST(InitWorld, ErrorsNameTheKey)
{
    SimConfig cfg;
    cfg.world.width = 2;
    try {
        init_world(cfg, 1);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "world.width");
    }
    cfg = SimConfig{};
    cfg.world.cc_count = 5000;
    try {
        init_world(cfg, 1);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "world.cc_count");
    }
}

TEST(MoveAgent, SingleHopIsUniformOverMooreNeighbours)
{
    GridWorld w = init_world(empty_world(), 5);
    NanoAgent a = make_agent(w, Genome{1, 0, 0, 0, 0}, {10, 10});
    std::map<std::pair<int, int>, int> counts;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) {
        a.pos = {10, 10};
        const Position p = move_agent(w, a);
        ++counts[{p.row - 10, p.col - 10}];
    }
    ASSERT_EQ(counts.size(), 8u);
    double chi2 = 0;
    const double expected = trials / 8.0;
    for (const auto& [offset, n] : counts) {
        EXPECT_TRUE(std::max(std::abs(offset.first), std::abs(offset.second)) == 1);
        chi2 += (n - expected) * (n - expected) / expected;
    }
    EXPECT_LT(chi2, 24.32); // chi-square, 7 dof, p = 0.001
}

TEST(MoveAgent, CornerStaysInBounds)
{
    GridWorld w = init_world(empty_world(), 5);
    NanoAgent a = make_agent(w, Genome{3, 0, 0, 0, 0}, {0, 0});
    for (int i = 0; i < 5000; ++i) {
        a.pos = {0, 0};
        const Position p = move_agent(w, a);
        EXPECT_TRUE(w.in_bounds(p));
        EXPECT_LE(std::max(p.row, p.col), 3);
    }
}

TEST(MoveAgent, StopsOnFirstLivingCell)
{
    GridWorld w = init_world(empty_world(), 5);
    for (const auto& d : kMooreOffsets)
        place_cell(w, {10 + d.row, 10 + d.col});
    NanoAgent a = make_agent(w, Genome{3, 0, 0, 0, 0}, {10, 10});
    for (int i = 0; i < 1000; ++i) {
        a.pos = {10, 10};
        const Position p = move_agent(w, a);
        EXPECT_EQ(std::max(std::abs(p.row - 10), std::abs(p.col - 10)), 1);
    }
}

TEST(MoveAgent, DisplacementBoundedBySpeed)
{
    GridWorld w = init_world(SimConfig{}, 8);
    for (int step = 0; step < 50; ++step)
        for (auto& a : w.agents) {
            const Position before = a.pos;
            move_agent(w, a);
            EXPECT_TRUE(w.in_bounds(a.pos));
            EXPECT_LE(std::max(std::abs(a.pos.row - before.row), std::abs(a.pos.col - before.col)), a.genome.speed);
        }
}

TEST(MoveAgent, RequiresFreeAgent)
{
    GridWorld w = init_world(empty_world(), 5);
    NanoAgent a = make_agent(w, Genome{}, {3, 3});
    a.state = AgentState::Bound;
    EXPECT_THROW(move_agent(w, a), ContractError);
}

TEST(Perceive, EmptyLivingAndDeadSites)
{
    GridWorld w = init_world(empty_world(), 5);
    const int id = place_cell(w, {4, 4});
    NanoAgent a = make_agent(w, Genome{}, {2, 2});
    EXPECT_EQ(perceive(w, a), nullptr);
    a.pos = {4, 4};
    ASSERT_NE(perceive(w, a), nullptr);
    EXPECT_EQ(perceive(w, a)->id, id);
    w.cells[id].alive = false;
    EXPECT_EQ(perceive(w, a), nullptr);
}

TEST(Memory, FamiliarityAndEviction)
{
    NanoAgent a;
    const Signature s1{1, 8}, s2{2, 8}, s3{3, 8}, s4{4, 8}, s5{5, 8};
    EXPECT_FALSE(is_familiar(a, s1));
    for (const auto& s : {s1, s2, s3, s4})
        memorize(a, s, 4);
    EXPECT_TRUE(is_familiar(a, s1));
    memorize(a, s5, 4);
    EXPECT_FALSE(is_familiar(a, s1));
    EXPECT_EQ(a.memory, (std::vector<Signature>{s2, s3, s4, s5}));
    EXPECT_THROW(memorize(a, s3, 4), ContractError);
}

TEST(Memory, MatchesReferenceFifo)
{
    Rng rng(31);
    for (int capacity = 1; capacity <= 6; ++capacity) {
        NanoAgent a;
        std::deque<Signature> model;
        for (int op = 0; op < 5000; ++op) {
            const Signature s{rng.bits() & 0xF, 4};
            const bool known = std::find(model.begin(), model.end(), s) != model.end();
            ASSERT_EQ(is_familiar(a, s), known);
            if (known)
                continue;
            memorize(a, s, capacity);
            model.push_back(s);
            if (static_cast<int>(model.size()) > capacity)
                model.pop_front();
            ASSERT_EQ(a.memory, std::vector<Signature>(model.begin(), model.end()));
        }
    }
}

TEST(Occupancy, OneLivingCellPerSiteThroughoutLearning)
{
    SimConfig cfg;
    cfg.world.width = 20;
    cfg.world.height = 20;
    cfg.world.cc_count = 60;
    cfg.world.hc_count = 40;
    cfg.world.agent_count = 50;
    cfg.evolution.division_prob = 0.05;
    cfg.learning.steps = 200;
    run_learning(cfg, 4, [](const GridWorld& w, const RunStats&) { ASSERT_TRUE(check_site_uniqueness(w)); });
}
