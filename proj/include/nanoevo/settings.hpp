#pragma once

#include "nanoevo/kinetics.hpp"
#include "nanoevo/unitmap.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace nanoevo {

enum class Placement { Disk, Scattered };

/// Grid geometry and populations. Defaults are the shipped desk-scale world.
struct WorldConfig {
    int width = 50;
    int height = 50;
    int cc_count = 200;
    int hc_count = 100;
    /// Disk: cancer cells fill the sites nearest the centre, healthy cells the next ring.
    Placement placement = Placement::Disk;
    int signature_bits = 8;
    int memory_capacity = 4;
    int agent_count = 200; ///< learning-mode population
    int speed_max = 3;
};

struct KineticsConfig {
    double curiosity = 0.5;
    ResistanceDirections directions = kDetrimentalDirections;
    /// Initial genomes draw every probability uniformly from [init_prob_min, init_prob_max]
    /// and speed uniformly from [1, speed_max].
    double init_prob_min = 0.0;
    double init_prob_max = 0.2;
};

enum class SignatureDrift { AtDivision, PerStep };

struct EvolutionConfig {
    int round_period = 10;
    double replace_fraction = 0.2;
    double mutation_sigma = 0.05;
    double signature_flip_prob = 0.02;
    double division_prob = 0.001;
    double resistance_fraction = 0.10;
    double resistance_strength_min = 0.30;
    double resistance_strength_max = 0.80;
    SignatureDrift signature_drift = SignatureDrift::AtDivision;
    /// Reset kill counters after every selection round instead of accumulating them.
    bool fitness_window = false;
    bool growth_in_learning = true;
};

struct LearningConfig {
    int steps = 10000;
};

/// Injection ramp followed by linear clearance. One step lasts step_duration_s.
struct Schedule {
    long total_dose = 0;
    int ramp_steps = 14;
    int decline_steps = 72;
    double step_duration_s = 5000.0;
};

enum class EntrySites { RandomBorder, LeftEdge };

struct SimulationConfig {
    long total_dose = 5000;
    int ramp_steps = 14;
    int decline_steps = 72;
    int steps = 0; ///< 0 runs through the end of the decline phase
    EntrySites entry = EntrySites::RandomBorder;
    bool growth = false;
    int top_k = 10; ///< genomes taken from a learned population
    std::vector<long> dose_sweep;
};

enum class Boundary { Bolus, Source };

/// Compartment-chain validation model. p_a/p_d/p_i are mapped to physical rates.
struct SsaConfig {
    int n_compartments = 22;
    long receptors_per_cell = 10000;
    Boundary boundary = Boundary::Bolus;
    long bolus = 100000;
    long source_level = 1000;
    double p_a = 0.3;
    double p_d = 0.1;
    double p_i = 0.5;
    long kill_threshold = 1;
    double t_end_s = 11.0 * 3600.0;
    double sample_dt_s = 600.0;
    double threshold_fraction = 0.025;
    std::optional<double> k_hop_override;
};

struct SimConfig {
    std::uint64_t seed = 1;
    int replicates = 1;
    WorldConfig world;
    KineticsConfig kinetics;
    EvolutionConfig evolution;
    LearningConfig learning;
    SimulationConfig simulation;
    units::UnitsConfig units;
    SsaConfig ssa;
};

} // namespace nanoevo
