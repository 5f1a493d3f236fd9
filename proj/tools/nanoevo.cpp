#include "nanoevo/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void add_common(CLI::App* cmd, nanoevo::cli::CommonOptions& o, std::optional<std::uint64_t>& seed,
                std::optional<int>& replicates)
{
    cmd->add_option("--config", o.config_path, "JSON config or run_manifest.json (defaults when omitted)");
    cmd->add_option("--out", o.out_dir, "Output directory")->required();
    cmd->add_option("--seed", seed, "Master seed (overrides config)");
    cmd->add_option("--replicates", replicates, "Number of replicates (overrides config)")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", o.jobs, "Worker threads for replicates")->check(CLI::PositiveNumber);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nanoevo: evolvable nano-agent drug delivery simulator"};
    app.set_version_flag("--version", nanoevo::cli::kVersion);
    app.require_subcommand(1);

    nanoevo::cli::CommonOptions learn_opts, sim_opts, val_opts;
    std::optional<std::uint64_t> learn_seed, sim_seed, val_seed;
    std::optional<int> learn_reps, sim_reps, val_reps;
    std::string genomes_path;
    nanoevo::cli::MapUnitsOptions map_opts;

    auto* learn = app.add_subcommand("learn", "Open-ended learning run");
    add_common(learn, learn_opts, learn_seed, learn_reps);

    auto* simulate = app.add_subcommand("simulate", "Timed treatment evaluation of learned genomes");
    add_common(simulate, sim_opts, sim_seed, sim_reps);
    simulate->add_option("--genomes", genomes_path, "final_population.json or genome list")->required();

    auto* validate = app.add_subcommand("validate", "Compartment-chain penetration validation");
    add_common(validate, val_opts, val_seed, val_reps);

    auto* map_units = app.add_subcommand("map-units", "Map per-step probabilities to rate constants");
    map_units->add_option("--pa", map_opts.pa, "Association probability per step");
    map_units->add_option("--pd", map_opts.pd, "Dissociation probability per step");
    map_units->add_option("--pi", map_opts.pi, "Internalization probability per step");
    map_units->add_option("--config", map_opts.config_path, "Config whose units section is used");
    map_units->add_option("--diffusion", map_opts.diffusion_cm2_s, "Diffusion coefficient, cm^2/s");
    map_units->add_option("--diameter", map_opts.cell_diameter_cm, "Cell diameter, cm");
    map_units->add_option("--particles", map_opts.particles_per_na, "Particles represented by one agent");
    map_units->add_option("--msd-factor", map_opts.msd_dimension_factor, "d^2 = factor * D * t");
    map_units->add_option("--out", map_opts.out_dir, "Directory for units.json");

    CLI11_PARSE(app, argc, argv);

    auto finish = [](nanoevo::cli::CommonOptions& o, const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& reps) {
        o.seed = seed;
        o.replicates = reps;
    };
    if (*learn) {
        finish(learn_opts, learn_seed, learn_reps);
        return nanoevo::cli::cmd_learn(learn_opts, std::cout, std::cerr);
    }
    if (*simulate) {
        finish(sim_opts, sim_seed, sim_reps);
        return nanoevo::cli::cmd_simulate(sim_opts, genomes_path, std::cout, std::cerr);
    }
    if (*validate) {
        finish(val_opts, val_seed, val_reps);
        return nanoevo::cli::cmd_validate(val_opts, std::cout, std::cerr);
    }
    return nanoevo::cli::cmd_map_units(map_opts, std::cout, std::cerr);
}
