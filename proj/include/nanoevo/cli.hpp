#pragma once

#include "nanoevo/config.hpp"
#include "nanoevo/parallel.hpp"
#include "nanoevo/report.hpp"
#include "nanoevo/rng.hpp"
#include "nanoevo/runner.hpp"
#include "nanoevo/ssa.hpp"
#include "nanoevo/unitmap.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nanoevo::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2 };

struct CommonOptions {
    std::string config_path; ///< empty: built-in defaults
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    int jobs = 1;
};

struct MapUnitsOptions {
    std::optional<double> pa;
    std::optional<double> pd;
    std::optional<double> pi;
    std::string config_path;
    std::optional<double> diffusion_cm2_s;
    std::optional<double> cell_diameter_cm;
    std::optional<double> particles_per_na;
    std::optional<double> msd_dimension_factor;
    std::string out_dir = ".";
};

namespace detail {

namespace fs = std::filesystem;

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tracks every file a command writes so the command can re-read and check them at the end.
class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec)
            throw OutputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const fs::path& dir() const { return dir_; }

    void write(const fs::path& rel, const std::function<void(std::ostream&)>& body)
    {
        const fs::path path = dir_ / rel;
        if (path.has_parent_path())
            fs::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw OutputError("cannot open '" + path.string() + "' for writing");
        os.imbue(std::locale::classic());
        body(os);
        os.flush();
        if (!os)
            throw OutputError("write failed for '" + path.string() + "'");
        written_.push_back(path);
    }

    void write_json(const fs::path& rel, const json& doc)
    {
        write(rel, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    }

    /// Every output exists and is non-empty; JSON parses; CSV has a header line.
    void verify() const
    {
        for (const auto& p : written_) {
            std::ifstream in(p, std::ios::binary);
            if (!in || fs::file_size(p) == 0)
                throw OutputError("output '" + p.string() + "' is missing or empty");
            if (p.extension() == ".json") {
                try {
                    [[maybe_unused]] const json doc = json::parse(in);
                } catch (const json::exception&) {
                    throw OutputError("output '" + p.string() + "' is not valid JSON");
                }
            } else if (p.extension() == ".csv") {
                std::string header;
                std::getline(in, header);
                if (header.find(',') == std::string::npos)
                    throw OutputError("output '" + p.string() + "' has no CSV header");
            }
        }
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

inline SimConfig resolve_config(const CommonOptions& o)
{
    SimConfig cfg = o.config_path.empty() ? SimConfig{} : load_config(o.config_path);
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.replicates)
        cfg.replicates = *o.replicates;
    validate(cfg);
    return cfg;
}

inline json manifest(const std::string& command, const SimConfig& cfg)
{
    json seeds = json::array();
    for (int r = 0; r < cfg.replicates; ++r)
        seeds.push_back(replicate_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    return json{{"manifest_version", 1},
                {"tool", "nanoevo"},
                {"version", kVersion},
                {"command", command},
                {"seed", cfg.seed},
                {"seed_rule", "replicate_seed = splitmix64(seed ^ splitmix64(index + 1))"},
                {"replicate_seeds", seeds},
                {"config", to_json(cfg)}};
}

inline json genome_json(const Genome& g)
{
    return json{{"speed", g.speed}, {"p_a", g.p_a}, {"p_d", g.p_d}, {"p_i", g.p_i}, {"p_k", g.p_k}};
}

inline Genome genome_from_json(const json& j)
{
    if (!j.is_object())
        throw ConfigError("genomes", "each genome must be an object");
    Genome g;
    config_detail::Section s(j, "genome");
    s.read("speed", g.speed);
    s.read("p_a", g.p_a);
    s.read("p_d", g.p_d);
    s.read("p_i", g.p_i);
    s.read("p_k", g.p_k);
    // population records carry bookkeeping next to the genome
    for (const char* extra : {"id", "cc_killed", "hc_killed", "fitness"})
        (void)s.find(extra);
    s.finish();
    if (g.speed < 1)
        throw ConfigError("genome.speed", "must be at least 1");
    for (const double p : {g.p_a, g.p_d, g.p_i, g.p_k})
        if (!(p >= 0.0 && p <= 1.0))
            throw ConfigError("genome", "probabilities must lie in [0, 1]");
    return g;
}

inline json population_json(const std::vector<NanoAgent>& pop)
{
    json agents = json::array();
    for (const std::size_t i : rank_by_fitness(pop)) {
        const auto& a = pop[i];
        json rec = genome_json(a.genome);
        rec["id"] = a.id;
        rec["cc_killed"] = a.cc_killed;
        rec["hc_killed"] = a.hc_killed;
        rec["fitness"] = local_fitness(a);
        agents.push_back(rec);
    }
    return json{{"agents", agents}};
}

/// Genome pool from a final_population.json (top_k fittest), {"genomes": [...]} or a bare array.
inline std::vector<Genome> load_genomes(const std::string& path, int top_k)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read genomes file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("genomes", "'" + path + "' is not valid JSON: " + e.what());
    }
    if (doc.is_object() && doc.contains("agents")) {
        std::vector<NanoAgent> pop;
        for (const auto& rec : doc.at("agents")) {
            NanoAgent a;
            a.genome = genome_from_json(rec);
            a.id = rec.value("id", static_cast<int>(pop.size()));
            a.cc_killed = rec.value("cc_killed", 0);
            a.hc_killed = rec.value("hc_killed", 0);
            pop.push_back(a);
        }
        return top_performers(pop, std::min<std::size_t>(pop.size(), static_cast<std::size_t>(top_k)));
    }
    const json& list = doc.is_object() && doc.contains("genomes") ? doc.at("genomes") : doc;
    if (!list.is_array())
        throw ConfigError("genomes", "expected an array of genomes");
    std::vector<Genome> out;
    for (const auto& g : list)
        out.push_back(genome_from_json(g));
    return out;
}

inline std::vector<double> column(const std::vector<RunStats>& stats, auto member)
{
    std::vector<double> v;
    v.reserve(stats.size());
    for (const auto& s : stats)
        v.push_back(static_cast<double>(s.*member));
    return v;
}

inline double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline void write_learning_outputs(Outputs& out, const std::filesystem::path& prefix, const LearningResult& res)
{
    out.write(prefix / "stats.csv", [&](std::ostream& os) { report::write_stats_csv(os, res.stats); });
    out.write_json(prefix / "final_population.json", population_json(res.population));
    out.write(prefix / "fitness.svg", [&](std::ostream& os) {
        const auto steps = column(res.stats, &RunStats::step);
        report::svg_line_plot(os, "Local fitness", "step", "fitness",
                              {{"best", steps, column(res.stats, &RunStats::best_fitness), "#d62728"},
                               {"median", steps, column(res.stats, &RunStats::median_fitness), "#1f77b4"}});
    });
    out.write(prefix / "param_hist.svg", [&](std::ostream& os) {
        std::vector<report::HistogramPanel> panels(kGenomeFields.size());
        int speed_max = 1;
        for (const auto& a : res.population)
            speed_max = std::max(speed_max, a.genome.speed);
        for (std::size_t f = 0; f < kGenomeFields.size(); ++f) {
            panels[f].label = kGenomeFields[f];
            if (f == 0) {
                panels[f].lo = 0.5;
                panels[f].hi = speed_max + 0.5;
            }
            for (const auto& a : res.population)
                panels[f].values.push_back(genome_values(a.genome)[f]);
        }
        report::svg_histograms(os, "Final genome distribution", panels);
    });
}

template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kUsageError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

} // namespace detail

/// Learning runs. Writes stats.csv, final_population.json, fitness.svg and param_hist.svg
/// (under rep_NNN/ when more than one replicate) plus run_manifest.json.
inline int cmd_learn(const CommonOptions& opts, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const SimConfig cfg = detail::resolve_config(opts);
        const auto results = run_replicates(static_cast<std::size_t>(cfg.replicates), static_cast<std::size_t>(opts.jobs),
                                            [&](std::size_t r) { return run_learning(cfg, replicate_seed(cfg.seed, r)); });
        detail::Outputs files(opts.out_dir);
        for (std::size_t r = 0; r < results.size(); ++r) {
            std::ostringstream name;
            name << "rep_" << std::setw(3) << std::setfill('0') << r;
            detail::write_learning_outputs(files, results.size() == 1 ? std::filesystem::path() : std::filesystem::path(name.str()), results[r]);
            const auto& last = results[r].stats;
            out << "replicate " << r << ": " << last.size() << " steps, best fitness "
                << (last.empty() ? 0 : last.back().best_fitness) << '\n';
        }
        files.write_json("run_manifest.json", detail::manifest("learn", cfg));
        files.verify();
        return static_cast<int>(kOk);
    });
}

inline json outcome_json(const TreatmentOutcome& o)
{
    return json{{"total_dose", o.total_dose},
                {"cc_initial", o.cc_initial},
                {"cc_final", o.cc_final},
                {"hc_initial", o.hc_initial},
                {"hc_final", o.hc_final},
                {"kill_fraction_cc", o.kill_fraction_cc},
                {"step_duration_s", o.step_duration_s},
                {"steps", o.series.size()}};
}

/// Treatment evaluation of a genome pool. Writes outcome.json, timeseries.csv,
/// run_manifest.json and, when simulation.dose_sweep is set, dose_response.csv.
inline int cmd_simulate(const CommonOptions& opts, const std::string& genomes_path, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const SimConfig cfg = detail::resolve_config(opts);
        const auto genomes = detail::load_genomes(genomes_path, cfg.simulation.top_k);
        if (genomes.empty())
            throw std::invalid_argument("genome list '" + genomes_path + "' is empty");

        auto evaluate = [&](long dose) {
            SimConfig c = cfg;
            c.simulation.total_dose = dose;
            return run_replicates(static_cast<std::size_t>(cfg.replicates), static_cast<std::size_t>(opts.jobs),
                                  [&](std::size_t r) { return run_simulation(c, genomes, replicate_seed(cfg.seed, r)); });
        };

        const auto outcomes = evaluate(cfg.simulation.total_dose);
        detail::Outputs files(opts.out_dir);
        json doc = outcome_json(outcomes.front());
        json reps = json::array();
        std::vector<double> fractions;
        for (std::size_t r = 0; r < outcomes.size(); ++r) {
            fractions.push_back(outcomes[r].kill_fraction_cc);
            reps.push_back(json{{"seed", replicate_seed(cfg.seed, r)},
                                {"kill_fraction_cc", outcomes[r].kill_fraction_cc},
                                {"cc_final", outcomes[r].cc_final},
                                {"hc_final", outcomes[r].hc_final}});
        }
        doc["genome_pool_size"] = genomes.size();
        doc["replicates"] = reps;
        doc["kill_fraction_cc_median"] = detail::median(fractions);
        files.write_json("outcome.json", doc);
        files.write("timeseries.csv", [&](std::ostream& os) { report::write_stats_csv(os, outcomes.front().series); });
        out << "kill fraction (median of " << outcomes.size() << "): " << detail::median(fractions) << '\n';

        if (!cfg.simulation.dose_sweep.empty()) {
            files.write("dose_response.csv", [&](std::ostream& os) {
                os << "total_dose,replicates,kill_fraction_median,kill_fraction_mean,kill_fraction_min,kill_fraction_max\n";
                for (const long dose : cfg.simulation.dose_sweep) {
                    std::vector<double> kf;
                    for (const auto& o : evaluate(dose))
                        kf.push_back(o.kill_fraction_cc);
                    double mean = 0.0;
                    for (const double v : kf)
                        mean += v;
                    mean /= static_cast<double>(kf.size());
                    os << dose << ',' << kf.size() << ',' << report::format_number(detail::median(kf)) << ','
                       << report::format_number(mean) << ',' << report::format_number(*std::min_element(kf.begin(), kf.end()))
                       << ',' << report::format_number(*std::max_element(kf.begin(), kf.end())) << '\n';
                }
            });
        }
        files.write_json("run_manifest.json", detail::manifest("simulate", cfg));
        files.verify();
        return static_cast<int>(kOk);
    });
}

/// Compartment-chain validation. Writes trajectory.csv (replicate mean when several, with
/// per-replicate trajectory_rNNN.csv), penetration.svg, depth.json and run_manifest.json.
inline int cmd_validate(const CommonOptions& opts, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const SimConfig cfg = detail::resolve_config(opts);
        const ssa::CompartmentChain initial = ssa::build_chain(cfg.ssa, cfg.units);
        struct Replicate {
            ssa::Trajectory traj;
            std::vector<bool> killed;
            std::vector<long> np_internal;
        };
        const auto reps = run_replicates(static_cast<std::size_t>(cfg.replicates), static_cast<std::size_t>(opts.jobs),
                                         [&](std::size_t r) {
                                             ssa::CompartmentChain chain = initial;
                                             Rng rng(replicate_seed(cfg.seed, r));
                                             Replicate rep;
                                             rep.traj = ssa::run_ssa(chain, cfg.ssa.t_end_s, cfg.ssa.sample_dt_s, rng);
                                             rep.killed = ssa::kill_report(chain);
                                             rep.np_internal = chain.np_internal;
                                             return rep;
                                         });

        detail::Outputs files(opts.out_dir);
        std::vector<ssa::Trajectory> trajs;
        json depths = json::array();
        json kills = json::array();
        std::vector<double> depth_values;
        for (std::size_t r = 0; r < reps.size(); ++r) {
            const int depth = ssa::penetration_depth(reps[r].traj, cfg.ssa.threshold_fraction);
            depth_values.push_back(depth);
            depths.push_back(depth);
            kills.push_back(reps[r].killed);
            trajs.push_back(reps[r].traj);
            if (reps.size() > 1) {
                std::ostringstream name;
                name << "trajectory_r" << std::setw(3) << std::setfill('0') << r << ".csv";
                files.write(name.str(), [&](std::ostream& os) { report::write_trajectory_csv(os, reps[r].traj); });
            }
        }
        const ssa::Trajectory aggregate = reps.size() > 1 ? ssa::mean_trajectory(trajs) : trajs.front();
        files.write("trajectory.csv", [&](std::ostream& os) { report::write_trajectory_csv(os, aggregate); });
        files.write("penetration.svg", [&](std::ostream& os) {
            std::vector<std::vector<double>> rows;
            for (const auto& s : aggregate.states)
                rows.push_back(ssa::retained_signal(s));
            report::svg_heatmap(os, "Bound + internalized particles per cell", aggregate.times, rows);
        });
        const double depth_median = detail::median(depth_values);
        files.write_json("depth.json",
                         json{{"threshold_fraction", cfg.ssa.threshold_fraction},
                              {"t_end_s", cfg.ssa.t_end_s},
                              {"kill_threshold", cfg.ssa.kill_threshold},
                              {"rates",
                               {{"ka_stoch", initial.rates.ka_stoch},
                                {"kd", initial.rates.kd},
                                {"ki", initial.rates.ki},
                                {"k_hop", initial.rates.k_hop}}},
                              {"penetration_depth", depth_median},
                              {"depths", depths},
                              {"kill_report", reps.front().killed},
                              {"kill_reports", kills},
                              {"np_internal", reps.front().np_internal}});
        files.write_json("run_manifest.json", detail::manifest("validate", cfg));
        files.verify();
        out << "penetration depth (median of " << reps.size() << "): " << depth_median << " cells\n";
        return static_cast<int>(kOk);
    });
}

/// Prints physical counterparts of per-step probabilities and writes units.json.
inline int cmd_map_units(const MapUnitsOptions& opts, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        if (!opts.pa && !opts.pd && !opts.pi)
            throw std::invalid_argument("map-units needs at least one of --pa, --pd, --pi");
        units::UnitsConfig u = opts.config_path.empty() ? SimConfig{}.units : load_config(opts.config_path).units;
        if (opts.diffusion_cm2_s)
            u.diffusion_cm2_s = *opts.diffusion_cm2_s;
        if (opts.cell_diameter_cm)
            u.cell_diameter_cm = *opts.cell_diameter_cm;
        if (opts.particles_per_na)
            u.particles_per_na = *opts.particles_per_na;
        if (opts.msd_dimension_factor)
            u.msd_dimension_factor = *opts.msd_dimension_factor;

        const double dt = units::step_duration(u.diffusion_cm2_s, u.cell_diameter_cm, u.msd_dimension_factor);
        const double volume = units::cube_volume_litres(u.cell_diameter_cm);
        const double molar = units::na_molar_concentration(u.particles_per_na, volume);

        json doc{{"step_duration_s", dt},
                 {"cell_volume_l", volume},
                 {"na_molar", molar},
                 {"ka_scale_per_m_s", 1.0 / (molar * dt)},
                 {"rate_scale_per_s", 1.0 / dt},
                 {"ka_range_per_m_s", {units::kKaLow, units::kKaHigh}}};
        out << "step duration   " << report::format_number(dt) << " s\n"
            << "NA concentration " << report::format_number(molar) << " M\n";
        out << std::left << std::setw(6) << "param" << std::setw(14) << "probability" << std::setw(24) << "constant"
            << "note\n";
        if (opts.pa) {
            const double ka = units::pa_to_ka(*opts.pa, molar, dt);
            const double per_step = units::ka_to_particles_per_step(ka, molar, dt);
            const char* flag = ka < units::kKaLow ? "below range" : ka > units::kKaHigh ? "above range" : "in range";
            doc["ka"] = {{"p_a", *opts.pa}, {"value", ka}, {"unit", "1/(M s)"}, {"particles_per_step", per_step},
                         {"range_flag", flag}};
            out << std::setw(6) << "ka" << std::setw(14) << report::format_number(*opts.pa) << std::setw(24)
                << (report::format_number(ka) + " 1/(M s)") << flag << " (" << report::format_number(per_step)
                << " particles/step)\n";
        }
        if (opts.pd) {
            const double kd = units::prob_to_rate(*opts.pd, dt);
            doc["kd"] = {{"p_d", *opts.pd}, {"value", kd}, {"unit", "1/s"}};
            out << std::setw(6) << "kd" << std::setw(14) << report::format_number(*opts.pd) << std::setw(24)
                << (report::format_number(kd) + " 1/s") << '\n';
        }
        if (opts.pi) {
            const double ki = units::prob_to_rate(*opts.pi, dt);
            doc["ki"] = {{"p_i", *opts.pi}, {"value", ki}, {"unit", "1/s"}};
            out << std::setw(6) << "ki" << std::setw(14) << report::format_number(*opts.pi) << std::setw(24)
                << (report::format_number(ki) + " 1/s") << '\n';
        }
        detail::Outputs files(opts.out_dir);
        files.write_json("units.json", doc);
        files.verify();
        return static_cast<int>(kOk);
    });
}

} // namespace nanoevo::cli
