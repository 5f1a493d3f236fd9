#pragma once

#include "nanoevo/error.hpp"
#include "nanoevo/settings.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace nanoevo {

using json = nlohmann::json;

namespace config_detail {

/// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Section {
public:
    Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path))
    {
        if (!doc_.is_object())
            throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key)
    {
        seen_.insert(key);
        const auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }

    void read(const std::string& key, double& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number())
                throw ConfigError(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
        requires std::is_integral_v<Int>
    void read(const std::string& key, Int& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_number_integer())
                throw ConfigError(key_path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (v->is_number_unsigned() || v->get<long long>() >= 0)
                    out = v->get<Int>();
                else
                    throw ConfigError(key_path(key), "expected a non-negative integer");
            } else {
                out = v->get<Int>();
            }
        }
    }

    void read(const std::string& key, bool& out)
    {
        if (const json* v = find(key)) {
            if (!v->is_boolean())
                throw ConfigError(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    template <class Enum>
    void read_enum(const std::string& key, Enum& out, std::initializer_list<std::pair<const char*, Enum>> names)
    {
        if (const json* v = find(key)) {
            if (!v->is_string())
                throw ConfigError(key_path(key), "expected a string");
            const auto s = v->get<std::string>();
            for (const auto& [name, value] : names)
                if (s == name) {
                    out = value;
                    return;
                }
            std::string allowed;
            for (const auto& [name, value] : names)
                allowed += (allowed.empty() ? "" : ", ") + std::string(name);
            throw ConfigError(key_path(key), "unknown value '" + s + "' (expected one of " + allowed + ")");
        }
    }

    Section child(const std::string& key)
    {
        static const json empty = json::object();
        const json* v = find(key);
        return Section(v ? *v : empty, key_path(key));
    }

    void finish() const
    {
        for (const auto& [key, value] : doc_.items())
            if (!seen_.count(key))
                throw ConfigError(key_path(key), "unknown key");
    }

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void require(bool ok, const char* key, const char* message)
{
    if (!ok)
        throw ConfigError(key, message);
}

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace config_detail

/// Range checks on every tunable; throws ConfigError naming the offending key.
inline void validate(const SimConfig& c)
{
    using config_detail::is_probability;
    using config_detail::require;
    require(c.replicates >= 1, "replicates", "must be at least 1");

    const auto& w = c.world;
    require(w.width >= 8, "world.width", "must be at least 8");
    require(w.height >= 8, "world.height", "must be at least 8");
    require(w.cc_count >= 0, "world.cc_count", "must be non-negative");
    require(w.hc_count >= 0, "world.hc_count", "must be non-negative");
    require(static_cast<long>(w.cc_count) + w.hc_count <= static_cast<long>(w.width) * w.height, "world.cc_count",
            "cc_count + hc_count exceeds the number of grid sites");
    require(w.signature_bits >= 1 && w.signature_bits <= 64, "world.signature_bits", "must lie in [1, 64]");
    require(w.memory_capacity >= 1, "world.memory_capacity", "must be at least 1");
    require(w.agent_count >= 0, "world.agent_count", "must be non-negative");
    require(w.speed_max >= 1, "world.speed_max", "must be at least 1");

    const auto& k = c.kinetics;
    require(k.curiosity > 0.0 && k.curiosity <= 1.0, "kinetics.curiosity", "must lie in (0, 1]");
    for (const int d : k.directions)
        require(d == -1 || d == 1, "kinetics.resistance_directions", "each direction must be -1 or +1");
    require(is_probability(k.init_prob_min), "kinetics.init_prob_min", "must lie in [0, 1]");
    require(is_probability(k.init_prob_max), "kinetics.init_prob_max", "must lie in [0, 1]");
    require(k.init_prob_min <= k.init_prob_max, "kinetics.init_prob_min", "must not exceed init_prob_max");

    const auto& e = c.evolution;
    require(e.round_period >= 1, "evolution.round_period", "must be at least 1");
    require(e.replace_fraction > 0.0 && e.replace_fraction <= 0.5, "evolution.replace_fraction", "must lie in (0, 0.5]");
    require(e.mutation_sigma >= 0.0, "evolution.mutation_sigma", "must be non-negative");
    require(is_probability(e.signature_flip_prob), "evolution.signature_flip_prob", "must lie in [0, 1]");
    require(is_probability(e.division_prob), "evolution.division_prob", "must lie in [0, 1]");
    require(is_probability(e.resistance_fraction), "evolution.resistance_fraction", "must lie in [0, 1]");
    require(e.resistance_strength_min >= 0.0 && e.resistance_strength_min <= e.resistance_strength_max,
            "evolution.resistance_strength_min", "must lie in [0, resistance_strength_max]");
    require(e.resistance_strength_max <= 1.0, "evolution.resistance_strength_max", "must not exceed 1");

    require(c.learning.steps >= 0, "learning.steps", "must be non-negative");

    const auto& s = c.simulation;
    require(s.total_dose >= 0, "simulation.total_dose", "must be non-negative");
    require(s.ramp_steps >= 1, "simulation.ramp_steps", "must be at least 1");
    require(s.decline_steps >= 0, "simulation.decline_steps", "must be non-negative");
    require(s.steps >= 0, "simulation.steps", "must be non-negative");
    require(s.top_k >= 1, "simulation.top_k", "must be at least 1");
    for (const long d : s.dose_sweep)
        require(d >= 0, "simulation.dose_sweep", "doses must be non-negative");

    const auto& u = c.units;
    require(u.diffusion_cm2_s > 0.0, "units.diffusion_cm2_s", "must be positive");
    require(u.cell_diameter_cm > 0.0, "units.cell_diameter_cm", "must be positive");
    require(u.particles_per_na > 0.0, "units.particles_per_na", "must be positive");
    require(u.msd_dimension_factor > 0.0, "units.msd_dimension_factor", "must be positive");

    const auto& q = c.ssa;
    require(q.n_compartments >= 1, "ssa.n_compartments", "must be at least 1");
    require(q.receptors_per_cell >= 0, "ssa.receptors_per_cell", "must be non-negative");
    require(q.bolus >= 0, "ssa.bolus", "must be non-negative");
    require(q.source_level >= 0, "ssa.source_level", "must be non-negative");
    require(is_probability(q.p_a), "ssa.p_a", "must lie in [0, 1]");
    require(is_probability(q.p_d), "ssa.p_d", "must lie in [0, 1]");
    require(is_probability(q.p_i), "ssa.p_i", "must lie in [0, 1]");
    require(q.kill_threshold >= 1, "ssa.kill_threshold", "must be at least 1");
    require(q.t_end_s > 0.0, "ssa.t_end_s", "must be positive");
    require(q.sample_dt_s > 0.0, "ssa.sample_dt_s", "must be positive");
    require(q.threshold_fraction > 0.0 && q.threshold_fraction < 1.0, "ssa.threshold_fraction", "must lie in (0, 1)");
    require(!q.k_hop_override || *q.k_hop_override >= 0.0, "ssa.k_hop_override", "must be non-negative");
}

/// Overlays a JSON document onto the defaults. A run manifest is accepted in place of a
/// config: its embedded "config" object is used.
inline SimConfig config_from_json(const json& input)
{
    const json& doc = input.is_object() && input.contains("manifest_version") ? input.at("config") : input;
    SimConfig c;
    config_detail::Section root(doc, "");
    root.read("seed", c.seed);
    root.read("replicates", c.replicates);

    {
        auto s = root.child("world");
        s.read("width", c.world.width);
        s.read("height", c.world.height);
        s.read("cc_count", c.world.cc_count);
        s.read("hc_count", c.world.hc_count);
        s.read_enum("placement", c.world.placement, {{"disk", Placement::Disk}, {"scattered", Placement::Scattered}});
        s.read("signature_bits", c.world.signature_bits);
        s.read("memory_capacity", c.world.memory_capacity);
        s.read("agent_count", c.world.agent_count);
        s.read("speed_max", c.world.speed_max);
        s.finish();
    }
    {
        auto s = root.child("kinetics");
        s.read("curiosity", c.kinetics.curiosity);
        s.read("init_prob_min", c.kinetics.init_prob_min);
        s.read("init_prob_max", c.kinetics.init_prob_max);
        auto d = s.child("resistance_directions");
        for (const RateTarget t : kAllTargets)
            d.read(std::string(to_string(t)), c.kinetics.directions[static_cast<int>(t)]);
        d.finish();
        s.finish();
    }
    {
        auto s = root.child("evolution");
        auto& e = c.evolution;
        s.read("round_period", e.round_period);
        s.read("replace_fraction", e.replace_fraction);
        s.read("mutation_sigma", e.mutation_sigma);
        s.read("signature_flip_prob", e.signature_flip_prob);
        s.read("division_prob", e.division_prob);
        s.read("resistance_fraction", e.resistance_fraction);
        s.read("resistance_strength_min", e.resistance_strength_min);
        s.read("resistance_strength_max", e.resistance_strength_max);
        s.read_enum("signature_drift", e.signature_drift,
                    {{"at_division", SignatureDrift::AtDivision}, {"per_step", SignatureDrift::PerStep}});
        s.read("fitness_window", e.fitness_window);
        s.read("growth_in_learning", e.growth_in_learning);
        s.finish();
    }
    {
        auto s = root.child("learning");
        s.read("steps", c.learning.steps);
        s.finish();
    }
    {
        auto s = root.child("simulation");
        auto& m = c.simulation;
        s.read("total_dose", m.total_dose);
        s.read("ramp_steps", m.ramp_steps);
        s.read("decline_steps", m.decline_steps);
        s.read("steps", m.steps);
        s.read_enum("entry", m.entry, {{"random_border", EntrySites::RandomBorder}, {"left_edge", EntrySites::LeftEdge}});
        s.read("growth", m.growth);
        s.read("top_k", m.top_k);
        if (const json* v = s.find("dose_sweep")) {
            if (!v->is_array())
                throw ConfigError("simulation.dose_sweep", "expected an array of integers");
            m.dose_sweep.clear();
            for (const auto& d : *v) {
                if (!d.is_number_integer())
                    throw ConfigError("simulation.dose_sweep", "expected an array of integers");
                m.dose_sweep.push_back(d.get<long>());
            }
        }
        s.finish();
    }
    {
        auto s = root.child("units");
        s.read("diffusion_cm2_s", c.units.diffusion_cm2_s);
        s.read("cell_diameter_cm", c.units.cell_diameter_cm);
        s.read("particles_per_na", c.units.particles_per_na);
        s.read("msd_dimension_factor", c.units.msd_dimension_factor);
        s.finish();
    }
    {
        auto s = root.child("ssa");
        auto& q = c.ssa;
        s.read("n_compartments", q.n_compartments);
        s.read("receptors_per_cell", q.receptors_per_cell);
        s.read_enum("boundary", q.boundary, {{"bolus", Boundary::Bolus}, {"source", Boundary::Source}});
        s.read("bolus", q.bolus);
        s.read("source_level", q.source_level);
        s.read("p_a", q.p_a);
        s.read("p_d", q.p_d);
        s.read("p_i", q.p_i);
        s.read("kill_threshold", q.kill_threshold);
        s.read("t_end_s", q.t_end_s);
        s.read("sample_dt_s", q.sample_dt_s);
        s.read("threshold_fraction", q.threshold_fraction);
        if (const json* v = s.find("k_hop_override"); v && !v->is_null()) {
            if (!v->is_number())
                throw ConfigError("ssa.k_hop_override", "expected a number or null");
            q.k_hop_override = v->get<double>();
        }
        s.finish();
    }
    root.finish();
    validate(c);
    return c;
}

inline SimConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", "'" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc);
}

inline json to_json(const SimConfig& c)
{
    auto name = [](auto value, std::initializer_list<std::pair<const char*, decltype(value)>> names) {
        for (const auto& [n, v] : names)
            if (v == value)
                return std::string(n);
        return std::string("?");
    };
    json directions = json::object();
    for (const RateTarget t : kAllTargets)
        directions[std::string(to_string(t))] = c.kinetics.directions[static_cast<int>(t)];
    return json{
        {"seed", c.seed},
        {"replicates", c.replicates},
        {"world",
         {{"width", c.world.width},
          {"height", c.world.height},
          {"cc_count", c.world.cc_count},
          {"hc_count", c.world.hc_count},
          {"placement", name(c.world.placement, {{"disk", Placement::Disk}, {"scattered", Placement::Scattered}})},
          {"signature_bits", c.world.signature_bits},
          {"memory_capacity", c.world.memory_capacity},
          {"agent_count", c.world.agent_count},
          {"speed_max", c.world.speed_max}}},
        {"kinetics",
         {{"curiosity", c.kinetics.curiosity},
          {"init_prob_min", c.kinetics.init_prob_min},
          {"init_prob_max", c.kinetics.init_prob_max},
          {"resistance_directions", directions}}},
        {"evolution",
         {{"round_period", c.evolution.round_period},
          {"replace_fraction", c.evolution.replace_fraction},
          {"mutation_sigma", c.evolution.mutation_sigma},
          {"signature_flip_prob", c.evolution.signature_flip_prob},
          {"division_prob", c.evolution.division_prob},
          {"resistance_fraction", c.evolution.resistance_fraction},
          {"resistance_strength_min", c.evolution.resistance_strength_min},
          {"resistance_strength_max", c.evolution.resistance_strength_max},
          {"signature_drift", name(c.evolution.signature_drift, {{"at_division", SignatureDrift::AtDivision},
                                                                 {"per_step", SignatureDrift::PerStep}})},
          {"fitness_window", c.evolution.fitness_window},
          {"growth_in_learning", c.evolution.growth_in_learning}}},
        {"learning", {{"steps", c.learning.steps}}},
        {"simulation",
         {{"total_dose", c.simulation.total_dose},
          {"ramp_steps", c.simulation.ramp_steps},
          {"decline_steps", c.simulation.decline_steps},
          {"steps", c.simulation.steps},
          {"entry", name(c.simulation.entry, {{"random_border", EntrySites::RandomBorder},
                                              {"left_edge", EntrySites::LeftEdge}})},
          {"growth", c.simulation.growth},
          {"top_k", c.simulation.top_k},
          {"dose_sweep", c.simulation.dose_sweep}}},
        {"units",
         {{"diffusion_cm2_s", c.units.diffusion_cm2_s},
          {"cell_diameter_cm", c.units.cell_diameter_cm},
          {"particles_per_na", c.units.particles_per_na},
          {"msd_dimension_factor", c.units.msd_dimension_factor}}},
        {"ssa",
         {{"n_compartments", c.ssa.n_compartments},
          {"receptors_per_cell", c.ssa.receptors_per_cell},
          {"boundary", name(c.ssa.boundary, {{"bolus", Boundary::Bolus}, {"source", Boundary::Source}})},
          {"bolus", c.ssa.bolus},
          {"source_level", c.ssa.source_level},
          {"p_a", c.ssa.p_a},
          {"p_d", c.ssa.p_d},
          {"p_i", c.ssa.p_i},
          {"kill_threshold", c.ssa.kill_threshold},
          {"t_end_s", c.ssa.t_end_s},
          {"sample_dt_s", c.ssa.sample_dt_s},
          {"threshold_fraction", c.ssa.threshold_fraction},
          {"k_hop_override", c.ssa.k_hop_override ? json(*c.ssa.k_hop_override) : json(nullptr)}}},
    };
}

} // namespace nanoevo
