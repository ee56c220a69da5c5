#pragma once

// Experiment specifications: JSON loading with unit normalization, writing,
// and the built-in presets.
//
// Every numeric field may be given in its SI unit under its bare name
// ("drive": -0.052) or with an explicit unit suffix ("drive_mV": -52).
// Accepted suffixes: _V and _mV for potentials, _s and _ms for times. A suffix
// of the wrong dimension is a unit-mismatch error; unknown keys are errors.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lifsync/montecarlo.hpp"
#include "lifsync/params.hpp"
#include "lifsync/simulator.hpp"

namespace lifsync {

using json = nlohmann::json;

class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class ExperimentKind { stay_sync_sweep, bs_curve, ldp_tail, bounds_table, single_trial_trace };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::stay_sync_sweep: return "stay_sync_sweep";
        case ExperimentKind::bs_curve: return "bs_curve";
        case ExperimentKind::ldp_tail: return "ldp_tail";
        case ExperimentKind::bounds_table: return "bounds_table";
        case ExperimentKind::single_trial_trace: return "single_trial_trace";
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
    for (auto k : {ExperimentKind::stay_sync_sweep, ExperimentKind::bs_curve,
                   ExperimentKind::ldp_tail, ExperimentKind::bounds_table,
                   ExperimentKind::single_trial_trace})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

inline bool is_simulation(ExperimentKind k) { return k != ExperimentKind::bounds_table; }

struct SweepAxis {
    std::string parameter;      // canonical name, e.g. "noise_intensity"
    std::vector<double> values; // SI

    bool operator==(const SweepAxis&) const = default;
};

struct LdpSpec {
    volts delta = 0.0;
    seconds horizon = 0.0;
    volts x0 = 0.0;

    bool operator==(const LdpSpec&) const = default;
};

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::bounds_table;
    NetworkParams params;
    SimConfig sim;
    std::vector<SweepAxis> sweep;
    std::uint64_t trials = 1;
    std::size_t n_max = 1;
    InitialCondition init = InitialCondition::at_reset;
    double confidence = 0.95;
    LdpSpec ldp;
    std::string output_path;

    bool operator==(const ExperimentSpec&) const = default;
};

namespace detail {

enum class Dim { count, flag, rate, voltage, noise, time, probability };

inline const std::map<std::string, Dim>& param_fields() {
    static const std::map<std::string, Dim> f{
        {"n_neurons", Dim::count},     {"leak_rate", Dim::rate},
        {"drive", Dim::voltage},       {"threshold", Dim::voltage},
        {"reset", Dim::voltage},       {"floor", Dim::voltage},
        {"noise_intensity", Dim::noise}, {"min_weight", Dim::voltage},
        {"weights", Dim::voltage}};
    return f;
}

inline const std::map<std::string, Dim>& sim_fields() {
    static const std::map<std::string, Dim> f{{"dt", Dim::time},
                                              {"bridge_correction", Dim::flag},
                                              {"max_time", Dim::time},
                                              {"seed", Dim::count},
                                              {"trial_index", Dim::count}};
    return f;
}

inline const std::map<std::string, Dim>& ldp_fields() {
    static const std::map<std::string, Dim> f{
        {"delta", Dim::voltage}, {"horizon", Dim::time}, {"x0", Dim::voltage}};
    return f;
}

inline std::string dim_name(Dim d) {
    switch (d) {
        case Dim::count: return "a count";
        case Dim::flag: return "a boolean";
        case Dim::rate: return "1/s";
        case Dim::voltage: return "V";
        case Dim::noise: return "V^2/s";
        case Dim::time: return "s";
        case Dim::probability: return "a probability";
    }
    return "?";
}

struct Suffix {
    std::string_view text;
    Dim dim;
    int decimal_shift;  // value in SI = value * 10^decimal_shift
};

inline constexpr Suffix kSuffixes[] = {
    {"_mV", Dim::voltage, -3}, {"_V", Dim::voltage, 0}, {"_ms", Dim::time, -3},
    {"_s", Dim::time, 0}};

// Shifts the shortest decimal form of v, so that -54.7 mV becomes exactly
// the double nearest to -0.0547.
inline double decimal_shift(double v, int shift) {
    if (shift == 0 || v == 0.0 || !std::isfinite(v)) return v;
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
    const std::string text(buf, r.ptr);
    const auto e = text.find('e');
    const int exponent = std::stoi(text.substr(e + 1)) + shift;
    const std::string shifted = text.substr(0, e) + "e" + std::to_string(exponent);
    double out = 0.0;
    std::from_chars(shifted.data(), shifted.data() + shifted.size(), out);
    return out;
}

struct ResolvedKey {
    std::string name;
    Dim dim;
    int shift;

    double to_si(double v) const { return decimal_shift(v, shift); }
};

// "epsilon" is accepted as a synonym of "noise_intensity".
inline std::string canonical(std::string name) {
    return name == "epsilon" ? "noise_intensity" : name;
}

inline ResolvedKey resolve_key(const std::string& path, const std::string& key,
                               const std::map<std::string, Dim>& fields) {
    if (auto it = fields.find(canonical(key)); it != fields.end())
        return {it->first, it->second, 0};
    for (const Suffix& s : kSuffixes) {
        if (key.size() <= s.text.size() || !key.ends_with(s.text)) continue;
        const std::string base = canonical(key.substr(0, key.size() - s.text.size()));
        auto it = fields.find(base);
        if (it == fields.end()) continue;
        if (it->second != s.dim)
            throw SpecError(path + "." + key, "unit mismatch: '" + base + "' is " +
                                                  dim_name(it->second) + ", not " +
                                                  std::string(s.text.substr(1)));
        return {base, s.dim, s.decimal_shift};
    }
    throw SpecError(path + "." + key, "unknown key");
}

inline double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SpecError(path, "expected a number");
    return v.get<double>();
}

inline std::uint64_t get_count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw SpecError(path, "expected a nonnegative integer");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    throw SpecError(path, "expected a nonnegative integer");
}

inline const json& require_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw SpecError(path, "expected an object");
    return v;
}

inline NetworkParams parse_params(const json& j, const std::string& path, bool network) {
    require_object(j, path);
    NetworkParams p;
    std::optional<double> min_weight;
    std::optional<std::vector<double>> dense;
    std::map<std::string, bool> seen;
    for (const auto& [key, value] : j.items()) {
        const std::string kp = path + "." + key;
        const ResolvedKey r = resolve_key(path, key, param_fields());
        if (seen[r.name]) throw SpecError(kp, "'" + r.name + "' given more than once");
        seen[r.name] = true;
        if (r.name == "n_neurons") {
            p.n_neurons = get_count(value, kp);
        } else if (r.name == "weights") {
            if (!value.is_array()) throw SpecError(kp, "expected an N x N array");
            std::vector<double> entries;
            for (std::size_t row = 0; row < value.size(); ++row) {
                const json& rj = value[row];
                if (!rj.is_array() || rj.size() != value.size())
                    throw SpecError(kp + "[" + std::to_string(row) + "]",
                                    "expected a row of length " + std::to_string(value.size()));
                for (std::size_t c = 0; c < rj.size(); ++c)
                    entries.push_back(
                        r.to_si(get_number(rj[c], kp + "[" + std::to_string(row) + "][" +
                                                      std::to_string(c) + "]")));
            }
            dense = std::move(entries);
        } else {
            const double v = r.to_si(get_number(value, kp));
            if (r.name == "leak_rate") p.leak_rate = v;
            else if (r.name == "drive") p.drive = v;
            else if (r.name == "threshold") p.threshold = v;
            else if (r.name == "reset") p.reset = v;
            else if (r.name == "floor") p.floor = v;
            else if (r.name == "noise_intensity") p.noise_intensity = v;
            else if (r.name == "min_weight") min_weight = v;
        }
    }
    const std::vector<std::string> required =
        network ? std::vector<std::string>{"n_neurons", "leak_rate", "drive", "threshold", "reset",
                                           "floor", "noise_intensity"}
                : std::vector<std::string>{"leak_rate", "drive", "noise_intensity"};
    for (const auto& name : required)
        if (!seen[name]) throw SpecError(path + "." + name, "missing required field");
    if (min_weight && dense)
        throw SpecError(path + ".weights", "give either min_weight or weights, not both");
    try {
        if (dense) {
            const auto n = static_cast<std::size_t>(std::llround(std::sqrt(dense->size())));
            if (n != p.n_neurons)
                throw SpecError(path + ".weights", "matrix size does not match n_neurons");
            p.weights = WeightMatrix::dense(n, std::move(*dense));
        } else if (min_weight) {
            p.weights = WeightMatrix::uniform(p.n_neurons, *min_weight);
        } else if (network) {
            throw SpecError(path + ".min_weight", "missing required field");
        }
        if (network) validate(p);
    } catch (const std::invalid_argument& e) {
        throw SpecError(path, e.what());
    }
    return p;
}

inline SimConfig parse_sim(const json& j, const std::string& path) {
    require_object(j, path);
    SimConfig c;
    for (const auto& [key, value] : j.items()) {
        const std::string kp = path + "." + key;
        const ResolvedKey r = resolve_key(path, key, sim_fields());
        if (r.name == "dt") c.dt = r.to_si(get_number(value, kp));
        else if (r.name == "max_time") c.max_time = r.to_si(get_number(value, kp));
        else if (r.name == "seed") c.seed = get_count(value, kp);
        else if (r.name == "trial_index") c.trial_index = get_count(value, kp);
        else if (r.name == "bridge_correction") {
            if (!value.is_boolean()) throw SpecError(kp, "expected a boolean");
            c.bridge_correction = value.get<bool>();
        }
    }
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw SpecError(path, e.what());
    }
    return c;
}

inline LdpSpec parse_ldp(const json& j, const std::string& path) {
    require_object(j, path);
    LdpSpec s;
    std::map<std::string, bool> seen;
    for (const auto& [key, value] : j.items()) {
        const std::string kp = path + "." + key;
        const ResolvedKey r = resolve_key(path, key, ldp_fields());
        seen[r.name] = true;
        const double v = r.to_si(get_number(value, kp));
        if (r.name == "delta") s.delta = v;
        else if (r.name == "horizon") s.horizon = v;
        else s.x0 = v;
    }
    for (const char* name : {"delta", "horizon"})
        if (!seen[name]) throw SpecError(path + "." + name, "missing required field");
    if (!(s.delta > 0.0)) throw SpecError(path + ".delta", "must be > 0");
    if (!(s.horizon > 0.0)) throw SpecError(path + ".horizon", "must be > 0");
    return s;
}

inline const std::vector<std::string>& sweepable() {
    static const std::vector<std::string> names{"n_neurons", "leak_rate", "drive",
                                                "threshold", "reset", "floor",
                                                "noise_intensity", "min_weight"};
    return names;
}

inline SweepAxis parse_axis(const json& j, const std::string& path) {
    require_object(j, path);
    SweepAxis axis;
    bool have_name = false, have_values = false;
    int shift = 0;
    for (const auto& [key, value] : j.items()) {
        if (key == "parameter") {
            if (!value.is_string()) throw SpecError(path + ".parameter", "expected a string");
            const std::string raw = value.get<std::string>();
            if (raw == "weights")
                throw SpecError(path + ".parameter", "the weight matrix cannot be swept");
            const ResolvedKey r = resolve_key(path + ".parameter", raw, param_fields());
            axis.parameter = r.name;
            shift = r.shift;
            have_name = true;
        } else if (key == "values") {
            if (!value.is_array() || value.empty())
                throw SpecError(path + ".values", "expected a nonempty array");
            for (std::size_t i = 0; i < value.size(); ++i)
                axis.values.push_back(
                    get_number(value[i], path + ".values[" + std::to_string(i) + "]"));
            have_values = true;
        } else {
            throw SpecError(path + "." + key, "unknown key");
        }
    }
    if (!have_name) throw SpecError(path + ".parameter", "missing required field");
    if (!have_values) throw SpecError(path + ".values", "missing required field");
    for (double& v : axis.values) v = decimal_shift(v, shift);
    return axis;
}

}  // namespace detail

// Parses and validates a spec document. Throws SpecError naming the field.
inline ExperimentSpec parse_spec(const json& j) {
    detail::require_object(j, "$");
    ExperimentSpec s;
    if (!j.contains("kind")) throw SpecError("$.kind", "missing required field");
    if (!j["kind"].is_string()) throw SpecError("$.kind", "expected a string");
    const auto kind = parse_kind(j["kind"].get<std::string>());
    if (!kind) throw SpecError("$.kind", "unknown experiment kind '" + j["kind"].get<std::string>() + "'");
    s.kind = *kind;
    const bool network = s.kind != ExperimentKind::ldp_tail;

    bool have_params = false, have_trials = false;
    for (const auto& [key, value] : j.items()) {
        const std::string kp = "$." + key;
        if (key == "kind") continue;
        if (key == "params") {
            s.params = detail::parse_params(value, kp, network);
            have_params = true;
        } else if (key == "sim") {
            s.sim = detail::parse_sim(value, kp);
        } else if (key == "sweep") {
            if (!value.is_array()) throw SpecError(kp, "expected an array of axes");
            for (std::size_t i = 0; i < value.size(); ++i)
                s.sweep.push_back(detail::parse_axis(value[i], kp + "[" + std::to_string(i) + "]"));
        } else if (key == "trials") {
            s.trials = detail::get_count(value, kp);
            if (s.trials == 0) throw SpecError(kp, "trials must be positive");
            have_trials = true;
        } else if (key == "n_max") {
            s.n_max = detail::get_count(value, kp);
        } else if (key == "init") {
            if (value == "reset") s.init = InitialCondition::at_reset;
            else if (value == "uniform") s.init = InitialCondition::uniform;
            else throw SpecError(kp, "expected \"reset\" or \"uniform\"");
        } else if (key == "confidence") {
            s.confidence = detail::get_number(value, kp);
            if (!(s.confidence > 0.0 && s.confidence < 1.0))
                throw SpecError(kp, "must lie in (0, 1)");
        } else if (key == "ldp") {
            s.ldp = detail::parse_ldp(value, kp);
        } else if (key == "output_path") {
            if (!value.is_string()) throw SpecError(kp, "expected a string");
            s.output_path = value.get<std::string>();
        } else {
            throw SpecError(kp, "unknown key");
        }
    }
    if (!have_params) throw SpecError("$.params", "missing required field");
    if (is_simulation(s.kind) && !have_trials) throw SpecError("$.trials", "missing required field");
    if (s.kind == ExperimentKind::ldp_tail) {
        if (!j.contains("ldp")) throw SpecError("$.ldp", "missing required field");
        for (const auto& axis : s.sweep)
            if (axis.parameter != "noise_intensity")
                throw SpecError("$.sweep", "ldp_tail only sweeps noise_intensity");
    }
    if ((s.kind == ExperimentKind::bs_curve || s.kind == ExperimentKind::single_trial_trace) &&
        !j.contains("n_max"))
        throw SpecError("$.n_max", "missing required field");
    if (s.kind == ExperimentKind::single_trial_trace && !s.sweep.empty())
        throw SpecError("$.sweep", "single_trial_trace does not take a sweep");
    if (s.kind == ExperimentKind::single_trial_trace && s.n_max == 0)
        throw SpecError("$.n_max", "must be positive");
    return s;
}

inline ExperimentSpec load_spec_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError("$", std::string("invalid JSON: ") + e.what());
    }
    return parse_spec(j);
}

inline ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError(path, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_spec_text(buf.str());
}

// SI representation; parse_spec(spec_to_json(s)) == s.
inline json spec_to_json(const ExperimentSpec& s) {
    json params = {{"leak_rate", s.params.leak_rate},
                   {"drive", s.params.drive},
                   {"noise_intensity", s.params.noise_intensity}};
    if (s.kind != ExperimentKind::ldp_tail || s.params.n_neurons > 0) {
        params["n_neurons"] = s.params.n_neurons;
        params["threshold"] = s.params.threshold;
        params["reset"] = s.params.reset;
        params["floor"] = s.params.floor;
    }
    const WeightMatrix& w = s.params.weights;
    if (w.size() > 0) {
        if (w.is_uniform()) {
            params["min_weight"] = w.min_weight();
        } else {
            json rows = json::array();
            for (std::size_t j = 0; j < w.size(); ++j) {
                json row = json::array();
                for (std::size_t i = 0; i < w.size(); ++i) row.push_back(w.entries()[j * w.size() + i]);
                rows.push_back(std::move(row));
            }
            params["weights"] = std::move(rows);
        }
    }
    json out = {{"kind", to_string(s.kind)},
                {"params", std::move(params)},
                {"sim",
                 {{"dt", s.sim.dt},
                  {"bridge_correction", s.sim.bridge_correction},
                  {"max_time", s.sim.max_time},
                  {"seed", s.sim.seed},
                  {"trial_index", s.sim.trial_index}}},
                {"trials", s.trials},
                {"n_max", s.n_max},
                {"init", s.init == InitialCondition::uniform ? "uniform" : "reset"},
                {"confidence", s.confidence},
                {"output_path", s.output_path}};
    if (!s.sweep.empty()) {
        json axes = json::array();
        for (const auto& a : s.sweep) axes.push_back({{"parameter", a.parameter}, {"values", a.values}});
        out["sweep"] = std::move(axes);
    }
    if (s.kind == ExperimentKind::ldp_tail)
        out["ldp"] = {{"delta", s.ldp.delta}, {"horizon", s.ldp.horizon}, {"x0", s.ldp.x0}};
    return out;
}

// ---------------------------------------------------------------------------
// Presets. Values are written in the units of the published figure captions.

namespace detail {

inline std::string fig1_preset(const char* drive_mV) {
    // eps grid: zoomed range [0, 2.25e-4] in tenths, then up to 2.25e-3
    return std::string(R"({
  "kind": "stay_sync_sweep",
  "params": {"n_neurons": 1599, "leak_rate": 100, "drive_mV": )") + drive_mV + R"(,
             "threshold_mV": -55, "reset_mV": -70, "floor_mV": -100,
             "noise_intensity": 0, "min_weight_mV": 0.75},
  "sim": {"dt": 1e-4, "bridge_correction": true, "max_time": 10, "seed": 20170901},
  "sweep": [{"parameter": "noise_intensity",
             "values": [0, 2.25e-5, 4.5e-5, 6.75e-5, 9e-5, 1.125e-4, 1.35e-4, 1.575e-4, 1.8e-4,
                        2.025e-4, 2.25e-4, 4.5e-4, 6.75e-4, 9e-4, 1.125e-3, 1.35e-3, 1.575e-3,
                        1.8e-3, 2.025e-3, 2.25e-3]}],
  "trials": 1000,
  "init": "reset"
})";
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
    return {"fig1_red", "fig1_green", "fig1_blue", "fig1_red_bounds", "fig2",
            "thm2_synthetic", "ldp_tail", "deterministic_trace"};
}

inline ExperimentSpec preset(const std::string& name) {
    std::string text;
    if (name == "fig1_red") text = detail::fig1_preset("-52");
    else if (name == "fig1_green") text = detail::fig1_preset("-54.7");
    else if (name == "fig1_blue") text = detail::fig1_preset("-55.3");
    else if (name == "fig1_red_bounds") {
        json j = json::parse(detail::fig1_preset("-52"));
        j["kind"] = "bounds_table";
        j.erase("trials");
        text = j.dump();
    } else if (name == "fig2") {
        text = R"({
  "kind": "bs_curve",
  "params": {"n_neurons": 1599, "leak_rate": 100, "drive_mV": -52, "threshold_mV": -55,
             "reset_mV": -70, "floor_mV": -100, "noise_intensity": 2.25e-5,
             "min_weight_mV": 0.03},
  "sim": {"dt": 1e-4, "bridge_correction": true, "max_time": 10, "seed": 20170902},
  "sweep": [{"parameter": "min_weight_mV", "values": [0.0150, 0.0225, 0.0270, 0.0300]}],
  "trials": 1000,
  "n_max": 400,
  "init": "uniform"
})";
    } else if (name == "thm2_synthetic") {
        // p1 = 5, p2 = 2, p3 = 2, N = 20: inside the hypotheses of the
        // synchronization bound
        text = R"({
  "kind": "bs_curve",
  "params": {"n_neurons": 20, "leak_rate": 1, "drive": 2, "threshold": 1, "reset": 0,
             "floor": 0, "noise_intensity": 0.02, "min_weight": 0.5},
  "sim": {"dt": 1e-3, "bridge_correction": true, "max_time": 100, "seed": 20170903},
  "trials": 10000,
  "n_max": 5,
  "init": "uniform"
})";
    } else if (name == "ldp_tail") {
        text = R"({
  "kind": "ldp_tail",
  "params": {"leak_rate": 1, "drive": 0, "noise_intensity": 0.1},
  "sim": {"dt": 1e-3, "bridge_correction": true, "max_time": 10, "seed": 20170904},
  "sweep": [{"parameter": "noise_intensity", "values": [0.1, 0.05, 0.025]}],
  "ldp": {"delta": 0.3, "horizon": 2, "x0": 0},
  "trials": 1000000
})";
    } else if (name == "deterministic_trace") {
        text = R"({
  "kind": "single_trial_trace",
  "params": {"n_neurons": 1599, "leak_rate": 100, "drive_mV": -52, "threshold_mV": -55,
             "reset_mV": -70, "floor_mV": -100, "noise_intensity": 0, "min_weight_mV": 0.75},
  "sim": {"dt": 1e-4, "bridge_correction": true, "max_time": 10, "seed": 1},
  "trials": 1,
  "n_max": 3,
  "init": "reset"
})";
    } else {
        throw SpecError("preset", "unknown preset '" + name + "'");
    }
    ExperimentSpec s = load_spec_text(text);
    s.output_path = name;
    return s;
}

}  // namespace lifsync
