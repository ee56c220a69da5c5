#pragma once

// Runs an ExperimentSpec and serializes the result as a CSV table plus a JSON
// metadata sidecar. Numbers are printed with 17 significant digits, rows in
// sweep order, so output is bit-identical for a fixed spec and seed.
//
// CSV schemas (sweep columns, one per axis, come first; "epsilon" names the
// noise_intensity axis; every row ends with the resolved SI parameters):
//   stay_sync_sweep    point, ci_low, ci_high, successes, trials, censored,
//                      theorem1_bound, bound_preconditions_met
//   bs_curve           n, bs_point, bs_low, bs_high, first_sync_point,
//                      first_sync_low, first_sync_high, trials, truncated,
//                      theorem2_bound, theorem2_preconditions_met
//   bounds_table       theorem1_bound, preconditions_met
//   single_trial_trace event, time, n_spikers, n_layers, is_full_sync
//   ldp_tail           epsilon, point, ci_low, ci_high, successes, trials,
//                      below_resolution, eps_log_p, neg_rate  (then leak_rate,
//                      drive, x0, delta, horizon instead of network params)

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lifsync/bounds.hpp"
#include "lifsync/montecarlo.hpp"
#include "lifsync/simulator.hpp"
#include "lifsync/spec.hpp"
#include "lifsync/version.hpp"

namespace lifsync {

using Cell = std::variant<std::int64_t, double>;

struct ResultTable {
    json metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_cell(const Cell& c) {
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const double d = std::get<double>(c);
    if (std::isnan(d)) return "nan";
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, d, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline void write_csv(std::ostream& out, const ResultTable& t) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
}

inline std::string to_csv(const ResultTable& t) {
    std::ostringstream s;
    write_csv(s, t);
    return s.str();
}

struct RunOptions {
    unsigned workers = 0;  // 0 = default_workers()
    bool write_files = true;
};

namespace detail {

inline void apply_param(NetworkParams& p, const std::string& name, double v) {
    if (name == "n_neurons") {
        if (!(v >= 1.0) || std::floor(v) != v)
            throw std::invalid_argument("n_neurons sweep values must be positive integers");
        if (!p.weights.is_uniform() && p.weights.size() > 0)
            throw std::invalid_argument("cannot sweep n_neurons with an explicit weight matrix");
        p.n_neurons = static_cast<std::size_t>(v);
        p.weights = WeightMatrix::uniform(p.n_neurons, p.min_weight());
    } else if (name == "min_weight") {
        if (!p.weights.is_uniform() && p.weights.size() > 0)
            throw std::invalid_argument("cannot sweep min_weight with an explicit weight matrix");
        p.weights = WeightMatrix::uniform(p.n_neurons, v);
    } else if (name == "leak_rate") p.leak_rate = v;
    else if (name == "drive") p.drive = v;
    else if (name == "threshold") p.threshold = v;
    else if (name == "reset") p.reset = v;
    else if (name == "floor") p.floor = v;
    else if (name == "noise_intensity") p.noise_intensity = v;
    else throw std::invalid_argument("unknown sweep parameter '" + name + "'");
}

struct SweepPoint {
    std::vector<double> values;  // one per axis
    NetworkParams params;
};

// Cartesian product, first axis outermost.
inline std::vector<SweepPoint> expand_sweep(const ExperimentSpec& s) {
    std::vector<SweepPoint> points{{{}, s.params}};
    for (const auto& axis : s.sweep) {
        std::vector<SweepPoint> next;
        for (const auto& pt : points)
            for (double v : axis.values) {
                SweepPoint q = pt;
                q.values.push_back(v);
                apply_param(q.params, axis.parameter, v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

inline std::string column_name(const std::string& parameter) {
    return parameter == "noise_intensity" ? "epsilon" : parameter;
}

inline const std::vector<std::string>& param_columns() {
    static const std::vector<std::string> c{"n_neurons", "leak_rate",       "drive",
                                            "threshold", "reset",           "floor",
                                            "noise_intensity", "min_weight"};
    return c;
}

inline void append_params(std::vector<Cell>& row, const NetworkParams& p) {
    row.emplace_back(static_cast<std::int64_t>(p.n_neurons));
    for (double v : {p.leak_rate, p.drive, p.threshold, p.reset, p.floor, p.noise_intensity,
                     p.min_weight()})
        row.emplace_back(v);
}

inline Cell flag(bool b) { return static_cast<std::int64_t>(b); }
inline Cell count(std::uint64_t n) { return static_cast<std::int64_t>(n); }

// Theorem-2 bound at n, or a vacuous 0 when the formula is undefined
// (drive <= threshold or no noise).
inline std::pair<double, bool> theorem2_or_vacuous(const NetworkParams& p, std::size_t n) {
    if (!p.drive_above_threshold() || !(p.noise_intensity > 0.0)) return {0.0, false};
    const BoundReport r = theorem2_bound(p, n);
    return {r.value, r.preconditions_met};
}

}  // namespace detail

inline ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& ro = {}) {
    ResultTable t;
    MonteCarloOptions mc{spec.confidence, ro.workers};
    json notes = json::array();

    // Validate every sweep point before any simulation starts.
    if (is_simulation(spec.kind) && spec.trials == 0)
        throw std::invalid_argument("trials must be positive");
    validate(spec.sim);
    std::vector<detail::SweepPoint> points;
    if (spec.kind != ExperimentKind::ldp_tail) {
        points = detail::expand_sweep(spec);
        for (const auto& pt : points) {
            try {
                validate(pt.params);
            } catch (const std::invalid_argument& e) {
                std::string where;
                for (std::size_t i = 0; i < pt.values.size(); ++i)
                    where += spec.sweep[i].parameter + "=" + format_cell(pt.values[i]) + " ";
                throw std::invalid_argument("sweep point " + where + ": " + e.what());
            }
        }
    }

    std::vector<std::string> sweep_cols;
    for (const auto& a : spec.sweep) sweep_cols.push_back(detail::column_name(a.parameter));
    auto with_params = [&](std::vector<std::string> mid) {
        std::vector<std::string> c = sweep_cols;
        c.insert(c.end(), mid.begin(), mid.end());
        c.insert(c.end(), detail::param_columns().begin(), detail::param_columns().end());
        return c;
    };
    auto start_row = [](const detail::SweepPoint& pt) {
        std::vector<Cell> row;
        for (double v : pt.values) row.emplace_back(v);
        return row;
    };

    switch (spec.kind) {
        case ExperimentKind::stay_sync_sweep: {
            t.columns = with_params({"point", "ci_low", "ci_high", "successes", "trials", "censored",
                                     "theorem1_bound", "bound_preconditions_met"});
            for (const auto& pt : points) {
                const Estimate e = estimate_stay_sync(pt.params, spec.sim, spec.trials, mc);
                const BoundReport b = theorem1_bound(pt.params);
                auto row = start_row(pt);
                row.insert(row.end(), {e.point, e.ci_low, e.ci_high, detail::count(e.successes),
                                       detail::count(e.trials), detail::count(e.censored),
                                       b.value, detail::flag(b.preconditions_met)});
                detail::append_params(row, pt.params);
                t.rows.push_back(std::move(row));
            }
            notes.push_back("censored trials (horizon reached or no firing) count as failures");
            notes.push_back("theorem1_bound holds only for noise below an unspecified eps0");
            break;
        }
        case ExperimentKind::bs_curve: {
            t.columns = with_params({"n", "bs_point", "bs_low", "bs_high", "first_sync_point",
                                     "first_sync_low", "first_sync_high", "trials", "truncated",
                                     "theorem2_bound", "theorem2_preconditions_met"});
            for (const auto& pt : points) {
                const SyncCurve c =
                    estimate_bs(pt.params, spec.sim, spec.trials, spec.n_max, spec.init, mc);
                for (std::size_t k = 0; k < c.n_values.size(); ++k) {
                    const auto& bs = c.bs_estimates[k];
                    const auto& fs = c.first_sync_pmf[k];
                    const auto [bound, ok] = detail::theorem2_or_vacuous(pt.params, c.n_values[k]);
                    auto row = start_row(pt);
                    row.insert(row.end(),
                               {detail::count(c.n_values[k]), bs.point, bs.ci_low, bs.ci_high,
                                fs.point, fs.ci_low, fs.ci_high, detail::count(spec.trials),
                                detail::count(c.truncated), bound, detail::flag(ok)});
                    detail::append_params(row, pt.params);
                    t.rows.push_back(std::move(row));
                }
            }
            notes.push_back("truncated trials count as never synchronized");
            notes.push_back("theorem2_bound = 0 where the bound is undefined");
            break;
        }
        case ExperimentKind::bounds_table: {
            t.columns = with_params({"theorem1_bound", "preconditions_met"});
            for (const auto& pt : points) {
                const BoundReport b = theorem1_bound(pt.params);
                auto row = start_row(pt);
                row.insert(row.end(), {b.value, detail::flag(b.preconditions_met)});
                detail::append_params(row, pt.params);
                t.rows.push_back(std::move(row));
            }
            break;
        }
        case ExperimentKind::single_trial_trace: {
            t.columns = with_params({"event", "time", "n_spikers", "n_layers", "is_full_sync"});
            const auto& pt = points.front();
            RandomStream init_rng = trial_stream(spec.sim, 0, 1);
            RandomStream rng = trial_stream(spec.sim, 0, 0);
            const TrialRecord rec = run_trial(initial_potentials(spec.init, pt.params, init_rng),
                                              pt.params, spec.sim, spec.n_max, rng);
            for (std::size_t k = 0; k < rec.events.size(); ++k) {
                const auto& ev = rec.events[k];
                std::vector<Cell> row{detail::count(k + 1), ev.time,
                                      detail::count(ev.outcome.spikers.size()),
                                      detail::count(ev.outcome.layers.size()),
                                      detail::flag(ev.is_full_sync)};
                detail::append_params(row, pt.params);
                t.rows.push_back(std::move(row));
            }
            t.metadata["first_sync_index"] =
                rec.first_sync_index ? json(*rec.first_sync_index) : json(nullptr);
            t.metadata["truncated"] = rec.truncated;
            t.metadata["never_fires"] = rec.never_fires;
            break;
        }
        case ExperimentKind::ldp_tail: {
            t.columns = {"epsilon", "point",     "ci_low",    "ci_high", "successes",
                         "trials",  "below_resolution", "eps_log_p", "neg_rate", "leak_rate",
                         "drive",   "x0",        "delta",     "horizon"};
            std::vector<double> eps_list;
            if (spec.sweep.empty()) eps_list.push_back(spec.params.noise_intensity);
            for (const auto& a : spec.sweep) eps_list.insert(eps_list.end(), a.values.begin(), a.values.end());
            const LdpTailSettings s{spec.params.leak_rate, spec.params.drive, spec.ldp.x0,
                                    spec.ldp.delta, spec.ldp.horizon};
            for (const auto& pt : estimate_ldp_tail(s, eps_list, spec.sim, spec.trials, mc)) {
                const auto& e = pt.estimate;
                t.rows.push_back({pt.epsilon, e.point, e.ci_low, e.ci_high, detail::count(e.successes),
                                  detail::count(e.trials), detail::flag(pt.below_resolution),
                                  pt.eps_log_p, pt.neg_rate, s.gamma, s.drive, s.x0, s.delta,
                                  s.horizon});
            }
            t.metadata["ldp_rate"] = ldp_rate(s.gamma, s.delta, s.horizon);
            notes.push_back("below_resolution rows report the one-sided Wilson upper limit in "
                            "ci_high and eps*log(ci_high) in eps_log_p");
            break;
        }
    }

    t.metadata["kind"] = to_string(spec.kind);
    t.metadata["code_version"] = kVersion;
    t.metadata["seed"] = spec.sim.seed;
    t.metadata["spec"] = spec_to_json(spec);
    t.metadata["columns"] = t.columns;
    t.metadata["row_count"] = t.rows.size();
    t.metadata["notes"] = std::move(notes);

    if (ro.write_files && !spec.output_path.empty()) {
        const std::filesystem::path base(spec.output_path);
        if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
        std::ofstream csv(base.string() + ".csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + base.string() + ".csv");
        write_csv(csv, t);
        std::ofstream meta(base.string() + ".json", std::ios::binary);
        if (!meta) throw std::runtime_error("cannot write " + base.string() + ".json");
        meta << t.metadata.dump(2) << '\n';
    }
    return t;
}

// Every closed-form quantity for each sweep point, as JSON.
inline json bounds_report(const ExperimentSpec& spec) {
    json out = json::array();
    for (const auto& pt : detail::expand_sweep(spec)) {
        const NetworkParams& p = pt.params;
        validate(p);
        json entry;
        json at = json::object();
        for (std::size_t i = 0; i < pt.values.size(); ++i)
            at[spec.sweep[i].parameter] = pt.values[i];
        entry["sweep_point"] = std::move(at);
        auto report = [](const BoundReport& r) {
            return json{{"value", r.value},
                        {"preconditions_met", r.preconditions_met},
                        {"violated_conditions", r.violated_conditions},
                        {"caveats", r.caveats}};
        };
        entry["theorem1"] = report(theorem1_bound(p));
        if (p.noise_intensity > 0.0) {
            const DimensionlessParams d = dimensionless_params(p);
            entry["dimensionless"] = {{"p1", d.p1}, {"p2", d.p2}, {"p3", d.p3}, {"n0", d.n0}};
            if (d.drive_above_threshold) {
                entry["theorem2_at_n0"] = report(theorem2_bound(d, p.n_neurons,
                                                                static_cast<std::size_t>(d.n0)));
                entry["boundpam"] = report(boundpam_bound(d, p.n_neurons));
            } else {
                entry["synchronization_bounds"] = "not evaluated: drive <= threshold";
            }
        }
        const volts half_m = 0.5 * p.min_weight();
        if (p.drive_above_threshold() &&
            half_m < std::min(p.drive - p.threshold, p.threshold - p.reset)) {
            const SyncWindow w = sync_window(half_m, p);
            entry["sync_window_half_min_weight"] = {{"delta", half_m}, {"t1", w.t1}, {"t2", w.t2}};
        }
        if (p.drive_above_threshold())
            entry["deterministic_fire_time_from_reset"] = *deterministic_next_fire_time(p.reset, p);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace lifsync
