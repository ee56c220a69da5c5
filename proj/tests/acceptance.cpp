// Acceptance run: one PASS/FAIL line per criterion. Optional arguments select
// criteria by name.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace lifsync;
using namespace lifsync::oracle;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

NetworkParams fig1_red(double eps) {
    return uniform_network(1599, 100.0, -0.052, -0.055, -0.070, -0.100, eps, 0.00075);
}

SimConfig fig1_config() {
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.seed = 42;
    return cfg;
}

constexpr double kTheorem1Oracle = 0.99875172210357755590111575;  // 50-digit evaluation
constexpr double kDetFireTime = 0.01791759469228055000812;         // ln(6) / 100

Outcome theorem1_domination() {
    const NetworkParams p = fig1_red(1e-6);
    const Estimate e = estimate_stay_sync(p, fig1_config(), 1000);
    // stated target or computed bound, whichever is higher
    const double bound = std::max(theorem1_bound(p).value, 0.998754);
    const double floor = bound - 3.0 * e.half_width();
    return {e.point >= floor,
            fmt("P=%.6f (%llu/%llu, CI [%.6f, %.6f]) vs bound %.6f - 3hw = %.6f", e.point,
                (unsigned long long)e.successes, (unsigned long long)e.trials, e.ci_low, e.ci_high,
                bound, floor)};
}

Outcome monotone_in_noise() {
    std::string detail;
    bool ok = true;
    double prev = 2.0;
    for (double eps : {1e-6, 1e-5, 1e-4, 1e-3}) {
        const Estimate e = estimate_stay_sync(fig1_red(eps), fig1_config(), 1000);
        detail += fmt("eps=%g:%.4f(%llu) ", eps, e.point, (unsigned long long)e.censored);
        ok = ok && e.point <= prev;
        prev = e.point;
    }
    return {ok, detail};
}

Outcome deterministic_exactness() {
    const NetworkParams p = fig1_red(0.0);
    RandomStream rng(1, 0);
    const TrialRecord rec =
        run_trial(std::vector<volts>(p.n_neurons, p.reset), p, SimConfig{}, 10, rng);
    const double ulp = std::nextafter(kDetFireTime, 1.0) - kDetFireTime;
    bool ok = rec.events.size() == 10 && rec.first_sync_index == 1u;
    double worst_first = std::abs(rec.events.at(0).time - kDetFireTime);
    double worst_gap = 0.0;
    ok = ok && worst_first <= 4.0 * ulp;
    for (std::size_t k = 0; k < rec.events.size(); ++k) {
        ok = ok && rec.events[k].is_full_sync && rec.events[k].outcome.layers.size() == 1;
        const double gap = rec.events[k].time - (k ? rec.events[k - 1].time : 0.0);
        worst_gap = std::max(worst_gap, std::abs(gap - kDetFireTime));
    }
    ok = ok && worst_gap <= 16.0 * ulp;
    return {ok, fmt("tau_1=%.17g, |tau_1 - ln6/100| = %.2g (%.1f ulp), worst interval error %.1f ulp, "
                    "%zu events all full",
                    rec.events.at(0).time, worst_first, worst_first / ulp, worst_gap / ulp,
                    rec.events.size())};
}

Outcome accumulation_oracle() {
    double worst = 0.0;
    std::size_t comparisons = 0;
    for (std::uint64_t c = 0; c < 100; ++c) {
        const AccumulationCheck r = accumulation_case(500000 + c);
        worst = std::max(worst, r.max_error);
        comparisons += r.comparisons;
    }
    return {worst <= 1e-12 && comparisons > 0,
            fmt("100 cases, %zu comparisons, max |error| = %.3g V", comparisons, worst)};
}

Outcome cascade_fixpoint() {
    RandomStream rng(31337, 0);
    std::size_t mismatches = 0, full = 0;
    for (int k = 0; k < 10000; ++k) {
        const CascadeInstance inst = random_cascade_instance(rng, k % 2 == 0);
        const FiringOutcome out = resolve_firing(inst.pre, inst.params);
        if (out.spikers != absorption_oracle(inst.pre, inst.params, rng)) ++mismatches;
        full += out.all_spiked();
    }
    return {mismatches == 0,
            fmt("10000 instances, %zu mismatches, %zu fully synchronizing", mismatches, full)};
}

Outcome theorem2_domination() {
    const ExperimentSpec s = preset("thm2_synthetic");
    const NetworkParams& p = s.params;
    const SyncCurve c = estimate_bs(p, s.sim, 10000, 5, InitialCondition::uniform);
    const Estimate& e = c.bs_estimates.at(4);
    const BoundReport b = theorem2_bound(p, 5);
    const double floor = b.value - 3.0 * e.half_width();
    return {b.preconditions_met && e.point >= floor,
            fmt("P(BS_5)=%.6f (%llu/%llu) vs bound %.7f - 3hw = %.6f, hypotheses met: %s", e.point,
                (unsigned long long)e.successes, (unsigned long long)e.trials, b.value, floor,
                b.preconditions_met ? "yes" : "no")};
}

Outcome ldp_tail() {
    const ExperimentSpec s = preset("ldp_tail");
    const LdpTailSettings set{s.params.leak_rate, s.params.drive, s.ldp.x0, s.ldp.delta, s.ldp.horizon};
    const auto pts = estimate_ldp_tail(set, s.sweep.at(0).values, s.sim, 1000000);
    const double target = -ldp_rate(set.gamma, set.delta, set.horizon);
    bool ok = pts.size() == 3;
    std::string detail;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        detail += fmt("eps=%g: P=%.5f eps*logP=%.5f; ", pts[k].epsilon, pts[k].estimate.point,
                      pts[k].eps_log_p);
        ok = ok && !pts[k].below_resolution;
        if (k > 0) ok = ok && pts[k].eps_log_p < pts[k - 1].eps_log_p;
    }
    const double last = pts.back().eps_log_p;
    const double rel = std::abs(last - target) / std::abs(target);
    ok = ok && rel <= 0.30;
    detail += fmt("limit %.5f, relative gap at smallest eps %.1f%%", target, 100.0 * rel);
    return {ok, detail};
}

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lifsync_acceptance_repro";
    fs::remove_all(dir);

    std::vector<ExperimentSpec> specs;
    {
        ExperimentSpec s = preset("fig1_red");
        s.params.n_neurons = 400;
        s.params.weights = WeightMatrix::uniform(400, s.params.min_weight());
        s.sweep[0].values = {1e-6, 1e-4, 1e-3, 2.25e-3};
        s.trials = 200;
        s.sim.seed = 42;
        specs.push_back(s);
    }
    {
        ExperimentSpec s = preset("fig2");
        s.params.n_neurons = 50;
        s.params.weights = WeightMatrix::uniform(50, 0.003);
        s.sweep = {{"min_weight", {0.003, 0.0045}}};
        s.trials = 300;
        s.n_max = 40;
        specs.push_back(s);
    }
    {
        ExperimentSpec s = preset("ldp_tail");
        s.trials = 20000;
        specs.push_back(s);
    }
    {
        ExperimentSpec s = preset("thm2_synthetic");
        s.trials = 2000;
        specs.push_back(s);
    }
    {
        ExperimentSpec s = load_spec(std::string(LIFSYNC_SPECS_DIR) + "/small_network.json");
        specs.push_back(s);
    }

    std::size_t compared = 0, differing = 0;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        std::string reference;
        for (unsigned workers : {1u, 2u, 3u, 8u}) {
            ExperimentSpec s = specs[k];
            s.output_path = (dir / (std::to_string(k) + "_w" + std::to_string(workers))).string();
            run_experiment(s, {workers, true});
            json meta = json::parse(file_bytes(s.output_path + ".json"));
            meta["spec"].erase("output_path");
            const std::string bytes = file_bytes(s.output_path + ".csv") + meta.dump();
            if (workers == 1) reference = bytes;
            else {
                ++compared;
                differing += bytes != reference;
            }
        }
    }
    fs::remove_all(dir);
    return {differing == 0,
            fmt("%zu experiments x workers {1,2,3,8}: %zu of %zu CSV+JSON pairs differ from 1 worker "
                "(metadata compared without output_path)",
                specs.size(), differing, compared)};
}

Outcome bound_precision() {
    const double v = theorem1_bound(fig1_red(1e-6)).value;
    const double rel = std::abs(v - kTheorem1Oracle) / kTheorem1Oracle;
    return {rel <= 1e-12, fmt("value %.17g, oracle %.17g, relative error %.2g", v, kTheorem1Oracle, rel)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"theorem1_domination", theorem1_domination},
        {"monotone_in_noise", monotone_in_noise},
        {"deterministic_exactness", deterministic_exactness},
        {"noiseless_accumulation_oracle", accumulation_oracle},
        {"cascade_fixpoint", cascade_fixpoint},
        {"theorem2_domination", theorem2_domination},
        {"ldp_tail", ldp_tail},
        {"reproducibility", reproducibility},
        {"bound_precision", bound_precision},
    };
    std::vector<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
                    o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
