// Command-line front end: configure an experiment, run it, persist results.
//
// Subcommands: capacity, sweep, detector-sweep, baseline, alphabet-sweep,
// extended, verify.  Config precedence: flags > config file > defaults.
// LOCAP_SEED sets the default seed.  Exit codes: 0 success, 1 invalid input,
// 2 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "locap/channel.hpp"
#include "locap/common.hpp"
#include "locap/optimize.hpp"
#include "locap/protocols.hpp"
#include "locap/serialize.hpp"
#include "locap/verify.hpp"

namespace {

using locap::format_double;

std::uint64_t env_default_seed() {
    if (const char* s = std::getenv("LOCAP_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw locap::InputError("LOCAP_SEED is not a valid integer");
        }
    }
    return 12345;
}

void emit(const std::string& summary, const std::string& artifact, const std::string& path) {
    std::cout << summary << "\n";
    if (path.empty())
        std::cout << artifact;
    else
        locap::write_text_file(path, artifact);
}

std::string digest(const std::string& canonical) { return locap::to_hex(locap::fnv1a(canonical)); }

struct CommonOpts {
    int restarts = 500;
    int jobs = 1;
    int max_iterations = 400;
    double stop_at = 0.0;  // 0 = disabled
    std::string output;

    void attach(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "random restarts")->check(CLI::PositiveNumber);
        cmd->add_option("--jobs", jobs, "parallel restart workers")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iterations", max_iterations, "quasi-Newton iteration cap")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--stop-at", stop_at, "stop restarts once this capacity is reached");
        cmd->add_option("-o,--output", output, "write the artifact to this file");
    }

    locap::OptimizerConfig config(std::uint64_t seed) const {
        locap::OptimizerConfig cfg;
        cfg.restarts = restarts;
        cfg.jobs = jobs;
        cfg.max_iterations = max_iterations;
        cfg.seed = seed;
        if (stop_at > 0.0) cfg.stop_at_bits = stop_at;
        return cfg;
    }
};

std::optional<locap::DetectorModel> detector_from(double s, double v, bool s_set, bool v_set) {
    if (s_set != v_set)
        throw locap::InputError("detector model needs both --detector-s and --detector-v");
    if (!s_set) return std::nullopt;
    return locap::DetectorModel{s, v};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entanglement-assisted linear-optics channel capacity toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file with [subcommand] sections");

    std::uint64_t seed = 0;
    bool seed_set_by_env = false;
    try {
        seed = env_default_seed();
        seed_set_by_env = true;
    } catch (const locap::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    (void)seed_set_by_env;
    app.add_option("--seed", seed, "base RNG seed (env LOCAP_SEED)")
        ->capture_default_str();

    // capacity ---------------------------------------------------------------
    auto* cap_cmd = app.add_subcommand("capacity", "maximize capacity for one protocol shape");
    int photons = 2, modes = 4, alphabet = 4, alice_modes = 2;
    double mean_photons = -1.0;
    std::string fixed_input;
    std::string priors_mode = "ba";
    double det_s = 1.0, det_v = 1.0;
    CommonOpts cap_common;
    cap_cmd->add_option("--photons", photons, "photon number n")->check(CLI::PositiveNumber);
    cap_cmd->add_option("--modes", modes, "mode count N")->check(CLI::PositiveNumber);
    cap_cmd->add_option("--alphabet", alphabet, "alphabet size M");
    cap_cmd->add_option("--alice-modes", alice_modes, "size of Alice's mode window");
    cap_cmd->add_option("--mean-photons", mean_photons,
                        "mean photon number constraint on Alice's modes");
    cap_cmd->add_option("--fixed-input", fixed_input,
                        "fix the input state: optimal | bell | bell0..bell3");
    cap_cmd->add_option("--priors", priors_mode, "priors mode: ba | uniform");
    auto* cs = cap_cmd->add_option("--detector-s", det_s, "bucket detector click efficiency");
    auto* cv = cap_cmd->add_option("--detector-v", det_v, "bucket detector vacuum fidelity");
    cap_common.attach(cap_cmd);

    // sweep ------------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "capacity vs mean-photon-number constraint");
    double sweep_from = 0.05, sweep_to = 1.0, sweep_step = 0.05;
    std::string sweep_targets;
    CommonOpts sweep_common;
    sweep_cmd->add_option("--from", sweep_from, "first constraint target");
    sweep_cmd->add_option("--to", sweep_to, "last constraint target");
    sweep_cmd->add_option("--step", sweep_step, "target spacing");
    sweep_cmd->add_option("--targets", sweep_targets, "explicit comma-separated targets");
    sweep_common.attach(sweep_cmd);

    // detector-sweep ----------------------------------------------------------
    auto* det_cmd = app.add_subcommand("detector-sweep",
                                       "entangled vs baseline capacity over detector efficiency");
    double dv = 0.9999, ds_from = 0.5, ds_to = 1.0, ds_step = 0.05;
    std::string det_output;
    det_cmd->add_option("--v", dv, "vacuum fidelity (no-click probability on vacuum)");
    det_cmd->add_option("--s-from", ds_from, "first click efficiency");
    det_cmd->add_option("--s-to", ds_to, "last click efficiency");
    det_cmd->add_option("--s-step", ds_step, "click efficiency spacing");
    det_cmd->add_option("-o,--output", det_output, "write the CSV to this file");

    // baseline ---------------------------------------------------------------
    auto* base_cmd = app.add_subcommand("baseline", "entanglement-free two-mode baseline");
    bool no_vacuum = false;
    double bs = 1.0, bv = 1.0;
    std::string base_output;
    base_cmd->add_flag("--no-vacuum", no_vacuum, "exclude the vacuum letter");
    auto* bso = base_cmd->add_option("--detector-s", bs, "bucket detector click efficiency");
    auto* bvo = base_cmd->add_option("--detector-v", bv, "bucket detector vacuum fidelity");
    base_cmd->add_option("-o,--output", base_output, "write the JSON to this file");

    // alphabet-sweep ----------------------------------------------------------
    auto* alpha_cmd = app.add_subcommand("alphabet-sweep", "capacity vs alphabet size");
    int alpha_from = 4, alpha_to = 10;
    double alpha_mean = 1.0;
    CommonOpts alpha_common;
    alpha_common.restarts = 50;
    alpha_cmd->add_option("--from", alpha_from, "first alphabet size");
    alpha_cmd->add_option("--to", alpha_to, "last alphabet size");
    alpha_cmd->add_option("--mean-photons", alpha_mean, "constraint target");
    alpha_common.attach(alpha_cmd);

    // extended ----------------------------------------------------------------
    auto* ext_cmd = app.add_subcommand("extended", "six/eight-mode stretch studies");
    int ext_photons = 2, ext_modes = 6, ext_alphabet = 12, ortho_window = 0;
    CommonOpts ext_common;
    ext_common.restarts = 24;
    ext_cmd->add_option("--photons", ext_photons, "photon number n");
    ext_cmd->add_option("--modes", ext_modes, "mode count N");
    ext_cmd->add_option("--alphabet", ext_alphabet, "alphabet size M");
    ext_cmd->add_option("--orthogonal-window", ortho_window,
                        "instead of capacity, count orthogonal states for this window size");
    ext_common.attach(ext_cmd);

    // verify -------------------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify", "run the self-check table");
    bool verify_stretch = false, verify_json = false;
    verify_cmd->add_flag("--stretch", verify_stretch, "include the six/eight-mode studies");
    verify_cmd->add_flag("--json", verify_json, "emit the report as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(cap_cmd)) {
            locap::ProblemSpec spec;
            spec.photons = photons;
            spec.modes = modes;
            spec.alphabet = alphabet;
            spec.alice = locap::ModeWindow{0, alice_modes};
            if (mean_photons >= 0.0) spec.mean_photon_target = mean_photons;
            spec.detector = detector_from(det_s, det_v, cs->count() > 0, cv->count() > 0);
            if (priors_mode == "uniform")
                spec.priors_mode = locap::PriorsMode::FixedUniform;
            else if (priors_mode != "ba")
                throw locap::InputError("--priors must be 'ba' or 'uniform'");
            if (!fixed_input.empty()) {
                if (fixed_input == "optimal")
                    spec.fixed_input = locap::optimal_input_state();
                else if (fixed_input == "bell")
                    spec.fixed_input = locap::bell_state(0);
                else if (fixed_input.size() == 5 && fixed_input.rfind("bell", 0) == 0 &&
                         fixed_input[4] >= '0' && fixed_input[4] <= '3')
                    spec.fixed_input = locap::bell_state(fixed_input[4] - '0');
                else
                    throw locap::InputError("--fixed-input must be optimal, bell, or bell0..bell3");
            }
            const locap::CapacityResult res =
                locap::maximize_capacity(spec, cap_common.config(seed));
            locap::json j = locap::capacity_result_to_json(res);
            j["seed"] = seed;
            emit("capacity_bits=" + format_double(res.capacity_bits) +
                     " feasibility_gap=" + format_double(res.feasibility_gap) +
                     " restarts_used=" + std::to_string(res.restarts_used),
                 j.dump(2) + "\n", cap_common.output);
        } else if (app.got_subcommand(sweep_cmd)) {
            std::vector<double> targets;
            if (!sweep_targets.empty()) {
                std::stringstream ss(sweep_targets);
                std::string tok;
                while (std::getline(ss, tok, ',')) targets.push_back(std::stod(tok));
            } else {
                if (sweep_step <= 0.0) throw locap::InputError("sweep: --step must be positive");
                for (double t = sweep_from; t <= sweep_to + 1e-12; t += sweep_step)
                    targets.push_back(t);
            }
            locap::ProblemSpec spec;  // four-mode constrained study
            const auto points = locap::sweep_constraint(spec, targets, sweep_common.config(seed));
            const std::string canonical = "sweep:" + sweep_targets + ":" +
                                          format_double(sweep_from) + ":" +
                                          format_double(sweep_to) + ":" +
                                          format_double(sweep_step) + ":" +
                                          std::to_string(sweep_common.restarts);
            emit("sweep_points=" + std::to_string(points.size()) +
                     " final_capacity=" + format_double(points.back().capacity_bits),
                 locap::sweep_csv(points, seed, digest(canonical)), sweep_common.output);
        } else if (app.got_subcommand(det_cmd)) {
            if (ds_step <= 0.0) throw locap::InputError("detector-sweep: --s-step must be positive");
            std::vector<double> svals;
            for (double s = ds_from; s <= ds_to + 1e-12; s += ds_step) svals.push_back(s);
            const auto points = locap::detector_gap_sweep(svals, dv);
            const std::string canonical = "detector:" + format_double(ds_from) + ":" +
                                          format_double(ds_to) + ":" + format_double(ds_step) +
                                          ":" + format_double(dv);
            std::string summary = "points=" + std::to_string(points.size());
            for (const auto& p : points)
                if (std::abs(p.s - 0.9) < 1e-9)
                    summary += " gap_at_0.9=" + format_double(p.gap_bits);
            emit(summary, locap::detector_gap_csv(points, seed, digest(canonical)), det_output);
        } else if (app.got_subcommand(base_cmd)) {
            const auto det = detector_from(bs, bv, bso->count() > 0, bvo->count() > 0);
            const locap::BaselineResult res = locap::entanglement_free_baseline(!no_vacuum, det);
            locap::json j = locap::baseline_result_to_json(res);
            j["seed"] = seed;
            emit("capacity_bits=" + format_double(res.capacity_bits) +
                     " mean_photons=" + format_double(res.mean_photons),
                 j.dump(2) + "\n", base_output);
        } else if (app.got_subcommand(alpha_cmd)) {
            locap::ProblemSpec spec;
            spec.mean_photon_target = alpha_mean;
            const auto points =
                locap::alphabet_sweep(spec, alpha_from, alpha_to, alpha_common.config(seed));
            const std::string canonical = "alphabet:" + std::to_string(alpha_from) + ":" +
                                          std::to_string(alpha_to) + ":" +
                                          format_double(alpha_mean) + ":" +
                                          std::to_string(alpha_common.restarts);
            emit("alphabets=" + std::to_string(points.size()) +
                     " normalized_at_4=" + format_double(points.front().normalized),
                 locap::alphabet_csv(points, seed, digest(canonical)), alpha_common.output);
        } else if (app.got_subcommand(ext_cmd)) {
            if (ortho_window > 0) {
                const locap::OrthogonalSearchResult res = locap::count_orthogonal_states(
                    ext_photons, ext_modes, ortho_window, ext_common.config(seed));
                locap::json j;
                j["count"] = res.count;
                j["max_overlaps"] = res.max_overlaps;
                j["seed"] = seed;
                emit("orthogonal_states=" + std::to_string(res.count), j.dump(2) + "\n",
                     ext_common.output);
            } else {
                const locap::CapacityResult res = locap::extended_capacity(
                    ext_photons, ext_modes, ext_alphabet, ext_common.config(seed));
                locap::json j = locap::capacity_result_to_json(res);
                j["seed"] = seed;
                emit("capacity_bits=" + format_double(res.capacity_bits) +
                         " mean_photons_alice=" + format_double(res.mean_photons_alice),
                     j.dump(2) + "\n", ext_common.output);
            }
        } else if (app.got_subcommand(verify_cmd)) {
            locap::VerifyOptions vopt;
            vopt.seed = seed;
            vopt.stretch = verify_stretch;
            const locap::VerifyReport rep = locap::run_verify_checks(vopt);
            if (verify_json)
                std::cout << locap::verify_report_json(rep).dump(2) << "\n";
            else
                std::cout << locap::verify_table_text(rep);
            return rep.all_pass ? 0 : 2;
        }
    } catch (const locap::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const locap::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
