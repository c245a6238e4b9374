#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freqid/bounds.hpp"
#include "freqid/harness.hpp"
#include "freqid/io.hpp"
#include "freqid/lnnm_solver.hpp"
#include "freqid/realization.hpp"

using namespace freqid;

namespace {

std::vector<double> parse_list(const std::string &text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size())
                throw std::invalid_argument(item);
        } catch (const std::logic_error &) {
            throw Error(ErrorCode::ParseError, "bad list entry '" + item + "'");
        }
    }
    if (out.empty())
        throw Error(ErrorCode::ParseError, "empty list");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string &text) {
    std::vector<std::size_t> out;
    for (double v : parse_list(text)) {
        if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw Error(ErrorCode::ParseError, "expected positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void emit(const json &j, const std::string &out) {
    if (out.empty() || out == "-")
        std::cout << j.dump(2) << '\n';
    else
        write_json_file(out, j);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Frequency-domain identification by Loewner nuclear-norm minimization"};
    app.require_subcommand(1);

    // identify
    auto *identify = app.add_subcommand("identify", "Estimate responses from measurements and realize a model");
    std::string id_data, id_out, id_order = "auto";
    double id_tau = 0.0;
    std::optional<double> id_dc;
    std::size_t id_max_iter = 5000;
    identify->add_option("--data", id_data, "Measurement JSON {z, W}")->required();
    identify->add_option("--tau", id_tau, "Regularization weight")->required()->check(CLI::NonNegativeNumber);
    identify->add_option("--order", id_order, "Realization order or 'auto'");
    identify->add_option("--dc", id_dc, "DC gain used to fix D");
    identify->add_option("--max-iter", id_max_iter, "ADMM iteration cap");
    identify->add_option("--out", id_out, "Output JSON ('-' for stdout)")->required();

    // simulate
    auto *simulate = app.add_subcommand("simulate", "Generate noisy measurements of the benchmark system");
    std::size_t sim_M = 32, sim_N = 30;
    double sim_eta = 0.5;
    std::string sim_grid = "uniform:0.1", sim_out;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--M", sim_M, "Frequency points")->required();
    simulate->add_option("--N", sim_N, "Experiments")->required();
    simulate->add_option("--eta", sim_eta, "Noise bound")->required();
    simulate->add_option("--grid", sim_grid, "uniform:<dm> or log:<a>,<b>")->required();
    simulate->add_option("--seed", sim_seed, "Seed")->required();
    simulate->add_option("--out", sim_out, "Output JSON ('-' for stdout)")->required();

    // sweep
    auto *sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over N, M or eta");
    std::string sw_var, sw_values, sw_out, sw_grid = "uniform:0.1", sw_summary;
    std::size_t sw_trials = 20, sw_M = 32, sw_N = 30, sw_density = 4096;
    std::uint64_t sw_seed = 0;
    double sw_eta = 0.5;
    std::string sw_tau = "7";
    sweep_cmd->add_option("--var", sw_var, "N, M or eta")->required()->check(CLI::IsMember({"N", "M", "eta"}));
    sweep_cmd->add_option("--values", sw_values, "Comma-separated ascending values")->required();
    sweep_cmd->add_option("--trials", sw_trials, "Trials per value")->required();
    sweep_cmd->add_option("--seed", sw_seed, "Seed")->required();
    sweep_cmd->add_option("--out", sw_out, "Output CSV")->required();
    sweep_cmd->add_option("--M", sw_M, "Frequency points when fixed");
    sweep_cmd->add_option("--N", sw_N, "Experiments when fixed");
    sweep_cmd->add_option("--eta", sw_eta, "Noise bound when fixed");
    sweep_cmd->add_option("--tau", sw_tau, "Regularization weight or 'star'");
    sweep_cmd->add_option("--grid", sw_grid, "uniform:<dm> or log:<a>,<b>");
    sweep_cmd->add_option("--density", sw_density, "Circle samples for the H-infinity error");
    sweep_cmd->add_option("--summary", sw_summary, "Also write medians and slopes as JSON");

    // bounds
    auto *bounds_cmd = app.add_subcommand("bounds", "Evaluate the a-priori error bounds");
    BoundParams bp;
    bounds_cmd->add_option("--kappa", bp.kappa, "True order")->required();
    bounds_cmd->add_option("--K", bp.K, "Impulse-response decay constant")->required();
    bounds_cmd->add_option("--rho", bp.rho, "Decay rate (> 1)")->required();
    bounds_cmd->add_option("--eta", bp.eta_bar, "Noise bound")->required();
    bounds_cmd->add_option("--delta-m", bp.delta_m, "Frequency margin")->required();
    bounds_cmd->add_option("--M", bp.M, "Frequency points")->required();
    bounds_cmd->add_option("--N", bp.N, "Experiments")->required();
    bounds_cmd->add_option("--delta", bp.delta_prob, "Failure probability")->required();

    // validate
    auto *validate_cmd = app.add_subcommand("validate", "Numerically check the supporting lemmas");
    std::string va_dm = "0.1,0.5,1.0", va_M = "8,16,32";
    std::uint64_t va_seed = 0;
    std::size_t va_samples = 1000;
    bool va_no_gain = false;
    validate_cmd->add_option("--dm", va_dm, "Comma-separated margins");
    validate_cmd->add_option("--M", va_M, "Comma-separated grid sizes");
    validate_cmd->add_option("--seed", va_seed, "Seed");
    validate_cmd->add_option("--samples", va_samples, "Accepted cone samples for the min-gain check");
    validate_cmd->add_flag("--skip-min-gain", va_no_gain, "Skip the sampled min-gain check");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*identify) {
            const MeasurementSet ms = measurements_from_json(read_json_file(id_data));
            const LoewnerContext ctx(ms.grid);
            SolverConfig sc;
            sc.tau = id_tau;
            sc.max_iter = id_max_iter;
            const SolveResult sol = solve_admm(ctx, ms.W, sc);
            json out = solve_result_to_json(sol);
            RealizationConfig rc;
            if (id_order != "auto") {
                try {
                    rc.order = std::stoul(id_order);
                } catch (const std::logic_error &) {
                    throw Error(ErrorCode::ParseError, "--order must be an integer or 'auto'");
                }
            }
            if (id_dc)
                rc.d_policy = DPolicy::dc_gain(*id_dc);
            try {
                out["realization"] = realization_to_json(realize(ctx, sol.w_hat, rc));
            } catch (const Error &e) {
                out["realization_error"] = e.what();
            }
            emit(out, id_out);
            return 0;
        }
        if (*simulate) {
            const FrequencyGrid grid = GridSpec::parse(sim_grid).make(sim_M);
            const MeasurementSet ms = gen_data(true_system(), grid, sim_N, sim_eta, sim_seed);
            json out = measurements_to_json(ms);
            out["w_true"] = complex_vector_to_json(responses(true_system(), grid));
            out["model"] = model_to_json(true_system());
            out["dc_gain"] = dc_gain(true_system());
            emit(out, sim_out);
            return 0;
        }
        if (*sweep_cmd) {
            ExperimentConfig cfg;
            cfg.grid = GridSpec::parse(sw_grid);
            cfg.M = sw_M;
            cfg.N = sw_N;
            cfg.eta_bar = sw_eta;
            cfg.trials = sw_trials;
            cfg.seed = sw_seed;
            cfg.hinf_grid_density = sw_density;
            if (sw_tau == "star")
                cfg.tau.reset();
            else
                cfg.tau = parse_list(sw_tau).at(0);
            const SweepResult res = sweep(cfg, parse_sweep_variable(sw_var), parse_list(sw_values));
            emit_csv(sw_out, res.rows);
            const json summary = sweep_summary_to_json(res);
            if (!sw_summary.empty())
                write_json_file(sw_summary, summary);
            std::cout << summary.dump(2) << '\n';
            return 0;
        }
        if (*bounds_cmd) {
            std::cout << bounds_summary_to_json(evaluate_bounds(bp)).dump(2) << '\n';
            return 0;
        }
        if (*validate_cmd) {
            ValidationOptions opt;
            opt.min_gain = !va_no_gain;
            opt.min_gain_samples = va_samples;
            const ValidationReport rep = validate_lemmas(parse_list(va_dm), parse_size_list(va_M), va_seed, opt);
            std::cout << validation_to_json(rep).dump(2) << '\n';
            return rep.all_passed() ? 0 : 1;
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
