#include "mom/bench.hpp"
#include "mom/errors.hpp"
#include "mom/io.hpp"
#include "mom/solvers.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace mom;

namespace {

void print_error(const std::string& code, const std::string& message) {
    Json j;
    j["error"] = code;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ParameterError("bad sigma grid entry '" + item + "'");
        grid.push_back(x);
    }
    if (grid.empty()) throw ParameterError("sigma grid is empty");
    return grid;
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty())
        std::cout << text;
    else
        write_file(path, text);
}

struct TrackerFlags {
    std::string predictor = "euler";
    int threads = 1;

    void add(CLI::App* app) {
        app->add_option("--predictor", predictor, "Path predictor")->check(CLI::IsMember({"euler", "rk4"}));
        app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    }

    void apply(TrackerConfig& cfg) const {
        cfg.predictor = predictor == "rk4" ? Predictor::RK4 : Predictor::Euler;
        cfg.threads = threads;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple offsets multilateration solver"};
    app.require_subcommand(1);

    // classify
    auto* classify_cmd = app.add_subcommand("classify", "Classify an m-receiver, n-transmitter network");
    int cm = 0, cn = 0, ck = 0;
    classify_cmd->add_option("m", cm, "Receivers")->required();
    classify_cmd->add_option("n", cn, "Transmitters")->required();
    classify_cmd->add_option("K", ck, "Dimension")->required();

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "Generate a random network and its pseudoranges");
    int gm = 3, gn = 3, gdim = 2;
    std::uint64_t gseed = 1;
    double gsigma = 0.0;
    std::string gconfig, gbox, ginstance, gpseudo;
    generate_cmd->add_option("--config", gconfig, "Node counts as e.g. 4r5s3d");
    generate_cmd->add_option("-m,--receivers", gm, "Receivers");
    generate_cmd->add_option("-n,--transmitters", gn, "Transmitters");
    generate_cmd->add_option("-K,--dim", gdim, "Dimension");
    generate_cmd->add_option("--seed", gseed, "Random seed");
    generate_cmd->add_option("--sigma", gsigma, "Pseudorange noise standard deviation");
    generate_cmd->add_option("--box", gbox, "Scene extent as comma-separated lengths (default [-10, 10]^K)");
    generate_cmd->add_option("--instance", ginstance, "Ground-truth JSON output (stdout when omitted)");
    generate_cmd->add_option("--pseudoranges", gpseudo, "Pseudorange CSV output");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Solve a pseudorange file");
    std::string sinput, sout;
    bool sprune = false;
    TrackerFlags sflags;
    solve_cmd->add_option("input", sinput, "Pseudorange CSV")->required();
    solve_cmd->add_option("--out", sout, "Output JSON (stdout when omitted)");
    solve_cmd->add_flag("--prune-infeasible", sprune, "Drop candidates with negative distances");
    sflags.add(solve_cmd);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo experiments");
    bench_cmd->require_subcommand(1);
    auto* counts_cmd = bench_cmd->add_subcommand("counts", "Solution counts of a minimal configuration");
    auto* noise_cmd = bench_cmd->add_subcommand("noise", "Relative error against pseudorange noise");
    auto* clean_cmd = bench_cmd->add_subcommand("clean", "Relative error on clean data");
    ExperimentSpec spec;
    std::string bformat = "csv", grid_text;
    TrackerFlags bflags;
    for (auto* cmd : {counts_cmd, noise_cmd, clean_cmd}) {
        cmd->add_option("--config", spec.config, "Configuration name")->required();
        cmd->add_option("--trials", spec.trials, "Trials (per sigma for noise)")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", spec.seed, "Random seed");
        cmd->add_option("--out", spec.output, "Report file (stdout when omitted)");
        cmd->add_option("--format", bformat, "Report format")->check(CLI::IsMember({"csv", "json"}));
        bflags.add(cmd);
    }
    noise_cmd->add_option("--sigma-grid", grid_text, "Comma-separated sigmas (default 7 values in [1e-6, 1e-1])");

    // pipeline
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Overdetermined solve of a pseudorange file");
    std::string pinput, ptruth, pout, pformat = "json";
    TrackerFlags pflags;
    SolverOptions popts;
    pipeline_cmd->add_option("input", pinput, "Pseudorange CSV")->required();
    pipeline_cmd->add_option("--truth", ptruth, "Ground-truth instance JSON for error reporting");
    pipeline_cmd->add_option("--out", pout, "Report file (stdout when omitted)");
    pipeline_cmd->add_option("--format", pformat, "Report format")->check(CLI::IsMember({"csv", "json"}));
    pipeline_cmd->add_option("--seed", popts.seed, "Seed for subset restarts");
    pipeline_cmd->add_option("--restarts", popts.restarts, "Random subset restarts")->check(CLI::NonNegativeNumber);
    pflags.add(pipeline_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage_error", e.what());
        return 2;
    }

    try {
        if (*classify_cmd) {
            const SolvabilityClass c = classify(cm, cn, ck);
            Json j;
            j["m"] = cm;
            j["n"] = cn;
            j["dim"] = ck;
            j["excess"] = c.excess;
            j["class"] = to_string(c.kind);
            if (auto mc = minimal_config_for(cm, cn, ck)) j["minimal_config"] = name(*mc);
            if (auto base = subminimal_base(cm, cn, ck)) j["subminimal_of"] = name(*base);
            std::cout << j.dump() << "\n";
        } else if (*generate_cmd) {
            if (!gconfig.empty()) {
                if (std::sscanf(gconfig.c_str(), "%dr%ds%dd", &gm, &gn, &gdim) != 3)
                    throw ParameterError("configuration must look like 4r5s3d");
            }
            NetworkInstance inst;
            if (gbox.empty()) {
                inst = random_instance(gm, gn, gdim, gseed);
            } else {
                const std::vector<double> ext = parse_grid(gbox);
                if (static_cast<int>(ext.size()) != gdim) throw ParameterError("--box needs one length per dimension");
                inst = random_scene(gm, gn, Eigen::Map<const Eigen::VectorXd>(ext.data(), gdim), 1.0, gseed);
            }
            const std::string text = to_json(inst).dump(2) + "\n";
            write_output(text, ginstance);
            if (!gpseudo.empty())
                write_pseudoranges(gpseudo, add_noise(synthesize_pseudoranges(inst), gsigma, gseed + 1));
        } else if (*solve_cmd) {
            const PseudorangeMatrix f = read_pseudoranges(sinput);
            SolverOptions opts;
            opts.prune_infeasible = sprune;
            sflags.apply(opts.tracker);
            Json out;
            if (auto mc = minimal_config_for(f.num_receivers(), f.num_transmitters(), f.dim)) {
                const CandidateSet set = solve_minimal(f, *mc, opts);
                out["config"] = name(*mc);
                out["total_solutions"] = set.total_solutions;
                out["candidates"] = Json::array();
                for (const auto& c : set.candidates) out["candidates"].push_back(to_json(c, f));
            } else if (subminimal_base(f.num_receivers(), f.num_transmitters(), f.dim)) {
                const MomSolution sol = solve_subminimal(f, opts);
                out = to_json(sol, f);
                out["tie"] = sol.tie;
            } else {
                out = to_json(solve_overdetermined(f, opts), f);
            }
            write_output(out.dump(2) + "\n", sout);
        } else if (*bench_cmd) {
            bflags.apply(spec.solver.tracker);
            ExperimentReport report;
            if (*counts_cmd) {
                spec.kind = ExperimentKind::SolutionCount;
                report = run_solution_count(spec);
            } else if (*noise_cmd) {
                spec.kind = ExperimentKind::NoiseSweep;
                spec.sigma_grid = grid_text.empty() ? default_sigma_grid() : parse_grid(grid_text);
                report = run_noise_sweep(spec);
            } else {
                spec.kind = ExperimentKind::CleanError;
                report = run_clean_error(spec);
            }
            // Keep stdout clean for the report itself when no file is given.
            emit_report(report, parse_report_format(bformat), spec.output, spec.output.empty() ? &std::cerr : &std::cout);
        } else if (*pipeline_cmd) {
            pflags.apply(popts.tracker);
            const PseudorangeMatrix f = read_pseudoranges(pinput);
            std::optional<NetworkInstance> truth;
            if (!ptruth.empty()) truth = read_instance(ptruth);
            const ExperimentReport report = run_pipeline(f, truth, popts);
            emit_report(report, parse_report_format(pformat), pout, pout.empty() ? &std::cerr : &std::cout);
        }
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal_error", e.what());
        return 1;
    }
    return 0;
}
