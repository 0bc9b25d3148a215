#include "mom/bench.hpp"

#include "mom/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>
#include <thread>

namespace mom {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, int trial) {
    return splitmix64(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(trial));
}

double median(std::vector<double> v) {
    if (v.empty()) return NAN;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Runs body(k) for k in [0, count) on `threads` workers. Each index writes
/// only its own slot, so the merged result is scheduling independent.
template <class F>
void parallel_for(int count, int threads, F&& body) {
    if (threads <= 1 || count <= 1) {
        for (int k = 0; k < count; ++k) body(k);
        return;
    }
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int k = w; k < count; k += threads) body(k);
        });
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SolverOptions trial_options(const SolverOptions& base, std::uint64_t seed) {
    SolverOptions opts = base;
    opts.tracker.seed = splitmix64(seed);
    opts.tracker.gamma.reset();
    return opts;
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SolutionCount: return "solution_count";
        case ExperimentKind::CleanError: return "clean_error";
        case ExperimentKind::NoiseSweep: return "noise_sweep";
        case ExperimentKind::Pipeline: return "pipeline";
    }
    return "unknown";
}

namespace {

ExperimentKind parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::SolutionCount, ExperimentKind::CleanError, ExperimentKind::NoiseSweep,
                   ExperimentKind::Pipeline})
        if (to_string(k) == s) return k;
    throw ParseError("unknown experiment kind '" + s + "'", 0);
}

}  // namespace

void ExperimentSpec::validate() const {
    if (trials < 1) throw ParameterError("trials must be at least 1");
    if (threads < 1) throw ParameterError("threads must be at least 1");
    if (kind == ExperimentKind::NoiseSweep && sigma_grid.empty()) throw ParameterError("sigma grid is empty");
    for (double s : sigma_grid)
        if (!(s >= 0.0) || !std::isfinite(s)) throw ParameterError("sigmas must be finite and non-negative");
    solver.tracker.validate();
}

std::vector<double> default_sigma_grid() {
    std::vector<double> grid;
    for (int k = 0; k < 7; ++k) grid.push_back(std::pow(10.0, -6.0 + 5.0 * k / 6.0));
    return grid;
}

SubminimalShape parse_subminimal_config(const std::string& name) {
    static const std::regex pattern(R"((\d+)r(\d+)s([23])d)");
    std::smatch m;
    if (std::find(kSubminimalConfigs.begin(), kSubminimalConfigs.end(), name) == kSubminimalConfigs.end() ||
        !std::regex_match(name, m, pattern))
        throw ParameterError("unknown subminimal configuration '" + name + "' (expected 3r4s2d, 2r5s2d, 4r5s3d or 2r7s3d)");
    return {std::stoi(m[1]), std::stoi(m[2]), std::stoi(m[3])};
}

Aggregates aggregate(ExperimentKind kind, const std::vector<TrialRecord>& records) {
    Aggregates a;
    if (records.empty()) return a;
    if (kind == ExperimentKind::SolutionCount) {
        std::map<int, int> hist;
        std::vector<double> times;
        long real_sum = 0;
        int failures = 0;
        a.real_min = records.front().real_solutions;
        a.real_max = records.front().real_solutions;
        for (const auto& r : records) {
            ++hist[r.total_solutions];
            times.push_back(r.time_s);
            real_sum += r.real_solutions;
            a.real_min = std::min(a.real_min, r.real_solutions);
            a.real_max = std::max(a.real_max, r.real_solutions);
            if (r.failed) ++failures;
        }
        // Ties resolve to the smaller count.
        int best = -1;
        for (auto [count, n] : hist)
            if (n > best) {
                best = n;
                a.total_mode = count;
            }
        const auto n = static_cast<double>(records.size());
        a.mode_fraction = best / n;
        a.real_avg = static_cast<double>(real_sum) / n;
        double tsum = 0.0;
        for (double t : times) tsum += t;
        a.mean_time_s = tsum / n;
        a.median_time_s = median(times);
        a.failure_rate = failures / n;
        return a;
    }

    std::vector<double> sigmas;
    for (const auto& r : records)
        if (std::find(sigmas.begin(), sigmas.end(), r.sigma) == sigmas.end()) sigmas.push_back(r.sigma);
    int failures = 0;
    std::vector<double> times;
    for (double s : sigmas) {
        SigmaSummary row;
        row.sigma = s;
        std::vector<double> errors;
        int failed = 0;
        for (const auto& r : records) {
            if (r.sigma != s) continue;
            ++row.trials;
            if (r.failed)
                ++failed;
            else
                errors.push_back(r.relative_error);
        }
        row.failure_rate = static_cast<double>(failed) / row.trials;
        row.median_rel_error = median(errors);
        failures += failed;
        a.per_sigma.push_back(row);
    }
    for (const auto& r : records) times.push_back(r.time_s);
    double tsum = 0.0;
    for (double t : times) tsum += t;
    a.mean_time_s = tsum / static_cast<double>(records.size());
    a.median_time_s = median(times);
    a.failure_rate = static_cast<double>(failures) / static_cast<double>(records.size());
    return a;
}

ExperimentReport run_solution_count(const ExperimentSpec& spec) {
    spec.validate();
    const MinimalConfig config = parse_minimal_config(spec.config);
    const ConfigShape sh = shape(config);

    ExperimentReport report;
    report.kind = ExperimentKind::SolutionCount;
    report.config = spec.config;
    report.seed = spec.seed;
    report.records.resize(static_cast<std::size_t>(spec.trials));
    parallel_for(spec.trials, spec.threads, [&](int k) {
        TrialRecord& rec = report.records[static_cast<std::size_t>(k)];
        rec.trial = k;
        rec.instance_seed = trial_seed(spec.seed, k);
        const NetworkInstance inst = random_instance(sh.receivers, sh.transmitters, sh.dim, rec.instance_seed);
        const PseudorangeMatrix f = synthesize_pseudoranges(inst);
        const SolverOptions opts = trial_options(spec.solver, rec.instance_seed);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const CandidateSet set = enumerate_minimal(f, config, opts);
            rec.time_s = seconds_since(t0);
            rec.total_solutions = set.total_solutions;
            rec.real_solutions = static_cast<int>(set.candidates.size());
            rec.stats = set.stats;
            rec.failed = rec.real_solutions == 0;
            if (rec.failed) rec.error = "no_real_solution";
        } catch (const Error& e) {
            rec.time_s = seconds_since(t0);
            rec.failed = true;
            rec.error = e.code();
        }
    });
    report.aggregates = aggregate(report.kind, report.records);
    return report;
}

namespace {

ExperimentReport run_error_experiment(const ExperimentSpec& spec, ExperimentKind kind, const std::vector<double>& grid) {
    const SubminimalShape sh = parse_subminimal_config(spec.config);
    ExperimentReport report;
    report.kind = kind;
    report.config = spec.config;
    report.seed = spec.seed;
    const int per_sigma = spec.trials;
    const int total = per_sigma * static_cast<int>(grid.size());
    report.records.resize(static_cast<std::size_t>(total));
    parallel_for(total, spec.threads, [&](int idx) {
        const int s = idx / per_sigma;
        const int k = idx % per_sigma;
        TrialRecord& rec = report.records[static_cast<std::size_t>(idx)];
        rec.trial = k;
        rec.sigma = grid[static_cast<std::size_t>(s)];
        // The same network is reused across sigmas for a given trial index.
        rec.instance_seed = trial_seed(spec.seed, k);
        const NetworkInstance inst = random_instance(sh.receivers, sh.transmitters, sh.dim, rec.instance_seed);
        const PseudorangeMatrix f =
            add_noise(synthesize_pseudoranges(inst), rec.sigma, splitmix64(rec.instance_seed + 1 + static_cast<std::uint64_t>(s)));
        const SolverOptions opts = trial_options(spec.solver, rec.instance_seed);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const MomSolution sol = solve_subminimal(f, opts);
            rec.time_s = seconds_since(t0);
            rec.relative_error = relative_error(sol, inst);
            rec.residual = sol.residual;
        } catch (const Error& e) {
            rec.time_s = seconds_since(t0);
            rec.failed = true;
            rec.error = e.code();
        }
    });
    report.aggregates = aggregate(kind, report.records);
    return report;
}

}  // namespace

ExperimentReport run_clean_error(const ExperimentSpec& spec) {
    spec.validate();
    return run_error_experiment(spec, ExperimentKind::CleanError, {0.0});
}

ExperimentReport run_noise_sweep(const ExperimentSpec& spec) {
    spec.validate();
    return run_error_experiment(spec, ExperimentKind::NoiseSweep, spec.sigma_grid);
}

ExperimentReport run_pipeline(const PseudorangeMatrix& f, const std::optional<NetworkInstance>& truth,
                              const SolverOptions& opts) {
    f.validate();
    if (truth && (truth->num_receivers() != f.num_receivers() || truth->dim != f.dim))
        throw ParameterError("ground truth does not match the pseudorange matrix");

    ExperimentReport report;
    report.kind = ExperimentKind::Pipeline;
    report.config = std::to_string(f.num_receivers()) + "r" + std::to_string(f.num_transmitters()) + "s" +
                    std::to_string(f.dim) + "d";
    report.seed = opts.seed;

    OverdeterminedTrace trace;
    const auto t0 = std::chrono::steady_clock::now();
    PipelineSummary p;
    p.solution = solve_overdetermined(f, opts, &trace);
    TrialRecord rec;
    rec.time_s = seconds_since(t0);
    rec.residual = p.solution.residual;
    p.receivers = f.num_receivers();
    p.transmitters = f.num_transmitters();
    p.pre_lm_residual = trace.pre_lm_residual;
    p.residual = p.solution.residual;
    if (truth) {
        double sum = 0.0;
        for (int i = 0; i < f.num_receivers(); ++i) {
            const double e = (p.solution.receivers[static_cast<std::size_t>(i)] -
                              truth->receivers[static_cast<std::size_t>(i)]).norm();
            p.receiver_errors.push_back(e);
            sum += e;
        }
        p.mean_receiver_error = sum / f.num_receivers();
        if (truth->num_transmitters() == f.num_transmitters()) rec.relative_error = relative_error(p.solution, *truth);
    }
    report.records.push_back(rec);
    report.aggregates = aggregate(report.kind, report.records);
    report.pipeline = std::move(p);
    return report;
}

ReportFormat parse_report_format(const std::string& s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw ParameterError("format must be csv or json");
}

namespace {

Json stats_json(const PathStats& s) {
    Json j;
    j["paths"] = s.paths;
    j["converged"] = s.converged;
    j["diverged"] = s.diverged;
    j["step_failures"] = s.step_failures;
    j["singular"] = s.singular;
    j["duplicates"] = s.duplicates;
    return j;
}

PathStats stats_from(const Json& j) {
    PathStats s;
    s.paths = j.at("paths").get<int>();
    s.converged = j.at("converged").get<int>();
    s.diverged = j.at("diverged").get<int>();
    s.step_failures = j.at("step_failures").get<int>();
    s.singular = j.at("singular").get<int>();
    s.duplicates = j.at("duplicates").get<int>();
    return s;
}

/// NaN medians (every trial failed) serialize as null.
Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }
double number_from(const Json& j) { return j.is_null() ? NAN : j.get<double>(); }

std::string csv_number(double x) { return std::isfinite(x) ? format_double(x) : "nan"; }

}  // namespace

Json report_to_json(const ExperimentReport& report) {
    Json j;
    j["kind"] = to_string(report.kind);
    j["config"] = report.config;
    j["seed"] = report.seed;
    const Aggregates& a = report.aggregates;
    Json agg;
    if (report.kind == ExperimentKind::SolutionCount) {
        agg["total_mode"] = a.total_mode;
        agg["mode_fraction"] = a.mode_fraction;
        agg["real_min"] = a.real_min;
        agg["real_avg"] = a.real_avg;
        agg["real_max"] = a.real_max;
    } else {
        agg["per_sigma"] = Json::array();
        for (const auto& s : a.per_sigma)
            agg["per_sigma"].push_back({{"sigma", s.sigma},
                                        {"trials", s.trials},
                                        {"median_rel_error", number_or_null(s.median_rel_error)},
                                        {"failure_rate", s.failure_rate}});
    }
    agg["mean_time_s"] = a.mean_time_s;
    agg["median_time_s"] = number_or_null(a.median_time_s);
    agg["failure_rate"] = a.failure_rate;
    j["aggregates"] = agg;

    j["records"] = Json::array();
    for (const auto& r : report.records) {
        Json rj;
        rj["trial"] = r.trial;
        rj["instance_seed"] = r.instance_seed;
        rj["sigma"] = r.sigma;
        rj["failed"] = r.failed;
        rj["error"] = r.error;
        rj["total_solutions"] = r.total_solutions;
        rj["real_solutions"] = r.real_solutions;
        rj["relative_error"] = r.relative_error;
        rj["residual"] = r.residual;
        rj["time_s"] = r.time_s;
        rj["path_stats"] = stats_json(r.stats);
        j["records"].push_back(rj);
    }

    if (report.pipeline) {
        const PipelineSummary& p = *report.pipeline;
        Json pj;
        pj["receivers"] = p.receivers;
        pj["transmitters"] = p.transmitters;
        pj["pre_lm_residual"] = p.pre_lm_residual;
        pj["residual"] = p.residual;
        pj["receiver_errors"] = p.receiver_errors;
        pj["mean_receiver_error"] = p.mean_receiver_error ? Json(*p.mean_receiver_error) : Json(nullptr);
        pj["solution"] = Json::object();
        pj["solution"]["receivers"] = Json::array();
        for (const auto& r : p.solution.receivers) pj["solution"]["receivers"].push_back(std::vector<double>(r.data(), r.data() + r.size()));
        pj["solution"]["offsets"] = std::vector<double>(p.solution.offsets.data(), p.solution.offsets.data() + p.solution.offsets.size());
        pj["solution"]["residual"] = p.solution.residual;
        pj["solution"]["feasible"] = p.solution.feasible;
        j["pipeline"] = pj;
    }
    return j;
}

ExperimentReport report_from_json(const Json& j) {
    try {
        ExperimentReport report;
        report.kind = parse_kind(j.at("kind").get<std::string>());
        report.config = j.at("config").get<std::string>();
        report.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& rj : j.at("records")) {
            TrialRecord r;
            r.trial = rj.at("trial").get<int>();
            r.instance_seed = rj.at("instance_seed").get<std::uint64_t>();
            r.sigma = rj.at("sigma").get<double>();
            r.failed = rj.at("failed").get<bool>();
            r.error = rj.at("error").get<std::string>();
            r.total_solutions = rj.at("total_solutions").get<int>();
            r.real_solutions = rj.at("real_solutions").get<int>();
            r.relative_error = rj.at("relative_error").get<double>();
            r.residual = rj.at("residual").get<double>();
            r.time_s = rj.at("time_s").get<double>();
            r.stats = stats_from(rj.at("path_stats"));
            report.records.push_back(r);
        }
        const Json& agg = j.at("aggregates");
        Aggregates& a = report.aggregates;
        if (report.kind == ExperimentKind::SolutionCount) {
            a.total_mode = agg.at("total_mode").get<int>();
            a.mode_fraction = agg.at("mode_fraction").get<double>();
            a.real_min = agg.at("real_min").get<int>();
            a.real_avg = agg.at("real_avg").get<double>();
            a.real_max = agg.at("real_max").get<int>();
        } else {
            for (const auto& s : agg.at("per_sigma"))
                a.per_sigma.push_back({s.at("sigma").get<double>(), s.at("trials").get<int>(),
                                       number_from(s.at("median_rel_error")), s.at("failure_rate").get<double>()});
        }
        a.mean_time_s = agg.at("mean_time_s").get<double>();
        a.median_time_s = number_from(agg.at("median_time_s"));
        a.failure_rate = agg.at("failure_rate").get<double>();

        if (j.contains("pipeline")) {
            const Json& pj = j.at("pipeline");
            PipelineSummary p;
            p.receivers = pj.at("receivers").get<int>();
            p.transmitters = pj.at("transmitters").get<int>();
            p.pre_lm_residual = pj.at("pre_lm_residual").get<double>();
            p.residual = pj.at("residual").get<double>();
            p.receiver_errors = pj.at("receiver_errors").get<std::vector<double>>();
            if (!pj.at("mean_receiver_error").is_null()) p.mean_receiver_error = pj.at("mean_receiver_error").get<double>();
            p.solution = solution_from_json(pj.at("solution"));
            report.pipeline = std::move(p);
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what(), 0);
    }
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";

    const Aggregates& a = report.aggregates;
    std::string out;
    switch (report.kind) {
        case ExperimentKind::SolutionCount:
            out = "config,total_mode,real_min,real_avg,real_max,mean_time_s\n";
            out += report.config + "," + std::to_string(a.total_mode) + "," + std::to_string(a.real_min) + "," +
                   format_double(a.real_avg) + "," + std::to_string(a.real_max) + "," + format_double(a.mean_time_s) +
                   "\n";
            break;
        case ExperimentKind::CleanError:
        case ExperimentKind::NoiseSweep:
            out = "sigma,median_rel_error,failure_rate\n";
            for (const auto& s : a.per_sigma)
                out += format_double(s.sigma) + "," + csv_number(s.median_rel_error) + "," +
                       format_double(s.failure_rate) + "\n";
            break;
        case ExperimentKind::Pipeline: {
            const PipelineSummary& p = report.pipeline.value();
            const int dim = p.solution.receivers.empty() ? 0 : static_cast<int>(p.solution.receivers.front().size());
            static const char* axes[] = {"x", "y", "z"};
            out = "receiver_id";
            for (int k = 0; k < dim; ++k) out += std::string(",") + axes[k];
            out += ",error\n";
            for (std::size_t i = 0; i < p.solution.receivers.size(); ++i) {
                out += std::to_string(i);
                for (int k = 0; k < dim; ++k) out += "," + format_double(p.solution.receivers[i](k));
                out += "," + (i < p.receiver_errors.size() ? format_double(p.receiver_errors[i]) : std::string()) + "\n";
            }
            break;
        }
    }
    return out;
}

std::string summary_table(const ExperimentReport& report) {
    std::ostringstream os;
    const Aggregates& a = report.aggregates;
    char line[256];
    switch (report.kind) {
        case ExperimentKind::SolutionCount:
            os << "config      tot. sols  real min  avg    max  time [s] (mean/median)  failures\n";
            std::snprintf(line, sizeof line, "%-11s %9d  %8d  %-5.2f  %3d  %.3f / %.3f  %13.1f%%\n", report.config.c_str(),
                          a.total_mode, a.real_min, a.real_avg, a.real_max, a.mean_time_s, a.median_time_s,
                          100.0 * a.failure_rate);
            os << line;
            std::snprintf(line, sizeof line, "trials with the modal count: %.1f%%\n", 100.0 * a.mode_fraction);
            os << line;
            break;
        case ExperimentKind::CleanError:
        case ExperimentKind::NoiseSweep:
            os << report.config << "\n      sigma  median rel. error  failures\n";
            for (const auto& s : a.per_sigma) {
                std::snprintf(line, sizeof line, "%11.3g  %17.3e  %7.1f%%\n", s.sigma, s.median_rel_error,
                              100.0 * s.failure_rate);
                os << line;
            }
            break;
        case ExperimentKind::Pipeline: {
            const PipelineSummary& p = report.pipeline.value();
            os << p.receivers << " receivers, " << p.transmitters << " transmitters\n";
            std::snprintf(line, sizeof line, "rms residual before LM %.6g, after %.6g\n", p.pre_lm_residual, p.residual);
            os << line;
            if (p.mean_receiver_error) {
                std::snprintf(line, sizeof line, "mean receiver error %.6g\n", *p.mean_receiver_error);
                os << line;
            }
            break;
        }
    }
    return os.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path, std::ostream* summary) {
    const std::string text = render_report(report, format);
    if (path.empty())
        std::cout << text;
    else
        write_file(path, text);
    if (summary) *summary << summary_table(report);
}

}  // namespace mom
