#pragma once

#include "mom/io.hpp"
#include "mom/solvers.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mom {

enum class ExperimentKind { SolutionCount, CleanError, NoiseSweep, Pipeline };

std::string to_string(ExperimentKind k);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::SolutionCount;
    /// Minimal configuration name for counts, subminimal name ("3r4s2d", ...) for error runs.
    std::string config = "3r3s2d";
    int trials = 100;
    std::vector<double> sigma_grid;
    std::uint64_t seed = 1;
    std::string output;
    SolverOptions solver;
    /// Concurrent trials; records are merged in trial order either way.
    int threads = 1;

    void validate() const;
};

/// Seven log-spaced values from 1e-6 to 1e-1.
std::vector<double> default_sigma_grid();

/// Subminimal configurations accepted by error experiments.
struct SubminimalShape {
    int receivers;
    int transmitters;
    int dim;
};
SubminimalShape parse_subminimal_config(const std::string& name);
inline const std::vector<std::string> kSubminimalConfigs = {"3r4s2d", "2r5s2d", "4r5s3d", "2r7s3d"};

struct TrialRecord {
    int trial = 0;
    std::uint64_t instance_seed = 0;
    double sigma = 0.0;
    bool failed = false;
    std::string error;
    int total_solutions = 0;
    int real_solutions = 0;
    double relative_error = 0.0;
    double residual = 0.0;
    double time_s = 0.0;
    PathStats stats;
};

struct SigmaSummary {
    double sigma = 0.0;
    int trials = 0;
    double median_rel_error = 0.0;
    double failure_rate = 0.0;
};

struct PipelineSummary {
    int receivers = 0;
    int transmitters = 0;
    double pre_lm_residual = 0.0;
    double residual = 0.0;
    /// Present when ground truth was supplied.
    std::vector<double> receiver_errors;
    std::optional<double> mean_receiver_error;
    MomSolution solution;
};

struct Aggregates {
    int total_mode = 0;
    /// Fraction of trials whose total equals the mode.
    double mode_fraction = 0.0;
    int real_min = 0;
    double real_avg = 0.0;
    int real_max = 0;
    double mean_time_s = 0.0;
    double median_time_s = 0.0;
    double failure_rate = 0.0;
    std::vector<SigmaSummary> per_sigma;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::SolutionCount;
    std::string config;
    std::uint64_t seed = 0;
    std::vector<TrialRecord> records;
    Aggregates aggregates;
    std::optional<PipelineSummary> pipeline;
};

/// Recomputes the aggregates of a report from its records.
Aggregates aggregate(ExperimentKind kind, const std::vector<TrialRecord>& records);

ExperimentReport run_solution_count(const ExperimentSpec& spec);
/// Noise sweep over the grid {0}.
ExperimentReport run_clean_error(const ExperimentSpec& spec);
ExperimentReport run_noise_sweep(const ExperimentSpec& spec);
ExperimentReport run_pipeline(const PseudorangeMatrix& f, const std::optional<NetworkInstance>& truth,
                              const SolverOptions& opts = {});

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& s);

/// Byte-stable serialization of a report.
std::string render_report(const ExperimentReport& report, ReportFormat format);
Json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const Json& j);

/// Human-readable summary in the layout of a results table.
std::string summary_table(const ExperimentReport& report);

/// Writes the rendered report to `path` (stdout when empty) and the summary to `summary`.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path,
                 std::ostream* summary = nullptr);

}  // namespace mom
