#pragma once

#include "mom/homotopy.hpp"
#include "mom/reduction.hpp"
#include "mom/solution.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mom {

struct LmOptions {
    double initial_lambda = 1e-3;
    double lambda_factor = 10.0;
    /// Stop once an accepted step changes the cost by less than this fraction.
    double relative_tolerance = 1e-12;
    int max_iterations = 100;
};

/// Cost after every LM iteration, starting with the initial cost.
struct LmTrace {
    std::vector<double> costs;
    int accepted = 0;
    int rejected = 0;
};

struct SolverOptions {
    TrackerConfig tracker;
    /// Drop candidates with f_ij - o_j < -feasibility_tol before selection.
    bool prune_infeasible = false;
    double feasibility_tol = 1e-6;
    /// Random subset attempts after the deterministic one (overdetermined solver).
    int restarts = 5;
    std::uint64_t seed = 7;
    LmOptions lm;
};

/// Real roots of a minimal problem, ascending by residual.
struct CandidateSet {
    std::vector<MomSolution> candidates;
    /// Distinct finite nonsingular roots, real or not.
    int total_solutions = 0;
    PathStats stats;
};

/// Details of an overdetermined solve, for the winning attempt.
struct OverdeterminedTrace {
    std::vector<int> receiver_ids;
    std::vector<int> transmitter_ids;
    /// Residual over the full network before the global LM refinement.
    double pre_lm_residual = 0.0;
    /// Failed attempts, one line each.
    std::vector<std::string> failures;
};

/// Minimal configuration obtained by dropping the last transmitter of a
/// subminimal network, if (m, n, dim) is one.
std::optional<MinimalConfig> subminimal_base(int m, int n, int dim);

/// Like solve_minimal but returns an empty candidate list instead of throwing.
CandidateSet enumerate_minimal(const PseudorangeMatrix& f, MinimalConfig config, const SolverOptions& opts = {});

/// Throws NoRealSolution when no real candidate survives.
CandidateSet solve_minimal(const PseudorangeMatrix& f, MinimalConfig config, const SolverOptions& opts = {});

/// Mean over receivers of f_ij - |r_i - s_j|.
double recover_extra_offset(const MomSolution& sol, const PseudorangeMatrix& f, int j);

/// Solves the minimal problem without the last transmitter, recovers its
/// offset for every candidate and returns the one with the smallest residual
/// over all measurements.
MomSolution solve_subminimal(const PseudorangeMatrix& f, const SolverOptions& opts = {});

/// Receiver position from pseudoranges to transmitters with known offsets.
Point trilaterate_receiver(const std::vector<Point>& transmitters, const Eigen::VectorXd& offsets,
                           const Eigen::VectorXd& f_row, int dim);

/// Levenberg-Marquardt on sum_ij (|r_i - s_j| - (f_ij - o_j))^2 over all
/// receivers and offsets. Never returns a higher cost than `initial`.
MomSolution refine_lm(const MomSolution& initial, const PseudorangeMatrix& f, const LmOptions& opts = {},
                      LmTrace* trace = nullptr);

/// Subminimal seed solve on a node subset, extension to the full network and
/// a global LM refinement.
MomSolution solve_overdetermined(const PseudorangeMatrix& f, const SolverOptions& opts = {},
                                 OverdeterminedTrace* trace = nullptr);

}  // namespace mom
