#pragma once

#include "mom/polynomial.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mom {

using Complex = std::complex<double>;

enum class Predictor { Euler, RK4 };

/// Path-tracking parameters. Steps are taken in the homotopy parameter t,
/// which runs from 1 (start system) to 0 (target).
struct TrackerConfig {
    double initial_step = 0.05;
    double min_step = 1e-13;
    double max_step = 0.1;
    /// Newton step size (relative to 1 + |x|) that accepts an endpoint at t = 0.
    double newton_tol = 1e-10;
    /// Newton step size that accepts a corrector at intermediate t.
    double corrector_tol = 1e-8;
    int max_newton_iters = 3;
    int max_steps = 10000;
    double divergence_norm = 1e8;
    double step_growth = 1.5;
    int successes_before_growth = 3;
    Predictor predictor = Predictor::Euler;

    /// Unit-modulus gamma; drawn from `seed` when unset.
    std::optional<Complex> gamma;
    std::uint64_t seed = 20240601;

    double dedup_tol = 1e-6;
    double real_tol = 1e-8;
    double singular_condition = 1e12;

    /// Worker threads for path tracking; results do not depend on this.
    int threads = 1;

    /// Throws ParameterError when the invariants do not hold.
    void validate() const;
    Complex resolved_gamma() const;
};

enum class PathStatus { Converged, Diverged, StepFailure };

std::string to_string(PathStatus s);

struct PathResult {
    PathStatus status = PathStatus::StepFailure;
    Eigen::VectorXcd endpoint;
    int steps_taken = 0;
    /// Homotopy parameter where tracking stopped (0 when the end was reached).
    double t = 1.0;
    /// Backward error of the endpoint against the target.
    double final_residual = INFINITY;
    /// Jacobian condition number at the endpoint (converged paths only).
    double condition = INFINITY;
    bool singular = false;
};

struct PathStats {
    int paths = 0;
    int converged = 0;
    int diverged = 0;
    int step_failures = 0;
    int singular = 0;
    int duplicates = 0;
};

struct SolutionSet {
    std::vector<Eigen::VectorXcd> all_solutions;
    std::vector<Eigen::VectorXd> real_solutions;
    PathStats stats;
};

/// Total-degree start system G_k(x) = c_k x_k^{d_k} - b_k with its prod(d_k) roots.
struct StartSystem {
    System system;
    std::vector<Eigen::VectorXcd> roots;
    std::vector<int> degrees;
};

StartSystem total_degree_start(const System& target, std::uint64_t seed);

/// Tracks one root of H(x, t) = (1 - t) F(x) + gamma t G(x) from t = 1 to t = 0.
PathResult track_path(const System& target, const System& start, const Eigen::VectorXcd& start_root,
                      const TrackerConfig& cfg);

/// Solves a square target system from a total-degree start. Returns the
/// deduplicated finite nonsingular endpoints and their real subset.
SolutionSet solve_system(const System& target, const TrackerConfig& cfg);

inline constexpr int kMaxTrackedVars = 8;
inline constexpr int kMaxTrackedDegree = 16;

/// Stack-allocated vector/matrix types used inside the tracker.
using TrackVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxTrackedVars, 1>;
using TrackMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxTrackedVars, kMaxTrackedVars>;

/// Polynomial system flattened for repeated evaluation of values and Jacobians.
class CompiledSystem {
public:
    explicit CompiledSystem(const System& sys);

    int nvars() const { return nvars_; }
    int size() const { return static_cast<int>(offsets_.size()) - 1; }

    /// values(k) = p_k(x); jac(k, v) = d p_k / d x_v.
    void evaluate(const TrackVector& x, TrackVector& values, TrackMatrix& jac) const;

private:
    int nvars_;
    int max_degree_;
    std::vector<Complex> coeffs_;
    std::vector<int> exponents_;
    std::vector<std::size_t> offsets_;
};

}  // namespace mom
