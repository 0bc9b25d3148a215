#pragma once

#include "mom/network.hpp"

#include <vector>

namespace mom {

/// Estimated receivers and transmitter offsets for one network.
struct MomSolution {
    std::vector<Point> receivers;
    Eigen::VectorXd offsets;
    /// RMS over all supplied measurements of |r_i - s_j| - (f_ij - o_j).
    double residual = 0.0;
    /// Every f_ij - o_j is at least -feasibility tolerance.
    bool feasible = true;
    /// Set by subminimal selection when the best residual was tied.
    bool tie = false;
};

/// Per-measurement range residuals |r_i - s_j| - (f_ij - o_j), row-major (i, j).
Eigen::MatrixXd range_residuals(const std::vector<Point>& receivers, const Eigen::VectorXd& offsets,
                                const PseudorangeMatrix& f);

/// Fills `residual` and `feasible` against `f`.
void score(MomSolution& sol, const PseudorangeMatrix& f, double feasibility_tol = 1e-6);

/// Stacks receiver coordinates followed by offsets.
Eigen::VectorXd stack(const std::vector<Point>& receivers, const Eigen::VectorXd& offsets);

/// |estimate - truth| / |truth| over the stacked receiver coordinates and offsets.
double relative_error(const MomSolution& sol, const NetworkInstance& truth);

}  // namespace mom
