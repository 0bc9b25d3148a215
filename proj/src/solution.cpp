#include "mom/solution.hpp"

#include "mom/errors.hpp"

#include <cmath>

namespace mom {

Eigen::MatrixXd range_residuals(const std::vector<Point>& receivers, const Eigen::VectorXd& offsets,
                                const PseudorangeMatrix& f) {
    if (static_cast<int>(receivers.size()) != f.num_receivers() || offsets.size() != f.num_transmitters())
        throw ParameterError("solution arity does not match the pseudorange matrix");
    Eigen::MatrixXd res(f.num_receivers(), f.num_transmitters());
    for (int i = 0; i < f.num_receivers(); ++i)
        for (int j = 0; j < f.num_transmitters(); ++j)
            res(i, j) = (receivers[static_cast<std::size_t>(i)] - f.transmitters[static_cast<std::size_t>(j)]).norm() -
                        (f.values(i, j) - offsets(j));
    return res;
}

void score(MomSolution& sol, const PseudorangeMatrix& f, double feasibility_tol) {
    const Eigen::MatrixXd res = range_residuals(sol.receivers, sol.offsets, f);
    sol.residual = std::sqrt(res.squaredNorm() / static_cast<double>(res.size()));
    sol.feasible = true;
    for (int i = 0; i < f.num_receivers(); ++i)
        for (int j = 0; j < f.num_transmitters(); ++j)
            if (f.values(i, j) - sol.offsets(j) < -feasibility_tol) sol.feasible = false;
}

Eigen::VectorXd stack(const std::vector<Point>& receivers, const Eigen::VectorXd& offsets) {
    Eigen::Index size = offsets.size();
    for (const auto& r : receivers) size += r.size();
    Eigen::VectorXd out(size);
    Eigen::Index k = 0;
    for (const auto& r : receivers) {
        out.segment(k, r.size()) = r;
        k += r.size();
    }
    out.tail(offsets.size()) = offsets;
    return out;
}

double relative_error(const MomSolution& sol, const NetworkInstance& truth) {
    if (sol.receivers.size() != truth.receivers.size() || sol.offsets.size() != truth.offsets.size())
        throw ParameterError("solution and ground truth have different arity");
    const Eigen::VectorXd t = stack(truth.receivers, truth.offsets);
    return (stack(sol.receivers, sol.offsets) - t).norm() / t.norm();
}

}  // namespace mom
