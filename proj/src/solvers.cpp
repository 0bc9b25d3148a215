#include "mom/solvers.hpp"

#include "mom/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mom {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kMaxTrilaterationCondition = 1e8;
constexpr double kDistanceTolerance = 1e-6;

/// Subminimal receiver/transmitter counts for a dimension, largest receiver count first.
std::vector<std::pair<int, int>> subminimal_shapes(int dim) {
    if (dim == 2) return {{3, 4}, {2, 5}};
    if (dim == 3) return {{4, 5}, {2, 7}};
    throw ParameterError("dimension must be 2 or 3");
}

std::vector<int> iota(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

std::optional<MinimalConfig> subminimal_base(int m, int n, int dim) {
    return n > 1 ? minimal_config_for(m, n - 1, dim) : std::nullopt;
}

CandidateSet enumerate_minimal(const PseudorangeMatrix& f, MinimalConfig config, const SolverOptions& opts) {
    const ReducedSystem rs = build_reduced_system(f, config);
    const SolutionSet roots = solve_system(rs.system, opts.tracker);

    CandidateSet out;
    out.stats = roots.stats;
    out.total_solutions = static_cast<int>(roots.all_solutions.size());
    for (const auto& x : roots.real_solutions) {
        MomSolution sol = back_substitute(rs, x);
        score(sol, f, opts.feasibility_tol);
        if (opts.prune_infeasible && !sol.feasible) continue;
        out.candidates.push_back(std::move(sol));
    }
    std::stable_sort(out.candidates.begin(), out.candidates.end(),
                     [](const MomSolution& a, const MomSolution& b) { return a.residual < b.residual; });
    return out;
}

CandidateSet solve_minimal(const PseudorangeMatrix& f, MinimalConfig config, const SolverOptions& opts) {
    CandidateSet out = enumerate_minimal(f, config, opts);
    if (out.candidates.empty())
        throw NoRealSolution("no real solution among " + std::to_string(out.total_solutions) +
                             " finite roots for " + name(config));
    return out;
}

double recover_extra_offset(const MomSolution& sol, const PseudorangeMatrix& f, int j) {
    const Point& s = f.transmitters.at(static_cast<std::size_t>(j));
    double sum = 0.0;
    for (std::size_t i = 0; i < sol.receivers.size(); ++i)
        sum += f.values(static_cast<Eigen::Index>(i), j) - (sol.receivers[i] - s).norm();
    return sum / static_cast<double>(sol.receivers.size());
}

MomSolution solve_subminimal(const PseudorangeMatrix& f, const SolverOptions& opts) {
    f.validate();
    const int m = f.num_receivers();
    const int n = f.num_transmitters();
    const auto base = subminimal_base(m, n, f.dim);
    if (!base)
        throw ParameterError(std::to_string(m) + "r/" + std::to_string(n) + "s in " + std::to_string(f.dim) +
                             "D is not a minimal configuration plus one transmitter");

    const CandidateSet set = solve_minimal(f.subset(iota(m), iota(n - 1)), *base, opts);
    std::vector<MomSolution> full;
    for (const MomSolution& c : set.candidates) {
        MomSolution sol = c;
        sol.offsets.conservativeResize(n);
        sol.offsets(n - 1) = recover_extra_offset(c, f, n - 1);
        score(sol, f, opts.feasibility_tol);
        if (opts.prune_infeasible && !sol.feasible) continue;
        full.push_back(std::move(sol));
    }
    if (full.empty()) throw NoRealSolution("every candidate was infeasible");

    std::size_t best = 0;
    for (std::size_t k = 1; k < full.size(); ++k)
        if (full[k].residual < full[best].residual) best = k;
    MomSolution out = full[best];
    for (std::size_t k = 0; k < full.size(); ++k)
        if (k != best && std::abs(full[k].residual - out.residual) <= kTieTolerance) out.tie = true;
    return out;
}

Point trilaterate_receiver(const std::vector<Point>& transmitters, const Eigen::VectorXd& offsets,
                           const Eigen::VectorXd& f_row, int dim) {
    const auto n = static_cast<Eigen::Index>(transmitters.size());
    if (dim != 2 && dim != 3) throw ParameterError("dimension must be 2 or 3");
    if (offsets.size() != n || f_row.size() != n)
        throw ParameterError("trilateration needs one offset and one pseudorange per transmitter");
    if (n < dim + 1) throw ParameterError("trilateration needs at least dim + 1 transmitters");

    const Eigen::VectorXd d = f_row - offsets;
    const double scale = 1.0 + d.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < n; ++j)
        if (d(j) < -kDistanceTolerance * scale)
            throw InfeasibleDistance("pseudorange minus offset is negative (" + std::to_string(d(j)) +
                                     ") for transmitter " + std::to_string(j));
    const Eigen::VectorXd dist = d.cwiseMax(0.0);

    // |r - s_j|^2 - |r - s_0|^2 = d_j^2 - d_0^2 is linear in r.
    const Point& s0 = transmitters[0];
    Eigen::MatrixXd A(n - 1, dim);
    Eigen::VectorXd b(n - 1);
    for (Eigen::Index j = 1; j < n; ++j) {
        const Point& s = transmitters[static_cast<std::size_t>(j)];
        A.row(j - 1) = -2.0 * (s - s0).transpose();
        b(j - 1) = dist(j) * dist(j) - dist(0) * dist(0) - s.squaredNorm() + s0.squaredNorm();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(dim - 1) > 0.0) || sv(0) / sv(dim - 1) > kMaxTrilaterationCondition)
        throw DegenerateTransmitters("transmitters used for trilateration are degenerate");
    Point r = svd.solve(b);

    // Gauss-Newton on |r - s_j| - d_j.
    for (int it = 0; it < 20; ++it) {
        Eigen::MatrixXd J(n, dim);
        Eigen::VectorXd res(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const Point diff = r - transmitters[static_cast<std::size_t>(j)];
            const double len = diff.norm();
            res(j) = len - dist(j);
            if (len > 0.0)
                J.row(j) = (diff / len).transpose();
            else
                J.row(j).setZero();
        }
        const Eigen::VectorXd step = J.colPivHouseholderQr().solve(-res);
        if (!step.allFinite()) break;
        // Accept only steps that do not increase the residual.
        Point trial = r + step;
        double trial_cost = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double e = (trial - transmitters[static_cast<std::size_t>(j)]).norm() - dist(j);
            trial_cost += e * e;
        }
        if (trial_cost > res.squaredNorm()) break;
        r = trial;
        if (step.norm() <= 1e-15 * (1.0 + r.norm())) break;
    }
    return r;
}

namespace {

struct LmProblem {
    const PseudorangeMatrix& f;
    int m, n, dim;

    Eigen::Index size() const { return static_cast<Eigen::Index>(m) * dim + n; }

    Eigen::VectorXd residuals(const Eigen::VectorXd& p) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(m) * n);
        for (int i = 0; i < m; ++i) {
            const auto r = p.segment(static_cast<Eigen::Index>(i) * dim, dim);
            for (int j = 0; j < n; ++j)
                out(static_cast<Eigen::Index>(i) * n + j) =
                    (r - f.transmitters[static_cast<std::size_t>(j)]).norm() - (f.values(i, j) - p(m * dim + j));
        }
        return out;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * n, size());
        for (int i = 0; i < m; ++i) {
            const auto r = p.segment(static_cast<Eigen::Index>(i) * dim, dim);
            for (int j = 0; j < n; ++j) {
                const Eigen::Index row = static_cast<Eigen::Index>(i) * n + j;
                const Point diff = r - f.transmitters[static_cast<std::size_t>(j)];
                const double len = diff.norm();
                if (len > 0.0) J.block(row, static_cast<Eigen::Index>(i) * dim, 1, dim) = (diff / len).transpose();
                J(row, m * dim + j) = 1.0;
            }
        }
        return J;
    }

    MomSolution unpack(const Eigen::VectorXd& p) const {
        MomSolution sol;
        for (int i = 0; i < m; ++i) sol.receivers.push_back(p.segment(static_cast<Eigen::Index>(i) * dim, dim));
        sol.offsets = p.tail(n);
        return sol;
    }
};

}  // namespace

MomSolution refine_lm(const MomSolution& initial, const PseudorangeMatrix& f, const LmOptions& opts, LmTrace* trace) {
    f.validate();
    if (static_cast<int>(initial.receivers.size()) != f.num_receivers() || initial.offsets.size() != f.num_transmitters())
        throw ParameterError("initial solution does not match the pseudorange matrix");
    const LmProblem prob{f, f.num_receivers(), f.num_transmitters(), f.dim};

    Eigen::VectorXd p = stack(initial.receivers, initial.offsets);
    Eigen::VectorXd res = prob.residuals(p);
    double cost = res.squaredNorm();
    double lambda = opts.initial_lambda;
    if (trace) trace->costs.push_back(cost);

    for (int it = 0; it < opts.max_iterations && cost > 0.0; ++it) {
        const Eigen::MatrixXd J = prob.jacobian(p);
        Eigen::MatrixXd N = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * res;
        N.diagonal().array() += lambda;
        const Eigen::VectorXd step = N.ldlt().solve(-g);
        const Eigen::VectorXd trial = p + step;
        const Eigen::VectorXd trial_res = prob.residuals(trial);
        const double trial_cost = trial_res.squaredNorm();
        if (step.allFinite() && trial_cost < cost) {
            const double change = (cost - trial_cost) / cost;
            p = trial;
            res = trial_res;
            cost = trial_cost;
            lambda /= opts.lambda_factor;
            if (trace) {
                trace->costs.push_back(cost);
                ++trace->accepted;
            }
            if (change < opts.relative_tolerance) break;
        } else {
            lambda *= opts.lambda_factor;
            if (trace) {
                trace->costs.push_back(cost);
                ++trace->rejected;
            }
            if (!(lambda < 1e20)) break;
        }
    }

    MomSolution out = prob.unpack(p);
    out.tie = initial.tie;
    score(out, f);
    return out;
}

namespace {

/// Seeds from a subset solve and extends to every node of `f`.
MomSolution extend(const PseudorangeMatrix& f, const std::vector<int>& rids, const std::vector<int>& tids,
                   const SolverOptions& opts, double& pre_lm_residual) {
    const MomSolution seed = solve_subminimal(f.subset(rids, tids), opts);
    const int m = f.num_receivers();
    const int n = f.num_transmitters();

    // Offsets of the remaining transmitters from the seed receivers.
    MomSolution seeded;
    seeded.receivers = seed.receivers;
    const PseudorangeMatrix rows = f.subset(rids, iota(n));
    Eigen::VectorXd offsets(n);
    std::vector<bool> known(static_cast<std::size_t>(n), false);
    for (std::size_t k = 0; k < tids.size(); ++k) {
        offsets(tids[k]) = seed.offsets(static_cast<Eigen::Index>(k));
        known[static_cast<std::size_t>(tids[k])] = true;
    }
    for (int j = 0; j < n; ++j)
        if (!known[static_cast<std::size_t>(j)]) offsets(j) = recover_extra_offset(seeded, rows, j);

    MomSolution full;
    full.receivers.resize(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < rids.size(); ++k) full.receivers[static_cast<std::size_t>(rids[k])] = seed.receivers[k];
    std::vector<bool> placed(static_cast<std::size_t>(m), false);
    for (int i : rids) placed[static_cast<std::size_t>(i)] = true;
    for (int i = 0; i < m; ++i)
        if (!placed[static_cast<std::size_t>(i)])
            full.receivers[static_cast<std::size_t>(i)] =
                trilaterate_receiver(f.transmitters, offsets, f.values.row(i).transpose(), f.dim);
    full.offsets = offsets;
    score(full, f, opts.feasibility_tol);
    pre_lm_residual = full.residual;
    return refine_lm(full, f, opts.lm);
}

}  // namespace

MomSolution solve_overdetermined(const PseudorangeMatrix& f, const SolverOptions& opts, OverdeterminedTrace* trace) {
    f.validate();
    const int m = f.num_receivers();
    const int n = f.num_transmitters();
    const SolvabilityClass cls = classify(m, n, f.dim);
    if (cls.kind == Solvability::Underdetermined)
        throw ParameterError("network is underdetermined: m n - K m - n = " + std::to_string(cls.excess) + " < 0");

    std::optional<std::pair<int, int>> shape;
    for (auto [sm, sn] : subminimal_shapes(f.dim))
        if (m >= sm && n >= sn) {
            shape = std::make_pair(sm, sn);
            break;
        }
    if (!shape)
        throw ParameterError(std::to_string(m) + "r/" + std::to_string(n) +
                             "s has no subminimal subnetwork");
    const auto [sm, sn] = *shape;

    std::mt19937_64 rng(opts.seed);
    std::vector<std::string> diagnostics;
    std::optional<MomSolution> best;
    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        std::vector<int> rids = iota(m);
        std::vector<int> tids = iota(n);
        if (attempt > 0) {
            std::shuffle(rids.begin(), rids.end(), rng);
            std::shuffle(tids.begin(), tids.end(), rng);
        }
        rids.resize(static_cast<std::size_t>(sm));
        tids.resize(static_cast<std::size_t>(sn));
        try {
            double pre = 0.0;
            MomSolution sol = extend(f, rids, tids, opts, pre);
            if (!best || sol.residual < best->residual) {
                best = std::move(sol);
                if (trace) {
                    trace->receiver_ids = rids;
                    trace->transmitter_ids = tids;
                    trace->pre_lm_residual = pre;
                }
            }
        } catch (const Error& e) {
            diagnostics.push_back("attempt " + std::to_string(attempt) + ": " + e.code() + ": " + e.what());
        }
    }
    if (trace) trace->failures = diagnostics;
    if (!best) {
        throw SolveFailed("every subset attempt failed", std::move(diagnostics));
    }
    return *best;
}

}  // namespace mom
