#include "mom/homotopy.hpp"

#include "mom/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace mom {

void TrackerConfig::validate() const {
    if (!(0.0 < min_step && min_step < initial_step && initial_step < 1.0))
        throw ParameterError("tracker steps must satisfy 0 < min_step < initial_step < 1");
    if (!(max_step >= initial_step)) throw ParameterError("max_step must be at least initial_step");
    if (!(newton_tol > 0.0) || !(corrector_tol > 0.0)) throw ParameterError("Newton tolerances must be positive");
    if (max_newton_iters < 1 || max_steps < 1) throw ParameterError("iteration limits must be positive");
    if (!(step_growth > 1.0) || successes_before_growth < 1) throw ParameterError("invalid step growth");
    if (gamma && std::abs(std::abs(*gamma) - 1.0) > 1e-12) throw ParameterError("gamma must have unit modulus");
    if (threads < 1) throw ParameterError("threads must be positive");
}

Complex TrackerConfig::resolved_gamma() const {
    if (gamma) return *gamma;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, angle(rng));
}

std::string to_string(PathStatus s) {
    switch (s) {
        case PathStatus::Converged: return "converged";
        case PathStatus::Diverged: return "diverged";
        case PathStatus::StepFailure: return "step_failure";
    }
    return "unknown";
}

CompiledSystem::CompiledSystem(const System& sys) : nvars_(sys.nvars), max_degree_(0) {
    if (nvars_ > kMaxTrackedVars) throw ParameterError("too many variables for the path tracker");
    offsets_.push_back(0);
    for (const auto& p : sys.polys) {
        max_degree_ = std::max(max_degree_, p.degree());
        for (const auto& [e, c] : p.terms()) {
            coeffs_.push_back(c);
            exponents_.insert(exponents_.end(), e.begin(), e.end());
        }
        offsets_.push_back(coeffs_.size());
    }
    if (max_degree_ > kMaxTrackedDegree) throw ParameterError("polynomial degree too high for the path tracker");
}

void CompiledSystem::evaluate(const TrackVector& x, TrackVector& values, TrackMatrix& jac) const {
    const int n = nvars_;
    const int stride = max_degree_ + 1;
    // powers[v * stride + k] = x_v^k
    Complex powers[kMaxTrackedVars * (kMaxTrackedDegree + 1)];
    for (int v = 0; v < n; ++v) {
        Complex* row = &powers[v * stride];
        row[0] = 1.0;
        for (int k = 1; k < stride; ++k) row[k] = row[k - 1] * x(v);
    }
    values.setZero(size());
    jac.setZero(size(), n);
    Complex factor[kMaxTrackedVars];
    Complex prefix[kMaxTrackedVars + 1];
    Complex suffix[kMaxTrackedVars + 1];
    for (int k = 0; k < size(); ++k) {
        Complex val = 0.0;
        for (std::size_t t = offsets_[static_cast<std::size_t>(k)]; t < offsets_[static_cast<std::size_t>(k) + 1]; ++t) {
            const int* e = &exponents_[t * static_cast<std::size_t>(n)];
            for (int v = 0; v < n; ++v) factor[v] = powers[v * stride + e[v]];
            prefix[0] = coeffs_[t];
            for (int v = 0; v < n; ++v) prefix[v + 1] = prefix[v] * factor[v];
            suffix[n] = 1.0;
            for (int v = n - 1; v >= 0; --v) suffix[v] = suffix[v + 1] * factor[v];
            val += prefix[n];
            for (int v = 0; v < n; ++v)
                if (e[v] > 0)
                    jac(k, v) += static_cast<double>(e[v]) * powers[v * stride + e[v] - 1] *
                                 prefix[v] * suffix[v + 1];
        }
        values(k) = val;
    }
}

StartSystem total_degree_start(const System& target, std::uint64_t seed) {
    if (!target.is_square()) throw ParameterError("total-degree start needs a square system");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

    StartSystem out;
    const int n = target.nvars;
    std::vector<std::vector<Complex>> per_var_roots;
    std::vector<Poly> polys;
    for (int k = 0; k < n; ++k) {
        const int d = target.polys[static_cast<std::size_t>(k)].degree();
        if (d < 0) throw ParameterError("zero polynomial in target system");
        if (d == 0) throw ParameterError("constant polynomial in target system has no roots");
        const Complex c = std::polar(1.0, angle(rng));
        const Complex b = std::polar(1.0, angle(rng));
        Exponent e(static_cast<std::size_t>(n), 0);
        e[static_cast<std::size_t>(k)] = d;
        Poly g(n);
        g.add_term(e, c);
        g.add_term(Exponent(static_cast<std::size_t>(n), 0), -b);
        polys.push_back(std::move(g));
        out.degrees.push_back(d);

        const Complex base = std::pow(b / c, 1.0 / d);
        std::vector<Complex> roots;
        for (int r = 0; r < d; ++r) roots.push_back(base * std::polar(1.0, 2.0 * std::numbers::pi * r / d));
        per_var_roots.push_back(std::move(roots));
    }
    out.system = System(n, std::move(polys));

    // Odometer over the per-variable root choices.
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Eigen::VectorXcd x(n);
        for (int k = 0; k < n; ++k) x(k) = per_var_roots[static_cast<std::size_t>(k)][static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        out.roots.push_back(x);
        int k = n - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == out.degrees[static_cast<std::size_t>(k)]) idx[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    return out;
}

namespace {

class Homotopy {
public:
    Homotopy(const CompiledSystem& target, const CompiledSystem& start, Complex gamma)
        : target_(target), start_(start), gamma_(gamma), n_(target.nvars()) {}

    /// H(x, t), dH/dx and dH/dt.
    void evaluate(const TrackVector& x, double t, TrackVector& h, TrackMatrix& hx, TrackVector& ht) {
        target_.evaluate(x, fv_, fj_);
        start_.evaluate(x, gv_, gj_);
        h = (1.0 - t) * fv_ + (gamma_ * t) * gv_;
        hx = (1.0 - t) * fj_ + (gamma_ * t) * gj_;
        ht = gamma_ * gv_ - fv_;
    }

    /// dx/dt along the path, from H_x dx/dt = -H_t.
    bool tangent(const TrackVector& x, double t, TrackVector& dx) {
        evaluate(x, t, h_, hx_, ht_);
        lu_.compute(hx_);
        if (!(std::abs(lu_.determinant()) > 0.0)) return false;
        dx = -lu_.solve(ht_);
        return dx.allFinite();
    }

    bool predict(const TrackVector& x, double t, double dt, Predictor predictor, TrackVector& out) {
        if (predictor == Predictor::Euler) {
            if (!tangent(x, t, k1_)) return false;
            out = x - dt * k1_;
            return true;
        }
        if (!tangent(x, t, k1_)) return false;
        if (!tangent(x - 0.5 * dt * k1_, t - 0.5 * dt, k2_)) return false;
        if (!tangent(x - 0.5 * dt * k2_, t - 0.5 * dt, k3_)) return false;
        if (!tangent(x - dt * k3_, t - dt, k4_)) return false;
        out = x - (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
        return true;
    }

    /// Newton at fixed t. Requires each update to at least halve the previous one.
    bool correct(TrackVector& x, double t, int max_iters, double tol) {
        double prev = INFINITY;
        for (int it = 0; it < max_iters; ++it) {
            evaluate(x, t, h_, hx_, ht_);
            lu_.compute(hx_);
            if (!(std::abs(lu_.determinant()) > 0.0)) return false;
            dx_ = lu_.solve(h_);
            if (!dx_.allFinite()) return false;
            x -= dx_;
            const double step = dx_.norm();
            if (step <= tol * (1.0 + x.norm())) return true;
            if (it > 0 && step > 0.5 * prev) return false;
            prev = step;
        }
        return false;
    }

    const TrackMatrix& target_jacobian(const TrackVector& x) {
        target_.evaluate(x, fv_, fj_);
        return fj_;
    }

private:
    const CompiledSystem& target_;
    const CompiledSystem& start_;
    Complex gamma_;
    int n_;
    TrackVector fv_, gv_, h_, ht_, dx_, k1_, k2_, k3_, k4_;
    TrackMatrix fj_, gj_, hx_;
    Eigen::PartialPivLU<TrackMatrix> lu_;
};

/// Condition number of the row-equilibrated Jacobian of F at x.
double jacobian_condition(const CompiledSystem& F, const TrackVector& x) {
    TrackVector v;
    TrackMatrix J;
    F.evaluate(x, v, J);
    for (Eigen::Index k = 0; k < J.rows(); ++k) {
        const double rn = J.row(k).norm();
        if (rn > 0.0) J.row(k) /= rn;
    }
    Eigen::JacobiSVD<TrackMatrix> svd(J);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
}

/// Follows one path from t = 1 to t = 0 and classifies the endpoint.
PathResult track(const System& target_sys, const CompiledSystem& target, const CompiledSystem& start,
                 const TrackVector& start_root, const TrackerConfig& cfg, Complex gamma) {
    Homotopy H(target, start, gamma);
    PathResult res;
    TrackVector x = start_root;
    TrackVector xp;
    double t = 1.0;
    double h = cfg.initial_step;
    int successes = 0;

    auto stop = [&](PathStatus status) {
        res.status = status;
        res.endpoint = x;
        res.t = t;
        return res;
    };

    while (t > 0.0) {
        if (++res.steps_taken > cfg.max_steps) return stop(PathStatus::StepFailure);
        const double dt = std::min(h, t);
        const double t1 = t - dt < 0.25 * cfg.min_step ? 0.0 : t - dt;
        bool ok = H.predict(x, t, t - t1, cfg.predictor, xp);
        if (ok) ok = H.correct(xp, t1, cfg.max_newton_iters, cfg.corrector_tol);
        if (ok) {
            x = xp;
            t = t1;
            if (x.norm() > cfg.divergence_norm) return stop(PathStatus::Diverged);
            if (++successes >= cfg.successes_before_growth) {
                h = std::min(h * cfg.step_growth, cfg.max_step);
                successes = 0;
            }
        } else {
            h *= 0.5;
            successes = 0;
            if (h < cfg.min_step) {
                // Far out paths that stall are heading to infinity.
                return stop(x.norm() > std::sqrt(cfg.divergence_norm) ? PathStatus::Diverged
                                                                      : PathStatus::StepFailure);
            }
        }
    }
    xp = x;
    if (!H.correct(xp, 0.0, std::max(cfg.max_newton_iters, 8), cfg.newton_tol)) return stop(PathStatus::StepFailure);
    x = xp;
    stop(PathStatus::Converged);
    res.final_residual = backward_error(target_sys, res.endpoint);
    if (!(res.final_residual < cfg.newton_tol * (1.0 + res.endpoint.norm()))) {
        res.status = PathStatus::StepFailure;
        return res;
    }
    res.condition = jacobian_condition(target, x);
    res.singular = !(res.condition <= cfg.singular_condition);
    return res;
}

/// Variable and equation scaling that balances coefficient magnitudes.
/// Picks log-scales a_v, b_k minimising sum over terms of
/// (log|c_t| + alpha_t . a + b_k)^2, then rewrites the system in y = x / s.
struct Scaling {
    System system;
    Eigen::VectorXd variable_scale;
};

Scaling balanced(const System& sys) {
    const int n = sys.nvars;
    const int m = static_cast<int>(sys.size());
    int rows = 0;
    for (const auto& p : sys.polys) rows += static_cast<int>(p.num_terms());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, n + m);
    Eigen::VectorXd rhs(rows);
    int r = 0;
    for (int k = 0; k < m; ++k)
        for (const auto& [e, c] : sys.polys[static_cast<std::size_t>(k)].terms()) {
            for (int v = 0; v < n; ++v) A(r, v) = e[static_cast<std::size_t>(v)];
            A(r, n + k) = 1.0;
            rhs(r) = -std::log10(std::abs(c));
            ++r;
        }
    Eigen::VectorXd logs = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
    // Keep scales within a sane range; the solution is only a preconditioner.
    logs = logs.cwiseMax(-12.0).cwiseMin(12.0);

    Scaling out;
    out.variable_scale.resize(n);
    for (int v = 0; v < n; ++v) out.variable_scale(v) = std::pow(10.0, logs(v));
    std::vector<Poly> polys;
    for (int k = 0; k < m; ++k) {
        Poly q(n);
        for (const auto& [e, c] : sys.polys[static_cast<std::size_t>(k)].terms()) {
            double scale = logs(n + k);
            for (int v = 0; v < n; ++v) scale += e[static_cast<std::size_t>(v)] * logs(v);
            q.add_term(e, c * std::pow(10.0, scale));
        }
        const double mx = q.max_abs_coefficient();
        if (mx > 0.0) q *= Complex(1.0 / mx);
        polys.push_back(std::move(q));
    }
    out.system = System(n, std::move(polys));
    return out;
}

}  // namespace

PathResult track_path(const System& target, const System& start, const Eigen::VectorXcd& start_root,
                      const TrackerConfig& cfg) {
    cfg.validate();
    if (!target.is_square() || !start.is_square() || target.nvars != start.nvars)
        throw ParameterError("target and start systems must be square with equal size");
    if (start_root.size() != target.nvars) throw ParameterError("start root has wrong length");
    const CompiledSystem F(target);
    const CompiledSystem G(start);
    return track(target, F, G, start_root, cfg, cfg.resolved_gamma());
}

SolutionSet solve_system(const System& target_in, const TrackerConfig& cfg) {
    cfg.validate();
    if (!target_in.is_square()) throw ParameterError("homotopy needs a square system");
    const Scaling scaling = balanced(target_in);
    const System& target = scaling.system;
    const StartSystem start = total_degree_start(target, cfg.seed);
    const CompiledSystem F(target);
    const CompiledSystem G(start.system);
    const Complex gamma = cfg.resolved_gamma();

    const std::size_t npaths = start.roots.size();
    std::vector<PathResult> results(npaths);
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t p = begin; p < npaths; p += stride)
            results[p] = track(target, F, G, start.roots[p], cfg, gamma);
    };
    const auto nthreads = static_cast<std::size_t>(cfg.threads);
    if (nthreads <= 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < nthreads; ++w) pool.emplace_back(work, w, nthreads);
    }

    // Merge in path order so the result is independent of scheduling.
    SolutionSet out;
    out.stats.paths = static_cast<int>(npaths);
    for (PathResult& r : results) {
        r.endpoint = r.endpoint.cwiseProduct(scaling.variable_scale.cast<Complex>());
        switch (r.status) {
            case PathStatus::Converged: ++out.stats.converged; break;
            case PathStatus::Diverged: ++out.stats.diverged; continue;
            case PathStatus::StepFailure: ++out.stats.step_failures; continue;
        }
        if (r.singular) {
            ++out.stats.singular;
            continue;
        }
        bool duplicate = false;
        for (const auto& s : out.all_solutions)
            if ((s - r.endpoint).norm() < cfg.dedup_tol * (1.0 + s.norm())) {
                duplicate = true;
                break;
            }
        if (duplicate) {
            ++out.stats.duplicates;
            continue;
        }
        out.all_solutions.push_back(r.endpoint);
        bool real = true;
        for (Eigen::Index v = 0; v < r.endpoint.size(); ++v)
            if (std::abs(r.endpoint(v).imag()) >= cfg.real_tol * (1.0 + std::abs(r.endpoint(v).real()))) real = false;
        if (real) out.real_solutions.push_back(r.endpoint.real());
    }
    return out;
}

}  // namespace mom
