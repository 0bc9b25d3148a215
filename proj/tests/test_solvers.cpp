#include "mom/errors.hpp"
#include "mom/solvers.hpp"

#include <doctest.h>

#include <random>

using namespace mom;

namespace {

NetworkInstance instance_for(MinimalConfig c, std::uint64_t seed) {
    const ConfigShape sh = shape(c);
    return random_instance(sh.receivers, sh.transmitters, sh.dim, seed);
}

MomSolution truth_solution(const NetworkInstance& inst, const PseudorangeMatrix& f) {
    MomSolution s;
    s.receivers = inst.receivers;
    s.offsets = inst.offsets;
    score(s, f);
    return s;
}

double cost(const MomSolution& s, const PseudorangeMatrix& f) {
    return range_residuals(s.receivers, s.offsets, f).squaredNorm();
}

}  // namespace

TEST_CASE("subminimal shapes") {
    CHECK(subminimal_base(3, 4, 2) == MinimalConfig::M3r3s_2D);
    CHECK(subminimal_base(2, 5, 2) == MinimalConfig::M2r4s_2D);
    CHECK(subminimal_base(4, 5, 3) == MinimalConfig::M4r4s_3D);
    CHECK(subminimal_base(2, 7, 3) == MinimalConfig::M2r6s_3D);
    CHECK_FALSE(subminimal_base(3, 3, 2).has_value());
    CHECK_FALSE(subminimal_base(12, 20, 3).has_value());
}

TEST_CASE("minimal candidates contain the truth") {
    for (MinimalConfig c : kAllMinimalConfigs) {
        CAPTURE(name(c));
        const auto inst = instance_for(c, 1);
        const auto f = synthesize_pseudoranges(inst);
        const CandidateSet set = solve_minimal(f, c);
        REQUIRE_FALSE(set.candidates.empty());
        CHECK(set.candidates.size() <= static_cast<std::size_t>(set.total_solutions));
        for (std::size_t k = 1; k < set.candidates.size(); ++k)
            CHECK(set.candidates[k - 1].residual <= set.candidates[k].residual);
        bool found = false;
        for (const auto& cand : set.candidates)
            if (cand.residual < 1e-7 && relative_error(cand, inst) < 1e-6) found = true;
        CHECK(found);
    }
}

TEST_CASE("2r6s has between 4 and 20 real candidates") {
    const auto inst = instance_for(MinimalConfig::M2r6s_3D, 3);
    const CandidateSet set = solve_minimal(synthesize_pseudoranges(inst), MinimalConfig::M2r6s_3D);
    CHECK(set.candidates.size() >= 4);
    CHECK(set.candidates.size() <= 20);
}

TEST_CASE("minimal solver checks the shape") {
    const auto f = synthesize_pseudoranges(instance_for(MinimalConfig::M3r3s_2D, 1));
    CHECK_THROWS_AS(solve_minimal(f, MinimalConfig::M2r4s_2D), ParameterError);
}

TEST_CASE("infeasible candidates can be pruned") {
    const auto inst = instance_for(MinimalConfig::M3r3s_2D, 2);
    const auto f = synthesize_pseudoranges(inst);
    SolverOptions opts;
    const CandidateSet all = solve_minimal(f, MinimalConfig::M3r3s_2D, opts);
    opts.prune_infeasible = true;
    const CandidateSet kept = solve_minimal(f, MinimalConfig::M3r3s_2D, opts);
    CHECK(kept.candidates.size() <= all.candidates.size());
    for (const auto& c : kept.candidates) CHECK(c.feasible);
    bool found = false;
    for (const auto& c : kept.candidates) found = found || relative_error(c, inst) < 1e-6;
    CHECK(found);
}

TEST_CASE("extra offset recovery") {
    const auto inst = random_instance(3, 4, 2, 5);
    const auto f = synthesize_pseudoranges(inst);
    const MomSolution t = truth_solution(inst, f);
    CHECK(std::abs(recover_extra_offset(t, f, 3) - inst.offsets(3)) < 1e-8);

    const auto one = random_instance(1, 4, 2, 6);
    const auto f1 = synthesize_pseudoranges(one);
    CHECK(std::abs(recover_extra_offset(truth_solution(one, f1), f1, 2) - one.offsets(2)) < 1e-8);
}

TEST_CASE("extra offset recovery averages noise over receivers") {
    // With exact positions the estimate is o + mean of m noise draws.
    const int m = 8;
    const double sigma = 0.1;
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 400; ++s) {
        const auto inst = random_instance(m, 4, 2, 1000 + s);
        const auto f = add_noise(synthesize_pseudoranges(inst), sigma, 5000 + s);
        errs.push_back(recover_extra_offset(truth_solution(inst, f), f, 3) - inst.offsets(3));
    }
    double var = 0.0;
    for (double e : errs) var += e * e;
    var /= errs.size();
    const double expected = sigma * sigma / m;
    CHECK(var > 0.75 * expected);
    CHECK(var < 1.25 * expected);
}

TEST_CASE("subminimal solve on clean data") {
    for (auto [m, n, dim] : {std::tuple{3, 4, 2}, {2, 5, 2}, {2, 7, 3}}) {
        CAPTURE(m);
        CAPTURE(n);
        const auto inst = random_instance(m, n, dim, 11);
        const auto f = synthesize_pseudoranges(inst);
        const MomSolution sol = solve_subminimal(f);
        CHECK(relative_error(sol, inst) < 1e-6);
        CHECK(sol.offsets.size() == n);
        CHECK(sol.residual < 1e-7);
    }
    CHECK_THROWS_AS(solve_subminimal(synthesize_pseudoranges(random_instance(3, 3, 2, 1))), ParameterError);
}

TEST_CASE("tiny noise selects the same candidate") {
    const auto inst = random_instance(3, 4, 2, 12);
    const auto f = synthesize_pseudoranges(inst);
    const MomSolution a = solve_subminimal(f);
    const MomSolution b = solve_subminimal(add_noise(f, 1e-12, 3));
    CHECK((stack(a.receivers, a.offsets) - stack(b.receivers, b.offsets)).norm() < 1e-6);
}

TEST_CASE("trilateration") {
    const auto inst = random_instance(1, 6, 3, 13);
    const auto f = synthesize_pseudoranges(inst);
    const Point r = trilaterate_receiver(inst.transmitters, inst.offsets, f.values.row(0).transpose(), 3);
    CHECK((r - inst.receivers[0]).norm() < 1e-9);

    auto at = inst;
    at.receivers[0] = at.transmitters[2];
    const auto g = synthesize_pseudoranges(at);
    CHECK((trilaterate_receiver(at.transmitters, at.offsets, g.values.row(0).transpose(), 3) - at.receivers[0]).norm() <
          1e-9);

    std::vector<Point> line;
    for (int k = 0; k < 4; ++k) line.push_back(Eigen::Vector2d(k, 2.0 * k));
    const Eigen::Vector4d zero = Eigen::Vector4d::Zero();
    CHECK_THROWS_AS(trilaterate_receiver(line, zero, Eigen::Vector4d(1, 2, 3, 4), 2), DegenerateTransmitters);

    Eigen::VectorXd bad = f.values.row(0).transpose();
    bad(1) = inst.offsets(1) - 5.0;
    CHECK_THROWS_AS(trilaterate_receiver(inst.transmitters, inst.offsets, bad, 3), InfeasibleDistance);
}

TEST_CASE("LM keeps the ground truth") {
    const auto inst = random_instance(5, 8, 3, 14);
    const auto f = synthesize_pseudoranges(inst);
    const MomSolution t = truth_solution(inst, f);
    const MomSolution r = refine_lm(t, f);
    CHECK((stack(r.receivers, r.offsets) - stack(t.receivers, t.offsets)).norm() < 1e-12);
}

TEST_CASE("LM cost is monotone and converges back") {
    const auto inst = random_instance(6, 9, 3, 15);
    const auto f = synthesize_pseudoranges(inst);
    MomSolution start = truth_solution(inst, f);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1e-3);
    for (auto& r : start.receivers)
        for (int k = 0; k < 3; ++k) r(k) += n(rng);
    for (int j = 0; j < start.offsets.size(); ++j) start.offsets(j) += n(rng);

    LmTrace trace;
    const MomSolution r = refine_lm(start, f, {}, &trace);
    REQUIRE(trace.costs.size() >= 2);
    for (std::size_t k = 1; k < trace.costs.size(); ++k) CHECK(trace.costs[k] <= trace.costs[k - 1]);
    CHECK(cost(r, f) <= cost(start, f));
    CHECK(relative_error(r, inst) < 1e-8);
}

TEST_CASE("overdetermined solve on clean data") {
    const auto inst = random_instance(12, 20, 3, 16);
    const auto f = synthesize_pseudoranges(inst);
    OverdeterminedTrace trace;
    const MomSolution sol = solve_overdetermined(f, {}, &trace);
    CHECK(relative_error(sol, inst) < 1e-6);
    CHECK(sol.residual <= trace.pre_lm_residual + 1e-15);
    CHECK(trace.receiver_ids.size() + trace.transmitter_ids.size() > 0);

    const auto small = random_instance(6, 8, 2, 17);
    CHECK(relative_error(solve_overdetermined(synthesize_pseudoranges(small)), small) < 1e-6);
}

TEST_CASE("overdetermined solve rejects underdetermined networks") {
    CHECK_THROWS_AS(solve_overdetermined(synthesize_pseudoranges(random_instance(2, 3, 2, 1))), ParameterError);
}

TEST_CASE("overdetermined solve is translation equivariant") {
    const auto inst = random_instance(8, 10, 3, 18);
    auto moved = inst;
    const Eigen::Vector3d shift(5.0, -2.0, 1.5);
    for (auto& r : moved.receivers) r += shift;
    for (auto& s : moved.transmitters) s += shift;
    const MomSolution a = solve_overdetermined(add_noise(synthesize_pseudoranges(inst), 1e-3, 2));
    const MomSolution b = solve_overdetermined(add_noise(synthesize_pseudoranges(moved), 1e-3, 2));
    for (std::size_t i = 0; i < a.receivers.size(); ++i) CHECK((b.receivers[i] - a.receivers[i] - shift).norm() < 1e-6);
    CHECK((a.offsets - b.offsets).norm() < 1e-6);
}
