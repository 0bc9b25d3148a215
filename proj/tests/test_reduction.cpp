#include "mom/errors.hpp"
#include "mom/reduction.hpp"

#include <doctest.h>

using namespace mom;

namespace {

NetworkInstance instance_for(MinimalConfig c, std::uint64_t seed) {
    const ConfigShape sh = shape(c);
    return random_instance(sh.receivers, sh.transmitters, sh.dim, seed);
}

Eigen::VectorXd retained(const NetworkInstance& inst, MinimalConfig c) { return inst.offsets.head(shape(c).unknowns); }

}  // namespace

TEST_CASE("configuration names round trip") {
    for (MinimalConfig c : kAllMinimalConfigs) CHECK(parse_minimal_config(name(c)) == c);
    CHECK_THROWS_AS(parse_minimal_config("5r5s3d"), ParameterError);
    CHECK(minimal_config_for(2, 6, 3) == MinimalConfig::M2r6s_3D);
    CHECK_FALSE(minimal_config_for(3, 4, 2).has_value());
}

TEST_CASE("receiver expressions reproduce the receivers") {
    const auto inst = instance_for(MinimalConfig::M3r3s_2D, 10);
    const auto f = synthesize_pseudoranges(inst);
    const auto exprs = receiver_elimination(f, {0, 1, 2});
    REQUIRE(exprs.size() == 3);
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) {
            CHECK(exprs[i].coords[k].degree() <= 2);
            CHECK(std::abs(evaluate(exprs[i].coords[k], inst.offsets) - inst.receivers[i](k)) < 1e-9);
        }
    }
}

TEST_CASE("identity geometry elimination matrix") {
    PseudorangeMatrix f;
    f.dim = 2;
    f.transmitters = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
    f.values = Eigen::MatrixXd::Constant(1, 3, 2.0);
    const auto exprs = receiver_elimination(f, {0, 1, 2});
    CHECK(exprs[0].elimination_matrix.isApprox(-2.0 * Eigen::Matrix2d::Identity()));
    CHECK(exprs[0].condition_number == doctest::Approx(1.0));
}

TEST_CASE("collinear eliminating transmitters are degenerate") {
    PseudorangeMatrix f;
    f.dim = 2;
    f.transmitters = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)};
    f.values = Eigen::MatrixXd::Constant(3, 3, 2.0);
    CHECK_THROWS_AS(receiver_elimination(f, {0, 1, 2}), DegenerateTransmitters);
    CHECK_THROWS_AS(build_reduced_system(f, MinimalConfig::M3r3s_2D), DegenerateTransmitters);
}

TEST_CASE("offset elimination recovers the extra offset") {
    const auto inst = instance_for(MinimalConfig::M2r4s_2D, 20);
    const auto f = synthesize_pseudoranges(inst);
    const auto exprs = receiver_elimination(f, {0, 1, 2});
    const auto o4 = offset_elimination(f, exprs, {0, 1, 2}, 3);
    CHECK(o4.degree() <= 2);
    CHECK(std::abs(evaluate(o4, retained(inst, MinimalConfig::M2r4s_2D)) - inst.offsets(3)) < 1e-9);
}

TEST_CASE("offset elimination with a zero extra offset") {
    auto inst = instance_for(MinimalConfig::M2r4s_2D, 21);
    inst.offsets(3) = 0.0;
    const auto f = synthesize_pseudoranges(inst);
    const auto exprs = receiver_elimination(f, {0, 1, 2});
    const auto o4 = offset_elimination(f, exprs, {0, 1, 2}, 3);
    CHECK(std::abs(evaluate(o4, retained(inst, MinimalConfig::M2r4s_2D))) < 1e-9);
}

TEST_CASE("equidistant receivers are a degenerate measurement") {
    const auto inst = instance_for(MinimalConfig::M2r4s_2D, 22);
    auto f = synthesize_pseudoranges(inst);
    f.values(1, 3) = f.values(0, 3);
    const auto exprs = receiver_elimination(f, {0, 1, 2});
    CHECK_THROWS_AS(offset_elimination(f, exprs, {0, 1, 2}, 3), DegenerateMeasurement);
    CHECK_THROWS_AS(build_reduced_system(f, MinimalConfig::M2r4s_2D), DegenerateMeasurement);
}

TEST_CASE("true offsets are roots and back substitution round trips") {
    for (MinimalConfig c : kAllMinimalConfigs) {
        CAPTURE(name(c));
        for (std::uint64_t seed = 100; seed < 120; ++seed) {
            const auto inst = instance_for(c, seed);
            const auto f = synthesize_pseudoranges(inst);
            const ReducedSystem rs = build_reduced_system(f, c);
            const ConfigShape sh = shape(c);
            CHECK(rs.system.is_square());
            CHECK(rs.system.nvars == sh.unknowns);
            for (const auto& p : rs.system.polys) CHECK(p.degree() <= 4);

            const Eigen::VectorXd o = retained(inst, c);
            CHECK(backward_error(rs.system, o) < 1e-8);

            const MomSolution sol = back_substitute(rs, o);
            CHECK(sol.offsets.size() == sh.transmitters);
            CHECK(relative_error(sol, inst) < 1e-8);
        }
    }
}

TEST_CASE("four receiver system has four quartics") {
    const auto inst = instance_for(MinimalConfig::M4r4s_3D, 5);
    const ReducedSystem rs = build_reduced_system(synthesize_pseudoranges(inst), MinimalConfig::M4r4s_3D);
    REQUIRE(rs.system.polys.size() == 4);
    for (const auto& p : rs.system.polys) CHECK(p.degree() == 4);
}

TEST_CASE("wrong node counts are rejected") {
    const auto f = synthesize_pseudoranges(instance_for(MinimalConfig::M3r3s_2D, 1));
    CHECK_THROWS_AS(build_reduced_system(f, MinimalConfig::M2r4s_2D), ParameterError);
}

TEST_CASE("back substitution is pure and checks arity") {
    const auto inst = instance_for(MinimalConfig::M2r4s_2D, 3);
    const ReducedSystem rs = build_reduced_system(synthesize_pseudoranges(inst), MinimalConfig::M2r4s_2D);
    const Eigen::Vector3d o(0.1, -0.2, 0.3);
    const MomSolution a = back_substitute(rs, o), b = back_substitute(rs, o);
    CHECK(a.offsets == b.offsets);
    CHECK(a.receivers[1] == b.receivers[1]);
    CHECK(a.offsets.size() == 4);
    CHECK_THROWS_AS(back_substitute(rs, Eigen::Vector4d::Zero()), ParameterError);
}

TEST_CASE("translation leaves the roots unchanged") {
    for (MinimalConfig c : kAllMinimalConfigs) {
        auto inst = instance_for(c, 40);
        Eigen::VectorXd shift = Eigen::VectorXd::LinSpaced(inst.dim, 3.0, -7.0);
        auto moved = inst;
        for (auto& r : moved.receivers) r += shift;
        for (auto& s : moved.transmitters) s += shift;
        const auto f = synthesize_pseudoranges(inst);
        const auto g = synthesize_pseudoranges(moved);
        CHECK((f.values - g.values).cwiseAbs().maxCoeff() < 1e-12);
        const ReducedSystem rs = build_reduced_system(g, c);
        CHECK(backward_error(rs.system, retained(inst, c)) < 1e-8);
    }
}
