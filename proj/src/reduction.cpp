#include "mom/reduction.hpp"

#include "mom/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace mom {

ConfigShape shape(MinimalConfig config) {
    switch (config) {
        case MinimalConfig::M2r4s_2D: return {2, 4, 2, 3};
        case MinimalConfig::M3r3s_2D: return {3, 3, 2, 3};
        case MinimalConfig::M4r4s_3D: return {4, 4, 3, 4};
        case MinimalConfig::M2r6s_3D: return {2, 6, 3, 4};
    }
    throw ParameterError("unknown minimal configuration");
}

std::string name(MinimalConfig config) {
    switch (config) {
        case MinimalConfig::M2r4s_2D: return "2r4s2d";
        case MinimalConfig::M3r3s_2D: return "3r3s2d";
        case MinimalConfig::M4r4s_3D: return "4r4s3d";
        case MinimalConfig::M2r6s_3D: return "2r6s3d";
    }
    return "unknown";
}

MinimalConfig parse_minimal_config(const std::string& s) {
    for (MinimalConfig c : kAllMinimalConfigs)
        if (name(c) == s) return c;
    throw ParameterError("unknown minimal configuration '" + s + "'");
}

std::optional<MinimalConfig> minimal_config_for(int m, int n, int dim) {
    for (MinimalConfig c : kAllMinimalConfigs) {
        const ConfigShape sh = shape(c);
        if (sh.receivers == m && sh.transmitters == n && sh.dim == dim) return c;
    }
    return std::nullopt;
}

namespace {

/// Squared distance between a polynomial point and a fixed point.
RealPoly squared_distance(const std::vector<RealPoly>& r, const Point& s) {
    RealPoly out(r.front().nvars());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const RealPoly diff = r[k] - RealPoly::constant(out.nvars(), s(static_cast<Eigen::Index>(k)));
        out += diff * diff;
    }
    return out;
}

/// (f - o_var)^2 with o_var a variable, or (f - expr)^2 for an eliminated offset.
RealPoly squared_range(double f, const RealPoly& offset) {
    const RealPoly d = RealPoly::constant(offset.nvars(), f) - offset;
    return d * d;
}

}  // namespace

std::vector<ReceiverExpression> receiver_elimination(const PseudorangeMatrix& f, const std::vector<int>& eliminating) {
    f.validate();
    const int dim = f.dim;
    if (static_cast<int>(eliminating.size()) != dim + 1)
        throw ParameterError("receiver elimination needs dim + 1 transmitters");
    for (int j : eliminating)
        if (j < 0 || j >= f.num_transmitters()) throw ParameterError("eliminating transmitter out of range");

    const int nv = dim + 1;
    const Point& anchor = f.transmitters[static_cast<std::size_t>(eliminating[0])];

    Eigen::MatrixXd A(dim, dim);
    for (int k = 1; k <= dim; ++k)
        A.row(k - 1) = -2.0 * (f.transmitters[static_cast<std::size_t>(eliminating[static_cast<std::size_t>(k)])] - anchor).transpose();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double cond = sv(dim - 1) > 0.0 ? sv(0) / sv(dim - 1) : INFINITY;
    if (!(cond <= kMaxEliminationCondition))
        throw DegenerateTransmitters("eliminating transmitters are degenerate (condition number " +
                                     std::to_string(cond) + ")");
    const Eigen::MatrixXd Ainv = A.inverse();

    std::vector<ReceiverExpression> out;
    for (int i = 0; i < f.num_receivers(); ++i) {
        // Right-hand sides (f_ij - o_j)^2 - (f_i1 - o_1)^2 - |s_j|^2 + |s_1|^2.
        const RealPoly anchor_range = squared_range(f.values(i, eliminating[0]), RealPoly::variable(nv, 0));
        std::vector<RealPoly> rhs;
        for (int k = 1; k <= dim; ++k) {
            const int j = eliminating[static_cast<std::size_t>(k)];
            const Point& s = f.transmitters[static_cast<std::size_t>(j)];
            rhs.push_back(squared_range(f.values(i, j), RealPoly::variable(nv, k)) - anchor_range +
                          RealPoly::constant(nv, anchor.squaredNorm() - s.squaredNorm()));
        }
        ReceiverExpression expr;
        expr.elimination_matrix = A;
        expr.condition_number = cond;
        for (int a = 0; a < dim; ++a) {
            RealPoly coord(nv);
            for (int b = 0; b < dim; ++b) coord += Ainv(a, b) * rhs[static_cast<std::size_t>(b)];
            expr.coords.push_back(coord.pruned(kCoefficientPruning));
        }
        out.push_back(std::move(expr));
    }
    return out;
}

RealPoly offset_elimination(const PseudorangeMatrix& f, const std::vector<ReceiverExpression>& recv_exprs,
                            const std::vector<int>& eliminating, int extra) {
    if (f.num_receivers() != 2 || recv_exprs.size() != 2)
        throw ParameterError("offset elimination needs exactly two receivers");
    if (extra < 0 || extra >= f.num_transmitters()) throw ParameterError("extra transmitter out of range");
    const int a = eliminating.at(0);
    const int nv = recv_exprs[0].coords.front().nvars();

    const double f1 = f.values(0, extra);
    const double f2 = f.values(1, extra);
    const double denom = 2.0 * (f2 - f1);
    if (std::abs(f2 - f1) < kMeasurementDegeneracy * (1.0 + std::abs(f1)))
        throw DegenerateMeasurement("receivers are equidistant from transmitter " + std::to_string(extra));

    const Point& anchor = f.transmitters[static_cast<std::size_t>(a)];
    const Point& s = f.transmitters[static_cast<std::size_t>(extra)];
    const Point ds = s - anchor;

    // Squared range to `extra` rewritten through the anchor equation:
    // (f_i1 - o_1)^2 - 2 (s_j - s_1)^T r_i(o) + |s_j|^2 - |s_1|^2, quadratic in o.
    auto range_sq = [&](int i) {
        RealPoly d = squared_range(f.values(i, a), RealPoly::variable(nv, 0));
        const auto& r = recv_exprs[static_cast<std::size_t>(i)].coords;
        for (std::size_t k = 0; k < r.size(); ++k) d -= (2.0 * ds(static_cast<Eigen::Index>(k))) * r[k];
        d += RealPoly::constant(nv, s.squaredNorm() - anchor.squaredNorm());
        return d;
    };

    // (f_2j - o_j)^2 - (f_1j - o_j)^2 = -2 (f_2j - f_1j) o_j + f_2j^2 - f_1j^2.
    RealPoly oj = RealPoly::constant(nv, f2 * f2 - f1 * f1) - (range_sq(1) - range_sq(0));
    oj *= 1.0 / denom;
    return oj.pruned(kCoefficientPruning);
}

ReducedSystem build_reduced_system(const PseudorangeMatrix& f, MinimalConfig config) {
    f.validate();
    const ConfigShape sh = shape(config);
    if (f.num_receivers() != sh.receivers || f.num_transmitters() != sh.transmitters || f.dim != sh.dim)
        throw ParameterError("pseudorange matrix is " + std::to_string(f.num_receivers()) + "r/" +
                             std::to_string(f.num_transmitters()) + "s in " + std::to_string(f.dim) +
                             "D, configuration " + name(config) + " needs " + std::to_string(sh.receivers) + "r/" +
                             std::to_string(sh.transmitters) + "s in " + std::to_string(sh.dim) + "D");

    ReducedSystem rs;
    rs.config = config;
    const int nv = sh.unknowns;
    for (int j = 0; j < nv; ++j) rs.retained_offset_ids.push_back(j);
    rs.receiver_exprs = receiver_elimination(f, rs.retained_offset_ids);

    const Point& anchor = f.transmitters[0];
    const RealPoly o1 = RealPoly::variable(nv, 0);
    std::vector<RealPoly> eqs;
    for (int i = 0; i < f.num_receivers(); ++i)
        eqs.push_back(squared_distance(rs.receiver_exprs[static_cast<std::size_t>(i)].coords, anchor) -
                      squared_range(f.values(i, 0), o1));

    for (int j = nv; j < f.num_transmitters(); ++j) {
        RealPoly oj = offset_elimination(f, rs.receiver_exprs, rs.retained_offset_ids, j);
        eqs.push_back(squared_range(f.values(0, j), oj) -
                      squared_distance(rs.receiver_exprs[0].coords, f.transmitters[static_cast<std::size_t>(j)]));
        rs.eliminated_offset_ids.push_back(j);
        rs.eliminated_offsets.push_back(std::move(oj));
    }

    std::vector<Poly> polys;
    for (const auto& e : eqs) polys.push_back(e.pruned(kCoefficientPruning).cast<std::complex<double>>());
    rs.system = System(nv, std::move(polys));
    return rs;
}

MomSolution back_substitute(const ReducedSystem& rs, const Eigen::VectorXd& offsets) {
    const ConfigShape sh = shape(rs.config);
    if (offsets.size() != sh.unknowns) throw ParameterError("back substitution needs the retained offsets");
    MomSolution sol;
    for (const auto& expr : rs.receiver_exprs) {
        Point r(sh.dim);
        for (int k = 0; k < sh.dim; ++k) r(k) = evaluate(expr.coords[static_cast<std::size_t>(k)], offsets);
        sol.receivers.push_back(r);
    }
    sol.offsets.resize(sh.transmitters);
    for (std::size_t k = 0; k < rs.retained_offset_ids.size(); ++k)
        sol.offsets(rs.retained_offset_ids[k]) = offsets(static_cast<Eigen::Index>(k));
    for (std::size_t k = 0; k < rs.eliminated_offset_ids.size(); ++k)
        sol.offsets(rs.eliminated_offset_ids[k]) = evaluate(rs.eliminated_offsets[k], offsets);
    return sol;
}

}  // namespace mom
