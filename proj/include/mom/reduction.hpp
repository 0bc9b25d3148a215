#pragma once

#include "mom/network.hpp"
#include "mom/polynomial.hpp"
#include "mom/solution.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mom {

/// The four minimal MOM configurations.
enum class MinimalConfig { M2r4s_2D, M3r3s_2D, M4r4s_3D, M2r6s_3D };

struct ConfigShape {
    int receivers;
    int transmitters;
    int dim;
    /// Offsets kept as unknowns of the reduced system (the first dim + 1 transmitters).
    int unknowns;
};

ConfigShape shape(MinimalConfig config);

/// Short name, e.g. "3r3s2d".
std::string name(MinimalConfig config);

/// Inverse of `name`; throws ParameterError on unknown names.
MinimalConfig parse_minimal_config(const std::string& s);

std::optional<MinimalConfig> minimal_config_for(int m, int n, int dim);

inline constexpr MinimalConfig kAllMinimalConfigs[] = {MinimalConfig::M2r4s_2D, MinimalConfig::M3r3s_2D,
                                                       MinimalConfig::M4r4s_3D, MinimalConfig::M2r6s_3D};

using RealPoly = MultiPoly<double>;

/// Receiver position as a polynomial function of the retained offsets, obtained
/// by solving the linear range-difference equations against the anchor transmitter.
struct ReceiverExpression {
    std::vector<RealPoly> coords;
    /// Rows are -2 (s_j - s_anchor)^T for the non-anchor eliminating transmitters.
    Eigen::MatrixXd elimination_matrix;
    double condition_number = 0.0;
};

struct ReducedSystem {
    MinimalConfig config;
    System system;
    std::vector<ReceiverExpression> receiver_exprs;
    /// Transmitter ids whose offsets are the system's unknowns, in variable order.
    std::vector<int> retained_offset_ids;
    std::vector<int> eliminated_offset_ids;
    /// eliminated_offsets[k] gives the offset of eliminated_offset_ids[k].
    std::vector<RealPoly> eliminated_offsets;
};

inline constexpr double kMaxEliminationCondition = 1e8;
inline constexpr double kMeasurementDegeneracy = 1e-10;
inline constexpr double kCoefficientPruning = 1e-14;

/// `eliminating` lists dim + 1 transmitter ids; the first is the anchor. The
/// returned polynomials are in the offsets of those transmitters, in list order.
std::vector<ReceiverExpression> receiver_elimination(const PseudorangeMatrix& f, const std::vector<int>& eliminating);

/// Offset of transmitter `extra` as a quadratic in the retained offsets, from
/// the difference of the two receivers' range equations. Requires exactly two
/// receivers; `eliminating` must be the list used for `recv_exprs`.
RealPoly offset_elimination(const PseudorangeMatrix& f, const std::vector<ReceiverExpression>& recv_exprs,
                            const std::vector<int>& eliminating, int extra);

ReducedSystem build_reduced_system(const PseudorangeMatrix& f, MinimalConfig config);

/// Evaluates the receiver and eliminated-offset expressions. Residual and
/// feasibility are left for the caller to score.
MomSolution back_substitute(const ReducedSystem& rs, const Eigen::VectorXd& offsets);

}  // namespace mom
