#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mom {

/// Node position in K = 2 or 3 dimensions.
using Point = Eigen::VectorXd;

/// Ground-truth MOM network. Offsets are stored in length units (emission
/// time bias multiplied by signal speed), so the signal speed is implicitly 1.
struct NetworkInstance {
    int dim = 0;
    std::vector<Point> receivers;
    std::vector<Point> transmitters;
    Eigen::VectorXd offsets;

    int num_receivers() const { return static_cast<int>(receivers.size()); }
    int num_transmitters() const { return static_cast<int>(transmitters.size()); }

    /// Throws ParameterError when the invariants do not hold.
    void validate() const;
};

/// Measured pseudoranges f(i, j) between receiver i and transmitter j.
struct PseudorangeMatrix {
    int dim = 0;
    Eigen::MatrixXd values;
    std::vector<Point> transmitters;

    int num_receivers() const { return static_cast<int>(values.rows()); }
    int num_transmitters() const { return static_cast<int>(values.cols()); }

    void validate() const;

    /// Sub-problem restricted to the given receiver rows and transmitter columns.
    PseudorangeMatrix subset(const std::vector<int>& receiver_ids,
                             const std::vector<int>& transmitter_ids) const;
};

enum class Solvability { Underdetermined, Minimal, Overdetermined };

struct SolvabilityClass {
    Solvability kind;
    int excess;
};

std::string to_string(Solvability s);

/// Excess constraint c = m n - K m - n and the resulting class.
SolvabilityClass classify(int m, int n, int dim);

/// Coordinates uniform on [-10, 10], offsets standard normal.
NetworkInstance random_instance(int m, int n, int dim, std::uint64_t seed);

/// Nodes uniform in the box [0, extent_k], offsets N(0, offset_sigma^2).
NetworkInstance random_scene(int m, int n, const Eigen::VectorXd& extent, double offset_sigma, std::uint64_t seed);

/// f_ij = |r_i - s_j| + o_j.
PseudorangeMatrix synthesize_pseudoranges(const NetworkInstance& inst);

/// Adds i.i.d. N(0, sigma^2) to every entry.
PseudorangeMatrix add_noise(const PseudorangeMatrix& f, double sigma, std::uint64_t seed);

}  // namespace mom
