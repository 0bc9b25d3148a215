#include "mom/network.hpp"

#include "mom/errors.hpp"

#include <cmath>
#include <random>

namespace mom {

namespace {

void check_dim(int dim) {
    if (dim != 2 && dim != 3)
        throw ParameterError("dimension must be 2 or 3, got " + std::to_string(dim));
}

void check_point(const Point& p, int dim, const char* what) {
    if (p.size() != dim)
        throw ParameterError(std::string(what) + " has dimension " + std::to_string(p.size()) +
                             ", expected " + std::to_string(dim));
    if (!p.allFinite()) throw ParameterError(std::string(what) + " has non-finite coordinates");
}

}  // namespace

void NetworkInstance::validate() const {
    check_dim(dim);
    if (receivers.empty() || transmitters.empty())
        throw ParameterError("network needs at least one receiver and one transmitter");
    for (const auto& r : receivers) check_point(r, dim, "receiver");
    for (const auto& s : transmitters) check_point(s, dim, "transmitter");
    if (offsets.size() != num_transmitters())
        throw ParameterError("offset count does not match transmitter count");
    if (!offsets.allFinite()) throw ParameterError("non-finite offset");
}

void PseudorangeMatrix::validate() const {
    check_dim(dim);
    if (values.rows() < 1 || values.cols() < 1) throw ParameterError("empty pseudorange matrix");
    if (values.cols() != static_cast<Eigen::Index>(transmitters.size()))
        throw ParameterError("pseudorange columns do not match transmitter count");
    for (const auto& s : transmitters) check_point(s, dim, "transmitter");
    if (!values.allFinite()) throw ParameterError("non-finite pseudorange");
}

PseudorangeMatrix PseudorangeMatrix::subset(const std::vector<int>& receiver_ids,
                                            const std::vector<int>& transmitter_ids) const {
    PseudorangeMatrix out;
    out.dim = dim;
    out.values.resize(static_cast<Eigen::Index>(receiver_ids.size()),
                      static_cast<Eigen::Index>(transmitter_ids.size()));
    for (std::size_t a = 0; a < receiver_ids.size(); ++a) {
        const int i = receiver_ids[a];
        if (i < 0 || i >= num_receivers()) throw ParameterError("receiver index out of range");
        for (std::size_t b = 0; b < transmitter_ids.size(); ++b) {
            const int j = transmitter_ids[b];
            if (j < 0 || j >= num_transmitters()) throw ParameterError("transmitter index out of range");
            out.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = values(i, j);
        }
    }
    for (int j : transmitter_ids) out.transmitters.push_back(transmitters[static_cast<std::size_t>(j)]);
    return out;
}

std::string to_string(Solvability s) {
    switch (s) {
        case Solvability::Underdetermined: return "underdetermined";
        case Solvability::Minimal: return "minimal";
        case Solvability::Overdetermined: return "overdetermined";
    }
    return "unknown";
}

SolvabilityClass classify(int m, int n, int dim) {
    check_dim(dim);
    if (m < 1 || n < 1) throw ParameterError("need m >= 1 and n >= 1");
    const int c = m * n - dim * m - n;
    const auto kind = c < 0 ? Solvability::Underdetermined
                    : c == 0 ? Solvability::Minimal
                             : Solvability::Overdetermined;
    return {kind, c};
}

NetworkInstance random_instance(int m, int n, int dim, std::uint64_t seed) {
    check_dim(dim);
    if (m < 1 || n < 1) throw ParameterError("need m >= 1 and n >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto draw = [&] {
        Point p(dim);
        for (int k = 0; k < dim; ++k) p(k) = coord(rng);
        return p;
    };
    NetworkInstance inst;
    inst.dim = dim;
    for (int i = 0; i < m; ++i) inst.receivers.push_back(draw());
    for (int j = 0; j < n; ++j) inst.transmitters.push_back(draw());
    inst.offsets.resize(n);
    for (int j = 0; j < n; ++j) inst.offsets(j) = normal(rng);
    return inst;
}

NetworkInstance random_scene(int m, int n, const Eigen::VectorXd& extent, double offset_sigma, std::uint64_t seed) {
    const int dim = static_cast<int>(extent.size());
    check_dim(dim);
    if (m < 1 || n < 1) throw ParameterError("need m >= 1 and n >= 1");
    if (!(extent.minCoeff() > 0.0)) throw ParameterError("scene extent must be positive");
    if (!(offset_sigma >= 0.0)) throw ParameterError("offset sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    auto draw = [&] {
        Point p(dim);
        for (int k = 0; k < dim; ++k) p(k) = extent(k) * unit(rng);
        return p;
    };
    NetworkInstance inst;
    inst.dim = dim;
    for (int i = 0; i < m; ++i) inst.receivers.push_back(draw());
    for (int j = 0; j < n; ++j) inst.transmitters.push_back(draw());
    inst.offsets.resize(n);
    for (int j = 0; j < n; ++j) inst.offsets(j) = offset_sigma * normal(rng);
    return inst;
}

PseudorangeMatrix synthesize_pseudoranges(const NetworkInstance& inst) {
    inst.validate();
    PseudorangeMatrix f;
    f.dim = inst.dim;
    f.transmitters = inst.transmitters;
    f.values.resize(inst.num_receivers(), inst.num_transmitters());
    for (int i = 0; i < inst.num_receivers(); ++i)
        for (int j = 0; j < inst.num_transmitters(); ++j)
            f.values(i, j) = (inst.receivers[static_cast<std::size_t>(i)] -
                              inst.transmitters[static_cast<std::size_t>(j)]).norm() +
                             inst.offsets(j);
    return f;
}

PseudorangeMatrix add_noise(const PseudorangeMatrix& f, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ParameterError("noise sigma must be non-negative");
    PseudorangeMatrix out = f;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < out.values.rows(); ++i)
        for (Eigen::Index j = 0; j < out.values.cols(); ++j) out.values(i, j) += noise(rng);
    return out;
}

}  // namespace mom
