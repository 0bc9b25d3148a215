#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mom {

/// Base class of every error raised by the library. `code()` is a stable
/// machine-readable identifier used by the CLI's JSON error output.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ParameterError : Error {
    explicit ParameterError(const std::string& what) : Error("parameter_error", what) {}
};

/// Eliminating transmitters are collinear (2D) or coplanar (3D).
struct DegenerateTransmitters : Error {
    explicit DegenerateTransmitters(const std::string& what) : Error("degenerate_transmitters", what) {}
};

/// Two receivers are (numerically) equidistant from a transmitter whose offset
/// is being eliminated.
struct DegenerateMeasurement : Error {
    explicit DegenerateMeasurement(const std::string& what) : Error("degenerate_measurement", what) {}
};

struct NoRealSolution : Error {
    explicit NoRealSolution(const std::string& what) : Error("no_real_solution", what) {}
};

struct InfeasibleDistance : Error {
    explicit InfeasibleDistance(const std::string& what) : Error("infeasible_distance", what) {}
};

/// Carries one diagnostic line per failed attempt.
struct SolveFailed : Error {
    explicit SolveFailed(const std::string& what, std::vector<std::string> attempts = {})
        : Error("solve_failed", with_attempts(what, attempts)), attempts_(std::move(attempts)) {}

    const std::vector<std::string>& attempts() const noexcept { return attempts_; }

private:
    static std::string with_attempts(const std::string& what, const std::vector<std::string>& attempts) {
        std::string out = what;
        for (const auto& a : attempts) out += "; " + a;
        return out;
    }

    std::vector<std::string> attempts_;
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io_error", what) {}
};

struct ParseError : Error {
    ParseError(const std::string& what, int line)
        : Error("parse_error", line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace mom
