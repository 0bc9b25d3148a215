#pragma once

#include "mom/network.hpp"
#include "mom/solution.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace mom {

using Json = nlohmann::ordered_json;

/// {"dim": K, "receivers": [[...]], "transmitters": [[...]], "offsets": [...]}
Json to_json(const NetworkInstance& inst);
NetworkInstance instance_from_json(const Json& j);

/// Instance layout plus "residual" and "feasible".
Json to_json(const MomSolution& sol, const PseudorangeMatrix& f);
MomSolution solution_from_json(const Json& j);

/// Transmitter block, one blank line, pseudorange block:
///
///   transmitter_id,x,y[,z]
///   0,<x>,<y>[,<z>]
///   ...
///
///   receiver_id,f_0,...,f_{n-1}
///   0,<f_00>,...
///
/// Ids must run 0, 1, ... in order.
std::string to_csv(const PseudorangeMatrix& f);
PseudorangeMatrix pseudoranges_from_csv(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

NetworkInstance read_instance(const std::string& path);
void write_instance(const std::string& path, const NetworkInstance& inst);
PseudorangeMatrix read_pseudoranges(const std::string& path);
void write_pseudoranges(const std::string& path, const PseudorangeMatrix& f);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace mom
