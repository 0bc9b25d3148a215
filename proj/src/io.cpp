#include "mom/io.hpp"

#include "mom/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mom {

namespace {

Json point_list(const std::vector<Point>& pts) {
    Json out = Json::array();
    for (const auto& p : pts) out.push_back(std::vector<double>(p.data(), p.data() + p.size()));
    return out;
}

std::vector<Point> points_from(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ParseError(std::string("missing array '") + key + "'", 0);
    std::vector<Point> out;
    for (const auto& row : j.at(key)) {
        const auto v = row.get<std::vector<double>>();
        out.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return out;
}

Eigen::VectorXd vector_from(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) throw ParseError(std::string("missing array '") + key + "'", 0);
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view field, int line) {
    field = trim(field);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), x);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError("'" + std::string(field) + "' is not a number", line);
    return x;
}

}  // namespace

Json to_json(const NetworkInstance& inst) {
    inst.validate();
    Json j;
    j["dim"] = inst.dim;
    j["receivers"] = point_list(inst.receivers);
    j["transmitters"] = point_list(inst.transmitters);
    j["offsets"] = std::vector<double>(inst.offsets.data(), inst.offsets.data() + inst.offsets.size());
    return j;
}

NetworkInstance instance_from_json(const Json& j) {
    try {
        NetworkInstance inst;
        inst.dim = j.at("dim").get<int>();
        inst.receivers = points_from(j, "receivers");
        inst.transmitters = points_from(j, "transmitters");
        inst.offsets = vector_from(j, "offsets");
        inst.validate();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed instance: ") + e.what(), 0);
    }
}

Json to_json(const MomSolution& sol, const PseudorangeMatrix& f) {
    Json j;
    j["dim"] = f.dim;
    j["receivers"] = point_list(sol.receivers);
    j["transmitters"] = point_list(f.transmitters);
    j["offsets"] = std::vector<double>(sol.offsets.data(), sol.offsets.data() + sol.offsets.size());
    j["residual"] = sol.residual;
    j["feasible"] = sol.feasible;
    return j;
}

MomSolution solution_from_json(const Json& j) {
    try {
        MomSolution sol;
        sol.receivers = points_from(j, "receivers");
        sol.offsets = vector_from(j, "offsets");
        sol.residual = j.at("residual").get<double>();
        sol.feasible = j.at("feasible").get<bool>();
        return sol;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed solution: ") + e.what(), 0);
    }
}

std::string format_double(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string to_csv(const PseudorangeMatrix& f) {
    f.validate();
    static const char* axes[] = {"x", "y", "z"};
    std::string out = "transmitter_id";
    for (int k = 0; k < f.dim; ++k) out += std::string(",") + axes[k];
    out += '\n';
    for (int j = 0; j < f.num_transmitters(); ++j) {
        out += std::to_string(j);
        for (int k = 0; k < f.dim; ++k) out += "," + format_double(f.transmitters[static_cast<std::size_t>(j)](k));
        out += '\n';
    }
    out += "\nreceiver_id";
    for (int j = 0; j < f.num_transmitters(); ++j) out += ",f_" + std::to_string(j);
    out += '\n';
    for (int i = 0; i < f.num_receivers(); ++i) {
        out += std::to_string(i);
        for (int j = 0; j < f.num_transmitters(); ++j) out += "," + format_double(f.values(i, j));
        out += '\n';
    }
    return out;
}

PseudorangeMatrix pseudoranges_from_csv(std::string_view text) {
    std::vector<std::string_view> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

    std::size_t k = 0;
    auto lineno = [&](std::size_t idx) { return static_cast<int>(idx) + 1; };
    if (lines.empty()) throw ParseError("empty pseudorange file", 1);

    const auto header = split(trim(lines[0]), ',');
    if (trim(header[0]) != "transmitter_id")
        throw ParseError("expected header starting with 'transmitter_id'", 1);
    PseudorangeMatrix f;
    f.dim = static_cast<int>(header.size()) - 1;
    if (f.dim != 2 && f.dim != 3) throw ParseError("transmitter header must have 2 or 3 coordinates", 1);

    for (k = 1; k < lines.size() && !trim(lines[k]).empty(); ++k) {
        const auto fields = split(trim(lines[k]), ',');
        if (static_cast<int>(fields.size()) != f.dim + 1)
            throw ParseError("expected " + std::to_string(f.dim + 1) + " fields", lineno(k));
        if (parse_number(fields[0], lineno(k)) != static_cast<double>(f.transmitters.size()))
            throw ParseError("transmitter ids must be 0, 1, ... in order", lineno(k));
        Point s(f.dim);
        for (int c = 0; c < f.dim; ++c) s(c) = parse_number(fields[static_cast<std::size_t>(c) + 1], lineno(k));
        f.transmitters.push_back(s);
    }
    if (f.transmitters.empty()) throw ParseError("no transmitters", 2);
    if (k >= lines.size()) throw ParseError("missing pseudorange block", lineno(k));
    ++k;  // blank separator
    if (k >= lines.size()) throw ParseError("missing pseudorange block", lineno(k));

    const auto n = f.transmitters.size();
    const auto mheader = split(trim(lines[k]), ',');
    if (trim(mheader[0]) != "receiver_id") throw ParseError("expected header starting with 'receiver_id'", lineno(k));
    if (mheader.size() != n + 1)
        throw ParseError("pseudorange header has " + std::to_string(mheader.size() - 1) + " columns for " +
                             std::to_string(n) + " transmitters",
                         lineno(k));

    std::vector<std::vector<double>> rows;
    for (++k; k < lines.size(); ++k) {
        const auto fields = split(trim(lines[k]), ',');
        if (fields.size() != n + 1) throw ParseError("expected " + std::to_string(n + 1) + " fields", lineno(k));
        if (parse_number(fields[0], lineno(k)) != static_cast<double>(rows.size()))
            throw ParseError("receiver ids must be 0, 1, ... in order", lineno(k));
        std::vector<double> row;
        for (std::size_t c = 1; c < fields.size(); ++c) row.push_back(parse_number(fields[c], lineno(k)));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no receivers", lineno(k));

    f.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < n; ++j)
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

NetworkInstance read_instance(const std::string& path) {
    const std::string text = read_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string(e.what()), 0);
    }
    return instance_from_json(j);
}

void write_instance(const std::string& path, const NetworkInstance& inst) {
    write_file(path, to_json(inst).dump(2) + "\n");
}

PseudorangeMatrix read_pseudoranges(const std::string& path) { return pseudoranges_from_csv(read_file(path)); }

void write_pseudoranges(const std::string& path, const PseudorangeMatrix& f) { write_file(path, to_csv(f)); }

}  // namespace mom
