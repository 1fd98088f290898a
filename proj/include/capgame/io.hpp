#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "model.hpp"

namespace capgame {

inline constexpr const char* kVersion = "0.1.0";

/// Parameters from a JSON object; every key is required and must be a number.
inline ModelParams params_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParameterError("parameter file must hold a JSON object");
    ModelParams p;
    const std::pair<const char*, double*> fields[] = {{"k", &p.k},         {"mu", &p.mu},   {"sigma", &p.sigma},
                                                      {"beta", &p.beta},   {"rho", &p.rho}, {"c", &p.c},
                                                      {"theta", &p.theta}};
    for (const auto& [key, dst] : fields) {
        if (!j.contains(key)) throw ParameterError(std::string("missing parameter \"") + key + "\"");
        if (!j.at(key).is_number()) throw ParameterError(std::string("parameter \"") + key + "\" must be a number");
        *dst = j.at(key).get<double>();
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const auto& f : fields) known = known || item.key() == f.first;
        if (!known) throw ParameterError("unknown parameter \"" + item.key() + "\"");
    }
    return validate(p);
}

inline ModelParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open parameter file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError("malformed parameter file " + path + ": " + e.what());
    }
    return params_from_json(j);
}

inline nlohmann::json params_to_json(const ModelParams& p) {
    return {{"k", p.k}, {"mu", p.mu}, {"sigma", p.sigma}, {"beta", p.beta},
            {"rho", p.rho}, {"c", p.c}, {"theta", p.theta}};
}

/// Number at 12 significant digits.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string params_line(const ModelParams& p) {
    std::ostringstream s;
    s << "k=" << fmt(p.k) << " mu=" << fmt(p.mu) << " sigma=" << fmt(p.sigma) << " beta=" << fmt(p.beta)
      << " rho=" << fmt(p.rho) << " c=" << fmt(p.c) << " theta=" << fmt(p.theta);
    return s.str();
}

/// CSV file with a leading comment line (tool, version, parameters, extra settings) and a header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const ModelParams& p, const std::vector<std::string>& header,
              const std::string& extra = "")
        : out_(path), width_(header.size()) {
        if (!out_) throw ParameterError("cannot write " + path);
        out_ << "# capgame " << kVersion << ' ' << params_line(p);
        if (!extra.empty()) out_ << ' ' << extra;
        out_ << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    /// Cells are numbers or preformatted strings.
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw ParameterError("CsvWriter: row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    void row(std::initializer_list<double> values) {
        std::vector<std::string> cells;
        for (double v : values) cells.push_back(fmt(v));
        row(cells);
    }

private:
    std::ofstream out_;
    std::size_t width_;
};

}  // namespace capgame
