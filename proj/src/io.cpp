#include "lqg/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace lqg {

std::string normalization_tag(Normalization n) {
    switch (n) {
        case Normalization::None: return "none";
        case Normalization::ZeroAvgUnitSemicircle: return "zero_avg_unit_semicircle";
        case Normalization::ZeroAvgVerticalLine0: return "zero_avg_vertical_line_0";
    }
    return "none";
}

Normalization normalization_from_tag(const std::string& s) {
    if (s == "zero_avg_unit_semicircle") return Normalization::ZeroAvgUnitSemicircle;
    if (s == "zero_avg_vertical_line_0") return Normalization::ZeroAvgVerticalLine0;
    return Normalization::None;
}

void write_field(const std::string& path, const FieldSample& f, double gamma) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_field: cannot open " + path);
    const GridSpec& g = f.grid;
    os << "lqg-field 1\n";
    os << "domain " << domain_tag(g.domain) << "\n";
    os << "nx " << g.nx << "\nny " << g.ny << "\n";
    os.precision(17);
    os << "bbox " << g.bbox.x0 << " " << g.bbox.x1 << " " << g.bbox.y0 << " "
       << g.bbox.y1 << "\n";
    os << "gamma " << gamma << "\n";
    os << "normalization " << normalization_tag(f.norm) << "\n";
    os << "seed " << f.seed << "\n";
    os << "log_weight " << f.log_weight << "\n";
    os << "bc";
    for (int s = 0; s < 4; ++s) os << " " << (g.bc[s] == Bc::Dirichlet ? "D" : "F");
    os << "\n";
    os << "periodic " << (g.periodic_y ? 1 : 0) << "\n";
    os << "binary\n";
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

FieldSample read_field(const std::string& path, double* gamma) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_field: cannot open " + path);
    FieldSample f;
    std::string line;
    if (!std::getline(is, line) || line.rfind("lqg-field", 0) != 0)
        throw std::runtime_error("read_field: bad magic in " + path);
    while (std::getline(is, line)) {
        if (line == "binary") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "domain") {
            std::string t;
            ls >> t;
            f.grid.domain = domain_from_tag(t);
        } else if (key == "nx") ls >> f.grid.nx;
        else if (key == "ny") ls >> f.grid.ny;
        else if (key == "bbox")
            ls >> f.grid.bbox.x0 >> f.grid.bbox.x1 >> f.grid.bbox.y0 >> f.grid.bbox.y1;
        else if (key == "gamma") {
            double gm;
            ls >> gm;
            if (gamma) *gamma = gm;
        } else if (key == "normalization") {
            std::string t;
            ls >> t;
            f.norm = normalization_from_tag(t);
        } else if (key == "seed") ls >> f.seed;
        else if (key == "log_weight") ls >> f.log_weight;
        else if (key == "bc") {
            for (int s = 0; s < 4; ++s) {
                std::string t;
                ls >> t;
                f.grid.bc[s] = (t == "D") ? Bc::Dirichlet : Bc::Free;
            }
        } else if (key == "periodic") {
            int p;
            ls >> p;
            f.grid.periodic_y = p != 0;
        }
    }
    f.values.resize(static_cast<size_t>(f.grid.nx) * f.grid.ny);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("read_field: truncated payload in " + path);
    return f;
}

void write_report_json(const std::string& path, const stats::Report& r) {
    nlohmann::json j;
    j["title"] = r.title;
    j["all_pass"] = r.all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["statistic"] = c.statistic;
        jc["target"] = c.target;
        jc["tolerance"] = c.tolerance;
        jc["n"] = c.n;
        jc["pass"] = c.pass;
        jc["note"] = c.note;
        j["checks"].push_back(jc);
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_report_json: cannot open " + path);
    os << j.dump(2) << "\n";
}

stats::Report read_report_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_report_json: cannot open " + path);
    nlohmann::json j;
    is >> j;
    stats::Report r;
    r.title = j.value("title", "");
    for (const auto& jc : j["checks"]) {
        stats::Check c;
        c.name = jc.value("name", "");
        c.statistic = jc.value("statistic", 0.0);
        c.target = jc.value("target", 0.0);
        c.tolerance = jc.value("tolerance", 0.0);
        c.n = jc.value("n", static_cast<std::size_t>(0));
        c.pass = jc.value("pass", false);
        c.note = jc.value("note", "");
        r.checks.push_back(std::move(c));
    }
    return r;
}

} // namespace lqg
