#include "singlim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace singlim {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& required(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": expected a finite number");
    return v;
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

Point point(const json& j, int dim, const std::string& where) {
    const std::vector<double> v = numbers(j, where);
    if (static_cast<int>(v.size()) != dim) {
        throw ConfigError(where + ": expected " + std::to_string(dim) + " coordinates");
    }
    Point p{0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = v[a];
    return p;
}

Box box(const json& j, int dim, const std::string& where) {
    check_keys(j, {"lo", "hi"}, where);
    Box b{dim, point(required(j, "lo", where), dim, where + ".lo"),
          point(required(j, "hi", where), dim, where + ".hi")};
    for (int a = 0; a < dim; ++a) {
        if (!(b.lo[a] < b.hi[a])) throw ConfigError(where + ": lo must be below hi");
    }
    return b;
}

std::vector<Box> boxes(const json& j, int dim, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of boxes");
    std::vector<Box> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        out.push_back(box(j[k], dim, where + "[" + std::to_string(k) + "]"));
    }
    return out;
}

ProblemConfig parse_problem(const json& j) {
    const std::string where = "problem";
    check_keys(j, {"domain", "cells", "coefficients", "datum", "support", "gamma"}, where);
    ProblemConfig p;

    const json& domain = required(j, "domain", where);
    check_keys(domain, {"lo", "hi"}, "problem.domain");
    const std::vector<double> lo = numbers(required(domain, "lo", "problem.domain"), "problem.domain.lo");
    if (lo.size() != 1 && lo.size() != 2) {
        throw ConfigError("problem.domain.lo: dimension must be 1 or 2");
    }
    p.dim = static_cast<int>(lo.size());
    const Box d = box(domain, p.dim, "problem.domain");
    p.lo = d.lo;
    p.hi = d.hi;

    const json& cells = required(j, "cells", where);
    if (!cells.is_array() || static_cast<int>(cells.size()) != p.dim) {
        throw ConfigError("problem.cells: expected one integer per axis");
    }
    for (int a = 0; a < p.dim; ++a) {
        if (!cells[a].is_number_integer()) throw ConfigError("problem.cells: expected integers");
        p.cells[a] = cells[a].get<int>();
    }

    if (j.contains("coefficients")) {
        const json& c = j.at("coefficients");
        check_keys(c, {"a11", "a12", "a21", "a22"}, "problem.coefficients");
        if (c.contains("a11")) p.coefficients.a11 = number(c.at("a11"), "problem.coefficients.a11");
        if (c.contains("a12")) p.coefficients.a12 = number(c.at("a12"), "problem.coefficients.a12");
        if (c.contains("a21")) p.coefficients.a21 = number(c.at("a21"), "problem.coefficients.a21");
        if (c.contains("a22")) p.coefficients.a22 = number(c.at("a22"), "problem.coefficients.a22");
    }

    const json& datum = required(j, "datum", where);
    require_object(datum, "problem.datum");
    const json& kind = required(datum, "kind", "problem.datum");
    if (kind == "constant") {
        check_keys(datum, {"kind", "value"}, "problem.datum");
        p.datum = ConstantDatum{number(required(datum, "value", "problem.datum"), "problem.datum.value")};
    } else if (kind == "indicator") {
        check_keys(datum, {"kind", "value", "lo", "hi"}, "problem.datum");
        json b = json::object();
        b["lo"] = required(datum, "lo", "problem.datum");
        b["hi"] = required(datum, "hi", "problem.datum");
        p.datum = IndicatorDatum{
            number(required(datum, "value", "problem.datum"), "problem.datum.value"),
            box(b, p.dim, "problem.datum")};
    } else {
        throw ConfigError("problem.datum.kind: expected 'constant' or 'indicator'");
    }

    const json& support = required(j, "support", where);
    if (support == "compactly_contained") {
        p.support = SupportKind::compactly_contained;
    } else if (support == "strictly_positive") {
        p.support = SupportKind::strictly_positive;
    } else if (support == "general") {
        p.support = SupportKind::general;
    } else {
        throw ConfigError(
            "problem.support: expected 'compactly_contained', 'strictly_positive' or 'general'");
    }
    if (j.contains("gamma")) p.gamma = number(j.at("gamma"), "problem.gamma");
    return p;
}

SweepConfig parse_sweep(const json& j, int dim) {
    const std::string where = "sweep";
    check_keys(j, {"n", "m_schedule", "tolerances", "compacta", "mass_regions", "shell_distances"},
               where);
    SweepConfig s;
    if (j.contains("n")) s.n_list = numbers(j.at("n"), "sweep.n");
    if (j.contains("m_schedule")) s.m_schedule = numbers(j.at("m_schedule"), "sweep.m_schedule");
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        const std::string tw = "sweep.tolerances";
        check_keys(t, {"newton_max_iterations", "newton_update", "newton_residual", "m_gap"}, tw);
        if (t.contains("newton_max_iterations")) {
            if (!t.at("newton_max_iterations").is_number_integer()) {
                throw ConfigError(tw + ".newton_max_iterations: expected an integer");
            }
            s.solver.newton.max_iterations = t.at("newton_max_iterations").get<int>();
        }
        if (t.contains("newton_update")) {
            s.solver.newton.update_tolerance = number(t.at("newton_update"), tw + ".newton_update");
        }
        if (t.contains("newton_residual")) {
            s.solver.newton.residual_tolerance =
                number(t.at("newton_residual"), tw + ".newton_residual");
        }
        if (t.contains("m_gap")) s.solver.m_gap_tolerance = number(t.at("m_gap"), tw + ".m_gap");
    }
    if (j.contains("compacta")) s.compacta = boxes(j.at("compacta"), dim, "sweep.compacta");
    if (j.contains("mass_regions")) {
        s.mass_regions = boxes(j.at("mass_regions"), dim, "sweep.mass_regions");
    }
    if (j.contains("shell_distances")) {
        s.shell_distances = numbers(j.at("shell_distances"), "sweep.shell_distances");
    }

    for (std::size_t k = 0; k < s.n_list.size(); ++k) {
        if (!(s.n_list[k] >= 3.0)) throw ConfigError("sweep.n: every n must be >= 3");
        if (k > 0 && !(s.n_list[k] > s.n_list[k - 1])) {
            throw ConfigError("sweep.n: must be strictly increasing");
        }
    }
    if (s.m_schedule.empty()) throw ConfigError("sweep.m_schedule: must not be empty");
    for (std::size_t k = 0; k < s.m_schedule.size(); ++k) {
        if (!(s.m_schedule[k] >= 1.0)) throw ConfigError("sweep.m_schedule: entries must be >= 1");
        if (k > 0 && !(s.m_schedule[k] > s.m_schedule[k - 1])) {
            throw ConfigError("sweep.m_schedule: must be strictly increasing");
        }
    }
    if (s.solver.newton.max_iterations < 1) {
        throw ConfigError("sweep.tolerances.newton_max_iterations: must be positive");
    }
    if (!(s.solver.newton.update_tolerance > 0.0) || !(s.solver.newton.residual_tolerance > 0.0) ||
        !(s.solver.m_gap_tolerance > 0.0)) {
        throw ConfigError("sweep.tolerances: tolerances must be positive");
    }
    for (double d : s.shell_distances) {
        if (!(d >= 0.0)) throw ConfigError("sweep.shell_distances: must be nonnegative");
    }
    return s;
}

OnedConfig parse_oned(const json& j) {
    check_keys(j, {"n", "geometry", "radius", "samples"}, "oned");
    OnedConfig o;
    if (j.contains("n")) o.n_list = numbers(j.at("n"), "oned.n");
    for (double n : o.n_list) {
        if (!(n >= 3.0)) throw ConfigError("oned.n: every n must be >= 3");
    }
    if (j.contains("geometry")) {
        const json& g = j.at("geometry");
        if (g == "interval") {
            o.geometry = oned::Geometry::interval;
        } else if (g == "inner_source") {
            o.geometry = oned::Geometry::inner_source;
        } else {
            throw ConfigError("oned.geometry: expected 'interval' or 'inner_source'");
        }
    }
    if (j.contains("radius")) o.radius = number(j.at("radius"), "oned.radius");
    if (!(o.radius > 0.0)) throw ConfigError("oned.radius: must be positive");
    if (j.contains("samples")) {
        if (!j.at("samples").is_number_integer()) throw ConfigError("oned.samples: expected an integer");
        o.samples = j.at("samples").get<int>();
    }
    if (o.samples < 2) throw ConfigError("oned.samples: need at least 2");
    return o;
}

OutputConfig parse_output(const json& j) {
    check_keys(j, {"directory", "formats"}, "output");
    OutputConfig o;
    if (j.contains("directory")) {
        if (!j.at("directory").is_string()) throw ConfigError("output.directory: expected a string");
        o.directory = j.at("directory").get<std::string>();
    }
    if (j.contains("formats")) {
        const json& f = j.at("formats");
        if (!f.is_array()) throw ConfigError("output.formats: expected an array");
        o.csv = o.json = o.svg = false;
        for (const json& item : f) {
            if (item == "csv") {
                o.csv = true;
            } else if (item == "json") {
                o.json = true;
            } else if (item == "svg") {
                o.svg = true;
            } else {
                throw ConfigError("output.formats: expected 'csv', 'json' or 'svg'");
            }
        }
    }
    return o;
}

}  // namespace

ProblemSpec ExperimentConfig::make_problem() const { return make_problem(problem.gamma); }

ProblemSpec ExperimentConfig::make_problem(double gamma) const {
    const ProblemConfig& p = problem;
    const std::span<const double> lo(p.lo.data(), p.dim);
    const std::span<const double> hi(p.hi.data(), p.dim);
    const std::span<const int> cells(p.cells.data(), p.dim);
    const Grid grid = make_uniform_grid(lo, hi, cells);
    return ProblemSpec(grid, CoefficientField::constant(grid, p.coefficients), p.datum, gamma,
                       p.support);
}

SweepOptions ExperimentConfig::sweep_options() const {
    SweepOptions o;
    o.n_list = sweep.n_list;
    o.m_schedule = sweep.m_schedule;
    o.solver = sweep.solver;
    o.compacta = sweep.compacta;
    o.mass_regions = sweep.mass_regions;
    o.shell_distances = sweep.shell_distances;
    return o;
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    check_keys(root, {"problem", "sweep", "oned", "output"}, "config");

    ExperimentConfig cfg;
    try {
        cfg.problem = parse_problem(required(root, "problem", "config"));
        if (root.contains("sweep")) cfg.sweep = parse_sweep(root.at("sweep"), cfg.problem.dim);
        if (root.contains("oned")) cfg.oned = parse_oned(root.at("oned"));
        if (root.contains("output")) cfg.output = parse_output(root.at("output"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    try {
        (void)cfg.make_problem();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("config: invalid problem: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

}  // namespace singlim
