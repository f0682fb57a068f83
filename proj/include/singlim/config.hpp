#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "singlim/asymptotics.hpp"
#include "singlim/grid.hpp"
#include "singlim/oned.hpp"

namespace singlim {

struct ProblemConfig {
    int dim = 1;
    Point lo{0.0, 0.0};
    Point hi{1.0, 0.0};
    std::array<int, 2> cells{0, 0};
    CoefficientMatrix coefficients;
    DatumSpec datum = ConstantDatum{1.0};
    SupportKind support = SupportKind::general;
    double gamma = 1.0;
};

struct SweepConfig {
    std::vector<double> n_list;
    std::vector<double> m_schedule = default_m_schedule();
    SingularOptions solver;
    std::vector<Box> compacta;
    std::vector<Box> mass_regions;
    std::vector<double> shell_distances;
};

struct OnedConfig {
    std::vector<double> n_list;
    oned::Geometry geometry = oned::Geometry::inner_source;
    double radius = 1.0;
    int samples = 201;
};

struct OutputConfig {
    std::filesystem::path directory = "out";
    bool csv = true;
    bool json = true;
    bool svg = true;
};

/// One experiment. Parsing validates the problem block by building the
/// ProblemSpec, so a config that loads can be solved.
struct ExperimentConfig {
    ProblemConfig problem;
    SweepConfig sweep;
    OnedConfig oned;
    OutputConfig output;

    ProblemSpec make_problem() const;
    ProblemSpec make_problem(double gamma) const;
    SweepOptions sweep_options() const;
};

/// Throws ConfigError on malformed JSON, unknown keys or invalid values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace singlim
