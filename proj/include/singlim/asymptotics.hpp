#pragma once

#include <optional>
#include <string>
#include <vector>

#include "singlim/elliptic.hpp"
#include "singlim/grid.hpp"
#include "singlim/singular_solver.hpp"

namespace singlim {

struct SweepOptions {
    std::vector<double> n_list;
    std::vector<double> m_schedule = default_m_schedule();
    SingularOptions solver;
    /// Boxes for interior minima; the first one also carries the fitted M.
    std::vector<Box> compacta;
    /// Boxes for local masses of f / u^n.
    std::vector<Box> mass_regions;
    /// Shell widths around the support boundary for the histogram.
    std::vector<double> shell_distances;
    /// Upper bound on concurrent solves; 0 picks the hardware concurrency.
    unsigned max_threads = 0;
};

struct SweepRow {
    double n = 0.0;
    bool ok = false;
    std::string error;

    double sup_norm = 0.0;
    std::vector<double> compacta_min;
    double total_mass = 0.0;
    std::vector<double> local_masses;
    /// Only for M = I.
    std::optional<double> quasilinear_residual;
    std::optional<double> certificate;
    /// sup of z_n^+ over the first compactum.
    std::optional<double> fitted_m;
    double v_sup = 0.0;
    double v_h1_seminorm = 0.0;
    bool stabilized = false;
    double final_gap = 0.0;
    int newton_iterations = 0;
    std::optional<GridFunction> u;
};

struct MeasureHistogram {
    /// Nodal masses f / u^n times the dual cell volume; zero on the boundary.
    GridFunction cell_masses;
    double total = 0.0;
    std::vector<double> shell_distances;
    /// Share of the total mass within each distance of the support boundary.
    std::vector<double> shell_fractions;
};

struct LimitCheck {
    std::vector<Atom> atoms;
    GridFunction reconstructed;
    /// max |reconstructed - u_limit|.
    double difference = 0.0;
};

struct SweepReport {
    ProblemSpec spec;
    std::vector<double> n_list;
    std::vector<SweepRow> rows;

    /// Largest n that solved, with its solution.
    std::optional<double> limit_n;
    std::optional<GridFunction> limit_u;
    std::optional<MeasureHistogram> histogram;
    std::optional<LimitCheck> limit_check;
    std::string limit_note;
};

/// One solve_singular per n, run concurrently. A failing n is recorded in its
/// row and the sweep carries on.
SweepReport run_sweep(const ProblemSpec& spec, const SweepOptions& options);

/// z_n = log(n+1) - (n+1) log u_n per node; +inf where u_n = 0.
std::vector<double> z_diagnostic(const GridFunction& u, double n);

/// sup z^+ over the nodes of `box`. Nodes with z = +inf are skipped when
/// f vanishes there.
double fitted_lower_bound_constant(const std::vector<double>& z, const GridFunction& f,
                                   const Box& box);

/// sqrt(sum over grid edges of (difference / h)^2 times the cell volume).
double h1_seminorm(const GridFunction& v);

/// Requires an indicator datum; distances are measured to the boundary of its box.
MeasureHistogram measure_histogram(const GridFunction& u, const ProblemSpec& spec, double n,
                                   const std::vector<double>& shell_distances);

/// Collapses the histogram into atoms and compares the measure-data solution
/// with u_limit. Clusters are runs of nodes holding at least 1% of the mass;
/// every node's mass is then credited to the nearest cluster and the atom sits
/// at the mass-weighted centroid. 1-D only.
LimitCheck limit_equation_check(const GridFunction& u_limit, const MeasureHistogram& hist,
                                const CoefficientField& m);

struct ConjectureReport {
    double n = 0.0;
    GridFunction u;
    GridFunction harmonic;
    /// sup |harmonic - u_n| on the nodes outside the closed support box.
    double harmonic_difference = 0.0;
    /// sup v_n on the nodes outside the open support box.
    double v_outside = 0.0;
    bool stabilized = false;
};

/// Harmonic extension of the value 1 on the closed support box, compared with
/// u_n. Reports numbers only. Requires M = I and an indicator datum.
ConjectureReport conjecture_experiment(const ProblemSpec& spec, double n,
                                       const std::vector<double>& m_schedule = default_m_schedule(),
                                       const SingularOptions& options = {});

}  // namespace singlim
