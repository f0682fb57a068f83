#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <optional>
#include <vector>

#include "singlim/elliptic.hpp"
#include "singlim/grid.hpp"

namespace singlim {

struct NewtonOptions {
    int max_iterations = 200;
    /// Stop when |step|_inf <= update_tolerance * max(1, |u|_inf).
    double update_tolerance = 1e-12;
    /// Stop when |A u - g(u)|_inf / (1 + |g(u)|_inf) <= residual_tolerance.
    double residual_tolerance = 1e-11;
    /// Largest multiple of the Newton step tried while the trial point stays
    /// a subsolution.
    double max_expansion = 1048576.0;
};

/// Converged solution of A u = f / (u + 1/m)^gamma for one regularisation index m.
struct RegularizedIterate {
    double m = 1.0;
    GridFunction u;
    int iterations = 0;
    double residual = 0.0;
};

/// Newton failed to converge; carries the per-iteration scaled residuals.
class NonlinearSolveFailure : public Error {
public:
    NonlinearSolveFailure(const std::string& what, std::vector<double> residual_trace,
                          GridFunction last_iterate)
        : Error(what), trace_(std::move(residual_trace)), last_(std::move(last_iterate)) {}
    const std::vector<double>& residual_trace() const noexcept { return trace_; }
    const GridFunction& last_iterate() const noexcept { return last_; }

private:
    std::vector<double> trace_;
    GridFunction last_;
};

/// Solver for the regularised problems of one ProblemSpec. Holds the
/// assembled operator and its factorisation workspace; not thread-safe,
/// use one instance per thread.
class RegularizedSolver {
public:
    explicit RegularizedSolver(const ProblemSpec& spec, NewtonOptions options = {});
    ~RegularizedSolver();
    RegularizedSolver(const RegularizedSolver&) = delete;
    RegularizedSolver& operator=(const RegularizedSolver&) = delete;

    /// Solves for index m (m = +inf drops the regularisation). The start
    /// point is clipped to u >= 0; zero when omitted.
    RegularizedIterate solve(double m, const GridFunction* start = nullptr);

    const SparseOperator& op() const noexcept { return op_; }

private:
    struct Workspace;
    const ProblemSpec& spec_;
    NewtonOptions options_;
    SparseOperator op_;
    std::unique_ptr<Workspace> work_;
};

RegularizedIterate solve_regularized(const ProblemSpec& spec, double m,
                                     const NewtonOptions& options = {});

/// m = 4^k for k = 0..12.
std::vector<double> default_m_schedule();

struct SingularOptions {
    NewtonOptions newton;
    /// Outer loop stops once max |u_m - u_prev| <= m_gap_tolerance.
    double m_gap_tolerance = 1e-9;
};

struct SingularSolution {
    ProblemSpec spec;
    GridFunction u;
    std::vector<RegularizedIterate> trace;
    /// False when the schedule ran out before the gap tolerance was met.
    bool stabilized = false;
    double final_gap = std::numeric_limits<double>::infinity();
    double sup_norm = 0.0;
    std::vector<double> compacta_min;
    /// Discrete integral of f / u^gamma.
    double total_mass = 0.0;
};

/// Runs the regularised scheme along an increasing schedule of m, warm
/// starting each solve from the previous one.
SingularSolution solve_singular(const ProblemSpec& spec, const std::vector<double>& m_schedule,
                                const std::vector<Box>& compacta = {},
                                const SingularOptions& options = {});

/// Nodal f / u^gamma evaluated in the log domain with u floored at 1e-300.
/// Values too large for a double are capped at 1e300.
GridFunction singular_load(const GridFunction& u, const GridFunction& f, double gamma);

/// Discrete integral of f / u^gamma over the interior nodes, optionally
/// restricted to a closed box.
double load_mass(const GridFunction& u, const GridFunction& f, double gamma,
                 const Box* region = nullptr);

/// Minimum of u over the grid nodes inside the closed box (+inf when empty).
double min_over(const GridFunction& u, const Box& box);

/// v = u^(gamma+1) / (gamma+1), nodewise.
GridFunction to_quasilinear(const GridFunction& u, double gamma);
/// Inverse power map u = ((gamma+1) v)^(1/(gamma+1)).
GridFunction from_quasilinear(const GridFunction& v, double gamma);

struct ResidualReport {
    GridFunction field;        ///< zero on masked and boundary nodes
    double norm = 0.0;         ///< max |residual| over evaluated nodes
    std::size_t evaluated = 0;
    std::size_t masked = 0;
    bool vacuous() const noexcept { return evaluated == 0; }
};

/// A u - f / u^gamma at interior nodes with u > 0.
ResidualReport singular_residual(const GridFunction& u, const ProblemSpec& spec);

/// -lap v + B |grad v|^2 / v - f with B = gamma / (gamma + 1) (B = 1 for
/// gamma = +inf), centered differences, on interior nodes where v >= floor.
ResidualReport quasilinear_residual(const GridFunction& v, double gamma, const GridFunction& f,
                                    double floor = 1e-10);

/// |u|_inf^(gamma+1) / ((gamma+1) |f|_inf). Throws UndefinedCertificate when f == 0.
double linfty_certificate(const GridFunction& u, double gamma, const GridFunction& f);

}  // namespace singlim
