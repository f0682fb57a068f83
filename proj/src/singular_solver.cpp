#include "singlim/singular_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace singlim {
namespace {

constexpr double kLogCap = 690.0;  // exp(690) ~ 1e299
constexpr double kUFloor = 1e-300;
constexpr double kRoundingSlack = 1e-12;

// f * (u + eps)^-gamma in the log domain, capped to stay finite.
double regularized_load(double f, double u, double eps, double gamma) {
    if (f <= 0.0) return 0.0;
    const double base = std::max(u + eps, kUFloor);
    const double e = std::log(f) - gamma * std::log(base);
    return std::exp(std::min(e, kLogCap));
}

}  // namespace

struct RegularizedSolver::Workspace {
    ShiftedSolver shifted;
    Eigen::VectorXd f;
    explicit Workspace(const SparseOperator& op) : shifted(op) {}
};

RegularizedSolver::RegularizedSolver(const ProblemSpec& spec, NewtonOptions options)
    : spec_(spec), options_(options), op_(assemble(spec.grid(), spec.coefficients())) {
    work_ = std::make_unique<Workspace>(op_);
    work_->f = op_.restrict_to_interior(spec.f());
}

RegularizedSolver::~RegularizedSolver() = default;

RegularizedIterate RegularizedSolver::solve(double m, const GridFunction* start) {
    if (!(m >= 1.0)) throw InvalidArgument("solve_regularized: m must be >= 1");
    const double eps = std::isinf(m) ? 0.0 : 1.0 / m;
    const double gamma = spec_.gamma();
    const auto& a = op_.matrix();
    const Eigen::VectorXd& f = work_->f;
    const Eigen::Index n = f.size();

    Eigen::VectorXd u = start ? op_.restrict_to_interior(*start) : Eigen::VectorXd::Zero(n);
    u = u.cwiseMax(0.0);
    if (eps == 0.0) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (f[i] > 0.0 && !(u[i] > 0.0)) {
                throw InvalidArgument(
                    "solve_regularized: m = inf needs a start point positive on {f > 0}");
            }
        }
    }

    const Eigen::VectorXd diag = a.diagonal();
    Eigen::VectorXd g(n);
    auto load = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        for (Eigen::Index i = 0; i < n; ++i) out[i] = regularized_load(f[i], x[i], eps, gamma);
    };
    auto is_subsolution = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd gx(n);
        load(x, gx);
        const Eigen::VectorXd ax = a * x;
        // Rows of f = 0 are affine in the step length, so allow rounding.
        for (Eigen::Index i = 0; i < n; ++i) {
            const double slack = f[i] > 0.0 ? 0.0 : kRoundingSlack * diag[i] * std::abs(x[i]);
            if (ax[i] - gx[i] > slack) return false;
        }
        return true;
    };

    std::vector<double> trace;
    Eigen::VectorXd shift(n);
    for (int it = 0; it <= options_.max_iterations; ++it) {
        load(u, g);
        const Eigen::VectorXd residual = a * u - g;
        const double g_norm = n ? g.lpNorm<Eigen::Infinity>() : 0.0;
        const double scaled = n ? residual.lpNorm<Eigen::Infinity>() / (1.0 + g_norm) : 0.0;
        trace.push_back(scaled);
        if (scaled <= options_.residual_tolerance) {
            return {m, op_.extend_by_zero(u), it, scaled};
        }
        if (it == options_.max_iterations) break;

        // Newton direction for F(u) = A u - g(u). F is concave with an
        // M-matrix Jacobian, so the clipped Newton point is a subsolution.
        for (Eigen::Index i = 0; i < n; ++i) {
            shift[i] = gamma * g[i] / std::max(u[i] + eps, kUFloor);
        }
        const Eigen::VectorXd delta = work_->shifted.solve(shift, -residual);

        Eigen::VectorXd next = (u + delta).cwiseMax(0.0);
        // Far from the solution Newton creeps by ~(u + eps) / gamma per step;
        // stretch the step while the trial point remains a subsolution.
        for (double lambda = 2.0; lambda <= options_.max_expansion; lambda *= 2.0) {
            Eigen::VectorXd trial = (u + lambda * delta).cwiseMax(0.0);
            if (!is_subsolution(trial)) break;
            next = std::move(trial);
        }

        const double step = (next - u).lpNorm<Eigen::Infinity>();
        u = std::move(next);
        const double scale = std::max(1.0, u.lpNorm<Eigen::Infinity>());
        if (step <= options_.update_tolerance * scale) {
            load(u, g);
            const double final_scaled =
                (a * u - g).lpNorm<Eigen::Infinity>() / (1.0 + g.lpNorm<Eigen::Infinity>());
            return {m, op_.extend_by_zero(u), it + 1, final_scaled};
        }
    }

    std::ostringstream msg;
    msg << "solve_regularized: no convergence after " << options_.max_iterations
        << " Newton iterations (m = " << m << ", gamma = " << gamma
        << ", last scaled residual = " << trace.back() << ")";
    throw NonlinearSolveFailure(msg.str(), std::move(trace), op_.extend_by_zero(u));
}

RegularizedIterate solve_regularized(const ProblemSpec& spec, double m,
                                     const NewtonOptions& options) {
    RegularizedSolver solver(spec, options);
    return solver.solve(m);
}

std::vector<double> default_m_schedule() {
    std::vector<double> schedule;
    double m = 1.0;
    for (int k = 0; k <= 12; ++k, m *= 4.0) schedule.push_back(m);
    return schedule;
}

SingularSolution solve_singular(const ProblemSpec& spec, const std::vector<double>& m_schedule,
                                const std::vector<Box>& compacta,
                                const SingularOptions& options) {
    if (m_schedule.empty()) throw InvalidArgument("solve_singular: empty m schedule");
    for (std::size_t k = 1; k < m_schedule.size(); ++k) {
        if (!(m_schedule[k] > m_schedule[k - 1])) {
            throw InvalidArgument("solve_singular: m schedule must be strictly increasing");
        }
    }

    RegularizedSolver solver(spec, options.newton);
    SingularSolution out{spec, GridFunction::zeros(spec.grid()), {}, false,
                         std::numeric_limits<double>::infinity(), 0.0, {}, 0.0};
    const GridFunction* previous = nullptr;
    for (double m : m_schedule) {
        auto iterate = solver.solve(m, previous);
        if (previous) {
            out.final_gap = max_abs_difference(iterate.u, *previous);
        }
        out.trace.push_back(std::move(iterate));
        previous = &out.trace.back().u;
        if (out.trace.size() >= 2 && out.final_gap <= options.m_gap_tolerance) {
            out.stabilized = true;
            break;
        }
    }
    out.u = out.trace.back().u;
    out.sup_norm = out.u.max_abs();
    for (const auto& box : compacta) out.compacta_min.push_back(min_over(out.u, box));
    out.total_mass = load_mass(out.u, spec.f(), spec.gamma());
    return out;
}

GridFunction singular_load(const GridFunction& u, const GridFunction& f, double gamma) {
    if (!(u.grid() == f.grid())) throw InvalidArgument("singular_load: grid mismatch");
    std::vector<double> values(u.size(), 0.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (f[k] <= 0.0) continue;
        const double e = std::log(f[k]) - gamma * std::log(std::max(u[k], kUFloor));
        values[k] = e > std::log(1e300) ? 1e300 : std::exp(e);
    }
    return GridFunction(u.grid(), std::move(values));
}

double load_mass(const GridFunction& u, const GridFunction& f, double gamma, const Box* region) {
    const Grid& grid = u.grid();
    const GridFunction load = singular_load(u, f, gamma);
    double mass = 0.0;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (grid.is_boundary(k)) continue;
        if (region && !region->contains(grid.node(k))) continue;
        mass += load[k];
    }
    return mass * grid.cell_volume();
}

double min_over(const GridFunction& u, const Box& box) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (box.contains(u.grid().node(k))) m = std::min(m, u[k]);
    }
    return m;
}

GridFunction to_quasilinear(const GridFunction& u, double gamma) {
    std::vector<double> v(u.size(), 0.0);
    const double p = gamma + 1.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] < 0.0) throw InvalidArgument("to_quasilinear: u must be nonnegative");
        if (u[k] > 0.0) v[k] = std::exp(p * std::log(u[k]) - std::log(p));
    }
    return GridFunction(u.grid(), std::move(v));
}

GridFunction from_quasilinear(const GridFunction& v, double gamma) {
    std::vector<double> u(v.size(), 0.0);
    const double p = gamma + 1.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (v[k] < 0.0) throw InvalidArgument("from_quasilinear: v must be nonnegative");
        if (v[k] > 0.0) u[k] = std::exp((std::log(p) + std::log(v[k])) / p);
    }
    return GridFunction(v.grid(), std::move(u));
}

ResidualReport singular_residual(const GridFunction& u, const ProblemSpec& spec) {
    const SparseOperator op = assemble(spec.grid(), spec.coefficients());
    const GridFunction au = apply(op, u);
    const GridFunction load = singular_load(u, spec.f(), spec.gamma());
    const Grid& grid = spec.grid();
    ResidualReport report;
    std::vector<double> r(grid.node_count(), 0.0);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (grid.is_boundary(k)) continue;
        if (!(u[k] > 0.0)) {
            ++report.masked;
            continue;
        }
        r[k] = au[k] - load[k];
        report.norm = std::max(report.norm, std::abs(r[k]));
        ++report.evaluated;
    }
    report.field = GridFunction(grid, std::move(r));
    return report;
}

ResidualReport quasilinear_residual(const GridFunction& v, double gamma, const GridFunction& f,
                                    double floor) {
    if (!(v.grid() == f.grid())) throw InvalidArgument("quasilinear_residual: grid mismatch");
    const Grid& grid = v.grid();
    const double b = std::isinf(gamma) ? 1.0 : gamma / (gamma + 1.0);
    ResidualReport report;
    std::vector<double> r(grid.node_count(), 0.0);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (grid.is_boundary(k)) continue;
        if (!(v[k] >= floor)) {
            ++report.masked;
            continue;
        }
        const auto [i, j] = grid.multi_index(k);
        double laplacian = 0.0;
        double grad_sq = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const std::size_t minus = a == 0 ? grid.index(i - 1, j) : grid.index(i, j - 1);
            const std::size_t plus = a == 0 ? grid.index(i + 1, j) : grid.index(i, j + 1);
            const double h = grid.h(a);
            laplacian += (v[minus] - 2.0 * v[k] + v[plus]) / (h * h);
            const double d = (v[plus] - v[minus]) / (2.0 * h);
            grad_sq += d * d;
        }
        r[k] = -laplacian + b * grad_sq / v[k] - f[k];
        report.norm = std::max(report.norm, std::abs(r[k]));
        ++report.evaluated;
    }
    report.field = GridFunction(grid, std::move(r));
    return report;
}

double linfty_certificate(const GridFunction& u, double gamma, const GridFunction& f) {
    const double f_norm = f.max_abs();
    if (!(f_norm > 0.0)) throw UndefinedCertificate("linfty_certificate: f is identically zero");
    const double u_norm = u.max_abs();
    if (u_norm == 0.0) return 0.0;
    return std::exp((gamma + 1.0) * std::log(u_norm) - std::log(gamma + 1.0) - std::log(f_norm));
}

}  // namespace singlim
