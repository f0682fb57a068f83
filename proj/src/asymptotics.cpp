#include "singlim/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace singlim {
namespace {

constexpr double kClusterShare = 0.01;

bool in_open_box(const Box& box, const Point& p) {
    for (int a = 0; a < box.dim; ++a) {
        if (!(p[a] > box.lo[a] && p[a] < box.hi[a])) return false;
    }
    return true;
}

SweepRow solve_row(const ProblemSpec& base, double n, const SweepOptions& options) {
    SweepRow row;
    row.n = n;
    try {
        const ProblemSpec spec = base.with_gamma(n);
        SingularSolution sol = solve_singular(spec, options.m_schedule, options.compacta,
                                              options.solver);
        const GridFunction& f = spec.f();
        row.sup_norm = sol.sup_norm;
        row.compacta_min = sol.compacta_min;
        row.total_mass = sol.total_mass;
        for (const Box& region : options.mass_regions) {
            row.local_masses.push_back(load_mass(sol.u, f, n, &region));
        }
        const GridFunction v = to_quasilinear(sol.u, n);
        if (spec.coefficients().is_identity()) {
            const ResidualReport r = quasilinear_residual(v, n, f);
            if (!r.vacuous()) row.quasilinear_residual = r.norm;
        }
        try {
            row.certificate = linfty_certificate(sol.u, n, f);
        } catch (const UndefinedCertificate&) {
        }
        if (!options.compacta.empty()) {
            row.fitted_m =
                fitted_lower_bound_constant(z_diagnostic(sol.u, n), f, options.compacta.front());
        }
        row.v_sup = v.max_abs();
        row.v_h1_seminorm = h1_seminorm(v);
        row.stabilized = sol.stabilized;
        row.final_gap = sol.final_gap;
        for (const auto& it : sol.trace) row.newton_iterations += it.iterations;
        row.u = std::move(sol.u);
        row.ok = true;
    } catch (const Error& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

}  // namespace

SweepReport run_sweep(const ProblemSpec& spec, const SweepOptions& options) {
    if (options.n_list.empty()) throw InvalidArgument("run_sweep: empty n list");
    for (std::size_t k = 0; k < options.n_list.size(); ++k) {
        const double n = options.n_list[k];
        if (!(n >= 3.0) || !std::isfinite(n)) {
            throw InvalidArgument("run_sweep: every n must be finite and >= 3");
        }
        if (k > 0 && !(n > options.n_list[k - 1])) {
            throw InvalidArgument("run_sweep: n list must be strictly increasing");
        }
    }

    SweepReport report{spec, options.n_list, {}, std::nullopt, std::nullopt,
                       std::nullopt, std::nullopt, {}};
    report.rows.resize(options.n_list.size());

    unsigned threads = options.max_threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < options.n_list.size(); start += threads) {
        const std::size_t stop = std::min(options.n_list.size(), start + threads);
        std::vector<std::future<SweepRow>> wave;
        for (std::size_t k = start; k < stop; ++k) {
            wave.push_back(std::async(std::launch::async, solve_row, std::cref(spec),
                                      options.n_list[k], std::cref(options)));
        }
        for (std::size_t k = start; k < stop; ++k) report.rows[k] = wave[k - start].get();
    }

    for (auto it = report.rows.rbegin(); it != report.rows.rend(); ++it) {
        if (!it->ok) continue;
        report.limit_n = it->n;
        report.limit_u = *it->u;
        break;
    }
    if (!report.limit_u || !spec.support_box()) return report;

    report.histogram =
        measure_histogram(*report.limit_u, spec, *report.limit_n, options.shell_distances);
    try {
        report.limit_check =
            limit_equation_check(*report.limit_u, *report.histogram, spec.coefficients());
    } catch (const CheckInconclusive& e) {
        report.limit_note = e.what();
    }
    return report;
}

std::vector<double> z_diagnostic(const GridFunction& u, double n) {
    std::vector<double> z(u.size());
    const double base = std::log(n + 1.0);
    for (std::size_t k = 0; k < u.size(); ++k) {
        z[k] = u[k] > 0.0 ? base - (n + 1.0) * std::log(u[k])
                          : std::numeric_limits<double>::infinity();
    }
    return z;
}

double fitted_lower_bound_constant(const std::vector<double>& z, const GridFunction& f,
                                   const Box& box) {
    if (z.size() != f.size()) throw InvalidArgument("fitted_lower_bound_constant: size mismatch");
    double sup = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (!box.contains(f.grid().node(k))) continue;
        if (std::isinf(z[k])) {
            if (f[k] > 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        sup = std::max(sup, z[k]);
    }
    return sup;
}

double h1_seminorm(const GridFunction& v) {
    const Grid& grid = v.grid();
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        const auto [i, j] = grid.multi_index(k);
        for (int a = 0; a < grid.dim(); ++a) {
            const bool has_next = a == 0 ? i + 1 < grid.nodes(0) : j + 1 < grid.nodes(1);
            if (!has_next) continue;
            const std::size_t next = a == 0 ? grid.index(i + 1, j) : grid.index(i, j + 1);
            const double d = (v[next] - v[k]) / grid.h(a);
            sum += d * d;
        }
    }
    return std::sqrt(sum * grid.cell_volume());
}

MeasureHistogram measure_histogram(const GridFunction& u, const ProblemSpec& spec, double n,
                                   const std::vector<double>& shell_distances) {
    const Box* support = spec.support_box();
    if (!support) throw InvalidArgument("measure_histogram: datum has no support box");
    const Grid& grid = spec.grid();
    if (!(u.grid() == grid)) throw InvalidArgument("measure_histogram: grid mismatch");

    const GridFunction load = singular_load(u, spec.f(), n);
    std::vector<double> masses(grid.node_count(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (grid.is_boundary(k)) continue;
        masses[k] = load[k] * grid.cell_volume();
        total += masses[k];
    }

    MeasureHistogram hist{GridFunction(grid, masses), total, shell_distances, {}};
    for (double d : shell_distances) {
        double near = 0.0;
        for (std::size_t k = 0; k < grid.node_count(); ++k) {
            if (masses[k] > 0.0 && support->distance_to_boundary(grid.node(k)) <= d) {
                near += masses[k];
            }
        }
        hist.shell_fractions.push_back(total > 0.0 ? near / total : 0.0);
    }
    return hist;
}

LimitCheck limit_equation_check(const GridFunction& u_limit, const MeasureHistogram& hist,
                                const CoefficientField& m) {
    const Grid& grid = hist.cell_masses.grid();
    if (grid.dim() != 1) {
        throw CheckInconclusive("limit_equation_check: atom reconstruction is 1-D only");
    }
    if (!(u_limit.grid() == grid)) throw InvalidArgument("limit_equation_check: grid mismatch");

    const SparseOperator op = assemble(grid, m);
    const GridFunction& mass = hist.cell_masses;
    if (!(hist.total > 0.0)) {
        return {{}, GridFunction::zeros(grid), u_limit.max_abs()};
    }

    struct Run {
        int first;
        int last;
    };
    std::vector<Run> runs;
    const double threshold = kClusterShare * hist.total;
    for (int i = 1; i < grid.cells(0); ++i) {
        if (!(mass[i] >= threshold)) continue;
        if (!runs.empty() && runs.back().last == i - 1) {
            runs.back().last = i;
        } else {
            runs.push_back({i, i});
        }
    }
    if (runs.empty()) {
        throw CheckInconclusive("limit_equation_check: no node holds 1% of the mass");
    }
    const double h = grid.h(0);
    for (std::size_t r = 1; r < runs.size(); ++r) {
        const double gap = grid.node(runs[r].first)[0] - grid.node(runs[r - 1].last)[0];
        if (!(gap > 4.0 * h)) {
            throw CheckInconclusive("limit_equation_check: clusters closer than 4h");
        }
    }

    std::vector<double> moment(runs.size(), 0.0);
    std::vector<double> weight(runs.size(), 0.0);
    for (int i = 1; i < grid.cells(0); ++i) {
        if (!(mass[i] > 0.0)) continue;
        const double x = grid.node(i)[0];
        std::size_t best = 0;
        double best_distance = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const double lo = grid.node(runs[r].first)[0];
            const double hi = grid.node(runs[r].last)[0];
            const double d = std::max({lo - x, 0.0, x - hi});
            if (d < best_distance) {
                best_distance = d;
                best = r;
            }
        }
        moment[best] += mass[i] * x;
        weight[best] += mass[i];
    }

    LimitCheck check;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        check.atoms.push_back({{moment[r] / weight[r], 0.0}, weight[r]});
    }
    check.reconstructed = solve_measure(op, MeasureData{check.atoms});
    check.difference = max_abs_difference(check.reconstructed, u_limit);
    return check;
}

ConjectureReport conjecture_experiment(const ProblemSpec& spec, double n,
                                       const std::vector<double>& m_schedule,
                                       const SingularOptions& options) {
    if (!spec.coefficients().is_identity()) {
        throw InvalidArgument("conjecture_experiment: requires M = I");
    }
    const Box* support = spec.support_box();
    if (!support) throw InvalidArgument("conjecture_experiment: datum has no support box");

    const ProblemSpec spec_n = spec.with_gamma(n);
    SingularSolution sol = solve_singular(spec_n, m_schedule, {}, options);
    const Grid& grid = spec.grid();
    const SparseOperator op = assemble(grid, spec.coefficients());

    std::vector<std::optional<double>> fixed(grid.node_count());
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (grid.is_boundary(k)) {
            fixed[k] = 0.0;
        } else if (support->contains(grid.node(k))) {
            fixed[k] = 1.0;
        }
    }
    ConjectureReport report;
    report.n = n;
    report.harmonic = solve_with_fixed_values(op, fixed);
    const GridFunction v = to_quasilinear(sol.u, n);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        const Point p = grid.node(k);
        if (!support->contains(p)) {
            report.harmonic_difference =
                std::max(report.harmonic_difference, std::abs(report.harmonic[k] - sol.u[k]));
        }
        if (!in_open_box(*support, p)) report.v_outside = std::max(report.v_outside, v[k]);
    }
    report.stabilized = sol.stabilized;
    report.u = std::move(sol.u);
    return report;
}

}  // namespace singlim
