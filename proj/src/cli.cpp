#include "singlim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "singlim/asymptotics.hpp"
#include "singlim/config.hpp"
#include "singlim/oned.hpp"
#include "singlim/report.hpp"

namespace singlim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using report::CsvTable;
using report::format_number;

struct Invocation {
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::optional<double> n;
};

json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

json optional_number(const std::optional<double>& x) {
    return x ? number(*x) : json(nullptr);
}

json numbers(const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) a.push_back(number(x));
    return a;
}

std::string csv_text(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::string n_label(double n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", n);
    return buf;
}

class Output {
public:
    Output(fs::path dir, const OutputConfig& formats) : dir_(std::move(dir)), formats_(formats) {
        fs::create_directories(dir_);
    }
    void csv(const std::string& name, const CsvTable& table) const {
        if (formats_.csv) report::write_text(dir_ / name, table.str());
    }
    void json_file(const std::string& name, const json& j) const {
        if (formats_.json) report::write_text(dir_ / name, j.dump(2) + "\n");
    }
    void svg(const std::string& name, const std::vector<report::Series>& series,
             const report::PlotOptions& options) const {
        if (formats_.svg) report::write_text(dir_ / name, report::svg_line_plot(series, options));
    }

private:
    fs::path dir_;
    OutputConfig formats_;
};

std::vector<std::string> coordinate_header(const Grid& grid) {
    if (grid.dim() == 1) return {"x (length)"};
    return {"x (length)", "y (length)"};
}

std::vector<std::string> coordinates(const Grid& grid, std::size_t k) {
    const Point p = grid.node(k);
    if (grid.dim() == 1) return {format_number(p[0])};
    return {format_number(p[0]), format_number(p[1])};
}

/// Nodes along x on the middle row, used for 1-D style plots of 2-D fields.
std::vector<std::size_t> plot_line(const Grid& grid) {
    std::vector<std::size_t> nodes;
    const int j = grid.dim() == 1 ? 0 : grid.cells(1) / 2;
    for (int i = 0; i < grid.nodes(0); ++i) nodes.push_back(grid.index(i, j));
    return nodes;
}

report::Series line_series(const std::string& name, const GridFunction& u) {
    report::Series s{name, {}, {}};
    for (std::size_t k : plot_line(u.grid())) {
        s.x.push_back(u.grid().node(k)[0]);
        s.y.push_back(u[k]);
    }
    return s;
}

json grid_json(const Grid& grid) {
    json g;
    g["dim"] = grid.dim();
    json lo = json::array(), hi = json::array(), cells = json::array();
    for (int a = 0; a < grid.dim(); ++a) {
        lo.push_back(grid.lo(a));
        hi.push_back(grid.hi(a));
        cells.push_back(grid.cells(a));
    }
    g["lo"] = lo;
    g["hi"] = hi;
    g["cells"] = cells;
    return g;
}

json atoms_json(const std::vector<Atom>& atoms, int dim) {
    json a = json::array();
    for (const Atom& atom : atoms) {
        json loc = json::array();
        for (int d = 0; d < dim; ++d) loc.push_back(number(atom.location[d]));
        a.push_back({{"location", loc}, {"mass", number(atom.mass)}});
    }
    return a;
}

double target_n(const Invocation& inv, const ExperimentConfig& cfg) {
    if (inv.n) return *inv.n;
    if (cfg.sweep.n_list.empty()) {
        throw ConfigError(inv.command + ": give --n or a non-empty sweep.n list");
    }
    return cfg.sweep.n_list.back();
}

int cmd_solve(const Invocation& inv, const ExperimentConfig& cfg, const Output& out,
              std::ostream& log) {
    const double gamma = inv.n.value_or(cfg.problem.gamma);
    const ProblemSpec spec = cfg.make_problem(gamma);
    const SingularSolution sol =
        solve_singular(spec, cfg.sweep.m_schedule, cfg.sweep.compacta, cfg.sweep.solver);
    const Grid& grid = spec.grid();
    const GridFunction v = to_quasilinear(sol.u, gamma);

    std::vector<std::string> header = coordinate_header(grid);
    header.push_back("u (u_n; solution of -div(M grad u) = f/u^n)");
    header.push_back("v (v_n = u_n^(n+1)/(n+1))");
    CsvTable table(header);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        auto row = coordinates(grid, k);
        row.push_back(format_number(sol.u[k]));
        row.push_back(format_number(v[k]));
        table.add_row(row);
    }
    out.csv("solution.csv", table);

    json summary;
    summary["command"] = "solve";
    summary["gamma"] = gamma;
    summary["grid"] = grid_json(grid);
    summary["stabilized"] = sol.stabilized;
    summary["final_m_gap"] = number(sol.final_gap);
    summary["sup_norm"] = number(sol.sup_norm);
    summary["total_mass"] = number(sol.total_mass);
    summary["compacta_min"] = numbers(sol.compacta_min);
    try {
        summary["linfty_certificate"] = number(linfty_certificate(sol.u, gamma, spec.f()));
    } catch (const UndefinedCertificate&) {
        summary["linfty_certificate"] = nullptr;
    }
    const ResidualReport singular = singular_residual(sol.u, spec);
    summary["singular_residual"] = number(singular.norm);
    if (spec.coefficients().is_identity()) {
        const ResidualReport q = quasilinear_residual(v, gamma, spec.f());
        summary["quasilinear_residual"] = q.vacuous() ? json(nullptr) : number(q.norm);
        summary["quasilinear_masked_nodes"] = q.masked;
    }
    json trace = json::array();
    for (const auto& it : sol.trace) {
        trace.push_back(
            {{"m", it.m}, {"newton_iterations", it.iterations}, {"residual", number(it.residual)}});
    }
    summary["m_trace"] = trace;
    out.json_file("summary.json", summary);

    out.svg("profile.svg", {line_series("u_n", sol.u), line_series("v_n", v)},
            {"Solution profile, n = " + n_label(gamma), "x", "value", false, 720, 480});
    if (!sol.stabilized) {
        log << "solve: m schedule ended before the gap tolerance (gap " << sol.final_gap << ")\n";
    }
    return kExitOk;
}

int cmd_sweep(const Invocation&, const ExperimentConfig& cfg, const Output& out,
              std::ostream& log) {
    if (cfg.sweep.n_list.empty()) throw ConfigError("sweep: sweep.n must not be empty");
    const ProblemSpec spec = cfg.make_problem();
    const SweepReport rep = run_sweep(spec, cfg.sweep_options());
    const Grid& grid = spec.grid();

    std::vector<std::string> header{"n (exponent gamma)", "status",
                                    "sup_norm (|u_n|_inf)"};
    for (std::size_t k = 0; k < cfg.sweep.compacta.size(); ++k) {
        header.push_back("min_compactum_" + std::to_string(k) + " (min of u_n)");
    }
    header.push_back("total_mass (integral of f/u_n^n)");
    for (std::size_t k = 0; k < cfg.sweep.mass_regions.size(); ++k) {
        header.push_back("local_mass_" + std::to_string(k) + " (integral of f/u_n^n)");
    }
    for (const char* h : {"quasilinear_residual (sup norm)", "linfty_certificate (dimensionless)",
                          "fitted_M (sup of z_n^+)", "v_sup (|v_n|_inf)",
                          "v_h1 (discrete H1 seminorm of v_n)", "stabilized (m gap met)",
                          "final_m_gap (sup norm)", "newton_iterations (count)", "error"}) {
        header.push_back(h);
    }
    CsvTable table(header);
    int succeeded = 0;
    for (const SweepRow& row : rep.rows) {
        std::vector<std::string> cells{format_number(row.n), row.ok ? "ok" : "failed"};
        auto num = [&](double x) { cells.push_back(row.ok ? format_number(x) : ""); };
        auto opt = [&](const std::optional<double>& x) {
            cells.push_back(row.ok && x ? format_number(*x) : "");
        };
        num(row.sup_norm);
        for (std::size_t k = 0; k < cfg.sweep.compacta.size(); ++k) {
            num(row.ok ? row.compacta_min[k] : 0.0);
        }
        num(row.total_mass);
        for (std::size_t k = 0; k < cfg.sweep.mass_regions.size(); ++k) {
            num(row.ok ? row.local_masses[k] : 0.0);
        }
        opt(row.quasilinear_residual);
        opt(row.certificate);
        opt(row.fitted_m);
        num(row.v_sup);
        num(row.v_h1_seminorm);
        cells.push_back(row.ok ? (row.stabilized ? "true" : "false") : "");
        num(row.final_gap);
        cells.push_back(row.ok ? std::to_string(row.newton_iterations) : "");
        cells.push_back(csv_text(row.error));
        table.add_row(cells);
        if (row.ok) ++succeeded;
        else log << "sweep: n = " << row.n << " failed: " << row.error << "\n";
    }
    out.csv("sweep.csv", table);

    std::vector<std::string> profile_header = coordinate_header(grid);
    std::vector<const SweepRow*> solved;
    for (const SweepRow& row : rep.rows) {
        if (!row.ok) continue;
        solved.push_back(&row);
        profile_header.push_back("u_" + n_label(row.n) + " (u_n at n = " + n_label(row.n) + ")");
    }
    CsvTable profiles(profile_header);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        auto cells = coordinates(grid, k);
        for (const SweepRow* row : solved) cells.push_back(format_number((*row->u)[k]));
        profiles.add_row(cells);
    }
    out.csv("profiles.csv", profiles);

    json summary;
    summary["command"] = "sweep";
    summary["grid"] = grid_json(grid);
    json rows = json::array();
    for (const SweepRow& row : rep.rows) {
        json r;
        r["n"] = row.n;
        r["ok"] = row.ok;
        if (row.ok) {
            r["sup_norm"] = number(row.sup_norm);
            r["compacta_min"] = numbers(row.compacta_min);
            r["total_mass"] = number(row.total_mass);
            r["local_masses"] = numbers(row.local_masses);
            r["quasilinear_residual"] = optional_number(row.quasilinear_residual);
            r["linfty_certificate"] = optional_number(row.certificate);
            r["fitted_M"] = optional_number(row.fitted_m);
            r["v_sup"] = number(row.v_sup);
            r["v_h1_seminorm"] = number(row.v_h1_seminorm);
            r["stabilized"] = row.stabilized;
            r["final_m_gap"] = number(row.final_gap);
            r["newton_iterations"] = row.newton_iterations;
        } else {
            r["error"] = row.error;
        }
        rows.push_back(r);
    }
    summary["rows"] = rows;
    if (rep.limit_n) summary["limit_n"] = *rep.limit_n;
    if (rep.histogram) {
        summary["histogram"] = {{"total", number(rep.histogram->total)},
                                {"shell_distances", numbers(rep.histogram->shell_distances)},
                                {"shell_fractions", numbers(rep.histogram->shell_fractions)}};
    }
    if (rep.limit_check) {
        summary["limit_check"] = {{"atoms", atoms_json(rep.limit_check->atoms, grid.dim())},
                                  {"difference", number(rep.limit_check->difference)}};
    } else if (!rep.limit_note.empty()) {
        summary["limit_check"] = {{"inconclusive", rep.limit_note}};
    }
    out.json_file("summary.json", summary);

    std::vector<report::Series> curves;
    for (const SweepRow* row : solved) curves.push_back(line_series("n = " + n_label(row->n), *row->u));
    out.svg("profiles.svg", curves, {"u_n across the sweep", "x", "u_n", false, 720, 480});

    std::vector<report::Series> masses{{"total mass", {}, {}}};
    for (std::size_t k = 0; k < cfg.sweep.mass_regions.size(); ++k) {
        masses.push_back({"local mass " + std::to_string(k), {}, {}});
    }
    for (const SweepRow* row : solved) {
        masses[0].x.push_back(row->n);
        masses[0].y.push_back(row->total_mass);
        for (std::size_t k = 0; k < row->local_masses.size(); ++k) {
            masses[k + 1].x.push_back(row->n);
            masses[k + 1].y.push_back(row->local_masses[k]);
        }
    }
    out.svg("masses.svg", masses, {"Mass of f/u_n^n", "n", "mass", true, 720, 480});
    return succeeded > 0 ? kExitOk : kExitNumericFailure;
}

int cmd_oned(const Invocation&, const ExperimentConfig& cfg, const Output& out,
             std::ostream& log) {
    const OnedConfig& o = cfg.oned;
    if (o.n_list.empty()) throw ConfigError("oned: oned.n must not be empty");
    const bool inner = o.geometry == oned::Geometry::inner_source;
    const double half_width = inner ? 2.0 : o.radius;

    CsvTable table({"n (exponent)", "c_n (shooting constant)", "c_lower (T = 1 bracket)",
                    "c_upper (T = 2 bracket)", "T_n (first zero of w)",
                    "alpha_n (u_n(0))", "matching_residual (F(c_n))", "error"});
    std::vector<std::optional<oned::OneDProfile>> profiles;
    for (double n : o.n_list) {
        try {
            auto p = inner ? oned::OneDProfile::inner_source(n)
                           : oned::OneDProfile::interval(n, o.radius);
            const double residual = inner ? oned::matching_residual(p.c(), n)
                                          : std::numeric_limits<double>::quiet_NaN();
            table.add_row({format_number(n), format_number(p.c()),
                           format_number(oned::c_lower(n)), format_number(oned::c_upper(n)),
                           format_number(p.first_zero()), format_number(p.alpha()),
                           inner ? format_number(residual) : "", ""});
            profiles.emplace_back(std::move(p));
        } catch (const Error& e) {
            table.add_row({format_number(n), "", "", "", "", "", "", csv_text(e.what())});
            profiles.emplace_back(std::nullopt);
            log << "oned: n = " << n << " failed: " << e.what() << "\n";
        }
    }
    out.csv("oned.csv", table);

    const oned::LimitProfile limit = oned::limit_profiles(half_width, o.geometry);
    std::vector<std::string> header{"t (length)"};
    for (std::size_t k = 0; k < o.n_list.size(); ++k) {
        if (profiles[k]) header.push_back("u_" + n_label(o.n_list[k]) + " (u_n(t))");
    }
    header.push_back("u_limit (pointwise limit of u_n)");
    header.push_back("v_limit (limit of v_n)");
    CsvTable samples(header);
    std::vector<report::Series> curves;
    for (std::size_t k = 0; k < o.n_list.size(); ++k) {
        if (profiles[k]) curves.push_back({"n = " + n_label(o.n_list[k]), {}, {}});
    }
    curves.push_back({"limit", {}, {}});
    for (int s = 0; s < o.samples; ++s) {
        const double t = half_width * s / (o.samples - 1);
        std::vector<std::string> row{format_number(t)};
        std::size_t c = 0;
        for (const auto& p : profiles) {
            if (!p) continue;
            const double u = p->u(t);
            row.push_back(format_number(u));
            curves[c].x.push_back(t);
            curves[c].y.push_back(u);
            ++c;
        }
        row.push_back(format_number(limit.u(t)));
        row.push_back(format_number(limit.v(t)));
        curves[c].x.push_back(t);
        curves[c].y.push_back(limit.u(t));
        samples.add_row(row);
    }
    out.csv("oned_profiles.csv", samples);
    out.svg("oned_profiles.svg", curves, {"Exact 1-D profiles", "t", "u_n(t)", false, 720, 480});

    const bool any = std::any_of(profiles.begin(), profiles.end(),
                                 [](const auto& p) { return p.has_value(); });
    return any ? kExitOk : kExitNumericFailure;
}

int cmd_limit_check(const Invocation& inv, const ExperimentConfig& cfg, const Output& out,
                    std::ostream& log) {
    const double n = target_n(inv, cfg);
    const ProblemSpec spec = cfg.make_problem(n);
    if (!spec.support_box()) throw ConfigError("limit-check: needs an indicator datum");
    const SingularSolution sol = solve_singular(spec, cfg.sweep.m_schedule, {}, cfg.sweep.solver);
    const MeasureHistogram hist = measure_histogram(sol.u, spec, n, cfg.sweep.shell_distances);
    const Grid& grid = spec.grid();

    json summary;
    summary["command"] = "limit-check";
    summary["n"] = n;
    summary["grid"] = grid_json(grid);
    summary["total_mass"] = number(hist.total);
    summary["shell_distances"] = numbers(hist.shell_distances);
    summary["shell_fractions"] = numbers(hist.shell_fractions);
    summary["stabilized"] = sol.stabilized;

    std::optional<LimitCheck> check;
    try {
        check = limit_equation_check(sol.u, hist, spec.coefficients());
    } catch (const CheckInconclusive& e) {
        summary["inconclusive"] = e.what();
        out.json_file("limit_check.json", summary);
        log << "limit-check: " << e.what() << "\n";
        return kExitNumericFailure;
    }
    summary["atoms"] = atoms_json(check->atoms, grid.dim());
    summary["difference"] = number(check->difference);
    out.json_file("limit_check.json", summary);

    std::vector<std::string> header = coordinate_header(grid);
    header.push_back("u (u_n)");
    header.push_back("reconstructed (solution with atomic data)");
    header.push_back("cell_mass (f/u_n^n times cell volume)");
    CsvTable table(header);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        auto row = coordinates(grid, k);
        row.push_back(format_number(sol.u[k]));
        row.push_back(format_number(check->reconstructed[k]));
        row.push_back(format_number(hist.cell_masses[k]));
        table.add_row(row);
    }
    out.csv("limit_check.csv", table);
    out.svg("limit_check.svg",
            {line_series("u_n", sol.u), line_series("reconstructed", check->reconstructed)},
            {"Limit equation check, n = " + n_label(n), "x", "u", false, 720, 480});
    return kExitOk;
}

int cmd_conjecture(const Invocation& inv, const ExperimentConfig& cfg, const Output& out,
                   std::ostream&) {
    const double n = target_n(inv, cfg);
    const ProblemSpec spec = cfg.make_problem(n);
    if (!spec.support_box()) throw ConfigError("conjecture: needs an indicator datum");
    if (!spec.coefficients().is_identity()) throw ConfigError("conjecture: needs M = I");
    const ConjectureReport rep = conjecture_experiment(spec, n, cfg.sweep.m_schedule, cfg.sweep.solver);
    const Grid& grid = spec.grid();
    const GridFunction v = to_quasilinear(rep.u, n);

    json summary;
    summary["command"] = "conjecture";
    summary["n"] = n;
    summary["grid"] = grid_json(grid);
    summary["harmonic_difference"] = number(rep.harmonic_difference);
    summary["v_outside_support"] = number(rep.v_outside);
    summary["stabilized"] = rep.stabilized;
    out.json_file("conjecture.json", summary);

    std::vector<std::string> header = coordinate_header(grid);
    header.push_back("u (u_n)");
    header.push_back("harmonic (harmonic outside the support with value 1 on it)");
    header.push_back("v (v_n = u_n^(n+1)/(n+1))");
    CsvTable table(header);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        auto row = coordinates(grid, k);
        row.push_back(format_number(rep.u[k]));
        row.push_back(format_number(rep.harmonic[k]));
        row.push_back(format_number(v[k]));
        table.add_row(row);
    }
    out.csv("conjecture.csv", table);
    out.svg("conjecture.svg", {line_series("u_n", rep.u), line_series("harmonic", rep.harmonic)},
            {"Harmonic comparison, n = " + n_label(n), "x", "u", false, 720, 480});
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Singular elliptic problems as the exponent grows", "singlim"};
    app.require_subcommand(1);
    Invocation inv;
    double n_value = 0.0;
    std::vector<CLI::Option*> n_options;

    auto add = [&](const std::string& name, const std::string& help, bool with_n) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", inv.config_path, "experiment JSON")->required();
        sub->add_option("--out", inv.out_dir, "output directory (overrides output.directory)");
        if (with_n) n_options.push_back(sub->add_option("--n", n_value, "exponent gamma = n"));
        return sub;
    };
    add("solve", "solve the singular problem for one exponent", true);
    add("sweep", "solve across sweep.n and collect diagnostics", false);
    add("oned", "exact 1-D profiles for oned.n", false);
    add("limit-check", "atom reconstruction of the concentration measure", true);
    add("conjecture", "harmonic comparison outside the support", true);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalidConfig;
    }
    for (CLI::App* sub : app.get_subcommands()) inv.command = sub->get_name();
    for (CLI::Option* opt : n_options) {
        if (opt->count()) inv.n = n_value;
    }

    ExperimentConfig cfg;
    fs::path dir;
    try {
        cfg = load_config(inv.config_path);
        if (inv.n && !(*inv.n > 0.0)) throw ConfigError("--n must be positive");
        dir = inv.out_dir.empty() ? cfg.output.directory : fs::path(inv.out_dir);
        // Validate command-specific requirements before touching the file system.
        if (inv.command == "sweep" && cfg.sweep.n_list.empty()) {
            throw ConfigError("sweep: sweep.n must not be empty");
        }
        if (inv.command == "oned" && cfg.oned.n_list.empty()) {
            throw ConfigError("oned: oned.n must not be empty");
        }
        if (inv.command == "limit-check" || inv.command == "conjecture") {
            (void)target_n(inv, cfg);
            const ProblemSpec spec = cfg.make_problem();
            if (!spec.support_box()) throw ConfigError(inv.command + ": needs an indicator datum");
            if (inv.command == "conjecture" && !spec.coefficients().is_identity()) {
                throw ConfigError("conjecture: needs M = I");
            }
        }
        if (inv.command == "solve") (void)cfg.make_problem(inv.n.value_or(cfg.problem.gamma));
    } catch (const Error& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    try {
        const Output output(dir, cfg.output);
        if (inv.command == "solve") return cmd_solve(inv, cfg, output, err);
        if (inv.command == "sweep") return cmd_sweep(inv, cfg, output, err);
        if (inv.command == "oned") return cmd_oned(inv, cfg, output, err);
        if (inv.command == "limit-check") return cmd_limit_check(inv, cfg, output, err);
        return cmd_conjecture(inv, cfg, output, err);
    } catch (const ConfigError& e) {
        err << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumericFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace singlim::cli
