#include "singlim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace singlim {

bool Box::contains(const Point& p) const {
    for (int a = 0; a < dim; ++a) {
        if (p[a] < lo[a] || p[a] > hi[a]) return false;
    }
    return true;
}

bool Box::strictly_inside(const Box& outer) const {
    if (outer.dim != dim) return false;
    for (int a = 0; a < dim; ++a) {
        if (!(lo[a] > outer.lo[a] && hi[a] < outer.hi[a])) return false;
    }
    return true;
}

double Box::distance_to_boundary(const Point& p) const {
    if (contains(p)) {
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < dim; ++a) d = std::min({d, p[a] - lo[a], hi[a] - p[a]});
        return d;
    }
    double sq = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double excess = std::max({lo[a] - p[a], 0.0, p[a] - hi[a]});
        sq += excess * excess;
    }
    return std::sqrt(sq);
}

double Box::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= hi[a] - lo[a];
    return v;
}

std::size_t Grid::node_count() const noexcept {
    std::size_t count = 1;
    for (int a = 0; a < dim_; ++a) count *= static_cast<std::size_t>(cells_[a] + 1);
    return count;
}

double Grid::cell_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= h_[a];
    return v;
}

Box Grid::domain() const {
    Box box;
    box.dim = dim_;
    box.lo = lo_;
    box.hi = hi_;
    return box;
}

std::array<int, 2> Grid::multi_index(std::size_t k) const noexcept {
    const auto nx = static_cast<std::size_t>(nodes(0));
    if (dim_ == 1) return {static_cast<int>(k), 0};
    return {static_cast<int>(k % nx), static_cast<int>(k / nx)};
}

Point Grid::node(std::size_t k) const noexcept {
    const auto [i, j] = multi_index(k);
    Point p{lo_[0] + i * h_[0], 0.0};
    // Pin the last node exactly on hi to avoid round-off drift.
    if (i == cells_[0]) p[0] = hi_[0];
    if (dim_ == 2) p[1] = (j == cells_[1]) ? hi_[1] : lo_[1] + j * h_[1];
    return p;
}

bool Grid::is_boundary(std::size_t k) const noexcept {
    const auto idx = multi_index(k);
    for (int a = 0; a < dim_; ++a) {
        if (idx[a] == 0 || idx[a] == cells_[a]) return true;
    }
    return false;
}

Grid make_uniform_grid(std::span<const double> lo, std::span<const double> hi,
                       std::span<const int> cells) {
    const auto dim = lo.size();
    if (dim < 1 || dim > 2 || hi.size() != dim || cells.size() != dim) {
        throw InvalidArgument("grid: lo, hi and cells must all have 1 or 2 entries");
    }
    Grid g;
    g.dim_ = static_cast<int>(dim);
    for (std::size_t a = 0; a < dim; ++a) {
        if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(lo[a] < hi[a])) {
            std::ostringstream msg;
            msg << "grid: degenerate extent on axis " << a << " (" << lo[a] << ", " << hi[a] << ")";
            throw InvalidArgument(msg.str());
        }
        if (cells[a] < 4) {
            std::ostringstream msg;
            msg << "grid: need at least 4 cells per axis, got " << cells[a];
            throw InvalidArgument(msg.str());
        }
        g.lo_[a] = lo[a];
        g.hi_[a] = hi[a];
        g.cells_[a] = cells[a];
        g.h_[a] = (hi[a] - lo[a]) / cells[a];
    }
    return g;
}

Grid make_uniform_grid(double lo, double hi, int cells) {
    const double l[] = {lo};
    const double u[] = {hi};
    const int c[] = {cells};
    return make_uniform_grid(l, u, c);
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.node_count()) {
        throw InvalidArgument("grid function: value count does not match node count");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InvalidArgument("grid function: non-finite value");
    }
}

GridFunction GridFunction::zeros(const Grid& grid) {
    return constant(grid, 0.0);
}

GridFunction GridFunction::constant(const Grid& grid, double value) {
    return GridFunction(grid, std::vector<double>(grid.node_count(), value));
}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(const Point&)>& fn) {
    std::vector<double> values(grid.node_count());
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = fn(grid.node(k));
    return GridFunction(grid, std::move(values));
}

double GridFunction::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::min() const noexcept {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double max_abs_difference(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) throw InvalidArgument("grid functions live on different grids");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

CoefficientField::CoefficientField(Grid grid, std::vector<CoefficientMatrix> entries)
    : grid_(std::move(grid)), entries_(std::move(entries)) {
    if (entries_.size() != grid_.node_count()) {
        throw InvalidArgument("coefficient field: entry count does not match node count");
    }
    for (const auto& m : entries_) {
        if (!std::isfinite(m.a11) || !std::isfinite(m.a12) || !std::isfinite(m.a21) ||
            !std::isfinite(m.a22)) {
            throw InvalidArgument("coefficient field: non-finite entry");
        }
    }
}

CoefficientField CoefficientField::identity(const Grid& grid) {
    return constant(grid, CoefficientMatrix{});
}

CoefficientField CoefficientField::constant(const Grid& grid, const CoefficientMatrix& m) {
    return CoefficientField(grid, std::vector<CoefficientMatrix>(grid.node_count(), m));
}

CoefficientField CoefficientField::sample(
    const Grid& grid, const std::function<CoefficientMatrix(const Point&)>& fn) {
    std::vector<CoefficientMatrix> entries(grid.node_count());
    for (std::size_t k = 0; k < entries.size(); ++k) entries[k] = fn(grid.node(k));
    return CoefficientField(grid, std::move(entries));
}

bool CoefficientField::is_identity() const noexcept {
    const bool two_d = grid_.dim() == 2;
    return std::all_of(entries_.begin(), entries_.end(), [two_d](const CoefficientMatrix& m) {
        return m.a11 == 1.0 && (!two_d || (m.a12 == 0.0 && m.a21 == 0.0 && m.a22 == 1.0));
    });
}

Ellipticity check_ellipticity(const CoefficientField& field) {
    Ellipticity e{std::numeric_limits<double>::infinity(), 0.0};
    const bool two_d = field.grid().dim() == 2;
    for (std::size_t k = 0; k < field.grid().node_count(); ++k) {
        const auto& m = field.at(k);
        double lo = m.a11;
        double hi = m.a11;
        if (two_d) {
            if (std::abs(m.a12 - m.a21) > 1e-14 * (std::abs(m.a12) + std::abs(m.a21))) {
                std::ostringstream msg;
                msg << "coefficient field: non-symmetric entry at node " << k;
                throw EllipticityViolation(msg.str());
            }
            const double mean = 0.5 * (m.a11 + m.a22);
            const double radius = std::hypot(0.5 * (m.a11 - m.a22), m.a12);
            lo = mean - radius;
            hi = mean + radius;
        }
        e.alpha = std::min(e.alpha, lo);
        e.beta = std::max({e.beta, std::abs(lo), std::abs(hi)});
    }
    if (!(e.alpha > 0.0)) {
        std::ostringstream msg;
        msg << "coefficient field: not uniformly elliptic (alpha = " << e.alpha << ")";
        throw EllipticityViolation(msg.str());
    }
    return e;
}

double truncation(double s, double k) {
    return std::max(-k, std::min(s, k));
}

double truncation_excess(double s, double k) {
    const double excess = std::max(std::abs(s) - k, 0.0);
    return s < 0.0 ? -excess : excess;
}

GridFunction sample_datum(const DatumSpec& datum, const Grid& grid) {
    return std::visit(
        [&grid](const auto& d) -> GridFunction {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, ConstantDatum>) {
                return GridFunction::constant(grid, d.value);
            } else if constexpr (std::is_same_v<T, IndicatorDatum>) {
                return GridFunction::sample(grid, [&d](const Point& p) {
                    return d.box.contains(p) ? d.value : 0.0;
                });
            } else {
                if (!(d.values.grid() == grid)) {
                    throw InvalidArgument("tabulated datum lives on a different grid");
                }
                return d.values;
            }
        },
        datum);
}

ProblemSpec::ProblemSpec(Grid grid, CoefficientField coefficients, DatumSpec datum,
                         double gamma, SupportKind support)
    : grid_(std::move(grid)),
      coefficients_(std::move(coefficients)),
      datum_(std::move(datum)),
      gamma_(gamma),
      support_(support),
      ellipticity_{} {
    if (!(coefficients_.grid() == grid_)) {
        throw InvalidArgument("problem: coefficient field lives on a different grid");
    }
    if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
        throw InvalidArgument("problem: gamma must be a positive finite number");
    }
    if (const auto* ind = std::get_if<IndicatorDatum>(&datum_)) {
        if (ind->box.dim != grid_.dim()) {
            throw InvalidArgument("problem: indicator box dimension does not match the grid");
        }
        for (int a = 0; a < ind->box.dim; ++a) {
            if (!(ind->box.lo[a] < ind->box.hi[a])) {
                throw InvalidArgument("problem: indicator box is degenerate");
            }
        }
        if (support_ == SupportKind::compactly_contained &&
            !ind->box.strictly_inside(grid_.domain())) {
            throw InvalidArgument(
                "problem: support annotated compactly contained but the indicator box is not "
                "strictly inside the domain");
        }
    }
    f_ = sample_datum(datum_, grid_);
    for (double v : f_.values()) {
        if (v < 0.0) throw InvalidArgument("problem: datum f must be nonnegative");
    }
    ellipticity_ = check_ellipticity(coefficients_);
}

const Box* ProblemSpec::support_box() const noexcept {
    if (const auto* ind = std::get_if<IndicatorDatum>(&datum_)) return &ind->box;
    return nullptr;
}

ProblemSpec ProblemSpec::with_gamma(double gamma) const {
    return ProblemSpec(grid_, coefficients_, datum_, gamma, support_);
}

}  // namespace singlim
