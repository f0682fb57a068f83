#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "singlim/errors.hpp"

namespace singlim {

/// A point of the 1-D or 2-D domain. The second coordinate is ignored in 1-D.
using Point = std::array<double, 2>;

/// Closed axis-aligned box [lo, hi] in `dim` dimensions.
struct Box {
    int dim = 1;
    Point lo{0.0, 0.0};
    Point hi{0.0, 0.0};

    bool contains(const Point& p) const;
    /// True when the closed box lies in the open box `outer`.
    bool strictly_inside(const Box& outer) const;
    /// Euclidean distance from `p` to the boundary of the box (zero on it).
    double distance_to_boundary(const Point& p) const;
    double volume() const;
};

/// Uniform tensor mesh on a 1-D interval or 2-D box; nodes include the boundary.
class Grid {
public:
    Grid() = default;

    int dim() const noexcept { return dim_; }
    double lo(int axis) const { return lo_[axis]; }
    double hi(int axis) const { return hi_[axis]; }
    int cells(int axis) const { return cells_[axis]; }
    int nodes(int axis) const { return cells_[axis] + 1; }
    double h(int axis) const { return h_[axis]; }
    std::size_t node_count() const noexcept;
    /// Volume of the dual cell attached to an interior node.
    double cell_volume() const noexcept;
    Box domain() const;

    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * nodes(0);
    }
    std::array<int, 2> multi_index(std::size_t k) const noexcept;
    Point node(std::size_t k) const noexcept;
    bool is_boundary(std::size_t k) const noexcept;

    bool operator==(const Grid& other) const = default;

    friend Grid make_uniform_grid(std::span<const double> lo, std::span<const double> hi,
                                  std::span<const int> cells);

private:
    int dim_ = 0;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> hi_{0.0, 0.0};
    std::array<int, 2> cells_{0, 0};
    std::array<double, 2> h_{0.0, 0.0};
};

/// Builds a uniform grid. Requires lo < hi and at least 4 cells per axis.
Grid make_uniform_grid(std::span<const double> lo, std::span<const double> hi,
                       std::span<const int> cells);
Grid make_uniform_grid(double lo, double hi, int cells);

/// Nodal values on a grid. Every value is finite.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(Grid grid, std::vector<double> values);

    static GridFunction zeros(const Grid& grid);
    static GridFunction constant(const Grid& grid, double value);
    static GridFunction sample(const Grid& grid, const std::function<double(const Point&)>& fn);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    std::size_t size() const noexcept { return values_.size(); }

    double max_abs() const noexcept;
    double min() const noexcept;
    double max() const noexcept;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Max over nodes of |a - b|. Grids must match.
double max_abs_difference(const GridFunction& a, const GridFunction& b);

/// Symmetric coefficient matrix at one node. In 1-D only `a11` is used.
struct CoefficientMatrix {
    double a11 = 1.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 1.0;
};

/// Nodal coefficient field M(x).
class CoefficientField {
public:
    CoefficientField(Grid grid, std::vector<CoefficientMatrix> entries);

    static CoefficientField identity(const Grid& grid);
    static CoefficientField constant(const Grid& grid, const CoefficientMatrix& m);
    static CoefficientField sample(const Grid& grid,
                                   const std::function<CoefficientMatrix(const Point&)>& fn);

    const Grid& grid() const noexcept { return grid_; }
    const CoefficientMatrix& at(std::size_t k) const { return entries_[k]; }
    bool is_identity() const noexcept;

private:
    Grid grid_;
    std::vector<CoefficientMatrix> entries_;
};

struct Ellipticity {
    double alpha;  ///< smallest eigenvalue over all nodes
    double beta;   ///< largest operator norm over all nodes
};

/// Tightest ellipticity constants of the field. Throws EllipticityViolation
/// on a non-symmetric entry or when alpha <= 0.
Ellipticity check_ellipticity(const CoefficientField& field);

/// T_k(s) = max(-k, min(s, k)).
double truncation(double s, double k);
/// G_k(s) = (|s| - k)^+ sign(s); truncation(s, k) + truncation_excess(s, k) == s.
double truncation_excess(double s, double k);

struct ConstantDatum {
    double value = 1.0;
};

/// value * indicator of the closed sub-box `box`. Nodes on the box boundary
/// take the inside value.
struct IndicatorDatum {
    double value = 1.0;
    Box box;
};

struct TabulatedDatum {
    GridFunction values;
};

using DatumSpec = std::variant<ConstantDatum, IndicatorDatum, TabulatedDatum>;

GridFunction sample_datum(const DatumSpec& datum, const Grid& grid);

enum class SupportKind {
    compactly_contained,  ///< {f > 0} is a sub-box well inside the domain
    strictly_positive,    ///< f bounded below on every compact subset
    general,
};

/// Everything needed to pose -div(M grad u) = f / u^gamma, u = 0 on the boundary.
class ProblemSpec {
public:
    ProblemSpec(Grid grid, CoefficientField coefficients, DatumSpec datum, double gamma,
                SupportKind support);

    const Grid& grid() const noexcept { return grid_; }
    const CoefficientField& coefficients() const noexcept { return coefficients_; }
    const DatumSpec& datum() const noexcept { return datum_; }
    /// The datum sampled on the grid.
    const GridFunction& f() const noexcept { return f_; }
    double gamma() const noexcept { return gamma_; }
    SupportKind support() const noexcept { return support_; }
    const Ellipticity& ellipticity() const noexcept { return ellipticity_; }

    /// The indicator sub-box, when the datum is an indicator.
    const Box* support_box() const noexcept;

    ProblemSpec with_gamma(double gamma) const;

private:
    Grid grid_;
    CoefficientField coefficients_;
    DatumSpec datum_;
    GridFunction f_;
    double gamma_;
    SupportKind support_;
    Ellipticity ellipticity_;
};

}  // namespace singlim
