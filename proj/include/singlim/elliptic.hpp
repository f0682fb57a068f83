#pragma once

#include <Eigen/Sparse>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "singlim/grid.hpp"

namespace singlim {

/// Discrete -div(M grad .) with homogeneous Dirichlet data, acting on the
/// interior nodes of a grid. Assembled as a weighted graph Laplacian, so the
/// matrix is symmetric with nonpositive off-diagonal entries.
class SparseOperator {
public:
    using Matrix = Eigen::SparseMatrix<double>;

    const Grid& grid() const noexcept { return grid_; }
    const Matrix& matrix() const noexcept { return matrix_; }
    std::size_t unknowns() const noexcept { return interior_nodes_.size(); }
    /// Grid node behind unknown `u`.
    std::size_t node_of(std::size_t u) const { return interior_nodes_[u]; }
    /// Unknown index of a node, or -1 for boundary nodes.
    long unknown_of(std::size_t node) const { return unknown_of_node_[node]; }

    /// Restricts a grid function to the interior unknowns.
    Eigen::VectorXd restrict_to_interior(const GridFunction& g) const;
    /// Lifts interior values to a grid function with zero boundary values.
    GridFunction extend_by_zero(const Eigen::VectorXd& interior) const;

    friend SparseOperator assemble(const Grid& grid, const CoefficientField& m);

private:
    Grid grid_;
    Matrix matrix_;
    std::vector<std::size_t> interior_nodes_;
    std::vector<long> unknown_of_node_;
};

/// Builds the operator. Face coefficients are arithmetic means of the two
/// adjacent nodes; off-diagonal tensor entries use the diagonal neighbour
/// matching their sign. Throws EllipticityViolation for a non-elliptic field
/// and InvalidArgument when the resulting stencil is not an M-matrix.
SparseOperator assemble(const Grid& grid, const CoefficientField& m);

/// A*u at the interior nodes (boundary entries are zero).
GridFunction apply(const SparseOperator& op, const GridFunction& u);

/// Solves A u = rhs on interior nodes, u = 0 on the boundary. The residual
/// infinity norm is at most 1e-10 * (1 + |rhs|_inf) or LinearSolveFailure is thrown.
GridFunction solve_linear(const SparseOperator& op, const GridFunction& rhs);

struct Atom {
    Point location{0.0, 0.0};
    double mass = 0.0;
};

/// Finite atomic measure sum_i mass_i * delta_{location_i}.
struct MeasureData {
    std::vector<Atom> atoms;
};

/// Interior node closest to `p` (ties go to the lower index on each axis).
std::size_t nearest_interior_node(const Grid& grid, const Point& p);

/// Solves A u = mu with each atom lumped to its nearest interior node as a
/// nodal load mass / cell volume.
GridFunction solve_measure(const SparseOperator& op, const MeasureData& mu);

/// Solves A u = 0 at interior nodes without a prescribed value, holding the
/// prescribed nodes fixed. `fixed` is indexed by grid node; boundary nodes are 0.
GridFunction solve_with_fixed_values(const SparseOperator& op,
                                     const std::vector<std::optional<double>>& fixed);

/// Repeated solves of (A + diag(shift)) x = b with shift >= 0, as needed by
/// Newton iterations. The sparsity pattern is analysed once.
class ShiftedSolver {
public:
    explicit ShiftedSolver(const SparseOperator& op);
    ~ShiftedSolver();
    ShiftedSolver(const ShiftedSolver&) = delete;
    ShiftedSolver& operator=(const ShiftedSolver&) = delete;

    Eigen::VectorXd solve(const Eigen::VectorXd& shift, const Eigen::VectorXd& rhs);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Unknown count above which iterative CG replaces the direct factorisation.
inline constexpr std::size_t kDirectSolveLimit = 100000;

}  // namespace singlim
