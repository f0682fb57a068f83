#include "singlim/elliptic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace singlim {
namespace {

using Triplet = Eigen::Triplet<double>;

// Accumulates edge weights into triplets over the interior unknowns.
class EdgeAssembler {
public:
    EdgeAssembler(const std::vector<long>& unknown_of_node, std::vector<Triplet>& triplets)
        : unknown_of_node_(unknown_of_node), triplets_(triplets) {}

    void add(std::size_t p, std::size_t q, double weight) {
        if (weight < 0.0) {
            std::ostringstream msg;
            msg << "assemble: negative edge weight " << weight << " between nodes " << p
                << " and " << q << "; the stencil would not be an M-matrix";
            throw InvalidArgument(msg.str());
        }
        if (weight == 0.0) return;
        const long up = unknown_of_node_[p];
        const long uq = unknown_of_node_[q];
        if (up >= 0) triplets_.emplace_back(up, up, weight);
        if (uq >= 0) triplets_.emplace_back(uq, uq, weight);
        if (up >= 0 && uq >= 0) {
            triplets_.emplace_back(up, uq, -weight);
            triplets_.emplace_back(uq, up, -weight);
        }
    }

private:
    const std::vector<long>& unknown_of_node_;
    std::vector<Triplet>& triplets_;
};

double residual_norm(const SparseOperator::Matrix& a, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& b) {
    return b.size() == 0 ? 0.0 : (a * x - b).lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd direct_solve(const SparseOperator::Matrix& a, const Eigen::VectorXd& b) {
    Eigen::SimplicialLDLT<SparseOperator::Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success) {
        throw LinearSolveFailure("linear solve: factorisation failed", std::nan(""));
    }
    Eigen::VectorXd x = ldlt.solve(b);
    // One step of iterative refinement.
    const Eigen::VectorXd r = b - a * x;
    x += ldlt.solve(r);
    return x;
}

Eigen::VectorXd iterative_solve(const SparseOperator::Matrix& a, const Eigen::VectorXd& b) {
    Eigen::ConjugateGradient<SparseOperator::Matrix, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * a.rows()));
    cg.compute(a);
    return cg.solve(b);
}

Eigen::VectorXd checked_solve(const SparseOperator::Matrix& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = static_cast<std::size_t>(a.rows()) <= kDirectSolveLimit
                            ? direct_solve(a, b)
                            : iterative_solve(a, b);
    const double scale = 1.0 + (b.size() ? b.lpNorm<Eigen::Infinity>() : 0.0);
    const double res = residual_norm(a, x, b);
    if (!(res <= 1e-10 * scale)) {
        std::ostringstream msg;
        msg << "linear solve: residual " << res << " above tolerance " << 1e-10 * scale;
        throw LinearSolveFailure(msg.str(), res);
    }
    return x;
}

}  // namespace

Eigen::VectorXd SparseOperator::restrict_to_interior(const GridFunction& g) const {
    if (!(g.grid() == grid_)) throw InvalidArgument("operator and grid function grids differ");
    Eigen::VectorXd x(static_cast<Eigen::Index>(unknowns()));
    for (std::size_t u = 0; u < unknowns(); ++u) x[static_cast<Eigen::Index>(u)] = g[node_of(u)];
    return x;
}

GridFunction SparseOperator::extend_by_zero(const Eigen::VectorXd& interior) const {
    std::vector<double> values(grid_.node_count(), 0.0);
    for (std::size_t u = 0; u < unknowns(); ++u) {
        values[node_of(u)] = interior[static_cast<Eigen::Index>(u)];
    }
    return GridFunction(grid_, std::move(values));
}

SparseOperator assemble(const Grid& grid, const CoefficientField& m) {
    if (!(m.grid() == grid)) throw InvalidArgument("assemble: coefficient field grid mismatch");
    check_ellipticity(m);

    SparseOperator op;
    op.grid_ = grid;
    op.unknown_of_node_.assign(grid.node_count(), -1);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (!grid.is_boundary(k)) {
            op.unknown_of_node_[k] = static_cast<long>(op.interior_nodes_.size());
            op.interior_nodes_.push_back(k);
        }
    }

    std::vector<Triplet> triplets;
    EdgeAssembler edges(op.unknown_of_node_, triplets);

    if (grid.dim() == 1) {
        const double inv_h2 = 1.0 / (grid.h(0) * grid.h(0));
        for (int i = 0; i < grid.cells(0); ++i) {
            const double a = 0.5 * (m.at(i).a11 + m.at(i + 1).a11);
            edges.add(grid.index(i), grid.index(i + 1), a * inv_h2);
        }
    } else {
        const double hx = grid.h(0);
        const double hy = grid.h(1);
        const int nx = grid.cells(0);
        const int ny = grid.cells(1);
        // Per-node weights; the cross term a12 is routed through the diagonal
        // neighbour whose direction matches its sign.
        auto axial_x = [&](std::size_t k) {
            const auto& c = m.at(k);
            return (c.a11 - std::abs(c.a12) * hx / hy) / (hx * hx);
        };
        auto axial_y = [&](std::size_t k) {
            const auto& c = m.at(k);
            return (c.a22 - std::abs(c.a12) * hy / hx) / (hy * hy);
        };
        auto diag_pp = [&](std::size_t k) { return std::max(m.at(k).a12, 0.0) / (hx * hy); };
        auto diag_pm = [&](std::size_t k) { return std::max(-m.at(k).a12, 0.0) / (hx * hy); };

        for (int j = 0; j <= ny; ++j) {
            for (int i = 0; i <= nx; ++i) {
                const std::size_t p = grid.index(i, j);
                if (i < nx) {
                    const std::size_t q = grid.index(i + 1, j);
                    edges.add(p, q, 0.5 * (axial_x(p) + axial_x(q)));
                }
                if (j < ny) {
                    const std::size_t q = grid.index(i, j + 1);
                    edges.add(p, q, 0.5 * (axial_y(p) + axial_y(q)));
                }
                if (i < nx && j < ny) {
                    const std::size_t q = grid.index(i + 1, j + 1);
                    edges.add(p, q, 0.5 * (diag_pp(p) + diag_pp(q)));
                }
                if (i < nx && j > 0) {
                    const std::size_t q = grid.index(i + 1, j - 1);
                    edges.add(p, q, 0.5 * (diag_pm(p) + diag_pm(q)));
                }
            }
        }
    }

    const auto n = static_cast<Eigen::Index>(op.interior_nodes_.size());
    op.matrix_.resize(n, n);
    op.matrix_.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix_.makeCompressed();
    return op;
}

GridFunction apply(const SparseOperator& op, const GridFunction& u) {
    const Eigen::VectorXd x = op.restrict_to_interior(u);
    return op.extend_by_zero(op.matrix() * x);
}

GridFunction solve_linear(const SparseOperator& op, const GridFunction& rhs) {
    const Eigen::VectorXd b = op.restrict_to_interior(rhs);
    return op.extend_by_zero(checked_solve(op.matrix(), b));
}

std::size_t nearest_interior_node(const Grid& grid, const Point& p) {
    std::array<int, 2> idx{0, 0};
    for (int a = 0; a < grid.dim(); ++a) {
        const double r = (p[a] - grid.lo(a)) / grid.h(a);
        int i = static_cast<int>(std::floor(r));
        if (r - i > 0.5) ++i;
        idx[a] = std::clamp(i, 1, grid.cells(a) - 1);
    }
    return grid.index(idx[0], idx[1]);
}

GridFunction solve_measure(const SparseOperator& op, const MeasureData& mu) {
    const Grid& grid = op.grid();
    std::vector<double> load(grid.node_count(), 0.0);
    for (const auto& atom : mu.atoms) {
        for (int a = 0; a < grid.dim(); ++a) {
            if (!(atom.location[a] > grid.lo(a) && atom.location[a] < grid.hi(a))) {
                std::ostringstream msg;
                msg << "solve_measure: atom location on or outside the boundary (axis " << a
                    << ", coordinate " << atom.location[a] << ")";
                throw InvalidArgument(msg.str());
            }
        }
        load[nearest_interior_node(grid, atom.location)] += atom.mass / grid.cell_volume();
    }
    return solve_linear(op, GridFunction(grid, std::move(load)));
}

GridFunction solve_with_fixed_values(const SparseOperator& op,
                                     const std::vector<std::optional<double>>& fixed) {
    const Grid& grid = op.grid();
    if (fixed.size() != grid.node_count()) {
        throw InvalidArgument("solve_with_fixed_values: mask size does not match node count");
    }
    // Free unknowns are interior nodes without a prescribed value.
    std::vector<long> free_of_unknown(op.unknowns(), -1);
    std::vector<std::size_t> free_unknowns;
    for (std::size_t u = 0; u < op.unknowns(); ++u) {
        if (!fixed[op.node_of(u)]) {
            free_of_unknown[u] = static_cast<long>(free_unknowns.size());
            free_unknowns.push_back(u);
        }
    }
    const auto nf = static_cast<Eigen::Index>(free_unknowns.size());
    std::vector<Triplet> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    const auto& a = op.matrix();
    for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
        for (SparseOperator::Matrix::InnerIterator it(a, col); it; ++it) {
            const long fr = free_of_unknown[static_cast<std::size_t>(it.row())];
            if (fr < 0) continue;
            const long fc = free_of_unknown[static_cast<std::size_t>(it.col())];
            if (fc >= 0) {
                triplets.emplace_back(fr, fc, it.value());
            } else {
                rhs[fr] -= it.value() * *fixed[op.node_of(static_cast<std::size_t>(it.col()))];
            }
        }
    }
    SparseOperator::Matrix reduced(nf, nf);
    reduced.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::VectorXd x = nf > 0 ? checked_solve(reduced, rhs) : Eigen::VectorXd();

    std::vector<double> values(grid.node_count(), 0.0);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (!grid.is_boundary(k) && fixed[k]) values[k] = *fixed[k];
    }
    for (std::size_t f = 0; f < free_unknowns.size(); ++f) {
        values[op.node_of(free_unknowns[f])] = x[static_cast<Eigen::Index>(f)];
    }
    return GridFunction(grid, std::move(values));
}

struct ShiftedSolver::Impl {
    const SparseOperator& op;
    SparseOperator::Matrix shifted;
    std::vector<Eigen::Index> diagonal_slots;
    Eigen::SimplicialLDLT<SparseOperator::Matrix> ldlt;
    bool analysed = false;

    explicit Impl(const SparseOperator& o) : op(o), shifted(o.matrix()) {
        const Eigen::Index n = shifted.rows();
        diagonal_slots.assign(static_cast<std::size_t>(n), -1);
        for (Eigen::Index col = 0; col < shifted.outerSize(); ++col) {
            for (SparseOperator::Matrix::InnerIterator it(shifted, col); it; ++it) {
                if (it.row() == col) {
                    diagonal_slots[static_cast<std::size_t>(col)] =
                        &it.valueRef() - shifted.valuePtr();
                }
            }
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            if (diagonal_slots[static_cast<std::size_t>(c)] < 0) {
                throw InvalidArgument("shifted solver: operator has an empty diagonal entry");
            }
        }
    }
};

ShiftedSolver::ShiftedSolver(const SparseOperator& op) : impl_(std::make_unique<Impl>(op)) {}

ShiftedSolver::~ShiftedSolver() = default;

Eigen::VectorXd ShiftedSolver::solve(const Eigen::VectorXd& shift, const Eigen::VectorXd& rhs) {
    auto& s = *impl_;
    const auto& base = s.op.matrix();
    double* values = s.shifted.valuePtr();
    const double* base_values = base.valuePtr();
    for (std::size_t c = 0; c < s.diagonal_slots.size(); ++c) {
        const auto slot = s.diagonal_slots[c];
        values[slot] = base_values[slot] + shift[static_cast<Eigen::Index>(c)];
    }
    if (s.op.unknowns() > kDirectSolveLimit) return iterative_solve(s.shifted, rhs);
    if (!s.analysed) {
        s.ldlt.analyzePattern(s.shifted);
        s.analysed = true;
    }
    s.ldlt.factorize(s.shifted);
    if (s.ldlt.info() != Eigen::Success) {
        throw LinearSolveFailure("shifted solve: factorisation failed", std::nan(""));
    }
    Eigen::VectorXd x = s.ldlt.solve(rhs);
    const Eigen::VectorXd r = rhs - s.shifted * x;
    x += s.ldlt.solve(r);
    return x;
}

}  // namespace singlim
