#pragma once

// P1 assembly (weighted stiffness, mass, boundary mass, load vectors),
// symmetric Dirichlet elimination, and a Jacobi-preconditioned CG solve.
// Reduction order is fixed by the mesh, so assembly is deterministic.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "thermistor/errors.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

/// Symmetric sparse matrix in compressed-row layout (node-adjacency pattern).
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols; // ascending within each row
    std::vector<double> vals;

    static CsrMatrix pattern_of(const Mesh& mesh) {
        const int n = mesh.node_count();
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) adj[i].push_back(i);
        for (const auto& t : mesh.triangles)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (i != j) adj[t[i]].push_back(t[j]);
        CsrMatrix a;
        a.n = n;
        a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 0; i < n; ++i) {
            auto& r = adj[i];
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            a.row_ptr[i + 1] = a.row_ptr[i] + static_cast<int>(r.size());
        }
        a.cols.reserve(a.row_ptr[n]);
        for (int i = 0; i < n; ++i)
            a.cols.insert(a.cols.end(), adj[i].begin(), adj[i].end());
        a.vals.assign(a.cols.size(), 0.0);
        return a;
    }

    double& coeff(int i, int j) {
        auto first = cols.begin() + row_ptr[i], last = cols.begin() + row_ptr[i + 1];
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) throw assembly_error("CsrMatrix: entry outside pattern");
        return vals[static_cast<std::size_t>(it - cols.begin())];
    }

    double get(int i, int j) const {
        auto first = cols.begin() + row_ptr[i], last = cols.begin() + row_ptr[i + 1];
        auto it = std::lower_bound(first, last, j);
        return (it == last || *it != j) ? 0.0 : vals[static_cast<std::size_t>(it - cols.begin())];
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[cols[k]];
            y[i] = s;
        }
    }

    /// this += s * other; both matrices must share the pattern.
    void add_scaled(const CsrMatrix& other, double s) {
        if (other.cols != cols || other.row_ptr != row_ptr)
            throw assembly_error("CsrMatrix::add_scaled: pattern mismatch");
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] += s * other.vals[k];
    }

    void scale(double s) {
        for (auto& v : vals) v *= s;
    }

    std::vector<double> row_sums() const {
        std::vector<double> r(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) r[i] += vals[k];
        return r;
    }

    double max_asymmetry() const {
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                scale = std::max(scale, std::abs(vals[k]));
                worst = std::max(worst, std::abs(vals[k] - get(cols[k], i)));
            }
        return scale > 0.0 ? worst / scale : 0.0;
    }
};

/// Matrix + right-hand side; constraints are applied in place by apply_dirichlet.
struct SparseSystem {
    CsrMatrix A;
    std::vector<double> rhs;
};

/// Entry (i,j) = sum_K w_K * int_K grad(hat_i) . grad(hat_j).
/// Symmetric positive semidefinite; constants lie in the kernel.
inline CsrMatrix assemble_weighted_stiffness(const Mesh& mesh,
                                             std::span<const double> tri_weight) {
    if (static_cast<int>(tri_weight.size()) != mesh.triangle_count())
        throw assembly_error("assemble_weighted_stiffness: one weight per triangle required");
    CsrMatrix a = CsrMatrix::pattern_of(mesh);
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const double w = tri_weight[k];
        if (!(w >= 0.0) || !std::isfinite(w))
            throw assembly_error("assemble_weighted_stiffness: weight must be finite and >= 0");
        const double area = mesh.signed_area(k);
        const auto g = mesh.hat_gradients(k);
        const auto& t = mesh.triangles[k];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                a.coeff(t[i], t[j]) += w * area * dot(g[i], g[j]);
    }
    return a;
}

/// Consistent P1 mass matrix (exact), or its row-sum lumped diagonal.
inline CsrMatrix assemble_mass(const Mesh& mesh, bool lumped = false) {
    CsrMatrix a = CsrMatrix::pattern_of(mesh);
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const double area = mesh.signed_area(k);
        const auto& t = mesh.triangles[k];
        if (lumped) {
            for (int i = 0; i < 3; ++i) a.coeff(t[i], t[i]) += area / 3.0;
        } else {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    a.coeff(t[i], t[j]) += area / 12.0 * (i == j ? 2.0 : 1.0);
        }
    }
    return a;
}

/// Boundary mass over edges matching the tag filter (all edges when empty):
/// per edge of length l the exact 2x2 block l/6 * [[2,1],[1,2]].
inline CsrMatrix assemble_boundary_mass(const Mesh& mesh,
                                        std::optional<BoundaryTag> filter = std::nullopt,
                                        bool lumped = false) {
    CsrMatrix a = CsrMatrix::pattern_of(mesh);
    for (const auto& e : mesh.boundary_edges) {
        if (filter && e.tag != *filter) continue;
        const double len = norm(mesh.nodes[e.b] - mesh.nodes[e.a]);
        if (lumped) {
            a.coeff(e.a, e.a) += len / 2.0;
            a.coeff(e.b, e.b) += len / 2.0;
        } else {
            a.coeff(e.a, e.a) += len / 3.0;
            a.coeff(e.b, e.b) += len / 3.0;
            a.coeff(e.a, e.b) += len / 6.0;
            a.coeff(e.b, e.a) += len / 6.0;
        }
    }
    return a;
}

/// Load vector of f by the one-point barycenter rule: F_i += f(x_K) * |K| / 3.
template <class F>
std::vector<double> assemble_load_barycenter(const Mesh& mesh, F&& f) {
    std::vector<double> load(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const double contrib = f(k) * mesh.signed_area(k) / 3.0;
        for (int i : mesh.triangles[k]) load[i] += contrib;
    }
    return load;
}

/// b_i = int over tagged boundary edges of hat_i (exact: l/2 per endpoint).
inline std::vector<double> assemble_boundary_load(
    const Mesh& mesh, std::optional<BoundaryTag> filter = std::nullopt) {
    std::vector<double> b(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (const auto& e : mesh.boundary_edges) {
        if (filter && e.tag != *filter) continue;
        const double len = norm(mesh.nodes[e.b] - mesh.nodes[e.a]);
        b[e.a] += len / 2.0;
        b[e.b] += len / 2.0;
    }
    return b;
}

/// Symmetric elimination: couplings of constrained unknowns move to the rhs,
/// constrained rows/columns collapse to the identity so the solve reproduces
/// prescribed values exactly. When `admissible` is given, every constrained
/// node must be flagged in it.
inline void apply_dirichlet(SparseSystem& sys,
                            const std::vector<std::pair<int, double>>& values,
                            const std::vector<char>* admissible = nullptr) {
    const int n = sys.A.n;
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    std::vector<double> val(static_cast<std::size_t>(n), 0.0);
    for (const auto& [node, value] : values) {
        if (node < 0 || node >= n) throw constraint_error("apply_dirichlet: node out of range");
        if (admissible && !(*admissible)[node])
            throw constraint_error("apply_dirichlet: node " + std::to_string(node) +
                                   " is not on a Dirichlet boundary");
        fixed[node] = 1;
        val[node] = value;
    }
    for (int i = 0; i < n; ++i) {
        if (fixed[i]) {
            for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k)
                sys.A.vals[k] = (sys.A.cols[k] == i) ? 1.0 : 0.0;
            sys.rhs[i] = val[i];
        } else {
            for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k) {
                const int j = sys.A.cols[k];
                if (fixed[j]) {
                    sys.rhs[i] -= sys.A.vals[k] * val[j];
                    sys.A.vals[k] = 0.0;
                }
            }
        }
    }
}

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0; // ||Ax - b|| / ||b||
};

/// Jacobi-preconditioned conjugate gradients; deterministic given inputs.
/// Stops at ||Ax - b|| <= rtol * ||b||; throws solver_error past max_iter.
inline CgResult solve_sparse(const SparseSystem& sys, double rtol, int max_iter) {
    const int n = sys.A.n;
    const auto& A = sys.A;
    const auto& b = sys.rhs;

    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    double b_norm = 0.0;
    for (double v : b) b_norm += v * v;
    b_norm = std::sqrt(b_norm);
    if (b_norm == 0.0) return {std::move(x), 0, 0.0};

    std::vector<double> diag(static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        const double d = A.get(i, i);
        if (d > 0.0) diag[i] = 1.0 / d;
    }

    std::vector<double> r = b, z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)),
                        ap(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[i] = diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];

    double res = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        A.multiply(p, ap);
        double pap = 0.0;
        for (int i = 0; i < n; ++i) pap += p[i] * ap[i];
        if (!(pap > 0.0))
            throw solver_error("solve_sparse: matrix is not positive definite", res);
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double rn = 0.0;
        for (int i = 0; i < n; ++i) rn += r[i] * r[i];
        res = std::sqrt(rn) / b_norm;
        if (res <= rtol) return {std::move(x), it, res};
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) {
            z[i] = diag[i] * r[i];
            rz_new += r[i] * z[i];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw solver_error("solve_sparse: iteration cap " + std::to_string(max_iter) +
                           " exceeded, residual " + std::to_string(res),
                       res);
}

} // namespace thermistor
