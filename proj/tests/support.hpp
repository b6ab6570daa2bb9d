#pragma once

// Test-only oracles, kept independent of the library's assembly and solve
// paths: a dense reference assembler and a dense Gaussian-elimination solver.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "thermistor/fem.hpp"
#include "thermistor/mesh.hpp"

namespace testsupport {

using thermistor::Mesh;
using thermistor::ScalarField;
using thermistor::Vec2;

using Dense = std::vector<std::vector<double>>;

inline Dense dense_zero(int n) { return Dense(n, std::vector<double>(n, 0.0)); }

// Reference stiffness assembly: element matrices from shape-function
// coefficients solved out of the 3x3 Vandermonde system rather than the
// edge-vector formula the library uses.
inline Dense dense_weighted_stiffness(const Mesh& mesh, const std::vector<double>& w) {
    Dense A = dense_zero(mesh.node_count());
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const auto& t = mesh.triangles[k];
        // Solve [1 x_i y_i][a b c]^T = e_i for each vertex.
        std::array<std::array<double, 3>, 3> V{};
        for (int i = 0; i < 3; ++i)
            V[i] = {1.0, mesh.nodes[t[i]].x, mesh.nodes[t[i]].y};
        const double det = V[0][0] * (V[1][1] * V[2][2] - V[1][2] * V[2][1]) -
                           V[0][1] * (V[1][0] * V[2][2] - V[1][2] * V[2][0]) +
                           V[0][2] * (V[1][0] * V[2][1] - V[1][1] * V[2][0]);
        std::array<Vec2, 3> grad{};
        for (int i = 0; i < 3; ++i) {
            // Cramer: b and c coefficients of the i-th hat function.
            std::array<std::array<double, 3>, 3> Mb = V, Mc = V;
            for (int r = 0; r < 3; ++r) {
                Mb[r][1] = (r == i) ? 1.0 : 0.0;
                Mc[r][2] = (r == i) ? 1.0 : 0.0;
            }
            auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
                return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            };
            grad[i] = {det3(Mb) / det, det3(Mc) / det};
        }
        const double area = std::abs(det) / 2.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                A[t[i]][t[j]] += w[k] * area * (grad[i].x * grad[j].x + grad[i].y * grad[j].y);
    }
    return A;
}

// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(Dense A, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return x;
}

// Consistent-mass L2 norm sqrt(v^T M v) — the exact L2 norm of the P1 function.
inline double consistent_l2(const ScalarField& f, const Mesh& mesh) {
    const auto M = thermistor::assemble_mass(mesh, false);
    std::vector<double> mv(f.v.size());
    M.multiply(f.v, mv);
    double s = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * mv[i];
    return std::sqrt(s);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Restriction of a field on an (s*nx, s*ny) grid to the (nx, ny) grid nodes.
inline ScalarField restrict_structured(const ScalarField& fine, const Mesh& fine_mesh,
                                       const Mesh& coarse_mesh) {
    const int s = fine_mesh.nx / coarse_mesh.nx;
    ScalarField out(coarse_mesh);
    for (int j = 0; j <= coarse_mesh.ny; ++j)
        for (int i = 0; i <= coarse_mesh.nx; ++i)
            out[j * (coarse_mesh.nx + 1) + i] =
                fine[j * s * (fine_mesh.nx + 1) + i * s];
    return out;
}

// Checkerboard temperature field at 4x4-cell granularity; node-consistent
// across structured refinements of the unit square.
inline double checkerboard(Vec2 p) {
    const int ix = std::min(3, static_cast<int>(p.x * 4.0));
    const int iy = std::min(3, static_cast<int>(p.y * 4.0));
    return ((ix + iy) % 2 == 0) ? 0.0 : 1.0;
}

} // namespace testsupport
