#pragma once

// Quasilinear potential solve by frozen-coefficient (Kacanov) iteration:
// each pass assembles the stiffness with weight sigma(u_K, |grad phi^m|_K)
// frozen per triangle at the barycenter and solves the linear system under
// the Dirichlet trace data.

#include <cmath>
#include <utility>
#include <vector>

#include "thermistor/constitutive.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/estimates.hpp"
#include "thermistor/fem.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

struct PotentialReport {
    int iterations = 0;
    double increment_norm = 0.0; // W^{1,p} seminorm of the last successive difference
    double residual_norm = 0.0;  // Euclidean norm of the free-node residual entries
    bool converged = false;
    std::vector<double> energies; // E(phi) after each linear solve
};

struct PotentialOptions {
    double kacanov_rtol = 1e-10;
    int max_iter = 500; // the iteration is linearly convergent; p far from 2 needs hundreds
    double linear_rtol = 1e-12;
    int linear_max_iter = 20000;
    const ScalarField* initial_guess = nullptr; // harmonic lift of phi_D when null
};

/// E(phi) = sum_K sigma0(u_K) (delta + |grad phi|_K^2)^(p/2) |K|; the natural
/// energy whose minimizer the iteration approaches.
inline double kacanov_energy(const Mesh& mesh, const ScalarField& phi, const ScalarField& u,
                             const ConstitutiveSpec& spec) {
    double e = 0.0;
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const Vec2 g = phi.gradient(k);
        e += spec.sigma0(u.barycentric(k)) *
             std::pow(spec.delta + dot(g, g), spec.p / 2.0) * mesh.signed_area(k);
    }
    return e;
}

namespace detail {

inline std::vector<double> sigma_weights(const Mesh& mesh, const ScalarField& phi,
                                         const ScalarField& u, const ConstitutiveSpec& spec) {
    std::vector<double> w(static_cast<std::size_t>(mesh.triangle_count()));
    for (int k = 0; k < mesh.triangle_count(); ++k)
        w[k] = sigma(spec, u.barycentric(k), norm(phi.gradient(k)));
    return w;
}

inline std::vector<char> dirichlet_mask(const Mesh& mesh) {
    std::vector<char> mask(static_cast<std::size_t>(mesh.node_count()), 0);
    for (int i : mesh.dirichlet_nodes()) mask[i] = 1;
    return mask;
}

} // namespace detail

/// Norm of the assembled nonlinear residual of the weighted-gradient form
/// against all Dirichlet-vanishing nodal test fields.
inline double discrete_residual(const Mesh& mesh, const ScalarField& phi, const ScalarField& u,
                                const ConstitutiveSpec& spec) {
    const auto w = detail::sigma_weights(mesh, phi, u, spec);
    CsrMatrix a = assemble_weighted_stiffness(mesh, w);
    std::vector<double> r(static_cast<std::size_t>(mesh.node_count()));
    a.multiply(phi.v, r);
    const auto mask = detail::dirichlet_mask(mesh);
    double s = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i)
        if (!mask[i]) s += r[i] * r[i];
    return std::sqrt(s);
}

/// Solves the discrete potential equation for a given temperature field.
/// Dirichlet data is a list of (node, value) pairs on Gamma_D nodes.
/// Throws solver_error when the Kacanov cap is exceeded.
inline std::pair<ScalarField, PotentialReport> solve_potential(
    const Mesh& mesh, const ScalarField& u,
    const std::vector<std::pair<int, double>>& dirichlet_values, const ConstitutiveSpec& spec,
    const PotentialOptions& opt = {}) {
    if (spec.p < 2.0 && !(spec.delta > 0.0))
        throw config_error("solve_potential: p < 2 requires delta > 0");
    const auto mask = detail::dirichlet_mask(mesh);

    ScalarField phi(mesh);
    if (opt.initial_guess) {
        phi = *opt.initial_guess;
    } else {
        // Harmonic lift of the boundary data: weight == 1 solve.
        std::vector<double> ones(static_cast<std::size_t>(mesh.triangle_count()), 1.0);
        SparseSystem sys{assemble_weighted_stiffness(mesh, ones),
                         std::vector<double>(static_cast<std::size_t>(mesh.node_count()), 0.0)};
        apply_dirichlet(sys, dirichlet_values, &mask);
        phi.v = solve_sparse(sys, opt.linear_rtol, opt.linear_max_iter).x;
    }

    PotentialReport rep;
    rep.energies.push_back(kacanov_energy(mesh, phi, u, spec));

    double prev_increment = 0.0;
    for (int m = 1; m <= opt.max_iter; ++m) {
        const auto w = detail::sigma_weights(mesh, phi, u, spec);
        SparseSystem sys{assemble_weighted_stiffness(mesh, w),
                         std::vector<double>(static_cast<std::size_t>(mesh.node_count()), 0.0)};
        apply_dirichlet(sys, dirichlet_values, &mask);
        double rhs_scale = 0.0;
        for (double v : sys.rhs) rhs_scale += v * v;
        rhs_scale = std::sqrt(rhs_scale);

        ScalarField next(mesh, solve_sparse(sys, opt.linear_rtol, opt.linear_max_iter).x);

        ScalarField diff(mesh);
        for (int i = 0; i < mesh.node_count(); ++i) diff[i] = next[i] - phi[i];
        rep.iterations = m;
        rep.increment_norm = w1p_seminorm(diff, spec.p, mesh);
        phi = std::move(next);
        rep.energies.push_back(kacanov_energy(mesh, phi, u, spec));
        rep.residual_norm = discrete_residual(mesh, phi, u, spec);

        // Linearly convergent iteration: the distance to the limit is about
        // increment * rho/(1-rho), so test that estimate, not the raw increment.
        double distance = rep.increment_norm;
        if (prev_increment > 0.0 && rep.increment_norm < prev_increment) {
            const double rho =
                std::min(rep.increment_norm / prev_increment, 0.99);
            distance = rep.increment_norm * rho / (1.0 - rho);
        }
        prev_increment = rep.increment_norm;

        const double incr_scale = w1p_seminorm(phi, spec.p, mesh);
        const double tol = opt.kacanov_rtol * (incr_scale + 1e-30);
        if (rep.increment_norm <= tol && distance <= tol &&
            rep.residual_norm <= opt.kacanov_rtol * (1.0 + rhs_scale)) {
            rep.converged = true;
            return {std::move(phi), std::move(rep)};
        }
    }
    throw solver_error("solve_potential: Kacanov cap " + std::to_string(opt.max_iter) +
                           " exceeded, increment " + std::to_string(rep.increment_norm),
                       rep.residual_norm);
}

/// Nodal Dirichlet values of a trace function phi_D(x, t) on Gamma_D, with
/// sides processed in the boundary-edge order of the mesh.
template <class F>
std::vector<std::pair<int, double>> dirichlet_values(const Mesh& mesh, F&& phi_D, double t) {
    std::vector<std::pair<int, double>> vals;
    for (int i : mesh.dirichlet_nodes()) vals.emplace_back(i, phi_D(mesh.nodes[i], t));
    return vals;
}

} // namespace thermistor
