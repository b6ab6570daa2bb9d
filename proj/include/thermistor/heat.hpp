#pragma once

// One implicit-Euler step of the heat equation with the Robin boundary term
// and coefficients frozen at a designated field:
//   (M/dt + A_kappa + g B) u_next = M/dt u_prev + g h b + F_eps.
// The step is linear; the coupling loop supplies the freezing field.

#include <cmath>
#include <vector>

#include "thermistor/constitutive.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/fem.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

struct HeatStepInputs {
    const Mesh& mesh;
    const ScalarField& u_prev;
    const ScalarField& phi;
    double t = 0.0;
    double dt = 0.0;
    double eps = 0.0;
    const ConstitutiveSpec& spec;
    bool lumped_mass = false;
    double linear_rtol = 1e-12;
    int linear_max_iter = 20000;
};

/// kappa and the source's u-argument are evaluated at kappa_freeze; phi enters
/// through its per-triangle gradient. Pure Robin problem, no Dirichlet set.
inline ScalarField step_heat(const HeatStepInputs& in, const ScalarField& kappa_freeze) {
    if (!(in.dt > 0.0)) throw config_error("step_heat: dt must be > 0");
    if (!(in.eps > 0.0)) throw config_error("step_heat: eps must be > 0");
    const Mesh& mesh = in.mesh;

    std::vector<double> kw(static_cast<std::size_t>(mesh.triangle_count()));
    for (int k = 0; k < mesh.triangle_count(); ++k)
        kw[k] = kappa(in.spec, kappa_freeze.barycentric(k));

    CsrMatrix M = assemble_mass(mesh, in.lumped_mass);
    CsrMatrix sysA = assemble_weighted_stiffness(mesh, kw);
    sysA.add_scaled(M, 1.0 / in.dt);
    sysA.add_scaled(assemble_boundary_mass(mesh, std::nullopt, in.lumped_mass), in.spec.g);

    std::vector<double> rhs(static_cast<std::size_t>(mesh.node_count()), 0.0);
    M.multiply(in.u_prev.v, rhs);
    for (auto& v : rhs) v /= in.dt;
    const auto b = assemble_boundary_load(mesh);
    for (int i = 0; i < mesh.node_count(); ++i) rhs[i] += in.spec.g * in.spec.h * b[i];
    const auto f_eps = assemble_load_barycenter(mesh, [&](int k) {
        return source_f_eps(in.spec, mesh.barycenter(k), in.t, kappa_freeze.barycentric(k),
                            in.phi.gradient(k), in.eps);
    });
    for (int i = 0; i < mesh.node_count(); ++i) rhs[i] += f_eps[i];

    SparseSystem sys{std::move(sysA), std::move(rhs)};
    return ScalarField(mesh, solve_sparse(sys, in.linear_rtol, in.linear_max_iter).x);
}

/// u_{0,eps}: one mass-weighted one-ring average blended into the nodal data
/// with weight eps/(eps + h); identity as eps -> 0, exact for constants.
inline ScalarField smooth_initial_data(const Mesh& mesh, const ScalarField& u0, double eps) {
    if (!(eps > 0.0)) throw config_error("smooth_initial_data: eps must be > 0");
    const double w = eps / (eps + mesh.mesh_size());
    const CsrMatrix M = assemble_mass(mesh, false);
    std::vector<double> mu(static_cast<std::size_t>(mesh.node_count()));
    M.multiply(u0.v, mu);
    const auto msum = M.row_sums();
    ScalarField out(mesh);
    for (int i = 0; i < mesh.node_count(); ++i)
        out[i] = (1.0 - w) * u0[i] + w * mu[i] / msum[i];
    return out;
}

} // namespace thermistor
