// Minimal library usage: build a mesh, describe the material, march the
// coupled system for one regularization level, and print per-step diagnostics.

#include <cmath>
#include <cstdio>

#include "thermistor/coupling.hpp"

using namespace thermistor;

int main() {
    const Mesh mesh = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});

    ConstitutiveSpec spec;
    spec.p = 2.0;
    spec.sigma0 = BoundedProfile::saturating(1.0, 2.0); // conductivity rises with u
    spec.kappa_profile = BoundedProfile::constant(1.0);
    spec.eta1 = 0.9; // 90% of the Joule power heats the material
    spec.eta_value = 0.9;
    spec.g = 1.0;
    spec.h = 0.0;

    CouplingConfig cfg;
    cfg.T_final = 0.2;
    cfg.steps = 20;

    const BoundaryData ramp = [](Vec2 p, double t) {
        return p.x == 0.0 ? 0.0 : std::min(t / 0.1, 1.0);
    };

    const Trajectory traj =
        run_simulation(mesh, cfg, 1e-3, spec, ramp, ScalarField(mesh, 0.0));

    std::printf("step   t        fp  kacanov  ||u||_L1      ||phi||_W12\n");
    for (std::size_t m = 0; m < traj.u.size(); m += 4)
        std::printf("%4zu  %6.3f  %3d  %7d  %.6e  %.6e\n", m, traj.times[m],
                    traj.stats[m].fp_iters, traj.stats[m].kacanov_iters,
                    lp_norm(traj.u[m], 1.0, mesh), w1p_norm(traj.phi[m], 2.0, mesh));
    return 0;
}
