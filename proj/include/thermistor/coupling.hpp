#pragma once

// Per-time-step Gauss-Seidel fixed point between the potential and heat
// subproblems, the implicit-Euler time loop, and the epsilon-continuation
// study with its per-epsilon estimate ledger.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thermistor/constitutive.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/estimates.hpp"
#include "thermistor/heat.hpp"
#include "thermistor/mesh.hpp"
#include "thermistor/potential.hpp"

namespace thermistor {

struct CouplingConfig {
    double T_final = 1.0;
    int steps = 10; // dt = T_final / steps
    std::vector<double> eps_schedule = {1e-1, 1e-2, 1e-3, 1e-4};
    double fp_rtol = 1e-8;
    int fp_max_iter = 50;
    double kacanov_rtol = 1e-10;
    int kacanov_max_iter = 500;
    double linear_rtol = 1e-12;
    int linear_max_iter = 20000;
    double q = 9.0 / 8.0;  // gradient-integrability exponent, in (1, 4/3)
    double r = 1.5;        // space-time integrability exponent, in (1, 2)
    double omega = 1.0;    // under-relaxation of the outer fixed point
    bool lumped_mass = false;
    double lambda_override = 0.0; // 0 = derive from q

    /// lambda = (n+2 - q(n+1))/n with n = 2.
    double lambda() const {
        return lambda_override > 0.0 ? lambda_override : (4.0 - 3.0 * q) / 2.0;
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        if (!(T_final > 0.0)) errs.push_back("T_final must be > 0");
        if (steps < 1) errs.push_back("steps must be >= 1");
        if (eps_schedule.empty()) errs.push_back("eps_schedule must be non-empty");
        for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
            if (!(eps_schedule[i] > 0.0)) errs.push_back("eps_schedule entries must be > 0");
            if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
                errs.push_back("eps_schedule must be strictly decreasing");
        }
        if (!(fp_rtol > 0.0) || !(kacanov_rtol > 0.0) || !(linear_rtol > 0.0))
            errs.push_back("tolerances must be > 0");
        if (fp_max_iter < 1 || kacanov_max_iter < 1 || linear_max_iter < 1)
            errs.push_back("iteration caps must be >= 1");
        if (!(q > 1.0 && q < 4.0 / 3.0)) errs.push_back("q must lie in (1, 4/3)");
        if (!(r > 1.0 && r < 2.0)) errs.push_back("r must lie in (1, 2)");
        if (!(omega > 0.0 && omega <= 1.0)) errs.push_back("omega must lie in (0, 1]");
        const double l = lambda();
        if (!(l > 0.0 && l < 1.0)) errs.push_back("lambda must lie in (0,1)");
        return errs;
    }
};

/// Dirichlet trace data phi_D(x, t).
using BoundaryData = std::function<double(Vec2, double)>;

struct StepStats {
    int fp_iters = 0;
    int kacanov_iters = 0; // summed over the step's potential solves
    PotentialReport last_report;
    std::vector<double> fp_residual_history;
    bool converged = true;
};

/// Discrete (phi, u) pair over the time grid, including the initial state.
struct Trajectory {
    const Mesh* mesh = nullptr;
    double eps = 0.0;
    std::vector<double> times;
    std::vector<ScalarField> u;
    std::vector<ScalarField> phi;
    std::vector<StepStats> stats;        // stats[0] covers the initial potential solve
    std::vector<double> lift_w1p;        // per-time full W^{1,p} norm of the harmonic lift
    std::vector<double> f_eps_per_step;  // int_Omega f_eps at each time sample
};

namespace detail {

inline double l2_distance(const ScalarField& a, const ScalarField& b, const Mesh& mesh) {
    ScalarField d(mesh);
    for (int i = 0; i < mesh.node_count(); ++i) d[i] = a[i] - b[i];
    return lp_norm(d, 2.0, mesh);
}

inline ScalarField harmonic_lift(const Mesh& mesh,
                                 const std::vector<std::pair<int, double>>& bc,
                                 const CouplingConfig& cfg) {
    std::vector<double> ones(static_cast<std::size_t>(mesh.triangle_count()), 1.0);
    std::vector<char> mask(static_cast<std::size_t>(mesh.node_count()), 0);
    for (int i : mesh.dirichlet_nodes()) mask[i] = 1;
    SparseSystem sys{assemble_weighted_stiffness(mesh, ones),
                     std::vector<double>(static_cast<std::size_t>(mesh.node_count()), 0.0)};
    apply_dirichlet(sys, bc, &mask);
    return ScalarField(mesh, solve_sparse(sys, cfg.linear_rtol, cfg.linear_max_iter).x);
}

} // namespace detail

/// One application of the map T: solve the potential at the current iterate,
/// then one linear heat step with coefficients frozen at that iterate.
inline std::pair<ScalarField, ScalarField> fixed_point_map(
    const Mesh& mesh, const ScalarField& u_k, const ScalarField& u_prev, double t, double dt,
    double eps, const std::vector<std::pair<int, double>>& phi_bc, const ConstitutiveSpec& spec,
    const CouplingConfig& cfg, PotentialReport* report = nullptr) {
    PotentialOptions popt;
    popt.kacanov_rtol = cfg.kacanov_rtol;
    popt.max_iter = cfg.kacanov_max_iter;
    popt.linear_rtol = cfg.linear_rtol;
    popt.linear_max_iter = cfg.linear_max_iter;
    auto [phi, rep] = solve_potential(mesh, u_k, phi_bc, spec, popt);
    if (report) *report = rep;

    HeatStepInputs in{mesh, u_prev, phi,  t,
                      dt,   eps,    spec, cfg.lumped_mass,
                      cfg.linear_rtol, cfg.linear_max_iter};
    ScalarField u_next = step_heat(in, u_k);
    return {std::move(u_next), std::move(phi)};
}

struct TimestepResult {
    ScalarField u;
    ScalarField phi;
    StepStats stats;
};

/// Picard iteration of the map T from the given seed until the L2 increment
/// drops below fp_rtol * (1 + ||u||_L2). Throws coupling_error past the cap.
inline TimestepResult solve_timestep(const Mesh& mesh, const ScalarField& u_prev,
                                     const ScalarField& seed, double t, double dt, double eps,
                                     const std::vector<std::pair<int, double>>& phi_bc,
                                     const ConstitutiveSpec& spec, const CouplingConfig& cfg) {
    ScalarField u_k = seed;
    TimestepResult res{ScalarField(mesh), ScalarField(mesh), {}};
    for (int k = 1; k <= cfg.fp_max_iter; ++k) {
        PotentialReport rep;
        auto [u_hat, phi] = fixed_point_map(mesh, u_k, u_prev, t, dt, eps, phi_bc, spec, cfg, &rep);
        ScalarField u_next(mesh);
        for (int i = 0; i < mesh.node_count(); ++i)
            u_next[i] = (1.0 - cfg.omega) * u_k[i] + cfg.omega * u_hat[i];

        res.stats.fp_iters = k;
        res.stats.kacanov_iters += rep.iterations;
        res.stats.last_report = rep;
        const double incr = detail::l2_distance(u_next, u_k, mesh);
        res.stats.fp_residual_history.push_back(incr);

        u_k = u_next;
        if (incr <= cfg.fp_rtol * (1.0 + lp_norm(u_next, 2.0, mesh))) {
            res.u = std::move(u_k);
            res.phi = std::move(phi);
            return res;
        }
        res.phi = std::move(phi);
    }
    throw coupling_error("solve_timestep: fixed point did not converge in " +
                             std::to_string(cfg.fp_max_iter) + " iterations at t = " +
                             std::to_string(t),
                         res.stats.fp_residual_history);
}

enum class SeedMode : std::uint8_t { previous, zero };

/// Marches the full time loop for one epsilon. The optional warm trajectory
/// seeds each step's fixed point with the corresponding state of a previous
/// run (used by the continuation).
inline Trajectory run_simulation(const Mesh& mesh, const CouplingConfig& cfg, double eps,
                                 const ConstitutiveSpec& spec, const BoundaryData& phi_D,
                                 const ScalarField& u0, const Trajectory* warm = nullptr,
                                 SeedMode seed_mode = SeedMode::previous) {
    if (!(eps > 0.0)) throw config_error("run_simulation: eps must be > 0");
    const double dt = cfg.T_final / cfg.steps;

    Trajectory traj;
    traj.mesh = &mesh;
    traj.eps = eps;

    ScalarField u = smooth_initial_data(mesh, u0, eps);
    traj.times.push_back(0.0);
    traj.u.push_back(u);

    // Companion potential at t = 0 so both fields carry steps+1 samples.
    auto bc0 = dirichlet_values(mesh, phi_D, 0.0);
    PotentialOptions popt;
    popt.kacanov_rtol = cfg.kacanov_rtol;
    popt.max_iter = cfg.kacanov_max_iter;
    popt.linear_rtol = cfg.linear_rtol;
    popt.linear_max_iter = cfg.linear_max_iter;
    auto [phi0, rep0] = solve_potential(mesh, u, bc0, spec, popt);
    StepStats s0;
    s0.kacanov_iters = rep0.iterations;
    s0.last_report = rep0;
    traj.phi.push_back(phi0);
    traj.stats.push_back(s0);
    traj.lift_w1p.push_back(
        w1p_norm(detail::harmonic_lift(mesh, bc0, cfg), spec.p, mesh));
    traj.f_eps_per_step.push_back(0.0);
    {
        double s = 0.0;
        for (int k = 0; k < mesh.triangle_count(); ++k)
            s += source_f_eps(spec, mesh.barycenter(k), 0.0, u.barycentric(k),
                              phi0.gradient(k), eps) *
                 mesh.signed_area(k);
        traj.f_eps_per_step.back() = s;
    }

    for (int m = 1; m <= cfg.steps; ++m) {
        const double t = dt * m; // implicit-consistent: data sampled at t^{m+1}
        auto bc = dirichlet_values(mesh, phi_D, t);
        const ScalarField* seed = &u;
        ScalarField zero_seed;
        if (warm && static_cast<std::size_t>(m) < warm->u.size())
            seed = &warm->u[m];
        else if (seed_mode == SeedMode::zero) {
            zero_seed = ScalarField(mesh);
            seed = &zero_seed;
        }
        TimestepResult step = solve_timestep(mesh, u, *seed, t, dt, eps, bc, spec, cfg);
        u = step.u;
        traj.times.push_back(t);
        traj.u.push_back(u);
        traj.phi.push_back(step.phi);
        traj.stats.push_back(step.stats);
        traj.lift_w1p.push_back(
            w1p_norm(detail::harmonic_lift(mesh, bc, cfg), spec.p, mesh));
        double fint = 0.0;
        for (int k = 0; k < mesh.triangle_count(); ++k)
            fint += source_f_eps(spec, mesh.barycenter(k), t, u.barycentric(k),
                                 step.phi.gradient(k), eps) *
                    mesh.signed_area(k);
        traj.f_eps_per_step.push_back(fint);
    }
    return traj;
}

/// Assembles one estimate-ledger row from a converged trajectory.
inline LedgerRow ledger_row(const Trajectory& traj, const ConstitutiveSpec& spec,
                            const CouplingConfig& cfg, const ScalarField& u0_eps) {
    const Mesh& mesh = *traj.mesh;
    const double dt = cfg.T_final / cfg.steps;
    LedgerRow row;
    row.eps = traj.eps;
    row.phi_norm = bochner_norm(traj.phi, dt, mesh, SpatialNorm::w1p_full, spec.p, spec.p);
    for (std::size_t m = 1; m < traj.f_eps_per_step.size(); ++m)
        row.f_eps_integral += dt * traj.f_eps_per_step[m];
    row.u_linf_l1 = bochner_norm(traj.u, dt, mesh, SpatialNorm::lp, 1.0,
                                 std::numeric_limits<double>::infinity());
    row.weighted_grad = weighted_gradient_integral(traj.u, dt, cfg.lambda(), mesh);
    row.u_lq_w1q = bochner_norm(traj.u, dt, mesh, SpatialNorm::w1p_full, cfg.q, cfg.q);
    row.u_lr_lr = bochner_norm(traj.u, dt, mesh, SpatialNorm::lp, cfg.r, cfg.r);
    row.u0_l1 = lp_norm(u0_eps, 1.0, mesh);
    {
        double s = 0.0;
        for (std::size_t m = 1; m < traj.lift_w1p.size(); ++m)
            s += dt * std::pow(traj.lift_w1p[m], spec.p);
        row.phiD_norm = std::pow(s, 1.0 / spec.p);
    }
    for (std::size_t m = 1; m < traj.u.size(); ++m) {
        ScalarField d(mesh);
        for (int i = 0; i < mesh.node_count(); ++i)
            d[i] = (traj.u[m][i] - traj.u[m - 1][i]) / dt;
        const double ratio = lp_norm(d, 1.0, mesh) /
                             (1.0 + w1p_norm(traj.u[m], cfg.q, mesh) +
                              std::pow(w1p_norm(traj.phi[m], spec.p, mesh), spec.p));
        row.du_dt_proxy = std::max(row.du_dt_proxy, ratio);
    }
    return row;
}

struct ContinuationResult {
    EstimateLedger ledger;
    std::vector<Trajectory> trajectories; // one per epsilon, schedule order
};

/// Runs the simulation once per scheduled epsilon (warm-starting each run from
/// the previous one), collecting ledger rows and the pairwise L2(Q_T) Cauchy
/// distances. A failed run marks its row and stops the schedule.
inline ContinuationResult eps_continuation(const Mesh& mesh, const CouplingConfig& cfg,
                                           const ConstitutiveSpec& spec,
                                           const BoundaryData& phi_D, const ScalarField& u0) {
    ContinuationResult res;
    res.ledger.p = spec.p;
    res.ledger.q = cfg.q;
    res.ledger.r = cfg.r;
    res.ledger.lambda = cfg.lambda();
    const double dt = cfg.T_final / cfg.steps;

    const Trajectory* prev = nullptr;
    for (double eps : cfg.eps_schedule) {
        LedgerRow row;
        row.eps = eps;
        try {
            Trajectory traj = run_simulation(mesh, cfg, eps, spec, phi_D, u0, prev);
            row = ledger_row(traj, spec, cfg, smooth_initial_data(mesh, u0, eps));
            if (prev) {
                double s = 0.0;
                for (std::size_t m = 1; m < traj.u.size(); ++m) {
                    const double d = detail::l2_distance(traj.u[m], prev->u[m], mesh);
                    s += dt * d * d;
                }
                row.cauchy_dist = std::sqrt(s);
            }
            res.trajectories.push_back(std::move(traj));
            prev = &res.trajectories.back();
        } catch (const std::exception&) {
            row.failed = true;
            res.ledger.rows.push_back(row);
            break;
        }
        res.ledger.rows.push_back(row);
    }
    return res;
}

} // namespace thermistor
