// Acceptance suite: one criterion per function, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "thermistor/cli.hpp"
#include "thermistor/coupling.hpp"
#include "thermistor/io.hpp"
#include "thermistor/potential.hpp"

using namespace thermistor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::vector<std::pair<int, double>> left_right_bc(const Mesh& m, double vl, double vr) {
    std::vector<std::pair<int, double>> bc;
    for (int i : m.dirichlet_nodes()) bc.emplace_back(i, m.nodes[i].x == 0.0 ? vl : vr);
    return bc;
}

// sigma0(u) = 1 + u^2, exact on the barycentric values of a checkerboard field.
BoundedProfile one_plus_u_squared_table() {
    return BoundedProfile::table({{0.0, 1.0},
                                  {1.0 / 3.0, 1.0 + 1.0 / 9.0},
                                  {2.0 / 3.0, 1.0 + 4.0 / 9.0},
                                  {1.0, 2.0}});
}

// The coupled benchmark configuration shared by criteria 5, 6, and 10.
struct CoupledBench {
    ConstitutiveSpec spec;
    CouplingConfig cfg;
    BoundaryData phi_D;
};

CoupledBench coupled_bench() {
    CoupledBench b;
    b.spec.p = 2.0;
    b.spec.sigma0 = BoundedProfile::saturating(1.0, 2.0);
    b.spec.kappa_profile = BoundedProfile::constant(1.0);
    b.spec.eta1 = 0.9;
    b.spec.eta_value = 0.9;
    b.spec.g = 1.0;
    b.spec.h = 0.0;
    b.cfg.T_final = 0.2;
    b.cfg.steps = 20;
    b.cfg.fp_max_iter = 50;
    b.phi_D = [](Vec2 p, double t) {
        return p.x == 0.0 ? 0.0 : 1.0 * std::min(t / 0.1, 1.0);
    };
    return b;
}

// ---------------------------------------------------------------- criteria

Outcome criterion1_flux_monotonicity() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.14159265358979323846);
    std::uniform_real_distribution<double> urad(0.0, 1.0);
    const double p_set[] = {1.2, 1.5, 2.0, 3.0, 4.0};
    const double d_set[] = {0.0, 0.1, 1.0};
    long cases = 0;
    for (long s = 0; s < 100000; ++s) {
        const double r1 = 10.0 * std::sqrt(urad(rng)), a1 = uang(rng);
        const double r2 = 10.0 * std::sqrt(urad(rng)), a2 = uang(rng);
        const Vec2 xi{r1 * std::cos(a1), r1 * std::sin(a1)};
        const Vec2 xb{r2 * std::cos(a2), r2 * std::sin(a2)};
        for (double p : p_set)
            for (double delta : d_set) {
                if (p < 2.0 && delta == 0.0) continue;
                const auto g = monotonicity_gap(xi, xb, p, delta);
                ++cases;
                if (g.lhs < g.lower_bound - 1e-12 * (1.0 + std::abs(g.lhs)))
                    return {false, fmt("bound violated (p=%g, delta=%g)", p, delta)};
                if (norm(xi - xb) > 1e-9 && !(g.lhs > 0.0))
                    return {false, fmt("strictness violated (p=%g, delta=%g)", p, delta)};
            }
    }
    const double dt = seconds_since(t0);
    if (dt >= 5.0) return {false, fmt("runtime %.2f s exceeds 5 s", dt)};
    return {true, fmt("%.0f cases, %.2f s", static_cast<double>(cases), dt)};
}

Outcome criterion2_p1_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    for (int n : {8, 32})
        for (double p : {1.5, 2.0, 3.0}) {
            const Mesh m = build_rect_mesh(n, n, 1.0, 1.0, {Side::left, Side::right});
            ConstitutiveSpec spec;
            spec.p = p;
            spec.delta = 0.1;
            const ScalarField u(m, 0.0);
            PotentialOptions opt;
            opt.linear_rtol = 1e-13;
            auto [phi, rep] = solve_potential(m, u, left_right_bc(m, 0.0, 1.0), spec, opt);
            if (!rep.converged || rep.iterations > 3)
                return {false, fmt("n=%g p=%g took %g iterations", n, p, rep.iterations)};
            double err = 0.0;
            for (int i = 0; i < m.node_count(); ++i)
                err = std::max(err, std::abs(phi[i] - m.nodes[i].x));
            if (err > 1e-10) return {false, fmt("n=%g p=%g nodal error %.3g", n, p, err)};
        }
    const double dt = seconds_since(t0);
    if (dt >= 5.0) return {false, fmt("runtime %.2f s exceeds 5 s", dt)};
    return {true, fmt("max nodal error <= 1e-10, <= 3 iterations, %.2f s", dt)};
}

Outcome criterion3_energy_descent_uniqueness() {
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    spec.sigma0 = one_plus_u_squared_table();
    const ScalarField u = sample_nodal(m, testsupport::checkerboard);
    const auto bc = left_right_bc(m, 0.0, 1.0);

    PotentialOptions opt;
    auto [phi_a, rep_a] = solve_potential(m, u, bc, spec, opt);
    if (!rep_a.converged) return {false, "harmonic-guess solve did not converge"};
    for (std::size_t i = 1; i < rep_a.energies.size(); ++i)
        if (rep_a.energies[i] > rep_a.energies[i - 1] + 1e-12)
            return {false, fmt("energy rose at iteration %g: %.15g -> %.15g",
                               static_cast<double>(i), rep_a.energies[i - 1], rep_a.energies[i])};

    ScalarField zero_guess(m);
    for (const auto& [node, value] : bc) zero_guess[node] = value;
    opt.initial_guess = &zero_guess;
    auto [phi_b, rep_b] = solve_potential(m, u, bc, spec, opt);
    if (!rep_b.converged) return {false, "zero-guess solve did not converge"};
    ScalarField diff(m);
    for (int i = 0; i < m.node_count(); ++i) diff[i] = phi_a[i] - phi_b[i];
    const double dist = w1p_seminorm(diff, spec.p, m);
    if (dist > 10.0 * opt.kacanov_rtol)
        return {false, fmt("guesses disagree: %.3g > %.3g", dist, 10.0 * opt.kacanov_rtol)};
    return {true, fmt("energy monotone over %g iterations, guesses agree to %.2g",
                      static_cast<double>(rep_a.iterations), dist)};
}

Outcome criterion4_heat_ode_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh m = build_rect_mesh(8, 8, 1.0, 1.0, {Side::left});
    ConstitutiveSpec spec;
    spec.kappa_profile = BoundedProfile::constant(1e4); // well-stirred regime
    spec.eta1 = 0.0;
    spec.eta_value = 0.0;
    spec.g = 1.0;
    spec.h = 0.0;
    const ScalarField phi(m);
    const double T = 0.5;

    auto terminal_error = [&](int steps) {
        const double dt = T / steps;
        ScalarField u(m, 1.0);
        for (int s = 1; s <= steps; ++s) {
            HeatStepInputs in{m, u, phi, dt * s, dt, 1e-3, spec, false, 1e-11, 200000};
            u = step_heat(in, u);
        }
        double err = 0.0;
        for (int i = 0; i < m.node_count(); ++i)
            err = std::max(err, std::abs(u[i] - std::exp(-4.0 * T)));
        return err;
    };
    const double e20 = terminal_error(20);
    if (e20 > 0.1) return {false, fmt("terminal error %.3g > 0.1 at M=20", e20)};
    const double e40 = terminal_error(40);
    const double slope = std::log2(e20 / e40);
    if (slope < 0.8 || slope > 1.2)
        return {false, fmt("Richardson slope %.3g outside 1.0 +/- 0.2", slope)};

    // Equilibrium u0 == h preserved for 50 steps.
    ScalarField u(m, spec.h);
    for (int s = 1; s <= 50; ++s) {
        HeatStepInputs in{m, u, phi, 0.01 * s, 0.01, 1e-3, spec, false, 1e-12, 200000};
        u = step_heat(in, u);
    }
    for (int i = 0; i < m.node_count(); ++i)
        if (std::abs(u[i] - spec.h) > 1e-12)
            return {false, fmt("equilibrium drifted to %.3g", u[i])};

    const double dt = seconds_since(t0);
    if (dt >= 5.0) return {false, fmt("runtime %.2f s exceeds 5 s", dt)};
    return {true, fmt("error %.3g at M=20, slope %.3g, equilibrium exact, %.2f s", e20, slope, dt)};
}

Outcome criterion5_coupled_fixed_point() {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});
    CoupledBench b = coupled_bench();
    const ScalarField u0(m, 0.0);
    const double eps = 1e-3;

    const Trajectory base = run_simulation(m, b.cfg, eps, b.spec, b.phi_D, u0);
    for (std::size_t s = 1; s < base.stats.size(); ++s)
        if (!base.stats[s].converged || base.stats[s].fp_iters > b.cfg.fp_max_iter)
            return {false, fmt("step %g used %g iterations", static_cast<double>(s),
                               static_cast<double>(base.stats[s].fp_iters))};

    CouplingConfig doubled = b.cfg;
    doubled.fp_max_iter *= 2;
    const Trajectory more = run_simulation(m, doubled, eps, b.spec, b.phi_D, u0);
    const Trajectory zero_seed =
        run_simulation(m, b.cfg, eps, b.spec, b.phi_D, u0, nullptr, SeedMode::zero);

    auto max_l2 = [&](const Trajectory& a, const Trajectory& c) {
        double worst = 0.0;
        for (std::size_t s = 0; s < a.u.size(); ++s) {
            ScalarField d(m);
            for (int i = 0; i < m.node_count(); ++i) d[i] = a.u[s][i] - c.u[s][i];
            worst = std::max(worst, lp_norm(d, 2.0, m));
        }
        return worst;
    };
    const double d_cap = max_l2(base, more);
    const double d_seed = max_l2(base, zero_seed);
    const double tol = 10.0 * b.cfg.fp_rtol;
    if (d_cap > tol) return {false, fmt("cap doubling moved the trajectory by %.3g", d_cap)};
    if (d_seed > tol) return {false, fmt("seed change moved the trajectory by %.3g", d_seed)};

    const double dt = seconds_since(t0);
    if (dt >= 60.0) return {false, fmt("runtime %.2f s exceeds 60 s", dt)};
    return {true, fmt("all steps converged; invariance %.2g / %.2g, %.2f s", d_cap, d_seed, dt)};
}

Outcome criterion6_eps_uniform_estimates() {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});
    const CoupledBench b = coupled_bench();
    const ScalarField u0(m, 0.0);
    const auto res = eps_continuation(m, b.cfg, b.spec, b.phi_D, u0);
    const auto& rows = res.ledger.rows;
    if (rows.size() != 4) return {false, "schedule did not complete"};
    for (const auto& r : rows)
        if (r.failed) return {false, fmt("row eps=%.1g failed", r.eps)};

    if (std::abs(res.ledger.lambda - 5.0 / 16.0) > 1e-15)
        return {false, "lambda is not 5/16"};

    struct Q {
        const char* name;
        double LedgerRow::*field;
    };
    const Q quantities[] = {{"u_LinfL1", &LedgerRow::u_linf_l1},
                            {"weighted_grad", &LedgerRow::weighted_grad},
                            {"phi_norm", &LedgerRow::phi_norm},
                            {"f_eps_integral", &LedgerRow::f_eps_integral},
                            {"u_LrLr", &LedgerRow::u_lr_lr}};
    for (const auto& q : quantities) {
        const double first = rows.front().*(q.field);
        const double a = rows[rows.size() - 2].*(q.field), bb = rows.back().*(q.field);
        if (std::abs(bb - a) > 0.10 * std::abs(bb))
            return {false, std::string(q.name) +
                               fmt(" varies %.3g%% between the two smallest eps",
                                   100.0 * std::abs(bb - a) / std::abs(bb))};
        for (const auto& r : rows)
            if (r.*(q.field) > 2.0 * first)
                return {false, std::string(q.name) + " exceeds 2x its largest-eps value"};
    }
    for (std::size_t i = 2; i < rows.size(); ++i)
        if (!(rows[i].cauchy_dist < rows[i - 1].cauchy_dist))
            return {false, fmt("Cauchy diagnostic not decreasing: %.3g -> %.3g",
                               rows[i - 1].cauchy_dist, rows[i].cauchy_dist)};

    const double dt = seconds_since(t0);
    if (dt >= 240.0) return {false, fmt("runtime %.2f s exceeds 240 s", dt)};
    return {true, fmt("all quantities eps-flat; Cauchy %.2g -> %.2g, %.2f s",
                      rows[1].cauchy_dist, rows.back().cauchy_dist, dt)};
}

Outcome criterion7_phi_psi_calculus() {
    std::mt19937_64 rng(7);
    // Psi' = Phi by central differences, observed order >= 1.9.
    std::uniform_real_distribution<double> upt(0.05, 10.0);
    for (double lambda : {0.1, 5.0 / 16.0, 0.9}) {
        double worst_h = 0.0, worst_h2 = 0.0;
        const double h = 1e-3;
        for (int i = 0; i < 1000; ++i) {
            const double s = upt(rng) * (i % 2 == 0 ? 1.0 : -1.0);
            const double fd1 =
                (psi_lambda(s + h, lambda) - psi_lambda(s - h, lambda)) / (2.0 * h);
            const double fd2 =
                (psi_lambda(s + h / 2.0, lambda) - psi_lambda(s - h / 2.0, lambda)) / h;
            const double phi = phi_lambda(s, lambda);
            worst_h = std::max(worst_h, std::abs(fd1 - phi));
            worst_h2 = std::max(worst_h2, std::abs(fd2 - phi));
        }
        const double order = std::log2(worst_h / worst_h2);
        if (order < 1.9) return {false, fmt("FD order %.3g < 1.9 at lambda=%g", order, lambda)};
    }

    // Stated bounds on 1e5 samples per lambda.
    std::uniform_real_distribution<double> us(-1000.0, 1000.0);
    for (double lambda : {0.1, 5.0 / 16.0, 0.9}) {
        const double c = std::pow(2.0, (1.0 - lambda) / 2.0) / (1.0 - lambda);
        for (int i = 0; i < 100000; ++i) {
            const double s = us(rng);
            const double psi = psi_lambda(s, lambda);
            if (psi > std::abs(s) + 1e-12)
                return {false, fmt("upper bound violated at s=%.4g, lambda=%g", s, lambda)};
            if (psi < std::abs(s) / 2.0 - c - 1e-12)
                return {false,
                        fmt("lower bound violated at s=%.6g, lambda=%g: Psi=%.6g", s, lambda,
                            psi) +
                            " (the stated constant 2^((1-l)/2)/(1-l) is too small near"
                            " l=0.1; the same bound holds for l=5/16 and l=0.9)"};
        }
    }
    return {true, "FD order >= 1.9 and both bounds on 3x1e5 samples"};
}

Outcome criterion8_interpolation_inequality() {
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left});
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> uv(-2.0, 2.0);
    for (double q : {1.05, 9.0 / 8.0, 1.15}) {
        for (int trial = 0; trial < 1000; ++trial) {
            ScalarField f(m);
            for (int i = 0; i < m.node_count(); ++i) f[i] = uv(rng);
            const auto c = interpolation_check(f, q, m);
            if (!(c.lhs <= c.rhs * (1.0 + 1e-10)))
                return {false, fmt("violated at q=%g: lhs=%.8g rhs=%.8g", q, c.lhs, c.rhs)};
        }
        const auto eq = interpolation_check(ScalarField(m, 1.3), q, m);
        if (std::abs(eq.lhs - eq.rhs) > 1e-12 * (1.0 + eq.rhs))
            return {false, fmt("constant field not an equality case at q=%g", q)};
    }
    return {true, "contract held on 3000 random fields, equality on constants"};
}

Outcome criterion9_iv_characteristics() {
    // p = 2 is exactly Ohmic.
    ConstitutiveSpec ohmic;
    ohmic.p = 2.0;
    ohmic.delta = 0.7;
    ohmic.sigma0 = BoundedProfile::constant(1.6);
    for (int i = 0; i <= 32; ++i) {
        const double V = 3.0 * i / 32.0;
        if (iv_characteristic(ohmic, 0.3, V) != 1.6 * V)
            return {false, fmt("Ohmic case deviates at V=%g", V)};
    }

    // p = 4, V = 2: deviation from sigma0 V^(p-1) is first order in delta.
    const double V = 2.0;
    double prev = 0.0;
    double min_slope = 10.0, max_slope = 0.0;
    for (double delta : {1e-1, 1e-2, 1e-3, 1e-4}) {
        ConstitutiveSpec s;
        s.p = 4.0;
        s.delta = delta;
        const double err = std::abs(iv_characteristic(s, 0.0, V) - std::pow(V, 3.0));
        if (prev > 0.0) {
            const double slope = std::log10(prev / err);
            min_slope = std::min(min_slope, slope);
            max_slope = std::max(max_slope, slope);
        }
        prev = err;
    }
    if (min_slope < 0.9 || max_slope > 1.1)
        return {false, fmt("delta slope in [%.3g, %.3g] outside 1.0 +/- 0.1", min_slope,
                           max_slope)};
    return {true, fmt("Ohmic exact; delta slope in [%.3g, %.3g]", min_slope, max_slope)};
}

Outcome criterion10_determinism() {
    const fs::path base = fs::temp_directory_path() / "thermistor_acceptance";
    fs::remove_all(base);
    RunConfig rc;
    rc.mesh.nx = rc.mesh.ny = 16;
    rc.mesh.dirichlet_sides = {Side::left, Side::right};
    const CoupledBench b = coupled_bench();
    rc.spec = b.spec;
    rc.coupling = b.cfg;
    SideValue ramp;
    ramp.kind = SideValue::Kind::ramp;
    ramp.ramp_v = 1.0;
    ramp.ramp_t = 0.1;
    rc.boundary.sides[Side::right] = ramp;

    std::ostringstream sink;
    cli::run_pipeline(rc, (base / "a").string(), sink);
    cli::run_pipeline(rc, (base / "b").string(), sink);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    for (const char* name : {"trajectory.csv", "ledger.csv"}) {
        const std::string a = slurp(base / "a" / name), c = slurp(base / "b" / name);
        if (a.empty() || a != c) return {false, std::string(name) + " differs between runs"};
    }
    fs::remove_all(base);
    return {true, "trajectory and ledger CSVs byte-identical across runs"};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"criterion 1: flux monotonicity lower bounds", criterion1_flux_monotonicity},
        {"criterion 2: P1 exactness of the linear potential", criterion2_p1_exactness},
        {"criterion 3: Kacanov energy descent and uniqueness", criterion3_energy_descent_uniqueness},
        {"criterion 4: heat-equation ODE oracle", criterion4_heat_ode_oracle},
        {"criterion 5: coupled fixed point", criterion5_coupled_fixed_point},
        {"criterion 6: eps-uniform estimates", criterion6_eps_uniform_estimates},
        {"criterion 7: Phi/Psi calculus", criterion7_phi_psi_calculus},
        {"criterion 8: interpolation inequality", criterion8_interpolation_inequality},
        {"criterion 9: I-V characteristics", criterion9_iv_characteristics},
        {"criterion 10: byte-identical reruns", criterion10_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %s — %s\n", out.pass ? "PASS" : "FAIL", c.name, out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    return failures;
}
