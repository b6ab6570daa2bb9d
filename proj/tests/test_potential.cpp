#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermistor/potential.hpp"

using namespace thermistor;

namespace {

// sigma0(u) = 1 + u^2 on the values a checkerboard field attains at
// barycenters (0, 1/3, 2/3, 1); table interpolation is exact there.
BoundedProfile one_plus_u_squared_table() {
    return BoundedProfile::table({{0.0, 1.0},
                                  {1.0 / 3.0, 1.0 + 1.0 / 9.0},
                                  {2.0 / 3.0, 1.0 + 4.0 / 9.0},
                                  {1.0, 2.0}});
}

std::vector<std::pair<int, double>> left_right_bc(const Mesh& m, double v_left, double v_right) {
    std::vector<std::pair<int, double>> bc;
    for (int i : m.dirichlet_nodes())
        bc.emplace_back(i, m.nodes[i].x == 0.0 ? v_left : v_right);
    return bc;
}

} // namespace

TEST_CASE("linear potential is reproduced for p in {1.5, 2, 3}", "[potential]") {
    for (int n : {8, 32})
        for (double p : {1.5, 2.0, 3.0}) {
            const Mesh m = build_rect_mesh(n, n, 1.0, 1.0, {Side::left, Side::right});
            ConstitutiveSpec spec;
            spec.p = p;
            spec.delta = 0.1;
            spec.sigma0 = BoundedProfile::constant(1.0);
            const ScalarField u(m, 0.3);
            PotentialOptions opt;
            opt.linear_rtol = 1e-13;
            const double V = 2.0;
            auto [phi, rep] = solve_potential(m, u, left_right_bc(m, 0.0, V), spec, opt);
            REQUIRE(rep.converged);
            CHECK(rep.iterations <= 3);
            double err = 0.0;
            for (int i = 0; i < m.node_count(); ++i)
                err = std::max(err, std::abs(phi[i] - V * m.nodes[i].x));
            CHECK(err <= 1e-10);
        }
}

TEST_CASE("constant Dirichlet data on the whole boundary gives a constant", "[potential]") {
    const Mesh m =
        build_rect_mesh(6, 6, 1.0, 1.0, {Side::left, Side::right, Side::bottom, Side::top});
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.2;
    std::vector<std::pair<int, double>> bc;
    for (int i : m.dirichlet_nodes()) bc.emplace_back(i, 4.2);
    const ScalarField u(m, 0.0);
    auto [phi, rep] = solve_potential(m, u, bc, spec);
    for (int i = 0; i < m.node_count(); ++i) CHECK(phi[i] == Catch::Approx(4.2).epsilon(1e-11));
}

TEST_CASE("p < 2 with delta = 0 is a configuration error", "[potential]") {
    const Mesh m = build_rect_mesh(4, 4, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 1.5;
    spec.delta = 0.0;
    const ScalarField u(m, 0.0);
    CHECK_THROWS_AS(solve_potential(m, u, left_right_bc(m, 0.0, 1.0), spec), config_error);
}

TEST_CASE("Kacanov energy is non-increasing for p = 3", "[potential]") {
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    spec.sigma0 = one_plus_u_squared_table();
    const ScalarField u = sample_nodal(m, testsupport::checkerboard);
    auto [phi, rep] = solve_potential(m, u, left_right_bc(m, 0.0, 1.0), spec);
    REQUIRE(rep.converged);
    REQUIRE(rep.energies.size() >= 2);
    for (std::size_t i = 1; i < rep.energies.size(); ++i)
        CHECK(rep.energies[i] <= rep.energies[i - 1] + 1e-12);
}

TEST_CASE("solutions from different initial guesses coincide", "[potential]") {
    const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    spec.sigma0 = one_plus_u_squared_table();
    const ScalarField u = sample_nodal(m, testsupport::checkerboard);
    const auto bc = left_right_bc(m, 0.0, 1.0);

    PotentialOptions opt;
    auto [phi_a, rep_a] = solve_potential(m, u, bc, spec, opt);

    ScalarField zero_guess(m);
    for (const auto& [node, value] : bc) zero_guess[node] = value;
    opt.initial_guess = &zero_guess;
    auto [phi_b, rep_b] = solve_potential(m, u, bc, spec, opt);

    ScalarField diff(m);
    for (int i = 0; i < m.node_count(); ++i) diff[i] = phi_a[i] - phi_b[i];
    CHECK(w1p_seminorm(diff, spec.p, m) <= 10.0 * opt.kacanov_rtol);
}

TEST_CASE("discrete residual vanishes on the exact linear solution", "[potential]") {
    const Mesh m = build_rect_mesh(8, 8, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 2.0;
    const ScalarField u(m, 0.0);
    const ScalarField phi = sample_nodal(m, [](Vec2 p) { return p.x; });
    CHECK(discrete_residual(m, phi, u, spec) <= 1e-12);
}

TEST_CASE("residual grows monotonically along a perturbation ladder", "[potential]") {
    const Mesh m = build_rect_mesh(8, 8, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    const ScalarField u(m, 0.5);
    auto [phi, rep] = solve_potential(m, u, left_right_bc(m, 0.0, 1.0), spec);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uv(-1.0, 1.0);
    ScalarField noise(m);
    const auto dn = m.dirichlet_nodes();
    std::vector<char> is_dir(m.node_count(), 0);
    for (int i : dn) is_dir[i] = 1;
    for (int i = 0; i < m.node_count(); ++i) noise[i] = is_dir[i] ? 0.0 : uv(rng);

    double prev = discrete_residual(m, phi, u, spec);
    for (double tau : {1e-4, 1e-3, 1e-2, 1e-1}) {
        ScalarField pert = phi;
        for (int i = 0; i < m.node_count(); ++i) pert[i] += tau * noise[i];
        const double r = discrete_residual(m, pert, u, spec);
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("Ohmic solutions obey the discrete maximum principle", "[potential]") {
    const Mesh m = build_rect_mesh(12, 12, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 2.0;
    spec.sigma0 = BoundedProfile::saturating(1.0, 3.0);
    const ScalarField u = sample_nodal(m, [](Vec2 p) { return std::sin(5.0 * p.x) + p.y; });
    auto [phi, rep] = solve_potential(m, u, left_right_bc(m, -0.5, 2.0), spec);
    for (int i = 0; i < m.node_count(); ++i) {
        CHECK(phi[i] >= -0.5 - 1e-10);
        CHECK(phi[i] <= 2.0 + 1e-10);
    }
}

TEST_CASE("energy-bound ratio is stable under refinement", "[potential]") {
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    spec.sigma0 = BoundedProfile::saturating(1.0, 2.0);
    std::vector<double> ratios;
    for (int n : {8, 16, 32}) {
        const Mesh m = build_rect_mesh(n, n, 1.0, 1.0, {Side::left, Side::right});
        const ScalarField u = sample_nodal(m, testsupport::checkerboard);
        auto bc = left_right_bc(m, 0.0, 1.0);
        auto [phi, rep] = solve_potential(m, u, bc, spec);

        std::vector<double> ones(m.triangle_count(), 1.0);
        std::vector<char> mask(m.node_count(), 0);
        for (int i : m.dirichlet_nodes()) mask[i] = 1;
        SparseSystem sys{assemble_weighted_stiffness(m, ones),
                         std::vector<double>(m.node_count(), 0.0)};
        apply_dirichlet(sys, bc, &mask);
        const ScalarField lift(m, solve_sparse(sys, 1e-12, 20000).x);
        ratios.push_back(w1p_norm(phi, spec.p, m) / (1.0 + w1p_norm(lift, spec.p, m)));
    }
    for (double r : ratios) {
        CHECK(r <= 1.5 * ratios.front());
        CHECK(r >= ratios.front() / 1.5);
    }
}

TEST_CASE("coarse solutions converge to a fine-grid reference", "[potential]") {
    ConstitutiveSpec spec;
    spec.p = 3.0;
    spec.delta = 0.1;
    spec.sigma0 = one_plus_u_squared_table();

    const Mesh fine = build_rect_mesh(64, 64, 1.0, 1.0, {Side::left, Side::right});
    const ScalarField u_fine = sample_nodal(fine, testsupport::checkerboard);
    PotentialOptions opt;
    opt.linear_rtol = 1e-12;
    auto [phi_fine, rep_fine] = solve_potential(fine, u_fine, left_right_bc(fine, 0.0, 1.0), spec, opt);
    REQUIRE(rep_fine.converged);

    double prev_err = 1e300;
    for (int n : {8, 16, 32}) {
        const Mesh coarse = build_rect_mesh(n, n, 1.0, 1.0, {Side::left, Side::right});
        const ScalarField u = sample_nodal(coarse, testsupport::checkerboard);
        auto [phi, rep] = solve_potential(coarse, u, left_right_bc(coarse, 0.0, 1.0), spec, opt);
        const ScalarField ref = testsupport::restrict_structured(phi_fine, fine, coarse);
        double err = 0.0;
        for (int i = 0; i < coarse.node_count(); ++i)
            err = std::max(err, std::abs(phi[i] - ref[i]));
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 5e-3); // 32x32 against the 64x64 reference
}

TEST_CASE("Kacanov cap raises a solver error carrying diagnostics", "[potential]") {
    const Mesh m = build_rect_mesh(8, 8, 1.0, 1.0, {Side::left, Side::right});
    ConstitutiveSpec spec;
    spec.p = 4.0;
    spec.delta = 0.1;
    PotentialOptions opt;
    opt.max_iter = 1;
    opt.kacanov_rtol = 1e-15;
    const ScalarField u = sample_nodal(m, testsupport::checkerboard);
    CHECK_THROWS_AS(solve_potential(m, u, left_right_bc(m, 0.0, 3.0), spec, opt), solver_error);
}
