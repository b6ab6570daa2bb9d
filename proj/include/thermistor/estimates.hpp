#pragma once

// Discrete norms and the a-priori-estimate instrumentation: the truncation
// calculus Phi/Psi, Bochner norms on trajectories, the weighted gradient
// integral, the interpolation inequality, and the per-epsilon ledger with its
// flat-trend verifier.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "thermistor/errors.hpp"
#include "thermistor/fem.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

inline double sign(double s) { return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0); }

/// Phi_lambda(s) = (1 - (1+|s|)^-lambda) * sign(s);  |Phi| < 1, odd.
inline double phi_lambda(double s, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("phi_lambda: lambda must lie in (0,1)");
    return (1.0 - std::pow(1.0 + std::abs(s), -lambda)) * sign(s);
}

/// Psi_lambda(s) = |s| + (1 - (1+|s|)^(1-lambda)) / (1-lambda);  even,
/// Psi' = Phi, and |s|/2 - 2^((1-lambda)/2)/(1-lambda) <= Psi(s) <= |s|.
inline double psi_lambda(double s, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("psi_lambda: lambda must lie in (0,1)");
    const double a = std::abs(s);
    return a + (1.0 - std::pow(1.0 + a, 1.0 - lambda)) / (1.0 - lambda);
}

/// dPhi/ds = lambda / (1+|s|)^(1+lambda).
inline double phi_lambda_derivative(double s, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("phi_lambda_derivative: lambda must lie in (0,1)");
    return lambda * std::pow(1.0 + std::abs(s), -1.0 - lambda);
}

/// Nodal (lumped) quadrature weights: m_i = sum of |K|/3 over incident triangles.
inline std::vector<double> lumped_masses(const Mesh& mesh) {
    std::vector<double> m(static_cast<std::size_t>(mesh.node_count()), 0.0);
    for (int k = 0; k < mesh.triangle_count(); ++k) {
        const double third = mesh.signed_area(k) / 3.0;
        for (int i : mesh.triangles[k]) m[i] += third;
    }
    return m;
}

/// L^p norm by lumped nodal quadrature, 1 <= p < inf.
inline double lp_norm(const ScalarField& f, double p, const Mesh& mesh) {
    if (!(p >= 1.0)) throw config_error("lp_norm: p must be >= 1");
    const auto m = lumped_masses(mesh);
    double s = 0.0;
    for (int i = 0; i < mesh.node_count(); ++i)
        s += m[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

/// W^{1,p} seminorm (int |grad v|^p)^(1/p); exact for P1 (one point per triangle).
inline double w1p_seminorm(const ScalarField& f, double p, const Mesh& mesh) {
    if (!(p >= 1.0)) throw config_error("w1p_seminorm: p must be >= 1");
    double s = 0.0;
    for (int k = 0; k < mesh.triangle_count(); ++k)
        s += std::pow(norm(f.gradient(k)), p) * mesh.signed_area(k);
    return std::pow(s, 1.0 / p);
}

/// Full W^{1,p} norm (||v||_p^p + |v|_{1,p}^p)^(1/p).
inline double w1p_norm(const ScalarField& f, double p, const Mesh& mesh) {
    const double a = lp_norm(f, p, mesh), b = w1p_seminorm(f, p, mesh);
    return std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
}

enum class SpatialNorm : std::uint8_t { lp, w1p_semi, w1p_full };

/// Bochner norm over the step grid: rectangle rule on fields[1..M] for finite
/// time exponents, max over all samples for time_p = inf.
inline double bochner_norm(std::span<const ScalarField> fields, double dt, const Mesh& mesh,
                           SpatialNorm tag, double spatial_p, double time_p) {
    auto spatial = [&](const ScalarField& f) {
        switch (tag) {
            case SpatialNorm::lp: return lp_norm(f, spatial_p, mesh);
            case SpatialNorm::w1p_semi: return w1p_seminorm(f, spatial_p, mesh);
            case SpatialNorm::w1p_full: return w1p_norm(f, spatial_p, mesh);
        }
        return 0.0;
    };
    if (std::isinf(time_p)) {
        double best = 0.0;
        for (const auto& f : fields) best = std::max(best, spatial(f));
        return best;
    }
    if (!(time_p >= 1.0)) throw config_error("bochner_norm: time exponent must be >= 1");
    double s = 0.0;
    for (std::size_t m = 1; m < fields.size(); ++m)
        s += dt * std::pow(spatial(fields[m]), time_p);
    return std::pow(s, 1.0 / time_p);
}

/// sum_m dt sum_K lambda |grad u^m|^2 / (1+|u^m(bary)|)^(1+lambda) |K|.
inline double weighted_gradient_integral(std::span<const ScalarField> u_fields, double dt,
                                         double lambda, const Mesh& mesh) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw config_error("weighted_gradient_integral: lambda must lie in (0,1)");
    double s = 0.0;
    for (std::size_t m = 1; m < u_fields.size(); ++m) {
        const auto& u = u_fields[m];
        for (int k = 0; k < mesh.triangle_count(); ++k) {
            const double g2 = dot(u.gradient(k), u.gradient(k));
            s += dt * lambda * g2 *
                 std::pow(1.0 + std::abs(u.barycentric(k)), -1.0 - lambda) *
                 mesh.signed_area(k);
        }
    }
    return s;
}

struct InterpolationCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// ||z||_{3q/2} <= ||z||_1^{1/3} ||z||_{2q/(2-q)}^{2/3} with all three norms on
/// the same lumped quadrature, so the discrete inequality is exact (n = 2).
inline InterpolationCheck interpolation_check(const ScalarField& f, double q,
                                              const Mesh& mesh) {
    if (!(q > 1.0 && q < 2.0))
        throw config_error("interpolation_check: q must lie in (1,2)");
    InterpolationCheck c;
    c.lhs = lp_norm(f, 1.5 * q, mesh);
    c.rhs = std::pow(lp_norm(f, 1.0, mesh), 1.0 / 3.0) *
            std::pow(lp_norm(f, 2.0 * q / (2.0 - q), mesh), 2.0 / 3.0);
    return c;
}

/// One ledger row per epsilon; the CSV column order is part of the contract.
struct LedgerRow {
    double eps = 0.0;
    double phi_norm = 0.0;       // ||phi||_{L^p(W^{1,p})}
    double f_eps_integral = 0.0; // int_{Q_T} f_eps
    double u_linf_l1 = 0.0;      // ||u||_{L^inf(L^1)}
    double weighted_grad = 0.0;  // lambda-weighted gradient integral
    double u_lq_w1q = 0.0;       // ||u||_{L^q(W^{1,q})}
    double u_lr_lr = 0.0;        // ||u||_{L^r(L^r)}
    double u0_l1 = 0.0;          // ||u_{0,eps}||_{L^1}
    double phiD_norm = 0.0;      // ||phi_D||_{L^p(W^{1,p})} via the harmonic lift
    double cauchy_dist = 0.0;    // ||u_eps_i - u_eps_{i-1}||_{L^2(Q_T)}, 0 on row 0
    double du_dt_proxy = 0.0;    // max_m ||du/dt||_{L^1} / (1+||u||_{W^{1,q}}+||phi||^p)
    bool failed = false;
};

struct EstimateLedger {
    double p = 2.0;
    double q = 9.0 / 8.0;
    double r = 1.5;
    double lambda = 5.0 / 16.0;
    std::vector<LedgerRow> rows;
};

struct LedgerCheck {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct VerificationReport {
    std::vector<LedgerCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}
} // namespace detail

/// Flat-trend verification across the epsilon schedule:
///  (a) each quantity stays below twice its largest-eps value (plus a
///      data-norm-sized absolute slack for identically-zero quantities),
///  (b) the two smallest eps agree to 10%,
///  (c) phi obeys the fitted C (1 + ||phi_D||) shape and int f_eps the fitted
///      C (1 + ||phi_D||^p) shape within a factor 2,
///  (d) the Cauchy diagnostic decreases (or sits below floor) along the schedule.
inline VerificationReport verify_ledger(const EstimateLedger& ledger) {
    VerificationReport rep;
    const auto& rows = ledger.rows;
    if (rows.size() < 2) {
        rep.checks.push_back({"ledger-size", false, "need at least 2 rows"});
        return rep;
    }
    for (const auto& r : rows)
        if (r.failed) {
            rep.checks.push_back({"rows-converged", false,
                                  "row eps=" + detail::fmt(r.eps) + " failed"});
            return rep;
        }
    rep.checks.push_back({"rows-converged", true, ""});

    const LedgerRow& r0 = rows.front();
    const double slack =
        1e-12 * (1.0 + r0.u0_l1 + std::pow(r0.phiD_norm, ledger.p));

    struct Q {
        const char* name;
        double LedgerRow::*field;
    };
    const Q quantities[] = {{"phi_norm", &LedgerRow::phi_norm},
                            {"f_eps_integral", &LedgerRow::f_eps_integral},
                            {"u_LinfL1", &LedgerRow::u_linf_l1},
                            {"weighted_grad", &LedgerRow::weighted_grad},
                            {"u_LqW1q", &LedgerRow::u_lq_w1q},
                            {"u_LrLr", &LedgerRow::u_lr_lr},
                            {"du_dt_proxy", &LedgerRow::du_dt_proxy}};

    for (const auto& q : quantities) {
        bool bounded = true;
        double worst = 0.0;
        for (const auto& r : rows) {
            const double v = r.*(q.field);
            worst = std::max(worst, v);
            if (v > 2.0 * (r0.*(q.field)) + slack) bounded = false;
        }
        rep.checks.push_back({std::string("bounded:") + q.name, bounded,
                              "max " + detail::fmt(worst) + " vs first " +
                                  detail::fmt(r0.*(q.field))});

        const double a = rows[rows.size() - 2].*(q.field);
        const double b = rows.back().*(q.field);
        const bool stable = std::abs(b - a) <= 0.10 * std::abs(b) + slack;
        rep.checks.push_back({std::string("stabilized:") + q.name, stable,
                              detail::fmt(a) + " -> " + detail::fmt(b)});
    }

    // Data-shape checks with the constant fitted on the first row.
    {
        const double C = r0.phi_norm / (1.0 + r0.phiD_norm);
        bool ok = true;
        for (const auto& r : rows)
            if (r.phi_norm > 2.0 * C * (1.0 + r.phiD_norm) + slack) ok = false;
        rep.checks.push_back({"shape:phi_vs_data", ok, "C = " + detail::fmt(C)});
    }
    {
        const double C = r0.f_eps_integral / (1.0 + std::pow(r0.phiD_norm, ledger.p));
        bool ok = true;
        for (const auto& r : rows)
            if (r.f_eps_integral > 2.0 * C * (1.0 + std::pow(r.phiD_norm, ledger.p)) + slack)
                ok = false;
        rep.checks.push_back({"shape:f_eps_vs_data", ok, "C = " + detail::fmt(C)});
    }

    {
        bool ok = true;
        for (std::size_t i = 2; i < rows.size(); ++i) {
            const double prev = rows[i - 1].cauchy_dist, cur = rows[i].cauchy_dist;
            if (!(cur < prev) && !(prev <= 1e-12 && cur <= 1e-12)) ok = false;
        }
        rep.checks.push_back({"cauchy-decreasing", ok, ""});
    }
    return rep;
}

} // namespace thermistor
