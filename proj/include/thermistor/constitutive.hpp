#pragma once

// Constitutive prototypes for the coupled thermistor model:
//   sigma(u, tau) = sigma0(u) * (delta + tau^2)^((p-2)/2)
//   f(x,t,u,xi)   = eta(x,t,u, -a(u,-xi) xi) * sigma(u,|xi|) * |xi|^2
//   f_eps         = f / (1 + eps f)
// plus the current-voltage characteristic, the strict-monotonicity gap of the
// flux field xi -> (delta+|xi|^2)^((p-2)/2) xi, and empirical witnesses for
// the structural growth bounds.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "thermistor/errors.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

enum class ProfileShape : std::uint8_t { constant, saturating, table };

/// Bounded continuous map u -> value with declared bounds 0 < lo <= hi.
/// Shapes: constant c; saturating lo + (hi-lo)/(1+e^-u); piecewise-linear table.
struct BoundedProfile {
    ProfileShape shape = ProfileShape::constant;
    double c = 1.0;
    double lo = 1.0;
    double hi = 1.0;
    std::vector<std::pair<double, double>> points; // (u, value), ascending in u

    static BoundedProfile constant(double value) {
        BoundedProfile p;
        p.shape = ProfileShape::constant;
        p.c = p.lo = p.hi = value;
        return p;
    }
    static BoundedProfile saturating(double lo, double hi) {
        BoundedProfile p;
        p.shape = ProfileShape::saturating;
        p.lo = lo;
        p.hi = hi;
        return p;
    }
    static BoundedProfile table(std::vector<std::pair<double, double>> pts) {
        BoundedProfile p;
        p.shape = ProfileShape::table;
        p.points = std::move(pts);
        p.lo = p.hi = p.points.empty() ? 1.0 : p.points.front().second;
        for (const auto& [u, v] : p.points) {
            p.lo = std::min(p.lo, v);
            p.hi = std::max(p.hi, v);
        }
        return p;
    }

    double operator()(double u) const {
        switch (shape) {
            case ProfileShape::constant: return c;
            case ProfileShape::saturating: return lo + (hi - lo) / (1.0 + std::exp(-u));
            case ProfileShape::table: {
                if (points.empty()) return c;
                if (u <= points.front().first) return points.front().second;
                if (u >= points.back().first) return points.back().second;
                for (std::size_t i = 1; i < points.size(); ++i)
                    if (u <= points[i].first) {
                        const auto& [u0, v0] = points[i - 1];
                        const auto& [u1, v1] = points[i];
                        const double w = (u - u0) / (u1 - u0);
                        return v0 + w * (v1 - v0);
                    }
                return points.back().second;
            }
        }
        return c;
    }
};

/// Carrier for p, delta, the sigma0/kappa profiles, the Joule-loss factor,
/// and the surface data g, h.
struct ConstitutiveSpec {
    double p = 2.0;
    double delta = 0.0;
    BoundedProfile sigma0 = BoundedProfile::constant(1.0);
    BoundedProfile kappa_profile = BoundedProfile::constant(1.0);
    double eta1 = 1.0;       // upper bound of the loss factor
    double eta_value = 1.0;  // constant loss factor actually used (<= eta1)
    double g = 1.0;          // surface conductance
    double h = 0.0;          // ambient temperature

    // Optional general forms. When unset: eta == eta_value, a(u,xi) == sigma(u,|xi|).
    std::function<double(Vec2 x, double t, double u, Vec2 jhat)> eta_hook;
    std::function<double(double u, Vec2 xi)> a_hook;

    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        if (!(p > 1.0) || !std::isfinite(p)) errs.push_back("p must lie in (1, inf)");
        if (delta < 0.0) errs.push_back("delta must be >= 0");
        if (p < 2.0 && !(delta > 0.0)) errs.push_back("delta must be > 0 when p < 2");
        if (!(sigma0.lo > 0.0) || sigma0.lo > sigma0.hi)
            errs.push_back("sigma0 bounds must satisfy 0 < sigma_lo <= sigma_hi");
        if (!(kappa_profile.lo > 0.0) || kappa_profile.lo > kappa_profile.hi)
            errs.push_back("kappa bounds must satisfy 0 < kappa0 <= kappa1");
        if (eta1 < 0.0) errs.push_back("eta1 must be >= 0");
        if (eta_value < 0.0 || eta_value > eta1)
            errs.push_back("eta must lie in [0, eta1]");
        if (!(g > 0.0)) errs.push_back("g must be > 0");
        return errs;
    }
};

/// sigma0(u) * (delta + tau^2)^((p-2)/2). Singular only at p < 2, delta = 0, tau = 0.
inline double sigma(const ConstitutiveSpec& s, double u, double tau) {
    if (tau < 0.0) throw config_error("sigma: tau must be >= 0");
    const double base = s.delta + tau * tau;
    if (s.p < 2.0 && base == 0.0)
        throw config_error("sigma: singular evaluation (p < 2 with delta = 0 and tau = 0)");
    return s.sigma0(u) * std::pow(base, (s.p - 2.0) / 2.0);
}

inline double kappa(const ConstitutiveSpec& s, double u) { return s.kappa_profile(u); }

/// Heat-source prototype; satisfies 0 <= f <= eta1 * sigma * |xi|^2.
inline double source_f(const ConstitutiveSpec& s, Vec2 x, double t, double u, Vec2 xi) {
    const double tau = norm(xi);
    const double sig = sigma(s, u, tau);
    double eta;
    if (s.eta_hook) {
        const double a = s.a_hook ? s.a_hook(u, Vec2{-xi.x, -xi.y}) : sigma(s, u, tau);
        eta = s.eta_hook(x, t, u, Vec2{-a * xi.x, -a * xi.y});
    } else {
        eta = s.eta_value;
    }
    return eta * sig * tau * tau;
}

/// Bounded regularization f / (1 + eps f); monotone in f, <= min(f, 1/eps).
inline double regularize_source(double f, double eps) {
    if (!(eps > 0.0)) throw config_error("regularize_source: eps must be > 0");
    return f / (1.0 + eps * f);
}

inline double source_f_eps(const ConstitutiveSpec& s, Vec2 x, double t, double u, Vec2 xi,
                           double eps) {
    return regularize_source(source_f(s, x, t, u, xi), eps);
}

/// I(u, V) = sigma0(u) * (delta + V^2)^((p-2)/2) * V.
/// Converges to sigma0(u) * V^(p-1) as delta -> 0.
inline double iv_characteristic(const ConstitutiveSpec& s, double u, double V) {
    if (V < 0.0) throw config_error("iv_characteristic: V must be >= 0");
    if (V == 0.0) {
        if (s.p < 2.0 && s.delta == 0.0)
            throw config_error("iv_characteristic: singular at V = 0 with p < 2, delta = 0");
        return 0.0;
    }
    return sigma(s, u, V) * V;
}

struct MonotonicityGap {
    double lhs = 0.0;
    double lower_bound = 0.0;
};

/// Strict-monotonicity gap of the flux field and its proven lower bound:
///   lhs = ((d+|xi|^2)^((p-2)/2) xi - (d+|xb|^2)^((p-2)/2) xb) . (xi - xb)
///   1 < p <= 2: (p-1) |xi-xb|^2 / (d + |xi|^2 + |xb|^2)^((2-p)/2)
///   p >= 2:     min{1/2, 2^(2-p)} |xi-xb|^p
inline MonotonicityGap monotonicity_gap(Vec2 xi, Vec2 xibar, double p, double delta) {
    if (!(p > 1.0)) throw config_error("monotonicity_gap: p must be > 1");
    if (delta < 0.0) throw config_error("monotonicity_gap: delta must be >= 0");
    const double a2 = dot(xi, xi), b2 = dot(xibar, xibar);
    const double e = (p - 2.0) / 2.0;
    const Vec2 diff = xi - xibar;
    const double d2 = dot(diff, diff);

    auto flux_coeff = [&](double s2) {
        const double base = delta + s2;
        if (base == 0.0) return e == 0.0 ? 1.0 : 0.0; // p > 2 with xi = 0: zero flux
        return std::pow(base, e);
    };
    const Vec2 fa = flux_coeff(a2) * xi;
    const Vec2 fb = flux_coeff(b2) * xibar;

    MonotonicityGap gap;
    gap.lhs = dot(fa - fb, diff);
    if (p <= 2.0) {
        const double denom = std::pow(delta + a2 + b2, (2.0 - p) / 2.0);
        gap.lower_bound = (denom == 0.0 && d2 == 0.0)
                              ? 0.0
                              : (p - 1.0) * d2 / std::max(denom, 1e-300);
        if (d2 == 0.0) gap.lower_bound = 0.0;
    } else {
        gap.lower_bound = std::min(0.5, std::pow(2.0, 2.0 - p)) * std::pow(d2, p / 2.0);
    }
    return gap;
}

struct EquivalenceResult {
    bool monotone = false;   // both scalar and vector statements hold on all samples
    bool consistent = false; // the two statements agreed (hold or fail together)
    bool has_witness = false;
    double tau = 0.0; // scalar witness pair when monotonicity fails
    double tau_bar = 0.0;
};

/// Cross-checks scalar monotonicity of tau -> a(tau) tau against vector
/// monotonicity of xi -> a(|xi|) xi on matched samples (|xi| = tau, random
/// directions, collinear pairs included). A grid scan for a decreasing flux
/// pair supplies the witness in the non-monotone case.
inline EquivalenceResult scalar_vector_equivalence_check(
    const std::function<double(double)>& a_profile, int samples, unsigned seed = 20240901u,
    double tau_max = 10.0) {
    EquivalenceResult res;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> utau(0.0, tau_max);
    std::uniform_real_distribution<double> uang(0.0, 2.0 * 3.14159265358979323846);

    bool scalar_ok = true, vector_ok = true;

    // Deterministic flux scan (finds adjacent decreasing pairs if any).
    const int grid = std::max(64, samples / 8);
    double prev_tau = 0.0, prev_flux = 0.0;
    for (int i = 1; i <= grid; ++i) {
        const double tau = tau_max * i / grid;
        const double flux = a_profile(tau) * tau;
        if (flux <= prev_flux) {
            scalar_ok = false;
            if (!res.has_witness) {
                res.has_witness = true;
                res.tau = prev_tau;
                res.tau_bar = tau;
            }
            // Collinear matched sample: the vector statement fails on it too.
            Vec2 xi{tau, 0.0}, xb{prev_tau, 0.0};
            const double v =
                dot(a_profile(tau) * xi - a_profile(prev_tau) * xb, xi - xb);
            if (v <= 0.0) vector_ok = false;
        }
        prev_tau = tau;
        prev_flux = flux;
    }

    for (int i = 0; i < samples; ++i) {
        const double t1 = utau(rng), t2 = utau(rng);
        if (std::abs(t1 - t2) <= 1e-9) continue;
        const double s = (a_profile(t1) * t1 - a_profile(t2) * t2) * (t1 - t2);
        if (s <= 0.0) {
            scalar_ok = false;
            if (!res.has_witness) {
                res.has_witness = true;
                res.tau = t1;
                res.tau_bar = t2;
            }
            // The collinear matched pair carries the violation to the vector side.
            Vec2 xi{t1, 0.0}, xb{t2, 0.0};
            if (dot(a_profile(t1) * xi - a_profile(t2) * xb, xi - xb) <= 0.0)
                vector_ok = false;
        }
        const double th1 = uang(rng), th2 = uang(rng);
        Vec2 xi{t1 * std::cos(th1), t1 * std::sin(th1)};
        Vec2 xb{t2 * std::cos(th2), t2 * std::sin(th2)};
        if (norm(xi - xb) <= 1e-9) continue;
        const double v = dot(a_profile(t1) * xi - a_profile(t2) * xb, xi - xb);
        if (v <= 0.0) vector_ok = false;
    }

    res.monotone = scalar_ok && vector_ok;
    res.consistent = (scalar_ok == vector_ok);
    return res;
}

struct H1Witness {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

/// Finds constants witnessing c1 tau^p - c2 <= sigma(u,tau) tau^2 and
/// sigma(u,tau) <= c3 (1+tau^2)^((p-2)/2) over (0, tau_max], then re-checks
/// them on a fresh sample. The u-dependence factors through the declared
/// sigma0 bounds, so the scan runs over the tau profile only.
inline H1Witness h1_witness(const ConstitutiveSpec& spec, double tau_max = 10.0,
                            int samples = 4096, unsigned seed = 777u) {
    if (!(tau_max > 0.0) || samples < 16) throw config_error("h1_witness: bad scan range");
    if (spec.p < 2.0 && !(spec.delta > 0.0))
        throw config_error("h1_witness: p < 2 requires delta > 0");
    const double p = spec.p;
    const double e = (p - 2.0) / 2.0;

    // rho(tau) = (delta + tau^2)^((p-2)/2) * tau^(2-p):  sigma*tau^2 = sigma0*rho*tau^p.
    auto rho = [&](double tau) {
        return std::pow(spec.delta + tau * tau, e) * std::pow(tau, -2.0 * e);
    };

    H1Witness w;
    const int scan = std::max(samples, 32768);
    double rho_min = rho(tau_max), ratio_max = std::pow(spec.delta, e); // tau -> 0 limit
    if (e == 0.0) ratio_max = 1.0;
    for (int i = 1; i <= scan; ++i) {
        const double tau = tau_max * i / scan;
        rho_min = std::min(rho_min, rho(tau));
        ratio_max = std::max(ratio_max, std::pow((spec.delta + tau * tau) / (1.0 + tau * tau), e));
    }
    w.c3 = spec.sigma0.hi * ratio_max;

    if (p >= 2.0) {
        // rho decreases to its infimum at tau_max (rho >= 1, exactly 1 at p = 2
        // or delta = 0), so the grid minimum is the true minimum.
        w.c1 = spec.sigma0.lo * rho_min;
        w.c2 = 0.0;
    } else {
        // p < 2: rho vanishes at tau -> 0 but increases toward 1, so anchor c1
        // at the large-tau value and absorb the small-tau region in c2.
        w.c1 = spec.sigma0.lo * rho(tau_max);
        double c2 = 0.0, prev = 0.0, max_jump = 0.0;
        for (int i = 1; i <= scan; ++i) {
            const double tau = tau_max * i / scan;
            const double gap = w.c1 * std::pow(tau, p) -
                               spec.sigma0.lo * rho(tau) * std::pow(tau, p);
            c2 = std::max(c2, gap);
            max_jump = std::max(max_jump, std::abs(gap - prev));
            prev = gap;
        }
        // Between-grid excursions are first-order bounded by the largest jump;
        // below the first grid point the gap is under c1 * tau_min^p.
        w.c2 = std::max(c2 + 2.0 * max_jump, w.c1 * std::pow(tau_max / scan, p)) + 1e-12;
    }

    // Independent re-check on fresh (u, tau) samples.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> utau(1e-9, tau_max);
    std::uniform_real_distribution<double> uu(-50.0, 50.0);
    for (int i = 0; i < samples; ++i) {
        const double tau = utau(rng), u = uu(rng);
        const double sig = sigma(spec, u, tau);
        const double slack = 1e-10 * (1.0 + std::abs(sig) * tau * tau);
        if (w.c1 * std::pow(tau, p) - w.c2 > sig * tau * tau + slack)
            throw structural_error("h1_witness: lower growth bound failed at tau = " +
                                   std::to_string(tau));
        if (sig > w.c3 * std::pow(1.0 + tau * tau, e) + slack)
            throw structural_error("h1_witness: upper growth bound failed at tau = " +
                                   std::to_string(tau));
    }
    return w;
}

} // namespace thermistor
