#pragma once

// Line-oriented run configuration: "section.key = value", '#' comments,
// case-sensitive keys. Violations are collected with line numbers rather than
// reported first-failure.

#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "thermistor/constitutive.hpp"
#include "thermistor/coupling.hpp"
#include "thermistor/expression.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

struct SideValue {
    enum class Kind : std::uint8_t { constant, ramp, expression } kind = Kind::constant;
    double value = 0.0;  // constant
    double ramp_v = 0.0; // ramp: V * min(t / t_ramp, 1)
    double ramp_t = 1.0;
    Expr expr; // expression in x, y

    double eval(Vec2 p, double t) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::ramp: return ramp_v * std::min(t / ramp_t, 1.0);
            case Kind::expression: return expr.eval(p.x, p.y);
        }
        return 0.0;
    }
};

struct MeshBlock {
    int nx = 8, ny = 8;
    double lx = 1.0, ly = 1.0;
    std::set<Side> dirichlet_sides = {Side::left, Side::right};
};

struct BoundaryBlock {
    std::map<Side, SideValue> sides; // defaults to constant 0 per Dirichlet side
};

struct InitialBlock {
    bool is_expr = false;
    double value = 0.0;
    Expr expr;
};

struct OutputBlock {
    std::string directory; // empty = environment default or "out"
    std::set<std::string> formats = {"csv"};
    int stride = 1; // VTK field-dump stride
};

struct RunConfig {
    MeshBlock mesh;
    ConstitutiveSpec spec;
    CouplingConfig coupling;
    BoundaryBlock boundary;
    InitialBlock initial;
    OutputBlock output;

    // Shape metadata for serialization round-trips.
    std::string sigma0_shape = "constant";
    std::vector<double> sigma0_params = {1.0};
    std::string kappa_shape = "constant";
    std::vector<double> kappa_params = {1.0};

    Mesh build_mesh() const {
        return build_rect_mesh(mesh.nx, mesh.ny, mesh.lx, mesh.ly, mesh.dirichlet_sides);
    }

    /// phi_D trace; Dirichlet sides without an entry evaluate to 0. At shared
    /// corners sides are applied in the order left, right, bottom, top (later
    /// assignments win), matching the nodal extraction below.
    BoundaryData boundary_data() const {
        BoundaryBlock bb = boundary;
        MeshBlock mb = mesh;
        return [bb, mb](Vec2 p, double t) {
            double v = 0.0;
            const double tol = 1e-12 * (mb.lx + mb.ly);
            auto on = [&](Side s) {
                switch (s) {
                    case Side::left: return std::abs(p.x) <= tol;
                    case Side::right: return std::abs(p.x - mb.lx) <= tol;
                    case Side::bottom: return std::abs(p.y) <= tol;
                    case Side::top: return std::abs(p.y - mb.ly) <= tol;
                }
                return false;
            };
            for (Side s : {Side::left, Side::right, Side::bottom, Side::top}) {
                if (!mb.dirichlet_sides.count(s) || !on(s)) continue;
                auto it = bb.sides.find(s);
                v = (it == bb.sides.end()) ? 0.0 : it->second.eval(p, t);
            }
            return v;
        };
    }

    ScalarField initial_field(const Mesh& m) const {
        if (initial.is_expr)
            return sample_nodal(m, [this](Vec2 p) { return initial.expr.eval(p.x, p.y); });
        ScalarField u(m, initial.value);
        return u;
    }

    std::string output_directory() const {
        if (!output.directory.empty()) return output.directory;
        if (const char* env = std::getenv("THERMISTOR_OUT")) return env;
        return "out";
    }
};

struct ParseIssue {
    int line = 0;
    std::string message;
};

struct ParseResult {
    bool ok = false;
    RunConfig config;
    std::vector<ParseIssue> issues;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
}

inline std::optional<double> to_number(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || s.empty()) return std::nullopt;
    return v;
}

inline std::optional<Side> to_side(const std::string& s) {
    if (s == "left") return Side::left;
    if (s == "right") return Side::right;
    if (s == "bottom") return Side::bottom;
    if (s == "top") return Side::top;
    return std::nullopt;
}

inline const char* side_name(Side s) {
    switch (s) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::bottom: return "bottom";
        case Side::top: return "top";
    }
    return "?";
}

} // namespace detail

inline ParseResult parse_config(const std::string& text) {
    ParseResult res;
    RunConfig& cfg = res.config;
    auto& issues = res.issues;

    std::map<std::string, std::pair<std::string, int>> kv; // key -> (value, line)
    {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                issues.push_back({lineno, "expected 'section.key = value'"});
                continue;
            }
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.find('.') == std::string::npos) {
                issues.push_back({lineno, "key '" + key + "' lacks a section prefix"});
                continue;
            }
            if (kv.count(key))
                issues.push_back({lineno, "duplicate key '" + key + "'"});
            kv[key] = {value, lineno};
        }
    }

    auto take = [&kv](const std::string& key) -> std::optional<std::pair<std::string, int>> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        auto v = it->second;
        kv.erase(it);
        return v;
    };
    auto number = [&](const std::string& key, double& dst) {
        if (auto e = take(key)) {
            if (auto v = detail::to_number(e->first))
                dst = *v;
            else
                issues.push_back({e->second, key + ": not a number: '" + e->first + "'"});
        }
    };
    auto integer = [&](const std::string& key, int& dst) {
        if (auto e = take(key)) {
            auto v = detail::to_number(e->first);
            if (v && *v == static_cast<int>(*v))
                dst = static_cast<int>(*v);
            else
                issues.push_back({e->second, key + ": not an integer: '" + e->first + "'"});
        }
    };
    auto boolean = [&](const std::string& key, bool& dst) {
        if (auto e = take(key)) {
            if (e->first == "true" || e->first == "1")
                dst = true;
            else if (e->first == "false" || e->first == "0")
                dst = false;
            else
                issues.push_back({e->second, key + ": expected true/false"});
        }
    };

    // mesh
    integer("mesh.nx", cfg.mesh.nx);
    integer("mesh.ny", cfg.mesh.ny);
    number("mesh.lx", cfg.mesh.lx);
    number("mesh.ly", cfg.mesh.ly);
    if (auto e = take("mesh.dirichlet_sides")) {
        cfg.mesh.dirichlet_sides.clear();
        for (const auto& item : detail::split_list(e->first)) {
            if (auto s = detail::to_side(item))
                cfg.mesh.dirichlet_sides.insert(*s);
            else
                issues.push_back({e->second, "mesh.dirichlet_sides: unknown side '" + item + "'"});
        }
    }

    // constitutive
    number("constitutive.p", cfg.spec.p);
    number("constitutive.delta", cfg.spec.delta);
    auto profile = [&](const std::string& prefix, BoundedProfile& dst, std::string& shape_meta,
                       std::vector<double>& params_meta) {
        std::string shape = shape_meta;
        if (auto e = take(prefix + ".shape")) {
            shape = e->first;
            if (shape != "constant" && shape != "saturating" && shape != "table") {
                issues.push_back({e->second, prefix + ".shape: unknown shape '" + shape + "'"});
                return;
            }
        }
        std::vector<double> params = params_meta;
        if (auto e = take(prefix + ".params")) {
            params.clear();
            for (const auto& item : detail::split_list(e->first)) {
                if (auto v = detail::to_number(item))
                    params.push_back(*v);
                else
                    issues.push_back({e->second, prefix + ".params: not a number: '" + item + "'"});
            }
        }
        if (shape == "constant") {
            if (params.size() != 1) {
                issues.push_back({0, prefix + ": constant shape takes 1 parameter"});
                return;
            }
            dst = BoundedProfile::constant(params[0]);
        } else if (shape == "saturating") {
            if (params.size() != 2) {
                issues.push_back({0, prefix + ": saturating shape takes 2 parameters (lo, hi)"});
                return;
            }
            dst = BoundedProfile::saturating(params[0], params[1]);
        } else {
            if (params.size() < 4 || params.size() % 2 != 0) {
                issues.push_back({0, prefix + ": table shape takes (u, value) pairs"});
                return;
            }
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i + 1 < params.size(); i += 2)
                pts.emplace_back(params[i], params[i + 1]);
            dst = BoundedProfile::table(std::move(pts));
        }
        shape_meta = shape;
        params_meta = params;
    };
    profile("constitutive.sigma0", cfg.spec.sigma0, cfg.sigma0_shape, cfg.sigma0_params);
    profile("constitutive.kappa", cfg.spec.kappa_profile, cfg.kappa_shape, cfg.kappa_params);
    number("constitutive.eta1", cfg.spec.eta1);
    cfg.spec.eta_value = cfg.spec.eta1;
    number("constitutive.eta", cfg.spec.eta_value);
    number("constitutive.g", cfg.spec.g);
    number("constitutive.h", cfg.spec.h);

    // coupling
    number("coupling.T_final", cfg.coupling.T_final);
    integer("coupling.steps", cfg.coupling.steps);
    if (auto e = take("coupling.eps_schedule")) {
        cfg.coupling.eps_schedule.clear();
        for (const auto& item : detail::split_list(e->first)) {
            if (auto v = detail::to_number(item))
                cfg.coupling.eps_schedule.push_back(*v);
            else
                issues.push_back({e->second, "coupling.eps_schedule: not a number: '" + item + "'"});
        }
    }
    number("coupling.fp_rtol", cfg.coupling.fp_rtol);
    integer("coupling.fp_max_iter", cfg.coupling.fp_max_iter);
    number("coupling.kacanov_rtol", cfg.coupling.kacanov_rtol);
    integer("coupling.kacanov_max_iter", cfg.coupling.kacanov_max_iter);
    number("coupling.linear_rtol", cfg.coupling.linear_rtol);
    integer("coupling.linear_max_iter", cfg.coupling.linear_max_iter);
    number("coupling.q", cfg.coupling.q);
    number("coupling.r", cfg.coupling.r);
    number("coupling.omega", cfg.coupling.omega);
    number("coupling.lambda", cfg.coupling.lambda_override);
    boolean("coupling.lumped_mass", cfg.coupling.lumped_mass);

    // boundary: per-side constant, ramp(V, t_ramp), or expression in x, y
    for (Side s : {Side::left, Side::right, Side::bottom, Side::top}) {
        const std::string key = std::string("boundary.") + detail::side_name(s);
        if (auto e = take(key)) {
            SideValue sv;
            const std::string& v = e->first;
            if (v.rfind("ramp(", 0) == 0 && v.back() == ')') {
                const auto args = detail::split_list(v.substr(5, v.size() - 6));
                auto a0 = args.size() == 2 ? detail::to_number(args[0]) : std::nullopt;
                auto a1 = args.size() == 2 ? detail::to_number(args[1]) : std::nullopt;
                if (!a0 || !a1 || !(*a1 > 0.0)) {
                    issues.push_back({e->second, key + ": expected ramp(V, t_ramp) with t_ramp > 0"});
                    continue;
                }
                sv.kind = SideValue::Kind::ramp;
                sv.ramp_v = *a0;
                sv.ramp_t = *a1;
            } else if (auto num = detail::to_number(v)) {
                sv.kind = SideValue::Kind::constant;
                sv.value = *num;
            } else {
                try {
                    sv.expr = Expr::parse(v);
                    sv.kind = SideValue::Kind::expression;
                } catch (const config_error& err) {
                    issues.push_back({e->second, key + ": " + err.what()});
                    continue;
                }
            }
            cfg.boundary.sides[s] = std::move(sv);
        }
    }

    // initial
    if (auto e = take("initial.u0")) {
        if (auto num = detail::to_number(e->first)) {
            cfg.initial.is_expr = false;
            cfg.initial.value = *num;
        } else {
            try {
                cfg.initial.expr = Expr::parse(e->first);
                cfg.initial.is_expr = true;
            } catch (const config_error& err) {
                issues.push_back({e->second, std::string("initial.u0: ") + err.what()});
            }
        }
    }

    // output
    if (auto e = take("output.directory")) cfg.output.directory = e->first;
    if (auto e = take("output.formats")) {
        cfg.output.formats.clear();
        for (const auto& item : detail::split_list(e->first)) {
            if (item == "csv" || item == "vtk")
                cfg.output.formats.insert(item);
            else
                issues.push_back({e->second, "output.formats: unknown format '" + item + "'"});
        }
    }
    integer("output.stride", cfg.output.stride);

    for (const auto& [key, entry] : kv)
        issues.push_back({entry.second, "unknown key '" + key + "'"});

    // Semantic constraints, collected (line numbers are not tracked past parsing).
    if (cfg.mesh.nx < 1 || cfg.mesh.ny < 1) issues.push_back({0, "mesh: nx, ny must be >= 1"});
    if (!(cfg.mesh.lx > 0.0) || !(cfg.mesh.ly > 0.0))
        issues.push_back({0, "mesh: lx, ly must be > 0"});
    if (cfg.mesh.dirichlet_sides.empty())
        issues.push_back({0, "mesh: dirichlet_sides must be non-empty"});
    for (const auto& msg : cfg.spec.validate()) issues.push_back({0, "constitutive: " + msg});
    for (const auto& msg : cfg.coupling.validate()) issues.push_back({0, "coupling: " + msg});
    if (cfg.output.stride < 1) issues.push_back({0, "output.stride must be >= 1"});

    res.ok = issues.empty();
    return res;
}

inline std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "mesh.nx = " << cfg.mesh.nx << "\nmesh.ny = " << cfg.mesh.ny << "\n";
    os << "mesh.lx = " << num(cfg.mesh.lx) << "\nmesh.ly = " << num(cfg.mesh.ly) << "\n";
    os << "mesh.dirichlet_sides = ";
    bool first = true;
    for (Side s : {Side::left, Side::right, Side::bottom, Side::top})
        if (cfg.mesh.dirichlet_sides.count(s)) {
            if (!first) os << ",";
            os << detail::side_name(s);
            first = false;
        }
    os << "\n";
    os << "constitutive.p = " << num(cfg.spec.p) << "\n";
    os << "constitutive.delta = " << num(cfg.spec.delta) << "\n";
    auto profile = [&](const std::string& prefix, const std::string& shape,
                       const std::vector<double>& params) {
        os << prefix << ".shape = " << shape << "\n" << prefix << ".params = ";
        for (std::size_t i = 0; i < params.size(); ++i)
            os << (i ? "," : "") << num(params[i]);
        os << "\n";
    };
    profile("constitutive.sigma0", cfg.sigma0_shape, cfg.sigma0_params);
    profile("constitutive.kappa", cfg.kappa_shape, cfg.kappa_params);
    os << "constitutive.eta1 = " << num(cfg.spec.eta1) << "\n";
    os << "constitutive.eta = " << num(cfg.spec.eta_value) << "\n";
    os << "constitutive.g = " << num(cfg.spec.g) << "\n";
    os << "constitutive.h = " << num(cfg.spec.h) << "\n";
    os << "coupling.T_final = " << num(cfg.coupling.T_final) << "\n";
    os << "coupling.steps = " << cfg.coupling.steps << "\n";
    os << "coupling.eps_schedule = ";
    for (std::size_t i = 0; i < cfg.coupling.eps_schedule.size(); ++i)
        os << (i ? "," : "") << num(cfg.coupling.eps_schedule[i]);
    os << "\n";
    os << "coupling.fp_rtol = " << num(cfg.coupling.fp_rtol) << "\n";
    os << "coupling.fp_max_iter = " << cfg.coupling.fp_max_iter << "\n";
    os << "coupling.kacanov_rtol = " << num(cfg.coupling.kacanov_rtol) << "\n";
    os << "coupling.kacanov_max_iter = " << cfg.coupling.kacanov_max_iter << "\n";
    os << "coupling.linear_rtol = " << num(cfg.coupling.linear_rtol) << "\n";
    os << "coupling.linear_max_iter = " << cfg.coupling.linear_max_iter << "\n";
    os << "coupling.q = " << num(cfg.coupling.q) << "\n";
    os << "coupling.r = " << num(cfg.coupling.r) << "\n";
    os << "coupling.omega = " << num(cfg.coupling.omega) << "\n";
    if (cfg.coupling.lambda_override > 0.0)
        os << "coupling.lambda = " << num(cfg.coupling.lambda_override) << "\n";
    os << "coupling.lumped_mass = " << (cfg.coupling.lumped_mass ? "true" : "false") << "\n";
    for (Side s : {Side::left, Side::right, Side::bottom, Side::top}) {
        auto it = cfg.boundary.sides.find(s);
        if (it == cfg.boundary.sides.end()) continue;
        os << "boundary." << detail::side_name(s) << " = ";
        const SideValue& sv = it->second;
        switch (sv.kind) {
            case SideValue::Kind::constant: os << num(sv.value); break;
            case SideValue::Kind::ramp:
                os << "ramp(" << num(sv.ramp_v) << "," << num(sv.ramp_t) << ")";
                break;
            case SideValue::Kind::expression: os << sv.expr.source(); break;
        }
        os << "\n";
    }
    os << "initial.u0 = ";
    if (cfg.initial.is_expr)
        os << cfg.initial.expr.source();
    else
        os << num(cfg.initial.value);
    os << "\n";
    if (!cfg.output.directory.empty()) os << "output.directory = " << cfg.output.directory << "\n";
    os << "output.formats = ";
    first = true;
    for (const auto& f : cfg.output.formats) {
        if (!first) os << ",";
        os << f;
        first = false;
    }
    os << "\n";
    os << "output.stride = " << cfg.output.stride << "\n";
    return os.str();
}

} // namespace thermistor
