#pragma once

// CSV and legacy-ASCII VTK writers. Numbers are emitted with 17 significant
// digits and '.' decimal separator; same inputs give byte-identical files.

#include <cstdio>
#include <fstream>
#include <string>

#include "thermistor/coupling.hpp"
#include "thermistor/errors.hpp"
#include "thermistor/estimates.hpp"
#include "thermistor/mesh.hpp"

namespace thermistor {

namespace detail {

inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open for writing: " + path);
    return os;
}

} // namespace detail

inline void write_trajectory_csv(const Trajectory& traj, double p, const std::string& path) {
    auto os = detail::open_out(path);
    os << "t,step,fp_iters,kacanov_iters,u_L1,u_L2,phi_W1p,f_eps_int\n";
    const Mesh& mesh = *traj.mesh;
    for (std::size_t m = 0; m < traj.u.size(); ++m) {
        os << detail::num17(traj.times[m]) << ',' << m << ',' << traj.stats[m].fp_iters << ','
           << traj.stats[m].kacanov_iters << ',' << detail::num17(lp_norm(traj.u[m], 1.0, mesh))
           << ',' << detail::num17(lp_norm(traj.u[m], 2.0, mesh)) << ','
           << detail::num17(w1p_seminorm(traj.phi[m], p, mesh)) << ','
           << detail::num17(traj.f_eps_per_step[m]) << '\n';
    }
    if (!os) throw config_error("write failed: " + path);
}

inline void write_ledger_csv(const EstimateLedger& ledger, const std::string& path) {
    auto os = detail::open_out(path);
    os << "eps,phi_norm,f_eps_integral,u_LinfL1,weighted_grad,u_LqW1q,u_LrLr,u0_L1,"
          "phiD_norm,cauchy_dist\n";
    for (const auto& r : ledger.rows)
        os << detail::num17(r.eps) << ',' << detail::num17(r.phi_norm) << ','
           << detail::num17(r.f_eps_integral) << ',' << detail::num17(r.u_linf_l1) << ','
           << detail::num17(r.weighted_grad) << ',' << detail::num17(r.u_lq_w1q) << ','
           << detail::num17(r.u_lr_lr) << ',' << detail::num17(r.u0_l1) << ','
           << detail::num17(r.phiD_norm) << ',' << detail::num17(r.cauchy_dist) << '\n';
    if (!os) throw config_error("write failed: " + path);
}

/// Legacy ASCII unstructured-grid snapshot with point data "phi" and "u".
inline void write_vtk_snapshot(const Mesh& mesh, const ScalarField& phi, const ScalarField& u,
                               const std::string& path) {
    auto os = detail::open_out(path);
    os << "# vtk DataFile Version 3.0\n";
    os << "thermistor fields\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.node_count() << " double\n";
    for (const auto& p : mesh.nodes)
        os << detail::num17(p.x) << ' ' << detail::num17(p.y) << " 0\n";
    os << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles)
        os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (int k = 0; k < mesh.triangle_count(); ++k) os << "5\n";
    os << "POINT_DATA " << mesh.node_count() << '\n';
    os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.node_count(); ++i) os << detail::num17(phi[i]) << '\n';
    os << "SCALARS u double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.node_count(); ++i) os << detail::num17(u[i]) << '\n';
    if (!os) throw config_error("write failed: " + path);
}

} // namespace thermistor
