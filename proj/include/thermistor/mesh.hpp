#pragma once

// Conforming P1 triangulations of an axis-aligned rectangle with
// Dirichlet/Neumann-tagged boundary edges.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "thermistor/errors.hpp"

namespace thermistor {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

enum class BoundaryTag : std::uint8_t { dirichlet, neumann };
enum class Side : std::uint8_t { left, right, bottom, top };

struct BoundaryEdge {
    int a = -1;
    int b = -1; // oriented counterclockwise along the boundary
    BoundaryTag tag = BoundaryTag::neumann;
};

/// Immutable after construction; safe for concurrent reads.
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> triangles; // CCW node index triples
    std::vector<BoundaryEdge> boundary_edges;
    double lx = 0.0;
    double ly = 0.0;
    int nx = 0; // structured cell counts (0 when not grid-built)
    int ny = 0;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }

    double signed_area(int k) const {
        const auto& t = triangles[k];
        Vec2 e1 = nodes[t[1]] - nodes[t[0]];
        Vec2 e2 = nodes[t[2]] - nodes[t[0]];
        return 0.5 * (e1.x * e2.y - e1.y * e2.x);
    }

    Vec2 barycenter(int k) const {
        const auto& t = triangles[k];
        return (1.0 / 3.0) * (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]);
    }

    /// Gradients of the three P1 hat functions on triangle k (constant per triangle).
    std::array<Vec2, 3> hat_gradients(int k) const {
        const auto& t = triangles[k];
        const Vec2 p0 = nodes[t[0]], p1 = nodes[t[1]], p2 = nodes[t[2]];
        const double inv2A = 1.0 / (2.0 * signed_area(k));
        return {Vec2{(p1.y - p2.y) * inv2A, (p2.x - p1.x) * inv2A},
                Vec2{(p2.y - p0.y) * inv2A, (p0.x - p2.x) * inv2A},
                Vec2{(p0.y - p1.y) * inv2A, (p1.x - p0.x) * inv2A}};
    }

    double total_area() const {
        double s = 0.0;
        for (int k = 0; k < triangle_count(); ++k) s += signed_area(k);
        return s;
    }

    double boundary_length(BoundaryTag tag) const {
        double s = 0.0;
        for (const auto& e : boundary_edges)
            if (e.tag == tag) s += norm(nodes[e.b] - nodes[e.a]);
        return s;
    }

    /// Nodes incident to at least one Dirichlet-tagged edge, ascending.
    std::vector<int> dirichlet_nodes() const {
        std::set<int> s;
        for (const auto& e : boundary_edges)
            if (e.tag == BoundaryTag::dirichlet) {
                s.insert(e.a);
                s.insert(e.b);
            }
        return {s.begin(), s.end()};
    }

    /// Characteristic mesh size (longest cell edge for grid meshes).
    double mesh_size() const {
        double h = 0.0;
        for (int k = 0; k < triangle_count(); ++k) {
            const auto& t = triangles[k];
            for (int i = 0; i < 3; ++i)
                h = std::max(h, norm(nodes[t[(i + 1) % 3]] - nodes[t[i]]));
        }
        return h;
    }
};

/// Uniform grid of (nx+1)*(ny+1) nodes, row-major; each cell split along the
/// lower-left to upper-right diagonal. Edges on the listed sides are tagged
/// Dirichlet, all remaining boundary edges Neumann.
inline Mesh build_rect_mesh(int nx, int ny, double lx, double ly,
                            const std::set<Side>& dirichlet_sides) {
    if (nx < 1 || ny < 1) throw config_error("build_rect_mesh: nx, ny must be >= 1");
    if (!(lx > 0.0) || !(ly > 0.0)) throw config_error("build_rect_mesh: lx, ly must be > 0");
    if (dirichlet_sides.empty())
        throw config_error("build_rect_mesh: Dirichlet side set must be non-empty");

    Mesh m;
    m.lx = lx;
    m.ly = ly;
    m.nx = nx;
    m.ny = ny;
    m.nodes.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.nodes.push_back({lx * i / nx, ly * j / ny});

    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

    m.triangles.reserve(static_cast<std::size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int n00 = id(i, j), n10 = id(i + 1, j);
            const int n01 = id(i, j + 1), n11 = id(i + 1, j + 1);
            m.triangles.push_back({n00, n10, n11});
            m.triangles.push_back({n00, n11, n01});
        }

    auto tag_of = [&dirichlet_sides](Side s) {
        return dirichlet_sides.count(s) ? BoundaryTag::dirichlet : BoundaryTag::neumann;
    };
    // Counterclockwise loop: bottom, right, top, left.
    for (int i = 0; i < nx; ++i)
        m.boundary_edges.push_back({id(i, 0), id(i + 1, 0), tag_of(Side::bottom)});
    for (int j = 0; j < ny; ++j)
        m.boundary_edges.push_back({id(nx, j), id(nx, j + 1), tag_of(Side::right)});
    for (int i = nx; i > 0; --i)
        m.boundary_edges.push_back({id(i, ny), id(i - 1, ny), tag_of(Side::top)});
    for (int j = ny; j > 0; --j)
        m.boundary_edges.push_back({id(0, j), id(0, j - 1), tag_of(Side::left)});
    return m;
}

struct MeshReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Diagnostic check of all Mesh invariants; never throws.
inline MeshReport validate(const Mesh& mesh) {
    MeshReport rep;
    auto fail = [&rep](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };

    const int nn = mesh.node_count();
    for (int i = 0; i < nn; ++i)
        if (!std::isfinite(mesh.nodes[i].x) || !std::isfinite(mesh.nodes[i].y)) {
            fail("node " + std::to_string(i) + " has non-finite coordinates");
            return rep;
        }

    for (int k = 0; k < mesh.triangle_count(); ++k) {
        for (int v : mesh.triangles[k])
            if (v < 0 || v >= nn) {
                fail("triangle " + std::to_string(k) + " references invalid node");
                return rep;
            }
        if (!(mesh.signed_area(k) > 0.0))
            fail("triangle " + std::to_string(k) + " has non-positive signed area");
    }

    // Edge incidence: interior edges in exactly two triangles, boundary edges in one.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : mesh.triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            edge_count[{std::min(a, b), std::max(a, b)}] += 1;
        }
    std::set<std::pair<int, int>> single; // mesh edges on exactly one triangle
    for (const auto& [e, c] : edge_count) {
        if (c == 1)
            single.insert(e);
        else if (c != 2)
            fail("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                 ") belongs to " + std::to_string(c) + " triangles");
    }

    std::set<std::pair<int, int>> listed;
    bool dup = false;
    for (const auto& e : mesh.boundary_edges) {
        auto key = std::make_pair(std::min(e.a, e.b), std::max(e.a, e.b));
        if (!listed.insert(key).second) dup = true;
        if (!single.count(key))
            fail("boundary edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                 ") is not a one-triangle mesh edge");
    }
    if (dup) fail("duplicated boundary edge breaks the boundary loop");
    for (const auto& e : single)
        if (!listed.count(e))
            fail("one-triangle edge (" + std::to_string(e.first) + "," +
                 std::to_string(e.second) + ") missing from boundary list");

    // Single closed loop: every boundary node has degree 2 and the edge graph
    // is one connected cycle.
    std::map<int, std::vector<int>> adj;
    for (const auto& e : mesh.boundary_edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    bool degree_ok = true;
    for (const auto& [node, nb] : adj)
        if (nb.size() != 2) {
            fail("boundary node " + std::to_string(node) + " has degree " +
                 std::to_string(nb.size()) + " in the boundary loop");
            degree_ok = false;
        }
    if (degree_ok && !adj.empty()) {
        std::set<int> seen;
        int start = adj.begin()->first, prev = -1, cur = start;
        do {
            seen.insert(cur);
            const auto& nb = adj[cur];
            int next = (nb[0] == prev) ? nb[1] : nb[0];
            prev = cur;
            cur = next;
        } while (cur != start && !seen.count(cur));
        if (seen.size() != adj.size())
            fail("boundary edges form more than one loop");
    }

    bool has_dirichlet = false;
    for (const auto& e : mesh.boundary_edges)
        if (e.tag == BoundaryTag::dirichlet) has_dirichlet = true;
    if (!has_dirichlet) fail("Dirichlet edge set is empty");

    return rep;
}

/// Plain-text export: nodes "x y", triangles "i j k", boundary edges "i j TAG".
inline void write_mesh_text(const Mesh& mesh, std::ostream& os) {
    char buf[80];
    for (const auto& p : mesh.nodes) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
        os << buf;
    }
    for (const auto& t : mesh.triangles)
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges)
        os << e.a << ' ' << e.b << ' ' << (e.tag == BoundaryTag::dirichlet ? 'D' : 'N')
           << '\n';
}

/// Nodal P1 coefficient vector over a mesh.
struct ScalarField {
    const Mesh* mesh = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Mesh& m, double init = 0.0)
        : mesh(&m), v(static_cast<std::size_t>(m.node_count()), init) {}
    ScalarField(const Mesh& m, std::vector<double> values) : mesh(&m), v(std::move(values)) {
        if (static_cast<int>(v.size()) != m.node_count())
            throw config_error("ScalarField: value count does not match node count");
    }

    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }

    /// Value at the barycenter of triangle k (mean of the vertex values for P1).
    double barycentric(int k) const {
        const auto& t = mesh->triangles[k];
        return (v[t[0]] + v[t[1]] + v[t[2]]) / 3.0;
    }

    /// Constant gradient on triangle k.
    Vec2 gradient(int k) const {
        const auto& t = mesh->triangles[k];
        const auto g = mesh->hat_gradients(k);
        Vec2 r{0.0, 0.0};
        for (int i = 0; i < 3; ++i) r = r + v[t[i]] * g[i];
        return r;
    }
};

template <class F>
ScalarField sample_nodal(const Mesh& mesh, F&& f) {
    ScalarField u(mesh);
    for (int i = 0; i < mesh.node_count(); ++i) u[i] = f(mesh.nodes[i]);
    return u;
}

} // namespace thermistor
