#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "reggeflow/complex.hpp"
#include "reggeflow/geometry.hpp"

namespace rrf {

// ---------------------------------------------------------------------------
// 3-sphere p-cell models (boundary of the 4-simplex, 16-cell, 600-cell)

/// Regular p-cell model: p tetrahedra meet at every edge.
struct PCellModel {
    int p;       // 3, 4 or 5
    int n_p;     // 5, 16 or 600 tetrahedra
    double ell0 = 1.0;

    static PCellModel make(int p, double ell0 = 1.0) {
        switch (p) {
            case 3: return {3, 5, ell0};
            case 4: return {4, 16, ell0};
            case 5: return {5, 600, ell0};
        }
        throw Error("PCellModel: p must be 3, 4 or 5");
    }

    /// Regular-tetrahedron dihedral angle arcsec(3).
    static double theta() { return std::acos(1.0 / 3.0); }
    double deficit() const { return 2.0 * std::numbers::pi - p * theta(); }
};

struct PCellState {
    double ell_sq;
    double a_eff_sq;
};

/// Uniform collapse of the p-cell model: l^2(t) = l0^2 - (96/(sqrt2 p)) eps t,
/// with the effective 3-sphere radius fixed by volume matching
/// 2 pi^2 a^3 = N_p (sqrt2/12) l^3.
inline PCellState pcell_closed_form(const PCellModel& model, double t) {
    const double rate = 96.0 / (std::numbers::sqrt2 * model.p) * model.deficit();
    const double ell_sq = model.ell0 * model.ell0 - rate * t;
    if (ell_sq <= 0.0) throw CollapseExceeded("pcell_closed_form: t past extinction");
    const double vol_ratio = std::numbers::sqrt2 * model.n_p / (24.0 * std::numbers::pi * std::numbers::pi);
    const double a_eff_sq = ell_sq * std::pow(vol_ratio, 2.0 / 3.0);
    return {ell_sq, a_eff_sq};
}

/// Effective collapse rate of a_eff^2 for the model; the continuum round
/// 3-sphere has d(a^2)/dt = -2, so factor/2 measures the lattice deviation.
inline double pcell_effective_factor(const PCellModel& model) {
    const double vol_ratio = std::numbers::sqrt2 * model.n_p / (3.0 * std::numbers::pi * std::numbers::pi);
    return (6.0 * std::numbers::sqrt2 / model.p) * std::pow(vol_ratio, 2.0 / 3.0) * model.deficit();
}

struct PCellDeviationRow {
    int p;
    int n_p;
    double deficit;
    double factor;         // effective R_chichi, continuum value 2
    double deviation_pct;  // 100 * |factor - 2| / 2
};

struct PCellDeviationTable {
    std::array<PCellDeviationRow, 3> rows;  // p = 3, 4, 5
    /// log-log slope of the deviation against the lattice spacing proxy
    /// N_p^(-1/3), between the coarsest (5-cell) and finest (600-cell) rows.
    double slope;
};

inline PCellDeviationTable pcell_deviation_table() {
    PCellDeviationTable table{};
    for (int i = 0; i < 3; ++i) {
        const PCellModel m = PCellModel::make(3 + i);
        const double fac = pcell_effective_factor(m);
        table.rows[i] = {m.p, m.n_p, m.deficit(), fac, 100.0 * std::abs(fac - 2.0) / 2.0};
    }
    const auto& coarse = table.rows[0];
    const auto& fine = table.rows[2];
    table.slope = std::log(coarse.deviation_pct / fine.deviation_pct) /
                  (std::log(static_cast<double>(fine.n_p) / coarse.n_p) / 3.0);
    return table;
}

// ---------------------------------------------------------------------------
// Icosahedral 3-cylinder model (S^2 x S^1 out of triangular prisms)

/// Stack of icosahedra joined by axial edges; every block is a regular
/// triangular prism with triangle edge s and axial edge a, rigid by symmetry.
struct CylinderModel {
    double s0 = 1.0;
    double a0 = 1.0;
    int n_rings = 3;
};

struct CylinderState {
    double s_sq;
    double a;
    double r_eff_sq;
};

namespace detail {
/// Area-matching radius of the sphere with the surface area of an
/// icosahedron of edge s: 4 pi r^2 = 20 (sqrt3/4) s^2.
inline double cylinder_r_eff_sq(double s_sq) {
    return 5.0 * std::sqrt(3.0) / (4.0 * std::numbers::pi) * s_sq;
}
}  // namespace detail

/// Closed-form cylinder flow: s^2(t) = s0^2 - (16 pi / (5 sqrt3)) t, the
/// product a s conserved, and the effective transverse radius from area
/// matching.
inline CylinderState cylinder_closed_form(const CylinderModel& model, double t) {
    const double s_sq = model.s0 * model.s0 - 16.0 * std::numbers::pi / (5.0 * std::sqrt(3.0)) * t;
    if (s_sq <= 0.0) throw CollapseExceeded("cylinder_closed_form: t past extinction");
    const double a = model.a0 * model.s0 / std::sqrt(s_sq);
    return {s_sq, a, detail::cylinder_r_eff_sq(s_sq)};
}

struct CylinderRates {
    double ds_dt;
    double da_dt;
    double eps_a;     // deficit at axial edges
    double eps_s;     // deficit at icosahedral edges
    double lhs_a_coeff;  // coefficient of s sdot in the axial-edge equation
};

/// Symmetric reduction of the RRF system on the prism lattice, derived from
/// the block geometry rather than copied constants. The two unknowns are
/// sdot and adot:
///   axial edge:        5 m_as sigma' sdot             = -4 eps_a
///   icosahedral edge:  2 m_ss sigma' sdot + 2 m_sa adot = -4 eps_s
/// with sigma = s/sqrt3 the dual of a prism side face.
inline CylinderRates cylinder_symmetric_rrf(const CylinderModel& model, double t = 0.0) {
    const CylinderState st = cylinder_closed_form(model, t);
    const double s = std::sqrt(st.s_sq);
    const double a = st.a;

    // prism dihedrals: along an axial edge the two side faces meet at the
    // equilateral triangle's vertex angle; along a triangle edge a side face
    // meets a triangle face orthogonally
    const double theta_a = std::acos(0.5);
    const double theta_s = std::numbers::pi / 2.0;
    // 5 prisms around an axial edge (icosahedron vertex degree), 4 blocks
    // around a triangle edge (2 prisms + the 2 faces inside each)
    const double eps_a = 2.0 * std::numbers::pi - 5.0 * theta_a;
    const double eps_s = 2.0 * std::numbers::pi - 4.0 * theta_s;

    // dual edge of a side face: twice the distance from the face center to
    // the prism center is irrelevant here -- what enters is sigma, the dual
    // edge crossing the face, of length equal to the triangle circumradius
    // spacing: sigma = 2 * (inradius of the triangle) ... derived directly:
    const double tri_circum = s / std::sqrt(3.0);   // R of equilateral triangle
    const double tri_in = s / (2.0 * std::sqrt(3.0));  // distance center-edge
    const double sigma = tri_circum;                // = s/sqrt3
    const double dsigma_ds = sigma / s;

    // moment arms of the dual polygons
    const double m_as = s / 2.0;   // axial edge's arm to sigma (half triangle edge)
    const double m_ss = a / 2.0;   // triangle edge's arm to sigma (half prism height)
    const double m_sa = tri_in;    // triangle edge's arm to alpha = a (sqrt3 s / 6)

    Eigen::Matrix2d lhs;
    lhs << 5.0 * m_as * dsigma_ds, 0.0,
           2.0 * m_ss * dsigma_ds, 2.0 * m_sa;
    Eigen::Vector2d rhs(-4.0 * eps_a, -4.0 * eps_s);
    const Eigen::Vector2d rates = lhs.fullPivLu().solve(rhs);
    return {rates(0), rates(1), eps_a, eps_s, 5.0 * m_as * dsigma_ds / s};
}

// ---------------------------------------------------------------------------
// Lattice generators

struct GeneratedMesh {
    ComplexTopology3 topology;
    MetricAssignment metric;
};

namespace detail {

inline GeneratedMesh mesh_from_tets(const std::vector<Tet>& tets, double ell_sq) {
    GeneratedMesh mesh;
    mesh.topology = build_complex(tets);
    mesh.metric.lengths_sq.assign(mesh.topology.num_edges(), ell_sq);
    return mesh;
}

inline std::vector<std::array<double, 4>> cell600_vertices() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<std::array<double, 4>> verts;
    for (int i = 0; i < 4; ++i)
        for (double s : {1.0, -1.0}) {
            std::array<double, 4> v{0, 0, 0, 0};
            v[i] = s;
            verts.push_back(v);
        }
    for (int mask = 0; mask < 16; ++mask) {
        std::array<double, 4> v;
        for (int i = 0; i < 4; ++i) v[i] = (mask >> i & 1) ? 0.5 : -0.5;
        verts.push_back(v);
    }
    // even permutations of (phi/2, 1/2, 1/(2 phi), 0) with all sign choices
    static constexpr std::array<std::array<int, 4>, 12> kEvenPerms = {
        {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 3, 2, 0},
         {2, 0, 1, 3}, {2, 1, 3, 0}, {2, 3, 0, 1}, {3, 0, 2, 1}, {3, 1, 0, 2}, {3, 2, 1, 0}}};
    const std::array<double, 4> base = {phi / 2.0, 0.5, 1.0 / (2.0 * phi), 0.0};
    std::map<std::array<long long, 4>, bool> seen;
    for (const auto& pm : kEvenPerms)
        for (int smask = 0; smask < 16; ++smask) {
            std::array<double, 4> v;
            std::array<long long, 4> key;
            for (int i = 0; i < 4; ++i) {
                const double x = ((smask >> i & 1) ? -1.0 : 1.0) * base[pm[i]];
                v[i] = x;
                key[i] = std::llround(x * 1e12);
            }
            if (!seen.emplace(key, true).second) continue;
            verts.push_back(v);
        }
    return verts;
}

}  // namespace detail

/// Boundary complexes of the three regular 4-polytopes with p tetrahedra per
/// edge, all squared lengths 1.
inline GeneratedMesh generate_pcell_lattice(int p) {
    if (p == 3) {
        // boundary of the 4-simplex: the five 4-subsets of {0..4}
        std::vector<Tet> tets;
        for (int skip = 0; skip < 5; ++skip) {
            Tet t;
            for (int i = 0, j = 0; i < 5; ++i)
                if (i != skip) t[j++] = i;
            tets.push_back(t);
        }
        return detail::mesh_from_tets(tets, 1.0);
    }
    if (p == 4) {
        // 16-cell: vertices 2i+s are +-e_i; one tet per sign choice
        std::vector<Tet> tets;
        for (int mask = 0; mask < 16; ++mask)
            tets.push_back({0 + (mask & 1), 2 + (mask >> 1 & 1), 4 + (mask >> 2 & 1),
                            6 + (mask >> 3 & 1)});
        return detail::mesh_from_tets(tets, 1.0);
    }
    if (p == 5) {
        const auto verts = detail::cell600_vertices();
        const int n = static_cast<int>(verts.size());
        const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
        const double target = 2.0 - phi;  // squared edge length at unit circumradius
        std::vector<std::vector<int>> adj(n);  // forward neighbours only
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double d2 = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double d = verts[i][k] - verts[j][k];
                    d2 += d * d;
                }
                if (std::abs(d2 - target) < 1e-9) adj[i].push_back(j);
            }
        auto connected = [&](int lo, int hi) {
            const auto& lst = adj[lo];
            return std::binary_search(lst.begin(), lst.end(), hi);
        };
        std::vector<Tet> tets;
        for (int i = 0; i < n; ++i)
            for (int j : adj[i]) {
                std::vector<int> common;
                for (int k : adj[i])
                    if (k > j && connected(j, k)) common.push_back(k);
                for (std::size_t a = 0; a < common.size(); ++a)
                    for (std::size_t b = a + 1; b < common.size(); ++b)
                        if (connected(common[a], common[b]))
                            tets.push_back({i, j, common[a], common[b]});
            }
        GeneratedMesh mesh = detail::mesh_from_tets(tets, 1.0);
        if (mesh.topology.num_edges() != 720 || mesh.topology.num_tets() != 600)
            throw Error("generate_pcell_lattice: 600-cell counts off");
        for (const auto& cof : mesh.topology.edge_tets)
            if (cof.size() != 5) throw Error("generate_pcell_lattice: 600-cell edge valence off");
        return mesh;
    }
    throw Error("generate_pcell_lattice: p must be 3, 4 or 5");
}

/// Flat 3-torus out of body-centered-cubic disphenoid tetrahedra: n^3 cubes,
/// each contributing its center and 12 tetrahedra spanning adjacent centers
/// and shared face corners. Well-centered and exactly flat, so it serves as
/// the fixed-point test mesh. Optional anisotropic cell scale.
inline GeneratedMesh generate_flat_torus(int n = 3,
                                         std::array<double, 3> scale = {1.0, 1.0, 1.0}) {
    if (n < 3) throw Error("generate_flat_torus: n must be >= 3");
    auto pid = [n](int i, int j, int k) {
        return ((((i % n) + n) % n * n + ((j % n) + n) % n) * n + ((k % n) + n) % n) * 2;
    };
    auto cid = [&](int i, int j, int k) { return pid(i, j, k) + 1; };
    std::vector<Tet> tets;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int ax = 0; ax < 3; ++ax) {
                    int d[3] = {0, 0, 0};
                    d[ax] = 1;
                    const int c1 = cid(i, j, k);
                    const int c2 = cid(i + d[0], j + d[1], k + d[2]);
                    const int o1 = (ax + 1) % 3, o2 = (ax + 2) % 3;
                    // the 4 corners of the cube face between the two centers
                    std::array<int, 4> corner;
                    for (int s1 = 0; s1 < 2; ++s1)
                        for (int s2 = 0; s2 < 2; ++s2) {
                            int q[3] = {i, j, k};
                            q[ax] += 1;
                            q[o1] += s1;
                            q[o2] += s2;
                            corner[s1 * 2 + s2] = pid(q[0], q[1], q[2]);
                        }
                    // one tet per face-adjacent corner pair
                    static constexpr int kPairs[4][2] = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
                    for (const auto& pr : kPairs)
                        tets.push_back({c1, c2, corner[pr[0]], corner[pr[1]]});
                }
    GeneratedMesh mesh;
    mesh.topology = build_complex(tets);
    auto coord = [&](int v, int axis) {
        const int base = v / 2;
        const int c = axis == 0 ? base / (n * n) : axis == 1 ? (base / n) % n : base % n;
        return c + 0.5 * (v % 2);
    };
    mesh.metric.lengths_sq.resize(mesh.topology.num_edges());
    for (int ei = 0; ei < mesh.topology.num_edges(); ++ei) {
        const Edge& e = mesh.topology.edges[ei];
        double l2 = 0.0;
        for (int axis = 0; axis < 3; ++axis) {
            double d = std::fmod(coord(e[1], axis) - coord(e[0], axis), static_cast<double>(n));
            if (d > n / 2.0) d -= n;
            if (d < -n / 2.0) d += n;
            l2 += (d * scale[axis]) * (d * scale[axis]);
        }
        mesh.metric.lengths_sq[ei] = l2;
    }
    return mesh;
}

/// Prism-block complex of the icosahedral 3-cylinder. The blocks are regular
/// triangular prisms, not tetrahedra, so this lives outside ComplexTopology3;
/// all its dual data comes from the rigid prism geometry.
struct PrismComplex {
    int n_rings;
    double s_sq, a_sq;
    std::vector<std::array<int, 2>> s_edges;  // (ring, icosa edge id)
    std::vector<int> a_edges;                 // one per (ring, icosa vertex) pair, flattened
    std::vector<std::array<int, 2>> prisms;   // (ring, icosa face id)
    // icosahedron combinatorics shared by every ring
    std::vector<std::array<int, 2>> icosa_edges;
    std::vector<std::array<int, 3>> icosa_faces;

    int vertices_per_ring() const { return 12; }
    int s_edges_per_ring() const { return static_cast<int>(icosa_edges.size()); }
    int a_edges_per_ring() const { return 12; }
    int prisms_per_ring() const { return static_cast<int>(icosa_faces.size()); }
};

namespace detail {
inline void icosahedron_combinatorics(std::vector<std::array<int, 2>>& edges,
                                      std::vector<std::array<int, 3>>& faces) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<std::array<double, 3>> v;
    for (double a : {1.0, -1.0})
        for (double b : {phi, -phi}) {
            v.push_back({0.0, a, b});
            v.push_back({a, b, 0.0});
            v.push_back({b, 0.0, a});
        }
    auto d2 = [&](int i, int j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (v[i][k] - v[j][k]) * (v[i][k] - v[j][k]);
        return s;
    };
    edges.clear();
    faces.clear();
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            if (std::abs(d2(i, j) - 4.0) < 1e-9) edges.push_back({i, j});
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            for (int k = j + 1; k < 12; ++k)
                if (std::abs(d2(i, j) - 4.0) < 1e-9 && std::abs(d2(i, k) - 4.0) < 1e-9 &&
                    std::abs(d2(j, k) - 4.0) < 1e-9)
                    faces.push_back({i, j, k});
}
}  // namespace detail

/// Periodic stack of n_rings icosahedra: one prism per (ring, icosahedral
/// face), axial edges joining matching vertices of adjacent rings.
inline PrismComplex generate_cylinder_lattice(int n_rings, double s0, double a0) {
    if (n_rings < 3) throw Error("generate_cylinder_lattice: n_rings must be >= 3");
    PrismComplex px;
    px.n_rings = n_rings;
    px.s_sq = s0 * s0;
    px.a_sq = a0 * a0;
    detail::icosahedron_combinatorics(px.icosa_edges, px.icosa_faces);
    for (int r = 0; r < n_rings; ++r) {
        for (int e = 0; e < px.s_edges_per_ring(); ++e) px.s_edges.push_back({r, e});
        for (int vtx = 0; vtx < 12; ++vtx) px.a_edges.push_back(r * 12 + vtx);
        for (int f = 0; f < px.prisms_per_ring(); ++f) px.prisms.push_back({r, f});
    }
    return px;
}

struct PrismDeficits {
    double eps_a;  // every axial edge
    double eps_s;  // every icosahedral edge
};

/// Deficit angles of the prism lattice, from the rigid prism dihedrals: five
/// prisms share each axial edge (vertex degree of the icosahedron), and each
/// icosahedral edge sees two prisms per ring side, four right dihedrals in
/// total.
inline PrismDeficits prism_deficits(const PrismComplex&) {
    const double theta_a = std::acos(0.5);
    const double theta_s = std::numbers::pi / 2.0;
    return {2.0 * std::numbers::pi - 5.0 * theta_a, 2.0 * std::numbers::pi - 4.0 * theta_s};
}

}  // namespace rrf
