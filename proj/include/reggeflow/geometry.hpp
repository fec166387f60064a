#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "reggeflow/complex.hpp"
#include "reggeflow/errors.hpp"

namespace rrf {

/// Relative tolerance used for realizability / degeneracy tests, measured
/// against the largest squared length in the simplex.
inline constexpr double kRealizabilityTol = 1e-12;

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Bordered Cayley-Menger matrix of a k-simplex given its (k+1)x(k+1)
/// symmetric matrix of pairwise squared distances.
inline Eigen::MatrixXd cm_bordered(const Eigen::MatrixXd& d_sq) {
    const int n = static_cast<int>(d_sq.rows());
    Eigen::MatrixXd m = Eigen::MatrixXd::Ones(n + 1, n + 1);
    m(0, 0) = 0.0;
    m.block(1, 1, n, n) = d_sq;
    return m;
}

}  // namespace detail

/// Euclidean k-volume of a k-simplex from its matrix of pairwise squared
/// distances (Cayley-Menger determinant). Throws NonRealizable when the
/// determinant is negative beyond tolerance; returns 0 for degenerate
/// simplices within tolerance.
inline double cm_volume(int k, const Eigen::MatrixXd& d_sq) {
    if (k < 1 || d_sq.rows() != k + 1 || d_sq.cols() != k + 1)
        throw Error("cm_volume: bad dimensions");
    const double det = detail::cm_bordered(d_sq).determinant();
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;  // (-1)^(k+1)
    const double scale = std::pow(2.0, k) * detail::factorial(k) * detail::factorial(k);
    double vol_sq = sign * det / scale;
    const double max_sq = d_sq.maxCoeff();
    if (vol_sq < 0.0) {
        if (vol_sq < -kRealizabilityTol * std::pow(max_sq, k))
            throw NonRealizable("cm_volume: negative Cayley-Menger determinant");
        vol_sq = 0.0;
    }
    return std::sqrt(vol_sq);
}

/// Circumcenter of a k-simplex in barycentric coordinates, together with the
/// squared circumradius. Solves the bordered linear system
///   [0 1^T; 1 D] [-mu; b] = [1; 0],   R^2 = mu/2.
/// A barycentric coordinate is negative iff the circumcenter lies on the far
/// side of the opposite face: this is the intrinsic sign criterion used for
/// face segments and moment arms.
inline Eigen::VectorXd circumcenter_barycentric(const Eigen::MatrixXd& d_sq,
                                                double* circumradius_sq_out = nullptr) {
    const int n = static_cast<int>(d_sq.rows());
    Eigen::MatrixXd m = detail::cm_bordered(d_sq);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(0) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw NonRealizable("circumcenter: degenerate simplex");
    Eigen::VectorXd x = lu.solve(rhs);
    if (circumradius_sq_out) *circumradius_sq_out = -x(0) / 2.0;
    return x.tail(n);
}

inline double circumradius_sq(const Eigen::MatrixXd& d_sq) {
    double r2 = 0.0;
    circumcenter_barycentric(d_sq, &r2);
    if (r2 < 0.0) throw NonRealizable("circumradius: negative squared radius");
    return r2;
}

/// Circumradius of a k-simplex from its squared-distance matrix.
inline double circumradius(int k, const Eigen::MatrixXd& d_sq) {
    if (d_sq.rows() != k + 1) throw Error("circumradius: bad dimensions");
    cm_volume(k, d_sq);  // realizability check
    return std::sqrt(circumradius_sq(d_sq));
}

/// Squared-distance matrix of one tetrahedron of a complex, vertices in the
/// tet's sorted order.
inline Eigen::Matrix4d tet_distance_matrix(const ComplexTopology3& top,
                                           const std::vector<double>& lengths_sq, int tet) {
    Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
    for (int k = 0; k < 6; ++k) {
        auto [a, b] = detail::kTetEdgePairs[k];
        const double l2 = lengths_sq[top.tet_edges[tet][k]];
        d(a, b) = d(b, a) = l2;
    }
    return d;
}

/// Interior dihedral angle of a tetrahedron along the edge between local
/// vertices i and j, in (0, pi). Uses the spherical law of cosines at vertex
/// i for the cosine and V = (2/3) A1 A2 sin(theta) / l for the sine, so the
/// angle is recovered through atan2 and stays accurate near 0 and pi.
inline double dihedral_angle(const Eigen::Matrix4d& d_sq, int i, int j) {
    int others[2], n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != i && v != j) others[n++] = v;
    const int k = others[0], l = others[1];

    auto face = [&](int a, int b, int c) {
        Eigen::Matrix3d f;
        f << 0, d_sq(a, b), d_sq(a, c), d_sq(a, b), 0, d_sq(b, c), d_sq(a, c), d_sq(b, c), 0;
        return f;
    };
    const double a1 = cm_volume(2, face(i, j, k));
    const double a2 = cm_volume(2, face(i, j, l));
    if (a1 == 0.0 || a2 == 0.0) throw DegenerateFace("dihedral_angle: zero-area face");
    const double vol = cm_volume(3, d_sq);
    const double lij = std::sqrt(d_sq(i, j));
    const double sin_theta = 1.5 * vol * lij / (a1 * a2);

    auto vertex_angle = [&](int a, int b, int c) {
        // angle at a between edges ab and ac
        const double num = d_sq(a, b) + d_sq(a, c) - d_sq(b, c);
        const double den = 2.0 * std::sqrt(d_sq(a, b) * d_sq(a, c));
        return std::acos(std::clamp(num / den, -1.0, 1.0));
    };
    const double alpha = vertex_angle(i, j, k);
    const double beta = vertex_angle(i, j, l);
    const double gamma = vertex_angle(i, k, l);
    const double cos_theta =
        (std::cos(gamma) - std::cos(alpha) * std::cos(beta)) / (std::sin(alpha) * std::sin(beta));
    return std::atan2(sin_theta, cos_theta);
}

/// Dihedral angle of a tetrahedron of a complex along one of its edges
/// (edge_index in 0..5, the tet's canonical edge order).
inline double dihedral_angle(const ComplexTopology3& top, const std::vector<double>& lengths_sq,
                             int tet, int edge_index) {
    auto [i, j] = detail::kTetEdgePairs[edge_index];
    return dihedral_angle(tet_distance_matrix(top, lengths_sq, tet), i, j);
}

/// Signed distance from the circumcenter of a tetrahedron to the plane of
/// the face opposite local vertex `opposite`. Magnitude sqrt(R_tet^2 -
/// R_face^2); positive iff the circumcenter lies on the interior side of the
/// face, decided by the sign of the circumcenter's barycentric coordinate at
/// the opposite vertex.
inline double face_segment(const Eigen::Matrix4d& d_sq, int opposite) {
    double r2_tet = 0.0;
    const Eigen::VectorXd bary = circumcenter_barycentric(d_sq, &r2_tet);
    int idx[3], n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != opposite) idx[n++] = v;
    Eigen::Matrix3d f;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) f(a, b) = d_sq(idx[a], idx[b]);
    const double r2_face = circumradius_sq(f);
    const double h_sq = r2_tet - r2_face;
    const double mag = std::sqrt(std::max(h_sq, 0.0));
    return bary(opposite) >= 0.0 ? mag : -mag;
}

/// |V_kk*| = |sigma_k| |sigma*_k| / binom(d,k): the d-volume of the hybrid
/// polytope spanned by a k-simplex and its circumcentric dual.
inline double hybrid_volume_general(int d, int k, double vol_simplex, double vol_dual) {
    if (d < 1 || k < 0 || k > d) throw Error("hybrid_volume_general: bad d, k");
    if (vol_simplex < 0.0 || vol_dual < 0.0) throw Error("hybrid_volume_general: negative volume");
    const double binom =
        detail::factorial(d) / (detail::factorial(k) * detail::factorial(d - k));
    return vol_simplex * vol_dual / binom;
}

/// Circumcentric dual geometry of a 3-complex, all derived from squared edge
/// lengths. Signed quantities are propagated (not clamped) on non-well-
/// centered meshes; flags record the violations.
struct DualGeometry {
    // per triangle id
    std::vector<double> dual_edge_len;                    // lambda
    std::vector<std::vector<double>> face_segments;       // aligned with triangle_tets
    // aligned with edge_triangles[e]
    std::vector<std::vector<double>> moment_arm;          // m_lambda
    std::vector<std::vector<double>> reduced_hybrid_volume;  // V_l-lambda = l*lambda*m/6
    // per edge id
    std::vector<double> dual_polygon_area;  // l* = sum 1/2 lambda m
    std::vector<double> hybrid_volume;      // V_l = l*l*/3
    // well-centeredness
    std::vector<bool> tet_well_centered;
    std::vector<bool> triangle_well_centered;
    bool all_well_centered = true;
};

inline DualGeometry dual_geometry(const ComplexTopology3& top, const MetricAssignment& metric) {
    const std::vector<double>& lsq = metric.lengths_sq;
    if (static_cast<int>(lsq.size()) != top.num_edges())
        throw MissingEdgeLength("dual_geometry: lengths_sq size mismatch");

    DualGeometry dg;
    const int ne = top.num_edges(), nf = top.num_triangles(), nt = top.num_tets();
    dg.dual_edge_len.assign(nf, 0.0);
    dg.face_segments.resize(nf);
    dg.moment_arm.resize(ne);
    dg.reduced_hybrid_volume.resize(ne);
    dg.dual_polygon_area.assign(ne, 0.0);
    dg.hybrid_volume.assign(ne, 0.0);
    dg.tet_well_centered.assign(nt, true);
    dg.triangle_well_centered.assign(nf, true);

    // tet circumcenters and segments to each face
    std::vector<std::array<double, 4>> tet_face_segment(nt);
    for (int ti = 0; ti < nt; ++ti) {
        const Eigen::Matrix4d d = tet_distance_matrix(top, lsq, ti);
        cm_volume(3, d);  // realizability
        double r2_tet = 0.0;
        const Eigen::VectorXd bary = circumcenter_barycentric(d, &r2_tet);
        for (int opp = 0; opp < 4; ++opp) {
            int idx[3], n = 0;
            for (int v = 0; v < 4; ++v)
                if (v != opp) idx[n++] = v;
            Eigen::Matrix3d f;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) f(a, b) = d(idx[a], idx[b]);
            const double h_sq = r2_tet - circumradius_sq(f);
            const double mag = std::sqrt(std::max(h_sq, 0.0));
            tet_face_segment[ti][opp] = bary(opp) >= 0.0 ? mag : -mag;
            if (bary(opp) < 0.0) {
                dg.tet_well_centered[ti] = false;
                dg.all_well_centered = false;
            }
        }
    }

    // lambda per triangle: sum of the signed segments from its cofaces
    for (int fi = 0; fi < nf; ++fi) {
        double lambda = 0.0;
        for (int ti : top.triangle_tets[fi]) {
            int opp = 0;
            while (top.tet_faces[ti][opp] != fi) ++opp;
            const double seg = tet_face_segment[ti][opp];
            dg.face_segments[fi].push_back(seg);
            lambda += seg;
        }
        dg.dual_edge_len[fi] = lambda;
    }

    // triangle circumcenters: moment arms, signed via the in-plane barycentric
    std::vector<std::array<double, 3>> tri_arm(nf);  // arm to edge opposite local vertex k
    for (int fi = 0; fi < nf; ++fi) {
        const Triangle& f = top.triangles[fi];
        Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
        const auto& fe = top.triangle_edges[fi];
        d(1, 2) = d(2, 1) = lsq[fe[0]];
        d(0, 2) = d(2, 0) = lsq[fe[1]];
        d(0, 1) = d(1, 0) = lsq[fe[2]];
        (void)f;
        double r2_tri = 0.0;
        const Eigen::VectorXd bary = circumcenter_barycentric(d, &r2_tri);
        for (int opp = 0; opp < 3; ++opp) {
            const double l2 = lsq[fe[opp]];
            const double m_sq = r2_tri - l2 / 4.0;
            const double mag = std::sqrt(std::max(m_sq, 0.0));
            tri_arm[fi][opp] = bary(opp) >= 0.0 ? mag : -mag;
            if (bary(opp) < 0.0) {
                dg.triangle_well_centered[fi] = false;
                dg.all_well_centered = false;
            }
        }
    }

    for (int ei = 0; ei < ne; ++ei) {
        const double ell = std::sqrt(lsq[ei]);
        double area = 0.0;
        for (int fi : top.edge_triangles[ei]) {
            int opp = 0;
            while (top.triangle_edges[fi][opp] != ei) ++opp;
            const double m = tri_arm[fi][opp];
            const double lambda = dg.dual_edge_len[fi];
            dg.moment_arm[ei].push_back(m);
            dg.reduced_hybrid_volume[ei].push_back(ell * lambda * m / 6.0);
            area += 0.5 * lambda * m;
        }
        dg.dual_polygon_area[ei] = area;
        dg.hybrid_volume[ei] = ell * area / 3.0;
    }
    return dg;
}

/// Dual edge length of a single triangle: the sum of the signed distances
/// from the circumcenters of its cofaces to the triangle plane. This is the
/// hot path for finite-difference assembly.
inline double dual_edge_length(const ComplexTopology3& top, const std::vector<double>& lengths_sq,
                               int triangle) {
    double lambda = 0.0;
    for (int ti : top.triangle_tets[triangle]) {
        int opp = 0;
        while (top.tet_faces[ti][opp] != triangle) ++opp;
        lambda += face_segment(tet_distance_matrix(top, lengths_sq, ti), opp);
    }
    return lambda;
}

// ---------------------------------------------------------------------------
// Metric validation

struct ValidationIssue {
    enum Kind { NonRealizableTet, NonWellCenteredTet, NonWellCenteredTriangle };
    Kind kind;
    int simplex;  // tet or triangle id
    bool fatal;
};

struct ValidationReport {
    bool valid = true;          // no fatal issues
    bool well_centered = true;  // no warnings either
    std::vector<ValidationIssue> issues;
};

/// Checks realizability of every tetrahedron (fatal) and well-centeredness of
/// tetrahedra and triangles (warnings). Never mutates its inputs.
inline ValidationReport validate_metric(const ComplexTopology3& top,
                                        const MetricAssignment& metric) {
    if (static_cast<int>(metric.lengths_sq.size()) != top.num_edges())
        throw MissingEdgeLength("validate_metric: lengths_sq size mismatch");
    for (double l2 : metric.lengths_sq)
        if (!(l2 > 0.0)) throw MissingEdgeLength("validate_metric: non-positive squared length");

    ValidationReport report;
    for (int ti = 0; ti < top.num_tets(); ++ti) {
        const Eigen::Matrix4d d = tet_distance_matrix(top, metric.lengths_sq, ti);
        try {
            if (cm_volume(3, d) <= 0.0) throw NonRealizable("zero volume");
            double r2 = 0.0;
            const Eigen::VectorXd bary = circumcenter_barycentric(d, &r2);
            if (bary.minCoeff() < 0.0) {
                report.well_centered = false;
                report.issues.push_back({ValidationIssue::NonWellCenteredTet, ti, false});
            }
        } catch (const NonRealizable&) {
            report.valid = false;
            report.issues.push_back({ValidationIssue::NonRealizableTet, ti, true});
        }
    }
    for (int fi = 0; fi < top.num_triangles(); ++fi) {
        const auto& fe = top.triangle_edges[fi];
        Eigen::Matrix3d d = Eigen::Matrix3d::Zero();
        d(1, 2) = d(2, 1) = metric.lengths_sq[fe[0]];
        d(0, 2) = d(2, 0) = metric.lengths_sq[fe[1]];
        d(0, 1) = d(1, 0) = metric.lengths_sq[fe[2]];
        try {
            const Eigen::VectorXd bary = circumcenter_barycentric(d);
            if (bary.minCoeff() < 0.0) {
                report.well_centered = false;
                report.issues.push_back({ValidationIssue::NonWellCenteredTriangle, fi, false});
            }
        } catch (const NonRealizable&) {
            report.valid = false;
            report.issues.push_back({ValidationIssue::NonRealizableTet, fi, true});
        }
    }
    return report;
}

/// Total 3-volume of the complex (sum of tetrahedron volumes).
inline double total_volume(const ComplexTopology3& top, const MetricAssignment& metric) {
    double v = 0.0;
    for (int ti = 0; ti < top.num_tets(); ++ti)
        v += cm_volume(3, tet_distance_matrix(top, metric.lengths_sq, ti));
    return v;
}

}  // namespace rrf
