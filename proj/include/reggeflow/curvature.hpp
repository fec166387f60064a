#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "reggeflow/geometry.hpp"

namespace rrf {

/// Deficit angles: eps_l = 2*pi minus the sum of the dihedral angles at l
/// over all incident tetrahedra. Requires a compact complex so the angle sum
/// is the full cone angle.
inline std::vector<double> deficit_angles(const ComplexTopology3& top,
                                          const MetricAssignment& metric) {
    if (!top.compact) throw Error("deficit_angles: complex is not compact");
    std::vector<double> eps(top.num_edges(), 0.0);
    for (int ei = 0; ei < top.num_edges(); ++ei) {
        double angle_sum = 0.0;
        for (int ti : top.edge_tets[ei]) {
            int k = 0;
            while (top.tet_edges[ti][k] != ei) ++k;
            angle_sum += dihedral_angle(top, metric.lengths_sq, ti, k);
        }
        eps[ei] = 2.0 * std::numbers::pi - angle_sum;
    }
    return eps;
}

/// Hinge sectional curvature K = eps / h*.
inline double sectional_curvature(double deficit, double dual_area) {
    if (dual_area == 0.0) throw ZeroDualArea("sectional_curvature: zero dual area");
    return deficit / dual_area;
}

struct EinsteinCurvatures {
    double rm, rc, r;
};

/// Einstein-space curvatures supported on a hinge hybrid cell:
/// Rm = K, Rc = (d-1) K, R = d(d-1) K.
inline EinsteinCurvatures einstein_space_curvatures(int d, double k) {
    if (d < 2) throw Error("einstein_space_curvatures: d must be >= 2");
    return {k, (d - 1) * k, d * (d - 1) * k};
}

/// Weighted average sum(f_i w_i) / sum(w_i): the trace operation that maps
/// hinge curvatures onto edges, dual edges and vertices.
inline double weighted_average(const std::vector<double>& values,
                               const std::vector<double>& weights) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        num += values[i] * weights[i];
        den += weights[i];
    }
    if (den == 0.0) throw ZeroWeightSum("weighted_average: zero weight sum");
    return num / den;
}

/// Ricci tensor on the simplicial edges: the general hinge-weighted average
/// <Rc_h>_l. In d=3 the hinges are the edges themselves, so the average has a
/// single term and reduces to 2 eps_l / l*; the reduction is exercised as an
/// identity in the tests, not assumed here.
inline std::vector<double> rc_edge(const ComplexTopology3& top, const MetricAssignment& metric,
                                   const DualGeometry& dual) {
    const std::vector<double> eps = deficit_angles(top, metric);
    std::vector<double> rc(top.num_edges(), 0.0);
    for (int ei = 0; ei < top.num_edges(); ++ei) {
        // hinges sharing edge ei: in d=3 only the hinge ei itself
        std::vector<double> rc_h, w;
        const double area = dual.dual_polygon_area[ei];
        if (area == 0.0) throw ZeroDualArea("rc_edge: zero dual polygon area");
        rc_h.push_back(2.0 * eps[ei] / area);
        w.push_back(std::sqrt(metric.lengths_sq[ei]));  // hinge volume h_l = l
        rc[ei] = weighted_average(rc_h, w);
    }
    return rc;
}

/// Closed-form d=3 shortcut Rc_l = 2 eps_l / l*, kept as the independent
/// second route for the identity test against rc_edge.
inline std::vector<double> rc_edge_closed_form(const ComplexTopology3& top,
                                               const MetricAssignment& metric,
                                               const DualGeometry& dual) {
    const std::vector<double> eps = deficit_angles(top, metric);
    std::vector<double> rc(top.num_edges(), 0.0);
    for (int ei = 0; ei < top.num_edges(); ++ei) {
        if (dual.dual_polygon_area[ei] == 0.0)
            throw ZeroDualArea("rc_edge_closed_form: zero dual polygon area");
        rc[ei] = 2.0 * eps[ei] / dual.dual_polygon_area[ei];
    }
    return rc;
}

/// Ricci tensor on the dual edges. Each dual edge lambda is dual to a
/// triangle; its incident hinges are the triangle's three edges, weighted by
/// the reduced dual areas h*_lambda = (1/2) lambda m.
inline std::vector<double> rc_dual_edge(const ComplexTopology3& top,
                                        const MetricAssignment& metric,
                                        const DualGeometry& dual) {
    const std::vector<double> eps = deficit_angles(top, metric);
    std::vector<double> rc(top.num_triangles(), 0.0);
    for (int fi = 0; fi < top.num_triangles(); ++fi) {
        std::vector<double> rc_h, w;
        const double lambda = dual.dual_edge_len[fi];
        for (int k = 0; k < 3; ++k) {
            const int ei = top.triangle_edges[fi][k];
            const double area = dual.dual_polygon_area[ei];
            if (area == 0.0) throw ZeroDualArea("rc_dual_edge: zero dual polygon area");
            rc_h.push_back(2.0 * eps[ei] / area);
            // reduced dual area of hinge ei along lambda
            int pos = 0;
            while (top.edge_triangles[ei][pos] != fi) ++pos;
            w.push_back(0.5 * lambda * dual.moment_arm[ei][pos]);
        }
        rc[fi] = weighted_average(rc_h, w);
    }
    return rc;
}

/// Scalar curvature at the vertices: R_v = d(d-1) <eps>_v / <h*>_v with the
/// half-edge weights h_v = l/2 (the edge circumcenter splits the edge in
/// equal halves).
inline std::vector<double> scalar_vertex(const ComplexTopology3& top,
                                         const MetricAssignment& metric,
                                         const DualGeometry& dual) {
    const std::vector<double> eps = deficit_angles(top, metric);
    std::vector<double> r(top.vertex_count, 0.0);
    for (int v = 0; v < top.vertex_count; ++v) {
        double eps_num = 0.0, area_num = 0.0, den = 0.0;
        for (int ei : top.vertex_edges[v]) {
            const double hv = 0.5 * std::sqrt(metric.lengths_sq[ei]);
            eps_num += eps[ei] * hv;
            area_num += dual.dual_polygon_area[ei] * hv;
            den += hv;
        }
        if (den == 0.0 || area_num == 0.0) throw ZeroWeightSum("scalar_vertex: zero weight sum");
        r[v] = 6.0 * (eps_num / den) / (area_num / den);
    }
    return r;
}

/// Regge-Hilbert action (1/8pi) sum_l eps_l * l.
inline double regge_action(const ComplexTopology3& top, const MetricAssignment& metric) {
    const std::vector<double> eps = deficit_angles(top, metric);
    double action = 0.0;
    for (int ei = 0; ei < top.num_edges(); ++ei)
        action += eps[ei] * std::sqrt(metric.lengths_sq[ei]);
    return action / (8.0 * std::numbers::pi);
}

/// All curvature fields of a metric in one pass.
struct CurvatureField {
    std::vector<double> deficit;        // per edge
    std::vector<double> sectional;      // per edge, K = eps/l*
    std::vector<double> rc_edge;        // per edge
    std::vector<double> rc_dual;        // per triangle
    std::vector<double> scalar_vertex;  // per vertex
    double regge_action = 0.0;
};

inline CurvatureField curvature_field(const ComplexTopology3& top, const MetricAssignment& metric,
                                      const DualGeometry& dual) {
    CurvatureField cf;
    cf.deficit = deficit_angles(top, metric);
    cf.sectional.resize(top.num_edges());
    for (int ei = 0; ei < top.num_edges(); ++ei)
        cf.sectional[ei] = sectional_curvature(cf.deficit[ei], dual.dual_polygon_area[ei]);
    cf.rc_edge = rc_edge(top, metric, dual);
    cf.rc_dual = rc_dual_edge(top, metric, dual);
    cf.scalar_vertex = rrf::scalar_vertex(top, metric, dual);
    cf.regge_action = rrf::regge_action(top, metric);
    return cf;
}

}  // namespace rrf
