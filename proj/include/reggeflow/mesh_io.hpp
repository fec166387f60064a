#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reggeflow/complex.hpp"
#include "reggeflow/curvature.hpp"
#include "reggeflow/flow.hpp"
#include "reggeflow/geometry.hpp"

namespace rrf {

struct Mesh {
    ComplexTopology3 topology;
    MetricAssignment metric;
};

namespace detail {

inline std::string edge_key(const Edge& e) {
    return std::to_string(e[0]) + "-" + std::to_string(e[1]);
}

/// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double x) {
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace detail

inline Mesh parse_mesh_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("mesh JSON parse error: ") + e.what());
    }
    try {
        if (doc.at("dimension").get<int>() != 3)
            throw IoError("mesh JSON: only dimension 3 is supported");
        std::vector<Tet> tets;
        for (const auto& row : doc.at("tetrahedra")) {
            if (row.size() != 4) throw IoError("mesh JSON: tetrahedron needs 4 vertices");
            tets.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                            row[3].get<int>()});
        }
        Mesh mesh;
        mesh.topology = build_complex(tets);
        const auto& lengths = doc.at("lengths_sq");
        mesh.metric.lengths_sq.assign(mesh.topology.num_edges(), 0.0);
        std::vector<bool> seen(mesh.topology.num_edges(), false);
        for (const auto& [key, value] : lengths.items()) {
            const auto dash = key.find('-');
            if (dash == std::string::npos) throw IoError("mesh JSON: bad edge key " + key);
            const Edge e = {std::stoi(key.substr(0, dash)), std::stoi(key.substr(dash + 1))};
            const auto it = mesh.topology.edge_index.find(e);
            if (it == mesh.topology.edge_index.end())
                throw IoError("mesh JSON: edge " + key + " not in any tetrahedron");
            mesh.metric.lengths_sq[it->second] = value.get<double>();
            seen[it->second] = true;
        }
        for (int ei = 0; ei < mesh.topology.num_edges(); ++ei)
            if (!seen[ei])
                throw MissingEdgeLength("mesh JSON: missing length for edge " +
                                        detail::edge_key(mesh.topology.edges[ei]));
        return mesh;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("mesh JSON structure error: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw IoError("mesh JSON: malformed edge key");
    }
}

inline Mesh read_mesh_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_mesh_json(buffer.str());
}

inline std::string mesh_to_json(const ComplexTopology3& top, const MetricAssignment& metric) {
    std::ostringstream out;
    out << "{\n  \"dimension\": 3,\n  \"tetrahedra\": [";
    for (int ti = 0; ti < top.num_tets(); ++ti) {
        const Tet& t = top.tets[ti];
        out << (ti ? ", " : "") << "[" << t[0] << ", " << t[1] << ", " << t[2] << ", " << t[3]
            << "]";
    }
    out << "],\n  \"lengths_sq\": {";
    for (int ei = 0; ei < top.num_edges(); ++ei) {
        out << (ei ? ", " : "") << "\"" << detail::edge_key(top.edges[ei])
            << "\": " << detail::format_double(metric.lengths_sq[ei]);
    }
    out << "}\n}\n";
    return out.str();
}

inline void write_mesh_json(const std::string& path, const ComplexTopology3& top,
                            const MetricAssignment& metric) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file " + path);
    out << mesh_to_json(top, metric);
}

// ---------------------------------------------------------------------------
// CSV writers (fixed column order, 17 significant digits)

namespace detail {
inline std::string csv_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}
}  // namespace detail

inline void write_curvature_csv(const std::string& dir, const ComplexTopology3& top,
                                const MetricAssignment& metric, const DualGeometry& dual,
                                const CurvatureField& curv) {
    {
        std::ofstream out(dir + "/edges.csv");
        if (!out) throw IoError("cannot open " + dir + "/edges.csv");
        out << "edge_id,v0,v1,length,deficit,dual_area,rc_edge\n";
        for (int ei = 0; ei < top.num_edges(); ++ei)
            out << ei << ',' << top.edges[ei][0] << ',' << top.edges[ei][1] << ','
                << detail::csv_double(std::sqrt(metric.lengths_sq[ei])) << ','
                << detail::csv_double(curv.deficit[ei]) << ','
                << detail::csv_double(dual.dual_polygon_area[ei]) << ','
                << detail::csv_double(curv.rc_edge[ei]) << '\n';
    }
    {
        std::ofstream out(dir + "/duals.csv");
        if (!out) throw IoError("cannot open " + dir + "/duals.csv");
        out << "triangle_id,v0,v1,v2,dual_edge_len,rc_dual\n";
        for (int fi = 0; fi < top.num_triangles(); ++fi)
            out << fi << ',' << top.triangles[fi][0] << ',' << top.triangles[fi][1] << ','
                << top.triangles[fi][2] << ',' << detail::csv_double(dual.dual_edge_len[fi])
                << ',' << detail::csv_double(curv.rc_dual[fi]) << '\n';
    }
    {
        std::ofstream out(dir + "/vertices.csv");
        if (!out) throw IoError("cannot open " + dir + "/vertices.csv");
        out << "vertex_id,scalar_curvature\n";
        for (int v = 0; v < top.vertex_count; ++v)
            out << v << ',' << detail::csv_double(curv.scalar_vertex[v]) << '\n';
    }
}

inline void write_trajectory_csv(const std::string& dir, const ComplexTopology3& top,
                                 const FlowTrajectory& traj) {
    {
        std::ofstream out(dir + "/trajectory.csv");
        if (!out) throw IoError("cannot open " + dir + "/trajectory.csv");
        out << "t,edge_id,length,deficit,rc_edge\n";
        for (const auto& snap : traj.snapshots) {
            const DualGeometry dual = dual_geometry(top, snap.metric);
            const std::vector<double> eps = deficit_angles(top, snap.metric);
            for (int ei = 0; ei < top.num_edges(); ++ei)
                out << detail::csv_double(snap.t) << ',' << ei << ','
                    << detail::csv_double(std::sqrt(snap.metric.lengths_sq[ei])) << ','
                    << detail::csv_double(eps[ei]) << ','
                    << detail::csv_double(2.0 * eps[ei] / dual.dual_polygon_area[ei]) << '\n';
        }
    }
    {
        std::ofstream out(dir + "/summary.csv");
        if (!out) throw IoError("cannot open " + dir + "/summary.csv");
        out << "t,min_len,max_len,action,termination\n";
        for (const auto& snap : traj.snapshots)
            out << detail::csv_double(snap.t) << ',' << detail::csv_double(snap.min_edge) << ','
                << detail::csv_double(snap.max_edge) << ','
                << detail::csv_double(snap.regge_action) << ',' << to_string(traj.termination)
                << '\n';
    }
}

}  // namespace rrf
