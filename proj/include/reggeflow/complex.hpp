#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "reggeflow/errors.hpp"

namespace rrf {

using Edge = std::array<int, 2>;      // sorted vertex ids
using Triangle = std::array<int, 3>;  // sorted vertex ids
using Tet = std::array<int, 4>;       // sorted vertex ids

/// Combinatorial 3-complex. Immutable after build_complex; all geometry is
/// carried separately in MetricAssignment. Simplices are stored sorted
/// lexicographically by vertex tuple, so ids are stable and reproducible.
struct ComplexTopology3 {
    int vertex_count = 0;
    std::vector<Tet> tets;
    std::vector<Edge> edges;
    std::vector<Triangle> triangles;

    // incidence, all in canonical (ascending id) order
    std::vector<std::vector<int>> edge_triangles;  // edge id -> triangle ids
    std::vector<std::vector<int>> edge_tets;       // edge id -> tet ids
    std::vector<std::vector<int>> triangle_tets;   // triangle id -> tet ids (1 or 2)
    std::vector<std::vector<int>> vertex_edges;    // vertex id -> edge ids

    // per-simplex sub-simplex ids, local ordering fixed by vertex sort:
    // tet edges in order (01,02,03,12,13,23); tet faces opposite local vertex 0..3
    std::vector<std::array<int, 6>> tet_edges;
    std::vector<std::array<int, 4>> tet_faces;
    std::vector<std::array<int, 3>> triangle_edges;  // edges opposite local vertex 0..2

    /// true iff every triangle has exactly two cofaces (closed complex)
    bool compact = false;

    std::map<Edge, int> edge_index;
    std::map<Triangle, int> triangle_index;

    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_tets() const { return static_cast<int>(tets.size()); }
};

/// The simplicial metric: squared lengths, one per edge of the topology,
/// plus the flow parameter t. Squared lengths are the state variables.
struct MetricAssignment {
    std::vector<double> lengths_sq;
    double time = 0.0;
};

namespace detail {
inline constexpr std::array<std::array<int, 2>, 6> kTetEdgePairs = {
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
}

inline ComplexTopology3 build_complex(const std::vector<Tet>& tetrahedra) {
    ComplexTopology3 top;

    std::vector<Tet> sorted_tets;
    sorted_tets.reserve(tetrahedra.size());
    for (Tet t : tetrahedra) {
        std::sort(t.begin(), t.end());
        if (t[0] < 0) throw DegenerateSimplex("negative vertex id in tetrahedron");
        for (int i = 0; i < 3; ++i)
            if (t[i] == t[i + 1]) throw DegenerateSimplex("tetrahedron with repeated vertex");
        sorted_tets.push_back(t);
    }
    std::sort(sorted_tets.begin(), sorted_tets.end());
    if (std::adjacent_find(sorted_tets.begin(), sorted_tets.end()) != sorted_tets.end())
        throw DuplicateTetrahedron("duplicate tetrahedron in input");
    top.tets = std::move(sorted_tets);

    for (const Tet& t : top.tets) top.vertex_count = std::max(top.vertex_count, t[3] + 1);

    std::map<Edge, int>& eix = top.edge_index;
    std::map<Triangle, int>& fix = top.triangle_index;
    for (const Tet& t : top.tets) {
        for (auto [a, b] : detail::kTetEdgePairs) eix[{t[a], t[b]}] = 0;
        for (int skip = 0; skip < 4; ++skip) {
            Triangle f;
            for (int i = 0, j = 0; i < 4; ++i)
                if (i != skip) f[j++] = t[i];
            fix[f] = 0;
        }
    }
    for (auto& [e, id] : eix) {
        id = top.num_edges();
        top.edges.push_back(e);
    }
    for (auto& [f, id] : fix) {
        id = top.num_triangles();
        top.triangles.push_back(f);
    }

    top.edge_triangles.resize(top.edges.size());
    top.edge_tets.resize(top.edges.size());
    top.triangle_tets.resize(top.triangles.size());
    top.vertex_edges.resize(top.vertex_count);
    top.tet_edges.resize(top.tets.size());
    top.tet_faces.resize(top.tets.size());
    top.triangle_edges.resize(top.triangles.size());

    for (int ti = 0; ti < top.num_tets(); ++ti) {
        const Tet& t = top.tets[ti];
        for (int k = 0; k < 6; ++k) {
            auto [a, b] = detail::kTetEdgePairs[k];
            int e = eix.at({t[a], t[b]});
            top.tet_edges[ti][k] = e;
            top.edge_tets[e].push_back(ti);
        }
        for (int skip = 0; skip < 4; ++skip) {
            Triangle f;
            for (int i = 0, j = 0; i < 4; ++i)
                if (i != skip) f[j++] = t[i];
            int fi = fix.at(f);
            top.tet_faces[ti][skip] = fi;
            top.triangle_tets[fi].push_back(ti);
        }
    }
    for (int fi = 0; fi < top.num_triangles(); ++fi) {
        const Triangle& f = top.triangles[fi];
        top.triangle_edges[fi] = {eix.at({f[1], f[2]}), eix.at({f[0], f[2]}),
                                  eix.at({f[0], f[1]})};
        for (int k = 0; k < 3; ++k) {
            int e = top.triangle_edges[fi][k];
            auto& lst = top.edge_triangles[e];
            if (lst.empty() || lst.back() != fi) lst.push_back(fi);
        }
    }
    // edge_triangles was filled in triangle id order already; dedupe is a no-op
    for (int ei = 0; ei < top.num_edges(); ++ei) {
        top.vertex_edges[top.edges[ei][0]].push_back(ei);
        top.vertex_edges[top.edges[ei][1]].push_back(ei);
    }

    top.compact = true;
    for (const auto& cofaces : top.triangle_tets) {
        std::size_t n = cofaces.size();
        if (n != 2) top.compact = false;
        if (n < 1 || n > 2) throw Error("triangle shared by more than two tetrahedra");
    }
    return top;
}

inline int euler_characteristic(const ComplexTopology3& top) {
    return top.vertex_count - top.num_edges() + top.num_triangles() - top.num_tets();
}

}  // namespace rrf
