#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "reggeflow/mesh_io.hpp"
#include "reggeflow/models.hpp"

using namespace rrf;

namespace {

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "reggeflow_io_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("mesh JSON round trip is exact") {
    GeneratedMesh mesh = generate_pcell_lattice(3);
    // non-trivial floats so the round trip actually exercises formatting
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(0.9, 1.1);
    for (double& l2 : mesh.metric.lengths_sq) l2 = u(rng);

    const std::string text = mesh_to_json(mesh.topology, mesh.metric);
    const Mesh parsed = parse_mesh_json(text);
    CHECK(parsed.topology.tets == mesh.topology.tets);
    CHECK(parsed.topology.edges == mesh.topology.edges);
    REQUIRE(parsed.metric.lengths_sq.size() == mesh.metric.lengths_sq.size());
    for (std::size_t i = 0; i < mesh.metric.lengths_sq.size(); ++i)
        CHECK(parsed.metric.lengths_sq[i] == mesh.metric.lengths_sq[i]);  // bitwise
}

TEST_CASE("mesh JSON file round trip") {
    const GeneratedMesh mesh = generate_pcell_lattice(4);
    const auto path = temp_dir() / "mesh16.json";
    write_mesh_json(path.string(), mesh.topology, mesh.metric);
    const Mesh parsed = read_mesh_json(path.string());
    CHECK(parsed.topology.num_edges() == 24);
    CHECK(parsed.metric.lengths_sq == mesh.metric.lengths_sq);
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS(parse_mesh_json("{not json"), IoError);
    CHECK_THROWS_AS(parse_mesh_json(R"({"dimension": 2, "tetrahedra": [], "lengths_sq": {}})"),
                    IoError);
    CHECK_THROWS_AS(
        parse_mesh_json(
            R"({"dimension": 3, "tetrahedra": [[0,1,2,3]], "lengths_sq": {"0-1": 1.0}})"),
        MissingEdgeLength);
    CHECK_THROWS_AS(
        parse_mesh_json(
            R"({"dimension": 3, "tetrahedra": [[0,1,2,3]], "lengths_sq": {"0-9": 1.0}})"),
        IoError);
    CHECK_THROWS_AS(read_mesh_json("/nonexistent/mesh.json"), IoError);
}

TEST_CASE("curvature and trajectory CSV writers") {
    const GeneratedMesh mesh = generate_pcell_lattice(3);
    const DualGeometry dual = dual_geometry(mesh.topology, mesh.metric);
    const CurvatureField curv = curvature_field(mesh.topology, mesh.metric, dual);
    const auto dir = temp_dir();
    write_curvature_csv(dir.string(), mesh.topology, mesh.metric, dual, curv);

    auto line_count = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        REQUIRE(in.good());
        int n = 0;
        std::string line;
        while (std::getline(in, line)) ++n;
        return n;
    };
    CHECK(line_count(dir / "edges.csv") == 1 + mesh.topology.num_edges());
    CHECK(line_count(dir / "duals.csv") == 1 + mesh.topology.num_triangles());
    CHECK(line_count(dir / "vertices.csv") == 1 + mesh.topology.vertex_count);

    FlowConfig cfg;
    cfg.t_end = 0.002;
    const FlowTrajectory traj = run_flow(mesh.topology, mesh.metric, cfg);
    write_trajectory_csv(dir.string(), mesh.topology, traj);
    CHECK(line_count(dir / "summary.csv") == 1 + static_cast<int>(traj.snapshots.size()));
    CHECK(line_count(dir / "trajectory.csv") ==
          1 + static_cast<int>(traj.snapshots.size()) * mesh.topology.num_edges());
}
