#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "reggeflow/curvature.hpp"
#include "reggeflow/models.hpp"

using namespace rrf;
using Catch::Approx;

TEST_CASE("p-cell closed form") {
    const PCellModel m = PCellModel::make(5);
    CHECK(pcell_closed_form(m, 0.0).ell_sq == Approx(1.0).epsilon(1e-15));
    CHECK(m.deficit() == Approx(0.12839).margin(1e-5));
    CHECK(PCellModel::make(3).deficit() == Approx(2.59031).margin(1e-5));
    CHECK(PCellModel::make(4).deficit() == Approx(1.35935).margin(1e-5));

    // volume matching 2 pi^2 a^3 = N_p sqrt2/12 l^3 at any t
    const PCellState st = pcell_closed_form(m, 0.1);
    const double lhs = 2.0 * std::pow(std::numbers::pi, 2) * std::pow(st.a_eff_sq, 1.5);
    const double rhs = m.n_p * std::numbers::sqrt2 / 12.0 * std::pow(st.ell_sq, 1.5);
    CHECK(lhs == Approx(rhs).epsilon(1e-12));

    CHECK_THROWS_AS(pcell_closed_form(m, 1e3), CollapseExceeded);
    CHECK_THROWS_AS(PCellModel::make(7), Error);
}

TEST_CASE("S^3 deviation table") {
    const PCellDeviationTable table = pcell_deviation_table();
    CHECK(table.rows[0].deviation_pct == Approx(41.0).margin(0.1));
    CHECK(table.rows[1].deviation_pct == Approx(20.5).margin(0.1));
    CHECK(table.rows[2].deviation_pct == Approx(2.02).margin(0.1));
    CHECK(table.slope == Approx(1.88).margin(0.02));
    // effective collapse rate of a_eff^2 for the 600-cell: -2 (1 + 2.02%)
    const double factor = table.rows[2].factor;
    CHECK(factor == Approx(2.0 * 1.0202).margin(2e-4));
}

TEST_CASE("cylinder closed form") {
    const CylinderModel model{1.0, 0.7, 3};
    const CylinderState st0 = cylinder_closed_form(model, 0.0);
    CHECK(st0.s_sq == Approx(1.0).epsilon(1e-15));
    CHECK(st0.a == Approx(0.7).epsilon(1e-15));
    CHECK(st0.r_eff_sq == Approx(5.0 * std::sqrt(3.0) / (4.0 * std::numbers::pi)).epsilon(1e-14));

    // product a*s conserved; r_eff^2 decays linearly
    double prev_r = st0.r_eff_sq;
    for (double t : {0.01, 0.05, 0.09}) {
        const CylinderState st = cylinder_closed_form(model, t);
        CHECK(st.a * std::sqrt(st.s_sq) == Approx(0.7).epsilon(1e-12));
        const double dr2 = (st.r_eff_sq - prev_r);
        prev_r = st.r_eff_sq;
        (void)dr2;
        CHECK(st.s_sq ==
              Approx(1.0 - 16.0 * std::numbers::pi / (5.0 * std::sqrt(3.0)) * t).epsilon(1e-14));
    }
    CHECK_THROWS_AS(cylinder_closed_form(model, 1.0), CollapseExceeded);
}

TEST_CASE("cylinder symmetric reduction") {
    const CylinderModel model;
    const CylinderRates rates = cylinder_symmetric_rrf(model);
    CHECK(rates.eps_a == Approx(std::numbers::pi / 3.0).epsilon(1e-14));
    CHECK(rates.eps_s == Approx(0.0).margin(1e-14));
    CHECK(rates.lhs_a_coeff == Approx(5.0 * std::sqrt(3.0) / 6.0).epsilon(1e-14));

    const double ds2_dt = 2.0 * model.s0 * rates.ds_dt;
    CHECK(ds2_dt == Approx(-16.0 * std::numbers::pi / (5.0 * std::sqrt(3.0))).epsilon(1e-13));
    CHECK(ds2_dt == Approx(-5.804).margin(1e-3));
    CHECK(rates.da_dt / model.a0 + rates.ds_dt / model.s0 == Approx(0.0).margin(1e-12));

    // consistency with the closed form at a later time
    const double t = 0.05;
    const CylinderState st = cylinder_closed_form(model, t);
    const CylinderRates later = cylinder_symmetric_rrf(model, t);
    CHECK(2.0 * std::sqrt(st.s_sq) * later.ds_dt ==
          Approx(-16.0 * std::numbers::pi / (5.0 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(later.da_dt / st.a + later.ds_dt / std::sqrt(st.s_sq) == Approx(0.0).margin(1e-12));
}

TEST_CASE("p-cell lattice generators") {
    const GeneratedMesh five = generate_pcell_lattice(3);
    CHECK(five.topology.num_edges() == 10);
    CHECK(five.topology.num_tets() == 5);
    for (const auto& cof : five.topology.edge_tets) CHECK(cof.size() == 3);

    const GeneratedMesh sixteen = generate_pcell_lattice(4);
    CHECK(sixteen.topology.num_edges() == 24);
    CHECK(sixteen.topology.num_tets() == 16);
    for (const auto& cof : sixteen.topology.edge_tets) CHECK(cof.size() == 4);
    const std::vector<double> eps = deficit_angles(sixteen.topology, sixteen.metric);
    for (double e : eps) CHECK(e == Approx(1.35935).margin(1e-5));

    const GeneratedMesh six_hundred = generate_pcell_lattice(5);
    CHECK(six_hundred.topology.num_edges() == 720);
    CHECK(six_hundred.topology.num_tets() == 600);
    CHECK(six_hundred.topology.vertex_count == 120);
    for (const auto& cof : six_hundred.topology.edge_tets) CHECK(cof.size() == 5);
}

TEST_CASE("cylinder lattice generator") {
    const PrismComplex px = generate_cylinder_lattice(4, 1.0, 0.8);
    CHECK(px.vertices_per_ring() == 12);
    CHECK(px.s_edges_per_ring() == 30);
    CHECK(px.a_edges_per_ring() == 12);
    CHECK(px.prisms_per_ring() == 20);
    CHECK(px.s_edges.size() == 4u * 30u);
    CHECK(px.a_edges.size() == 4u * 12u);
    CHECK(px.prisms.size() == 4u * 20u);

    const PrismDeficits eps = prism_deficits(px);
    CHECK(eps.eps_a == Approx(std::numbers::pi / 3.0).epsilon(1e-14));
    CHECK(eps.eps_s == Approx(0.0).margin(1e-14));

    CHECK_THROWS_AS(generate_cylinder_lattice(2, 1.0, 1.0), Error);
}

TEST_CASE("flat torus generator") {
    const GeneratedMesh mesh = generate_flat_torus(3);
    CHECK(mesh.topology.compact);
    CHECK(mesh.topology.vertex_count == 54);
    CHECK(mesh.topology.num_tets() == 324);
    const DualGeometry dual = dual_geometry(mesh.topology, mesh.metric);
    CHECK(dual.all_well_centered);
    double max_eps = 0.0;
    for (double e : deficit_angles(mesh.topology, mesh.metric))
        max_eps = std::max(max_eps, std::abs(e));
    CHECK(max_eps < 1e-10);
}
