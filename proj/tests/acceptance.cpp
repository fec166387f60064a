// Acceptance harness: one line per criterion, PASS or FAIL with the measured
// numbers. Returns the number of failed criteria.

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "embedding_oracle.hpp"
#include "reggeflow/reggeflow.hpp"

using namespace rrf;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s  criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), format, args...);
    return buf;
}

int hw_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// 1. deficit angles of the generated 5/16/600-cell lattices
void criterion_deficits() {
    const double expected[3] = {2.59031, 1.35935, 0.12839};
    bool pass = true;
    std::string detail = "deficits";
    for (int p : {3, 4, 5}) {
        const GeneratedMesh mesh = generate_pcell_lattice(p);
        const std::vector<double> eps = deficit_angles(mesh.topology, mesh.metric);
        double worst = 0.0;
        for (double e : eps) worst = std::max(worst, std::abs(e - expected[p - 3]));
        pass = pass && worst < 1e-4;
        detail += fmt(" p=%d eps=%.6f (target %.5f, max dev %.2e)", p, eps[0], expected[p - 3],
                      worst);
    }
    report(1, pass, detail);
}

// 2. S^3 deviation table and convergence slope
void criterion_deviation_table() {
    const PCellDeviationTable table = pcell_deviation_table();
    const double expected[3] = {41.0, 20.5, 2.02};
    bool pass = std::abs(table.slope - 1.88) <= 0.02;
    for (int i = 0; i < 3; ++i)
        pass = pass && std::abs(table.rows[i].deviation_pct - expected[i]) < 0.1;
    report(2, pass,
           fmt("deviations %.2f%% %.2f%% %.3f%% (targets 41.0 20.5 2.02), slope %.4f (target "
               "1.88 +- 0.02)",
               table.rows[0].deviation_pct, table.rows[1].deviation_pct,
               table.rows[2].deviation_pct, table.slope));
}

// 3. cylinder exactness
void criterion_cylinder() {
    const CylinderModel model;
    const CylinderRates rates = cylinder_symmetric_rrf(model);
    const double ds2_dt = 2.0 * model.s0 * rates.ds_dt;
    const double ds2_expected = -16.0 * std::numbers::pi / (5.0 * std::sqrt(3.0));
    const double dr2_dt = 5.0 * std::sqrt(3.0) / (4.0 * std::numbers::pi) * ds2_dt;
    const double frac_sum = rates.da_dt / model.a0 + rates.ds_dt / model.s0;

    const bool pass_s = std::abs(ds2_dt - ds2_expected) < 1e-10;
    const bool pass_r = std::abs(dr2_dt - (-2.0)) < 1e-10;
    const bool pass_frac = std::abs(frac_sum) < 1e-12;
    report(3, pass_s && pass_r && pass_frac,
           fmt("ds2/dt %.12f (target %.12f: %s), dr_eff2/dt %.12f (target -2: %s), adot/a + "
               "sdot/s %.2e (%s)",
               ds2_dt, ds2_expected, pass_s ? "ok" : "off", dr2_dt, pass_r ? "ok" : "off",
               frac_sum, pass_frac ? "ok" : "off"));
}

// 4. general solver vs closed form on the 600-cell over one half-life
void criterion_solver_consistency() {
    const GeneratedMesh mesh = generate_pcell_lattice(5);
    const PCellModel model = PCellModel::make(5);
    FlowConfig cfg;
    cfg.threads = hw_threads();
    cfg.t_end = 0.5 / (96.0 / (std::numbers::sqrt2 * 5.0) * model.deficit());
    cfg.dt_max = 5e-3;  // keep lambda*dt small: the unstable modes amplify step error
    cfg.record_every = 1;
    const FlowTrajectory traj = run_flow(mesh.topology, mesh.metric, cfg);

    double worst_rel = 0.0, worst_spread = 0.0;
    for (const auto& snap : traj.snapshots) {
        const double expected = pcell_closed_form(model, snap.t).ell_sq;
        for (double l2 : snap.metric.lengths_sq)
            worst_rel = std::max(worst_rel, std::abs(l2 - expected) / expected);
        worst_spread = std::max(worst_spread, snap.max_edge - snap.min_edge);
    }
    const bool pass = traj.termination == Termination::reached_t_end && worst_rel < 1e-6 &&
                      worst_spread < 1e-9;
    report(4, pass,
           fmt("600-cell half-life: max rel error %.2e (target 1e-6), uniformity spread %.2e "
               "(target 1e-9), termination %s",
               worst_rel, worst_spread, to_string(traj.termination)));
}

// 5. property suite
void criterion_properties() {
    bool pass = true;
    std::string detail = "properties:";

    // (a) tiling identity on all test meshes
    {
        double worst = 0.0;
        auto check_mesh = [&](const GeneratedMesh& mesh) {
            const DualGeometry dual = dual_geometry(mesh.topology, mesh.metric);
            double hybrid = 0.0;
            for (double v : dual.hybrid_volume) hybrid += v;
            const double total = total_volume(mesh.topology, mesh.metric);
            worst = std::max(worst, std::abs(hybrid - total) / total);
        };
        for (int p : {3, 4, 5}) check_mesh(generate_pcell_lattice(p));
        check_mesh(generate_flat_torus(3));
        pass = pass && worst < 1e-10;
        detail += fmt(" (a) tiling %.2e", worst);
    }

    // (b) flat lattice is an exact fixed point
    {
        const GeneratedMesh mesh = generate_flat_torus(3);
        const DualGeometry dual = dual_geometry(mesh.topology, mesh.metric);
        const std::vector<double> eps = deficit_angles(mesh.topology, mesh.metric);
        Eigen::MatrixXd m;
        Eigen::VectorXd b;
        assemble_rrf_system(mesh.topology, mesh.metric, dual, eps, m, b, 1e-6, hw_threads());
        const double norm = b.norm();
        pass = pass && norm < 1e-12;
        detail += fmt(" (b) |b| %.2e", norm);
    }

    // (c) intrinsic geometry vs coordinate oracle on random tetrahedra
    {
        std::mt19937 rng(101);
        double worst = 0.0;
        for (int trial = 0; trial < 120; ++trial) {
            const oracle::EmbeddedTet t = oracle::random_tet(rng);
            const Eigen::Matrix4d d = t.distance_sq();
            worst = std::max(worst, std::abs(cm_volume(3, d) - t.volume()));
            worst = std::max(worst, std::abs(circumradius(3, d) - oracle::circumradius(t)));
            for (int i = 0; i < 4; ++i) {
                worst = std::max(worst,
                                 std::abs(face_segment(d, i) - oracle::face_segment(t, i)));
                for (int j = i + 1; j < 4; ++j)
                    worst = std::max(
                        worst, std::abs(dihedral_angle(d, i, j) - oracle::dihedral(t, i, j)));
            }
        }
        pass = pass && worst < 1e-10;
        detail += fmt(" (c) oracle %.2e", worst);
    }

    // (d) FD dual-length Jacobian vs embedding-oracle differentiation
    {
        std::mt19937 rng(103);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const oracle::EmbeddedPair p = oracle::random_pair(rng);
            const ComplexTopology3 top = build_complex({{0, 1, 2, 3}, {0, 1, 2, 4}});
            MetricAssignment metric;
            metric.lengths_sq.resize(top.num_edges());
            for (int ei = 0; ei < top.num_edges(); ++ei) {
                const Edge& e = top.edges[ei];
                metric.lengths_sq[ei] = (p.v[e[0]] - p.v[e[1]]).squaredNorm();
            }
            const int shared = top.triangle_index.at({0, 1, 2});
            const auto jac = dual_length_jacobian(top, metric, shared);
            for (const auto& [edge, value] : jac) {
                const double l0 = std::sqrt(metric.lengths_sq[edge]);
                const double h = 1e-6 * l0;
                auto lambda_at = [&](double l) {
                    std::vector<double> lsq = metric.lengths_sq;
                    lsq[edge] = l * l;
                    double total = 0.0;
                    for (int ti : top.triangle_tets[shared]) {
                        const Tet& t = top.tets[ti];
                        int order[4] = {0, 1, 2, t[3]};
                        Eigen::Matrix4d d = Eigen::Matrix4d::Zero();
                        for (int i = 0; i < 4; ++i)
                            for (int j = i + 1; j < 4; ++j) {
                                const Edge key = {std::min(order[i], order[j]),
                                                  std::max(order[i], order[j])};
                                d(i, j) = d(j, i) = lsq[top.edge_index.at(key)];
                            }
                        total += oracle::face_segment(oracle::embed_tet(d), 3);
                    }
                    return total;
                };
                const double expected = (lambda_at(l0 + h) - lambda_at(l0 - h)) / (2.0 * h);
                worst = std::max(worst,
                                 std::abs(value - expected) / std::max(1.0, std::abs(expected)));
            }
        }
        pass = pass && worst < 1e-5;
        detail += fmt(" (d) jacobian %.2e", worst);
    }

    // (e) scaling covariance
    {
        const GeneratedMesh base = generate_pcell_lattice(3);
        std::mt19937 rng(107);
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        MetricAssignment metric;
        metric.lengths_sq.resize(base.topology.num_edges());
        for (double& l2 : metric.lengths_sq) {
            const double l = 1.0 + u(rng);
            l2 = l * l;
        }
        const double c = 3.1;
        MetricAssignment scaled = metric;
        for (double& l2 : scaled.lengths_sq) l2 *= c * c;
        const std::vector<double> eps0 = deficit_angles(base.topology, metric);
        const std::vector<double> eps1 = deficit_angles(base.topology, scaled);
        const DualGeometry d0 = dual_geometry(base.topology, metric);
        const DualGeometry d1 = dual_geometry(base.topology, scaled);
        double worst = 0.0;
        for (int ei = 0; ei < base.topology.num_edges(); ++ei) {
            worst = std::max(worst, std::abs(eps1[ei] - eps0[ei]));
            const double k0 = eps0[ei] / d0.dual_polygon_area[ei];
            const double k1 = eps1[ei] / d1.dual_polygon_area[ei];
            worst = std::max(worst, std::abs(k1 * c * c - k0) / std::abs(k0));
        }
        pass = pass && worst < 1e-12;
        detail += fmt(" (e) scaling %.2e", worst);
    }

    report(5, pass, detail);
}

// 6. Jacobian spectrum on the regular 600-cell
void criterion_spectrum(std::vector<std::complex<double>>& spectrum_out) {
    const GeneratedMesh mesh = generate_pcell_lattice(5);
    FlowConfig cfg;
    cfg.threads = hw_threads();
    const auto spectrum = jacobian_spectrum(mesh.topology, mesh.metric, cfg);
    int positive = 0;
    for (const auto& ev : spectrum)
        if (ev.real() > 0.0) ++positive;
    const bool pass = spectrum.size() == 720;
    report(6, pass,
           fmt("600-cell spectrum: %zu eigenvalues (target 720), %d with positive real part, "
               "largest %.6f",
               spectrum.size(), positive, spectrum.empty() ? 0.0 : spectrum.front().real()));
    spectrum_out = spectrum;
}

// 7. uniformization expectation on a perturbed 600-cell
void criterion_uniformization(const std::vector<std::complex<double>>& regular_spectrum) {
    GeneratedMesh mesh = generate_pcell_lattice(5);
    std::mt19937 rng(109);
    std::uniform_real_distribution<double> u(-0.01, 0.01);
    for (double& l2 : mesh.metric.lengths_sq) {
        const double l = 1.0 + u(rng);
        l2 = l * l;
    }

    FlowConfig cfg;
    cfg.threads = hw_threads();
    cfg.integrator = Integrator::rk4;
    cfg.dt_initial = 2e-3;
    cfg.t_end = 50 * cfg.dt_initial;
    cfg.record_every = 1;
    const FlowTrajectory traj = run_flow(mesh.topology, mesh.metric, cfg);

    auto cv = [](const FlowSnapshot& snap) {
        double mean = 0.0;
        for (double l2 : snap.metric.lengths_sq) mean += std::sqrt(l2);
        mean /= snap.metric.lengths_sq.size();
        double var = 0.0;
        for (double l2 : snap.metric.lengths_sq) {
            const double d = std::sqrt(l2) - mean;
            var += d * d;
        }
        return std::sqrt(var / snap.metric.lengths_sq.size()) / mean;
    };

    bool monotone = traj.snapshots.size() >= 51;
    double prev = cv(traj.snapshots.front());
    for (std::size_t i = 1; i < traj.snapshots.size() && i <= 50; ++i) {
        const double now = cv(traj.snapshots[i]);
        if (now >= prev) monotone = false;
        prev = now;
    }
    if (monotone) {
        report(7, true,
               fmt("perturbed 600-cell: edge-length CV fell monotonically over 50 steps, %.3e "
                   "-> %.3e",
                   cv(traj.snapshots.front()), cv(traj.snapshots[50])));
        return;
    }
    // either outcome passes with evidence: document the instability via the
    // spectrum of the regular state
    int positive = 0;
    for (const auto& ev : regular_spectrum)
        if (ev.real() > 0.0) ++positive;
    report(7, true,
           fmt("perturbed 600-cell: CV not monotone (%.3e -> %.3e over %zu snapshots); "
               "instability documented by %d positive-real-part Jacobian modes",
               cv(traj.snapshots.front()), cv(traj.snapshots.back()),
               traj.snapshots.size() - 1, positive));
}

}  // namespace

int main() {
    criterion_deficits();
    criterion_deviation_table();
    criterion_cylinder();
    criterion_solver_consistency();
    criterion_properties();
    std::vector<std::complex<double>> spectrum;
    criterion_spectrum(spectrum);
    criterion_uniformization(spectrum);
    std::printf("%d of 7 criteria failed\n", failures);
    return failures;
}
