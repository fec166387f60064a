#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "reggeflow/complex.hpp"
#include "reggeflow/curvature.hpp"
#include "reggeflow/geometry.hpp"

namespace rrf {

enum class Integrator { explicit_euler, rk4, rk45_adaptive };

/// How the dual-length partials in the mass matrix are computed. The
/// complex-step rule is exact to rounding, which matters because the flow's
/// unstable modes amplify any assembly noise exponentially; central finite
/// differences are kept as the cross-checkable reference path.
enum class DerivativeMode { complex_step, central_fd };

struct FlowConfig {
    double dt_initial = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.1;
    Integrator integrator = Integrator::rk45_adaptive;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double t_end = 1.0;
    double stop_min_edge_fraction = 1e-3;  // halt when any l < fraction * initial l
    bool stop_on_nonrealizable = true;
    int record_every = 1;
    DerivativeMode derivative = DerivativeMode::complex_step;
    double fd_eta = 1e-6;          // relative step for the central_fd partials
    double cond_threshold = 1e12;  // mass-matrix condition estimate limit
    int threads = 0;               // 0: use REGGE_FLOW_THREADS or 1
};

enum class Termination { reached_t_end, edge_collapse, nonrealizable, matrix_singular };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::reached_t_end: return "reached_t_end";
        case Termination::edge_collapse: return "edge_collapse";
        case Termination::nonrealizable: return "nonrealizable";
        case Termination::matrix_singular: return "matrix_singular";
    }
    return "?";
}

struct FlowSnapshot {
    double t = 0.0;
    MetricAssignment metric;
    double min_edge = 0.0, max_edge = 0.0;
    double min_deficit = 0.0;
    double regge_action = 0.0;
    bool well_centered = true;
};

struct FlowTrajectory {
    std::vector<FlowSnapshot> snapshots;
    Termination termination = Termination::reached_t_end;
};

namespace detail {

inline int resolve_threads(int requested) {
    if (requested < 0) return 1;  // explicit serial (nested parallel sections)
    if (requested > 0) return requested;
    if (const char* env = std::getenv("REGGE_FLOW_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

/// Runs fn(i) for i in [0, n) over the given number of threads, blocks of
/// contiguous indices so every write lands in its own slot.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Signed circumcenter-to-face segment of a tetrahedron, evaluated in complex
/// arithmetic so an imaginary length perturbation carries the exact
/// derivative. Mirrors face_segment: the sign comes from the (real part of
/// the) barycentric coordinate of the opposite vertex, and a clamped
/// (non-positive) squared segment contributes zero with zero derivative.
inline std::complex<double> face_segment_complex(
    const Eigen::Matrix<std::complex<double>, 4, 4>& d_sq, int opposite) {
    using cd = std::complex<double>;
    Eigen::Matrix<cd, 5, 5> m = Eigen::Matrix<cd, 5, 5>::Ones();
    m(0, 0) = cd(0.0);
    m.block<4, 4>(1, 1) = d_sq;
    Eigen::Matrix<cd, 5, 1> rhs = Eigen::Matrix<cd, 5, 1>::Zero();
    rhs(0) = cd(1.0);
    const Eigen::Matrix<cd, 5, 1> x = m.partialPivLu().solve(rhs);
    const cd r2_tet = -x(0) / 2.0;

    int idx[3], n = 0;
    for (int v = 0; v < 4; ++v)
        if (v != opposite) idx[n++] = v;
    Eigen::Matrix<cd, 4, 4> mf = Eigen::Matrix<cd, 4, 4>::Ones();
    mf(0, 0) = cd(0.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) mf(1 + a, 1 + b) = d_sq(idx[a], idx[b]);
    Eigen::Matrix<cd, 4, 1> rhsf = Eigen::Matrix<cd, 4, 1>::Zero();
    rhsf(0) = cd(1.0);
    const Eigen::Matrix<cd, 4, 1> xf = mf.partialPivLu().solve(rhsf);
    const cd r2_face = -xf(0) / 2.0;

    const cd h_sq = r2_tet - r2_face;
    if (!(h_sq.real() > 0.0)) return cd(0.0);
    const cd mag = std::sqrt(h_sq);
    return x(1 + opposite).real() >= 0.0 ? mag : -mag;
}

}  // namespace detail

/// Partials of one dual edge length by the complex-step rule: each support
/// edge gets an imaginary perturbation l -> l + ih and the derivative is
/// Im(lambda)/h, exact to rounding because no differences are subtracted.
inline std::map<int, double> dual_length_jacobian_complex(const ComplexTopology3& top,
                                                          const MetricAssignment& metric,
                                                          int triangle) {
    using cd = std::complex<double>;
    std::map<int, double> partials;
    for (int ti : top.triangle_tets[triangle]) {
        int opp = 0;
        while (top.tet_faces[ti][opp] != triangle) ++opp;
        Eigen::Matrix<cd, 4, 4> d = Eigen::Matrix<cd, 4, 4>::Zero();
        for (int k = 0; k < 6; ++k) {
            auto [a, b] = detail::kTetEdgePairs[k];
            d(a, b) = d(b, a) = cd(metric.lengths_sq[top.tet_edges[ti][k]]);
        }
        for (int k = 0; k < 6; ++k) {
            const int e = top.tet_edges[ti][k];
            auto [a, b] = detail::kTetEdgePairs[k];
            const double l0 = std::sqrt(metric.lengths_sq[e]);
            const double h = 1e-100 * l0;
            const cd saved = d(a, b);
            const cd lp = cd(l0, h);
            d(a, b) = d(b, a) = lp * lp;
            partials[e] += detail::face_segment_complex(d, opp).imag() / h;
            d(a, b) = d(b, a) = saved;
        }
    }
    return partials;
}

/// Partials of one dual edge length with respect to the lengths of the 9
/// distinct edges of the (up to) two tetrahedra sharing the triangle, by
/// central differences with relative step eta; the step is shrunk tenfold up
/// to three times if a perturbed state fails realizability.
inline std::map<int, double> dual_length_jacobian(const ComplexTopology3& top,
                                                  const MetricAssignment& metric, int triangle,
                                                  double eta = 1e-6) {
    std::vector<int> support;
    for (int ti : top.triangle_tets[triangle])
        for (int e : top.tet_edges[ti]) support.push_back(e);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    std::map<int, double> partials;
    std::vector<double> lsq = metric.lengths_sq;
    for (int e : support) {
        const double l0 = std::sqrt(metric.lengths_sq[e]);
        double h = eta * l0;
        for (int attempt = 0;; ++attempt) {
            try {
                lsq[e] = (l0 + h) * (l0 + h);
                const double plus = dual_edge_length(top, lsq, triangle);
                lsq[e] = (l0 - h) * (l0 - h);
                const double minus = dual_edge_length(top, lsq, triangle);
                partials[e] = (plus - minus) / (2.0 * h);
                break;
            } catch (const NonRealizable&) {
                if (attempt == 3) {
                    lsq[e] = metric.lengths_sq[e];
                    throw;
                }
                h /= 10.0;
            }
        }
        lsq[e] = metric.lengths_sq[e];
    }
    return partials;
}

/// The RRF linear system M ldot = b: one equation per edge l,
///   sum over dual edges lambda of l's dual polygon of
///     m_lambda * sum_i (dlambda/dl_i) ldot_i  =  -4 eps_l.
inline void assemble_rrf_system(const ComplexTopology3& top, const MetricAssignment& metric,
                                const DualGeometry& dual, const std::vector<double>& deficits,
                                Eigen::MatrixXd& m_out, Eigen::VectorXd& b_out,
                                double fd_eta = 1e-6, int threads = 1,
                                DerivativeMode mode = DerivativeMode::complex_step) {
    const int ne = top.num_edges();
    m_out = Eigen::MatrixXd::Zero(ne, ne);
    b_out.resize(ne);
    for (int ei = 0; ei < ne; ++ei) b_out(ei) = -4.0 * deficits[ei];

    std::vector<std::map<int, double>> tri_jac(top.num_triangles());
    detail::parallel_for(top.num_triangles(), threads, [&](int fi) {
        tri_jac[fi] = mode == DerivativeMode::complex_step
                          ? dual_length_jacobian_complex(top, metric, fi)
                          : dual_length_jacobian(top, metric, fi, fd_eta);
    });
    // merge in canonical triangle order so the accumulation is deterministic
    for (int fi = 0; fi < top.num_triangles(); ++fi) {
        for (int k = 0; k < 3; ++k) {
            const int row = top.triangle_edges[fi][k];
            int pos = 0;
            while (top.edge_triangles[row][pos] != fi) ++pos;
            const double m_arm = dual.moment_arm[row][pos];
            for (const auto& [col, dl] : tri_jac[fi]) m_out(row, col) += m_arm * dl;
        }
    }
}

namespace detail {

/// Right-hand side of the explicit ODE ldot = F(l): assembles the mass
/// matrix and solves. A right-hand side at rounding level short-circuits to
/// ldot = 0 (exact fixed point; flat lattices have singular M there).
inline Eigen::VectorXd flow_velocity(const ComplexTopology3& top, const std::vector<double>& lengths,
                                     const FlowConfig& cfg) {
    const int ne = top.num_edges();
    MetricAssignment metric;
    metric.lengths_sq.resize(ne);
    for (int ei = 0; ei < ne; ++ei) metric.lengths_sq[ei] = lengths[ei] * lengths[ei];

    const DualGeometry dual = dual_geometry(top, metric);
    const std::vector<double> eps = deficit_angles(top, metric);
    Eigen::MatrixXd m;
    Eigen::VectorXd b;
    assemble_rrf_system(top, metric, dual, eps, m, b, cfg.fd_eta,
                        resolve_threads(cfg.threads), cfg.derivative);
    if (b.lpNorm<Eigen::Infinity>() < 1e-12) return Eigen::VectorXd::Zero(ne);

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rcond() < 1.0 / cfg.cond_threshold)
        throw MatrixSingular("flow_velocity: mass matrix condition estimate above threshold");
    return lu.solve(b);
}

struct StepResult {
    Eigen::VectorXd y;     // accepted state
    double dt_used;        // size of the accepted step
    double dt_next;        // controller suggestion
};

/// Dormand-Prince 5(4) tableau.
inline const double kDpC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline const double kDpA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline const double kDpB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                -2187.0 / 6784, 11.0 / 84, 0.0};
inline const double kDpB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

template <class F>
StepResult advance(const F& f, const Eigen::VectorXd& y0, double dt, const FlowConfig& cfg) {
    switch (cfg.integrator) {
        case Integrator::explicit_euler:
            return {y0 + dt * f(y0), dt, dt};
        case Integrator::rk4: {
            const Eigen::VectorXd k1 = f(y0);
            const Eigen::VectorXd k2 = f(y0 + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = f(y0 + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = f(y0 + dt * k3);
            return {y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dt, dt};
        }
        case Integrator::rk45_adaptive: break;
    }
    // Dormand-Prince with a standard PI-free step controller
    while (true) {
        Eigen::VectorXd k[7];
        k[0] = f(y0);
        for (int s = 1; s < 7; ++s) {
            Eigen::VectorXd y = y0;
            for (int j = 0; j < s; ++j)
                if (kDpA[s][j] != 0.0) y += dt * kDpA[s][j] * k[j];
            k[s] = f(y);
        }
        Eigen::VectorXd y5 = y0, err = Eigen::VectorXd::Zero(y0.size());
        for (int s = 0; s < 7; ++s) {
            if (kDpB5[s] != 0.0) y5 += dt * kDpB5[s] * k[s];
            err += dt * (kDpB5[s] - kDpB4[s]) * k[s];
        }
        double err_norm = 0.0;
        for (int i = 0; i < y0.size(); ++i) {
            const double scale =
                cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0(i)), std::abs(y5(i)));
            err_norm = std::max(err_norm, std::abs(err(i)) / scale);
        }
        if (err_norm <= 1.0) {
            double grow = err_norm == 0.0 ? 5.0 : 0.9 * std::pow(err_norm, -0.2);
            const double dt_next = std::clamp(dt * std::clamp(grow, 0.2, 5.0), cfg.dt_min, cfg.dt_max);
            return {y5, dt, dt_next};
        }
        const double shrink = std::max(0.9 * std::pow(err_norm, -0.2), 0.2);
        dt *= shrink;
        if (dt < cfg.dt_min) throw StepTooSmall("rk45: step size underflow");
    }
}

}  // namespace detail

/// One accepted step of the configured integrator from the given state.
inline MetricAssignment step(const ComplexTopology3& top, const MetricAssignment& state,
                             const FlowConfig& cfg, double dt = 0.0) {
    const int ne = top.num_edges();
    Eigen::VectorXd y(ne);
    for (int ei = 0; ei < ne; ++ei) y(ei) = std::sqrt(state.lengths_sq[ei]);
    auto f = [&](const Eigen::VectorXd& l) {
        std::vector<double> lengths(l.data(), l.data() + l.size());
        return detail::flow_velocity(top, lengths, cfg);
    };
    const auto result = detail::advance(f, y, dt > 0.0 ? dt : cfg.dt_initial, cfg);
    MetricAssignment out;
    out.time = state.time + result.dt_used;
    out.lengths_sq.resize(ne);
    for (int ei = 0; ei < ne; ++ei) out.lengths_sq[ei] = result.y(ei) * result.y(ei);
    return out;
}

/// Integrates the flow until t_end or a stop condition; snapshots every
/// record_every accepted steps plus the first and last states.
inline FlowTrajectory run_flow(const ComplexTopology3& top, const MetricAssignment& metric0,
                               const FlowConfig& cfg) {
    if (!top.compact) throw Error("run_flow: complex is not compact");
    const int ne = top.num_edges();

    auto snapshot = [&](double t, const Eigen::VectorXd& y) {
        FlowSnapshot snap;
        snap.t = t;
        snap.metric.time = t;
        snap.metric.lengths_sq.resize(ne);
        for (int ei = 0; ei < ne; ++ei) snap.metric.lengths_sq[ei] = y(ei) * y(ei);
        snap.min_edge = y.minCoeff();
        snap.max_edge = y.maxCoeff();
        const DualGeometry dual = dual_geometry(top, snap.metric);
        const std::vector<double> eps = deficit_angles(top, snap.metric);
        snap.min_deficit = *std::min_element(eps.begin(), eps.end());
        double action = 0.0;
        for (int ei = 0; ei < ne; ++ei) action += eps[ei] * y(ei);
        snap.regge_action = action / (8.0 * std::numbers::pi);
        snap.well_centered = dual.all_well_centered;
        return snap;
    };

    Eigen::VectorXd y(ne), y0(ne);
    for (int ei = 0; ei < ne; ++ei) y(ei) = y0(ei) = std::sqrt(metric0.lengths_sq[ei]);
    auto f = [&](const Eigen::VectorXd& l) {
        std::vector<double> lengths(l.data(), l.data() + l.size());
        return detail::flow_velocity(top, lengths, cfg);
    };

    FlowTrajectory traj;
    traj.snapshots.push_back(snapshot(metric0.time, y));
    double t = metric0.time;
    double dt = cfg.dt_initial;
    int accepted = 0;
    traj.termination = Termination::reached_t_end;
    while (t < cfg.t_end - 1e-15 * std::max(1.0, std::abs(cfg.t_end))) {
        const double dt_try = std::min(dt, cfg.t_end - t);
        detail::StepResult result;
        try {
            result = detail::advance(f, y, dt_try, cfg);
        } catch (const NonRealizable&) {
            traj.termination = Termination::nonrealizable;
            break;
        } catch (const MatrixSingular&) {
            traj.termination = Termination::matrix_singular;
            break;
        } catch (const StepTooSmall&) {
            traj.termination = Termination::nonrealizable;
            break;
        }
        y = result.y;
        t += result.dt_used;
        dt = result.dt_next;
        ++accepted;

        bool collapsed = false;
        for (int ei = 0; ei < ne; ++ei)
            if (y(ei) < cfg.stop_min_edge_fraction * y0(ei)) collapsed = true;
        if (collapsed) {
            traj.termination = Termination::edge_collapse;
            traj.snapshots.push_back(snapshot(t, y));
            return traj;
        }
        if (cfg.record_every > 0 && accepted % cfg.record_every == 0)
            traj.snapshots.push_back(snapshot(t, y));
    }
    if (traj.snapshots.back().t < t) traj.snapshots.push_back(snapshot(t, y));
    return traj;
}

/// Eigenvalues of the finite-difference Jacobian of the flow vector field
/// F(l) = M(l)^{-1} b(l), sorted by real part descending.
inline std::vector<std::complex<double>> jacobian_spectrum(const ComplexTopology3& top,
                                                           const MetricAssignment& metric,
                                                           const FlowConfig& cfg = {}) {
    const int ne = top.num_edges();
    std::vector<double> base(ne);
    for (int ei = 0; ei < ne; ++ei) base[ei] = std::sqrt(metric.lengths_sq[ei]);

    Eigen::MatrixXd jac(ne, ne);
    const double eta = 1e-5;
    FlowConfig inner = cfg;
    inner.threads = -1;  // columns are already parallel; keep the inner assembly serial
    detail::parallel_for(ne, detail::resolve_threads(cfg.threads), [&](int col) {
        std::vector<double> lengths = base;
        const double h = eta * base[col];
        lengths[col] = base[col] + h;
        const Eigen::VectorXd plus = detail::flow_velocity(top, lengths, inner);
        lengths[col] = base[col] - h;
        const Eigen::VectorXd minus = detail::flow_velocity(top, lengths, inner);
        jac.col(col) = (plus - minus) / (2.0 * h);
    });

    Eigen::EigenSolver<Eigen::MatrixXd> solver(jac, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw Error("jacobian_spectrum: eigenvalue iteration failed");
    std::vector<std::complex<double>> eig(ne);
    for (int i = 0; i < ne; ++i) eig[i] = solver.eigenvalues()(i);
    std::sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eig;
}

}  // namespace rrf
