#pragma once

// Closed-loop simulation of the arm: fixed-step RK4 over one tracking cycle
// and the outer extremum-seeking loop across cycles.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esadapt/control.hpp"
#include "esadapt/estimator.hpp"
#include "esadapt/linearizer.hpp"
#include "esadapt/manipulator.hpp"
#include "esadapt/trace.hpp"

namespace esadapt {

/// Desired joint trajectory and its first two derivatives (both joints share it).
struct Reference {
    Vec2 q;
    Vec2 qdot;
    Vec2 qddot;
};

enum class ReferenceKind { Sigmoid };

inline std::string_view to_string(ReferenceKind) { return "sigmoid"; }

inline ReferenceKind reference_kind_from_string(std::string_view name) {
    if (name == "sigmoid") return ReferenceKind::Sigmoid;
    throw SchemaError("unknown reference '" + std::string(name) + "' (expected sigmoid)");
}

/// q_d = 1 / (1 + exp(-t)) on each joint, with analytic derivatives.
inline Reference reference_signal(double t, ReferenceKind = ReferenceKind::Sigmoid) {
    const double s = 1.0 / (1.0 + std::exp(-t));
    const double ds = s * (1.0 - s);
    const double dds = ds * (1.0 - 2.0 * s);
    return {Vec2::Constant(s), Vec2::Constant(ds), Vec2::Constant(dds)};
}

struct SimConfig {
    ManipulatorParams params;
    double dt = 1e-3;
    double t_f = 4.0;
    int iterations = 1;
    std::optional<PlantState> initial_state;  // defaults to the reference at t = 0
    ReferenceKind reference = ReferenceKind::Sigmoid;
    ControllerGains gains = ControllerGains::uniform({2, 2}, 1.0);
    RobustCase robust;
    UncertaintySpec uncertainty = NoUncertainty{};
    MesConfig mes;
    CostWeights cost;
    SignFunction sign;
    double blowup_threshold = 1e6;

    [[nodiscard]] long steps() const { return std::lround(t_f / dt); }

    [[nodiscard]] PlantState resolved_initial_state() const {
        if (initial_state) return *initial_state;
        const Reference r = reference_signal(0.0, reference);
        return {r.q, r.qdot, 0.0};
    }

    void validate() const {
        params.validate();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
        if (!(t_f > 0.0) || !std::isfinite(t_f)) throw ValidationError("t_f must be > 0");
        const long n = steps();
        if (n < 1 || std::abs(static_cast<double>(n) * dt - t_f) > 1e-9 * t_f) {
            throw ValidationError("dt must divide t_f (t_f / dt = " + std::to_string(t_f / dt) + ")");
        }
        if (iterations < 1) throw ValidationError("iterations must be >= 1");
        if (gains.rows.size() != 2 || gains.rows[0].size() != 2 || gains.rows[1].size() != 2) {
            throw ValidationError("gains must be two rows of two entries for the two-link arm");
        }
        if (!is_hurwitz(gains)) throw ValidationError("gains: error polynomials must be Hurwitz");
        robust.validate();
        validate_uncertainty(uncertainty);
        mes.validate();
        if (mes.channels() != 2) throw ValidationError("mes must have two channels for the two-link arm");
        if (mes.t_f != t_f) throw ValidationError("mes.t_f must equal t_f");
        if (!(cost.q1 > 0.0) || !(cost.q2 > 0.0)) throw ValidationError("cost weights q1 and q2 must be > 0");
        if (sign.epsilon < 0.0) throw ValidationError("sign_smoothing must be >= 0");
        if (initial_state && !initial_state->finite()) throw ValidationError("initial_state must be finite");
        if (!(blowup_threshold > 0.0)) throw ValidationError("blowup_threshold must be > 0");
    }
};

/// The arm seen through its input-output linearization, y = q, r = (2, 2):
/// b = -H^-1 (C q' + G), A = H^-1, L = Q = G.
inline LinearizedPlantView manipulator_view(const ManipulatorParams& p, const Vec2& q, const Vec2& qdot) {
    const Mat2 H = inertia_matrix(p, q);
    const Vec2 G = gravity_vector(p, q);
    const Vec2 bias = coriolis_matrix(p, q, qdot) * qdot + G;
    LinearizedPlantView view;
    view.A_inv = H;
    view.A = H.inverse();
    view.b = -(view.A * bias);
    view.L = G;
    view.Q = G;
    return view;
}

inline VectorXd manipulator_error(const Vec2& q, const Vec2& qdot, const Reference& ref) {
    VectorXd z(4);
    z << q[0] - ref.q[0], qdot[0] - ref.qdot[0], q[1] - ref.q[1], qdot[1] - ref.qdot[1];
    return z;
}

/// Closed loop u_f = u_n + u_r for a fixed configuration.
class ClosedLoop {
public:
    explicit ClosedLoop(const SimConfig& cfg)
        : cfg_(cfg), dyn_(build_error_dynamics(cfg.gains, {2, 2})) {}

    [[nodiscard]] const CertifiedErrorDynamics& dynamics() const { return dyn_; }

    /// Applied torque at local cycle time `t_local` for estimate `delta_hat`.
    [[nodiscard]] Vec2 torque(const Vec2& q, const Vec2& qdot, double t_local, const VectorXd& delta_hat) const {
        const Reference ref = reference_signal(t_local, cfg_.reference);
        const LinearizedPlantView view = manipulator_view(cfg_.params, q, qdot);
        const ErrorState z{manipulator_error(q, qdot, ref), {2, 2}};
        const VectorXd u_n = nominal_control(view, cfg_.gains, z, ref.qddot);
        const VectorXd u_r = robust_control(cfg_.robust, view, dyn_, z.z, delta_hat, cfg_.sign);
        return total_control(u_n, u_r);
    }

    /// [q'; q''] with the uncertainty evaluated at global time `t_global`.
    [[nodiscard]] Vec4 derivative(const Vec4& x, double t_local, double t_global, const VectorXd& delta_hat) const {
        const Vec2 q = x.head<2>();
        const Vec2 qdot = x.tail<2>();
        const Vec2 tau = torque(q, qdot, t_local, delta_hat);
        return plant_derivative(cfg_.params, PlantState{q, qdot, t_global}, tau, cfg_.uncertainty);
    }

private:
    const SimConfig& cfg_;
    CertifiedErrorDynamics dyn_;
};

namespace detail {

inline void check_envelope(const Vec4& x, double threshold, double t) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > threshold) {
        throw NumericalBlowup("state left the envelope at t=" + std::to_string(t) +
                              " (non-finite or |x| > " + std::to_string(threshold) +
                              "); reduce dt or enable sign smoothing");
    }
}

inline void record(EpisodeTrace& trace, const ClosedLoop& loop, const SimConfig& cfg, const Vec4& x,
                   double t_local, const VectorXd& delta_hat) {
    const Vec2 q = x.head<2>();
    const Vec2 qdot = x.tail<2>();
    const Reference ref = reference_signal(t_local, cfg.reference);
    trace.t.push_back(t_local);
    trace.q.push_back(q);
    trace.qdot.push_back(qdot);
    trace.qd.push_back(ref.q);
    trace.qd_dot.push_back(ref.qdot);
    trace.qd_ddot.push_back(ref.qddot);
    trace.tau.push_back(loop.torque(q, qdot, t_local, delta_hat));
    trace.z_norm.push_back(manipulator_error(q, qdot, ref).norm());
}

inline Vec4 pack(const PlantState& s) {
    Vec4 x;
    x << s.q, s.qdot;
    return x;
}

}  // namespace detail

/// One cycle of length t_f with the estimate held constant. `cycle` places
/// the cycle on the global clock (t_global = cycle * t_f + t_local).
inline EpisodeTrace run_episode(const SimConfig& cfg, const VectorXd& delta_hat, long cycle = 0) {
    const ClosedLoop loop(cfg);
    const long n = cfg.steps();
    const double h = cfg.t_f / static_cast<double>(n);
    const double t0 = static_cast<double>(cycle) * cfg.t_f;

    EpisodeTrace trace;
    trace.reserve(static_cast<std::size_t>(n + 1));
    Vec4 x = detail::pack(cfg.resolved_initial_state());
    detail::check_envelope(x, cfg.blowup_threshold, 0.0);
    detail::record(trace, loop, cfg, x, 0.0, delta_hat);

    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        const Vec4 k1 = loop.derivative(x, t, t0 + t, delta_hat);
        const Vec4 k2 = loop.derivative(x + 0.5 * h * k1, t + 0.5 * h, t0 + t + 0.5 * h, delta_hat);
        const Vec4 k3 = loop.derivative(x + 0.5 * h * k2, t + 0.5 * h, t0 + t + 0.5 * h, delta_hat);
        const Vec4 k4 = loop.derivative(x + h * k3, t + h, t0 + t + h, delta_hat);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = static_cast<double>(i + 1) * h;
        detail::check_envelope(x, cfg.blowup_threshold, t_next);
        detail::record(trace, loop, cfg, x, t_next, delta_hat);
    }
    return trace;
}

/// One cycle with a continuous estimator co-integrated with the arm. The
/// estimator is driven by the instantaneous cost Q1 ||e||^2 + Q2 ||e'||^2 and
/// runs on the global clock; `mes` is advanced in place.
inline EpisodeTrace run_episode_coupled(const SimConfig& cfg, MesState& mes, long cycle = 0) {
    const ClosedLoop loop(cfg);
    const long n = cfg.steps();
    const double h = cfg.t_f / static_cast<double>(n);
    const double t0 = static_cast<double>(cycle) * cfg.t_f;
    const auto p = static_cast<Eigen::Index>(cfg.mes.channels());

    using State = Eigen::Matrix<double, Eigen::Dynamic, 1>;
    auto split_estimate = [&](const State& s, double t_global) {
        MesState probe = mes;
        probe.t = t_global;
        mes_integrated(probe, cfg.mes) = s.tail(p);
        return mes_continuous_output(probe, cfg.mes);
    };
    auto rhs = [&](const State& s, double t_local) {
        const double t_global = t0 + t_local;
        const VectorXd est = split_estimate(s, t_global);
        const Vec4 x = s.head<4>();
        const Vec4 dx = loop.derivative(x, t_local, t_global, est);
        const Reference ref = reference_signal(t_local, cfg.reference);
        const double J = cost_integrand(cfg.cost, x.head<2>(), ref.q, x.tail<2>(), ref.qdot);
        MesState probe = mes;
        probe.t = t_global;
        mes_integrated(probe, cfg.mes) = s.tail(p);
        probe.delta_hat = est;
        State out(4 + p);
        out << dx, mes_continuous_derivative(probe, cfg.mes, J);
        return out;
    };

    State s(4 + p);
    s << detail::pack(cfg.resolved_initial_state()), mes_integrated(mes, cfg.mes);
    EpisodeTrace trace;
    trace.reserve(static_cast<std::size_t>(n + 1));
    detail::check_envelope(s.head<4>(), cfg.blowup_threshold, 0.0);
    detail::record(trace, loop, cfg, s.head<4>(), 0.0, split_estimate(s, t0));

    for (long i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * h;
        const State k1 = rhs(s, t);
        const State k2 = rhs(s + 0.5 * h * k1, t + 0.5 * h);
        const State k3 = rhs(s + 0.5 * h * k2, t + 0.5 * h);
        const State k4 = rhs(s + h * k3, t + h);
        s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t_next = static_cast<double>(i + 1) * h;
        detail::check_envelope(s.head<4>(), cfg.blowup_threshold, t_next);
        detail::record(trace, loop, cfg, s.head<4>(), t_next, split_estimate(s, t0 + t_next));
    }
    mes_integrated(mes, cfg.mes) = s.tail(p);
    mes.t = t0 + cfg.t_f;
    mes.delta_hat = mes_continuous_output(mes, cfg.mes);
    mes.k += 1;
    return trace;
}

struct IterationRecord {
    long k = 0;
    double J = 0.0;
    VectorXd delta_hat;   // estimate applied during cycle k
    VectorXd delta_true;  // true parameters, time-averaged over cycle k
    double max_z = 0.0;
};

struct MesRun {
    std::vector<IterationRecord> records;
    EpisodeTrace first_trace;
    EpisodeTrace last_trace;
    MesState final_state;  // estimator state after the last update
};

/// Trapezoid average of the true parameters over cycle `cycle`.
inline VectorXd cycle_average_truth(const SimConfig& cfg, long cycle) {
    const long n = cfg.steps();
    const double h = cfg.t_f / static_cast<double>(n);
    const double t0 = static_cast<double>(cycle) * cfg.t_f;
    Vec2 acc = 0.5 * (true_parameters(cfg.uncertainty, t0) + true_parameters(cfg.uncertainty, t0 + cfg.t_f));
    for (long i = 1; i < n; ++i) acc += true_parameters(cfg.uncertainty, t0 + static_cast<double>(i) * h);
    return acc * (h / cfg.t_f);
}

/// Runs `cfg.iterations` cycles. Each cycle restarts the arm from the same
/// initial state; only the estimate carries over.
inline MesRun run_mes_loop(const SimConfig& cfg) {
    cfg.validate();
    MesRun run;
    run.records.reserve(static_cast<std::size_t>(cfg.iterations));
    MesState mes = MesState::initial_for(cfg.mes);
    const bool continuous = is_continuous(cfg.mes.variant);
    if (continuous) mes.delta_hat = mes_continuous_output(mes, cfg.mes);

    for (long k = 0; k < cfg.iterations; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.delta_hat = mes.delta_hat;
        EpisodeTrace trace;
        try {
            trace = continuous ? run_episode_coupled(cfg, mes, k) : run_episode(cfg, mes.delta_hat, k);
        } catch (const NumericalBlowup& e) {
            throw NumericalBlowup("iteration " + std::to_string(k) + ": " + e.what());
        }
        rec.J = evaluate_cost(trace, cfg.cost, cfg.t_f);
        rec.delta_true = cycle_average_truth(cfg, k);
        rec.max_z = *std::max_element(trace.z_norm.begin(), trace.z_norm.end());
        if (!continuous) mes = mes_cycle_step(mes, cfg.mes, rec.J);
        if (k == 0) run.first_trace = trace;
        if (k + 1 == cfg.iterations) run.last_trace = std::move(trace);
        run.records.push_back(std::move(rec));
    }
    run.final_state = mes;
    return run;
}

}  // namespace esadapt
