#pragma once

// Multiparametric extremum seeking: sinusoidal dithers at distinct
// frequencies demodulated against a scalar cost.
//
//   ContinuousMes      x_i' = a_i sin(w_i t + pi/2) J,  est_i = x_i + a_i sin(w_i t - pi/2)
//   ContinuousDynamic  est_i' = a_i sqrt(w_i) cos(w_i t) - k_i sqrt(w_i) sin(w_i t) J
//   DiscreteMes        per-cycle sampling of ContinuousMes at t = t_f k
//   DiscreteDynamic    per-cycle sampling of ContinuousDynamic at t = t_f k

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "esadapt/errors.hpp"
#include "esadapt/trace.hpp"

namespace esadapt {

using Eigen::VectorXd;

enum class MesVariant { ContinuousMes, ContinuousDynamic, DiscreteMes, DiscreteDynamic };

inline std::string_view to_string(MesVariant v) {
    switch (v) {
        case MesVariant::ContinuousMes:
            return "continuous_mes";
        case MesVariant::ContinuousDynamic:
            return "continuous_dynamic";
        case MesVariant::DiscreteMes:
            return "discrete_mes";
        case MesVariant::DiscreteDynamic:
            break;
    }
    return "discrete_dynamic";
}

inline MesVariant mes_variant_from_string(std::string_view name) {
    if (name == "continuous_mes") return MesVariant::ContinuousMes;
    if (name == "continuous_dynamic") return MesVariant::ContinuousDynamic;
    if (name == "discrete_mes") return MesVariant::DiscreteMes;
    if (name == "discrete_dynamic") return MesVariant::DiscreteDynamic;
    throw SchemaError("unknown MES variant '" + std::string(name) +
                      "' (expected continuous_mes|continuous_dynamic|discrete_mes|discrete_dynamic)");
}

inline bool is_continuous(MesVariant v) { return v == MesVariant::ContinuousMes || v == MesVariant::ContinuousDynamic; }

struct MesConfig {
    MesVariant variant = MesVariant::DiscreteMes;
    std::vector<double> amplitude;  // a_i (alpha_i for the dynamic laws)
    std::vector<double> frequency;  // omega_i [rad/s]
    std::vector<double> gain;       // k_i (kappa_i); dynamic laws only
    double t_f = 4.0;
    std::vector<double> initial;    // starting integrator value; empty means zeros

    [[nodiscard]] std::size_t channels() const { return amplitude.size(); }

    /// Rejects configs that break the dither design rules.
    void validate() const {
        const auto p = amplitude.size();
        if (p == 0) throw ValidationError("mes.amplitude must have at least one channel");
        if (frequency.size() != p) throw ValidationError("mes.frequency must have one entry per channel");
        const bool dynamic = variant == MesVariant::ContinuousDynamic || variant == MesVariant::DiscreteDynamic;
        if (dynamic && gain.size() != p) throw ValidationError("mes.gain must have one entry per channel");
        if (!(t_f > 0.0)) throw ValidationError("mes.t_f must be > 0");
        if (!initial.empty() && initial.size() != p) throw ValidationError("mes.initial must have one entry per channel");
        for (std::size_t i = 0; i < p; ++i) {
            if (!(amplitude[i] > 0.0)) throw ValidationError("mes.amplitude entries must be > 0");
            if (!(frequency[i] > 0.0)) throw ValidationError("mes.frequency entries must be > 0");
            if (dynamic && !(gain[i] > 0.0)) throw ValidationError("mes.gain entries must be > 0");
        }
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                if (frequency[i] == frequency[j]) {
                    throw ValidationError("mes.frequency: dither frequencies must be pairwise distinct (omega_" +
                                          std::to_string(i + 1) + " == omega_" + std::to_string(j + 1) + ")");
                }
            }
        }
        if (variant == MesVariant::ContinuousMes) {
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    for (std::size_t k = 0; k < p; ++k) {
                        if (frequency[i] + frequency[j] == frequency[k]) {
                            throw ValidationError("mes.frequency: omega_i + omega_j must differ from every omega_k");
                        }
                    }
        }
    }
};

struct MesState {
    VectorXd x;          // integrator states (MES laws)
    VectorXd delta_hat;  // current estimate
    long k = 0;          // iteration index (discrete laws)
    double t = 0.0;      // time (continuous laws)

    static MesState zeros(std::size_t channels) {
        const auto p = static_cast<Eigen::Index>(channels);
        return {VectorXd::Zero(p), VectorXd::Zero(p), 0, 0.0};
    }

    /// x and the estimate both start at cfg.initial (zeros when unset).
    static MesState initial_for(const MesConfig& cfg) {
        MesState s = zeros(cfg.channels());
        if (!cfg.initial.empty()) {
            s.x = Eigen::Map<const VectorXd>(cfg.initial.data(), static_cast<Eigen::Index>(cfg.initial.size()));
            s.delta_hat = s.x;
        }
        return s;
    }

    bool operator==(const MesState& o) const {
        return x == o.x && delta_hat == o.delta_hat && k == o.k && t == o.t;
    }
};

namespace detail {
inline void require_variant(const MesConfig& cfg, MesVariant expected, const char* op) {
    if (cfg.variant != expected) {
        throw ValidationError(std::string(op) + " requires variant " + std::string(to_string(expected)));
    }
}
inline void require_channels(const MesState& s, const MesConfig& cfg) {
    const auto p = static_cast<Eigen::Index>(cfg.channels());
    if (s.x.size() != p || s.delta_hat.size() != p) throw DimensionMismatch("MES state/config channel mismatch");
}
}  // namespace detail

inline MesState mes_discrete_step(const MesState& state, const MesConfig& cfg, double J) {
    detail::require_variant(cfg, MesVariant::DiscreteMes, "mes_discrete_step");
    detail::require_channels(state, cfg);
    constexpr double half_pi = std::numbers::pi / 2.0;
    MesState next = state;
    const double phase_time = cfg.t_f * static_cast<double>(state.k);
    for (std::size_t i = 0; i < cfg.channels(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double a = cfg.amplitude[i];
        const double w = cfg.frequency[i];
        next.x(ii) = state.x(ii) + a * cfg.t_f * std::sin(w * phase_time + half_pi) * J;
        next.delta_hat(ii) = next.x(ii) + a * std::sin(w * phase_time - half_pi);
    }
    next.k = state.k + 1;
    return next;
}

/// Discrete dynamic law, applied directly to the estimate (no x-state).
inline MesState mes_dynamic_discrete_step(const MesState& state, const MesConfig& cfg, double J) {
    detail::require_variant(cfg, MesVariant::DiscreteDynamic, "mes_dynamic_discrete_step");
    detail::require_channels(state, cfg);
    MesState next = state;
    const double phase_time = cfg.t_f * static_cast<double>(state.k);
    for (std::size_t i = 0; i < cfg.channels(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double w = cfg.frequency[i];
        const double root = std::sqrt(w);
        next.delta_hat(ii) = state.delta_hat(ii) + cfg.t_f * (cfg.amplitude[i] * root * std::cos(w * phase_time) -
                                                              cfg.gain[i] * root * std::sin(w * phase_time) * J);
    }
    next.k = state.k + 1;
    return next;
}

/// One estimator update between cycles, dispatching on the discrete variant.
inline MesState mes_cycle_step(const MesState& state, const MesConfig& cfg, double J) {
    if (cfg.variant == MesVariant::DiscreteDynamic) return mes_dynamic_discrete_step(state, cfg, J);
    return mes_discrete_step(state, cfg, J);
}

/// Right-hand side of the integrated estimator variable at state.t: x' for
/// ContinuousMes, est' for ContinuousDynamic.
inline VectorXd mes_continuous_derivative(const MesState& state, const MesConfig& cfg, double J) {
    if (!is_continuous(cfg.variant)) throw ValidationError("mes_continuous_derivative requires a continuous variant");
    detail::require_channels(state, cfg);
    constexpr double half_pi = std::numbers::pi / 2.0;
    VectorXd out(static_cast<Eigen::Index>(cfg.channels()));
    for (std::size_t i = 0; i < cfg.channels(); ++i) {
        const double w = cfg.frequency[i];
        const double wt = w * state.t;
        if (cfg.variant == MesVariant::ContinuousMes) {
            out(static_cast<Eigen::Index>(i)) = cfg.amplitude[i] * std::sin(wt + half_pi) * J;
        } else {
            const double root = std::sqrt(w);
            out(static_cast<Eigen::Index>(i)) =
                cfg.amplitude[i] * root * std::cos(wt) - cfg.gain[i] * root * std::sin(wt) * J;
        }
    }
    return out;
}

/// Estimate read out of the continuous state at state.t (for ContinuousMes
/// the dither is added to x; for ContinuousDynamic the state is the estimate).
inline VectorXd mes_continuous_output(const MesState& state, const MesConfig& cfg) {
    if (cfg.variant != MesVariant::ContinuousMes) return state.delta_hat;
    constexpr double half_pi = std::numbers::pi / 2.0;
    VectorXd out = state.x;
    for (std::size_t i = 0; i < cfg.channels(); ++i) {
        out(static_cast<Eigen::Index>(i)) += cfg.amplitude[i] * std::sin(cfg.frequency[i] * state.t - half_pi);
    }
    return out;
}

/// Integrated variable of a continuous estimator (x or the estimate itself).
inline VectorXd& mes_integrated(MesState& state, const MesConfig& cfg) {
    return cfg.variant == MesVariant::ContinuousMes ? state.x : state.delta_hat;
}

/// RK4 step of a continuous estimator whose cost is a function of the current
/// estimate and time.
template <class CostFn>
MesState mes_continuous_rk4(const MesState& state, const MesConfig& cfg, CostFn&& cost, double dt) {
    auto rhs = [&](const VectorXd& integrated, double t) {
        MesState s = state;
        s.t = t;
        mes_integrated(s, cfg) = integrated;
        s.delta_hat = mes_continuous_output(s, cfg);
        return mes_continuous_derivative(s, cfg, cost(s.delta_hat, t));
    };
    MesState next = state;
    const VectorXd y0 = mes_integrated(next, cfg);
    const VectorXd k1 = rhs(y0, state.t);
    const VectorXd k2 = rhs(y0 + 0.5 * dt * k1, state.t + 0.5 * dt);
    const VectorXd k3 = rhs(y0 + 0.5 * dt * k2, state.t + 0.5 * dt);
    const VectorXd k4 = rhs(y0 + dt * k3, state.t + dt);
    mes_integrated(next, cfg) = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    next.t = state.t + dt;
    next.delta_hat = mes_continuous_output(next, cfg);
    return next;
}

/// Estimator driven by a cost that is a direct function of the estimate, one
/// cycle per iteration. Continuous laws are integrated with RK4 at step `dt`
/// across each cycle and sampled at its end. Returns the estimate at the start
/// of every iteration followed by the final estimate (iterations + 1 entries).
template <class CostFn>
std::vector<VectorXd> seek(const MesConfig& cfg, CostFn&& cost, int iterations, double dt = 1e-3) {
    cfg.validate();
    MesState state = MesState::initial_for(cfg);
    const bool continuous = is_continuous(cfg.variant);
    if (continuous) state.delta_hat = mes_continuous_output(state, cfg);
    const long substeps = continuous ? std::max(1L, std::lround(cfg.t_f / dt)) : 0;
    const double h = continuous ? cfg.t_f / static_cast<double>(substeps) : 0.0;

    std::vector<VectorXd> history;
    history.reserve(static_cast<std::size_t>(iterations) + 1);
    for (int k = 0; k < iterations; ++k) {
        history.push_back(state.delta_hat);
        if (continuous) {
            auto timed = [&](const VectorXd& est, double) { return cost(est); };
            for (long i = 0; i < substeps; ++i) state = mes_continuous_rk4(state, cfg, timed, h);
            state.k += 1;
        } else {
            state = mes_cycle_step(state, cfg, cost(state.delta_hat));
        }
    }
    history.push_back(state.delta_hat);
    return history;
}

/// Cost weights for J = Q1 int ||q - q_d||^2 dt + Q2 int ||q' - q_d'||^2 dt.
struct CostWeights {
    double q1 = 1.0;
    double q2 = 1.0;

    bool operator==(const CostWeights&) const = default;
};

/// Instantaneous integrand of the tracking cost.
inline double cost_integrand(const CostWeights& w, const Vec2& q, const Vec2& qd, const Vec2& qdot,
                             const Vec2& qd_dot) {
    return w.q1 * (q - qd).squaredNorm() + w.q2 * (qdot - qd_dot).squaredNorm();
}

/// Trapezoidal tracking cost over the trace grid.
inline double evaluate_cost(const EpisodeTrace& trace, const CostWeights& w) {
    if (trace.empty()) throw EmptyTrace("cannot evaluate the cost of an empty trace");
    double J = 0.0;
    double prev = cost_integrand(w, trace.q[0], trace.qd[0], trace.qdot[0], trace.qd_dot[0]);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double cur = cost_integrand(w, trace.q[i], trace.qd[i], trace.qdot[i], trace.qd_dot[i]);
        J += 0.5 * (trace.t[i] - trace.t[i - 1]) * (prev + cur);
        prev = cur;
    }
    return J;
}

/// As above, additionally checking that the trace spans [0, t_f].
inline double evaluate_cost(const EpisodeTrace& trace, const CostWeights& w, double t_f) {
    if (trace.empty()) throw EmptyTrace("cannot evaluate the cost of an empty trace");
    const double span = trace.t.back() - trace.t.front();
    if (std::abs(span - t_f) > 1e-9 * std::max(1.0, t_f)) {
        throw ValidationError("trace spans " + std::to_string(span) + " s, expected t_f=" + std::to_string(t_f));
    }
    return evaluate_cost(trace, w);
}

}  // namespace esadapt
