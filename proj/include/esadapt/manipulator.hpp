#pragma once

// Two-link planar manipulator: H(q) q'' + C(q, q') q' + G(q) = tau, with an
// additive acceleration-level uncertainty Delta_b.

#include <array>
#include <cmath>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "esadapt/errors.hpp"
#include "esadapt/waveform.hpp"

namespace esadapt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;

struct ManipulatorParams {
    double m1 = 10.0;
    double m2 = 5.0;
    double l1 = 1.0;
    double l2 = 1.0;
    double lc1 = 0.5;
    double lc2 = 0.5;
    double I1 = 10.0 / 12.0;
    double I2 = 5.0 / 12.0;
    double g = 9.8;

    [[nodiscard]] bool valid() const {
        for (double v : {m1, m2, l1, l2, lc1, lc2, I1, I2, g}) {
            if (!(v > 0.0) || !std::isfinite(v)) return false;
        }
        return true;
    }

    void validate() const {
        if (!valid()) throw ValidationError("manipulator parameters must all be finite and strictly positive");
    }

    bool operator==(const ManipulatorParams&) const = default;
};

struct PlantState {
    Vec2 q = Vec2::Zero();
    Vec2 qdot = Vec2::Zero();
    double t = 0.0;

    [[nodiscard]] bool finite() const { return q.allFinite() && qdot.allFinite() && std::isfinite(t); }
};

// --- uncertainty descriptors ------------------------------------------------

struct NoUncertainty {
    bool operator==(const NoUncertainty&) const = default;
};

/// Delta_b(t) = [w1(t), w2(t)]
struct TimeVaryingUncertainty {
    std::array<Waveform, 2> delta;
    bool operator==(const TimeVaryingUncertainty&) const = default;
};

/// Delta_b(t, q) = Delta(t) * G(q) with Delta(t) = diag(w1(t), w2(t)).
/// Constant waveforms give the state-dependent-only case.
struct GravityUncertainty {
    std::array<Waveform, 2> diagonal;

    static GravityUncertainty constant(double d1, double d2) {
        return {{Waveform::constant(d1), Waveform::constant(d2)}};
    }

    [[nodiscard]] Mat2 delta(double t) const {
        Mat2 d = Mat2::Zero();
        d(0, 0) = diagonal[0](t);
        d(1, 1) = diagonal[1](t);
        return d;
    }

    bool operator==(const GravityUncertainty&) const = default;
};

/// Delta_b(t, q) = Delta * (Q(q) + eta(t)) with ||eta(t)|| <= c1.
struct MixedUncertainty {
    enum class StateTerm { Gravity, Zero };

    Mat2 delta = Mat2::Zero();
    StateTerm state_term = StateTerm::Gravity;
    std::array<Waveform, 2> eta;
    double c1 = 0.0;

    bool operator==(const MixedUncertainty& o) const {
        return delta == o.delta && state_term == o.state_term && eta == o.eta && c1 == o.c1;
    }
};

using UncertaintySpec = std::variant<NoUncertainty, TimeVaryingUncertainty, GravityUncertainty, MixedUncertainty>;

// --- dynamics terms ---------------------------------------------------------

inline Mat2 inertia_matrix(const ManipulatorParams& p, const Vec2& q) {
    const double c2 = std::cos(q[1]);
    const double h22 = p.m2 * p.lc2 * p.lc2 + p.I2;
    const double h12 = p.m2 * p.l1 * p.lc2 * c2 + h22;
    const double h11 =
        p.m1 * p.lc1 * p.lc1 + p.I1 + p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2.0 * p.l1 * p.lc2 * c2) + p.I2;
    Mat2 H;
    H << h11, h12, h12, h22;
    return H;
}

inline Mat2 coriolis_matrix(const ManipulatorParams& p, const Vec2& q, const Vec2& qdot) {
    const double h = p.m2 * p.l1 * p.lc2 * std::sin(q[1]);
    Mat2 C;
    C << -h * qdot[1], -h * qdot[0] - h * qdot[1], h * qdot[0], 0.0;
    return C;
}

inline Vec2 gravity_vector(const ManipulatorParams& p, const Vec2& q) {
    const double c1 = std::cos(q[0]);
    const double c12 = std::cos(q[0] + q[1]);
    return {p.m1 * p.lc1 * p.g * c1 + p.m2 * p.g * (p.l2 * c12 + p.l1 * c1), p.m2 * p.lc2 * p.g * c12};
}

/// Acceleration-level uncertainty Delta_b(t, q).
inline Vec2 uncertainty_term(const ManipulatorParams& p, const UncertaintySpec& unc, double t, const Vec2& q) {
    struct Visitor {
        const ManipulatorParams& p;
        double t;
        const Vec2& q;

        Vec2 operator()(const NoUncertainty&) const { return Vec2::Zero(); }
        Vec2 operator()(const TimeVaryingUncertainty& u) const { return {u.delta[0](t), u.delta[1](t)}; }
        Vec2 operator()(const GravityUncertainty& u) const { return u.delta(t) * gravity_vector(p, q); }
        Vec2 operator()(const MixedUncertainty& u) const {
            const Vec2 state =
                u.state_term == MixedUncertainty::StateTerm::Gravity ? gravity_vector(p, q) : Vec2::Zero();
            return u.delta * (state + Vec2{u.eta[0](t), u.eta[1](t)});
        }
    };
    return std::visit(Visitor{p, t, q}, unc);
}

/// True parameters as the estimator sees them: TimeVarying -> [w1(t), w2(t)];
/// Gravity / Mixed -> diagonal of Delta(t); None -> 0.
inline Vec2 true_parameters(const UncertaintySpec& unc, double t) {
    struct Visitor {
        double t;
        Vec2 operator()(const NoUncertainty&) const { return Vec2::Zero(); }
        Vec2 operator()(const TimeVaryingUncertainty& u) const { return {u.delta[0](t), u.delta[1](t)}; }
        Vec2 operator()(const GravityUncertainty& u) const { return u.delta(t).diagonal(); }
        Vec2 operator()(const MixedUncertainty& u) const { return u.delta.diagonal(); }
    };
    return std::visit(Visitor{t}, unc);
}

/// Checks the descriptor invariants. eta's bound is checked by sampling
/// [0, horizon] on `samples` points.
inline void validate_uncertainty(const UncertaintySpec& unc, double horizon = 1000.0, int samples = 100000) {
    auto finite = [](const Waveform& w) {
        return std::isfinite(w.amplitude) && std::isfinite(w.frequency) && std::isfinite(w.offset);
    };
    if (const auto* tv = std::get_if<TimeVaryingUncertainty>(&unc)) {
        if (!finite(tv->delta[0]) || !finite(tv->delta[1])) throw ValidationError("uncertainty.delta must be finite");
    } else if (const auto* g = std::get_if<GravityUncertainty>(&unc)) {
        if (!finite(g->diagonal[0]) || !finite(g->diagonal[1])) {
            throw ValidationError("uncertainty.delta must be finite");
        }
    } else if (const auto* m = std::get_if<MixedUncertainty>(&unc)) {
        if (!m->delta.allFinite()) throw ValidationError("uncertainty.delta must be finite");
        if (!(m->c1 > 0.0)) throw ValidationError("uncertainty.c1 must be > 0");
        for (int i = 0; i <= samples; ++i) {
            const double t = horizon * static_cast<double>(i) / samples;
            const double norm = std::hypot(m->eta[0](t), m->eta[1](t));
            if (norm > m->c1 * (1.0 + 1e-12)) {
                throw ValidationError("uncertainty.eta exceeds its bound c1 at t=" + std::to_string(t));
            }
        }
    }
}

/// [q'; q''] for the uncertain arm under torque tau.
inline Vec4 plant_derivative(const ManipulatorParams& p, const PlantState& s, const Vec2& tau,
                             const UncertaintySpec& unc, double singular_tolerance = 1e-12) {
    const Mat2 H = inertia_matrix(p, s.q);
    if (std::abs(H.determinant()) < singular_tolerance) {
        throw SingularInertia("inertia matrix is singular at q=(" + std::to_string(s.q[0]) + ", " +
                              std::to_string(s.q[1]) + ")");
    }
    const Vec2 bias = coriolis_matrix(p, s.q, s.qdot) * s.qdot + gravity_vector(p, s.q);
    const Vec2 qddot = H.ldlt().solve(tau - bias) + uncertainty_term(p, unc, s.t, s.q);
    Vec4 out;
    out << s.qdot, qddot;
    return out;
}

}  // namespace esadapt
