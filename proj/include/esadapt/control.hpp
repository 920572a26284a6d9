#pragma once

// Nominal feedback-linearizing law and the three ISS robust terms.
// Every law returns an input in the plant's u-coordinates; for the arm u = tau.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "esadapt/errors.hpp"
#include "esadapt/linearizer.hpp"

namespace esadapt {

inline constexpr double kConditionLimit = 1e10;

/// y^(r) = b + A u at the current state, plus the known bounding functions
/// L (state-dependent case) and Q (mixed case).
struct LinearizedPlantView {
    VectorXd b;
    MatrixXd A;
    MatrixXd A_inv;
    VectorXd L;
    VectorXd Q;

    /// Builds a view from A, inverting it behind the condition guard.
    static LinearizedPlantView from_input_matrix(VectorXd b, MatrixXd A, VectorXd L = {}, VectorXd Q = {}) {
        guard_condition(A);
        MatrixXd A_inv = A.fullPivLu().inverse();
        return {std::move(b), std::move(A), std::move(A_inv), std::move(L), std::move(Q)};
    }

    /// Builds a view when A^-1 is known analytically (e.g. A^-1 = H for the arm).
    static LinearizedPlantView from_inverse(VectorXd b, MatrixXd A_inv, VectorXd L = {}, VectorXd Q = {}) {
        guard_condition(A_inv);
        MatrixXd A = A_inv.fullPivLu().inverse();
        return {std::move(b), std::move(A), std::move(A_inv), std::move(L), std::move(Q)};
    }

    static double condition_number(const MatrixXd& M) {
        const Eigen::JacobiSVD<MatrixXd> svd(M);
        const auto& s = svd.singularValues();
        if (s.size() == 0) return 0.0;
        const double smallest = s(s.size() - 1);
        return smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
    }

    static void guard_condition(const MatrixXd& M) {
        if (M.rows() != M.cols()) throw DimensionMismatch("input matrix must be square");
        if (!M.allFinite()) throw IllConditioned("input matrix has non-finite entries");
        const double cond = condition_number(M);
        if (!(cond < kConditionLimit)) {
            throw IllConditioned("input matrix condition number " + std::to_string(cond) + " exceeds 1e10");
        }
    }
};

/// Which robust term is added on top of the nominal law.
struct RobustCase {
    enum class Kind { None, Case1, Case2, Case3 };
    Kind kind = Kind::None;
    double c1 = 0.0;  // Case3 only: bound on ||eta(t)||

    static constexpr RobustCase none() { return {Kind::None, 0.0}; }
    static constexpr RobustCase case1() { return {Kind::Case1, 0.0}; }
    static constexpr RobustCase case2() { return {Kind::Case2, 0.0}; }
    static constexpr RobustCase case3(double c1) { return {Kind::Case3, c1}; }

    void validate() const {
        if (kind == Kind::Case3 && !(c1 > 0.0)) throw ValidationError("robust.c1 must be > 0 for case3");
    }

    bool operator==(const RobustCase&) const = default;
};

inline std::string_view to_string(RobustCase::Kind kind) {
    switch (kind) {
        case RobustCase::Kind::Case1:
            return "case1";
        case RobustCase::Kind::Case2:
            return "case2";
        case RobustCase::Kind::Case3:
            return "case3";
        case RobustCase::Kind::None:
            break;
    }
    return "none";
}

inline RobustCase::Kind robust_kind_from_string(std::string_view name) {
    if (name == "none") return RobustCase::Kind::None;
    if (name == "case1") return RobustCase::Kind::Case1;
    if (name == "case2") return RobustCase::Kind::Case2;
    if (name == "case3") return RobustCase::Kind::Case3;
    throw SchemaError("unknown robust case '" + std::string(name) + "' (expected none|case1|case2|case3)");
}

/// Componentwise signum with sign(0) = 0, or the boundary-layer saturation
/// sat(x / epsilon) when epsilon > 0.
struct SignFunction {
    double epsilon = 0.0;

    [[nodiscard]] double operator()(double x) const {
        if (epsilon > 0.0) return std::clamp(x / epsilon, -1.0, 1.0);
        return static_cast<double>((x > 0.0) - (x < 0.0));
    }

    [[nodiscard]] VectorXd operator()(const VectorXd& x) const {
        return x.unaryExpr([this](double v) { return (*this)(v); });
    }

    [[nodiscard]] bool exact() const { return !(epsilon > 0.0); }
};

/// Induced 2-norm.
inline double spectral_norm(const MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues()(0);
}

/// u_n = A^-1 (v_s - b) with v_si = y_id^(r_i) - sum_j K^i_j e_i^(j-1).
/// `reference_top` holds y_id^(r_i) for each output.
inline VectorXd nominal_control(const LinearizedPlantView& view, const ControllerGains& gains, const ErrorState& z,
                                const VectorXd& reference_top) {
    const auto m = static_cast<Eigen::Index>(gains.rows.size());
    if (reference_top.size() != m || view.b.size() != m || view.A_inv.rows() != m ||
        z.relative_degree.size() != gains.rows.size()) {
        throw DimensionMismatch("nominal_control: inconsistent output dimension");
    }
    VectorXd v = reference_top;
    Eigen::Index offset = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& k = gains.rows[static_cast<std::size_t>(i)];
        if (k.size() != z.relative_degree[static_cast<std::size_t>(i)]) {
            throw DimensionMismatch("nominal_control: gain row does not match relative degree");
        }
        v(i) -= k.dot(z.z.segment(offset, k.size()));
        offset += k.size();
    }
    return view.A_inv * (v - view.b);
}

/// u_r = -A^-1 (Btilde^T P z + delta_hat)
inline VectorXd robust_control_case1(const LinearizedPlantView& view, const CertifiedErrorDynamics& dyn,
                                     const VectorXd& z, const VectorXd& delta_hat) {
    if (delta_hat.size() != dyn.output_dim()) throw DimensionMismatch("case1: delta_hat must have m entries");
    return -view.A_inv * (dyn.sliding_vector(z) + delta_hat);
}

/// u_r = -A^-1 Btilde^T P z ||L||^2 - A^-1 ||delta_hat|| ||L|| sign(Btilde^T P z)
inline VectorXd robust_control_case2(const LinearizedPlantView& view, const CertifiedErrorDynamics& dyn,
                                     const VectorXd& z, double delta_hat_norm, SignFunction sign = {}) {
    if (view.L.size() == 0) throw DimensionMismatch("case2: plant view has no L(xi)");
    const VectorXd s = dyn.sliding_vector(z);
    const double l_norm = view.L.norm();
    return -view.A_inv * (s * (l_norm * l_norm) + delta_hat_norm * l_norm * sign(s));
}

/// u_r = -A^-1 [Btilde^T P z ||Q||^2 + delta_hat Q + ||delta_hat|| C1 sign(Btilde^T P z) + Btilde^T P z C1^2]
inline VectorXd robust_control_case3(const LinearizedPlantView& view, const CertifiedErrorDynamics& dyn,
                                     const VectorXd& z, const MatrixXd& delta_hat, double c1,
                                     SignFunction sign = {}) {
    const auto m = dyn.output_dim();
    if (view.Q.size() != m) throw DimensionMismatch("case3: plant view has no Q(xi) of length m");
    if (delta_hat.rows() != m || delta_hat.cols() != m) throw DimensionMismatch("case3: delta_hat must be m x m");
    const VectorXd s = dyn.sliding_vector(z);
    const double q_norm = view.Q.norm();
    return -view.A_inv *
           (s * (q_norm * q_norm) + delta_hat * view.Q + spectral_norm(delta_hat) * c1 * sign(s) + s * (c1 * c1));
}

inline VectorXd total_control(const VectorXd& u_n, const VectorXd& u_r) {
    if (u_n.size() != u_r.size()) throw DimensionMismatch("total_control: u_n and u_r differ in length");
    return u_n + u_r;
}

/// Robust term for a parameter-vector estimate. Case 2 and 3 read the
/// estimate as the diagonal matrix diag(delta_hat).
inline VectorXd robust_control(const RobustCase& rc, const LinearizedPlantView& view,
                               const CertifiedErrorDynamics& dyn, const VectorXd& z, const VectorXd& delta_hat,
                               SignFunction sign = {}) {
    switch (rc.kind) {
        case RobustCase::Kind::Case1:
            return robust_control_case1(view, dyn, z, delta_hat);
        case RobustCase::Kind::Case2:
            return robust_control_case2(view, dyn, z, delta_hat.cwiseAbs().maxCoeff(), sign);
        case RobustCase::Kind::Case3:
            return robust_control_case3(view, dyn, z, delta_hat.asDiagonal().toDenseMatrix(), rc.c1, sign);
        case RobustCase::Kind::None:
            break;
    }
    return VectorXd::Zero(dyn.output_dim());
}

}  // namespace esadapt
