#pragma once

// Tracking-error coordinates for an input-output linearized plant
//   y^(r) = b(xi) + A(xi) u
// and the Lyapunov certificate for the nominal error dynamics z' = Atilde z.

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esadapt/errors.hpp"

namespace esadapt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Hurwitz threshold on companion eigenvalue real parts.
inline constexpr double kHurwitzMargin = -1e-9;

/// Per-output feedback gains. rows[i] = [K^i_1, ..., K^i_{r_i}], so the
/// error polynomial of output i is s^{r_i} + K^i_{r_i} s^{r_i-1} + ... + K^i_1.
struct ControllerGains {
    std::vector<VectorXd> rows;

    static ControllerGains uniform(const std::vector<int>& relative_degree, double value) {
        ControllerGains g;
        for (int r : relative_degree) g.rows.push_back(VectorXd::Constant(r, value));
        return g;
    }

    [[nodiscard]] std::vector<int> relative_degree() const {
        std::vector<int> r;
        for (const auto& row : rows) r.push_back(static_cast<int>(row.size()));
        return r;
    }
};

inline MatrixXd companion_block(const VectorXd& k) {
    const auto r = k.size();
    MatrixXd block = MatrixXd::Zero(r, r);
    for (Eigen::Index i = 0; i + 1 < r; ++i) block(i, i + 1) = 1.0;
    block.row(r - 1) = -k.transpose();
    return block;
}

/// Largest real part among the eigenvalues of the companion block for k.
inline double spectral_abscissa(const VectorXd& k) {
    const Eigen::EigenSolver<MatrixXd> es(companion_block(k), false);
    return es.eigenvalues().real().maxCoeff();
}

inline bool is_hurwitz(const ControllerGains& gains) {
    for (const auto& row : gains.rows) {
        if (row.size() == 0 || !(spectral_abscissa(row) < kHurwitzMargin)) return false;
    }
    return true;
}

/// Solves A^T P + P A = -I for symmetric P through the r(r+1)/2 independent
/// unknowns of P.
inline MatrixXd solve_lyapunov(const MatrixXd& A) {
    const Eigen::Index n = A.rows();
    std::vector<std::pair<Eigen::Index, Eigen::Index>> unknowns;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) unknowns.emplace_back(i, j);

    const auto count = static_cast<Eigen::Index>(unknowns.size());
    MatrixXd M = MatrixXd::Zero(count, count);
    VectorXd rhs = VectorXd::Zero(count);
    // Row (i, j), i <= j: sum_k A(k,i) P(k,j) + P(i,k) A(k,j) = -delta_ij
    auto index_of = [n](Eigen::Index i, Eigen::Index j) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i - 1) / 2 + (j - i);
    };
    for (Eigen::Index row = 0; row < count; ++row) {
        const auto [i, j] = unknowns[static_cast<std::size_t>(row)];
        for (Eigen::Index k = 0; k < n; ++k) {
            M(row, index_of(k, j)) += A(k, i);
            M(row, index_of(i, k)) += A(k, j);
        }
        rhs(row) = (i == j) ? -1.0 : 0.0;
    }

    const Eigen::FullPivLU<MatrixXd> lu(M);
    if (!lu.isInvertible() || lu.rcond() < 1e-14) {
        throw LyapunovSolveFailed("Lyapunov linear system is numerically singular");
    }
    const VectorXd x = lu.solve(rhs);
    MatrixXd P(n, n);
    for (Eigen::Index row = 0; row < count; ++row) {
        const auto [i, j] = unknowns[static_cast<std::size_t>(row)];
        P(i, j) = x(row);
        P(j, i) = x(row);
    }
    return P;
}

/// Atilde, Btilde and the Lyapunov matrix P for a set of Hurwitz gains.
struct CertifiedErrorDynamics {
    MatrixXd Atilde;
    MatrixXd Btilde;
    MatrixXd P;
    std::vector<int> relative_degree;

    [[nodiscard]] Eigen::Index state_dim() const { return Atilde.rows(); }
    [[nodiscard]] Eigen::Index output_dim() const { return Btilde.cols(); }

    /// max-abs entry of Atilde^T P + P Atilde + I
    [[nodiscard]] double lyapunov_residual() const {
        const auto n = state_dim();
        return (Atilde.transpose() * P + P * Atilde + MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    }

    /// Btilde^T P z: the "sliding" combination that every robust law feeds back.
    [[nodiscard]] VectorXd sliding_vector(const VectorXd& z) const { return Btilde.transpose() * (P * z); }

    [[nodiscard]] double storage(const VectorXd& z) const { return z.dot(P * z); }
};

inline CertifiedErrorDynamics build_error_dynamics(const ControllerGains& gains,
                                                   const std::vector<int>& relative_degree) {
    if (gains.rows.size() != relative_degree.size()) {
        throw DimensionMismatch("gains describe " + std::to_string(gains.rows.size()) + " outputs but " +
                                std::to_string(relative_degree.size()) + " relative degrees were given");
    }
    for (std::size_t i = 0; i < gains.rows.size(); ++i) {
        if (relative_degree[i] < 1 || gains.rows[i].size() != relative_degree[i]) {
            throw DimensionMismatch("gain row " + std::to_string(i + 1) + " does not match relative degree " +
                                    std::to_string(relative_degree[i]));
        }
        const double abscissa = spectral_abscissa(gains.rows[i]);
        if (!(abscissa < kHurwitzMargin)) {
            throw NotHurwitz("error polynomial of output " + std::to_string(i + 1) +
                             " is not Hurwitz (max eigenvalue real part " + std::to_string(abscissa) + ")");
        }
    }

    const int n = std::accumulate(relative_degree.begin(), relative_degree.end(), 0);
    const auto m = static_cast<Eigen::Index>(relative_degree.size());
    CertifiedErrorDynamics out;
    out.relative_degree = relative_degree;
    out.Atilde = MatrixXd::Zero(n, n);
    out.Btilde = MatrixXd::Zero(n, m);
    out.P = MatrixXd::Zero(n, n);

    Eigen::Index offset = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const int r = relative_degree[static_cast<std::size_t>(i)];
        const MatrixXd block = companion_block(gains.rows[static_cast<std::size_t>(i)]);
        out.Atilde.block(offset, offset, r, r) = block;
        out.P.block(offset, offset, r, r) = solve_lyapunov(block);
        out.Btilde(offset + r - 1, i) = 1.0;
        offset += r;
    }
    return out;
}

/// Stacked tracking error z = [z^1, ..., z^m], z^i = [e_i, e_i', ..., e_i^(r_i-1)].
struct ErrorState {
    VectorXd z;
    std::vector<int> relative_degree;

    /// e_i^(j), zero-based derivative order j.
    [[nodiscard]] double component(std::size_t output, int order) const {
        Eigen::Index offset = 0;
        for (std::size_t i = 0; i < output; ++i) offset += relative_degree[i];
        return z(offset + order);
    }

    /// Inverse of pack_error_state: per-output error derivative stacks.
    [[nodiscard]] std::vector<VectorXd> unpack() const {
        std::vector<VectorXd> out;
        Eigen::Index offset = 0;
        for (int r : relative_degree) {
            out.emplace_back(z.segment(offset, r));
            offset += r;
        }
        return out;
    }
};

/// outputs[i] / reference[i] hold [y_i, y_i', ..., y_i^(r_i-1)] (reference
/// stacks may be longer; extra derivatives are ignored).
inline ErrorState pack_error_state(const std::vector<VectorXd>& outputs, const std::vector<VectorXd>& reference,
                                   const std::vector<int>& relative_degree) {
    if (outputs.size() != relative_degree.size() || reference.size() != relative_degree.size()) {
        throw DimensionMismatch("output/reference stacks do not match the number of outputs");
    }
    ErrorState out;
    out.relative_degree = relative_degree;
    out.z.resize(std::accumulate(relative_degree.begin(), relative_degree.end(), 0));
    Eigen::Index offset = 0;
    for (std::size_t i = 0; i < relative_degree.size(); ++i) {
        const int r = relative_degree[i];
        if (outputs[i].size() != r || reference[i].size() < r) {
            throw DimensionMismatch("derivative stack of output " + std::to_string(i + 1) +
                                    " does not have length r_i=" + std::to_string(r));
        }
        out.z.segment(offset, r) = outputs[i] - reference[i].head(r);
        offset += r;
    }
    return out;
}

}  // namespace esadapt
