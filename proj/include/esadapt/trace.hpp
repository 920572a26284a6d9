#pragma once

#include <vector>

#include "esadapt/manipulator.hpp"

namespace esadapt {

/// One closed-loop cycle sampled on a uniform grid t_0 = 0, ..., t_N = t_f.
struct EpisodeTrace {
    std::vector<double> t;
    std::vector<Vec2> q;
    std::vector<Vec2> qdot;
    std::vector<Vec2> qd;
    std::vector<Vec2> qd_dot;
    std::vector<Vec2> qd_ddot;
    std::vector<Vec2> tau;
    std::vector<double> z_norm;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    [[nodiscard]] bool empty() const { return t.empty(); }

    void reserve(std::size_t n) {
        t.reserve(n);
        q.reserve(n);
        qdot.reserve(n);
        qd.reserve(n);
        qd_dot.reserve(n);
        qd_ddot.reserve(n);
        tau.reserve(n);
        z_norm.reserve(n);
    }
};

}  // namespace esadapt
