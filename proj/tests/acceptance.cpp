// Acceptance gate: one line per criterion, nonzero exit if any selected
// criterion fails. `acceptance --criterion 4 --criterion 9` runs a subset.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esadapt/runner.hpp"
#include "esadapt/validation.hpp"

using namespace esadapt;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool passed = false;
    std::string measured;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double min_j(const std::vector<IterationRecord>& r, std::size_t upto) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r.size() && k <= upto; ++k) best = std::min(best, r[k].J);
    return best;
}

std::vector<std::pair<std::string, MesRun>> state_dependent_runs() {
    std::vector<std::pair<std::string, MesRun>> out;
    for (double eps : {0.0, 1e-3}) {
        Scenario s = make_preset("state_dep_case2");
        s.sim.sign.epsilon = eps;
        out.emplace_back(eps == 0.0 ? "exact sign" : "sat eps=1e-3", run_scenario(s));
    }
    return out;
}

Verdict c1() {
    Verdict v{true, {}};
    for (const auto& [label, run] : state_dependent_runs()) {
        const double j0 = run.records.front().J;
        const double jmin = min_j(run.records, 100);
        v.passed = v.passed && j0 >= 3.0 && j0 <= 9.0 && jmin < 1.0;
        v.measured += label + ": J(0)=" + fmt(j0) + " min J=" + fmt(jmin) + "; ";
    }
    return v;
}

Verdict c2() {
    Verdict v{true, {}};
    for (const auto& [label, run] : state_dependent_runs()) {
        const VectorXd& est = run.final_state.delta_hat;
        v.passed = v.passed && std::abs(est(0) + 1.0) < 0.5 && std::abs(est(1) + 3.0) < 1.0;
        v.measured += label + ": final estimate (" + fmt(est(0)) + ", " + fmt(est(1)) + "); ";
    }
    return v;
}

Verdict c3() {
    const MesRun run = run_scenario(make_preset("timevar_case1"));
    const double j0 = run.records.front().J;
    const double jmin = min_j(run.records, 20);
    return {j0 >= 3.5 && j0 <= 10.5 && jmin < 2.0, "J(0)=" + fmt(j0) + " min_{k<=20} J=" + fmt(jmin)};
}

Verdict c4() {
    const auto dyn = build_error_dynamics(ControllerGains::uniform({2, 2}, 1.0), {2, 2});
    MatrixXd expected = MatrixXd::Zero(4, 4);
    expected.block(0, 0, 2, 2) << 1.5, 0.5, 0.5, 1.0;
    expected.block(2, 2, 2, 2) << 1.5, 0.5, 0.5, 1.0;
    const double dp = (dyn.P - expected).cwiseAbs().maxCoeff();
    const double res = dyn.lyapunov_residual();
    return {dp < 1e-10 && res < 1e-10, "max|P-P*|=" + fmt(dp) + " residual=" + fmt(res)};
}

Verdict c5() {
    const ManipulatorParams p;
    const auto grid = checks::inertia_grid(p, 50);
    const double skew = checks::skew_residual(p, 10, 1e-6);
    return {grid.passed && skew < 1e-6, "min leading minor=" + fmt(grid.measured) + " skew residual=" + fmt(skew)};
}

Verdict c6() {
    const EpisodeTrace tr = run_episode(make_preset("nominal").sim, VectorXd::Zero(2));
    const double peak = *std::max_element(tr.z_norm.begin(), tr.z_norm.end());
    return {peak < 1e-6, "max ||z||=" + fmt(peak)};
}

Verdict c7() {
    const auto o = checks::iss_case1_ordering(make_preset("nominal").sim);
    std::string m = "ceilings";
    for (std::size_t i = 0; i < o.ceilings.size(); ++i) m += " " + fmt(o.e_norms[i]) + ":" + fmt(o.ceilings[i]);
    m += " ||z(4)|| at 0: " + fmt(o.final_z_at_zero);
    return {o.increasing && o.final_z_at_zero < 1e-4, m};
}

Verdict c8() {
    const Scenario s = make_preset("synthetic_quadratic");
    const double bound = checks::dither_radius(s.sim.mes) + 0.1;
    const double best = checks::synthetic_closest_approach(s.sim.mes, *s.synthetic_target, 500);
    return {best <= bound, "closest distance=" + fmt(best) + " bound=" + fmt(bound)};
}

Verdict c9() {
    const auto study = checks::rk4_order(checks::order_study_config());
    return {std::abs(study.slope - 4.0) <= 0.5, "slope=" + fmt(study.slope) + " errors " + fmt(study.errors[0]) +
                                                    " " + fmt(study.errors[1]) + " " + fmt(study.errors[2])};
}

Verdict c10() {
    const fs::path root = fs::temp_directory_path() / "esadapt_acceptance_determinism";
    fs::remove_all(root);
    Verdict v{true, {}};
    for (const auto& info : kPresets) {
        const Scenario s = make_preset(info.name);
        std::string bytes[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / (std::string(info.name) + "_" + std::to_string(rep));
            run_command(s, dir);
            std::ifstream in(dir / "iterations.csv", std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            bytes[rep] = ss.str();
        }
        const bool same = !bytes[0].empty() && bytes[0] == bytes[1];
        v.passed = v.passed && same;
        v.measured += std::string(info.name) + (same ? " identical; " : " DIFFERS; ");
    }
    fs::remove_all(root);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<std::string, std::function<Verdict()>>> criteria{
        {1, {"state-dependent benchmark: J(0) in [3,9], min J < 1 within 100 iterations", c1}},
        {2, {"parameter recovery: |est1+1| < 0.5, |est2+3| < 1 after 100 iterations", c2}},
        {3, {"time-varying benchmark: J(0) in [3.5,10.5], min J < 2 within 20 iterations", c3}},
        {4, {"Lyapunov certificate for unit gains", c4}},
        {5, {"inertia symmetric PD on 50x50 grid, Hdot-2C skew residual < 1e-6", c5}},
        {6, {"nominal matched start keeps ||z|| < 1e-6", c6}},
        {7, {"case-1 ISS ordering in frozen estimation error", c7}},
        {8, {"discrete MES on synthetic quadratic within sqrt(sum a^2)+0.1 in 500 iterations", c8}},
        {9, {"RK4 global error slope 4 +- 0.5", c9}},
        {10, {"byte-identical iterations.csv across repeated runs of every preset", c10}},
    };

    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number (repeatable); default all")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty()) {
        for (const auto& [n, _] : criteria) selected.push_back(n);
    }

    int failures = 0;
    for (int n : selected) {
        const auto& [title, fn] = criteria.at(n);
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %2d: %s  %s | %s\n", n, v.passed ? "PASS" : "FAIL", title.c_str(), v.measured.c_str());
        std::fflush(stdout);
        failures += v.passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
