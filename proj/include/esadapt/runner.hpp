#pragma once

// Scenario execution and file output: iterations.csv, trace_first.csv,
// trace_last.csv and a key: value manifest per run.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "esadapt/scenario.hpp"
#include "esadapt/sim.hpp"

namespace esadapt {

namespace fs = std::filesystem;

/// Shortest-safe round-trip text for a double: 17 significant digits,
/// '.' as decimal point regardless of locale.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// Estimator loop for a scenario; the synthetic benchmark skips the plant.
inline MesRun run_scenario(const Scenario& s) {
    s.validate();
    if (!s.synthetic()) return run_mes_loop(s.sim);

    const Vec2 target = *s.synthetic_target;
    auto cost = [&](const VectorXd& est) { return (est - target).squaredNorm(); };
    const auto history = seek(s.sim.mes, cost, s.sim.iterations, s.sim.dt);
    MesRun run;
    for (std::size_t k = 0; k + 1 < history.size(); ++k) {
        IterationRecord rec;
        rec.k = static_cast<long>(k);
        rec.delta_hat = history[k];
        rec.J = cost(history[k]);
        rec.delta_true = target;
        rec.max_z = 0.0;
        run.records.push_back(std::move(rec));
    }
    run.final_state = MesState::initial_for(s.sim.mes);
    run.final_state.delta_hat = history.back();
    run.final_state.k = s.sim.iterations;
    return run;
}

inline void write_iterations_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
    const auto p = records.empty() ? 0 : records.front().delta_hat.size();
    out << "iter,J";
    for (Eigen::Index i = 1; i <= p; ++i) out << ",delta_hat_" << i;
    for (Eigen::Index i = 1; i <= p; ++i) out << ",delta_true_" << i;
    out << ",max_z\n";
    for (const auto& r : records) {
        out << r.k << ',' << format_double(r.J);
        for (Eigen::Index i = 0; i < r.delta_hat.size(); ++i) out << ',' << format_double(r.delta_hat(i));
        for (Eigen::Index i = 0; i < r.delta_true.size(); ++i) out << ',' << format_double(r.delta_true(i));
        out << ',' << format_double(r.max_z) << '\n';
    }
}

inline void write_trace_csv(std::ostream& out, const EpisodeTrace& tr) {
    out << "t,q1,q2,qdot1,qdot2,qd1,qd2,qddot_d1,qddot_d2,tau1,tau2,z_norm\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double row[] = {tr.t[i],       tr.q[i][0],       tr.q[i][1],       tr.qdot[i][0],
                              tr.qdot[i][1], tr.qd[i][0],      tr.qd[i][1],      tr.qd_ddot[i][0],
                              tr.qd_ddot[i][1], tr.tau[i][0],  tr.tau[i][1],     tr.z_norm[i]};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            if (c) out << ',';
            out << format_double(row[c]);
        }
        out << '\n';
    }
}

namespace detail {

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Writes to a sibling temporary and renames over the destination.
template <class Writer>
void write_file_atomic(const fs::path& path, Writer&& writer) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, std::forward<Writer>(writer));
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace detail

struct SanityCheck {
    std::string name;
    bool passed = false;
};

struct RunManifest {
    std::string scenario;
    json config;
    fs::path out_dir;
    fs::path iterations_csv;
    fs::path trace_first_csv;
    fs::path trace_last_csv;
    fs::path manifest;
    double wall_clock_s = 0.0;
    std::vector<SanityCheck> checks;
    VectorXd final_delta_hat;
    double j_first = 0.0;
    double j_min = 0.0;
    double j_last = 0.0;

    [[nodiscard]] bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const SanityCheck& c) { return c.passed; });
    }
};

inline std::vector<SanityCheck> sanity_checks(const MesRun& run) {
    auto finite_trace = [](const EpisodeTrace& tr) {
        for (std::size_t i = 0; i < tr.size(); ++i) {
            if (!tr.q[i].allFinite() || !tr.qdot[i].allFinite() || !tr.tau[i].allFinite() ||
                !std::isfinite(tr.z_norm[i]))
                return false;
        }
        return true;
    };
    const bool costs_finite =
        std::all_of(run.records.begin(), run.records.end(), [](const auto& r) { return std::isfinite(r.J); });
    const bool costs_nonneg =
        std::all_of(run.records.begin(), run.records.end(), [](const auto& r) { return r.J >= 0.0; });
    return {{"costs_finite", costs_finite},
            {"costs_nonnegative", costs_nonneg},
            {"traces_finite", finite_trace(run.first_trace) && finite_trace(run.last_trace)},
            {"estimate_finite", run.final_state.delta_hat.allFinite()}};
}

inline void write_manifest(std::ostream& out, const RunManifest& m) {
    out << "scenario: " << m.scenario << '\n';
    out << "config: " << m.config.dump() << '\n';
    out << "out_dir: " << m.out_dir.string() << '\n';
    out << "iterations_csv: " << m.iterations_csv.string() << '\n';
    out << "trace_first_csv: " << m.trace_first_csv.string() << '\n';
    out << "trace_last_csv: " << m.trace_last_csv.string() << '\n';
    out << "wall_clock_s: " << format_double(m.wall_clock_s) << '\n';
    out << "J_first: " << format_double(m.j_first) << '\n';
    out << "J_min: " << format_double(m.j_min) << '\n';
    out << "J_last: " << format_double(m.j_last) << '\n';
    out << "final_delta_hat:";
    for (Eigen::Index i = 0; i < m.final_delta_hat.size(); ++i) {
        out << (i ? ", " : " ") << format_double(m.final_delta_hat(i));
    }
    out << '\n';
    for (const auto& c : m.checks) out << "check." << c.name << ": " << (c.passed ? "pass" : "fail") << '\n';
    out << "status: " << (m.passed() ? "pass" : "fail") << '\n';
}

/// Runs the scenario and writes every artifact into `out_dir`.
inline RunManifest run_command(const Scenario& s, const fs::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    const MesRun run = run_scenario(s);

    RunManifest m;
    m.scenario = s.name;
    m.config = to_json(s);
    m.out_dir = out_dir;
    m.iterations_csv = out_dir / "iterations.csv";
    m.trace_first_csv = out_dir / "trace_first.csv";
    m.trace_last_csv = out_dir / "trace_last.csv";
    m.manifest = out_dir / "manifest";
    detail::write_file(m.iterations_csv, [&](std::ostream& o) { write_iterations_csv(o, run.records); });
    detail::write_file(m.trace_first_csv, [&](std::ostream& o) { write_trace_csv(o, run.first_trace); });
    detail::write_file(m.trace_last_csv, [&](std::ostream& o) { write_trace_csv(o, run.last_trace); });

    m.checks = sanity_checks(run);
    m.final_delta_hat = run.final_state.delta_hat;
    m.j_first = run.records.front().J;
    m.j_last = run.records.back().J;
    m.j_min = std::min_element(run.records.begin(), run.records.end(), [](const auto& a, const auto& b) {
                  return a.J < b.J;
              })->J;
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail::write_file_atomic(m.manifest, [&](std::ostream& o) { write_manifest(o, m); });
    return m;
}

// --- sweeps -------------------------------------------------------------------

struct SweepEntry {
    std::string name;
    Scenario scenario;
};

struct SweepPlan {
    fs::path out_root;
    unsigned jobs = 0;  // 0 = hardware concurrency
    std::vector<SweepEntry> entries;
};

struct SweepResult {
    std::string name;
    bool ok = false;
    int exit_code = 0;
    std::string error;
    RunManifest manifest;
};

/// Sweep document: {"out": DIR?, "jobs": N?, "runs": [ {"name": .., "set": ["k=v", ..], <config keys>..}, .. ]}.
/// `default_root` applies when the document has no "out".
inline SweepPlan parse_sweep(const json& doc, const fs::path& default_root) {
    if (!doc.is_object()) throw SchemaError("sweep document must be a JSON object");
    SweepPlan plan;
    plan.out_root = default_root;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "out" && it.key() != "jobs" && it.key() != "runs") {
            throw SchemaError("unknown key '" + it.key() + "' in sweep document");
        }
    }
    if (doc.contains("out")) {
        if (!doc["out"].is_string()) throw SchemaError("key 'out': expected a string");
        plan.out_root = doc["out"].get<std::string>();
    }
    if (doc.contains("jobs")) {
        const json& j = doc["jobs"];
        if (!j.is_number_integer() || j.get<long long>() < 0) {
            throw SchemaError("key 'jobs': expected a non-negative integer");
        }
        plan.jobs = j.get<unsigned>();
    }
    if (!doc.contains("runs") || !doc["runs"].is_array() || doc["runs"].empty()) {
        throw SchemaError("key 'runs': expected a non-empty array");
    }
    std::vector<std::string> names;
    for (std::size_t i = 0; i < doc["runs"].size(); ++i) {
        json entry = doc["runs"][i];
        if (!entry.is_object()) throw SchemaError("runs." + std::to_string(i) + ": expected an object");
        std::vector<std::string> sets;
        if (entry.contains("set")) {
            const json& v = entry["set"];
            if (!v.is_array()) throw SchemaError("runs." + std::to_string(i) + ".set: expected an array of strings");
            for (const auto& e : v) {
                if (!e.is_string()) throw SchemaError("runs." + std::to_string(i) + ".set: expected strings");
                sets.push_back(e.get<std::string>());
            }
            entry.erase("set");
        }
        std::string name;
        if (entry.contains("name")) {
            if (!entry["name"].is_string()) throw SchemaError("runs." + std::to_string(i) + ".name: expected a string");
            name = entry["name"].get<std::string>();
            entry.erase("name");
        }
        Scenario s = parse_config(entry, std::nullopt, sets);
        if (name.empty()) name = s.name + "_" + std::to_string(i);
        if (name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
            throw ValidationError("runs." + std::to_string(i) + ".name must be a plain directory name");
        }
        if (std::find(names.begin(), names.end(), name) != names.end()) {
            throw ValidationError("runs." + std::to_string(i) + ".name '" + name + "' is not unique");
        }
        names.push_back(name);
        plan.entries.push_back({name, std::move(s)});
    }
    return plan;
}

/// Runs every entry into out_root/<name>, at most `jobs` at a time. Each run
/// owns its scenario copy and directory.
inline std::vector<SweepResult> run_sweep(const SweepPlan& plan) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned jobs = plan.jobs == 0 ? hw : plan.jobs;
    std::vector<SweepResult> results(plan.entries.size());

    auto work = [&](std::size_t i) {
        SweepResult r;
        r.name = plan.entries[i].name;
        try {
            r.manifest = run_command(plan.entries[i].scenario, plan.out_root / r.name);
            r.ok = r.manifest.passed();
            r.exit_code = r.ok ? 0 : 2;
        } catch (const ValidationError& e) {
            r.error = e.what();
            r.exit_code = 1;
        } catch (const SchemaError& e) {
            r.error = e.what();
            r.exit_code = 1;
        } catch (const std::exception& e) {
            r.error = e.what();
            r.exit_code = 2;
        }
        return r;
    };

    std::size_t next = 0;
    while (next < plan.entries.size()) {
        std::vector<std::pair<std::size_t, std::future<SweepResult>>> batch;
        for (unsigned j = 0; j < jobs && next < plan.entries.size(); ++j, ++next) {
            batch.emplace_back(next, std::async(std::launch::async, work, next));
        }
        for (auto& [i, f] : batch) results[i] = f.get();
    }
    return results;
}

}  // namespace esadapt
