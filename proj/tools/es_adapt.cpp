#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esadapt/runner.hpp"
#include "esadapt/scenario.hpp"
#include "esadapt/validation.hpp"

namespace fs = std::filesystem;
using namespace esadapt;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kRuntime = 2 };

fs::path output_root() {
    if (const char* env = std::getenv("ES_ADAPT_OUT"); env && *env) return env;
    return "runs";
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string help_footer() {
    std::string out = "\n";
    out += kConfigKeyHelp;
    out += "\nPresets:\n";
    for (const auto& p : kPresets) {
        out += "  " + std::string(p.name);
        out.append(p.name.size() < 20 ? 20 - p.name.size() : 1, ' ');
        out += std::string(p.provenance) + "\n";
    }
    out += "\nEnvironment:\n  ES_ADAPT_OUT        default output root (run writes to $ES_ADAPT_OUT/<scenario>)\n";
    out += "\nExit status: 0 success, 1 validation or schema error, 2 runtime failure.\n";
    return out;
}

template <class F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kRuntime;
    }
}

void print_summary(const RunManifest& m) {
    std::cout << "scenario " << m.scenario << ": J(0) = " << format_double(m.j_first)
              << ", min J = " << format_double(m.j_min) << ", final estimate =";
    for (Eigen::Index i = 0; i < m.final_delta_hat.size(); ++i) std::cout << ' ' << format_double(m.final_delta_hat(i));
    std::cout << "\n  manifest: " << m.manifest.string() << " (" << (m.passed() ? "pass" : "fail") << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Extremum-seeking adaptive control of a two-link arm: simulation and validation."};
    app.footer(help_footer());
    app.require_subcommand(1);

    std::optional<std::string> scenario;
    std::optional<std::string> config_file;
    std::optional<int> iterations;
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;

    auto* run = app.add_subcommand("run", "Run one scenario and write iterations.csv, trace_*.csv and manifest");
    run->add_option("--scenario", scenario, "Preset name (see Presets below)");
    run->add_option("--config", config_file, "JSON configuration document")->check(CLI::ExistingFile);
    run->add_option("--iterations", iterations, "Override the number of cycles")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (default $ES_ADAPT_OUT/<scenario> or runs/<scenario>)");
    run->add_option("--set", sets, "Override a config key, e.g. --set mes.frequency=[7,8]")->allow_extra_args(false);

    std::optional<std::string> v_scenario;
    std::vector<std::string> v_sets;
    auto* validate = app.add_subcommand("validate", "Run the invariant suites and print a per-check table");
    validate->add_option("--scenario", v_scenario, "Preset whose gains and arm constants are checked (default nominal)");
    validate->add_option("--set", v_sets, "Override a config key before checking");

    std::string sweep_file;
    auto* sweep = app.add_subcommand("sweep", "Run several configurations concurrently, one subdirectory each");
    sweep->add_option("--config", sweep_file, "Sweep document")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    if (*run) {
        return guarded([&] {
            std::string text;
            if (config_file) text = read_text(*config_file);
            std::vector<std::string> overrides = sets;
            if (iterations) overrides.push_back("iterations=" + std::to_string(*iterations));
            const Scenario s = parse_config_text(text, scenario, overrides);
            const fs::path dir = out_dir ? fs::path(*out_dir) : output_root() / s.name;
            const RunManifest m = run_command(s, dir);
            print_summary(m);
            return m.passed() ? kOk : kRuntime;
        });
    }

    if (*validate) {
        return guarded([&] {
            const Scenario s = parse_config(json(), v_scenario.value_or("nominal"), v_sets, false);
            const auto results = run_validation(s.sim);
            bool ok = true;
            std::printf("%-26s %-6s %-24s %s\n", "check", "result", "measured", "threshold");
            for (const auto& r : results) {
                const char* verdict = r.passed ? "pass" : (r.gating ? "FAIL" : "info");
                std::printf("%-26s %-6s %-24s %s\n", r.name.c_str(), verdict, format_double(r.measured).c_str(),
                            r.threshold.c_str());
                if (!r.detail.empty()) std::printf("    %s\n", r.detail.c_str());
                ok = ok && (r.passed || !r.gating);
            }
            std::printf("%s\n", ok ? "all checks pass" : "validation failed");
            return ok ? kOk : kInvalid;
        });
    }

    return guarded([&] {
        json doc;
        try {
            doc = json::parse(read_text(sweep_file));
        } catch (const json::parse_error& e) {
            throw SchemaError(std::string("sweep document is not valid JSON: ") + e.what());
        }
        const SweepPlan plan = parse_sweep(doc, output_root());
        const auto results = run_sweep(plan);
        int worst = kOk;
        for (const auto& r : results) {
            if (r.exit_code == kOk) {
                print_summary(r.manifest);
            } else {
                std::cerr << r.name << ": " << (r.error.empty() ? "sanity checks failed" : r.error) << '\n';
            }
            worst = std::max(worst, r.exit_code);
        }
        return worst;
    });
}
