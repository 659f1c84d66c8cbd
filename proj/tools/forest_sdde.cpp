// Command-line front end: run, verify, sweep, equilibrium.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "forest/errors.hpp"
#include "forest/integrator.hpp"
#include "forest/io.hpp"
#include "forest/verify.hpp"

namespace {

using namespace forest;

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kVerification = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open config file " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Loaded {
    ModelConfig config;
    IntegratorSettings settings;
};

Loaded load(const std::string& path, std::optional<double> h, std::optional<double> t_end,
            std::optional<int> reanchor) {
    const std::string text = read_file(path);
    Loaded out{io::parse_config_text(text), io::parse_settings_text(text)};
    if (h) {
        out.settings.h = *h;
    }
    if (t_end) {
        out.settings.t_end = *t_end;
    }
    if (reanchor) {
        out.settings.reanchor_every = *reanchor;
    }
    out.settings.validate();
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write " + path);
    }
    out << text;
}

int run_command(const std::string& config_path, std::optional<double> t_end, std::optional<double> h,
                std::optional<int> reanchor, const std::string& out_path) {
    const auto loaded = load(config_path, h, t_end, reanchor);
    const auto result = solve(loaded.config, loaded.settings);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write " + out_path);
    }
    io::write_trajectory_csv(out, result);
    write_text(out_path + ".meta.json",
               io::run_metadata(loaded.config, result, loaded.settings).dump(2) + "\n");
    return kOk;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

int verify_command(const std::string& config_path, const std::string& suites, std::optional<double> t_end,
                   std::optional<double> h, const std::string& out_path) {
    const auto loaded = load(config_path, h, t_end, std::nullopt);
    verify::SuiteOptions options;
    options.settings = loaded.settings;
    const auto report = verify::run_suites(loaded.config, split_list(suites), options);
    write_text(out_path, io::report_to_json(report).dump(2) + "\n");
    for (const auto& c : report.checks) {
        std::printf("%s %-36s metric=%-12.4g tol=%-10.3g (%.2fs)\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.metric, c.tolerance, c.runtime_s);
    }
    for (const auto& s : report.skipped) {
        std::printf("SKIP %s\n", s.c_str());
    }
    return report.all_passed() ? kOk : kVerification;
}

int sweep_command(const std::string& config_path, const std::string& param, const std::string& range,
                  std::optional<double> t_end, std::optional<double> h, double window,
                  const std::string& out_path) {
    const auto loaded = load(config_path, h, t_end, std::nullopt);
    const auto values = io::parse_range(range);
    // Fail fast on a bad path before spawning work.
    {
        ModelConfig probe = loaded.config;
        io::set_parameter(probe, param, values.front());
    }
    struct Row {
        double value;
        verify::LimsupEstimate est;
        std::vector<std::optional<double>> tstar;
    };
    const auto solve_point = [&](double v) {
        ModelConfig cfg = loaded.config;
        io::set_parameter(cfg, param, v);
        IntegratorSettings s = loaded.settings;
        s.residual_every = 0;
        const auto r = solve(cfg, s);
        return Row{v, verify::limsup_estimate(r.trajectory, window), r.breaks.tstar};
    };
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<Row> rows;
    for (std::size_t start = 0; start < values.size(); start += workers) {
        std::vector<std::future<Row>> batch;
        for (std::size_t k = start; k < std::min(values.size(), start + workers); ++k) {
            batch.push_back(std::async(std::launch::async, solve_point, values[k]));
        }
        for (auto& f : batch) {
            rows.push_back(f.get());
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.value < b.value; });

    const std::size_t n = loaded.config.n();
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw InvalidInput("cannot write " + out_path);
    }
    out << "value";
    for (std::size_t i = 1; i <= n; ++i) {
        out << ",limsup_" << i;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        out << ",tstar_" << i;
    }
    out << ",conclusive\n";
    for (const auto& r : rows) {
        out << io::format_number(r.value);
        for (double v : r.est.value) {
            out << ',' << io::format_number(v);
        }
        for (const auto& ts : r.tstar) {
            out << ',' << (ts ? io::format_number(*ts) : std::string("nan"));
        }
        out << ',' << (r.est.conclusive ? 1 : 0) << '\n';
    }
    return kOk;
}

int equilibrium_command(const std::string& config_path) {
    const auto config = io::parse_config_text(read_file(config_path));
    const auto C = compute_normalization(config).C;
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < config.n(); ++i) {
        nlohmann::json entry{{"species", i + 1}, {"C", C[i]}};
        if (C[i] > 0.0) {
            const auto eq = equilibrium(config, i, C[i]);
            if (eq.value) {
                entry["A_star"] = eq.value->adults;
                entry["tau_bar"] = eq.value->delay;
            } else {
                entry["diagnostic"] = eq.diagnostic;
            }
        } else {
            entry["diagnostic"] = "tau0 = 0: no delay, no positive-delay equilibrium";
        }
        out.push_back(entry);
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and verifier for the n-species state-dependent-delay forest model"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    std::string config_path, out_path, suites = "all", param, range;
    std::optional<double> t_end, h;
    std::optional<int> reanchor;
    double window = 0.2;

    auto* run = app.add_subcommand("run", "Integrate a configuration and write the trajectory CSV");
    run->add_option("--config", config_path, "Config JSON")->required();
    run->add_option("--t-end", t_end, "Final time");
    run->add_option("--h", h, "Step size");
    run->add_option("--reanchor-every", reanchor, "Re-anchor the delay every N steps (0 = never)");
    run->add_option("--out", out_path, "Output CSV (metadata goes to <out>.meta.json)")->required();

    auto* ver = app.add_subcommand("verify", "Run verification suites and write a JSON report");
    ver->add_option("--config", config_path, "Config JSON")->required();
    ver->add_option("--suite", suites, "Comma-separated suites or 'all'");
    ver->add_option("--t-end", t_end, "Final time for trajectory checks");
    ver->add_option("--h", h, "Step size for trajectory checks");
    ver->add_option("--out", out_path, "Report JSON")->required();

    auto* sweep = app.add_subcommand("sweep", "Vary one parameter and tabulate limsup estimates");
    sweep->add_option("--config", config_path, "Config JSON")->required();
    sweep->add_option("--param", param, "Dotted parameter path, e.g. species.0.beta")->required();
    sweep->add_option("--range", range, "Inclusive range a:b:step")->required();
    sweep->add_option("--t-end", t_end, "Final time");
    sweep->add_option("--h", h, "Step size");
    sweep->add_option("--window", window, "Trailing window fraction");
    sweep->add_option("--out", out_path, "Output CSV")->required();

    auto* eq = app.add_subcommand("equilibrium", "Print the positive steady state of each species");
    eq->add_option("--config", config_path, "Config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return run_command(config_path, t_end, h, reanchor, out_path);
        }
        if (ver->parsed()) {
            return verify_command(config_path, suites, t_end, h, out_path);
        }
        if (sweep->parsed()) {
            return sweep_command(config_path, param, range, t_end, h, window, out_path);
        }
        return equilibrium_command(config_path);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kValidation;
    } catch (const Unsupported& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return kValidation;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
}
