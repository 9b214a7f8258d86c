#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mfluid/core/audit.hpp"
#include "mfluid/io/compare.hpp"
#include "mfluid/io/trajectory_io.hpp"
#include "mfluid/scenario/config.hpp"
#include "mfluid/scenario/run.hpp"
#include "mfluid/verification/collapse.hpp"
#include "mfluid/verification/mms.hpp"

namespace fs = std::filesystem;
using namespace mfluid;
using scenario::ScenarioConfig;

namespace {

struct RunArgs {
    std::vector<std::string> configs;
    std::string preset;
    std::string backend;
    std::size_t cells = 0;
    std::size_t modes = 0;
    double horizon = -1.0;
    std::string out;
    std::string plots;
    double override_dt = 0.0;
    unsigned jobs = 1;
};

bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("--plots: expected true or false, got '" + s + "'");
}

/// Config with command-line overrides applied, validated.
ScenarioConfig resolve(const std::string& path, const RunArgs& a) {
    ScenarioConfig c = path.empty() ? scenario::preset_config(a.preset) : scenario::load_config(path);
    if (!a.backend.empty()) c.backend = scenario::detail::parse_backend(a.backend);
    if (a.cells) c.cells = a.cells;
    if (a.modes) c.modes = a.modes;
    if (a.horizon >= 0.0) c.parameters.horizon = a.horizon;
    if (!a.plots.empty()) c.outputs.plots = parse_bool(a.plots);
    if (a.override_dt > 0.0) c.solver.dt_override = a.override_dt;
    scenario::validate(c);
    return c;
}

int cmd_run(const RunArgs& a) {
    std::vector<std::string> inputs = a.configs;
    if (inputs.empty()) {
        if (a.preset.empty()) {
            std::cerr << "run: give --config PATH or --preset NAME\n";
            return scenario::exit_config;
        }
        inputs.push_back("");
    }
    const bool sweep = inputs.size() > 1;
    std::vector<int> codes(inputs.size(), 0);
    std::vector<std::string> lines(inputs.size());
    std::atomic<std::size_t> next{0};
    std::mutex print;

    auto worker = [&] {
        for (std::size_t k = next++; k < inputs.size(); k = next++) {
            std::ostringstream os;
            try {
                const ScenarioConfig c = resolve(inputs[k], a);
                fs::path dir = a.out.empty() ? fs::path(c.outputs.directory) : fs::path(a.out);
                if (sweep) dir /= inputs[k].empty() ? fs::path(c.name) : fs::path(inputs[k]).stem();
                const auto res = scenario::run_scenario(c, dir);
                codes[k] = res.exit_code;
                os << c.name << " [" << to_string(c.backend) << "] ";
                if (res.exit_code == scenario::exit_ok || res.exit_code == scenario::exit_ledger_failure) {
                    os << "t=" << res.trajectory.final_time() << " steps=" << res.trajectory.steps
                       << " ledger=" << (res.ledger.all_passed() ? "PASS" : "FAIL") << " -> " << dir.string();
                }
                if (!res.message.empty()) os << " error: " << res.message;
                os << " (exit " << res.exit_code << ")";
            } catch (const SimulationError& e) {
                codes[k] = scenario::exit_code(e.kind());
                os << (inputs[k].empty() ? a.preset : inputs[k]) << " error: " << e.what() << " (exit " << codes[k] << ")";
            }
            std::lock_guard<std::mutex> lock(print);
            lines[k] = os.str();
            std::cout << lines[k] << "\n";
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(a.jobs, static_cast<unsigned>(inputs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return *std::max_element(codes.begin(), codes.end());
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& out) {
    try {
        const auto ra = io::read_trajectory(a);
        const auto rb = io::read_trajectory(b);
        const auto rep = io::compare(ra.trajectory, rb.trajectory);
        std::ostringstream os;
        os << "# mfluid-comparison/1\n# a " << a << " (" << ra.config_hash << ")\n# b " << b << " (" << rb.config_hash
           << ")\n# cells " << rep.cells << "\nt,field,linf,l2\n";
        char buf[128];
        for (const auto& r : rep.rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%s,%.6e,%.6e\n", r.time, r.field.c_str(), r.linf, r.l2);
            os << buf;
        }
        std::cout << os.str();
        std::snprintf(buf, sizeof buf, "max linf: rho %.6e, u %.6e\n", rep.max_linf("rho"), rep.max_linf("u"));
        std::cout << buf;
        if (!out.empty()) {
            std::ofstream f(out);
            if (!f) throw IoError("cannot write " + out);
            f << os.str();
        }
    } catch (const SimulationError& e) {
        std::cerr << "compare: " << e.what() << "\n";
        return scenario::exit_code(e.kind());
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return scenario::exit_config;
    }
    return 0;
}

Matrix parse_matrix_arg(const std::string& text, const char* what) {
    try {
        return scenario::detail::parse_matrix(nlohmann::json::parse(text), what);
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(what) + ": expected a JSON matrix such as [[2,1],[1,2]]");
    }
}

int cmd_audit(const std::string& mu_text, const std::string& lambda_text, int dim, const std::string& config) {
    try {
        GeneralViscosityPair pair;
        if (!config.empty()) {
            const auto doc = nlohmann::json::parse(std::ifstream(config));
            pair.mu_matrix = scenario::from_json(doc).parameters.viscosity;
        } else {
            if (mu_text.empty()) throw ConfigError("audit-matrix: give --mu or --config");
            pair.mu_matrix = parse_matrix_arg(mu_text, "--mu");
        }
        pair.lambda_matrix = lambda_text.empty() ? Matrix(Matrix::Zero(pair.mu_matrix.rows(), pair.mu_matrix.cols()))
                                                 : parse_matrix_arg(lambda_text, "--lambda");
        pair.flow_dim = dim;
        const auto r = audit_viscosity(pair);
        std::cout << "symmetric          " << (r.symmetric ? "yes" : "no") << "\n"
                  << "positive definite  " << (r.positive_definite ? "yes" : "no") << "\n"
                  << "second law         " << (r.second_law_ok ? "yes" : "no") << "\n"
                  << "coercive           " << (r.coercive ? "yes" : "no") << "\n"
                  << "diagonal           " << (r.diagonal ? "yes" : "no") << "\n"
                  << "triangular         " << (r.triangular ? "yes" : "no") << "\n";
        for (const auto& [name, v] : r.min_eigenvalues) std::cout << "min eig " << name << " = " << v << "\n";
        if (r.witness) {
            std::cout << "failed: " << r.failed_condition << ", witness " << format_vector(*r.witness) << "\n";
            return scenario::exit_config;
        }
    } catch (const SimulationError& e) {
        std::cerr << "audit-matrix: " << e.what() << "\n";
        return scenario::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "audit-matrix: " << e.what() << "\n";
        return scenario::exit_config;
    }
    return 0;
}

std::vector<std::size_t> parse_levels(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
}

int cmd_mms(const std::string& backend, const std::string& levels, double horizon) {
    try {
        const BackendKind b = scenario::detail::parse_backend(backend);
        std::vector<std::size_t> lv = levels.empty() ? (b == BackendKind::galerkin ? std::vector<std::size_t>{8, 16, 32, 64}
                                                                                    : std::vector<std::size_t>{128, 256, 512})
                                                     : parse_levels(levels);
        verification::MmsOptions opt;
        if (horizon > 0) opt.horizon = horizon;
        const auto rep = verification::mms_convergence(verification::ManufacturedSolution::standard(), b, lv, opt);
        char buf[160];
        std::cout << "level,velocity_error,density_error,velocity_order,density_order\n";
        for (std::size_t k = 0; k < lv.size(); ++k) {
            if (k == 0) {
                std::snprintf(buf, sizeof buf, "%zu,%.6e,%.6e,,\n", lv[k], rep.velocity_errors[k], rep.density_errors[k]);
            } else {
                std::snprintf(buf, sizeof buf, "%zu,%.6e,%.6e,%.4f,%.4f\n", lv[k], rep.velocity_errors[k],
                              rep.density_errors[k], rep.velocity_orders[k - 1], rep.density_orders[k - 1]);
            }
            std::cout << buf;
        }
        const bool ok = b == BackendKind::galerkin ? rep.monotone : rep.min_velocity_order() >= 1.9;
        std::cout << (rep.inconclusive ? "inconclusive" : ok ? "PASS" : "FAIL") << "\n";
        return ok ? 0 : 1;
    } catch (const SimulationError& e) {
        std::cerr << "mms: " << e.what() << "\n";
        return scenario::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "mms: " << e.what() << "\n";
        return scenario::exit_config;
    }
}

int cmd_collapse(const RunArgs& a) {
    try {
        const ScenarioConfig c = resolve(a.configs.empty() ? std::string() : a.configs.front(), a);
        const InitialProfiles ip = scenario::profiles(c);
        const double n = static_cast<double>(c.parameters.n_constituents);
        for (std::size_t j = 0; j <= 1000; ++j) {
            const double x = j / 1000.0;
            for (std::size_t i = 1; i < ip.densities.size(); ++i) {
                if (ip.densities[i](x) != ip.densities[0](x) || ip.velocities[i](x) != ip.velocities[0](x)) {
                    throw ConfigError("collapse-test: constituents must share identical initial data");
                }
            }
        }
        const Profile rho0 = [f = ip.densities[0], n](double x) { return n * f(x); };
        verification::CollapseOptions opt;
        opt.backend = c.backend;
        opt.cells = c.cells;
        opt.horizon = c.parameters.horizon;
        opt.snapshot_interval = c.outputs.snapshot_interval;
        opt.cfl = c.solver.cfl;
        const auto rep = verification::symmetric_collapse_test(c.parameters, rho0, ip.velocities[0], opt);
        std::printf("collapsed: K = %.6g, mu = %.6g\n", rep.mono.pressure_coeff, rep.mono.viscosity(0, 0));
        std::printf("snapshots %zu, density linf %.3e, velocity linf %.3e, constituent spread %.3e\n", rep.snapshots,
                    rep.density_linf, rep.velocity_linf, rep.constituent_spread);
        const bool ok = std::max(rep.density_linf, rep.velocity_linf) <= 1e-8;
        std::cout << (ok ? "PASS" : "FAIL") << "\n";
        return ok ? 0 : 1;
    } catch (const SimulationError& e) {
        std::cerr << "collapse-test: " << e.what() << "\n";
        return scenario::exit_code(e.kind());
    }
}

int cmd_ledger(const std::string& dir, const std::string& out) {
    try {
        const auto run = io::read_trajectory(dir);
        const auto rep = estimates::build_ledger(run.trajectory, run.config.parameters, run.config.ledger);
        const std::string text = io::ledger_text(rep, run.config_hash);
        std::cout << text;
        if (!out.empty()) {
            std::ofstream f(out);
            if (!f) throw IoError("cannot write " + out);
            f << text;
        }
        return rep.all_passed() ? 0 : scenario::exit_ledger_failure;
    } catch (const SimulationError& e) {
        std::cerr << "ledger: " << e.what() << "\n";
        return scenario::exit_code(e.kind());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mfluid: 1D viscous compressible multi-fluid simulator"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "integrate one or more scenarios");
    run->add_option("--config", ra.configs, "scenario file(s); several run as a sweep");
    run->add_option("--preset", ra.preset, "run a shipped preset instead of a file")
        ->check(CLI::IsMember(scenario::preset_names()));
    run->add_option("--backend", ra.backend, "eulerian, lagrangian or galerkin");
    run->add_option("--cells", ra.cells, "grid cells");
    run->add_option("--modes", ra.modes, "Galerkin modes");
    run->add_option("--horizon", ra.horizon, "final time T");
    run->add_option("--out", ra.out, "output directory");
    run->add_option("--plots", ra.plots, "write SVG plots (true/false)");
    run->add_option("--override-dt", ra.override_dt, "fixed time step, bypasses the stability bound (unsafe)");
    run->add_option("--jobs", ra.jobs, "concurrent runs in a sweep")->check(CLI::PositiveNumber);

    std::string cmp_a, cmp_b, cmp_out;
    auto* cmp = app.add_subcommand("compare", "discrepancies between two stored trajectories");
    cmp->add_option("a", cmp_a)->required();
    cmp->add_option("b", cmp_b)->required();
    cmp->add_option("--out", cmp_out, "also write the table to a file");

    std::string mu_text, lambda_text, audit_config;
    int dim = 1;
    auto* audit = app.add_subcommand("audit-matrix", "admissibility of a viscosity pair");
    audit->add_option("--mu", mu_text, "M as JSON, e.g. [[2,1],[1,2]]");
    audit->add_option("--lambda", lambda_text, "Lambda as JSON (default zero)");
    audit->add_option("--dim", dim, "flow dimension n")->check(CLI::Range(1, 3));
    audit->add_option("--config", audit_config, "audit the viscosity of a scenario file");

    std::string mms_backend = "eulerian", mms_levels;
    double mms_horizon = 0.0;
    auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
    mms->add_option("--backend", mms_backend);
    mms->add_option("--levels", mms_levels, "comma-separated cells or modes");
    mms->add_option("--horizon", mms_horizon);

    RunArgs ca;
    ca.preset = "collapse";
    auto* col = app.add_subcommand("collapse-test", "identical constituents against the collapsed single fluid");
    col->add_option("--config", ca.configs)->expected(1);
    col->add_option("--backend", ca.backend);
    col->add_option("--cells", ca.cells);
    col->add_option("--horizon", ca.horizon);

    std::string ledger_dir, ledger_out;
    auto* led = app.add_subcommand("ledger", "re-evaluate the estimates ledger of a stored run");
    led->add_option("dir", ledger_dir)->required();
    led->add_option("--out", ledger_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : scenario::exit_config;
    }

    if (*run) return cmd_run(ra);
    if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (*audit) return cmd_audit(mu_text, lambda_text, dim, audit_config);
    if (*mms) return cmd_mms(mms_backend, mms_levels, mms_horizon);
    if (*col) return cmd_collapse(ca);
    if (*led) return cmd_ledger(ledger_dir, ledger_out);
    return 0;
}
