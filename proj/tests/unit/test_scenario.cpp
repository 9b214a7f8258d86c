#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mfluid/io/compare.hpp"
#include "mfluid/io/trajectory_io.hpp"
#include "mfluid/scenario/run.hpp"

using namespace mfluid;
using namespace mfluid::scenario;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

std::string error_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfluid_test_scenario_" + name);
    fs::remove_all(p);
    return p;
}

ScenarioConfig small_mix(BackendKind backend) {
    ScenarioConfig c = preset_config("smooth-mix");
    c.backend = backend;
    c.cells = 32;
    c.modes = 8;
    c.parameters.horizon = 0.02;
    c.outputs.snapshot_interval = 0.01;
    c.solver.cfl = 0.9;
    return c;
}

constexpr const char* kMinimal = R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"}})";

}  // namespace

TEST(Expression, Arithmetic) {
    EXPECT_DOUBLE_EQ(Expression("1 + 2*3")(0.0), 7.0);
    EXPECT_DOUBLE_EQ(Expression("(1 + 2)*3")(0.0), 9.0);
    EXPECT_DOUBLE_EQ(Expression("2^3^2")(0.0), 512.0);
    EXPECT_DOUBLE_EQ(Expression("-x^2")(3.0), -9.0);
    EXPECT_DOUBLE_EQ(Expression("8/4/2")(0.0), 1.0);
    EXPECT_DOUBLE_EQ(Expression("1e-3*x")(2.0), 2e-3);
}

TEST(Expression, Functions) {
    for (double x : {0.0, 0.3, 0.77, 1.0}) {
        EXPECT_DOUBLE_EQ(Expression("0.5 + 0.1*sin(2*pi*x)")(x), 0.5 + 0.1 * std::sin(2 * pi * x));
        EXPECT_DOUBLE_EQ(Expression("exp(-x)*cos(pi*x)")(x), std::exp(-x) * std::cos(pi * x));
        EXPECT_DOUBLE_EQ(Expression("pow(x + 1, 1.5)")(x), std::pow(x + 1, 1.5));
        EXPECT_DOUBLE_EQ(Expression("sqrt(abs(x - 0.5)) + tanh(x) + log(2 + x) + tan(x/4)")(x),
                         std::sqrt(std::abs(x - 0.5)) + std::tanh(x) + std::log(2 + x) + std::tan(x / 4));
    }
}

TEST(Expression, SyntaxErrors) {
    EXPECT_THROW(Expression("1 +"), ConfigError);
    EXPECT_THROW(Expression("sin(x"), ConfigError);
    EXPECT_THROW(Expression("foo(x)"), ConfigError);
    EXPECT_THROW(Expression("y"), ConfigError);
    EXPECT_THROW(Expression("pow(x)"), ConfigError);
    EXPECT_THROW(Expression("2 3"), ConfigError);
}

TEST(ParseConfig, MinimalRestDocument) {
    const auto c = parse_config(kMinimal);
    EXPECT_EQ(c.backend, BackendKind::eulerian);
    EXPECT_EQ(c.initial.preset, "rest");
    EXPECT_GE(c.parameters.n_constituents, 1u);
    EXPECT_GT(c.parameters.horizon, 0.0);
}

TEST(ParseConfig, AdiabaticIndexOneRejected) {
    const auto msg = error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"},
                                  "parameters": {"adiabatic_index": 1.0}})");
    EXPECT_NE(msg.find("adiabatic_index must exceed 1"), std::string::npos) << msg;
}

TEST(ParseConfig, IndefiniteViscosityReportsWitness) {
    const auto msg = error_of(R"({"schema": "mfluid-scenario/1",
        "parameters": {"viscosity": [[1, 2], [2, 1]]},
        "initial_data": {"densities": ["0.5", "0.5"], "velocities": ["0", "0"]}})");
    EXPECT_NE(msg.find("positive definite"), std::string::npos) << msg;
    EXPECT_NE(msg.find("witness"), std::string::npos) << msg;
    EXPECT_NE(msg.find("-1"), std::string::npos) << msg;
}

TEST(ParseConfig, AsymmetricViscosityRejected) {
    const auto msg = error_of(R"({"schema": "mfluid-scenario/1",
        "parameters": {"viscosity": [[2, 1], [0, 2]]},
        "initial_data": {"densities": ["0.5", "0.5"], "velocities": ["0", "0"]}})");
    EXPECT_NE(msg.find("symmetric"), std::string::npos) << msg;
}

TEST(ParseConfig, VacuumInInitialDensityRejected) {
    const auto msg = error_of(R"json({"schema": "mfluid-scenario/1",
        "parameters": {"viscosity": [[2, 1], [1, 2]]},
        "initial_data": {"densities": ["0.5 + 0.5*sin(2*pi*x)", "0.5"], "velocities": ["0.1*sin(pi*x)", "0"]}})json");
    EXPECT_NE(msg.find("rho_01"), std::string::npos) << msg;
    EXPECT_NE(msg.find("vacuum"), std::string::npos) << msg;
}

TEST(ParseConfig, NonzeroWallVelocityRejected) {
    const auto msg = error_of(R"({"schema": "mfluid-scenario/1",
        "initial_data": {"densities": ["1"], "velocities": ["0.1"]}})");
    EXPECT_NE(msg.find("wall"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownFieldsNamed) {
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"}, "colour": 1})").find("'colour'"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"}, "solver": {"cfll": 1}})")
                  .find("solver: unknown field 'cfll'"),
              std::string::npos);
}

TEST(ParseConfig, StructuralErrors) {
    EXPECT_NE(error_of("{").find("malformed"), std::string::npos);
    EXPECT_NE(error_of(R"({"initial_data": {"preset": "rest"}})").find("schema"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1"})").find("initial_data"), std::string::npos);
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"}, "backend": "spectral"})")
                  .find("unknown backend"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"preset": "rest"}, "horizon": -1})").find("horizon"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"schema": "mfluid-scenario/1", "initial_data": {"densities": ["1", "1"], "velocities": ["0"]}})")
                  .find("velocities"),
              std::string::npos);
}

TEST(Serialize, RoundTripIsIdentity) {
    for (const auto& name : preset_names()) {
        ScenarioConfig c = preset_config(name);
        c.solver.dt_override = 1e-4;
        c.initial.perturbation = 1e-8;
        c.seed = 17;
        const std::string text = serialize(c);
        const ScenarioConfig back = parse_config(text);
        EXPECT_TRUE(back == c) << name;
        EXPECT_EQ(serialize(back), text) << name;
        EXPECT_EQ(config_hash(back), config_hash(c));
    }
}

TEST(Serialize, HashTracksContent) {
    ScenarioConfig a = preset_config("smooth-mix"), b = a;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.cells += 1;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(hash_hex(config_hash(a)).size(), 16u);
}

TEST(ShippedScenarios, AllParseOrFailAsConfigured) {
    const fs::path dir = fs::path(MFLUID_SOURCE_DIR) / "scenarios";
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        ++seen;
        if (entry.path().stem() == "vacuum") {
            EXPECT_THROW((void)load_config(entry.path().string()), ConfigError);
        } else {
            EXPECT_NO_THROW((void)load_config(entry.path().string())) << entry.path();
        }
    }
    EXPECT_GE(seen, 5u);
}

TEST(RunScenario, ExitCodes) {
    EXPECT_EQ(run_scenario(small_mix(BackendKind::eulerian)).exit_code, exit_ok);

    ScenarioConfig bad = small_mix(BackendKind::eulerian);
    bad.parameters.adiabatic_index = 0.9;
    const auto cfg = run_scenario(bad);
    EXPECT_EQ(cfg.exit_code, exit_config);
    EXPECT_NE(cfg.message.find("adiabatic_index"), std::string::npos);

    ScenarioConfig unstable = small_mix(BackendKind::eulerian);
    unstable.cells = 128;
    unstable.solver.dt_override = 2e-4;
    EXPECT_EQ(run_scenario(unstable).exit_code, exit_blow_up);

    ScenarioConfig picard = small_mix(BackendKind::galerkin);
    picard.solver.picard_max_iters = 1;
    picard.solver.picard_tol = 1e-14;
    EXPECT_EQ(run_scenario(picard).exit_code, exit_iteration);

    ScenarioConfig strict = small_mix(BackendKind::eulerian);
    strict.ledger.mass_tol = 0.0;
    strict.ledger.energy_constant = 1e-12;
    const auto led = run_scenario(strict);
    EXPECT_EQ(led.exit_code, exit_ledger_failure);
    EXPECT_NE(led.message.find("ledger"), std::string::npos);
}

TEST(RunScenario, UnwritableDirectoryIsIoError) {
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "file";
    const auto out = run_scenario(small_mix(BackendKind::eulerian), blocker / "sub");
    EXPECT_EQ(out.exit_code, exit_io);
    fs::remove(blocker);
}

TEST(RunScenario, OutputsAreByteIdenticalAcrossRuns) {
    for (auto backend : {BackendKind::eulerian, BackendKind::lagrangian, BackendKind::galerkin}) {
        const fs::path a = scratch("a"), b = scratch("b");
        ScenarioConfig c = small_mix(backend);
        c.outputs.plots = true;
        ASSERT_EQ(run_scenario(c, a).exit_code, exit_ok) << to_string(backend);
        ASSERT_EQ(run_scenario(c, b).exit_code, exit_ok);
        std::size_t files = 0;
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file()) continue;
            ++files;
            const fs::path other = b / fs::relative(entry.path(), a);
            ASSERT_TRUE(fs::exists(other)) << other;
            EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path();
        }
        EXPECT_GT(files, 3u);
        fs::remove_all(a);
        fs::remove_all(b);
    }
}

TEST(RunScenario, StoredTrajectoryRoundTripsAndComparesToZero) {
    const fs::path dir = scratch("stored");
    const ScenarioConfig c = small_mix(BackendKind::lagrangian);
    const auto out = run_scenario(c, dir);
    ASSERT_EQ(out.exit_code, exit_ok) << out.message;
    const auto stored = io::read_trajectory(dir);
    EXPECT_TRUE(stored.config == c);
    EXPECT_EQ(stored.config_hash, hash_hex(config_hash(c)));
    ASSERT_EQ(stored.trajectory.states.size(), out.trajectory.states.size());
    const auto self = io::compare(stored.trajectory, stored.trajectory);
    EXPECT_FALSE(self.rows.empty());
    EXPECT_EQ(self.max_linf(), 0.0);
    EXPECT_LE(io::compare(stored.trajectory, out.trajectory).max_linf(), 1e-12);
    fs::remove_all(dir);
}

TEST(Presets, PerturbationShiftsInitialData) {
    ScenarioConfig c = preset_config("smooth-mix");
    const auto base = profiles(c);
    c.initial.perturbation = 1e-3;
    const auto moved = profiles(c);
    for (double x : {0.1, 0.4, 0.9})
        for (std::size_t i = 0; i < base.densities.size(); ++i) {
            EXPECT_NEAR(moved.densities[i](x) - base.densities[i](x), 1e-3 * std::cos(2 * pi * x), 1e-15);
            EXPECT_NEAR(moved.velocities[i](x) - base.velocities[i](x), 1e-3 * std::sin(pi * x), 1e-15);
        }
}
