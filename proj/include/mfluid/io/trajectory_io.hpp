#pragma once

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfluid/core/errors.hpp"
#include "mfluid/estimates/ledger.hpp"
#include "mfluid/io/svg.hpp"
#include "mfluid/scenario/config.hpp"
#include "mfluid/trajectory.hpp"

// On-disk layout of a run directory:
//   manifest.json                    run summary, config and snapshot index
//   monitors.csv                     t, E, D, m_1..m_N, rho_min, rho_max, w_norm, D_int, unit_length
//   snapshots/NNNNNN/rho_i.csv       one file per field per snapshot
//   snapshots/NNNNNN/u_i.csv
//   ledger.txt                       estimates ledger
//   plots/*.svg                      optional
// Every file starts with the schema version and the config hash.

namespace mfluid::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kTrajectorySchema = "mfluid-trajectory/1";

struct StoredRun {
    scenario::ScenarioConfig config;
    std::string config_hash;
    Trajectory trajectory;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string header(const std::string& hash) {
    return std::string("# schema ") + kTrajectorySchema + "\n# config_hash " + hash + "\n";
}

inline void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string snapshot_dir(std::size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06zu", k);
    return buf;
}

/// Numeric rows of a CSV file, skipping comments and the column header.
inline std::vector<std::vector<double>> read_rows(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            seen_header = true;
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw IoError("malformed number in " + path.string());
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string field_csv(const std::string& hash, const FieldState& s, const std::string& name, const Field& f) {
    std::ostringstream os;
    os << header(hash) << "# time " << num(s.time) << "\n";
    os << (s.grid.coordinate_kind == CoordinateKind::eulerian_x ? "x" : "y") << "," << name << "\n";
    for (std::size_t k = 0; k < f.size(); ++k) os << num(s.grid.center(k)) << "," << num(f[k]) << "\n";
    return os.str();
}

}  // namespace detail

inline std::string monitors_csv(const Trajectory& traj, const std::string& hash) {
    std::ostringstream os;
    os << detail::header(hash) << "t,E,D";
    for (std::size_t i = 0; i < traj.n_constituents; ++i) os << ",m_" << i + 1;
    os << ",rho_min,rho_max,w_norm,D_int,unit_length\n";
    for (const auto& r : traj.monitors) {
        os << detail::num(r.time) << "," << detail::num(r.energy) << "," << detail::num(r.dissipation);
        for (double m : r.masses) os << "," << detail::num(m);
        os << "," << detail::num(r.rho_min) << "," << detail::num(r.rho_max) << "," << detail::num(r.w_norm) << ","
           << detail::num(r.dissipation_integral) << "," << detail::num(r.unit_length) << "\n";
    }
    return os.str();
}

inline std::string ledger_text(const estimates::LedgerReport& rep, const std::string& hash) {
    return detail::header(hash) + estimates::to_text(rep);
}

/// Writes manifest, monitors and snapshots. Existing snapshot files of an
/// earlier run in the same directory are replaced.
inline void write_trajectory(const fs::path& dir, const Trajectory& traj, const scenario::ScenarioConfig& cfg) {
    const std::string hash = scenario::hash_hex(scenario::config_hash(cfg));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    fs::remove_all(dir / "snapshots", ec);

    json snaps = json::array();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const FieldState& s = traj.states[k];
        const fs::path sd = dir / "snapshots" / detail::snapshot_dir(k);
        fs::create_directories(sd, ec);
        if (ec) throw IoError("cannot create " + sd.string() + ": " + ec.message());
        for (std::size_t i = 0; i < s.constituents(); ++i) {
            const std::string rn = "rho_" + std::to_string(i + 1), un = "u_" + std::to_string(i + 1);
            detail::write_file(sd / (rn + ".csv"), detail::field_csv(hash, s, rn, s.densities[i]));
            detail::write_file(sd / (un + ".csv"), detail::field_csv(hash, s, un, s.velocities[i]));
        }
        snaps.push_back({{"index", k}, {"time", s.time}, {"directory", "snapshots/" + detail::snapshot_dir(k)}});
    }

    json m;
    m["schema"] = kTrajectorySchema;
    m["config_hash"] = hash;
    m["config"] = scenario::to_json(cfg);
    m["backend"] = traj.backend;
    m["coordinate"] = to_string(traj.coordinate_kind);
    m["n_constituents"] = traj.n_constituents;
    m["grid"] = {{"cells", traj.states.empty() ? 0 : traj.states.front().cells()},
                 {"length", traj.states.empty() ? 0.0 : traj.states.front().grid.length}};
    m["total_mass"] = traj.total_mass;
    m["body_forcing"] = traj.body_forcing;
    m["steps"] = traj.steps;
    m["min_dt"] = traj.min_dt;
    m["max_dt"] = traj.max_dt;
    m["mode_count"] = traj.mode_count;
    m["picard_iterations"] = traj.picard_iterations;
    m["max_picard_residual"] = traj.max_picard_residual;
    m["snapshots"] = snaps;
    detail::write_file(dir / "manifest.json", m.dump(2) + "\n");
    detail::write_file(dir / "monitors.csv", monitors_csv(traj, hash));
}

inline StoredRun read_trajectory(const fs::path& dir) {
    json m;
    try {
        m = json::parse(detail::read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    }
    if (m.value("schema", "") != std::string(kTrajectorySchema)) {
        throw IoError("unsupported trajectory schema in " + dir.string());
    }
    StoredRun run;
    try {
        run.config = scenario::from_json(m.at("config"));
        run.config_hash = m.at("config_hash").get<std::string>();
        Trajectory& t = run.trajectory;
        t.backend = m.at("backend").get<std::string>();
        t.coordinate_kind = m.at("coordinate") == "lagrangian_y" ? CoordinateKind::lagrangian_y : CoordinateKind::eulerian_x;
        t.n_constituents = m.at("n_constituents").get<std::size_t>();
        t.total_mass = m.at("total_mass").get<double>();
        t.body_forcing = m.at("body_forcing").get<bool>();
        t.steps = m.at("steps").get<std::size_t>();
        t.min_dt = m.at("min_dt").get<double>();
        t.max_dt = m.at("max_dt").get<double>();
        t.mode_count = m.at("mode_count").get<std::size_t>();
        t.picard_iterations = m.at("picard_iterations").get<std::vector<int>>();
        t.max_picard_residual = m.at("max_picard_residual").get<double>();
        const Grid1D grid{m.at("grid").at("cells").get<std::size_t>(), m.at("grid").at("length").get<double>(),
                          t.coordinate_kind};
        for (const auto& snap : m.at("snapshots")) {
            FieldState s = make_state(grid, t.n_constituents, snap.at("time").get<double>());
            const fs::path sd = dir / snap.at("directory").get<std::string>();
            for (std::size_t i = 0; i < t.n_constituents; ++i) {
                const auto rho = detail::read_rows(sd / ("rho_" + std::to_string(i + 1) + ".csv"));
                const auto u = detail::read_rows(sd / ("u_" + std::to_string(i + 1) + ".csv"));
                if (rho.size() != grid.cell_count || u.size() != grid.cell_count) {
                    throw IoError("snapshot size mismatch in " + sd.string());
                }
                for (std::size_t k = 0; k < grid.cell_count; ++k) {
                    s.densities[i][k] = rho[k].at(1);
                    s.velocities[i][k] = u[k].at(1);
                }
            }
            t.states.push_back(std::move(s));
        }
        for (const auto& row : detail::read_rows(dir / "monitors.csv")) {
            const std::size_t n = t.n_constituents;
            if (row.size() != n + 8) throw IoError("malformed monitors.csv in " + dir.string());
            MonitorRow r;
            r.time = row[0];
            r.energy = row[1];
            r.dissipation = row[2];
            r.masses.assign(row.begin() + 3, row.begin() + 3 + static_cast<std::ptrdiff_t>(n));
            r.rho_min = row[3 + n];
            r.rho_max = row[4 + n];
            r.w_norm = row[5 + n];
            r.dissipation_integral = row[6 + n];
            r.unit_length = row[7 + n];
            t.monitors.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    }
    return run;
}

inline void write_ledger(const fs::path& dir, const estimates::LedgerReport& rep, const scenario::ScenarioConfig& cfg) {
    detail::write_file(dir / "ledger.txt", ledger_text(rep, scenario::hash_hex(scenario::config_hash(cfg))));
}

/// Field profiles at the first and last snapshot plus the monitor series.
inline void write_plots(const fs::path& dir, const Trajectory& traj) {
    std::error_code ec;
    fs::create_directories(dir / "plots", ec);
    if (ec) throw IoError("cannot create " + (dir / "plots").string());
    if (traj.states.empty()) return;
    const std::string coord = traj.coordinate_kind == CoordinateKind::eulerian_x ? "x" : "y";
    std::vector<Series> rho, u;
    for (const FieldState* s : {&traj.states.front(), &traj.states.back()}) {
        std::vector<double> xs(s->cells());
        for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = s->grid.center(k);
        char t[32];
        std::snprintf(t, sizeof t, " t=%.3g", s->time);
        for (std::size_t i = 0; i < s->constituents(); ++i) {
            rho.push_back({"rho_" + std::to_string(i + 1) + t, xs, s->densities[i]});
            u.push_back({"u_" + std::to_string(i + 1) + t, xs, s->velocities[i]});
        }
    }
    write_line_chart((dir / "plots" / "densities.svg").string(), "densities", coord, rho);
    write_line_chart((dir / "plots" / "velocities.svg").string(), "velocities", coord, u);

    Series e{"E", {}, {}}, d{"D", {}, {}}, w{"w_norm", {}, {}};
    for (const auto& r : traj.monitors) {
        e.x.push_back(r.time), e.y.push_back(r.energy);
        d.x.push_back(r.time), d.y.push_back(r.dissipation);
        w.x.push_back(r.time), w.y.push_back(r.w_norm);
    }
    write_line_chart((dir / "plots" / "energy.svg").string(), "energy", "t", {e});
    write_line_chart((dir / "plots" / "dissipation.svg").string(), "dissipation", "t", {d});
    write_line_chart((dir / "plots" / "w_norm.svg").string(), "log-density gradient norm", "t", {w});
}

}  // namespace mfluid::io
