#pragma once

// JSON and CSV serialization, atomic file output, run manifests.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "midspec/bounds.hpp"
#include "midspec/dde.hpp"
#include "midspec/dominance.hpp"
#include "midspec/retarded_system.hpp"
#include "midspec/root_finding.hpp"

namespace midspec::io {

using json = nlohmann::ordered_json;

/// Shortest "%.17g"-style text that round-trips; deterministic across runs.
inline std::string number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// ---------------------------------------------------------------------------
// System description

inline json to_json(const RetardedSystem& sys) {
    return json{{"n", sys.n}, {"a", sys.a}, {"alpha", sys.alpha}, {"tau", sys.tau}};
}

inline RetardedSystem system_from_json(const json& j) {
    for (const char* key : {"n", "a", "alpha", "tau"})
        if (!j.contains(key)) throw std::invalid_argument(std::string("system JSON: missing field '") + key + "'");
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1)
        throw std::invalid_argument("system JSON: n must be a positive integer");
    RetardedSystem sys;
    sys.n = j["n"].get<std::size_t>();
    sys.a = j["a"].get<std::vector<double>>();
    sys.alpha = j["alpha"].get<std::vector<double>>();
    sys.tau = j["tau"].get<double>();
    sys.validate();
    return sys;
}

inline RetardedSystem read_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open system file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("system file " + path.string() + ": " + e.what());
    }
    return system_from_json(j);
}

// ---------------------------------------------------------------------------
// Spectra

inline json to_json(const Rectangle& r) {
    return json{{"re_min", r.re_min}, {"re_max", r.re_max}, {"im_min", r.im_min}, {"im_max", r.im_max}};
}

inline json to_json(const Root& r) {
    return json{{"re", r.location.real()},
                {"im", r.location.imag()},
                {"multiplicity", r.multiplicity},
                {"residual", r.residual}};
}

inline json to_json(const SpectrumReport& rep) {
    json roots = json::array();
    for (const auto& r : rep.roots) roots.push_back(to_json(r));
    return json{{"roots", roots},
                {"region", to_json(rep.region)},
                {"spectral_abscissa", rep.spectral_abscissa},
                {"dominant", rep.dominant ? to_json(*rep.dominant) : json(nullptr)},
                {"strictly_dominant", rep.strictly_dominant}};
}

inline std::string roots_csv(const std::vector<Root>& roots) {
    std::string out = "re,im,multiplicity,residual\n";
    for (const auto& r : roots)
        out += number(r.location.real()) + "," + number(r.location.imag()) + "," + std::to_string(r.multiplicity) +
               "," + number(r.residual) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Bounds

inline std::string method_name(const BoundReport& b) {
    std::string m(to_string(b.method));
    return b.label.empty() ? m : m + ":" + b.label;
}

inline std::string bounds_csv(const std::vector<BoundReport>& rows) {
    std::string out = "method,norm,power,sigma_min,value\n";
    for (const auto& b : rows)
        out += method_name(b) + "," + std::string(to_string(b.norm)) + "," + std::to_string(b.power) + "," +
               number(b.sigma_min) + "," + number(b.value) + "\n";
    return out;
}

inline json to_json(const BoundReport& b) {
    return json{{"method", method_name(b)},
                {"norm", to_string(b.norm)},
                {"power", b.power},
                {"sigma_min", b.sigma_min},
                {"value", b.value}};
}

inline std::string boundary_csv(const std::vector<BoundaryPoint>& curve) {
    std::string out = "sigma,omega_boundary\n";
    for (const auto& p : curve) out += number(p.sigma) + "," + number(p.omega) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Trajectories

inline std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,y";
    for (std::size_t k = 1; k < traj.order(); ++k) out += ",y" + std::to_string(k);
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += number(traj.times[i]);
        for (Eigen::Index k = 0; k < traj.states[i].size(); ++k) out += "," + number(traj.states[i](k));
        out += "\n";
    }
    return out;
}

/// Two-column `t,y` data, one row every `stride` grid points.
inline std::string solution_csv(const Trajectory& traj, std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    std::string out = "t,y\n";
    for (std::size_t i = 0; i < traj.times.size(); i += stride)
        out += number(traj.times[i]) + "," + number(traj.states[i](0)) + "\n";
    return out;
}

/// Reads `t,y` rows (header optional) into a sampled history.
inline HistoryFunction read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open history file " + path.string());
    std::vector<double> t, y;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a = 0.0, b = 0.0;
        if (!(ss >> a >> b)) {
            if (t.empty()) continue;  // header
            throw std::invalid_argument("history file " + path.string() + ": malformed row '" + line + "'");
        }
        t.push_back(a);
        y.push_back(b);
    }
    return HistoryFunction::sampled(std::move(t), std::move(y));
}

// ---------------------------------------------------------------------------
// Files

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    json inputs = json::object();
    std::vector<std::string> outputs;
    std::string tool_version;
    std::string timestamp;

    [[nodiscard]] json to_json() const {
        return json{{"command", command},
                    {"inputs", inputs},
                    {"outputs", outputs},
                    {"tool_version", tool_version},
                    {"timestamp", timestamp}};
    }
};

}  // namespace midspec::io
