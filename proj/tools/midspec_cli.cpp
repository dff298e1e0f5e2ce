// midspec: design, localize, bound and simulate single-delay retarded systems.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "midspec/bounds.hpp"
#include "midspec/dde.hpp"
#include "midspec/dominance.hpp"
#include "midspec/factorization.hpp"
#include "midspec/io.hpp"

namespace fs = std::filesystem;
using namespace midspec;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

/// Bad flag values discovered after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Inconclusive : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string out_dir = ".";
    bool json = false;
    bool quiet = false;
};

std::size_t thread_budget() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MIDSPEC_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw UsageError("MIDSPEC_THREADS must be a positive integer");
        n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    }
    return n;
}

class Run {
public:
    Run(const Globals& g, std::string command) : g_(g) {
        manifest_.command = std::move(command);
        manifest_.tool_version = MIDSPEC_VERSION;
    }

    json& inputs() { return manifest_.inputs; }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = fs::path(g_.out_dir) / name;
        io::write_atomic(p, content);
        manifest_.outputs.push_back(p.string());
    }

    void say(const std::string& line) const {
        if (!g_.quiet && !g_.json) std::cout << line << "\n";
    }

    void emit_json(const json& j) const {
        if (g_.json) std::cout << j.dump(2) << "\n";
    }

    void finish() {
        manifest_.timestamp = io::utc_timestamp();
        const fs::path p = fs::path(g_.out_dir) / "manifest.json";
        io::write_atomic(p, manifest_.to_json().dump(2) + "\n");
    }

private:
    const Globals& g_;
    io::RunManifest manifest_;
};

double default_s0(const RetardedSystem& sys) { return dominant_root_from_trace(sys.n, sys.a.back(), sys.tau); }

std::string coefficient_listing(const RetardedSystem& sys, double s0) {
    std::string out = "n = " + std::to_string(sys.n) + ", tau = " + io::number(sys.tau) + ", s0 = " + io::number(s0) + "\n";
    for (std::size_t k = 0; k < sys.n; ++k)
        out += "a" + std::to_string(k) + " = " + io::number(sys.a[k]) + "    alpha" + std::to_string(k) + " = " +
               io::number(sys.alpha[k]) + "\n";
    return out;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
    std::size_t n = 0;
    double s0 = 0.0;
    double tau = 0.0;
};

int cmd_design(const Globals& g, const DesignArgs& a) {
    if (!(a.tau > 0.0)) throw UsageError("--tau must be positive");
    if (a.n < 1) throw UsageError("--n must be at least 1");
    Run run(g, "design");
    run.inputs() = {{"n", a.n}, {"s0", a.s0}, {"tau", a.tau}};
    const auto sys = mid_coefficients(a.n, a.s0, a.tau);
    const double identity = a.s0 + sys.a.back() / static_cast<double>(a.n) + static_cast<double>(a.n) / a.tau;
    const double scale = std::max({1.0, std::abs(a.s0), std::abs(sys.a.back()) / static_cast<double>(a.n),
                                   static_cast<double>(a.n) / a.tau});
    const bool ok = std::abs(identity) <= 1e-12 * scale;

    run.write("system.json", io::to_json(sys).dump(2) + "\n");
    run.write("coefficients.txt", coefficient_listing(sys, a.s0));
    run.say(coefficient_listing(sys, a.s0));
    run.say(std::string("trace identity s0 + a_{n-1}/n + n/tau = ") + io::number(identity) + (ok ? "  ok" : "  FAILED"));
    run.emit_json({{"system", io::to_json(sys)}, {"trace_identity", identity}, {"trace_identity_ok", ok}});
    run.finish();
    return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct SpectrumArgs {
    std::string system;
    std::optional<double> s0, re_min, re_max, im_min, im_max;
};

int cmd_spectrum(const Globals& g, const SpectrumArgs& a) {
    const auto sys = io::read_system(a.system);
    const double s0 = a.s0.value_or(default_s0(sys));
    const Rectangle region{a.re_min.value_or(s0 - 5.0), a.re_max.value_or(s0 + 1.0), a.im_min.value_or(-30.0),
                           a.im_max.value_or(30.0)};
    try {
        region.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Run run(g, "spectrum");
    run.inputs() = {{"system", a.system}, {"s0", s0}, {"region", io::to_json(region)}};

    RootFinderOptions ropt;
    ropt.threads = thread_budget();
    std::vector<Root> roots;
    try {
        roots = find_roots(to_quasipolynomial(sys), region, 1e-10, ropt);
    } catch (const NumericalError& e) {
        throw Inconclusive(std::string("root search failed: ") + e.what());
    }
    if (roots.empty()) throw Inconclusive("no roots in region");

    DominanceOptions dopt;
    dopt.finder = ropt;
    SpectrumReport cert;
    try {
        cert = certify_dominance(sys, s0, s0, dopt);
    } catch (const NumericalError& e) {
        throw Inconclusive(std::string("dominance certification inconclusive: ") + e.what());
    }

    SpectrumReport rep;
    rep.roots = roots;
    rep.region = region;
    rep.spectral_abscissa = roots.front().location.real();
    const double tie = 1e-9 * std::max(1.0, std::abs(rep.spectral_abscissa));
    const auto leaders = std::count_if(roots.begin(), roots.end(), [&](const Root& r) {
        return rep.spectral_abscissa - r.location.real() <= tie;
    });
    if (leaders == 1 && roots.front().location.imag() == 0.0) rep.dominant = roots.front();
    rep.strictly_dominant = cert.strictly_dominant;

    json report = io::to_json(rep);
    report["certification"] = {{"s0", s0},
                               {"search_region", io::to_json(cert.region)},
                               {"roots_at_or_right_of_s0",
                                std::count_if(cert.roots.begin(), cert.roots.end(),
                                              [&](const Root& r) { return r.location.real() >= s0 - 1e-6; })}};
    run.write("spectrum.json", report.dump(2) + "\n");
    run.write("roots.csv", io::roots_csv(roots));
    run.say("roots in region: " + std::to_string(roots.size()));
    run.say("spectral abscissa: " + io::number(rep.spectral_abscissa));
    run.say(std::string("strictly dominant at s0 = ") + io::number(s0) + ": " + (rep.strictly_dominant ? "yes" : "no"));
    run.emit_json(report);
    run.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
    std::string system;
    bool standard_pair = false;
    std::optional<double> s0;
    std::string method;
    std::string norm;
    std::size_t power = 1;
    double sigma_min = 0.0;
    bool all = false;
    bool curves = false;
    double curve_sigma_min = -1.0;
    double curve_sigma_max = 6.0;
    double curve_step = 0.01;
};

int cmd_bounds(const Globals& g, const BoundsArgs& a) {
    if (a.standard_pair == !a.system.empty()) throw UsageError("give exactly one of --standard-pair or --system");
    if (!a.all && a.method.empty() && !a.curves) throw UsageError("give --method, --all or --curves");
    if (a.power < 1) throw UsageError("--power must be at least 1");

    CompanionPair pair;
    json inputs = {{"sigma_min", a.sigma_min}};
    if (a.standard_pair) {
        pair = standard_companion_pair();
        inputs["standard_pair"] = true;
    } else {
        const auto sys = io::read_system(a.system);
        const double s0 = a.s0.value_or(default_s0(sys));
        pair = companion_pair(normalize(sys, s0));
        inputs["system"] = a.system;
        inputs["s0"] = s0;
    }

    std::optional<BoundMethod> method;
    if (!a.method.empty()) {
        method = parse_bound_method(a.method);
        if (!method) throw UsageError("unknown method '" + a.method + "'");
    }
    std::optional<MatrixNorm> norm;
    if (!a.norm.empty()) {
        norm = parse_matrix_norm(a.norm);
        if (!norm) throw UsageError("unknown norm '" + a.norm + "'");
    }

    std::vector<BoundReport> rows;
    if (a.all) {
        rows = bound_suite(pair, a.sigma_min);
        if (a.standard_pair) {
            const auto chain = lemma3_rows(lemma3_analytic_bound(true));
            rows.insert(rows.end(), chain.begin(), chain.end());
        }
    } else if (method) {
        const MatrixNorm nm = norm.value_or(MatrixNorm::None);
        switch (*method) {
            case BoundMethod::SpectralRadiusCurve:
                if (nm != MatrixNorm::None) throw UsageError("rho takes no norm");
                rows.push_back(bound_spectral_radius_curve(pair, a.sigma_min));
                break;
            case BoundMethod::NormPower:
                if (nm == MatrixNorm::None) throw UsageError("norm-power needs --norm");
                rows.push_back(bound_norm_power(pair, nm, a.power, a.sigma_min));
                break;
            case BoundMethod::MoriKokame:
            case BoundMethod::TissirHmamed:
                if (nm == MatrixNorm::None) throw UsageError(a.method + " needs --norm");
                if (nm == MatrixNorm::Frobenius)
                    throw UsageError(a.method + " needs an induced norm; the Frobenius norm is not induced");
                rows.push_back(*method == BoundMethod::MoriKokame ? bound_mori_kokame(pair, nm)
                                                                  : bound_tissir_hmamed(pair, nm));
                break;
            case BoundMethod::Lemma3Analytic:
                if (!a.standard_pair) throw UsageError("lemma3 applies only to --standard-pair");
                rows = lemma3_rows(lemma3_analytic_bound(true));
                break;
        }
    }

    inputs["method"] = a.all ? std::string("all") : a.method;
    inputs["norm"] = a.norm;
    inputs["power"] = a.power;
    Run run(g, "bounds");
    run.inputs() = inputs;
    const std::string csv = io::bounds_csv(rows);
    if (!rows.empty()) run.write("bounds.csv", csv);

    if (a.curves) {
        if (!(a.curve_step > 0.0) || !(a.curve_sigma_max > a.curve_sigma_min))
            throw UsageError("curve range needs --curve-sigma-min < --curve-sigma-max and a positive step");
        run.write("boundary_rho.csv",
                  io::boundary_csv(boundary_curve(pair, BoundMethod::SpectralRadiusCurve, MatrixNorm::None, 1,
                                                  a.curve_sigma_min, a.curve_sigma_max, a.curve_step)));
        for (auto [nm, tag] : {std::pair{MatrixNorm::One, "one"}, std::pair{MatrixNorm::Frobenius, "frobenius"},
                               std::pair{MatrixNorm::Infinity, "infinity"}}) {
            run.write(std::string("boundary_norm-power_") + tag + "_p2.csv",
                      io::boundary_csv(boundary_curve(pair, BoundMethod::NormPower, nm, 2, a.curve_sigma_min,
                                                      a.curve_sigma_max, a.curve_step)));
        }
    }

    if (!g.quiet && !g.json) std::cout << csv;
    json out = json::array();
    for (const auto& r : rows) out.push_back(io::to_json(r));
    run.emit_json({{"bounds", out}});
    run.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string system;
    std::string history = "y01";
    double t_end = 40.0;
    double step = 0.0;
    double t_start = 10.0;
    std::size_t stride = 1;
};

std::vector<std::pair<std::string, HistoryFunction>> parse_history(const std::string& spec) {
    if (spec == "all") {
        std::vector<std::pair<std::string, HistoryFunction>> out;
        for (const auto& name : builtin_history_names()) out.emplace_back(name, builtin_history(name));
        return out;
    }
    if (spec.rfind("const:", 0) == 0) {
        const std::string v = spec.substr(6);
        char* end = nullptr;
        const double c = std::strtod(v.c_str(), &end);
        if (v.empty() || *end != '\0') throw UsageError("bad constant in --history " + spec);
        return {{"const", HistoryFunction::constant(c)}};
    }
    if (spec.rfind("file:", 0) == 0) {
        try {
            return {{"file", io::read_history_csv(spec.substr(5))}};
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    const auto& names = builtin_history_names();
    if (std::find(names.begin(), names.end(), spec) != names.end()) return {{spec, builtin_history(spec)}};
    throw UsageError("unknown history kind '" + spec + "' (use y01..y04, all, const:<v> or file:<path>)");
}

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
    if (!(a.t_end > 0.0)) throw UsageError("--t-end must be positive");
    const auto histories = parse_history(a.history);
    const auto sys = io::read_system(a.system);
    Run run(g, "simulate");
    run.inputs() = {{"system", a.system}, {"history", a.history}, {"t_end", a.t_end},
                    {"step", a.step},     {"t_start", a.t_start}, {"stride", a.stride}};
    json summary = json::array();
    for (const auto& [name, h] : histories) {
        const auto traj = simulate(sys, h, a.t_end, a.step);
        if (histories.size() == 1) run.write("trajectory_" + name + ".csv", io::trajectory_csv(traj));
        run.write("sol_" + name + ".csv", io::solution_csv(traj, a.stride));
        json entry = {{"history", name}, {"step", traj.step}, {"y_end", traj.states.back()(0)}};
        std::string line = "decay_rate " + name + " ";
        try {
            const double r = decay_rate(traj, a.t_start);
            entry["decay_rate"] = r;
            line += io::number(r);
        } catch (const std::invalid_argument&) {
            entry["decay_rate"] = nullptr;
            line += "n/a";
        }
        try {
            const double r = polynomial_corrected_rate(traj, a.t_start);
            entry["polynomial_corrected_rate"] = r;
            line += " corrected " + io::number(r);
        } catch (const std::invalid_argument&) {
            entry["polynomial_corrected_rate"] = nullptr;
        }
        run.say(line);
        summary.push_back(entry);
    }
    run.emit_json({{"simulations", summary}});
    run.finish();
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
    std::string system;
    std::optional<double> s0;
};

int cmd_verify(const Globals& g, const VerifyArgs& a) {
    const auto sys = io::read_system(a.system);
    const double s0 = a.s0.value_or(default_s0(sys));
    Run run(g, "verify");
    run.inputs() = {{"system", a.system}, {"s0", s0}};
    const auto q = to_quasipolynomial(sys);
    const std::size_t n = sys.n;
    json checks = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        all_ok = all_ok && ok;
        checks.push_back({{"check", name}, {"pass", ok}, {"detail", detail}});
        run.say(std::string(ok ? "PASS " : "FAIL ") + name + ": " + detail);
    };

    const std::size_t mult = multiplicity_at(q, s0, 1e-9);
    record("multiplicity", mult == 2 * n,
           "multiplicity at s0 is " + std::to_string(mult) + ", expected " + std::to_string(2 * n));

    const double nd = static_cast<double>(n);
    const double identity = s0 + sys.a.back() / nd + nd / sys.tau;
    const double scale = std::max({1.0, std::abs(s0), std::abs(sys.a.back()) / nd, nd / sys.tau});
    record("trace-identity", std::abs(identity) <= 1e-12 * scale,
           "s0 + a_{n-1}/n + n/tau = " + io::number(identity));

    const auto ns = normalize(sys, s0);
    const auto ref = normalize(mid_coefficients(n, 0.0, 1.0), 0.0);
    double dev = 0.0, mag = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        dev = std::max({dev, std::abs(ns.b[k] - ref.b[k]), std::abs(ns.beta[k] - ref.beta[k])});
        mag = std::max({mag, std::abs(ref.b[k]), std::abs(ref.beta[k])});
    }
    record("normalization", dev <= 1e-8 * mag, "max deviation from the universal normalized form " + io::number(dev));

    if (n == 2) {
        const auto qn = to_quasipolynomial(ns);
        double worst = 0.0;
        const complex samples[] = {{0.5, 0.0}, {-1.0, 2.0}, {1.5, -3.0}, {-2.0, 6.0}, {0.3, 5.5}, {2.0, 1.0}};
        for (const complex z : samples) {
            const double z4 = std::pow(std::abs(z), 4.0);
            const complex k = factorization_kernel(z, 1e-12 / std::max(1.0, z4));
            worst = std::max(worst, std::abs(qn(z) - z * z * z * z * k));
        }
        record("factorization", worst < 1e-10, "max |q(z) - z^4 K(z)| over samples " + io::number(worst));
    }

    try {
        DominanceOptions dopt;
        dopt.finder.threads = thread_budget();
        const auto rep = certify_dominance(sys, s0, s0, dopt);
        record("dominance", rep.strictly_dominant,
               std::string(rep.strictly_dominant ? "s0 is strictly dominant" : "s0 is not strictly dominant") +
                   " (spectral abscissa " + io::number(rep.spectral_abscissa) + ")");
    } catch (const NumericalError& e) {
        record("dominance", false, std::string("inconclusive: ") + e.what());
    }

    run.write("verify.json", json{{"s0", s0}, {"checks", checks}, {"pass", all_ok}}.dump(2) + "\n");
    run.emit_json({{"s0", s0}, {"checks", checks}, {"pass", all_ok}});
    run.finish();
    return all_ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design and analysis of single-delay retarded equations with a maximal-multiplicity root"};
    app.set_version_flag("--version", std::string(MIDSPEC_VERSION));
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
    app.add_flag("--json", g.json, "Machine-readable JSON on stdout");
    app.add_flag("--quiet", g.quiet, "Suppress human-readable output");

    DesignArgs da;
    auto* design = app.add_subcommand("design", "Coefficients placing a root of multiplicity 2n at s0");
    design->add_option("--n", da.n, "Order of the equation")->required()->check(CLI::PositiveNumber);
    design->add_option("--s0", da.s0, "Location of the multiple root")->required();
    design->add_option("--tau", da.tau, "Delay")->required()->check(CLI::PositiveNumber);

    SpectrumArgs sa;
    auto* spectrum = app.add_subcommand("spectrum", "Roots in a region and dominance certification");
    spectrum->add_option("--system", sa.system, "System JSON")->required()->check(CLI::ExistingFile);
    spectrum->add_option("--s0", sa.s0, "Claimed dominant root (default from the trace identity)");
    spectrum->add_option("--re-min", sa.re_min, "Region (default s0 - 5)");
    spectrum->add_option("--re-max", sa.re_max, "Region (default s0 + 1)");
    spectrum->add_option("--im-min", sa.im_min, "Region (default -30)");
    spectrum->add_option("--im-max", sa.im_max, "Region (default 30)");

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "A priori bounds on |Im z| in a right half-plane");
    bounds->add_option("--system", ba.system, "System JSON (normalized at --s0)")->check(CLI::ExistingFile);
    bounds->add_flag("--standard-pair", ba.standard_pair, "Use the normalized second-order pair");
    bounds->add_option("--s0", ba.s0, "Normalization point (default from the trace identity)");
    bounds->add_option("--method", ba.method, "rho, norm-power, mori-kokame, tissir-hmamed or lemma3");
    bounds->add_option("--norm", ba.norm, "one, two, infinity or frobenius (also 1, 2, inf, fro)");
    bounds->add_option("--power", ba.power, "Matrix power for norm-power")->capture_default_str();
    bounds->add_option("--sigma-min", ba.sigma_min, "Half-plane threshold")->capture_default_str();
    bounds->add_flag("--all", ba.all, "Full table suite");
    bounds->add_flag("--curves", ba.curves, "Export feasible-set boundary curves");
    bounds->add_option("--curve-sigma-min", ba.curve_sigma_min)->capture_default_str();
    bounds->add_option("--curve-sigma-max", ba.curve_sigma_max)->capture_default_str();
    bounds->add_option("--curve-step", ba.curve_step)->capture_default_str();

    SimulateArgs ma;
    auto* sim = app.add_subcommand("simulate", "Method-of-steps simulation");
    sim->add_option("--system", ma.system, "System JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--history", ma.history, "y01..y04, all, const:<v> or file:<path>")->capture_default_str();
    sim->add_option("--t-end", ma.t_end, "Final time")->capture_default_str();
    sim->add_option("--step", ma.step, "Step (default tau/500, adjusted to divide tau)");
    sim->add_option("--t-start", ma.t_start, "Start of the decay-rate window")->capture_default_str();
    sim->add_option("--stride", ma.stride, "Keep every k-th point in sol_*.csv")->capture_default_str();

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Consistency checks of a designed system");
    verify->add_option("--system", va.system, "System JSON")->required()->check(CLI::ExistingFile);
    verify->add_option("--s0", va.s0, "Designed root (default from the trace identity)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*design) return cmd_design(g, da);
        if (*spectrum) return cmd_spectrum(g, sa);
        if (*bounds) return cmd_bounds(g, ba);
        if (*sim) return cmd_simulate(g, ma);
        if (*verify) return cmd_verify(g, va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Inconclusive& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return kExitInconclusive;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal failure: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
