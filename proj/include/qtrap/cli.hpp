#pragma once

// Batch front end. A run is one command plus one config file; every run
// writes its artifacts under the configured output prefix together with a
// manifest holding the resolved configuration and SHA-256 checksums.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "qtrap/classical_baselines.hpp"
#include "qtrap/config.hpp"
#include "qtrap/exponent_estimation.hpp"
#include "qtrap/fermion_entropy.hpp"
#include "qtrap/io.hpp"
#include "qtrap/matrix_oracle.hpp"
#include "qtrap/spectral_measure.hpp"
#include "qtrap/trap_dynamics.hpp"

namespace qtrap::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_tolerance = 2, exit_io = 3 };

inline const std::set<std::string>& commands() {
    static const std::set<std::string> names{"moments",  "current",        "jtilde-scan", "exponent",
                                             "bernoulli-table", "entropy", "oracle-compare", "baselines"};
    return names;
}

struct Artifact {
    std::string name;  // suffix appended to the output prefix
    std::string content;
};

struct Outcome {
    int status = exit_ok;
    std::vector<Artifact> artifacts;
    std::vector<std::string> messages;  // human-readable lines for stdout
};

using ojson = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

inline std::string dump_json(const ojson& j) {
    std::string out = j.dump(2);
    out += '\n';
    return out;
}

// JSON floats use the json library's shortest round-trip form, which
// reproduces the double bit for bit.
inline ojson number(double x) { return x; }

inline ojson fit_json(const ExponentFit& fit) {
    ojson j;
    j["exponent"] = number(fit.exponent);
    j["intercept"] = number(fit.intercept);
    j["residual"] = number(fit.residual);
    j["window"] = {fit.window.begin, fit.window.end};
    return j;
}

// ---------------------------------------------------------------------------
// config sections

inline SpectralMeasure measure_from_config(const Config& cfg) {
    const std::string type = cfg.choice("measure.type", {"atomic", "density", "bernoulli"});
    if (type == "atomic") {
        const auto angles = cfg.numbers("measure.angles");
        const auto weights = cfg.numbers("measure.weights");
        if (angles.size() != weights.size()) throw ConfigError("measure.weights", "needs one weight per angle");
        if (angles.empty()) throw ConfigError("measure.angles", "at least one atom is required");
        AtomicMeasure m = make_atomic(angles, weights);
        validate(m);
        return m;
    }
    if (type == "density") {
        const bool inline_values = cfg.has("measure.values");
        const bool from_file = cfg.has("measure.values_csv");
        if (inline_values == from_file) throw ConfigError("measure.values", "give exactly one of values, values_csv");
        std::vector<double> values;
        if (inline_values) {
            values = cfg.numbers("measure.values");
        } else {
            const CsvData data = read_csv(cfg.path("measure.values_csv"));
            if (data.rows.front().size() != 1) throw ConfigError("measure.values_csv", "expected a one-column CSV");
            for (const auto& row : data.rows) values.push_back(row[0]);
        }
        if (values.size() < 2) throw ConfigError("measure.values", "density grid needs at least 2 points");
        DensityMeasure m{values};
        validate(m);
        return m;
    }
    const double p = cfg.number("measure.p");
    const long long level = cfg.integer("measure.level", default_bernoulli_level);
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("measure.p", "must lie strictly between 0 and 1");
    if (level < 1 || level > max_bernoulli_level)
        throw ConfigError("measure.level", "must lie in [1, " + std::to_string(max_bernoulli_level) + "]");
    return BernoulliMeasure{p, static_cast<int>(level)};
}

inline TrapSystem system_from_config(const Config& cfg) {
    const std::string kind = cfg.choice("system.kind", {"shift", "random"});
    const long long dim = cfg.integer("system.dim");
    if (dim < 2 || dim > 512) throw ConfigError("system.dim", "must lie in [2, 512]");
    const auto weights = cfg.numbers("system.trap_weights", std::vector<double>{1.0});
    for (double w : weights)
        if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("system.trap_weights", "each weight must lie in [0, 1]");
    if (static_cast<long long>(weights.size()) > dim) throw ConfigError("system.trap_weights", "more weights than dim");

    CMatrix u;
    if (kind == "shift") {
        u = shift_unitary(dim);
    } else {
        const long long seed = cfg.integer("system.seed");
        u = random_unitary(dim, static_cast<std::uint64_t>(seed));
    }
    const std::string basis = cfg.choice("system.trap_basis", {"standard", "random"}, "standard");
    CMatrix a;
    if (basis == "standard") {
        std::vector<long long> def(weights.size());
        for (std::size_t j = 0; j < def.size(); ++j) def[j] = static_cast<long long>(j);
        const auto idx = cfg.integers("system.trap_indices", def);
        if (idx.size() != weights.size()) throw ConfigError("system.trap_indices", "needs one index per weight");
        std::set<long long> seen;
        for (long long i : idx) {
            if (i < 0 || i >= dim) throw ConfigError("system.trap_indices", "index " + std::to_string(i) + " out of range");
            if (!seen.insert(i).second) throw ConfigError("system.trap_indices", "repeated index " + std::to_string(i));
        }
        a = trap_from_basis(dim, weights, std::vector<Eigen::Index>(idx.begin(), idx.end()));
    } else {
        const long long seed = cfg.integer("system.trap_seed");
        const CMatrix vecs = random_unitary(dim, static_cast<std::uint64_t>(seed));
        a = trap_from_vectors(weights, vecs.leftCols(static_cast<Eigen::Index>(weights.size())));
    }
    return TrapSystem(u, a);
}

inline FitWindow window_from_config(const Config& cfg, std::size_t n) {
    const long long b = cfg.integer("run.window_begin", 0);
    const long long e = cfg.integer("run.window_end", static_cast<long long>(n));
    if (b < 0 || e > static_cast<long long>(n) || e - b < 3)
        throw ConfigError("run.window_begin", "window [" + std::to_string(b) + ", " + std::to_string(e) +
                                                  ") must hold at least 3 of " + std::to_string(n) + " points");
    return {static_cast<std::size_t>(b), static_cast<std::size_t>(e)};
}

inline int positive_int(const Config& cfg, const std::string& key, long long fallback, long long max) {
    const long long v = cfg.integer(key, fallback);
    if (v < 1 || v > max) throw ConfigError(key, "must lie in [1, " + std::to_string(max) + "]");
    return static_cast<int>(v);
}

inline std::vector<LadderPoint> scan_ladder(const MomentSequence& mu, const std::vector<double>& rs, int mesh,
                                            unsigned workers) {
    return parallel_map<LadderPoint>(rs.size(), [&](std::size_t i) { return jtilde_point(mu, rs[i], mesh); }, workers);
}

inline std::string ladder_csv(const std::vector<LadderPoint>& ladder) {
    CsvTable t({"r", "one_minus_r", "Jtilde_true", "Jtilde_noIm"});
    for (const auto& p : ladder) t.add_row({p.r, p.one_minus_r, p.jtilde_true, p.jtilde_no_im});
    return t.render();
}

// ---------------------------------------------------------------------------
// commands

inline Outcome cmd_moments(const Config& cfg) {
    const SpectralMeasure m = measure_from_config(cfg);
    const int order = positive_int(cfg, "run.order", 64, 1 << 24);
    const MomentSequence mu = moments(m, order);
    CsvTable t({"s", "mu_re", "mu_im"});
    for (int s = 0; s <= order; ++s) t.add_row({double(s), mu[s].real(), mu[s].imag()});
    return {exit_ok, {{"moments.csv", t.render()}}, {"moments: order " + std::to_string(order)}};
}

inline Outcome cmd_current(const Config& cfg) {
    const SpectralMeasure m = measure_from_config(cfg);
    const int T = positive_int(cfg, "run.T", 1000, 1 << 20);
    const CurrentSeries cs = current_series(moments(m, T), T);
    CsvTable t({"t", "K_re", "K_im", "J", "N"});
    for (int s = 1; s <= T; ++s) {
        const cplx k = cs.K[static_cast<std::size_t>(s - 1)];
        t.add_row({double(s), k.real(), k.imag(), cs.current(s), cs.trapped(s)});
    }
    return {exit_ok, {{"current.csv", t.render()}}, {"current: J(T) = " + format_double(cs.current(T))}};
}

inline Outcome cmd_jtilde_scan(const Config& cfg, unsigned workers) {
    const SpectralMeasure m = measure_from_config(cfg);
    const int k_min = positive_int(cfg, "run.k_min", 3, 30);
    const int k_max = positive_int(cfg, "run.k_max", 10, 30);
    if (k_max < k_min) throw ConfigError("run.k_max", "must not be below run.k_min");
    const int mesh = positive_int(cfg, "run.mesh", 8192, 1 << 22);
    const auto rs = dyadic_ladder(k_min, k_max);
    const FitWindow window = window_from_config(cfg, rs.size());

    const MomentSequence mu = moments(m, ladder_order(rs));
    const auto ladder = scan_ladder(mu, rs, mesh, workers);
    const ExponentFit with_im = fit_exponent(alpha_points(ladder, true), window);
    const ExponentFit no_im = fit_exponent(alpha_points(ladder, false), window);
    ojson fits;
    fits["withIm"] = fit_json(with_im);
    fits["noIm"] = fit_json(no_im);
    return {exit_ok,
            {{"jtilde.csv", ladder_csv(ladder)}, {"fits.json", dump_json(fits)}},
            {"alpha (with Im G) = " + format_double(with_im.exponent),
             "alpha (Im G dropped) = " + format_double(no_im.exponent)}};
}

inline Outcome cmd_exponent(const Config& cfg) {
    const CsvData data = read_csv(cfg.path("run.input"));
    const std::size_t width = data.rows.front().size();
    std::size_t cx = 0, cy = 1;
    if (cfg.has("run.x_column") || cfg.has("run.y_column")) {
        if (data.header.empty()) throw ConfigError("run.x_column", "input CSV has no header row");
        cx = data.column_index(cfg.string("run.x_column"));
        cy = data.column_index(cfg.string("run.y_column"));
    } else if (width < 2) {
        throw ConfigError("run.input", "expected at least two columns");
    }
    const std::string mode = cfg.choice("run.mode", {"alpha", "gamma"}, "alpha");
    std::vector<FitPoint> pts;
    for (const auto& row : data.rows) pts.push_back({row[cx], row[cy]});
    const FitWindow window = window_from_config(cfg, pts.size());
    const ExponentFit fit = fit_exponent(pts, window, mode == "alpha" ? FitMode::Alpha : FitMode::Gamma);
    return {exit_ok, {{"exponent.json", dump_json(fit_json(fit))}}, {"exponent = " + format_double(fit.exponent)}};
}

inline Outcome cmd_bernoulli_table(const Config& cfg, unsigned workers) {
    const auto ps = cfg.numbers("run.p_values", std::vector<double>{1.0 / 3.0, 0.95});
    if (ps.empty()) throw ConfigError("run.p_values", "at least one p is required");
    for (double p : ps)
        if (!(p > 0.0 && p < 1.0) || p == 0.5) throw ConfigError("run.p_values", "each p must lie in (0, 1) and differ from 1/2");
    const int level = positive_int(cfg, "run.level", default_bernoulli_level, max_bernoulli_level);
    const int k_min = positive_int(cfg, "run.k_min", 4, 30);
    const int k_max = positive_int(cfg, "run.k_max", 10, 30);
    if (k_max < k_min) throw ConfigError("run.k_max", "must not be below run.k_min");
    const int mesh = positive_int(cfg, "run.mesh", 8192, 1 << 22);
    const auto rs = dyadic_ladder(k_min, k_max);
    const FitWindow window = window_from_config(cfg, rs.size());
    const int order = ladder_order(rs);

    const auto mus = parallel_map<MomentSequence>(
        ps.size(), [&](std::size_t i) { return moments(BernoulliMeasure{ps[i], level}, order); }, workers);
    const std::size_t n = rs.size();
    const auto points = parallel_map<LadderPoint>(
        ps.size() * n, [&](std::size_t i) { return jtilde_point(mus[i / n], rs[i % n], mesh); }, workers);

    Outcome out;
    CsvTable table({"p", "alpha_analytical", "alpha_noIm", "alpha_withIm"});
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const std::vector<LadderPoint> ladder(points.begin() + static_cast<std::ptrdiff_t>(i * n),
                                              points.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        const double analytic = bernoulli_bound(ps[i]).alpha_lower;
        const double no_im = fit_exponent(alpha_points(ladder, false), window).exponent;
        const double with_im = fit_exponent(alpha_points(ladder, true), window).exponent;
        table.add_row({ps[i], analytic, no_im, with_im});
        out.artifacts.push_back({"jtilde_p" + std::to_string(i) + ".csv", ladder_csv(ladder)});
        out.messages.push_back("p = " + format_double(ps[i]) + ": analytical " + format_double(analytic) + ", noIm " +
                               format_double(no_im) + ", withIm " + format_double(with_im));
    }
    out.artifacts.insert(out.artifacts.begin(), {"table.csv", table.render()});
    return out;
}

inline Outcome cmd_entropy(const Config& cfg) {
    const TrapSystem sys = system_from_config(cfg);
    const double kappa = cfg.number("run.kappa");
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("run.kappa", "must lie strictly between 0 and 1");
    const int t_max = positive_int(cfg, "run.t_max", 8, 1024);
    const std::string units = cfg.choice("run.units", {"nats", "bits"}, "nats");
    const double scale = units == "bits" ? 1.0 / std::numbers::ln2 : 1.0;

    CsvTable t({"t", "trace_defect", "H_exact_nats", "H_lower_nats", "trapped_number"});
    EntropyReport last;
    for (int s = 1; s <= t_max; ++s) {
        last = refined_entropy(kappa, evolved_defect(sys.unitary(), sys.survival(), s), s);
        t.add_row({double(s), last.trace_defect, last.h_exact, last.h_lower, trapped_number(sys, s)});
    }
    ojson rep;
    rep["t"] = last.t;
    rep["kappa"] = number(last.kappa);
    rep["defect_spectrum"] = ojson::array();
    for (double d : last.defect_spectrum) rep["defect_spectrum"].push_back(number(d));
    rep["trace_defect"] = number(last.trace_defect);
    rep["H_exact_nats"] = number(last.h_exact);
    rep["H_lower_nats"] = number(last.h_lower);
    return {exit_ok,
            {{"entropy.csv", t.render()}, {"entropy.json", dump_json(rep)}},
            {"t = " + std::to_string(t_max) + ": H = " + format_double(last.h_exact * scale) + " " + units +
             ", lower bound " + format_double(last.h_lower * scale) + " " + units}};
}

/// The unit vector phi of a rank-1 projector trap |phi><phi|.
inline CVector projector_state(const TrapSystem& sys) {
    const HermitianEigen eig = jacobi_eigh(sys.trap());
    const Eigen::Index n = eig.values.size();
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        if (std::abs(eig.values(i)) > 1e-10) throw ConfigError("system.trap_weights", "oracle-compare needs a rank-1 projector trap");
    if (std::abs(eig.values(n - 1) - 1.0) > 1e-10)
        throw ConfigError("system.trap_weights", "oracle-compare needs a rank-1 projector trap");
    return eig.vectors.col(n - 1);
}

inline Outcome cmd_oracle_compare(const Config& cfg) {
    const TrapSystem sys = system_from_config(cfg);
    const CVector phi = projector_state(sys);
    const long long def = std::clamp<long long>(sys.dim() / 2 - 1, 1, max_gram_order);
    const int t_max = positive_int(cfg, "run.t_max", def, max_gram_order);
    const double tol = cfg.number("run.tolerance", 1e-10);
    const double tel_tol = cfg.number("run.telescoping_tolerance", 1e-9);
    if (!(tol > 0.0)) throw ConfigError("run.tolerance", "must be positive");
    if (!(tel_tol > 0.0)) throw ConfigError("run.telescoping_tolerance", "must be positive");

    const MomentSequence mu = moments_from_state(sys.unitary(), phi, t_max);
    const CurrentSeries cs = current_series(mu, t_max);
    const std::vector<double> kry = krylov_current(mu, t_max);

    CsvTable t({"t", "J_series", "J_krylov", "J_trace", "N_series", "N_trace"});
    double max_diff = 0.0, max_tel = 0.0, running = 0.0;
    for (int s = 1; s <= t_max; ++s) {
        const double jt = trap_current(sys, s);
        const double nt = trapped_number(sys, s);
        const double js = cs.current(s), jk = kry[static_cast<std::size_t>(s - 1)];
        running += jt;
        max_diff = std::max({max_diff, std::abs(js - jk), std::abs(js - jt), std::abs(jk - jt)});
        max_tel = std::max(max_tel, std::abs(nt - running));
        t.add_row({double(s), js, jk, jt, cs.trapped(s), nt});
    }
    const bool pass = max_diff <= tol && max_tel <= tel_tol;
    ojson rep;
    rep["t_max"] = t_max;
    rep["max_abs_diff"] = number(max_diff);
    rep["max_telescoping_diff"] = number(max_tel);
    rep["tolerance"] = number(tol);
    rep["telescoping_tolerance"] = number(tel_tol);
    rep["pass"] = pass;
    return {pass ? exit_ok : exit_tolerance,
            {{"oracle.csv", t.render()}, {"oracle.json", dump_json(rep)}},
            {"max |dJ| = " + format_double(max_diff) + ", max |dN| = " + format_double(max_tel) +
             (pass ? "" : " (tolerance exceeded)")}};
}

inline Outcome cmd_baselines(const Config& cfg) {
    const int t_max = positive_int(cfg, "run.t_max", 1000, 1000000);
    const double d = cfg.number("run.diffusivity", 0.5);
    if (!(d > 0.0)) throw ConfigError("run.diffusivity", "must be positive");
    CsvTable walk({"t", "J"}), fick({"t", "J"});
    for (int s = 1; s <= t_max; ++s) {
        walk.add_row({double(s), rw_current(s).J});
        fick.add_row({double(s), diffusion_current(d, s)});
    }
    return {exit_ok,
            {{"rw_current.csv", walk.render()}, {"diffusion_current.csv", fick.render()}},
            {"J(" + std::to_string(t_max) + ") sqrt(2 pi t) = " +
             format_double(rw_current(t_max).J * std::sqrt(2.0 * std::numbers::pi * t_max))}};
}

inline Outcome execute(const std::string& command, const Config& cfg, unsigned workers) {
    if (command == "moments") return cmd_moments(cfg);
    if (command == "current") return cmd_current(cfg);
    if (command == "jtilde-scan") return cmd_jtilde_scan(cfg, workers);
    if (command == "exponent") return cmd_exponent(cfg);
    if (command == "bernoulli-table") return cmd_bernoulli_table(cfg, workers);
    if (command == "entropy") return cmd_entropy(cfg);
    if (command == "oracle-compare") return cmd_oracle_compare(cfg);
    if (command == "baselines") return cmd_baselines(cfg);
    throw ValidationError("unknown command '" + command + "'");
}

/// Manifest text for a finished run; artifact names are listed with their
/// checksums in emission order.
inline std::string manifest(const std::string& command, const Config& cfg, const std::string& prefix,
                            const Outcome& outcome) {
    ojson j;
    j["command"] = command;
    ojson conf = cfg.resolved();
    conf["output"] = prefix;
    j["config"] = conf;
    j["status"] = outcome.status;
    j["artifacts"] = ojson::array();
    for (const auto& a : outcome.artifacts) {
        ojson e;
        e["file"] = std::filesystem::path(prefix + "_" + a.name).filename().string();
        e["sha256"] = sha256_hex(a.content);
        j["artifacts"].push_back(e);
    }
    return dump_json(j);
}

/// Loads the config, runs the command, writes artifacts and the manifest.
/// Returns the process exit status.
inline int run(const std::string& command, const std::filesystem::path& config_path, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    try {
        if (!commands().count(command)) throw ValidationError("unknown command '" + command + "'");
        const Config cfg = Config::load(config_path);
        const std::string prefix = cfg.string("output", "qtrap_" + command);
        if (prefix.empty()) throw ConfigError("output", "must not be empty");
        const unsigned workers = worker_count();
        Outcome outcome = execute(command, cfg, workers);
        cfg.reject_unknown();

        for (const auto& a : outcome.artifacts) write_text(prefix + "_" + a.name, a.content);
        write_text(prefix + "_manifest.json", manifest(command, cfg, prefix, outcome));
        for (const auto& m : outcome.messages) out << m << '\n';
        return outcome.status;
    } catch (const ConfigIoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::invalid_argument& e) {  // ValidationError, ArgumentError, ConfigError
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::logic_error& e) {  // ResourceError and friends
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {  // ConvergenceError and anything unexpected
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
}

}  // namespace qtrap::cli
