// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <fmt/core.h>

#include "qtrap/qtrap.hpp"

using namespace qtrap;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::vector<LadderPoint> scan(const MomentSequence& mu, const std::vector<double>& rs, int mesh) {
    std::vector<LadderPoint> out;
    for (double r : rs) out.push_back(jtilde_point(mu, r, mesh));
    return out;
}

bool within_rel(double x, double target, double rel) { return std::abs(x - target) <= rel * target; }

Verdict dirac_exactness() {
    Verdict v;
    const auto rs = dyadic_ladder(3, 10);
    const MomentSequence mu = moments(dirac(), ladder_order(rs));
    double worst = 0.0;
    for (double r : rs) {
        const auto series = jtilde_series(current_series(mu, series_length(r)).K, r);
        worst = std::max(worst, std::abs(series - (1.0 - r * r)));
    }
    v.require(worst <= 1e-12, fmt::format("max |Jtilde - (1 - r^2)| = {:.3g}", worst));
    const auto ladder = scan(mu, rs, 8192);
    const double a_true = fit_exponent(alpha_points(ladder, true)).exponent;
    const double a_no = fit_exponent(alpha_points(ladder, false)).exponent;
    v.require(std::abs(a_true - 1.0) <= 0.02, fmt::format("alpha = {:.4f}", a_true));
    v.require(std::abs(a_no - 0.5) <= 0.05, fmt::format("alpha (Im G dropped) = {:.4f}", a_no));
    if (v.pass) v.detail = fmt::format("max err {:.1e}, alpha {:.4f}, alpha noIm {:.4f}", worst, a_true, a_no);
    return v;
}

Verdict analytical_bounds() {
    Verdict v;
    const double a = bernoulli_bound(1.0 / 3.0).alpha_lower;
    const double b = bernoulli_bound(0.95).alpha_lower;
    v.require(std::abs(a - 2.05e-2) <= 1e-3, fmt::format("p=1/3 bound {:.4g}", a));
    v.require(std::abs(b - 1.96e-1) <= 1e-3, fmt::format("p=0.95 bound {:.4g}", b));
    if (v.pass) v.detail = fmt::format("p=1/3: {:.4g}, p=0.95: {:.4g}", a, b);
    return v;
}

Verdict numerical_exponents() {
    Verdict v;
    const auto rs = dyadic_ladder(4, 10);
    struct Row {
        double p, with_im, no_im;
    };
    for (const Row& row : {Row{1.0 / 3.0, 5.6e-2, 3.7e-2}, Row{0.95, 4.2e-1, 3.2e-1}}) {
        const MomentSequence mu = moments(BernoulliMeasure{row.p, 13}, ladder_order(rs));
        const auto ladder = scan(mu, rs, 1 << 13);
        const double w = fit_exponent(alpha_points(ladder, true)).exponent;
        const double n = fit_exponent(alpha_points(ladder, false)).exponent;
        v.require(within_rel(w, row.with_im, 0.1), fmt::format("p={:.3g} withIm {:.4g}", row.p, w));
        v.require(within_rel(n, row.no_im, 0.1), fmt::format("p={:.3g} noIm {:.4g}", row.p, n));
        if (v.pass) v.detail += fmt::format("{}p={:.3g}: withIm {:.4g}, noIm {:.4g}", v.detail.empty() ? "" : "; ", row.p, w, n);
    }
    return v;
}

Verdict dichotomy() {
    Verdict v;
    const auto rho = [](double t) { return 1.0 + std::cos(t); };
    // the grid must be finer than the time horizon, or the moments alias
    const DensityMeasure dens = make_density(rho, 16384);
    const double j_inf = asymptotic_current_ac(dens);
    const CurrentSeries cs = current_series(moments(dens, 4096), 4096);
    const double j_t = cs.current(4096);
    v.require(j_t >= 0.9 * j_inf, fmt::format("J(4096) = {:.6f} vs J_inf = {:.6f}", j_t, j_inf));
    // second route: long-time current from the exact moments (1, 1/2, 0, ...)
    std::vector<cplx> exact(4097, 0.0);
    exact[0] = 1.0;
    exact[1] = 0.5;
    const double j_long = current_series(MomentSequence(exact), 4096).current(4096);
    v.require(std::abs(j_long - j_inf) <= 1e-2, fmt::format("routes differ by {:.3g}", std::abs(j_long - j_inf)));

    const auto rs = dyadic_ladder(4, 10);
    const auto ladder = scan(moments(BernoulliMeasure{1.0 / 3.0, 13}, ladder_order(rs)), rs, 8192);
    for (std::size_t i = 1; i < ladder.size(); ++i)
        v.require(ladder[i].jtilde_true < ladder[i - 1].jtilde_true, fmt::format("not decreasing at k = {}", 4 + i));
    if (v.pass)
        v.detail = fmt::format("J(4096) = {:.6f}, J_inf = {:.6f} / {:.6f}, Bernoulli Jtilde {:.4f} -> {:.4f}", j_t, j_inf, j_long,
                               ladder.front().jtilde_true, ladder.back().jtilde_true);
    return v;
}

Verdict oracle_triple() {
    Verdict v;
    const TrapSystem sys = shift_system(64);
    CVector phi = CVector::Zero(64);
    phi(0) = 1.0;
    const MomentSequence mu = moments_from_state(sys.unitary(), phi, 31);
    const CurrentSeries cs = current_series(mu, 31);
    const auto kry = krylov_current(mu, 31);
    double worst = 0.0, tel = 0.0, running = 0.0;
    for (int t = 1; t <= 31; ++t) {
        const double jt = trap_current(sys, t);
        running += jt;
        tel = std::max(tel, std::abs(trapped_number(sys, t) - running));
        if (t < 2) continue;
        const double js = cs.current(t), jk = kry[t - 1];
        worst = std::max({worst, std::abs(js - jk), std::abs(js - jt), std::abs(jk - jt)});
    }
    v.require(worst <= 1e-10, fmt::format("pairwise difference {:.3g}", worst));
    v.require(tel <= 1e-9, fmt::format("telescoping difference {:.3g}", tel));
    if (v.pass) v.detail = fmt::format("max pairwise {:.1e}, telescoping {:.1e}", worst, tel);
    return v;
}

Verdict random_walk() {
    Verdict v;
    const double scaled = rw_current(1000).J * std::sqrt(2000.0 * std::numbers::pi);
    v.require(std::abs(scaled - 1.0) <= 5e-3, fmt::format("J(1000) sqrt(2000 pi) = {:.6f}", scaled));
    const auto p_ext = [](int x, int t) {
        if (x == 0) return t == 0 ? 1.0 : 0.0;
        return t == 0 ? 0.0 : rw_first_passage(x, t);
    };
    bool exact = true;
    for (int t = 1; t <= 30; ++t) {
        double col = 0.0;
        for (int x = 1; x <= 31; ++x) {
            const double p = rw_first_passage(x, t);
            exact &= p == 0.5 * (p_ext(x - 1, t - 1) + p_ext(x + 1, t - 1));
            col += p;
        }
        exact &= std::abs(col - rw_current(t).J) <= 1e-15;
    }
    v.require(exact, "recursion or column-sum identity broken");
    if (v.pass) v.detail = fmt::format("J(1000) sqrt(2000 pi) = {:.6f}", scaled);
    return v;
}

Verdict entropy_link() {
    Verdict v;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> size(1, 8);
    int violations = 0;
    double eq_worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double kappa = 0.05 + 0.9 * u(rng);
        const bool sharp = i % 4 == 0;  // every fourth draw has a {0, 1} spectrum
        std::vector<double> spec(static_cast<std::size_t>(size(rng)));
        double trace = 0.0;
        for (double& d : spec) trace += (d = sharp ? std::round(u(rng)) : u(rng));
        const EntropyReport r = refined_entropy_from_spectrum(kappa, spec, trace);
        if (r.h_lower > r.h_exact + 1e-12) ++violations;
        if (sharp) eq_worst = std::max(eq_worst, std::abs(r.h_exact - r.h_lower));
    }
    v.require(violations == 0, fmt::format("{} bound violations", violations));
    v.require(eq_worst <= 1e-12, fmt::format("equality case off by {:.3g}", eq_worst));

    const TrapSystem sys = shift_system(64);
    double trace_worst = 0.0;
    for (int t = 1; t <= 31; ++t)
        trace_worst = std::max(trace_worst, std::abs(evolved_defect(sys.unitary(), sys.survival(), t).trace().real() -
                                                     trapped_number(sys, t)));
    v.require(trace_worst <= 1e-9, fmt::format("Tr D_t vs N(t) off by {:.3g}", trace_worst));
    if (v.pass) v.detail = fmt::format("200 draws, equality err {:.1e}, Tr D_t err {:.1e}", eq_worst, trace_worst);
    return v;
}

Verdict parseval() {
    Verdict v;
    const std::vector<std::pair<std::string, SpectralMeasure>> measures{
        {"dirac", dirac()},
        {"lebesgue", lebesgue()},
        {"two-atom", make_atomic({0.3, 2.0}, {0.4, 0.6})},
        {"1+cos", make_density([](double t) { return 1.0 + std::cos(t); }, 32768)},
        {"bernoulli 1/3", BernoulliMeasure{1.0 / 3.0, 13}},
        {"bernoulli 0.95", BernoulliMeasure{0.95, 13}},
    };
    const auto rs = dyadic_ladder(3, 10);
    double worst = 0.0;
    for (const auto& [name, m] : measures) {
        const MomentSequence mu = moments(m, std::max(ladder_order(rs), series_length(rs.back())));
        for (double r : rs) {
            const double series = jtilde_series(current_series(mu, series_length(r)).K, r);
            const double integral = jtilde_integral(mu, r, parseval_mesh(r), true);
            const double d = std::abs(series - integral);
            worst = std::max(worst, d);
            v.require(d <= 1e-6, fmt::format("{} r = {:.6f}: {:.3g}", name, r, d));
        }
    }
    if (v.pass) v.detail = fmt::format("{} measures, max difference {:.1e}", measures.size(), worst);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"Dirac exactness", dirac_exactness},
        {"Bernoulli analytical bounds", analytical_bounds},
        {"Bernoulli numerical exponents", numerical_exponents},
        {"absolutely continuous vs singular dichotomy", dichotomy},
        {"oracle triple agreement", oracle_triple},
        {"random walk baseline", random_walk},
        {"entropy bound and current link", entropy_link},
        {"Parseval bridge", parseval},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failures;
        fmt::print("[{}] {} {} ({:.2f} s): {}\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs, v.detail);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
