#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtrap/errors.hpp"
#include "qtrap/trap_dynamics.hpp"

namespace qtrap {

/// Alpha: y ~ x^exponent with x = 1 - r. Gamma: y ~ x^{-exponent} with x = t.
enum class FitMode { Alpha, Gamma };

struct FitPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Half-open index range [begin, end) into a point list.
struct FitWindow {
    std::size_t begin = 0;
    std::size_t end = 0;

    static FitWindow all(std::size_t n) { return {0, n}; }
    std::size_t size() const noexcept { return end - begin; }
};

struct ExponentFit {
    double exponent = 0.0;
    double intercept = 0.0;  // of log y against log x
    double residual = 0.0;   // max |log y - fitted line| over the window
    FitWindow window;
    bool out_of_range = false;  // exponent outside [0, 1]
};

/// Least-squares line through (log x, log y) on the window.
inline ExponentFit fit_exponent(const std::vector<FitPoint>& points, FitWindow window, FitMode mode = FitMode::Alpha) {
    if (window.end > points.size() || window.begin > window.end)
        throw ArgumentError("fit_exponent: window exceeds the point list");
    if (window.size() < 3) throw ArgumentError("fit_exponent: need at least 3 points in the window");

    std::vector<double> lx, ly;
    for (std::size_t i = window.begin; i < window.end; ++i) {
        const auto& p = points[i];
        if (!(p.x > 0.0) || !(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y))
            throw ArgumentError("fit_exponent: point " + std::to_string(i) + " is not strictly positive");
        lx.push_back(std::log(p.x));
        ly.push_back(std::log(p.y));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) throw ArgumentError("fit_exponent: x values are all equal");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    ExponentFit fit;
    fit.exponent = mode == FitMode::Alpha ? slope : -slope;
    fit.intercept = intercept;
    fit.window = window;
    for (std::size_t i = 0; i < lx.size(); ++i)
        fit.residual = std::max(fit.residual, std::abs(ly[i] - (intercept + slope * lx[i])));
    fit.out_of_range = fit.exponent < 0.0 || fit.exponent > 1.0;
    return fit;
}

inline ExponentFit fit_exponent(const std::vector<FitPoint>& points, FitMode mode = FitMode::Alpha) {
    return fit_exponent(points, FitWindow::all(points.size()), mode);
}

/// Points (1 - r, Jtilde) of a ladder scan, true or imaginary-part-dropped.
inline std::vector<FitPoint> alpha_points(const std::vector<LadderPoint>& ladder, bool include_imaginary) {
    std::vector<FitPoint> pts;
    for (const auto& p : ladder) pts.push_back({p.one_minus_r, include_imaginary ? p.jtilde_true : p.jtilde_no_im});
    return pts;
}

enum class Agreement { Agree, Disagree, NotApplicable };

struct TauberianResult {
    std::optional<ExponentFit> gamma;  // empty when J(t) is not fittable
    std::optional<ExponentFit> alpha;
    Agreement agree = Agreement::NotApplicable;
};

inline constexpr double exponent_tolerance = 0.1;

/// Compares the time exponent of J(t) with the radial exponent of Jtilde(r).
/// Each radius r is paired with t = round(1 / (1 - r)).
inline TauberianResult tauberian_check(const CurrentSeries& series, const std::vector<std::pair<double, double>>& ladder) {
    TauberianResult out;
    std::vector<FitPoint> alpha_pts, gamma_pts;
    bool gamma_ok = true;
    for (const auto& [r, jt] : ladder) {
        alpha_pts.push_back({1.0 - r, jt});
        const int t = static_cast<int>(std::lround(1.0 / (1.0 - r)));
        if (t > series.length())
            throw ArgumentError("tauberian_check: current series shorter than t = " + std::to_string(t));
        const double j = series.current(t);
        if (!(j > 0.0)) gamma_ok = false;
        gamma_pts.push_back({static_cast<double>(t), j});
    }
    out.alpha = fit_exponent(alpha_pts, FitMode::Alpha);
    if (gamma_ok) out.gamma = fit_exponent(gamma_pts, FitMode::Gamma);
    if (out.gamma && out.alpha)
        out.agree = std::abs(out.gamma->exponent - out.alpha->exponent) <= exponent_tolerance ? Agreement::Agree
                                                                                             : Agreement::Disagree;
    return out;
}

// ---------------------------------------------------------------------------
// closed-form bounds (natural logarithms throughout)

/// S(q) = -q log q - (1-q) log(1-q).
inline double shannon_entropy(double q) {
    auto term = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
    return term(q) + term(1.0 - q);
}

/// S(p1|p2) = p1 log p1 + (1-p1) log(1-p1) - p1 log p2 - (1-p1) log(1-p2).
inline double relative_entropy(double p1, double p2) {
    auto xlogy = [](double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; };
    return xlogy(p1, p1) + xlogy(1.0 - p1, 1.0 - p1) - xlogy(p1, p2) - xlogy(1.0 - p1, 1.0 - p2);
}

struct BernoulliBound {
    double q = 0.0;
    double alpha_lower = 0.0;
};

/// Lower bound on the Jtilde exponent of the Bernoulli measure mu_p.
///
/// For p < 1/2, q = log(2(1-p)) / log((1-p)/p) balances S(q|1/2) = S(q|p)
/// and lies in (p, 1/2); p > 1/2 is mapped to 1 - p (mirror measure).
inline BernoulliBound bernoulli_bound(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("bernoulli_bound: p must lie strictly between 0 and 1");
    if (p == 0.5) throw ArgumentError("bernoulli_bound: p = 1/2 is the Lebesgue measure, the bound degenerates");
    const double pp = p < 0.5 ? p : 1.0 - p;
    const double q = std::log(2.0 * (1.0 - pp)) / std::log((1.0 - pp) / pp);
    const double s = shannon_entropy(q);
    const double ln2 = std::numbers::ln2;
    return {q, (ln2 - s) / (2.0 * ln2 - s)};
}

/// Exponent (alpha - 1) / (2 alpha - 1) for atomic weights rho_j ~ j^{-alpha}.
inline double powerlaw_atomic_bound(double alpha) {
    if (!(alpha > 1.0)) throw ArgumentError("powerlaw_atomic_bound: weights j^{-alpha} need alpha > 1");
    if (std::isinf(alpha)) return 0.5;
    return (alpha - 1.0) / (2.0 * alpha - 1.0);
}

}  // namespace qtrap
