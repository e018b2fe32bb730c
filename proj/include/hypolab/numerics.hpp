#pragma once

// Small numerical toolbox shared by the lab modules: frequency brackets,
// log grids, least-squares slopes, fixed Gauss-Legendre panels and a
// deterministic parallel map.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

#include "hypolab/errors.hpp"

namespace hypolab {

/// <xi> = sqrt(1 + |xi|^2)
inline double japanese_bracket(double xi) { return std::hypot(1.0, xi); }

/// |xi| such that <xi> equals `bracket` (bracket >= 1).
inline double xi_from_bracket(double bracket) { return std::sqrt((bracket - 1.0) * (bracket + 1.0)); }

/// Log-spaced grid from lo to hi (inclusive) with the given density.
inline std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
    if (!(lo > 0.0) || !(hi > lo) || points_per_decade < 1)
        throw DomainError("log_grid: need 0 < lo < hi and a positive density");
    const double decades = std::log10(hi / lo);
    const int n = std::max(2, static_cast<int>(std::lround(decades * points_per_decade)) + 1);
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    g.back() = hi;
    return g;
}

/// Log-spaced grid with a fixed number of points.
inline std::vector<double> log_grid_n(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo) || n < 2) throw DomainError("log_grid_n: bad arguments");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    g.back() = hi;
    return g;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x with the standard error of the slope.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("linear_fit: need at least two paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0) throw FitError("linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = n;
    if (n > 2) {
        double ssr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            ssr += r * r;
        }
        f.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

/// Slope of log(values) against log(abscissae), restricted to the top
/// `decades` of the abscissa range. Needs `min_points` usable points.
inline LinearFit loglog_fit_top(std::span<const double> abscissae, std::span<const double> values,
                                double decades = 2.0, std::size_t min_points = 8) {
    if (abscissae.size() != values.size()) throw FitError("loglog_fit_top: size mismatch");
    double top = 0;
    for (double a : abscissae) top = std::max(top, a);
    const double floor = top * std::pow(10.0, -decades) * (1.0 - 1e-12);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < abscissae.size(); ++i) {
        if (abscissae[i] >= floor && values[i] > 0 && std::isfinite(values[i])) {
            lx.push_back(std::log(abscissae[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < min_points)
        throw FitError("loglog_fit_top: only " + std::to_string(lx.size()) + " usable points (need " +
                       std::to_string(min_points) + ")");
    return linear_fit(lx, ly);
}

/// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 8> kGaussNodes8 = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
inline constexpr std::array<double, 8> kGaussWeights8 = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_panel(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0;
    for (std::size_t i = 0; i < kGaussNodes8.size(); ++i) s += kGaussWeights8[i] * f(c + h * kGaussNodes8[i]);
    return s * h;
}

/// Integral over [a, b] on panels that start at width `h0` next to `a` and
/// grow geometrically by `growth` (capped at `h_max`). Suited to integrands
/// that are steep near the left end and flatten out.
template <class F>
double graded_integral(F&& f, double a, double b, double h0, double growth = 1.05,
                       double h_max = std::numeric_limits<double>::infinity()) {
    if (!(b > a)) return 0.0;
    double s = 0, x = a, h = std::min(h0, b - a);
    while (x < b) {
        const double xe = std::min(b, x + h);
        s += gauss_panel(f, x, xe);
        x = xe;
        h = std::min(h * growth, h_max);
    }
    return s;
}

/// Fourth-order central difference (Richardson on two step sizes).
template <class F>
double central_derivative(F&& f, double x, double h) {
    const double d1 = (f(x + h) - f(x - h)) / (2 * h);
    const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
    return (4 * d2 - d1) / 3;
}

/// Applies `fn` to every element of `in` using up to `jobs` threads. Output
/// order matches input order; the first exception thrown is rethrown.
template <class T, class F>
auto parallel_map(const std::vector<T>& in, F&& fn, int jobs = 1) {
    using R = std::invoke_result_t<F&, const T&>;
    std::vector<R> out(in.size());
    if (jobs <= 1 || in.size() < 2) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = fn(in[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= in.size() || failed.load()) return;
            try {
                out[i] = fn(in[i]);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
                return;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const int n = std::min<int>(jobs, static_cast<int>(in.size()));
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace hypolab
