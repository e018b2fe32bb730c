#pragma once

// Zygmund and Besov norms of periodic samples.
//
// The dyadic estimator uses a fixed smooth partition in frequency: the low
// block is chi(|k|) and block j >= 1 is chi(2^-j |k|) - chi(2^(1-j) |k|),
// where chi = 1 on [0, 1], 0 on [2, inf) and C-infinity in between. A pure
// mode of frequency 2^j therefore lands in block j alone.

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hypolab/errors.hpp"
#include "hypolab/numerics.hpp"

namespace hypolab {

using cplx = std::complex<double>;

struct GridFunction1D {
    std::vector<cplx> samples;
    double period = 2 * std::numbers::pi;

    GridFunction1D() = default;
    GridFunction1D(std::vector<cplx> s, double L = 2 * std::numbers::pi) : samples(std::move(s)), period(L) {
        validate();
    }

    std::size_t size() const { return samples.size(); }
    int log2_size() const { return static_cast<int>(std::lround(std::log2(static_cast<double>(size())))); }
    double spacing() const { return period / static_cast<double>(size()); }
    double x(std::size_t i) const { return spacing() * static_cast<double>(i); }

    void validate() const {
        const std::size_t n = samples.size();
        if (n < 64 || (n & (n - 1)) != 0) throw DomainError("grid size must be a power of two >= 64");
        if (!(period > 0)) throw DomainError("period must be positive");
        for (const auto& v : samples)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("non-finite sample");
    }

    template <class F>
    static GridFunction1D sample(F&& f, int J, double L = 2 * std::numbers::pi) {
        if (J < 6) throw DomainError("need J >= 6");
        std::vector<cplx> s(std::size_t{1} << J);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = f(L * static_cast<double>(i) / static_cast<double>(s.size()));
        return GridFunction1D(std::move(s), L);
    }
};

/// Two-column text: grid point, real value.
inline void write_grid_function(const GridFunction1D& u, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.precision(17);
    for (std::size_t i = 0; i < u.size(); ++i) os << u.x(i) << ' ' << u.samples[i].real() << '\n';
}

inline GridFunction1D read_grid_function(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::vector<double> xs;
    std::vector<cplx> vs;
    double x, v;
    while (is >> x >> v) {
        xs.push_back(x);
        vs.emplace_back(v, 0.0);
    }
    if (xs.size() < 2) throw DomainError(path + ": too few samples");
    const double h = xs[1] - xs[0];
    return GridFunction1D(std::move(vs), h * static_cast<double>(xs.size()));
}

namespace detail {

inline std::vector<cplx> fft(const std::vector<cplx>& in) {
    Eigen::FFT<double> engine;
    std::vector<cplx> out;
    engine.fwd(out, in);
    return out;
}

inline std::vector<cplx> ifft(const std::vector<cplx>& in) {
    Eigen::FFT<double> engine;
    std::vector<cplx> out;
    engine.inv(out, in);
    return out;
}

// Signed integer wavenumber index of FFT bin i for size n.
inline double bin_index(std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

inline double smooth_transition(double y) { return y > 0 ? std::exp(-1.0 / y) : 0.0; }

}  // namespace detail

/// chi(r): 1 for r <= 1, 0 for r >= 2, smooth and monotone in between.
inline double dyadic_cutoff(double r) {
    r = std::abs(r);
    if (r <= 1) return 1;
    if (r >= 2) return 0;
    const double a = detail::smooth_transition(2 - r), b = detail::smooth_transition(r - 1);
    return a / (a + b);
}

/// Partition weight of block j at angular frequency k (block 0 is the low block).
inline double dyadic_weight(int j, double k) {
    if (j == 0) return dyadic_cutoff(k);
    return dyadic_cutoff(std::ldexp(k, -j)) - dyadic_cutoff(std::ldexp(k, 1 - j));
}

struct DyadicDecomposition {
    std::vector<GridFunction1D> blocks;  // blocks[0] is the low block

    GridFunction1D reconstruct() const {
        GridFunction1D sum = blocks.at(0);
        for (std::size_t j = 1; j < blocks.size(); ++j)
            for (std::size_t i = 0; i < sum.size(); ++i) sum.samples[i] += blocks[j].samples[i];
        return sum;
    }
};

/// Blocks j = 0..J-1 for a grid of size 2^J; together they cover every
/// representable frequency up to Nyquist.
inline DyadicDecomposition dyadic_decompose(const GridFunction1D& u) {
    u.validate();
    const std::size_t n = u.size();
    const int J = u.log2_size();
    const double k_unit = 2 * std::numbers::pi / u.period;
    const auto spec = detail::fft(u.samples);
    DyadicDecomposition d;
    d.blocks.reserve(J);
    std::vector<cplx> part(n);
    for (int j = 0; j < J; ++j) {
        for (std::size_t i = 0; i < n; ++i) part[i] = spec[i] * dyadic_weight(j, k_unit * detail::bin_index(i, n));
        d.blocks.emplace_back(detail::ifft(part), u.period);
    }
    return d;
}

inline double sup_norm(const GridFunction1D& u) {
    double m = 0;
    for (const auto& v : u.samples) m = std::max(m, std::abs(v));
    return m;
}

/// L2 norm normalized by the period, so a constant c has norm |c|.
inline double mean_l2_norm(const GridFunction1D& u) {
    double s = 0;
    for (const auto& v : u.samples) s += std::norm(v);
    return std::sqrt(s / static_cast<double>(u.size()));
}

enum class LebesgueIndex { Two, Infinity };

/// ||(2^{js} ||Delta_j u||_{L^p})_j||_{l^q} for p, q in {2, inf}.
inline double dyadic_besov_norm(const GridFunction1D& u, double s, LebesgueIndex p, LebesgueIndex q) {
    const auto d = dyadic_decompose(u);
    double acc = 0;
    for (std::size_t j = 0; j < d.blocks.size(); ++j) {
        const double bn = p == LebesgueIndex::Infinity ? sup_norm(d.blocks[j]) : mean_l2_norm(d.blocks[j]);
        const double term = std::pow(2.0, s * static_cast<double>(j)) * bn;
        if (q == LebesgueIndex::Infinity)
            acc = std::max(acc, term);
        else
            acc += term * term;
    }
    return q == LebesgueIndex::Infinity ? acc : std::sqrt(acc);
}

/// Overload taking numeric p, q (2 or infinity); anything else is unsupported.
inline double dyadic_besov_norm(const GridFunction1D& u, double s, double p, double q) {
    auto idx = [](double v) {
        if (v == 2) return LebesgueIndex::Two;
        if (std::isinf(v)) return LebesgueIndex::Infinity;
        throw DomainError("Besov exponent must be 2 or infinity");
    };
    return dyadic_besov_norm(u, s, idx(p), idx(q));
}

/// Zygmund norm as B^s_{inf,inf}.
inline double dyadic_zygmund_norm(const GridFunction1D& u, double s) {
    return dyadic_besov_norm(u, s, LebesgueIndex::Infinity, LebesgueIndex::Infinity);
}

/// sup norm of each dyadic block.
inline std::vector<double> block_sup_norms(const GridFunction1D& u) {
    const auto d = dyadic_decompose(u);
    std::vector<double> out;
    for (const auto& b : d.blocks) out.push_back(sup_norm(b));
    return out;
}

/// Slope of log2 ||Delta_j u||_inf against j over blocks j_lo..j_hi.
inline LinearFit block_decay_slope(const GridFunction1D& u, int j_lo, int j_hi) {
    const auto norms = block_sup_norms(u);
    if (j_lo < 0 || j_hi >= static_cast<int>(norms.size()) || j_hi - j_lo < 1)
        throw DomainError("block range outside the decomposition");
    std::vector<double> x, y;
    for (int j = j_lo; j <= j_hi; ++j) {
        if (!(norms[j] > 0)) continue;
        x.push_back(j);
        y.push_back(std::log2(norms[j]));
    }
    return linear_fit(x, y);
}

/// H^s norm from the Fourier multiplier <k>^s, normalized like mean_l2_norm.
inline double fourier_sobolev_norm(const GridFunction1D& u, double s) {
    const auto spec = detail::fft(u.samples);
    const std::size_t n = u.size();
    const double k_unit = 2 * std::numbers::pi / u.period;
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = k_unit * detail::bin_index(i, n);
        acc += std::pow(1 + k * k, s) * std::norm(spec[i] / static_cast<double>(n));
    }
    return std::sqrt(acc);
}

/// Spectral derivative d/dx.
inline GridFunction1D spectral_derivative(const GridFunction1D& u) {
    auto spec = detail::fft(u.samples);
    const std::size_t n = u.size();
    const double k_unit = 2 * std::numbers::pi / u.period;
    for (std::size_t i = 0; i < n; ++i) {
        // The Nyquist bin has no well-defined sign; drop it.
        const double k = i == n / 2 ? 0.0 : k_unit * detail::bin_index(i, n);
        spec[i] *= cplx(0, k);
    }
    return GridFunction1D(detail::ifft(spec), u.period);
}

struct QuotientSample {
    double separation;
    double max_quotient;
};

/// Max over grid midpoints of |v(x) - 2 v((x+y)/2) + v(y)| / |x - y|^r for
/// dyadic separations |x - y| = 2h, h = grid spacing * 2^k, up to half the
/// period. v = u for s <= 1 and v = u' (spectral) for 1 < s < 2; r = s - [s].
inline std::vector<QuotientSample> zygmund_quotient_profile(const GridFunction1D& u, double s) {
    if (!(s > 0 && s < 2)) throw DomainError("direct Zygmund seminorm supports s in (0, 2) only");
    const GridFunction1D v = s > 1 ? spectral_derivative(u) : u;
    const double r = s > 1 ? s - 1 : s;
    const std::size_t n = v.size();
    std::vector<QuotientSample> out;
    for (std::size_t k = 1; 2 * k <= n / 2; k *= 2) {
        const double sep = 2.0 * static_cast<double>(k) * v.spacing();
        double best = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx d2 = v.samples[(i + n - k) % n] - 2.0 * v.samples[i] + v.samples[(i + k) % n];
            best = std::max(best, std::abs(d2));
        }
        out.push_back({sep, best / std::pow(sep, r)});
    }
    return out;
}

struct DirectZygmund {
    double sup_part = 0;   // sup |u| (+ sup |u'| when s > 1)
    double seminorm = 0;   // max difference quotient
    double total = 0;
};

inline DirectZygmund zygmund_norm_direct(const GridFunction1D& u, double s) {
    DirectZygmund z;
    for (const auto& q : zygmund_quotient_profile(u, s)) z.seminorm = std::max(z.seminorm, q.max_quotient);
    z.sup_part = sup_norm(u) + (s > 1 ? sup_norm(spectral_derivative(u)) : 0.0);
    z.total = z.sup_part + z.seminorm;
    return z;
}

inline double zygmund_seminorm_direct(const GridFunction1D& u, double s) { return zygmund_norm_direct(u, s).seminorm; }

struct NormEquivalence {
    double direct = 0;
    double dyadic = 0;
    double ratio = 0;
    bool within(double lo = 1.0 / 16, double hi = 16.0) const { return ratio >= lo && ratio <= hi; }
};

inline NormEquivalence norm_equivalence_report(const GridFunction1D& u, double s) {
    NormEquivalence r;
    r.direct = zygmund_norm_direct(u, s).total;
    r.dyadic = dyadic_zygmund_norm(u, s);
    r.ratio = r.dyadic > 0 ? r.direct / r.dyadic : (r.direct > 0 ? INFINITY : 1.0);
    return r;
}

// ---------------------------------------------------------------------------
// Spatial profiles b(x) multiplying a time coefficient as a(t)(1 + b(x)).

enum class SpatialFamily { Zero, Lacunary, Smooth };

inline std::string to_string(SpatialFamily f) {
    switch (f) {
        case SpatialFamily::Zero: return "zero";
        case SpatialFamily::Lacunary: return "lacunary";
        case SpatialFamily::Smooth: return "smooth";
    }
    return "?";
}

struct SpatialProfile {
    SpatialFamily family = SpatialFamily::Zero;
    double s = 1.0;          // regularity index of the lacunary family
    double amplitude = 0.25; // sup |b| <= amplitude < 1/2

    void validate() const {
        if (!(amplitude >= 0 && amplitude < 0.5)) throw DomainError("spatial amplitude must lie in [0, 1/2)");
        if (family == SpatialFamily::Lacunary && !(s > 0)) throw DomainError("lacunary index must be positive");
    }
};

/// Profile sampled on 2^J points of [0, 2 pi). The lacunary family is
/// amplitude * sum_{j>=1, 2^j < Nyquist} 2^{-js} cos(2^j x) / sum_{j>=1} 2^{-js}.
inline GridFunction1D sample_profile(const SpatialProfile& p, int J) {
    p.validate();
    switch (p.family) {
        case SpatialFamily::Zero: return GridFunction1D::sample([](double) { return cplx(0); }, J);
        case SpatialFamily::Smooth:
            return GridFunction1D::sample([&](double x) { return cplx(p.amplitude * std::cos(x)); }, J);
        case SpatialFamily::Lacunary: {
            const double total = 1.0 / (std::pow(2.0, p.s) - 1.0);
            const double nyquist = std::ldexp(1.0, J - 1);
            return GridFunction1D::sample(
                [&](double x) {
                    double v = 0;
                    for (int j = 1; std::ldexp(1.0, j) < nyquist; ++j)
                        v += std::pow(2.0, -j * p.s) * std::cos(std::ldexp(x, j));
                    return cplx(p.amplitude * v / total);
                },
                J);
        }
    }
    return {};
}

inline constexpr int kProfileResolution = 12;

/// Dyadic Z^s norm of the sampled profile b.
inline double spatial_profile_norm(const SpatialProfile& p, double s, int J = kProfileResolution) {
    return dyadic_zygmund_norm(sample_profile(p, J), s);
}

/// Dyadic Z^s norm of 1 + b.
inline double spatial_factor_norm(const SpatialProfile& p, double s, int J = kProfileResolution) {
    auto g = sample_profile(p, J);
    for (auto& v : g.samples) v += 1.0;
    return dyadic_zygmund_norm(g, s);
}

struct ProfileStability {
    double coarse = 0, fine = 0, relative_change = 0;
    bool stable = false;
};

/// Compares the profile norm at 2^J and 2^(J+1) points; under 10 % is stable.
inline ProfileStability profile_norm_stability(const SpatialProfile& p, double s, int J = kProfileResolution) {
    ProfileStability r;
    r.coarse = spatial_profile_norm(p, s, J);
    r.fine = spatial_profile_norm(p, s, J + 1);
    const double ref = std::max(r.coarse, r.fine);
    r.relative_change = ref > 0 ? std::abs(r.fine - r.coarse) / ref : 0.0;
    r.stable = r.relative_change < 0.1;
    return r;
}

}  // namespace hypolab
