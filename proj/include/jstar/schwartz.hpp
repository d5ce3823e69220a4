#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jgroup.hpp"
#include "numerics.hpp"

namespace jstar {

// Raised when an operation is asked to handle operands outside its supported class.
struct CapabilityError : std::logic_error {
    using std::logic_error::logic_error;
};

enum class DecayClass { schwartz_r_chart, bounded_oscillatory, polynomial_growth };

using Evaluator = std::function<cplx(const GroupElement &)>;
// partial Fourier transform in ell: (a, x, xi) -> int e^{-i xi ell} f(a, x, ell) d ell
using Spectrum = std::function<cplx(double, const Vec &, double)>;

// f(a, x, ell) = amp(a) exp(i omega0(q(a), x)) exp(i nu ell)
struct PlaneWave {
    double nu = 0.0;
    std::function<cplx(double)> amp;
    std::function<Vec(double)> q;
};

struct SymbolFunction {
    int n = 0;
    Evaluator eval;
    DecayClass decay = DecayClass::schwartz_r_chart;
    Spectrum spectrum;                       // empty when no closed form is known
    std::optional<PlaneWave> plane_wave;     // set for star-exponential type symbols
    std::function<cplx(double)> a_profile;   // set when f depends on a only

    cplx operator()(const GroupElement &g) const { return eval(g); }
    cplx operator()(double a, const Vec &x, double ell) const { return eval(GroupElement(a, x, ell)); }
    bool has_spectrum() const { return static_cast<bool>(spectrum); }
    bool depends_on_a_only() const { return static_cast<bool>(a_profile); }
};

inline SymbolFunction constant_symbol(int n, cplx c)
{
    SymbolFunction f;
    f.n = n;
    f.eval = [c](const GroupElement &) { return c; };
    f.decay = DecayClass::bounded_oscillatory;
    f.a_profile = [c](double) { return c; };
    PlaneWave pw;
    pw.nu = 0.0;
    pw.amp = [c](double) { return c; };
    pw.q = [n](double) { return Vec(Vec::Zero(2 * n)); };
    f.plane_wave = pw;
    return f;
}

// f(a, x, ell) = profile(a)
inline SymbolFunction a_only_symbol(int n, std::function<cplx(double)> profile,
                                    DecayClass decay = DecayClass::bounded_oscillatory)
{
    SymbolFunction f;
    f.n = n;
    f.eval = [profile](const GroupElement &g) { return profile(g.a); };
    f.decay = decay;
    f.a_profile = profile;
    PlaneWave pw;
    pw.amp = profile;
    pw.q = [n](double) { return Vec(Vec::Zero(2 * n)); };
    f.plane_wave = pw;
    return f;
}

inline SymbolFunction plane_wave_symbol(int n, PlaneWave pw,
                                        DecayClass decay = DecayClass::bounded_oscillatory)
{
    SymbolFunction f;
    f.n = n;
    f.eval = [pw](const GroupElement &g) {
        return pw.amp(g.a) * std::exp(I * (omega0(pw.q(g.a), g.x) + pw.nu * g.ell));
    };
    f.decay = decay;
    f.plane_wave = pw;
    return f;
}

inline SymbolFunction scale(const SymbolFunction &f, cplx c)
{
    SymbolFunction r = f;
    r.eval = [f, c](const GroupElement &g) { return c * f.eval(g); };
    if (f.spectrum)
        r.spectrum = [f, c](double a, const Vec &x, double xi) { return c * f.spectrum(a, x, xi); };
    if (f.a_profile)
        r.a_profile = [f, c](double a) { return c * f.a_profile(a); };
    if (f.plane_wave) {
        auto pw = *f.plane_wave;
        auto amp = pw.amp;
        pw.amp = [amp, c](double a) { return c * amp(a); };
        r.plane_wave = pw;
    }
    return r;
}

inline SymbolFunction add(const SymbolFunction &f, const SymbolFunction &h)
{
    if (f.n != h.n)
        throw std::invalid_argument("add: dimension mismatch");
    SymbolFunction r;
    r.n = f.n;
    r.eval = [f, h](const GroupElement &g) { return f.eval(g) + h.eval(g); };
    r.decay = std::max(f.decay, h.decay);
    if (f.spectrum && h.spectrum)
        r.spectrum = [f, h](double a, const Vec &x, double xi) {
            return f.spectrum(a, x, xi) + h.spectrum(a, x, xi);
        };
    if (f.a_profile && h.a_profile)
        r.a_profile = [f, h](double a) { return f.a_profile(a) + h.a_profile(a); };
    return r;
}

// ---------------------------------------------------------------------------
// Charts: (a, x, ell), (r, x, ell) with r = sinh 2a, moment chart (s, z, ell) = (e^{-2a}, e^{-a} x, ell)

enum class Chart { group, r_chart, moment };

struct ChartPoint {
    Chart chart = Chart::group;
    double c0 = 0.0; // a, r or s
    Vec x;           // x or z
    double ell = 0.0;
};

inline ChartPoint chart_convert(const ChartPoint &p, Chart target)
{
    double a = 0.0;
    Vec x;
    switch (p.chart) {
    case Chart::group:
        a = p.c0;
        x = p.x;
        break;
    case Chart::r_chart:
        a = 0.5 * std::asinh(p.c0);
        x = p.x;
        break;
    case Chart::moment:
        if (!(p.c0 > 0.0))
            throw std::invalid_argument("moment chart: s must be positive");
        a = -0.5 * std::log(p.c0);
        x = std::exp(a) * p.x;
        break;
    }
    switch (target) {
    case Chart::group:
        return {Chart::group, a, x, p.ell};
    case Chart::r_chart:
        return {Chart::r_chart, std::sinh(2.0 * a), x, p.ell};
    case Chart::moment:
        return {Chart::moment, std::exp(-2.0 * a), std::exp(-a) * x, p.ell};
    }
    return p;
}

inline GroupElement to_group(const ChartPoint &p)
{
    auto q = chart_convert(p, Chart::group);
    return {q.c0, q.x, q.ell};
}

// c(r) = cosh(arcsinh(r)/2), s(r) = sinh(arcsinh(r)/2)
inline double aux_c(double r) { return std::cosh(0.5 * std::asinh(r)); }
inline double aux_s(double r) { return std::sinh(0.5 * std::asinh(r)); }
inline double aux_c_sqrt(double r) { return std::sqrt(0.5 * (1.0 + std::sqrt(1.0 + r * r))); }
inline double aux_s_sqrt(double r)
{
    // sqrt((sqrt(1+r^2)-1)/2) written without cancellation
    double t = std::abs(r) / std::sqrt(2.0 * (1.0 + std::sqrt(1.0 + r * r)));
    return r < 0 ? -t : t;
}

inline double alpha_weight(const LieVector &X, const GroupElement &g)
{
    return 2.0 * X.alpha * g.ell + std::cosh(g.a) * omega0(X.y, g.x) - X.beta * std::sinh(2.0 * g.a);
}

// chart components of the left-invariant field of X at g (generator of g -> g exp(tX))
inline Vec left_invariant_field(const LieVector &X, const GroupElement &g)
{
    const auto m = g.x.size();
    Vec v(m + 2);
    v[0] = X.alpha;
    v.segment(1, m) = -X.alpha * g.x + X.y;
    v[m + 1] = -2.0 * X.alpha * g.ell + 0.5 * omega0(g.x, X.y) + X.beta;
    return v;
}

inline cplx left_invariant_derivative(const LieVector &X, const Evaluator &f, const GroupElement &g,
                                      double h = 1e-5)
{
    Vec p = g.flat(), dir = left_invariant_field(X, g);
    auto along = [&](double t) { return f(GroupElement::from_flat(p + t * dir)); };
    return derivative(along, 0.0, 1, h);
}

inline cplx left_invariant_derivative(const LieVector &X, const SymbolFunction &f, const GroupElement &g,
                                      double h = 1e-5)
{
    return left_invariant_derivative(X, f.eval, g, h);
}

// f o L_{g0}: g -> f(g0 g); the spectrum is carried along when present
inline SymbolFunction translate_left(const ElementaryDescriptor &d, const SymbolFunction &f,
                                     const GroupElement &g0)
{
    SymbolFunction r = f;
    r.eval = [d, f, g0](const GroupElement &g) { return f.eval(multiply(d, g0, g)); };
    r.a_profile = nullptr;
    r.plane_wave.reset();
    if (f.a_profile) {
        auto prof = f.a_profile;
        double a0 = g0.a;
        r.a_profile = [prof, a0](double a) { return prof(a0 + a); };
    }
    if (f.spectrum)
        r.spectrum = [f, g0](double a, const Vec &x, double xi) {
            double e1 = std::exp(-a);
            double shift = e1 * e1 * g0.ell + 0.5 * e1 * omega0(g0.x, x);
            return std::exp(I * (xi * shift)) * f.spectrum(g0.a + a, Vec(e1 * g0.x + x), xi);
        };
    return r;
}

struct SeminormGrid {
    double r_max = 6.0, x_max = 6.0, l_max = 6.0;
    int r_points = 61, x_points = 9, l_points = 41;
};

namespace detail {

inline std::vector<double> spread_nodes(double half_width, int count)
{
    // Chebyshev points of the first kind; an odd count includes the centre
    std::vector<double> t;
    if (count <= 1)
        return {0.0};
    for (int k = 0; k < count; ++k)
        t.push_back(-half_width * std::cos(pi * (k + 0.5) / count));
    return t;
}

} // namespace detail

// grid estimate of sup |alpha^j P~ f|; j indexes the basis (H, e_1..e_2n, E)
inline double schwartz_seminorm(const SymbolFunction &f, const std::vector<int> &j,
                                const std::vector<LieVector> &P, const SeminormGrid &grid = {})
{
    const int n = f.n;
    auto basis = LieVector::basis(n);
    if (j.size() != basis.size())
        throw std::invalid_argument("seminorm: multi-index length must be 2n+2");
    if (P.size() > 2)
        throw std::invalid_argument("seminorm: at most second-order derivatives");
    Evaluator g = f.eval;
    const double h = P.size() == 2 ? 1e-3 : 1e-5;
    for (auto it = P.rbegin(); it != P.rend(); ++it) {
        LieVector X = *it;
        Evaluator inner = g;
        g = [X, inner, h](const GroupElement &p) { return left_invariant_derivative(X, inner, p, h); };
    }
    auto rs = detail::spread_nodes(grid.r_max, grid.r_points);
    auto xs = detail::spread_nodes(grid.x_max, n > 0 ? grid.x_points : 1);
    auto ls = detail::spread_nodes(grid.l_max, grid.l_points);
    double best = 0.0;
    std::vector<int> xi(2 * n, 0);
    for (double r : rs) {
        double a = 0.5 * std::asinh(r);
        for (double l : ls) {
            std::fill(xi.begin(), xi.end(), 0);
            while (true) {
                Vec x(2 * n);
                for (int i = 0; i < 2 * n; ++i)
                    x[i] = xs[xi[i]];
                GroupElement p(a, x, l);
                double w = 1.0;
                for (std::size_t k = 0; k < basis.size(); ++k)
                    if (j[k] != 0)
                        w *= std::pow(alpha_weight(basis[k], p), j[k]);
                best = std::max(best, std::abs(w * g(p)));
                int k = 0;
                while (k < 2 * n && ++xi[k] == static_cast<int>(xs.size()))
                    xi[k++] = 0;
                if (k == 2 * n)
                    break;
            }
        }
    }
    return best;
}

// Separable Gaussian exp(-((c-c0)/w0)^2 - |x-x0|^2/wx^2 - ((ell-l0)/wl)^2) e^{i nu ell}, where c is a
// (group chart) or r = sinh 2a (r chart).
struct GaussianParams {
    Chart chart = Chart::r_chart;
    double c0 = 0.0, w0 = 1.0;
    Vec x0;
    double wx = 1.0;
    double l0 = 0.0, wl = 1.0;
    double nu = 0.0;
    cplx amplitude{1.0, 0.0};
};

inline SymbolFunction gaussian_symbol(int n, GaussianParams p)
{
    if (!(p.w0 > 0 && p.wx > 0 && p.wl > 0))
        throw std::invalid_argument("gaussian_symbol: widths must be positive");
    if (p.chart == Chart::moment)
        throw std::invalid_argument("gaussian_symbol: group or r chart only");
    if (p.x0.size() == 0)
        p.x0 = Vec::Zero(2 * n);
    if (p.x0.size() != 2 * n)
        throw std::invalid_argument("gaussian_symbol: centre has wrong dimension");
    auto ax = [p](double a, const Vec &x) {
        double c = p.chart == Chart::r_chart ? std::sinh(2.0 * a) : a;
        double t = (c - p.c0) / p.w0;
        double s = (x - p.x0).squaredNorm() / (p.wx * p.wx);
        return p.amplitude * std::exp(-t * t - s);
    };
    SymbolFunction f;
    f.n = n;
    f.decay = DecayClass::schwartz_r_chart;
    f.eval = [ax, p](const GroupElement &g) {
        double t = (g.ell - p.l0) / p.wl;
        return ax(g.a, g.x) * std::exp(-t * t) * std::exp(I * (p.nu * g.ell));
    };
    f.spectrum = [ax, p](double a, const Vec &x, double xi) {
        double k = xi - p.nu;
        return ax(a, x) * p.wl * std::sqrt(pi) * std::exp(cplx(-0.25 * p.wl * p.wl * k * k, -k * p.l0));
    };
    return f;
}

// integral of a Gaussian over its own chart coordinates (c, x, ell)
inline cplx gaussian_chart_integral(int n, const GaussianParams &p)
{
    const double sp = std::sqrt(pi);
    return p.amplitude * p.w0 * sp * std::pow(p.wx * sp, 2 * n) * p.wl * sp *
           std::exp(cplx(-0.25 * p.wl * p.wl * p.nu * p.nu, p.nu * p.l0));
}

struct FourierWindow {
    double window = 12.0;
    double abs_tol = 1e-12;
    double rel_tol = 1e-11;
    int panels = 8;
    bool force_quadrature = false;
};

inline cplx partial_fourier_ell(const SymbolFunction &f, double a, const Vec &x, double xi,
                                const FourierWindow &w = {})
{
    if (f.spectrum && !w.force_quadrature)
        return f.spectrum(a, x, xi);
    auto g = [&](double l) { return std::exp(-I * (xi * l)) * f.eval(GroupElement(a, x, l)); };
    return integrate_adaptive(g, -w.window, w.window, w.abs_tol, w.rel_tol, 4000, w.panels).value;
}

// (1/2pi) int e^{i xi ell} S(a, x, xi) d xi over |xi| <= window
inline QuadResult inverse_partial_fourier(const Spectrum &S, double a, const Vec &x, double ell,
                                          double window = 40.0, double abs_tol = 1e-11,
                                          int panels = 16)
{
    auto g = [&](double xi) { return std::exp(I * (xi * ell)) * S(a, x, xi); };
    auto r = integrate_adaptive(g, -window, window, abs_tol, 1e-10, 4000, panels);
    r.value /= 2.0 * pi;
    r.error /= 2.0 * pi;
    return r;
}

// Symbol determined by its spectrum; point values come from the inverse transform.
inline SymbolFunction symbol_from_spectrum(int n, Spectrum S, double window = 40.0,
                                           DecayClass decay = DecayClass::schwartz_r_chart)
{
    SymbolFunction f;
    f.n = n;
    f.decay = decay;
    f.spectrum = S;
    f.eval = [S, window](const GroupElement &g) {
        return inverse_partial_fourier(S, g.a, g.x, g.ell, window).value;
    };
    return f;
}

// s^{-(n+1)/2} |f(s, z, ell)| along s = 2^{-k}, k = 0..kmax, for the boundary diagnostic
inline std::vector<double> moment_boundary_profile(const Evaluator &f, int n, const Vec &z, double ell,
                                                   int kmax = 20)
{
    std::vector<double> out;
    for (int k = 0; k <= kmax; ++k) {
        double s = std::ldexp(1.0, -k);
        GroupElement g = to_group({Chart::moment, s, z, ell});
        out.push_back(std::pow(s, -0.5 * (n + 1)) * std::abs(f(g)));
    }
    return out;
}

} // namespace jstar
