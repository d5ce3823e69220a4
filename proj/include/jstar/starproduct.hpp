#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jgroup.hpp"
#include "numerics.hpp"
#include "schwartz.hpp"

namespace jstar {

enum class StarPath { full_kernel, reduced_A, moyal_intertwined };

struct StarConfig {
    double theta = 1.0;
    int n = 0;
    int epsilon = 1;
    StarPath path = StarPath::full_kernel;
    // window for spectral variables, in units where Gaussian spectra of unit width are negligible
    double window = 25.0;
    double abs_tol = 1e-11;
    double rel_tol = 1e-10;
    int panels = 8;
    // x-box of the Moyal path for n >= 1 (fixed Gauss-Legendre rule per axis)
    double x_box = 6.0;
    int x_nodes = 2;
    FourierWindow fourier{};

    ElementaryDescriptor descriptor() const { return {n, epsilon}; }

    void validate() const
    {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("star: theta must be positive");
        descriptor().validate();
        if (!(window > 0.0) || panels < 1)
            throw std::invalid_argument("star: bad quadrature window");
    }
};

// ---------------------------------------------------------------------------
// Kernel of the invariant product

inline double kernel_amplitude(int n, const GroupElement &g, const GroupElement &g1, const GroupElement &g2)
{
    double d12 = g1.a - g2.a, d1 = g1.a - g.a, d2 = g.a - g2.a;
    return 4.0 * std::sqrt(std::cosh(2.0 * d12) * std::cosh(2.0 * d1) * std::cosh(2.0 * d2)) *
           std::pow(std::cosh(d2) * std::cosh(d1) * std::cosh(d12), n);
}

// S with the orbit sign folded in; the kernel is exp(-(2i/theta) S)
inline double kernel_phase(int epsilon, const GroupElement &g, const GroupElement &g1, const GroupElement &g2)
{
    double d12 = g1.a - g2.a, d10 = g1.a - g.a, d20 = g2.a - g.a;
    double s = -std::sinh(2.0 * d12) * g.ell - std::sinh(2.0 * (g2.a - g.a)) * g1.ell -
               std::sinh(2.0 * (g.a - g1.a)) * g2.ell;
    s += std::cosh(d10) * std::cosh(d20) * omega0(g1.x, g2.x) + std::cosh(d10) * std::cosh(d12) * omega0(g2.x, g.x) +
         std::cosh(d12) * std::cosh(d20) * omega0(g.x, g1.x);
    return epsilon * s;
}

namespace detail {

inline void check_operand(const StarConfig &c, const SymbolFunction &f, const char *what)
{
    if (f.n != c.n)
        throw std::invalid_argument(std::string(what) + ": operand dimension does not match the configuration");
}

inline cplx spec_of(const StarConfig &c, const SymbolFunction &f, double a, const Vec &x, double xi)
{
    return partial_fourier_ell(f, a, x, xi, c.fourier);
}

inline QuadResult line_integral(const StarConfig &c, const std::function<cplx(double)> &g, double half)
{
    return integrate_adaptive(g, -half, half, c.abs_tol, c.rel_tol, 4000, c.panels);
}

inline void require_schwartz(const SymbolFunction &f, const char *what)
{
    if (f.decay != DecayClass::schwartz_r_chart)
        throw CapabilityError(std::string(what) + ": this path needs Schwartz operands");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Intertwiners between the Moyal product and the invariant product, in the spectral picture

inline Spectrum T_theta_inv_spectrum(const StarConfig &c, Spectrum fhat)
{
    const double th = c.theta;
    const int n = c.n;
    return [fhat, th, n](double a, const Vec &x, double tau) {
        double ch = std::cosh(0.25 * th * tau);
        double w = std::sqrt(std::cosh(0.5 * th * tau)) / std::pow(ch, n);
        return w * fhat(a, Vec(x / ch), 2.0 / th * std::sinh(0.5 * th * tau));
    };
}

inline Spectrum T_theta_spectrum(const StarConfig &c, Spectrum ghat)
{
    const double th = c.theta;
    const int n = c.n;
    return [ghat, th, n](double a, const Vec &x, double u) {
        double t = 2.0 / th * std::asinh(0.5 * th * u);
        double ch = std::cosh(0.25 * th * t);
        double w = std::pow(ch, n) / std::sqrt(std::cosh(0.5 * th * t));
        return w * ghat(a, Vec(ch * x), t);
    };
}

namespace detail {

inline Spectrum spectrum_or_quadrature(const StarConfig &c, const SymbolFunction &f)
{
    if (f.spectrum)
        return f.spectrum;
    FourierWindow w = c.fourier;
    return [f, w](double a, const Vec &x, double xi) { return partial_fourier_ell(f, a, x, xi, w); };
}

} // namespace detail

inline SymbolFunction T_theta(const StarConfig &c, const SymbolFunction &f)
{
    c.validate();
    if (f.depends_on_a_only())
        return f;
    return symbol_from_spectrum(c.n, T_theta_spectrum(c, detail::spectrum_or_quadrature(c, f)), c.window, f.decay);
}

inline SymbolFunction T_theta_inv(const StarConfig &c, const SymbolFunction &f)
{
    c.validate();
    if (f.depends_on_a_only())
        return f;
    return symbol_from_spectrum(c.n, T_theta_inv_spectrum(c, detail::spectrum_or_quadrature(c, f)), c.window,
                                f.decay);
}

// ---------------------------------------------------------------------------
// Moyal product

// Spectrum of h1 *0 h2 from the spectra of the operands. For n >= 1 the x-integral is a fixed
// Gauss-Legendre rule on the box |x_i| <= x_box.
inline QuadResult moyal_spectrum(const StarConfig &c, const Spectrum &h1, const Spectrum &h2, double a,
                                 const Vec &x, double t)
{
    const double th = c.theta, eps = c.epsilon;
    const int n = c.n;
    QuadratureSpec xs;
    if (n > 0) {
        xs.kind = RuleKind::fixed;
        xs.order = 16;
        for (int i = 0; i < 4 * n; ++i) {
            xs.bounds.push_back({-c.x_box, c.x_box});
            xs.nodes.push_back(c.x_nodes);
        }
    }
    auto inner = [&](double xi1) -> cplx {
        double a1 = a + eps * th * (t - xi1) / 4.0, a2 = a - eps * th * xi1 / 4.0;
        if (n == 0)
            return h1(a1, x, xi1) * h2(a2, x, t - xi1);
        auto f = [&](std::span<const double> p) {
            Vec x1(2 * n), x2(2 * n);
            for (int i = 0; i < 2 * n; ++i) {
                x1[i] = p[i];
                x2[i] = p[2 * n + i];
            }
            return h1(a1, Vec(x + x1), xi1) * h2(a2, Vec(x + x2), t - xi1) *
                   std::exp(I * (-2.0 * eps / th * omega0(x1, x2)));
        };
        return integrate(f, xs).value / std::pow(pi * th, 2 * n);
    };
    auto r = detail::line_integral(c, inner, c.window);
    r.value /= 2.0 * pi;
    r.error /= 2.0 * pi;
    return r;
}

inline QuadResult moyal_star(const StarConfig &c, const SymbolFunction &f1, const SymbolFunction &f2,
                             const GroupElement &g)
{
    c.validate();
    detail::check_operand(c, f1, "moyal_star");
    detail::check_operand(c, f2, "moyal_star");
    if (f1.depends_on_a_only() || f2.depends_on_a_only()) {
        // a function of a alone shifts the other operand's spectrum in a
        const bool left = f1.depends_on_a_only();
        const auto &u = left ? f1 : f2;
        const auto &h = left ? f2 : f1;
        detail::require_schwartz(h, "moyal_star");
        const double s = (left ? 1.0 : -1.0) * c.epsilon * c.theta / 4.0;
        auto integrand = [&](double t) {
            return std::exp(I * (t * g.ell)) * u.a_profile(g.a + s * t) * detail::spec_of(c, h, g.a, g.x, t);
        };
        auto r = detail::line_integral(c, integrand, c.window);
        r.value /= 2.0 * pi;
        r.error /= 2.0 * pi;
        return r;
    }
    detail::require_schwartz(f1, "moyal_star");
    detail::require_schwartz(f2, "moyal_star");
    Spectrum s1 = detail::spectrum_or_quadrature(c, f1), s2 = detail::spectrum_or_quadrature(c, f2);
    bool ok = true;
    auto integrand = [&](double t) {
        auto r = moyal_spectrum(c, s1, s2, g.a, g.x, t);
        ok = ok && r.converged;
        return std::exp(I * (t * g.ell)) * r.value;
    };
    auto r = detail::line_integral(c, integrand, c.window);
    r.value /= 2.0 * pi;
    r.error /= 2.0 * pi;
    r.converged = r.converged && ok;
    return r;
}

// ---------------------------------------------------------------------------
// Left or right Moyal multiplication by a moment map, as an operator on spectra.
// Derivatives are central differences of the operand spectrum.

inline Spectrum moment_moyal_multiply(const StarConfig &c, const LieVector &X, Spectrum fhat, bool right = false,
                                      double h = 1e-4)
{
    const double th = c.theta, eps = c.epsilon, sg = right ? -1.0 : 1.0;
    const int n = c.n;
    if (X.y.size() != 2 * n)
        throw std::invalid_argument("moment_moyal_multiply: Lie vector has wrong dimension");
    return [=](double a, const Vec &x, double xi) {
        cplx v = 0.0;
        if (X.alpha != 0.0) {
            cplx dxi = (fhat(a, x, xi + h) - fhat(a, x, xi - h)) / (2.0 * h);
            cplx da = (fhat(a + h, x, xi) - fhat(a - h, x, xi)) / (2.0 * h);
            v += X.alpha * (2.0 * eps * I * dxi + sg * I * (th / 2.0) * da);
        }
        if (X.beta != 0.0)
            v += X.beta * eps * std::exp(-2.0 * a - sg * eps * th * xi / 2.0) * fhat(a, x, xi);
        if (n > 0 && X.y.squaredNorm() > 0.0) {
            cplx dy = 0.0;
            for (int i = 0; i < 2 * n; ++i) {
                if (X.y[i] == 0.0)
                    continue;
                Vec p = x, m = x;
                p[i] += h;
                m[i] -= h;
                dy += X.y[i] * (fhat(a, p, xi) - fhat(a, m, xi)) / (2.0 * h);
            }
            v += eps * std::exp(-a - sg * eps * th * xi / 4.0) *
                 (omega0(X.y, x) * fhat(a, x, xi) + sg * I * (eps * th / 2.0) * dy);
        }
        return v;
    };
}

// Functions analytic in ell, evaluated at complex ell; used for products with polynomial symbols.
using AnalyticSymbol = std::function<cplx(double a, const Vec &x, cplx ell)>;

inline AnalyticSymbol moment_symbol(int epsilon, const LieVector &X)
{
    return [epsilon, X](double a, const Vec &x, cplx ell) {
        return cplx(epsilon) *
               (2.0 * X.alpha * ell + std::exp(-a) * omega0(X.y, x) + X.beta * std::exp(-2.0 * a));
    };
}

// Same operators in position space: multiplication, a- and x-derivatives and imaginary ell-shifts.
inline AnalyticSymbol moment_moyal_multiply_position(const StarConfig &c, const LieVector &X, AnalyticSymbol f,
                                                     bool right = false, double h = 1e-4)
{
    const double th = c.theta, eps = c.epsilon, sg = right ? -1.0 : 1.0;
    const int n = c.n;
    return [=](double a, const Vec &x, cplx ell) {
        cplx v = 0.0;
        if (X.alpha != 0.0) {
            cplx da = (f(a + h, x, ell) - f(a - h, x, ell)) / (2.0 * h);
            v += X.alpha * (2.0 * eps * ell * f(a, x, ell) + sg * I * (th / 2.0) * da);
        }
        // exp(-s xi) on spectra is the shift ell -> ell + i s
        if (X.beta != 0.0)
            v += X.beta * eps * std::exp(-2.0 * a) * f(a, x, ell + I * (sg * eps * th / 2.0));
        if (n > 0 && X.y.squaredNorm() > 0.0) {
            cplx l2 = ell + I * (sg * eps * th / 4.0);
            cplx dy = 0.0;
            for (int i = 0; i < 2 * n; ++i) {
                if (X.y[i] == 0.0)
                    continue;
                Vec p = x, m = x;
                p[i] += h;
                m[i] -= h;
                dy += X.y[i] * (f(a, p, l2) - f(a, m, l2)) / (2.0 * h);
            }
            v += eps * std::exp(-a) * (omega0(X.y, x) * f(a, x, l2) + sg * I * (eps * th / 2.0) * dy);
        }
        return v;
    };
}

// ---------------------------------------------------------------------------
// Invariant product

// Spectrum of f1 * f2 at n = 0, one integral per point.
inline QuadResult star_spectrum(const StarConfig &c, const Spectrum &s1, const Spectrum &s2, double a, double xi)
{
    if (c.n != 0)
        throw CapabilityError("star_spectrum: the one-dimensional product spectrum is derived for n = 0");
    const double th = c.theta, eps = c.epsilon;
    const Vec x0 = Vec::Zero(0);
    const double A = std::asinh(eps * th * xi / 2.0);
    const double Cx = std::sqrt(1.0 + th * th * xi * xi / 4.0);
    auto integrand = [&](double u2) {
        double B2 = std::asinh(eps * th * u2 / 2.0);
        double u1 = 2.0 * eps / th * std::sinh(A - B2);
        double a1 = a + 0.5 * (A - B2), a2 = a - 0.5 * B2;
        double C1 = std::cosh(A - B2), C2 = std::cosh(B2);
        return std::sqrt(C1 / (C2 * Cx)) * s1(a1, x0, u2) * s2(a2, x0, u1);
    };
    auto r = detail::line_integral(c, integrand, c.window);
    r.value /= 2.0 * pi;
    r.error /= 2.0 * pi;
    return r;
}

namespace detail {

inline QuadResult full_kernel_value(const StarConfig &c, const Spectrum &s1, const Spectrum &s2,
                                    const GroupElement &g)
{
    const double th = c.theta, eps = c.epsilon, a = g.a;
    const Vec x0 = Vec::Zero(0);
    auto f = [&](std::span<const double> p) {
        double u1 = p[0], u2 = p[1];
        double a1 = a + 0.5 * std::asinh(eps * th * u1 / 2.0), a2 = a - 0.5 * std::asinh(eps * th * u2 / 2.0);
        double C1 = std::sqrt(1.0 + th * th * u1 * u1 / 4.0), C2 = std::sqrt(1.0 + th * th * u2 * u2 / 4.0);
        double d = 2.0 * (a1 - a2);
        return std::sqrt(std::cosh(d) / (C1 * C2)) * std::exp(I * (2.0 * eps / th * std::sinh(d) * g.ell)) *
               s1(a1, x0, u2) * s2(a2, x0, u1);
    };
    QuadratureSpec q;
    q.kind = RuleKind::adaptive;
    q.bounds = {{-c.window, c.window}, {-c.window, c.window}};
    q.nodes = {c.panels, c.panels};
    q.abs_tol = c.abs_tol;
    q.rel_tol = c.rel_tol;
    auto r = integrate(f, q);
    r.value /= 4.0 * pi * pi;
    r.error /= 4.0 * pi * pi;
    return r;
}

inline QuadResult moyal_intertwined_value(const StarConfig &c, const Spectrum &s1, const Spectrum &s2,
                                          const GroupElement &g)
{
    Spectrum g1 = T_theta_inv_spectrum(c, s1), g2 = T_theta_inv_spectrum(c, s2);
    const double th = c.theta;
    const int n = c.n;
    bool ok = true;
    auto integrand = [&](double t) {
        double ch = std::cosh(0.25 * th * t);
        double w = std::sqrt(std::cosh(0.5 * th * t)) * std::pow(ch, n);
        auto r = moyal_spectrum(c, g1, g2, g.a, Vec(ch * g.x), t);
        ok = ok && r.converged;
        return w * std::exp(I * (2.0 / th * std::sinh(0.5 * th * t) * g.ell)) * r.value;
    };
    // the integrand decays in t like the operand spectra at (2/theta) sinh(theta t / 2)
    auto r = line_integral(c, integrand, c.window);
    r.value /= 2.0 * pi;
    r.error /= 2.0 * pi;
    r.converged = r.converged && ok;
    return r;
}

} // namespace detail

// Spectrum of the product as a function, for nesting; reduced paths work for every n.
inline Spectrum star_product_spectrum(const StarConfig &c, const SymbolFunction &f1, const SymbolFunction &f2)
{
    c.validate();
    detail::check_operand(c, f1, "star");
    detail::check_operand(c, f2, "star");
    const double th = c.theta, eps = c.epsilon;
    if (f1.depends_on_a_only() && f2.depends_on_a_only())
        throw CapabilityError("star: both operands depend on a only; their product has no ell-spectrum");
    if (f1.depends_on_a_only()) {
        auto u = f1.a_profile;
        Spectrum s2 = detail::spectrum_or_quadrature(c, f2);
        return [u, s2, th, eps](double a, const Vec &x, double xi) {
            return u(a + 0.5 * std::asinh(eps * th * xi / 2.0)) * s2(a, x, xi);
        };
    }
    if (f2.depends_on_a_only()) {
        auto u = f2.a_profile;
        Spectrum s1 = detail::spectrum_or_quadrature(c, f1);
        return [u, s1, th, eps](double a, const Vec &x, double xi) {
            return s1(a, x, xi) * u(a - 0.5 * std::asinh(eps * th * xi / 2.0));
        };
    }
    detail::require_schwartz(f1, "star");
    detail::require_schwartz(f2, "star");
    Spectrum s1 = detail::spectrum_or_quadrature(c, f1), s2 = detail::spectrum_or_quadrature(c, f2);
    if (c.n == 0 && c.path != StarPath::moyal_intertwined)
        return [c, s1, s2](double a, const Vec &, double xi) { return star_spectrum(c, s1, s2, a, xi).value; };
    // Moyal path: T of the Moyal spectrum of the pulled-back operands
    Spectrum g1 = T_theta_inv_spectrum(c, s1), g2 = T_theta_inv_spectrum(c, s2);
    Spectrum m = [c, g1, g2](double a, const Vec &x, double t) { return moyal_spectrum(c, g1, g2, a, x, t).value; };
    return T_theta_spectrum(c, m);
}

inline SymbolFunction star_symbol(const StarConfig &c, const SymbolFunction &f1, const SymbolFunction &f2)
{
    auto S = star_product_spectrum(c, f1, f2);
    // products are narrower in ell than their factors, so their spectra reach further out
    return symbol_from_spectrum(c.n, S, 2.0 * c.window, std::max(f1.decay, f2.decay));
}

inline QuadResult star(const StarConfig &c, const SymbolFunction &f1, const SymbolFunction &f2,
                       const GroupElement &g)
{
    c.validate();
    detail::check_operand(c, f1, "star");
    detail::check_operand(c, f2, "star");
    if (static_cast<int>(g.x.size()) != 2 * c.n)
        throw std::invalid_argument("star: probe has wrong dimension");
    switch (c.path) {
    case StarPath::reduced_A: {
        if (!f1.depends_on_a_only() && !f2.depends_on_a_only())
            throw CapabilityError("star: the reduced path needs an operand depending on a only");
        auto S = star_product_spectrum(c, f1, f2);
        return inverse_partial_fourier(S, g.a, g.x, g.ell, c.window, c.abs_tol, 2 * c.panels);
    }
    case StarPath::full_kernel: {
        if (c.n != 0)
            throw CapabilityError("star: the full kernel path is limited to n = 0");
        detail::require_schwartz(f1, "star");
        detail::require_schwartz(f2, "star");
        return detail::full_kernel_value(c, detail::spectrum_or_quadrature(c, f1),
                                         detail::spectrum_or_quadrature(c, f2), g);
    }
    case StarPath::moyal_intertwined: {
        detail::require_schwartz(f1, "star");
        detail::require_schwartz(f2, "star");
        return detail::moyal_intertwined_value(c, detail::spectrum_or_quadrature(c, f1),
                                               detail::spectrum_or_quadrature(c, f2), g);
    }
    }
    throw std::logic_error("star: unknown path");
}

// ---------------------------------------------------------------------------
// Normal groups: separable operands sum_i u_i(g1) v_i(g2)

struct SeparableSymbol {
    std::vector<std::pair<SymbolFunction, SymbolFunction>> terms;

    cplx operator()(const NormalElement &g) const
    {
        cplx s = 0.0;
        for (const auto &[u, v] : terms)
            s += u(g.parts[0]) * v(g.parts[1]);
        return s;
    }
};

struct NormalStarConfig {
    StarConfig first;
    StarConfig second;
};

inline NormalStarConfig normal_star_config(const NormalDescriptor &t, double theta)
{
    if (t.size() != 2)
        throw CapabilityError("star_normal: two-factor trees only");
    NormalStarConfig c;
    c.first.theta = c.second.theta = theta;
    c.first.n = t.factors[0].n;
    c.first.epsilon = t.factors[0].epsilon;
    c.second.n = t.factors[1].n;
    c.second.epsilon = t.factors[1].epsilon;
    c.second.path = StarPath::reduced_A;
    return c;
}

namespace detail {

// per-factor product, with the unit handled exactly
inline cplx factor_star(const StarConfig &c, const SymbolFunction &u1, const SymbolFunction &u2,
                        const GroupElement &g)
{
    // two functions of a alone multiply pointwise
    if (u1.depends_on_a_only() && u2.depends_on_a_only())
        return u1.a_profile(g.a) * u2.a_profile(g.a);
    StarConfig cc = c;
    if (u1.depends_on_a_only() || u2.depends_on_a_only())
        cc.path = StarPath::reduced_A;
    return star(cc, u1, u2, g).value;
}

} // namespace detail

inline cplx star_normal(const NormalStarConfig &c, const SeparableSymbol &f1, const SeparableSymbol &f2,
                        const NormalElement &g)
{
    if (g.parts.size() != 2)
        throw std::invalid_argument("star_normal: probe must have two parts");
    cplx s = 0.0;
    for (const auto &[u1, v1] : f1.terms)
        for (const auto &[u2, v2] : f2.terms)
            s += detail::factor_star(c.first, u1, u2, g.parts[0]) * detail::factor_star(c.second, v1, v2, g.parts[1]);
    return s;
}

// ---------------------------------------------------------------------------
// Strong invariance: [lambda_X, f] + i theta X* f, evaluated at g through the intertwiners

inline Spectrum fundamental_field_spectrum(const StarConfig &c, const LieVector &X, Spectrum fhat, double h = 1e-4)
{
    const int n = c.n;
    return [=](double a, const Vec &x, double xi) {
        cplx v = 0.0;
        if (X.alpha != 0.0)
            v += -X.alpha * (fhat(a + h, x, xi) - fhat(a - h, x, xi)) / (2.0 * h);
        if (X.beta != 0.0)
            v += -X.beta * std::exp(-2.0 * a) * I * xi * fhat(a, x, xi);
        if (n > 0 && X.y.squaredNorm() > 0.0) {
            cplx dy = 0.0;
            for (int i = 0; i < 2 * n; ++i) {
                if (X.y[i] == 0.0)
                    continue;
                Vec p = x, m = x;
                p[i] += h;
                m[i] -= h;
                dy += X.y[i] * (fhat(a, p, xi) - fhat(a, m, xi)) / (2.0 * h);
            }
            v += std::exp(-a) * (-dy + 0.5 * omega0(x, X.y) * I * xi * fhat(a, x, xi));
        }
        return v;
    };
}

struct InvarianceResidual {
    cplx commutator{0.0, 0.0};
    cplx field_term{0.0, 0.0};
    double residual = 0.0;
    bool converged = true;
};

inline InvarianceResidual strong_invariance_check(const StarConfig &c, const LieVector &X, const SymbolFunction &f,
                                                  const GroupElement &g)
{
    c.validate();
    detail::check_operand(c, f, "strong_invariance_check");
    detail::require_schwartz(f, "strong_invariance_check");
    Spectrum fh = detail::spectrum_or_quadrature(c, f);
    Spectrum gh = T_theta_inv_spectrum(c, fh);
    Spectrum L = moment_moyal_multiply(c, X, gh, false), R = moment_moyal_multiply(c, X, gh, true);
    Spectrum D = [L, R](double a, const Vec &x, double t) { return L(a, x, t) - R(a, x, t); };
    Spectrum comm = T_theta_spectrum(c, D);
    Spectrum field = fundamental_field_spectrum(c, X, fh);
    const double th = c.theta;
    Spectrum rhs = [field, th](double a, const Vec &x, double u) { return -I * th * field(a, x, u); };
    auto l = inverse_partial_fourier(comm, g.a, g.x, g.ell, c.window, 1e-12, 2 * c.panels);
    auto r = inverse_partial_fourier(rhs, g.a, g.x, g.ell, c.window, 1e-12, 2 * c.panels);
    InvarianceResidual out;
    out.commutator = l.value;
    out.field_term = r.value;
    out.residual = std::abs(l.value - r.value);
    out.converged = l.converged && r.converged;
    return out;
}

} // namespace jstar
