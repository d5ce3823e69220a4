#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "jgroup.hpp"
#include "numerics.hpp"
#include "schwartz.hpp"
#include "starexp.hpp"
#include "starproduct.hpp"

namespace jstar {

// One sign per factor of the tree.
struct OrbitSelector {
    std::vector<int> signs;

    void validate(const NormalDescriptor &t) const
    {
        if (signs.size() != t.size())
            throw std::invalid_argument("orbit selector: one sign per factor required");
        for (int s : signs)
            if (s != 1 && s != -1)
                throw std::invalid_argument("orbit selector: signs must be +1 or -1");
    }

    bool operator<(const OrbitSelector &o) const { return signs < o.signs; }
    bool operator==(const OrbitSelector &o) const { return signs == o.signs; }

    // every sign choice for a tree with k factors
    static std::vector<OrbitSelector> all(std::size_t k)
    {
        std::vector<OrbitSelector> out;
        for (std::size_t m = 0; m < (std::size_t{1} << k); ++m) {
            OrbitSelector s;
            for (std::size_t i = 0; i < k; ++i)
                s.signs.push_back((m >> i) & 1 ? -1 : 1);
            out.push_back(s);
        }
        return out;
    }
};

using OrbitFunctionBundle = std::map<OrbitSelector, SymbolFunction>;

inline NormalDescriptor with_orbit(NormalDescriptor t, const OrbitSelector &sel)
{
    sel.validate(t);
    for (std::size_t k = 0; k < t.size(); ++k)
        t.factors[k].epsilon = sel.signs[k];
    return t;
}

// kappa = prod_k 1 / (2^{n_k} (pi theta)^{n_k + 1})
inline double fourier_kappa(const NormalDescriptor &t, double theta)
{
    double k = 1.0;
    for (const auto &f : t.factors)
        k /= std::pow(2.0, f.n) * std::pow(pi * theta, f.n + 1);
    return k;
}

inline double fourier_kappa(int n, double theta) { return 1.0 / (std::pow(2.0, n) * std::pow(pi * theta, n + 1)); }

// Star-exponential weighted by the dimension operator: per factor kappa_k e^{(n_k+1)(a_k/2 - a_k')}.
inline cplx modified_star_exp(const NormalDescriptor &t, double theta, const NormalElement &g, const NormalElement &gp)
{
    cplx v = star_exp_normal(t, theta, g)(gp);
    for (std::size_t k = 0; k < t.size(); ++k) {
        const int n = t.factors[k].n;
        v *= fourier_kappa(n, theta) * std::exp((n + 1) * (0.5 * g.parts[k].a - gp.parts[k].a));
    }
    return v;
}

inline cplx modified_star_exp(const ElementaryDescriptor &d, double theta, const GroupElement &g,
                              const GroupElement &gp)
{
    return modified_star_exp(NormalDescriptor::leaf(d), theta, NormalElement{{g}}, NormalElement{{gp}});
}

struct FourierConfig {
    double theta = 1.0;
    // a-range of integrals over the group
    double a_window = 5.0;
    // a'-range of integrals over an orbit
    double orbit_a_lo = -6.0, orbit_a_hi = 10.0;
    // ell-range of direct position integrals, scaled by max(1, theta)
    double ell_window = 12.0;
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    int panels = 8;
    // x-box of the x-integrals for n >= 1 (fixed Gauss-Legendre rule per axis)
    double x_box = 6.0;
    int x_nodes = 2;
    FourierWindow fourier{};

    void validate() const
    {
        if (!(theta > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("fourier: theta must be positive");
        if (!(a_window > 0.0) || !(orbit_a_hi > orbit_a_lo) || panels < 1)
            throw std::invalid_argument("fourier: bad quadrature window");
    }
};

namespace detail {

inline QuadResult fourier_line(const FourierConfig &c, const std::function<cplx(double)> &f, double lo, double hi)
{
    return integrate_adaptive(f, lo, hi, c.abs_tol, c.rel_tol, 4000, c.panels);
}

// int F(x) dx over R^{2n} (fixed rule on the x-box); F(x) itself at n = 0
inline cplx x_integral(const FourierConfig &c, int n, const std::function<cplx(const Vec &)> &F)
{
    if (n == 0)
        return F(Vec());
    QuadratureSpec q;
    q.kind = RuleKind::fixed;
    q.order = 16;
    for (int i = 0; i < 2 * n; ++i) {
        q.bounds.push_back({-c.x_box, c.x_box});
        q.nodes.push_back(c.x_nodes);
    }
    auto f = [&](std::span<const double> p) {
        Vec x(2 * n);
        for (int i = 0; i < 2 * n; ++i)
            x[i] = p[i];
        return F(x);
    };
    return integrate(f, q).value;
}

inline double elementary_weight(int n, double a)
{
    return std::exp(0.5 * (n + 1) * a) * std::sqrt(std::cosh(a)) * std::pow(std::cosh(0.5 * a), n);
}

inline void require_elementary(const NormalDescriptor &t, const char *what)
{
    t.validate();
    if (t.size() != 1)
        throw CapabilityError(std::string(what) + ": only elementary trees are supported");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Forward transform F_O(f)(g') = int f(g) E~_g(g') dg on the orbit of sign eps

// x-part: int dx fhat(a, x, xi) exp((i eps / theta) e^{a/2 - a'} cosh(a/2) omega0(x, x'))
namespace detail {

inline cplx forward_x_part(const FourierConfig &c, int n, int eps, const Spectrum &fhat, double a, double ap,
                           const Vec &xp, double xi)
{
    const double k = eps / c.theta * std::exp(0.5 * a - ap) * std::cosh(0.5 * a);
    return x_integral(c, n, [&](const Vec &x) {
        cplx ph = n ? std::exp(I * (k * omega0(x, xp))) : cplx(1.0);
        return fhat(a, x, xi) * ph;
    });
}

} // namespace detail

inline QuadResult adapted_fourier_value(const FourierConfig &c, const ElementaryDescriptor &d, const Spectrum &fhat,
                                        const GroupElement &gp)
{
    c.validate();
    const int n = d.n, eps = d.epsilon;
    const double th = c.theta;
    auto integrand = [&](double a) {
        double xi = -eps * std::exp(a - 2.0 * gp.a) / th;
        return detail::elementary_weight(n, a) * std::exp(I * (2.0 * eps / th * std::sinh(a) * gp.ell)) *
               detail::forward_x_part(c, n, eps, fhat, a, gp.a, gp.x, xi);
    };
    auto r = detail::fourier_line(c, integrand, -c.a_window, c.a_window);
    const double pre = fourier_kappa(n, th) * std::exp(-(n + 1) * gp.a);
    r.value *= pre;
    r.error *= pre;
    return r;
}

// Closed-form ell'-spectrum of the image: the ell'-frequency eta fixes sinh(a) = eps theta eta / 2.
inline Spectrum adapted_fourier_spectrum(const FourierConfig &c, const ElementaryDescriptor &d, Spectrum fhat)
{
    c.validate();
    const int n = d.n, eps = d.epsilon;
    return [c, n, eps, fhat](double ap, const Vec &xp, double eta) -> cplx {
        const double th = c.theta;
        double as = std::asinh(eps * th * eta / 2.0);
        double jac = th / (2.0 * std::cosh(as));
        double xi = -eps * std::exp(as - 2.0 * ap) / th;
        return 2.0 * pi * fourier_kappa(n, th) * std::exp(-(n + 1) * ap) * jac * detail::elementary_weight(n, as) *
               detail::forward_x_part(c, n, eps, fhat, as, ap, xp, xi);
    };
}

inline SymbolFunction adapted_fourier(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &f,
                                      const OrbitSelector &sel)
{
    detail::require_elementary(t, "adapted_fourier");
    sel.validate(t);
    ElementaryDescriptor d{t.factors[0].n, sel.signs[0]};
    if (f.n != d.n)
        throw std::invalid_argument("adapted_fourier: operand dimension mismatch");
    if (f.decay != DecayClass::schwartz_r_chart)
        throw CapabilityError("adapted_fourier: the operand must be Schwartz");
    Spectrum fhat = detail::spectrum_or_quadrature(StarConfig{.fourier = c.fourier}, f);
    SymbolFunction F;
    F.n = d.n;
    F.decay = DecayClass::bounded_oscillatory;
    F.spectrum = adapted_fourier_spectrum(c, d, fhat);
    F.eval = [c, d, fhat](const GroupElement &gp) { return adapted_fourier_value(c, d, fhat, gp).value; };
    return F;
}

inline cplx adapted_fourier(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &f,
                            const OrbitSelector &sel, const GroupElement &gp)
{
    return adapted_fourier(c, t, f, sel)(gp);
}

// ---------------------------------------------------------------------------
// Adjoint on one orbit: (F_O^* phi)(g) = int conj(E~_g(g')) phi(g') dmu(g')

namespace detail {

inline cplx adjoint_x_part(const FourierConfig &c, int n, int eps, const Spectrum &phihat, double a, const Vec &x,
                           double ap, double eta)
{
    const double k = -eps / c.theta * std::exp(0.5 * a - ap) * std::cosh(0.5 * a);
    return x_integral(c, n, [&](const Vec &xp) {
        cplx ph = n ? std::exp(I * (k * omega0(x, xp))) : cplx(1.0);
        return phihat(ap, xp, eta) * ph;
    });
}

} // namespace detail

inline QuadResult adjoint_fourier_value(const FourierConfig &c, const ElementaryDescriptor &d, const Spectrum &phihat,
                                        const GroupElement &g)
{
    c.validate();
    const int n = d.n, eps = d.epsilon;
    const double th = c.theta;
    const double eta = 2.0 * eps * std::sinh(g.a) / th;
    auto integrand = [&](double ap) {
        return std::exp(-(n + 1) * ap) * std::exp(-I * (eps / th * std::exp(g.a - 2.0 * ap) * g.ell)) *
               detail::adjoint_x_part(c, n, eps, phihat, g.a, g.x, ap, eta);
    };
    auto r = detail::fourier_line(c, integrand, c.orbit_a_lo, c.orbit_a_hi);
    const double pre = fourier_kappa(n, th) * detail::elementary_weight(n, g.a);
    r.value *= pre;
    r.error *= pre;
    return r;
}

// Closed-form ell-spectrum of the adjoint image: supported on eps xi < 0, where the frequency fixes
// e^{a - 2a'} = -eps theta xi.
inline Spectrum adjoint_fourier_spectrum(const FourierConfig &c, const ElementaryDescriptor &d, Spectrum phihat)
{
    c.validate();
    const int n = d.n, eps = d.epsilon;
    return [c, n, eps, phihat](double a, const Vec &x, double xi) -> cplx {
        const double th = c.theta, k = -eps * xi;
        if (!(k > 0.0))
            return 0.0;
        double ap = 0.5 * (a - std::log(th * k));
        double eta = 2.0 * eps * std::sinh(a) / th;
        return fourier_kappa(n, th) * detail::elementary_weight(n, a) * (pi / k) * std::exp(-(n + 1) * ap) *
               detail::adjoint_x_part(c, n, eps, phihat, a, x, ap, eta);
    };
}

inline SymbolFunction adjoint_fourier(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &phi,
                                      const OrbitSelector &sel)
{
    detail::require_elementary(t, "adjoint_fourier");
    sel.validate(t);
    ElementaryDescriptor d{t.factors[0].n, sel.signs[0]};
    if (phi.n != d.n)
        throw std::invalid_argument("adjoint_fourier: operand dimension mismatch");
    Spectrum ph = detail::spectrum_or_quadrature(StarConfig{.fourier = c.fourier}, phi);
    SymbolFunction h;
    h.n = d.n;
    h.decay = DecayClass::schwartz_r_chart;
    h.spectrum = adjoint_fourier_spectrum(c, d, ph);
    h.eval = [c, d, ph](const GroupElement &g) { return adjoint_fourier_value(c, d, ph, g).value; };
    return h;
}

// Inverse: the sum of the adjoints over the orbits present in the bundle.
inline QuadResult inverse_adapted_fourier(const FourierConfig &c, const NormalDescriptor &t,
                                          const OrbitFunctionBundle &bundle, const GroupElement &g)
{
    detail::require_elementary(t, "inverse_adapted_fourier");
    QuadResult total;
    total.value = 0.0;
    total.error = 0.0;
    for (const auto &[sel, phi] : bundle) {
        sel.validate(t);
        ElementaryDescriptor d{t.factors[0].n, sel.signs[0]};
        if (phi.n != d.n)
            throw std::invalid_argument("inverse_adapted_fourier: component dimension mismatch");
        auto r = adjoint_fourier_value(c, d, detail::spectrum_or_quadrature(StarConfig{.fourier = c.fourier}, phi), g);
        total.value += r.value;
        total.error += r.error;
        total.converged = total.converged && r.converged;
    }
    return total;
}

inline OrbitFunctionBundle fourier_bundle(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &f)
{
    OrbitFunctionBundle b;
    for (const auto &sel : OrbitSelector::all(t.size()))
        b[sel] = adapted_fourier(c, t, f, sel);
    return b;
}

// (F_sel F_sel2^* test)(g'): the test function itself when sel = sel2, zero otherwise
inline QuadResult orthogonality_smeared(const FourierConfig &c, const NormalDescriptor &t, const OrbitSelector &sel,
                                        const OrbitSelector &sel2, const SymbolFunction &test, const GroupElement &gp)
{
    auto h = adjoint_fourier(c, t, test, sel2);
    ElementaryDescriptor d{t.factors[0].n, sel.signs[0]};
    return adapted_fourier_value(c, d, h.spectrum, gp);
}

// ---------------------------------------------------------------------------
// Parseval-Plancherel at n = 0: both sides by direct quadrature of point values

struct PlancherelReport {
    double group_norm = 0.0;
    double orbit_norm = 0.0;
    double residual = 0.0;
};

inline PlancherelReport plancherel(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &f)
{
    detail::require_elementary(t, "plancherel");
    if (t.factors[0].n != 0)
        throw CapabilityError("plancherel: limited to n = 0");
    c.validate();
    const double L = c.ell_window * std::max(1.0, c.theta);
    auto sq = [&](const std::function<cplx(double, double)> &F, double alo, double ahi) {
        return detail::fourier_line(
                   c,
                   [&](double a) {
                       return detail::fourier_line(c, [&](double l) { return cplx(std::norm(F(a, l))); }, -L, L)
                           .value;
                   },
                   alo, ahi)
            .value.real();
    };
    PlancherelReport r;
    r.group_norm = sq([&](double a, double l) { return f(GroupElement(a, Vec(), l)); }, -c.a_window, c.a_window);
    Spectrum fhat = detail::spectrum_or_quadrature(StarConfig{.fourier = c.fourier}, f);
    for (int eps : {1, -1}) {
        ElementaryDescriptor d{0, eps};
        r.orbit_norm += sq([&](double ap, double lp) { return adapted_fourier_value(c, d, fhat, GroupElement(ap, Vec(), lp)).value; },
                           c.orbit_a_lo, c.orbit_a_hi);
    }
    // relative, falling back to absolute for the zero function
    r.residual = std::abs(r.group_norm - r.orbit_norm) / (r.group_norm > 0.0 ? r.group_norm : 1.0);
    return r;
}

inline double plancherel_residual(const FourierConfig &c, const NormalDescriptor &t, const SymbolFunction &f)
{
    return plancherel(c, t, f).residual;
}

// ---------------------------------------------------------------------------
// Group convolution (f1 x f2)(g) = int f1(h) f2(h^{-1} g) dh

inline QuadResult convolve(const FourierConfig &c, const ElementaryDescriptor &d, const SymbolFunction &f1,
                           const SymbolFunction &f2, const GroupElement &g)
{
    c.validate();
    if (f1.n != d.n || f2.n != d.n || g.x.size() != 2 * d.n)
        throw std::invalid_argument("convolve: dimension mismatch");
    const int n = d.n;
    const double L = c.ell_window;
    QuadratureSpec q;
    q.kind = RuleKind::adaptive;
    q.bounds.push_back({-c.a_window, c.a_window});
    for (int i = 0; i < 2 * n; ++i)
        q.bounds.push_back({-c.x_box, c.x_box});
    q.bounds.push_back({-L, L});
    q.nodes.assign(q.bounds.size(), c.panels);
    q.abs_tol = c.abs_tol;
    q.rel_tol = c.rel_tol;
    auto f = [&](std::span<const double> p) {
        Vec y(2 * n);
        for (int i = 0; i < 2 * n; ++i)
            y[i] = p[1 + i];
        GroupElement h(p[0], y, p[2 * n + 1]);
        return f1(h) * f2(multiply(d, inverse(d, h), g));
    };
    return integrate(f, q);
}

// n = 0: (f1 x f2)^(a, xi) = int db f1^(b, xi e^{2(b - a)}) f2^(a - b, xi)
inline Spectrum convolution_spectrum(const FourierConfig &c, Spectrum s1, Spectrum s2)
{
    c.validate();
    return [c, s1, s2](double a, const Vec &x, double xi) {
        auto f = [&](double b) { return s1(b, x, xi * std::exp(2.0 * (b - a))) * s2(a - b, x, xi); };
        return detail::fourier_line(c, f, -c.a_window, c.a_window).value;
    };
}

inline SymbolFunction convolution_symbol(const FourierConfig &c, const SymbolFunction &f1, const SymbolFunction &f2)
{
    if (f1.n != 0 || f2.n != 0)
        throw CapabilityError("convolution_symbol: the closed spectrum is limited to n = 0");
    StarConfig sc;
    sc.fourier = c.fourier;
    auto S = convolution_spectrum(c, detail::spectrum_or_quadrature(sc, f1), detail::spectrum_or_quadrature(sc, f2));
    return symbol_from_spectrum(0, S, 40.0 / c.theta);
}

// Both sides of F(f1 x f2) = (Delta^{1/2} / kappa) (Delta^{-1/2} F f1) * (Delta^{-1/2} F f2) at n = 0.
// The weighted images are bounded rather than Schwartz, but their ell-spectra decay in the frequency
// uniformly in a, which is what the kernel integral needs.
struct ConvolutionCheck {
    cplx lhs{0.0, 0.0}, rhs{0.0, 0.0};
    double residual = 0.0;
};

inline ConvolutionCheck convolution_theorem(const FourierConfig &c, int eps, const SymbolFunction &f1,
                                            const SymbolFunction &f2, const GroupElement &gp,
                                            const StarConfig &star_cfg = StarConfig{})
{
    if (f1.n != 0 || f2.n != 0)
        throw CapabilityError("convolution_theorem: limited to n = 0");
    ElementaryDescriptor d{0, eps};
    StarConfig sc = star_cfg;
    sc.theta = c.theta;
    sc.epsilon = eps;
    sc.n = 0;
    sc.fourier = c.fourier;
    auto conv = convolution_spectrum(c, detail::spectrum_or_quadrature(sc, f1), detail::spectrum_or_quadrature(sc, f2));
    ConvolutionCheck r;
    r.lhs = adapted_fourier_value(c, d, conv, gp).value;
    auto weighted = [&](const SymbolFunction &f) -> Spectrum {
        Spectrum F = adapted_fourier_spectrum(c, d, detail::spectrum_or_quadrature(sc, f));
        return [F](double a, const Vec &x, double eta) { return std::exp(a) * F(a, x, eta); };
    };
    auto k = detail::full_kernel_value(sc, weighted(f1), weighted(f2), gp);
    r.rhs = std::exp(-gp.a) / fourier_kappa(0, c.theta) * k.value;
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

} // namespace jstar
