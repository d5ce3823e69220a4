#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "jgroup.hpp"
#include "numerics.hpp"
#include "schwartz.hpp"
#include "starproduct.hpp"

namespace jstar {

// ---------------------------------------------------------------------------
// Elementary star-exponential E_{g0}(g)

struct StarExponential {
    ElementaryDescriptor d;
    double theta = 1.0;
    GroupElement g0;

    double prefactor() const
    {
        return std::sqrt(std::cosh(g0.a)) * std::pow(std::cosh(0.5 * g0.a), d.n);
    }

    cplx operator()(const GroupElement &g) const
    {
        const double a0 = g0.a;
        double ph = 2.0 * std::sinh(a0) * g.ell + std::exp(a0 - 2.0 * g.a) * g0.ell +
                    std::exp(0.5 * a0 - g.a) * std::cosh(0.5 * a0) * omega0(g0.x, g.x);
        return prefactor() * std::exp(I * (d.epsilon * ph / theta));
    }

    // amp(a) exp(i omega0(q(a), x)) exp(i nu ell)
    PlaneWave plane_wave() const
    {
        const double a0 = g0.a, th = theta, eps = d.epsilon, pre = prefactor(), l0 = g0.ell;
        const Vec x0 = g0.x;
        PlaneWave pw;
        pw.nu = 2.0 * eps * std::sinh(a0) / th;
        pw.amp = [=](double a) { return pre * std::exp(I * (eps / th * std::exp(a0 - 2.0 * a) * l0)); };
        pw.q = [=](double a) { return Vec(eps / th * std::exp(0.5 * a0 - a) * std::cosh(0.5 * a0) * x0); };
        return pw;
    }

    SymbolFunction symbol() const
    {
        StarExponential self = *this;
        SymbolFunction f = plane_wave_symbol(d.n, plane_wave());
        f.eval = [self](const GroupElement &g) { return self(g); };
        return f;
    }
};

inline StarExponential star_exp_elementary(const ElementaryDescriptor &d, double theta, const GroupElement &g0)
{
    d.validate();
    detail::check_dim(d, g0.x, "star_exp_elementary");
    if (!(theta > 0.0))
        throw std::invalid_argument("star_exp_elementary: theta must be positive");
    return {d, theta, g0};
}

// ---------------------------------------------------------------------------
// One-parameter solution of d/dt f = (i/theta) lambda_X *0 f and its image under the intertwiner

struct AnsatzCoefficients {
    double gamma1, gamma2, gamma3, v;
};

inline AnsatzCoefficients ansatz_coefficients(double alpha, double beta, double t)
{
    return {alpha * t, beta * t * detail::sinhc(alpha * t), t * detail::sinhc(0.5 * alpha * t), 1.0};
}

struct MoyalExponential {
    ElementaryDescriptor d;
    double theta;
    LieVector X;
    double t;

    // f_t extended to complex ell
    cplx operator()(double a, const Vec &x, cplx ell) const
    {
        auto c = ansatz_coefficients(X.alpha, X.beta, t);
        cplx ph = 2.0 * ell * c.gamma1 + std::exp(-2.0 * a) * c.gamma2 + std::exp(-a) * c.gamma3 * omega0(X.y, x);
        return c.v * std::exp(I * (d.epsilon / theta) * ph);
    }
    AnalyticSymbol analytic() const
    {
        MoyalExponential self = *this;
        return [self](double a, const Vec &x, cplx ell) { return self(a, x, ell); };
    }
};

// T applied to h(a, x) exp(i tau ell)
inline std::function<cplx(const GroupElement &)> T_theta_plane_wave(int n, double theta, double tau,
                                                                     std::function<cplx(double, const Vec &)> h)
{
    return [=](const GroupElement &g) {
        double ch = std::cosh(0.25 * theta * tau);
        double w = std::sqrt(std::cosh(0.5 * theta * tau)) * std::pow(ch, n);
        double U = 2.0 / theta * std::sinh(0.5 * theta * tau);
        return w * h(g.a, Vec(ch * g.x)) * std::exp(I * (U * g.ell));
    };
}

struct LieStarExponential {
    ElementaryDescriptor d;
    double theta;
    LieVector X;
    double t;

    cplx operator()(const GroupElement &g) const
    {
        MoyalExponential f{d, theta, X, t};
        auto c = ansatz_coefficients(X.alpha, X.beta, t);
        double tau = 2.0 * d.epsilon * c.gamma1 / theta;
        auto h = [&](double a, const Vec &x) { return f(a, x, 0.0); };
        return T_theta_plane_wave(d.n, theta, tau, h)(g);
    }
};

inline LieStarExponential star_exp_lie(const ElementaryDescriptor &d, double theta, double t, const LieVector &X)
{
    d.validate();
    detail::check_dim(d, X.y, "star_exp_lie");
    return {d, theta, X, t};
}

// ---------------------------------------------------------------------------
// Twisted factor of a normal group

struct TwistMatrices {
    Mat rho_plus, rho_minus;
    Mat B, C, M, A;

    // (e^{a2/2 - a2'} x2 - 2 cosh(a2/2) x2')
    static Vec x_tilde(const GroupElement &g2, const GroupElement &g2p)
    {
        return std::exp(0.5 * g2.a - g2p.a) * g2.x - 2.0 * std::cosh(0.5 * g2.a) * g2p.x;
    }

    // (e^{a2/2 - a2'} x2 / sqrt 2, sqrt 2 cosh(a2/2) x2') in the block order (v2, w2, v2', w2')
    static Vec assembled(const GroupElement &g2, const GroupElement &g2p)
    {
        const auto m = g2.x.size();
        Vec X(2 * m);
        X.head(m) = std::exp(0.5 * g2.a - g2p.a) * g2.x / std::sqrt(2.0);
        X.tail(m) = std::sqrt(2.0) * std::cosh(0.5 * g2.a) * g2p.x;
        return X;
    }

    double det_one_plus() const
    {
        return (Mat::Identity(rho_plus.rows(), rho_plus.cols()) + rho_plus).determinant();
    }
};

inline TwistMatrices twist_matrices(const Mat &rho_plus, const Mat &rho_minus)
{
    const auto k = rho_plus.rows();
    if (rho_plus.cols() != k || rho_minus.rows() != k || rho_minus.cols() != k)
        throw std::invalid_argument("twist_matrices: blocks must be square and equal");
    const Mat Id = Mat::Identity(k, k);
    TwistMatrices t;
    t.rho_plus = rho_plus;
    t.rho_minus = rho_minus;
    if (std::abs(t.det_one_plus()) < 1e-12)
        throw CapabilityError("twist_matrices: 1 + rho_+ is singular");
    Mat ip = (Id + rho_plus).inverse(), ipt = (Id + rho_plus.transpose()).inverse();
    t.B = ipt * rho_plus.transpose() * rho_minus * ip;
    t.C = 0.5 * (rho_plus - Id) * ip;
    const Mat Z = Mat::Zero(k, k);
    t.M.resize(2 * k, 2 * k);
    t.M << -t.B, t.C.transpose(), t.C, Z;
    t.A.resize(4 * k, 4 * k);
    t.A << -t.B, t.C.transpose(), t.B, ipt, //
        t.C, Z, -rho_plus * ip, Z,          //
        t.B, -rho_plus.transpose() * ipt, -t.B, t.C.transpose(), //
        ip, Z, t.C, Z;
    return t;
}

enum class TwistForm { x_tilde, assembled };

inline cplx star_exp_twisted(const ElementaryDescriptor &d2, double theta, const TwistMatrices &tm,
                             const GroupElement &g2, const GroupElement &g2p, TwistForm form = TwistForm::x_tilde)
{
    const int n = d2.n;
    const double a2 = g2.a;
    double pre = std::pow(2.0, n) * std::sqrt(std::abs(tm.rho_plus.determinant())) * std::sqrt(std::cosh(a2)) *
                 std::pow(std::cosh(0.5 * a2), n) / std::abs(tm.det_one_plus());
    double ph = 2.0 * std::sinh(a2) * g2p.ell + std::exp(a2 - 2.0 * g2p.a) * g2.ell;
    if (form == TwistForm::x_tilde) {
        Vec xt = TwistMatrices::x_tilde(g2, g2p);
        ph += std::exp(0.5 * a2 - g2p.a) * std::cosh(0.5 * a2) * omega0(g2.x, g2p.x) + 0.5 * xt.dot(tm.M * xt);
    } else {
        Vec X = TwistMatrices::assembled(g2, g2p);
        ph += X.dot(tm.A * X);
    }
    return pre * std::exp(I * (d2.epsilon * ph / theta));
}

// ---------------------------------------------------------------------------
// Degenerate twist rho_+ = -1, rho_- = 0: the x2'-dependence collapses to a point

struct DegenerateStarExponential {
    ElementaryDescriptor d2;
    double theta;
    GroupElement g2;

    double prefactor() const
    {
        return std::pow(pi * theta, d2.n) * std::sqrt(std::cosh(g2.a)) / std::pow(std::cosh(0.5 * g2.a), d2.n);
    }
    cplx smooth_part(double a2p, double l2p) const
    {
        double ph = 2.0 * std::sinh(g2.a) * l2p + std::exp(g2.a - 2.0 * a2p) * g2.ell;
        return prefactor() * std::exp(I * (d2.epsilon * ph / theta));
    }
    // support of the delta factor in x2'
    Vec constrained_x(double a2p) const
    {
        return std::exp(0.5 * g2.a - a2p) / (2.0 * std::cosh(0.5 * g2.a)) * g2.x;
    }
    // int E(g2') psi(g2') da2' dx2' dl2' over the (a2', l2') box
    QuadResult pair(const Evaluator &psi, double a_half, double l_half, double tol = 1e-10) const
    {
        QuadratureSpec q;
        q.kind = RuleKind::adaptive;
        q.bounds = {{-a_half, a_half}, {-l_half, l_half}};
        q.nodes = {8, 8};
        q.abs_tol = tol;
        q.rel_tol = tol;
        auto f = [&](std::span<const double> p) {
            return smooth_part(p[0], p[1]) * psi(GroupElement(p[0], constrained_x(p[0]), p[1]));
        };
        return integrate(f, q);
    }
};

inline DegenerateStarExponential star_exp_degenerate(const ElementaryDescriptor &d2, double theta,
                                                     const Mat &rho_plus, const Mat &rho_minus,
                                                     const GroupElement &g2)
{
    const auto k = rho_plus.rows();
    if ((rho_plus + Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("star_exp_degenerate: rho_+ is not -1");
    if (rho_minus.cwiseAbs().maxCoeff() > 1e-12)
        throw CapabilityError("star_exp_degenerate: only rho_- = 0 collapses to point constraints");
    return {d2, theta, g2};
}

// ---------------------------------------------------------------------------
// Normal groups: elementary first factor times twisted factors

struct NormalStarExponential {
    NormalDescriptor tree;
    double theta;
    NormalElement g;

    cplx operator()(const NormalElement &gp) const
    {
        tree.check(gp);
        cplx v = star_exp_elementary(tree.factors[0], theta, g.parts[0])(gp.parts[0]);
        for (std::size_t k = 1; k < tree.size(); ++k) {
            NormalElement pre = g.prefix(k);
            const auto &act = tree.actions[k - 1];
            auto tm = twist_matrices(act.rho_plus(pre), act.rho_minus(pre));
            v *= star_exp_twisted(tree.factors[k], theta, tm, g.parts[k], gp.parts[k]);
        }
        return v;
    }
};

inline NormalStarExponential star_exp_normal(const NormalDescriptor &t, double theta, const NormalElement &g)
{
    t.validate();
    t.check(g);
    return {t, theta, g};
}

// ---------------------------------------------------------------------------
// ODE and PDE checks

struct OdeReport {
    double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, v = 0.0;
    double max() const { return std::max({gamma1, gamma2, gamma3, v}); }
};

// gamma3 alternative used to document the mismatch of the unscaled closed form
inline double gamma3_unscaled(double alpha, double t) { return 0.5 * t * detail::sinhc(0.5 * alpha * t); }

inline OdeReport verify_ode_system(double alpha, double beta, const std::vector<double> &ts, bool unscaled = false,
                                   double h = 1e-5)
{
    OdeReport r;
    auto g = [&](double t) {
        auto c = ansatz_coefficients(alpha, beta, t);
        if (unscaled)
            c.gamma3 = gamma3_unscaled(alpha, t);
        return c;
    };
    for (double t : ts) {
        auto p = g(t + h), m = g(t - h), c = g(t);
        r.gamma1 = std::max(r.gamma1, std::abs((p.gamma1 - m.gamma1) / (2 * h) - alpha));
        r.gamma2 = std::max(r.gamma2,
                            std::abs((p.gamma2 - m.gamma2) / (2 * h) - (alpha * c.gamma2 + beta * std::exp(-c.gamma1))));
        r.gamma3 = std::max(r.gamma3, std::abs((p.gamma3 - m.gamma3) / (2 * h) -
                                               (0.5 * alpha * c.gamma3 + std::exp(-0.5 * alpha * t))));
        r.v = std::max(r.v, std::abs((p.v - m.v) / (2 * h)));
    }
    return r;
}

struct PdeResidual {
    cplx lhs{0.0, 0.0}, rhs{0.0, 0.0};
    double residual = 0.0;
};

// d/dt E_{exp tX} against (i/theta) lambda_X * E_{exp tX}, the right side through the Moyal
// multiplication of the ansatz and the intertwiner.
inline PdeResidual verify_pde(const ElementaryDescriptor &d, double theta, const LieVector &X, double t,
                              const GroupElement &g0, double dt = 1e-3)
{
    auto E = [&](double s) { return star_exp_lie(d, theta, s, X)(g0); };
    PdeResidual r;
    r.lhs = (E(t + dt) - E(t - dt)) / (2.0 * dt);

    StarConfig c;
    c.theta = theta;
    c.n = d.n;
    c.epsilon = d.epsilon;
    MoyalExponential f{d, theta, X, t};
    AnalyticSymbol Lf = moment_moyal_multiply_position(c, X, f.analytic());
    const double tau = 2.0 * d.epsilon * ansatz_coefficients(X.alpha, X.beta, t).gamma1 / theta;
    // Lf = (p0(a, x) + p1(a, x) ell) exp(i tau ell)
    auto p0 = [&](double a, const Vec &x) { return Lf(a, x, 0.0); };
    auto p1 = [&](double a, const Vec &x) { return Lf(a, x, 1.0) * std::exp(-I * tau) - Lf(a, x, 0.0); };
    cplx v = T_theta_plane_wave(d.n, theta, tau, p0)(g0);
    // T(ell e^{i tau ell} h) = -i d/dtau T(e^{i tau ell} h)
    const double ht = 1e-4;
    auto Tp1 = [&](double s) { return T_theta_plane_wave(d.n, theta, s, p1)(g0); };
    v += -I * (Tp1(tau + ht) - Tp1(tau - ht)) / (2.0 * ht);
    r.rhs = I / theta * v;
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// Left product by a plane wave amp(a) e^{i omega0(q(a), x)} e^{i nu ell}, in closed spectral form

inline Spectrum plane_wave_left_star_spectrum(int n, int epsilon, double theta, const PlaneWave &pw, Spectrum phi)
{
    return [=](double a, const Vec &x, double xi) -> cplx {
        const double eps = epsilon, th = theta;
        double a2 = a - 0.5 * std::asinh(eps * th * pw.nu / 2.0);
        double Cn = std::sqrt(1.0 + th * th * pw.nu * pw.nu / 4.0);
        double a1 = a2 + 0.5 * std::asinh(eps * th * xi / 2.0);
        double Cx = std::sqrt(1.0 + th * th * xi * xi / 4.0);
        double c1 = std::cosh(a1 - a), c2 = std::cosh(a2 - a), c12 = std::cosh(a1 - a2);
        cplx amp = std::sqrt(std::cosh(2.0 * (a1 - a)) / (Cn * Cx)) * std::pow(c12 / (c1 * c2), n) * pw.amp(a1);
        if (n == 0)
            return amp * phi(a2, x, 2.0 * eps / th * std::sinh(2.0 * (a1 - a)));
        Vec q = pw.q(a1);
        Vec x2 = (c12 / c1) * x - eps * th * q / (2.0 * c1 * c2);
        return amp * std::exp(I * ((c12 / c2) * omega0(q, x))) *
               phi(a2, x2, 2.0 * eps / th * std::sinh(2.0 * (a1 - a)));
    };
}

inline SymbolFunction starexp_left_star_symbol(const StarExponential &E, const SymbolFunction &phi,
                                               double window = 40.0)
{
    if (phi.n != E.d.n)
        throw std::invalid_argument("starexp_left_star: dimension mismatch");
    if (phi.decay != DecayClass::schwartz_r_chart)
        throw CapabilityError("starexp_left_star: the operand must be Schwartz");
    Spectrum s = phi.spectrum;
    if (!s) {
        FourierWindow w;
        s = [phi, w](double a, const Vec &x, double xi) { return partial_fourier_ell(phi, a, x, xi, w); };
    }
    return symbol_from_spectrum(E.d.n, plane_wave_left_star_spectrum(E.d.n, E.d.epsilon, E.theta, E.plane_wave(), s),
                                window);
}

inline QuadResult starexp_left_star(const ElementaryDescriptor &d, double theta, const GroupElement &gp,
                                    const SymbolFunction &phi, const GroupElement &g0, double window = 40.0)
{
    auto s = starexp_left_star_symbol(star_exp_elementary(d, theta, gp), phi, window);
    return inverse_partial_fourier(s.spectrum, g0.a, g0.x, g0.ell, window, 1e-12, 32);
}

} // namespace jstar
