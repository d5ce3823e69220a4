#include <gtest/gtest.h>

#include <random>

#include <jstar/starproduct.hpp>

using namespace jstar;

namespace {

std::mt19937_64 gen(2024);
double unif(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

GroupElement random_element(int n, double s = 0.6)
{
    Vec x(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        x[i] = unif(-s, s);
    return {unif(-s, s), x, unif(-s, s)};
}

SymbolFunction gauss0(double c0, double w0, double l0, double wl, double nu = 0.0)
{
    return gaussian_symbol(0, GaussianParams{Chart::r_chart, c0, w0, Vec(), 1.0, l0, wl, nu});
}

SymbolFunction gauss1(double c0, double w0, Vec x0, double wx, double l0, double wl, double nu = 0.0)
{
    return gaussian_symbol(1, GaussianParams{Chart::r_chart, c0, w0, x0, wx, l0, wl, nu});
}

Vec v2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

StarConfig config0(int eps = 1, double theta = 1.0)
{
    StarConfig c;
    c.theta = theta;
    c.epsilon = eps;
    c.window = 14.0;
    c.abs_tol = 1e-10;
    c.rel_tol = 1e-9;
    return c;
}

} // namespace

TEST(Kernel, Examples)
{
    for (int n : {0, 1, 2}) {
        auto g = random_element(n);
        EXPECT_NEAR(kernel_amplitude(n, g, g, g), 4.0, 1e-14);
        EXPECT_NEAR(kernel_phase(1, g, g, g), 0.0, 1e-14);
    }
    auto g1 = random_element(1), g2 = random_element(1);
    double expect = std::sinh(2 * g1.a) * g2.ell - std::sinh(2 * g2.a) * g1.ell +
                    std::cosh(g1.a) * std::cosh(g2.a) * omega0(g1.x, g2.x);
    EXPECT_NEAR(kernel_phase(1, GroupElement::identity(1), g1, g2), expect, 1e-14);
    EXPECT_NEAR(kernel_phase(-1, GroupElement::identity(1), g1, g2), -expect, 1e-14);
    // phase agrees with the numerics layout used by the oscillatory integrator
    Vec u(8);
    u << g1.a, g1.x[0], g1.x[1], g1.ell, g2.a, g2.x[0], g2.x[1], g2.ell;
    EXPECT_NEAR(kernel_phase_at_identity(u, PairLayout{1}, 1), expect, 1e-14);
}

TEST(Kernel, PhaseIsCyclicAndAntisymmetric)
{
    for (int k = 0; k < 20; ++k) {
        auto g = random_element(1), g1 = random_element(1), g2 = random_element(1);
        EXPECT_NEAR(kernel_phase(1, g, g1, g2), kernel_phase(1, g1, g2, g), 1e-12);
        EXPECT_NEAR(kernel_phase(1, g, g1, g2), -kernel_phase(1, g, g2, g1), 1e-12);
        EXPECT_NEAR(kernel_amplitude(1, g, g1, g2), kernel_amplitude(1, g1, g2, g), 1e-12);
    }
}

TEST(Intertwiner, RoundTripAndPolynomialsFixed)
{
    for (int n : {0, 1}) {
        StarConfig c = config0();
        c.n = n;
        c.theta = 0.7;
        auto f = n == 0 ? gauss0(0.2, 0.9, 0.1, 1.0, 0.4) : gauss1(0.1, 1.0, v2(0.2, -0.1), 1.0, 0.0, 1.0);
        auto back = T_theta(c, T_theta_inv(c, f));
        auto fwd = T_theta_inv(c, T_theta(c, f));
        for (int k = 0; k < 3; ++k) {
            auto g = random_element(n);
            EXPECT_NEAR(std::abs(back(g) - f(g)), 0.0, 1e-9);
            EXPECT_NEAR(std::abs(fwd(g) - f(g)), 0.0, 1e-9);
        }
    }
    // (p0 + p1 ell) G(ell / L): pull-back differs only through the curvature of G, O(theta^2 / L^2)
    StarConfig c = config0();
    c.theta = 1.0;
    const double L = 40.0, p0 = 0.7, p1 = -0.3;
    SymbolFunction f;
    f.n = 0;
    f.eval = [&](const GroupElement &g) { return (p0 + p1 * g.ell) * std::exp(-g.ell * g.ell / (L * L)); };
    f.spectrum = [=](double, const Vec &, double xi) {
        cplx G = L * std::sqrt(pi) * std::exp(-0.25 * L * L * xi * xi);
        cplx dG = -0.5 * L * L * xi * G;
        return p0 * G + p1 * I * dG;
    };
    c.window = 0.5;
    auto h = T_theta_inv(c, f);
    for (double ell : {-2.0, 0.0, 1.5}) {
        GroupElement g(0.3, Vec(0), ell);
        EXPECT_NEAR(std::abs(h(g) - f(g)), 0.0, 5.0 / (L * L));
    }
}

TEST(StarProduct, UnitLaw)
{
    for (int n : {0, 1}) {
        StarConfig c = config0();
        c.n = n;
        c.path = StarPath::reduced_A;
        auto one = constant_symbol(n, 1.0);
        auto f = n == 0 ? gauss0(0.3, 1.0, 0.2, 1.1, 0.5) : gauss1(0.0, 1.2, v2(0.1, 0.3), 0.9, -0.2, 1.0);
        for (int k = 0; k < 3; ++k) {
            auto g = random_element(n);
            EXPECT_NEAR(std::abs(star(c, one, f, g).value - f(g)), 0.0, 1e-6);
            EXPECT_NEAR(std::abs(star(c, f, one, g).value - f(g)), 0.0, 1e-6);
        }
    }
}

TEST(StarProduct, CapabilityBoundaries)
{
    StarConfig c = config0();
    c.n = 1;
    auto f = gauss1(0, 1, Vec(), 1, 0, 1);
    EXPECT_THROW(star(c, f, f, random_element(1)), CapabilityError);
    c.path = StarPath::reduced_A;
    EXPECT_THROW(star(c, f, f, random_element(1)), CapabilityError);
    StarConfig c0 = config0();
    EXPECT_THROW(star(c0, constant_symbol(0, 1.0), gauss0(0, 1, 0, 1), GroupElement::identity(0)),
                 CapabilityError);
    EXPECT_THROW(star(c0, gauss1(0, 1, Vec(), 1, 0, 1), gauss0(0, 1, 0, 1), GroupElement::identity(0)),
                 std::invalid_argument);
    c0.theta = -1.0;
    EXPECT_THROW(c0.validate(), std::invalid_argument);
}

TEST(StarProduct, FullKernelAgreesWithMoyalPath)
{
    auto f1 = gauss0(0.2, 1.0, 0.1, 1.0, 0.3);
    auto f2 = gauss0(-0.1, 0.8, -0.2, 1.2);
    for (int eps : {1, -1}) {
        StarConfig full = config0(eps, 0.8), moyal = full;
        moyal.path = StarPath::moyal_intertwined;
        for (int k = 0; k < (eps == 1 ? 5 : 2); ++k) {
            auto g = random_element(0);
            cplx a = star(full, f1, f2, g).value, b = star(moyal, f1, f2, g).value;
            EXPECT_NEAR(std::abs(a - b), 0.0, 1e-7) << "eps " << eps << " probe " << k;
        }
    }
}

TEST(StarProduct, SpectrumReproducesPointValues)
{
    StarConfig c = config0(1, 1.2);
    auto f1 = gauss0(0.1, 0.9, 0.0, 1.0, -0.2), f2 = gauss0(0.3, 1.1, 0.3, 0.9);
    auto prod = star_symbol(c, f1, f2);
    for (int k = 0; k < 3; ++k) {
        auto g = random_element(0);
        EXPECT_NEAR(std::abs(prod(g) - star(c, f1, f2, g).value), 0.0, 1e-8);
    }
}

TEST(StarProduct, ReducedPathsMatchSpectralForms)
{
    // a function of a alone against a Gaussian: shifted-profile spectrum, and for the moment of E the
    // intertwined Moyal multiplication
    StarConfig c = config0(1, 0.9);
    auto u = a_only_symbol(0, [](double a) { return cplx(std::exp(-a * a)); }, DecayClass::bounded_oscillatory);
    auto f = gauss0(0.0, 1.0, 0.1, 0.8, 0.6);
    c.path = StarPath::reduced_A;
    // closed form: spectrum u(a + asinh(eps theta xi / 2) / 2) f^(a, xi)
    for (int k = 0; k < 3; ++k) {
        auto g = random_element(0);
        auto S = [&](double a, const Vec &x, double xi) {
            return u.a_profile(a + 0.5 * std::asinh(0.45 * xi)) * f.spectrum(a, x, xi);
        };
        auto ref = inverse_partial_fourier(S, g.a, g.x, g.ell, 14.0, 1e-12, 16);
        EXPECT_NEAR(std::abs(star(c, u, f, g).value - ref.value), 0.0, 1e-9);
        // left product by E's moment: e^{-2a} e^{-asinh(theta xi/2)}, the same as the spectral operator
        auto lamE = a_only_symbol(0, [](double a) { return cplx(std::exp(-2 * a)); });
        auto viaMoment = moment_moyal_multiply(c, LieVector::E(0), f.spectrum);
        // star by lambda_E is T of the Moyal multiplication of T^{-1} f
        auto viaT = T_theta_spectrum(c, moment_moyal_multiply(c, LieVector::E(0), T_theta_inv_spectrum(c, f.spectrum)));
        auto r1 = inverse_partial_fourier(viaT, g.a, g.x, g.ell, 14.0, 1e-12, 16);
        EXPECT_NEAR(std::abs(star(c, lamE, f, g).value - r1.value), 0.0, 1e-8);
        auto r2 = inverse_partial_fourier(viaMoment, g.a, g.x, g.ell, 14.0, 1e-12, 16);
        EXPECT_NEAR(std::abs(moyal_star(c, lamE, f, g).value - r2.value), 0.0, 1e-8);
    }
}

TEST(StarProduct, TracialIdentity)
{
    StarConfig c = config0(1, 1.0);
    auto f1 = gauss0(0.2, 0.9, 0.1, 1.0, 0.4), f2 = gauss0(-0.1, 1.1, -0.3, 0.9, -0.2);
    // int (f1 * f2) da dl = int da spectrum(a, 0)
    auto lhs = integrate_adaptive(
        [&](double a) { return star_spectrum(c, f1.spectrum, f2.spectrum, a, 0.0).value; }, -3, 3, 1e-10, 1e-9);
    auto rhs = integrate_adaptive(
        [&](double a) {
            return integrate_adaptive([&](double l) { return f1(a, Vec(0), l) * f2(a, Vec(0), l); }, -9, 9, 1e-12,
                                      1e-11)
                .value;
        },
        -3, 3, 1e-10, 1e-9);
    EXPECT_NEAR(std::abs(lhs.value - rhs.value), 0.0, 1e-8);
    EXPECT_GT(std::abs(rhs.value), 0.1);
}

TEST(StarProduct, LeftInvariance)
{
    ElementaryDescriptor d{0, 1};
    StarConfig c = config0(1, 1.0);
    auto f1 = gauss0(0.1, 1.0, 0.0, 1.0, 0.2), f2 = gauss0(0.2, 0.9, 0.2, 1.1);
    for (int k = 0; k < 3; ++k) {
        auto g0 = random_element(0, 0.4), g = random_element(0);
        cplx lhs = star(c, f1, f2, multiply(d, g0, g)).value;
        cplx rhs = star(c, translate_left(d, f1, g0), translate_left(d, f2, g0), g).value;
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-7);
    }
}

TEST(StarProduct, Associativity)
{
    StarConfig c = config0(1, 0.8);
    c.abs_tol = 1e-9;
    c.rel_tol = 1e-8;
    auto f1 = gauss0(0.1, 1.0, 0.0, 1.0, 0.3), f2 = gauss0(-0.2, 0.9, 0.2, 1.0), f3 = gauss0(0.0, 1.1, -0.1, 0.9);
    auto left = star_symbol(c, star_symbol(c, f1, f2), f3);
    auto right = star_symbol(c, f1, star_symbol(c, f2, f3));
    for (int k = 0; k < 3; ++k) {
        double a = unif(-0.4, 0.4), xi = unif(-1.5, 1.5);
        cplx L = left.spectrum(a, Vec(0), xi), R = right.spectrum(a, Vec(0), xi);
        EXPECT_NEAR(std::abs(L - R), 0.0, 1e-6) << "a " << a << " xi " << xi;
    }
}

TEST(MoyalProduct, SpectralFormMatchesPositionKernel)
{
    // dense Gauss-Legendre on the translated position kernel, which is absolutely convergent for Gaussians
    for (int eps : {1, -1}) {
        StarConfig c = config0(eps, 0.9);
        GaussianParams p1{Chart::group, 0.1, 0.8, Vec(), 1.0, 0.2, 0.9, 0.5};
        GaussianParams p2{Chart::group, -0.2, 0.7, Vec(), 1.0, -0.1, 1.1, 0.0};
        auto h1 = gaussian_symbol(0, p1), h2 = gaussian_symbol(0, p2);
        GroupElement g(0.15, Vec(0), -0.25);
        QuadratureSpec q;
        q.kind = RuleKind::fixed;
        q.order = 16;
        q.bounds = {{-3.5, 3.5}, {-5, 5}, {-3.5, 3.5}, {-5, 5}};
        q.nodes = {3, 4, 3, 4};
        const double th = c.theta;
        auto F = [&](std::span<const double> u) {
            double a1 = u[0], l1 = u[1], a2 = u[2], l2 = u[3];
            return h1(GroupElement(g.a + a1, Vec(0), g.ell + l1)) * h2(GroupElement(g.a + a2, Vec(0), g.ell + l2)) *
                   std::exp(I * (-2.0 * eps / th * (2 * a1 * l2 - 2 * a2 * l1)));
        };
        cplx direct = integrate(F, q).value * 4.0 / (pi * pi * th * th);
        cplx spectral = moyal_star(c, h1, h2, g).value;
        EXPECT_NEAR(std::abs(direct - spectral), 0.0, 1e-8);
        EXPECT_GT(std::abs(direct), 1e-2);
    }
}

TEST(MomentMultiply, CommutatorOfMoments)
{
    for (int eps : {1, -1}) {
        StarConfig c = config0(eps, 0.7);
        auto lamH = moment_symbol(eps, LieVector::H(0)), lamE = moment_symbol(eps, LieVector::E(0));
        auto HE = moment_moyal_multiply_position(c, LieVector::H(0), lamE);
        auto EH = moment_moyal_multiply_position(c, LieVector::E(0), lamH);
        for (int k = 0; k < 4; ++k) {
            auto g = random_element(0);
            cplx comm = HE(g.a, g.x, g.ell) - EH(g.a, g.x, g.ell);
            EXPECT_NEAR(std::abs(comm + 2.0 * I * c.theta * lamE(g.a, g.x, g.ell)), 0.0, 1e-7);
        }
    }
}

TEST(MomentMultiply, SpectralAndPositionFormsAgree)
{
    StarConfig c = config0(-1, 0.9);
    c.n = 1;
    GaussianParams p{Chart::group, 0.1, 1.0, v2(0.2, -0.1), 1.0, 0.1, 1.0, 0.0};
    auto f = gaussian_symbol(1, p);
    // Gaussian extended to complex ell
    AnalyticSymbol fa = [p](double a, const Vec &x, cplx ell) {
        double t = (a - p.c0) / p.w0;
        cplx s = (ell - p.l0) / p.wl;
        return std::exp(-t * t - (x - p.x0).squaredNorm() - s * s);
    };
    for (auto X : LieVector::basis(1))
        for (bool right : {false, true}) {
            auto S = moment_moyal_multiply(c, X, f.spectrum, right);
            auto P = moment_moyal_multiply_position(c, X, fa, right);
            auto g = random_element(1);
            auto v = inverse_partial_fourier(S, g.a, g.x, g.ell, 14.0, 1e-12, 16).value;
            EXPECT_NEAR(std::abs(v - P(g.a, g.x, g.ell)), 0.0, 1e-7);
        }
}

TEST(StrongInvariance, MomentsActByFundamentalFields)
{
    struct Case {
        int n, eps;
        LieVector X;
    };
    std::vector<Case> cases{{0, 1, LieVector::H(0)}, {0, 1, LieVector::E(0)}, {0, -1, LieVector::E(0)},
                            {1, 1, LieVector::e(1, 0)}, {1, -1, LieVector::e(1, 1)}, {1, 1, LieVector::E(1)}};
    for (const auto &cs : cases) {
        StarConfig c = config0(cs.eps, 0.8);
        c.n = cs.n;
        auto f = cs.n == 0 ? gauss0(0.1, 1.0, 0.2, 1.0, 0.3) : gauss1(0.0, 1.0, v2(0.3, -0.2), 1.0, 0.1, 1.0, 0.2);
        for (int k = 0; k < 2; ++k) {
            auto g = random_element(cs.n);
            auto r = strong_invariance_check(c, cs.X, f, g);
            EXPECT_LT(r.residual, 1e-5);
            EXPECT_GT(std::abs(r.field_term), 1e-4);
        }
    }
}

TEST(StrongInvariance, BothSidesScaleLinearlyInTheta)
{
    auto f = gauss0(0.1, 1.0, 0.2, 1.0, 0.3);
    GroupElement g(0.2, Vec(0), 0.1);
    StarConfig c1 = config0(1, 0.5), c2 = config0(1, 1.0);
    auto r1 = strong_invariance_check(c1, LieVector::E(0), f, g);
    auto r2 = strong_invariance_check(c2, LieVector::E(0), f, g);
    EXPECT_NEAR(std::abs(r2.field_term - 2.0 * r1.field_term), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(r2.commutator - 2.0 * r1.commutator), 0.0, 1e-5);
}

TEST(NormalStar, SiegelFactorizesAndIsInvariant)
{
    auto t = siegel();
    auto nc = normal_star_config(t, 1.0);
    nc.first.window = nc.second.window = 14.0;
    auto u1 = gauss0(0.1, 1.0, 0.0, 1.0, 0.2), u2 = gauss0(-0.1, 0.9, 0.1, 1.1);
    auto v1 = a_only_symbol(1, [](double a) { return cplx(std::exp(-(a - 0.1) * (a - 0.1))); });
    auto v2s = gauss1(0.0, 1.0, v2(0.2, 0.1), 1.0, 0.0, 1.0, 0.3);
    auto one0 = constant_symbol(0, 1.0), one1 = constant_symbol(1, 1.0);
    SeparableSymbol F1{{{u1, v1}}}, F2{{{u2, v2s}}};
    SeparableSymbol A{{{u1, one1}}}, B{{{u2, one1}}};

    auto g = siegel_element(0.2, -0.1, 0.1, 0.3, -0.2, 0.4);
    StarConfig c1 = nc.first;
    cplx ab = star_normal(nc, A, B, g);
    EXPECT_NEAR(std::abs(ab - star(c1, u1, u2, g.parts[0]).value), 0.0, 1e-12);
    SeparableSymbol U{{{one0, one1}}};
    EXPECT_NEAR(std::abs(star_normal(nc, U, F2, g) - F2(g)), 0.0, 1e-6);

    // left translation by the normal group maps separable symbols to separable symbols
    auto g0 = siegel_element(0.1, 0.2, -0.1, 0.2, 0.1, -0.3);
    auto translate = [&](const SeparableSymbol &F) {
        SeparableSymbol r;
        const auto &d1 = t.factors[0];
        const auto &d2 = t.factors[1];
        Mat M = t.actions[0].matrix(g0.prefix(1));
        for (const auto &[u, v] : F.terms) {
            auto tu = translate_left(d1, u, g0.parts[0]);
            auto tv = translate_left(d2, v, g0.parts[1]);
            SymbolFunction w = tv;
            w.eval = [tv, M](const GroupElement &h) { return tv.eval(GroupElement(h.a, M * h.x, h.ell)); };
            if (tv.spectrum)
                w.spectrum = [tv, M](double a, const Vec &x, double xi) { return tv.spectrum(a, M * x, xi); };
            w.plane_wave.reset();
            r.terms.push_back({tu, w});
        }
        return r;
    };
    auto TF1 = translate(F1), TF2 = translate(F2);
    for (int k = 0; k < 2; ++k) {
        auto h = siegel_element(unif(-.4, .4), unif(-.4, .4), unif(-.4, .4), unif(-.4, .4), unif(-.4, .4),
                                unif(-.4, .4));
        EXPECT_NEAR(std::abs(TF1(h) - F1(multiply_normal(t, g0, h))), 0.0, 1e-13);
        cplx lhs = star_normal(nc, F1, F2, multiply_normal(t, g0, h));
        cplx rhs = star_normal(nc, TF1, TF2, h);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-7);
    }
}
