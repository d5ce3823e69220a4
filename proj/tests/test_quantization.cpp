#include <gtest/gtest.h>

#include <random>

#include <jstar/quantization.hpp>

using namespace jstar;

namespace {

std::mt19937_64 gen(4242);
double unif(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

GroupElement random_element(int n, double s = 1.0)
{
    Vec x(2 * n);
    for (int i = 0; i < 2 * n; ++i)
        x[i] = unif(-s, s);
    return {unif(-s, s), x, unif(-s, s)};
}

QPoint random_q(int n)
{
    Vec v(n);
    for (int i = 0; i < n; ++i)
        v[i] = unif(-1, 1);
    return {unif(-1, 1), v};
}

// a smooth, non-symmetric test state with a phase
StateFunction probe_state(int n)
{
    return [n](const QPoint &q) {
        double s = n > 0 ? q.v.squaredNorm() : 0.0;
        double lin = n > 0 ? q.v.sum() : 0.0;
        return std::exp(-0.7 * (q.a - 0.2) * (q.a - 0.2) - 0.4 * s) * std::exp(I * (0.3 * q.a + 0.2 * lin));
    };
}

} // namespace

TEST(Representation, Examples)
{
    QuantizationConfig c{0.7, 1, 1};
    auto phi = probe_state(1);
    auto q = random_q(1);
    EXPECT_EQ(op_U(c, GroupElement::identity(1)).apply_at(phi, q), phi(q));
    double l = 0.9;
    cplx expected = std::exp(I * (l * std::exp(-2.0 * q.a) / c.theta)) * phi(q);
    EXPECT_NEAR(std::abs(op_U(c, {0, Vec::Zero(2), l}).apply_at(phi, q) - expected), 0.0, 1e-15);
}

TEST(Representation, Homomorphism)
{
    for (int n : {0, 1, 2})
        for (int eps : {1, -1}) {
            QuantizationConfig c{0.8, eps, n};
            auto d = c.descriptor();
            auto phi = probe_state(n);
            for (int k = 0; k < 100; ++k) {
                auto g = random_element(n), h = random_element(n);
                auto q = random_q(n);
                cplx lhs = (op_U(c, g) * op_U(c, h)).apply_at(phi, q);
                cplx rhs = op_U(c, multiply(d, g, h)).apply_at(phi, q);
                EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10);
            }
        }
}

TEST(Representation, ModulusIsATranslate)
{
    QuantizationConfig c{1.0, 1, 1};
    auto phi = probe_state(1);
    for (int k = 0; k < 50; ++k) {
        auto g = random_element(1);
        auto q = random_q(1);
        Vec v = g.x.head(1);
        QPoint moved{q.a - g.a, q.v - std::exp(g.a - q.a) * v};
        EXPECT_NEAR(std::abs(op_U(c, g).apply_at(phi, q)), std::abs(phi(moved)), 1e-14);
    }
}

TEST(Parity, SigmaAndMultiplier)
{
    QuantizationConfig c{1.0, 1, 2};
    auto phi = probe_state(2);
    auto q = random_q(2);
    EXPECT_EQ((op_Sigma(c) * op_Sigma(c)).apply_at(phi, q), phi(q));
    EXPECT_EQ(m0(2, 0.0), 8.0);
    for (int k = 0; k < 50; ++k)
        EXPECT_GT(m0(2, unif(-5, 5)), 0.0);
    StateFunction even = [](const QPoint &p) { return cplx(std::exp(-p.a * p.a - p.v.squaredNorm())); };
    EXPECT_EQ(op_Sigma(c).apply_at(even, q), even(q));
}

TEST(QuantizationMap, ClosedFormMatchesComposition)
{
    for (int n : {0, 1, 2})
        for (int eps : {1, -1}) {
            QuantizationConfig c{0.6, eps, n};
            auto phi = probe_state(n);
            for (int k = 0; k < 100; ++k) {
                auto g = random_element(n);
                auto q = random_q(n);
                cplx a = op_Omega(c, g).apply_at(phi, q);
                cplx b = op_Omega_composed(c, g).apply_at(phi, q);
                EXPECT_NEAR(std::abs(a - b), 0.0, 1e-10 * std::max(1.0, std::abs(a)));
            }
        }
}

TEST(QuantizationMap, IdentityAndEquivariance)
{
    QuantizationConfig c{1.3, -1, 1};
    auto d = c.descriptor();
    auto phi = probe_state(1);
    auto q = random_q(1);
    cplx at_e = op_Omega(c, GroupElement::identity(1)).apply_at(phi, q);
    EXPECT_NEAR(std::abs(at_e - (op_m0(c) * op_Sigma(c)).apply_at(phi, q)), 0.0, 1e-14);
    for (int k = 0; k < 100; ++k) {
        auto g = random_element(1), g0 = random_element(1);
        auto p = random_q(1);
        cplx lhs = op_Omega(c, multiply(d, g, g0)).apply_at(phi, p);
        cplx rhs = (op_U(c, g) * op_Omega(c, g0) * op_U(c, inverse(d, g))).apply_at(phi, p);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(QuantizationMap, SymmetricUnderQuadrature)
{
    // steep states keep the double-exponential phase of U out of the quadrature window
    QuantizationConfig c{1.0, 1, 0};
    StateFunction phi = [](const QPoint &q) { return std::exp(-3.0 * (q.a - 0.2) * (q.a - 0.2)) * std::exp(I * 0.3 * q.a); };
    StateFunction psi = [](const QPoint &q) { return std::exp(-2.5 * (q.a + 0.3) * (q.a + 0.3)) * std::exp(I * q.a); };
    auto qs = default_q_spec(0, 8.0);
    qs.nodes = {24};
    for (int k = 0; k < 5; ++k) {
        auto g = random_element(0, 0.5);
        cplx lhs = inner_product(0, psi, op_Omega(c, g).apply(phi), qs).value;
        cplx rhs = inner_product(0, op_Omega(c, g).apply(psi), phi, qs).value;
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-9);
    }
}

TEST(DimensionOperator, ConjugationAndValues)
{
    QuantizationConfig c{0.9, 1, 1};
    auto phi = probe_state(1);
    QPoint o{0.0, Vec::Zero(1)};
    EXPECT_NEAR(std::abs(op_d(c).apply_at(phi, o) - c.kappa() * c.kappa() * phi(o)), 0.0, 1e-16);
    auto d = c.descriptor();
    for (int k = 0; k < 100; ++k) {
        auto g = random_element(1);
        auto q = random_q(1);
        cplx lhs = (op_U(c, g) * op_d(c) * op_U(c, inverse(d, g))).apply_at(phi, q);
        cplx rhs = op_d(c).apply_at(phi, q) / modular(d, g);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10 * std::abs(rhs));
        EXPECT_GT(op_d(c).pullback(q).first.real(), 0.0);
    }
}

TEST(Metaplectic, IdentityIntertwiningAndParity)
{
    auto t = siegel(1, -1);
    const ExtensionAction &act = t.actions[0];
    QuantizationConfig c2{0.8, -1, 1};
    auto phi = probe_state(1);
    NormalElement e1{{GroupElement::identity(0)}};
    auto q = random_q(1);
    EXPECT_NEAR(std::abs(op_R(c2, act, e1).apply_at(phi, q) - phi(q)), 0.0, 1e-16);
    ElementaryDescriptor d1 = t.factors[0];
    for (int k = 0; k < 100; ++k) {
        NormalElement g1{{GroupElement(unif(-1, 1), Vec(0), unif(-1.5, 1.5))}};
        if (k == 0)
            g1.parts[0] = GroupElement(0.3, Vec(0), -1.1);
        auto g2 = random_element(1);
        auto p = random_q(1);
        GroupElement moved = jstar::act(t.actions[0], g1, g2);
        cplx lhs = op_U(c2, moved).apply_at(phi, p);
        cplx rhs = (op_R(c2, act, g1) * op_U(c2, g2) * op_R_inverse(c2, act, g1)).apply_at(phi, p);
        EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-10);
        cplx sig = (op_R(c2, act, g1) * op_Sigma(c2) * op_R_inverse(c2, act, g1)).apply_at(phi, p);
        EXPECT_NEAR(std::abs(sig - op_Sigma(c2).apply_at(phi, p)), 0.0, 1e-12);
        // R is a homomorphism and R(g)^{-1} = R(g^{-1})
        NormalElement g1inv{{inverse(d1, g1.parts[0])}};
        cplx inv = op_R(c2, act, g1inv).apply_at(phi, p);
        EXPECT_NEAR(std::abs(inv - op_R_inverse(c2, act, g1).apply_at(phi, p)), 0.0, 1e-12);
    }
}

TEST(Norms, AnalyticValues)
{
    StateFunction phi = [](const QPoint &q) { return cplx(std::exp(-q.a * q.a)); };
    QuantizationConfig c{1.0, 1, 0};
    auto qs = default_q_spec(0, 10.0);
    EXPECT_NEAR(weighted_norm_sq(c, phi, qs), std::sqrt(pi / 2.0) * std::exp(0.5), 1e-12);
    EXPECT_NEAR(norm_sq(0, phi, qs), std::sqrt(pi / 2.0), 1e-13);
    auto psi = probe_state(0);
    double cs = std::abs(inner_product(0, phi, psi, qs).value);
    EXPECT_LE(cs, std::sqrt(norm_sq(0, phi, qs) * norm_sq(0, psi, qs)));
}

TEST(Norms, UnitarityByQuadrature)
{
    QuantizationConfig c{1.0, 1, 1};
    auto phi = gaussian_state(1, 0.1, 0.8, Vec::Constant(1, 0.2), 1.1, 0.4);
    auto qs = default_q_spec(1, 9.0, 10.0);
    double base = norm_sq(1, phi, qs);
    for (int k = 0; k < 5; ++k) {
        auto g = random_element(1);
        EXPECT_NEAR(norm_sq(1, op_U(c, g).apply(phi), qs), base, 1e-6 * base);
    }
    auto t = siegel();
    NormalElement g1{{GroupElement(0.3, Vec(0), -1.1)}};
    EXPECT_NEAR(norm_sq(1, op_R(c, t.actions[0], g1).apply(phi), qs), base, 1e-6 * base);
}

TEST(FixedPointTrace, ReproducesTraceOfPointQuantizer)
{
    // tr Omega(g) = 1 for every g
    for (int n : {0, 1}) {
        QuantizationConfig c{0.7, 1, n};
        for (int k = 0; k < 10; ++k) {
            auto g = random_element(n);
            auto r = fixed_point_trace(op_Omega(c, g), n, QPoint{0.0, Vec::Zero(n)});
            EXPECT_TRUE(r.converged);
            EXPECT_NEAR(std::abs(r.value - 1.0), 0.0, 1e-8);
        }
    }
}

TEST(CoherentTrace, RankOneAndMotherStateIndependence)
{
    // narrow states keep the ell-profile of <U(g)phi, psi> inside a modest window
    QuantizationConfig c{1.0, 1, 0};
    auto qs = default_q_spec(0, 2.5);
    qs.nodes = {20};
    auto gs = default_g_spec(c);
    gs.bounds = {{-2.5, 2.5}, {-30.0, 30.0}};
    gs.nodes = {5, 12};
    auto psi = gaussian_state(0, 0.1, 0.3, Vec(), 1.0, 0.5);
    auto T = rank_one(0, psi, qs);
    double expected = norm_sq(0, psi, qs);
    cplx t1 = coherent_trace(c, T, gaussian_state(0, 0.0, 0.3), gs, qs).value;
    cplx t2 = coherent_trace(c, T, gaussian_state(0, -0.2, 0.25, Vec(), 1.0, -0.8), gs, qs).value;
    EXPECT_NEAR(std::abs(t1 - expected), 0.0, 1e-5 * expected);
    EXPECT_NEAR(std::abs(t2 - expected), 0.0, 1e-5 * expected);
}

TEST(SymbolCalculus, QuantizationOfNearlyConstantSymbolIsNearlyIdentity)
{
    QuantizationConfig c{1.0, 1, 0};
    const double L = 40.0;
    auto f = gaussian_symbol(0, GaussianParams{Chart::group, 0.0, 1e6, Vec(), 1.0, 0.0, L, 0.0});
    auto phi = gaussian_state(0, 0.1, 0.9);
    QuadratureSpec ax;
    ax.kind = RuleKind::adaptive;
    ax.bounds = {{-6.0, 6.0}};
    ax.nodes = {16};
    ax.abs_tol = 1e-10;
    for (double a0 : {-0.5, 0.0, 0.7}) {
        QPoint p{a0, Vec(0)};
        cplx v = quantize_symbol(c, f, phi, p, ax).value;
        EXPECT_NEAR(std::abs(v - phi(p)), 0.0, 2e-3);
    }
}

TEST(SymbolCalculus, LinearityAndKernel)
{
    QuantizationConfig c{1.0, -1, 0};
    auto f = gaussian_symbol(0, GaussianParams{Chart::r_chart, 0.1, 1.0, Vec(), 1.0, 0.2, 0.9, 0.0});
    auto h = gaussian_symbol(0, GaussianParams{Chart::r_chart, -0.3, 0.8, Vec(), 1.0, -0.1, 1.1, 0.5});
    auto phi = gaussian_state(0, 0.0, 1.0);
    QuadratureSpec ax;
    ax.kind = RuleKind::adaptive;
    ax.bounds = {{-6.0, 6.0}};
    ax.nodes = {8};
    QPoint p{0.2, Vec(0)};
    cplx a = quantize_symbol(c, add(f, scale(h, 2.0)), phi, p, ax).value;
    cplx b = quantize_symbol(c, f, phi, p, ax).value + 2.0 * quantize_symbol(c, h, phi, p, ax).value;
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-10);
    // kernel form: int k(a0, b) phi(b) db
    auto kb = integrate_adaptive([&](double bb) { return omega_kernel(c, f, p.a, bb) * phi(QPoint{bb, Vec(0)}); },
                                 -10.0, 10.0, 1e-12, 1e-12, 2000, 16);
    EXPECT_NEAR(std::abs(kb.value - quantize_symbol(c, f, phi, p, ax).value), 0.0, 1e-8);
}

TEST(SymbolCalculus, SmearedTraceOfProductIsThePairing)
{
    for (int eps : {1, -1})
        for (double th : {0.7, 1.0}) {
            QuantizationConfig c{th, eps, 0};
            auto f = gaussian_symbol(0, GaussianParams{Chart::r_chart, 0.1, 1.0, Vec(), 1.0, 0.2, 0.9, 0.3});
            auto h = gaussian_symbol(0, GaussianParams{Chart::r_chart, -0.3, 0.8, Vec(), 1.0, -0.1, 1.1, -0.5});
            auto r = smeared_trace_identity(c, f, h);
            EXPECT_LE(r.residual, 1e-3) << r.trace << " " << r.pairing;
            EXPECT_GT(std::abs(r.pairing), 1e-3);
            // conjugating one side breaks it
            auto hb = gaussian_symbol(0, GaussianParams{Chart::r_chart, -0.3, 0.8, Vec(), 1.0, -0.1, 1.1, 0.5});
            EXPECT_GT(std::abs(smeared_trace_identity(c, f, hb).trace - r.pairing), 1e-2);
        }
}
