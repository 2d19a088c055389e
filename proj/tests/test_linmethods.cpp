#include <gtest/gtest.h>

#include <random>

#include <boost/math/special_functions/beta.hpp>

#include "spapprox/linmethods.hpp"

using namespace spapprox;

namespace {

SpElement random_element(std::mt19937_64& rng, int d, int terms = 10)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::map<Index, cplx> m;
    for (int i = 0; i < terms; ++i) {
        Index k(d);
        for (int j = 0; j < d; ++j) k[j] = std::int64_t(rng() % 11) - 5;
        m[k] = cplx(U(rng), U(rng));
    }
    return SpElement::from_map(d, m);
}

const std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};

} // namespace

TEST(TapLambda, FormsAgree)
{
    for (int r = 1; r <= 8; ++r)
        for (double rho : rhos)
            for (std::int64_t nu = 0; nu <= 200; ++nu) {
                const double a = tap_lambda_binomial(nu, r, rho), b = tap_lambda_derivative(nu, r, rho);
                EXPECT_NEAR(a, b, 1e-12) << nu << " " << r << " " << rho;
                // lambda_{nu,r} = P(Bin(nu, 1-rho) <= r-1) = I_rho(nu-r+1, r)
                if (nu >= r) { EXPECT_NEAR(a, boost::math::ibeta(double(nu - r + 1), double(r), rho), 1e-12); }
                EXPECT_GE(a, 0.0);
                EXPECT_LE(a, 1.0 + 1e-15);
                EXPECT_NEAR(a + tap_complement(nu, r, rho), 1.0, 1e-12);
            }
}

TEST(TapLambda, ContinuityAtOne)
{
    for (int r = 1; r <= 8; ++r)
        for (std::int64_t nu : {0, 1, 5, 50}) EXPECT_NEAR(tap_lambda_binomial(nu, r, 1.0 - 1e-9), 1.0, 1e-6);
}

TEST(Multipliers, Examples)
{
    EXPECT_DOUBLE_EQ(MultiplierMethod::fejer(1).lambda(1), 0.5);
    EXPECT_EQ(MultiplierMethod::fejer(1).lambda(2), 0.0);
    EXPECT_EQ(MultiplierMethod::partial(3).lambda(3), 1.0);
    EXPECT_EQ(MultiplierMethod::partial(3).lambda(4), 0.0);
    EXPECT_EQ(MultiplierMethod::abel_poisson(0.5, 2.0).lambda(0), abel_poisson_lambda0);
    EXPECT_DOUBLE_EQ(MultiplierMethod::abel_poisson(0.5, 2.0).lambda(3), std::pow(0.5, 9.0));
    for (double rho : rhos)
        for (std::int64_t nu = 0; nu <= 300; ++nu) {
            EXPECT_EQ(MultiplierMethod::tap(rho, 1).lambda(nu), MultiplierMethod::abel_poisson(rho, 1.0).lambda(nu));
            EXPECT_EQ(MultiplierMethod::tap(rho, 1).complement(nu), MultiplierMethod::abel_poisson(rho, 1.0).complement(nu));
        }
    for (int r = 1; r <= 5; ++r)
        for (std::int64_t nu = 0; nu <= 20; ++nu) EXPECT_EQ(MultiplierMethod::tap(0.0, r).lambda(nu), nu < r ? 1.0 : 0.0);
    EXPECT_THROW(MultiplierMethod::tap(1.0, 2), error);
    EXPECT_THROW(MultiplierMethod::tap(0.5, 0), error);
    EXPECT_THROW(MultiplierMethod::abel_poisson(0.5, 0.0), error);
    EXPECT_THROW(MultiplierMethod::fejer(-1), error);
}

TEST(ApplyMethod, ErrorsMatchDefinitions)
{
    std::mt19937_64 rng(3);
    for (int run = 0; run < 100; ++run) {
        const int d = 1 + int(rng() % 3);
        auto f = random_element(rng, d);
        const double p = 1.0 + double(rng() % 3) * 0.5;
        const std::int64_t n = std::int64_t(rng() % 8);
        EXPECT_NEAR(method_error(f, MultiplierMethod::partial(n), p), tail_error(f, region_triangular(d, n), p), 1e-13);
        for (auto m : {MultiplierMethod::fejer(n), MultiplierMethod::tap(0.7, 3), MultiplierMethod::abel_poisson(0.4, 1.5)})
            EXPECT_NEAR(method_error(f, m, p), sp_norm(f - apply_method(f, m), p), 1e-12);
        // tap(0, r) reproduces the triangular partial sum of order r - 1
        EXPECT_EQ(apply_method(f, MultiplierMethod::tap(0.0, 3)), apply_method(f, MultiplierMethod::partial(2)));
    }
    // single harmonic at nu <= n: Fejer error (nu/(n+1)) |c|
    auto h = SpElement::from_terms(2, {{Index{2, -1}, cplx(0.0, 2.0)}});
    EXPECT_NEAR(method_error(h, MultiplierMethod::fejer(5), 2.0), 3.0 / 6.0 * 2.0, 1e-15);
}

TEST(ApplyMethod, CommutesWithPsiTransform)
{
    std::mt19937_64 rng(8);
    auto psi = PsiSystem::radial(2, 1.0, DecayRule::power(1.5));
    for (int run = 0; run < 50; ++run) {
        auto f = random_element(rng, 2);
        auto m = MultiplierMethod::tap(0.3 + 0.05 * (run % 10), 1 + run % 4);
        auto a = apply_method(psi_transform(f, psi, direction::integrate).element, m);
        auto b = psi_transform(apply_method(f, m), psi, direction::integrate).element;
        EXPECT_LT(sp_norm(a - b, 2.0), 1e-15 * (1.0 + sp_norm(a, 2.0)));
    }
}

TEST(Derivatives, RoundAndBracket)
{
    std::mt19937_64 rng(21);
    for (int run = 0; run < 200; ++run) {
        auto f = random_element(rng, 1 + int(rng() % 3), 12);
        EXPECT_EQ(generalized_derivative(f, 1.0, derivative_kind::round), generalized_derivative(f, 1.0, derivative_kind::bracket));
        EXPECT_EQ(generalized_derivative(f, 0.0, derivative_kind::round), f);
        EXPECT_EQ(generalized_derivative(f, 0.0, derivative_kind::bracket), f);
    }
    auto f = SpElement::from_terms(2, {{Index{2, 1}, cplx(1.0)}, {Index{1, 0}, cplx(1.0)}, {Index{0, 0}, cplx(4.0)}});
    auto g = generalized_derivative(f, 2.0, derivative_kind::bracket);
    EXPECT_EQ(g.coeff(Index{2, 1}), cplx(6.0));
    EXPECT_EQ(g.size(), 1u);
    auto h = generalized_derivative(f, 2.0, derivative_kind::round);
    EXPECT_EQ(h.coeff(Index{2, 1}), cplx(9.0));
    EXPECT_EQ(h.coeff(Index{1, 0}), cplx(1.0));
    EXPECT_THROW(generalized_derivative(f, 1.5, derivative_kind::bracket), error);
}

TEST(PoissonNorm, Examples)
{
    auto f = SpElement::from_terms(2, {{Index{0, 0}, cplx(0.5)}, {Index{1, -2}, cplx(3.0, 4.0)}});
    EXPECT_DOUBLE_EQ(poisson_norm(f, 0.0, 2.0), 0.5);
    auto h = SpElement::from_terms(2, {{Index{1, -2}, cplx(3.0, 4.0)}});
    EXPECT_NEAR(poisson_norm(h, 0.6, 1.5), std::pow(0.6, 3.0) * 5.0, 1e-14);
    std::mt19937_64 rng(4);
    for (int run = 0; run < 50; ++run) {
        auto g = random_element(rng, 2);
        double prev = 0.0;
        for (double rho : rhos) {
            double v = poisson_norm(g, rho, 2.0);
            EXPECT_GE(v, prev);
            prev = v;
        }
        EXPECT_LE(prev, sp_norm(g, 2.0));
    }
}

TEST(RateReport, PolynomialFixtures)
{
    auto f = SpElement::from_terms(2, {{Index{1, 0}, cplx(1.0)}, {Index{2, 1}, cplx(0.5)}, {Index{0, -4}, cplx(0.0, 0.25)}});
    auto omega = Majorant::power(1.0);
    auto fej = method_rate_report(f, rate_family::fejer, 1, omega, 2.0, {1, 2, 4, 8, 16, 32, 64, 128});
    ASSERT_EQ(fej.rows.size(), 8u);
    // n >= 4: every block is inside the Fejer window, the error is ||nu f|| / (n+1)
    std::vector<double> nu_f;
    for (auto& [k, c] : f) nu_f.push_back(double(k.norm1()) * std::abs(c));
    for (auto& row : fej.rows)
        if (row.param >= 4) { EXPECT_NEAR(row.error, sp_norm_of(nu_f, 2.0) / (row.param + 1.0), 1e-14); }
    EXPECT_LT(fej.error_ratio_max / fej.error_ratio_min, 10.0);
    std::vector<double> sweep{0.5, 0.8, 0.9, 0.95, 0.99, 0.999};
    auto t1 = method_rate_report(f, rate_family::tap, 1, omega, 2.0, sweep);
    auto a1 = method_rate_report(f, rate_family::abel_poisson, 1, omega, 2.0, sweep);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        EXPECT_EQ(t1.rows[i].error, a1.rows[i].error);
        EXPECT_EQ(t1.rows[i].dual, a1.rows[i].dual);
    }
    for (int r = 1; r <= 4; ++r) {
        auto t = method_rate_report(f, rate_family::tap, r, omega, 2.0, sweep);
        EXPECT_LT(t.error_ratio_max / t.error_ratio_min, 50.0) << r;
        EXPECT_GT(t.error_ratio_min, 0.0);
        EXPECT_LT(t.dual_ratio_max, 1.0 * sp_norm(generalized_derivative(f, r, derivative_kind::bracket), 2.0) + 1e-12);
    }
    // partial sums: errors vanish once n covers the support
    EXPECT_EQ(method_error(f, MultiplierMethod::partial(4), 2.0), 0.0);
    EXPECT_THROW(method_rate_report(f, rate_family::tap, 1, omega, 2.0, {1.0}), error);
}
