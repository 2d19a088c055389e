#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "spapprox/sp_space.hpp"

using namespace spapprox;

namespace {

SpElement scalar(std::vector<cplx> c)
{
    std::vector<SpElement::term> t;
    for (std::size_t k = 0; k < c.size(); ++k) t.emplace_back(Index{std::int64_t(k + 1)}, c[k]);
    return SpElement::from_terms(1, t);
}

SpElement random_element(std::mt19937_64& rng, int dim, int count, int range)
{
    std::uniform_int_distribution<int> idx(-range, range);
    std::normal_distribution<double> g(0.0, 1.0);
    std::map<Index, cplx> m;
    while (int(m.size()) < count) {
        Index k(dim);
        for (int i = 0; i < dim; ++i) k[i] = idx(rng);
        m[k] = cplx(g(rng), g(rng));
    }
    return SpElement::from_map(dim, m);
}

// minimizes sum |f_k - c_k|^p over c supported on G by coordinate-wise golden section
double descent_oracle(const SpElement& f, const IndexSet& G, double p)
{
    std::map<Index, cplx> c;
    for (auto& [k, v] : f)
        if (G.contains(k)) c[k] = 0.0;
    auto objective = [&]() {
        double s = 0.0;
        for (auto& [k, v] : f) {
            auto it = c.find(k);
            s += std::pow(std::abs(v - (it == c.end() ? cplx(0.0) : it->second)), p);
        }
        return s;
    };
    for (int sweep = 0; sweep < 3; ++sweep)
        for (auto& [k, ck] : c)
            for (int part = 0; part < 2; ++part) {
                double lo = -10, hi = 10;
                for (int it = 0; it < 200; ++it) {
                    double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
                    cplx save = ck;
                    ck = part ? cplx(ck.real(), a) : cplx(a, ck.imag());
                    double fa = objective();
                    ck = part ? cplx(ck.real(), b) : cplx(b, ck.imag());
                    double fb = objective();
                    ck = save;
                    if (fa < fb) hi = b;
                    else lo = a;
                }
                ck = part ? cplx(ck.real(), (lo + hi) / 2) : cplx((lo + hi) / 2, ck.imag());
            }
    return std::pow(objective(), 1.0 / p);
}

} // namespace

TEST(SpNorm, Examples)
{
    for (double p : {0.3, 1.0, 2.0, 7.0}) EXPECT_DOUBLE_EQ(sp_norm(scalar({1.0}), p), 1.0);
    EXPECT_DOUBLE_EQ(sp_norm(scalar({3.0, 4.0}), 2.0), 5.0);
    EXPECT_DOUBLE_EQ(sp_norm(scalar({1.0, 1.0, 1.0}), 1.0), 3.0);
    EXPECT_EQ(sp_norm(SpElement(1), 2.0), 0.0);
    EXPECT_DOUBLE_EQ(sp_norm(scalar({cplx(0, 2)}), 1.5), 2.0);
}

TEST(SpNorm, NestingAcrossExponents)
{
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        auto f = random_element(rng, 2, 1 + rep % 17, 6);
        std::uniform_real_distribution<double> U(0.1, 5.0);
        double q = U(rng), p = q + U(rng);
        EXPECT_LE(sp_norm(f, p), sp_norm(f, q) * (1 + 1e-14));
    }
}

TEST(SpElement, RejectsTinyAndDuplicateCoefficients)
{
    EXPECT_THROW(scalar({1.0, 0.0}), error);
    EXPECT_THROW(scalar({1e-301}), error);
    EXPECT_THROW(SpElement::from_terms(1, {{Index{1}, 1.0}, {Index{1}, 2.0}}), error);
    auto f = scalar({1.0, 2.0});
    auto z = f - f;
    EXPECT_TRUE(z.empty());
}

TEST(TailError, Examples)
{
    auto f = scalar({1.0, 0.5, 0.25});
    EXPECT_DOUBLE_EQ(tail_error(f, IndexSet::of(1, {Index{1}}), 1.0), 0.75);
    EXPECT_EQ(tail_error(f, IndexSet::of(1, {Index{1}, Index{2}, Index{3}, Index{9}}), 2.0), 0.0);
    EXPECT_DOUBLE_EQ(tail_error(f, IndexSet::empty(1), 2.0), sp_norm(f, 2.0));
}

TEST(TailError, MinimalPropertyOracle)
{
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 40; ++rep) {
        auto f = random_element(rng, 2, 6, 3);
        std::vector<Index> g;
        for (auto& [k, c] : f)
            if (rng() % 2) g.push_back(k);
        g.push_back(Index{9, 9});
        auto G = IndexSet::of(2, g);
        double p = 1.0 + (rng() % 3);
        EXPECT_NEAR(tail_error(f, G, p), descent_oracle(f, G, p), 1e-8);
    }
}

TEST(TailError, IdentitiesAndMonotonicity)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        auto f = random_element(rng, 2, 12, 5);
        double p = 0.5 + (rng() % 5) * 0.5;
        std::int64_t prev_m = -1;
        double prev = inf;
        for (std::int64_t m = 0; m <= 11; ++m) {
            auto T = region_triangular(2, m);
            double e = tail_error(f, T, p);
            EXPECT_LE(e, prev * (1 + 1e-14));
            prev = e;
            compensated_sum inside;
            for (auto& [k, c] : f)
                if (T.contains(k)) inside.add(std::pow(std::abs(c), p));
            EXPECT_NEAR(std::pow(e, p), sp_norm_pow(f, p) - inside.value(), 1e-12 * sp_norm_pow(f, p));
            prev_m = m;
        }
        EXPECT_EQ(prev, 0.0);
        (void)prev_m;
    }
}

TEST(PsiTransform, IdentityAndRoundTrip)
{
    auto ones = PsiSystem::table(1, {{Index{1}, 1.0}, {Index{2}, 1.0}, {Index{3}, 1.0}});
    auto f = scalar({1.0, cplx(0.5, -2.0), 0.25});
    EXPECT_EQ(psi_transform(f, ones, direction::integrate).element, f);
    EXPECT_EQ(psi_transform(f, ones, direction::differentiate).element, f);

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> num(1, 9), den(1, 16);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::pair<Index, cplx>> t;
        std::vector<SpElement::term> ft;
        for (int k = 1; k <= 20; ++k) {
            t.emplace_back(Index{k}, cplx(double(num(rng)) / den(rng), -double(num(rng)) / den(rng)));
            ft.emplace_back(Index{k}, cplx(num(rng), den(rng)));
        }
        auto psi = PsiSystem::table(1, t);
        auto g = SpElement::from_terms(1, ft);
        auto back = psi_transform(psi_transform(g, psi, direction::integrate).element, psi, direction::differentiate).element;
        for (auto& [k, c] : g) EXPECT_LE(std::abs(back.coeff(k) - c), 1e-14 * std::abs(c));
    }
}

TEST(PsiTransform, ZeroDivisorAndFreeTerm)
{
    auto psi = PsiSystem::table(1, {{Index{1}, 0.5}, {Index{2}, 0.25}});
    auto f = scalar({1.0, 1.0, 1.0});
    try {
        psi_transform(f, psi, direction::differentiate);
        FAIL();
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::zero_divisor);
    }
    auto Z = IndexSet::of(1, {Index{3}});
    auto r = psi_transform(f, psi, direction::differentiate, &Z);
    EXPECT_EQ(r.element.coeff(Index{1}), 2.0);
    EXPECT_EQ(r.element.coeff(Index{2}), 4.0);
    EXPECT_EQ(r.free_term.coeff(Index{3}), 1.0);
    EXPECT_EQ(r.element.size(), 2u);
}

TEST(PsiTransform, BracketRuleMultiplier)
{
    // psi(k) = (nu - r)!/nu! with nu = |k|_1, r = 2: differentiation multiplies nu = 3 by 6
    auto f = SpElement::from_terms(2, {{Index{1, 2}, 1.5}});
    auto psi = PsiSystem::table(2, {{Index{1, 2}, 1.0 / 6.0}});
    EXPECT_DOUBLE_EQ(psi_transform(f, psi, direction::differentiate).element.coeff(Index{1, 2}).real(), 9.0);
}

TEST(TextFormat, RoundTrip)
{
    std::mt19937_64 rng(4);
    auto f = random_element(rng, 3, 20, 4);
    std::stringstream ss;
    write_element(ss, f);
    auto g = read_element(ss, 3);
    EXPECT_EQ(f, g);
    std::stringstream bad("1 2 3\n");
    EXPECT_THROW(read_element(bad, 3), error);
}
