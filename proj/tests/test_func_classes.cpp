#include <gtest/gtest.h>

#include "spapprox/func_classes.hpp"

using namespace spapprox;

namespace {

ConvexDecayFunction of(DecayRule r) { return ConvexDecayFunction::of(r); }

template <class F>
errc code_of(F&& f)
{
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    return errc::invalid_descriptor;
}

} // namespace

TEST(Characteristics, PowerAndExponential)
{
    for (double t : {1.0, 3.5, 100.0, 1e4}) {
        auto c = characteristics(of(DecayRule::power(1.0)), t);
        EXPECT_NEAR(c.eta, 2.0 * t, 1e-12 * t);
        EXPECT_NEAR(c.mu, 1.0, 1e-10);
        EXPECT_NEAR(c.alpha, 1.0, 1e-15);
        auto e = characteristics(of(DecayRule::exp(1.0, 1.0)), t);
        EXPECT_NEAR(e.eta - t, std::log(2.0), 1e-12);
        EXPECT_NEAR(e.mu, t / std::log(2.0), 1e-9 * t);
        EXPECT_NEAR(e.ratio, 1.0, 1e-15);
        EXPECT_NEAR(e.alpha, 1.0 / t, 1e-15);
    }
    // t^{-r}: eta = 2^{1/r} t
    auto c = characteristics(of(DecayRule::power(0.5)), 7.0);
    EXPECT_NEAR(c.eta, 28.0, 1e-10);
}

TEST(Characteristics, LogFamilyBoundedMu)
{
    auto psi = of(DecayRule::log(1.0, std::exp(1.0)));
    double mx = 0.0;
    for (double t : log_grid(1e4, 60)) {
        auto c = characteristics(psi, t);
        // ln(eta + e) = 2 ln(t + e)
        EXPECT_NEAR(std::log(c.eta + std::exp(1.0)), 2.0 * std::log(t + std::exp(1.0)), 1e-10);
        mx = std::max(mx, c.mu);
    }
    EXPECT_LT(mx, 1.0);
}

TEST(Characteristics, RootBracketFailure)
{
    auto flat = ConvexDecayFunction::table({{1.0, 1.0}, {10.0, 0.9}});
    EXPECT_EQ(code_of([&] { characteristics(flat, 1.0); }), errc::root_bracket_failure);
    EXPECT_EQ(code_of([&] { characteristics(flat, 0.5); }), errc::parameter_out_of_range);
}

TEST(Classify, FamilyFixtures)
{
    for (double r : {0.5, 1.0, 3.0}) {
        EXPECT_EQ(classify(of(DecayRule::power(r))).label, class_label::mc) << r;
        EXPECT_EQ(classify(of(DecayRule::power(r)).pow(2.0)).label, class_label::mc) << r;
    }
    EXPECT_EQ(classify(of(DecayRule::exp(1.0, 1.0))).label, class_label::m_inf_c);
    EXPECT_EQ(classify(of(DecayRule::exp(3.0, 1.0))).label, class_label::m_inf_c);
    EXPECT_EQ(classify(of(DecayRule::exp(1.0, 0.5))).label, class_label::m_inf_prime);
    EXPECT_EQ(classify(of(DecayRule::exp(2.0, 0.3))).label, class_label::m_inf_prime);
    EXPECT_EQ(classify(of(DecayRule::exp(1.0, 2.0))).label, class_label::m_inf_second);
    // a >= ((r-1)/(r lambda))^{1/r} - 1 keeps exp(-lambda (t+a)^r) convex on [1, inf)
    EXPECT_EQ(classify(of(DecayRule::exp(0.5, 1.5, 1.0))).label, class_label::m_inf_second);
    EXPECT_EQ(classify(of(DecayRule::log(1.0, std::exp(1.0)))).label, class_label::m0);
    EXPECT_EQ(classify(of(DecayRule::log(2.0, 1.0))).label, class_label::m0);
    EXPECT_EQ(classify(of(DecayRule::powerlog(1.0, 1.0, std::exp(3.0) - 1.0))).label, class_label::mc);
}

TEST(Classify, DeltaTwoMatchesM0)
{
    std::vector<DecayRule> rules{DecayRule::power(0.5), DecayRule::power(2.0), DecayRule::log(1.0, 2.0),
                                 DecayRule::powerlog(2.0, -1.0, 1.0), DecayRule::exp(1.0, 0.5),
                                 DecayRule::exp(1.0, 1.0), DecayRule::exp(1.0, 2.0), DecayRule::geometric(3.0)};
    for (auto& r : rules) {
        auto c = classify(of(r));
        ASSERT_TRUE(c.convex) << family_name(r.kind());
        EXPECT_EQ(c.in_B, in_M0(c.label)) << family_name(r.kind()) << " " << class_label_name(c.label);
        EXPECT_EQ(c.mu.size(), c.t.size());
        EXPECT_EQ(c.alpha.size(), c.t.size());
    }
    EXPECT_NEAR(classify(of(DecayRule::power(3.0))).delta2_K, 8.0, 1e-9);
}

TEST(Classify, TablesAndWindow)
{
    std::vector<std::pair<double, double>> pts;
    for (double t : log_grid(4e4, 400)) pts.emplace_back(t, 1.0 / t);
    pts.front().first = 1.0;
    EXPECT_EQ(classify(ConvexDecayFunction::table(pts)).label, class_label::mc);
    // slopes alternate between steep and shallow: decreasing, Delta_2, not convex
    std::vector<std::pair<double, double>> bumpy{{1.0, 1.0}};
    double v = 1.0;
    for (int i = 1; i <= 60; ++i) {
        double t = std::pow(4e4, i / 60.0), prev = bumpy.back().first;
        v *= std::pow(prev / t, i % 2 ? 1.6 : 0.4);
        bumpy.emplace_back(t, v);
    }
    EXPECT_EQ(classify(ConvexDecayFunction::table(bumpy)).label, class_label::b_only);
    EXPECT_EQ(code_of([] { classify(of(DecayRule::power(1.0)), 100.0); }), errc::parameter_out_of_range);
    EXPECT_THROW(ConvexDecayFunction::table({{2.0, 1.0}, {3.0, 0.5}}), error);
    EXPECT_THROW(ConvexDecayFunction::table({{1.0, 1.0}, {3.0, 1.5}}), error);
}

TEST(OrderFormula, EllipsoidBranches)
{
    auto e = of(DecayRule::exp(1.0, 1.0));
    OrderRegime reg{quantity::en, setting::ellipsoid, 2.0, 1.0};
    for (std::uint64_t n : {1, 5, 40}) {
        auto v = order_formula(reg, e, n);
        EXPECT_EQ(v.branch, "Mc_inf|M''inf");
        EXPECT_DOUBLE_EQ(v.value, std::exp(-double(n + 1)));
    }
    auto pw = of(DecayRule::power(1.0));
    auto v = order_formula({quantity::en, setting::ellipsoid, 1.0, 2.0}, pw, 9);
    EXPECT_EQ(v.branch, "B");
    EXPECT_NEAR(v.value, 0.1 * 3.0, 1e-15);
    auto s = of(DecayRule::exp(1.0, 0.5));
    v = order_formula({quantity::en, setting::ellipsoid, 1.0, 2.0}, s, 100);
    EXPECT_EQ(v.branch, "M'inf");
    // eta(psi, 100) solves sqrt(eta) = 10 + ln 2
    const double eta = std::pow(10.0 + std::log(2.0), 2.0);
    EXPECT_NEAR(v.value, std::exp(-std::sqrt(101.0)) * std::sqrt(eta - 100.0), 1e-12);
}

TEST(OrderFormula, ExactWidthBranchMatchesExtremal)
{
    for (auto [d, r] : {std::pair{1, inf}, std::pair{2, inf}, std::pair{2, 1.0}, std::pair{3, 2.0}}) {
        auto rule = DecayRule::power(1.5);
        OrderRegime reg{quantity::width, setting::lattice_class, 2.0, 1.0, d, r};
        auto psi = PsiSystem::radial(d, r, rule);
        for (std::uint64_t n : {1, 2, 7, 30, 100}) {
            auto v = order_formula(reg, of(rule), n);
            const double w = widths(psi, n, 2.0, 1.0, false).value;
            if (r == 1.0 || r == inf) {
                EXPECT_TRUE(v.exact);
                EXPECT_NEAR(v.value, w, 1e-14) << d << " " << r << " " << n;
            } else {
                // non-integer norms: the (n+1)-th modulus sits between psi(m) and psi(m-1)
                EXPECT_FALSE(v.exact);
                const auto m = lattice_level(d, r, n);
                EXPECT_LE(v.value, w * (1 + 1e-14));
                EXPECT_LE(w, rule(double(std::max<std::int64_t>(m - 1, 1))) * (1 + 1e-14));
            }
        }
    }
}

TEST(OrderFormula, OneDimensionalSecondClass)
{
    auto g = of(DecayRule::exp(1.0, 2.0));
    for (auto [p, q] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}, std::pair{2.0, 2.0}, std::pair{3.0, 1.0}})
        for (std::uint64_t n = 1; n <= 40; ++n) {
            auto v = order_formula({quantity::en, setting::lattice_class, p, q, 1, inf}, g, n);
            const double ref = g(double((n + 1) / 2));
            EXPECT_GE(v.value, ref * (1 - 1e-12));
            EXPECT_LE(v.value, ref * std::pow(2.0, 1.0 / p) * (1 + 1e-12));
        }
}

TEST(OrderFormula, Preconditions)
{
    // t^{-0.2} violates (2.58) for beta = d(1/p - 1/q) = 1
    EXPECT_EQ(code_of([] { order_formula({quantity::en, setting::lattice_class, 1.0, 2.0, 2, inf}, of(DecayRule::power(0.2)), 10); }),
              errc::branch_precondition_failed);
    EXPECT_EQ(code_of([] { order_formula({quantity::en, setting::lattice_class, 1.0, 2.0, 1, inf}, of(DecayRule::power(1.0)), 0); }),
              errc::parameter_out_of_range);
    // M_r exact for r = inf and r = 1, estimated otherwise
    EXPECT_EQ(lattice_volume_constant(3, inf), 8.0);
    EXPECT_NEAR(lattice_volume_constant(3, 1.0), 8.0 / 6.0, 1e-15);
    EXPECT_NEAR(lattice_volume_constant(2, 2.0), pi, 0.02);
    for (std::uint64_t n : {1, 8, 9, 24, 25, 26}) {
        auto m = lattice_level(2, inf, n);
        EXPECT_LE(lattice_count(2, inf, m - 1), n);
        EXPECT_GT(lattice_count(2, inf, m), n);
        // (2m-1)^2 <= n < (2m+1)^2
        const auto root = std::int64_t(std::sqrt(double(n)) + 1e-9);
        EXPECT_EQ(m, (root + 1) / 2);
    }
}

TEST(RatioValidation, PowerFixturesBounded)
{
    auto ns = n_sample(4, 10000, 20);
    struct Case {
        quantity w;
        setting s;
        double p, q;
        int d;
        double r, decay;
    };
    for (auto c : {Case{quantity::en, setting::lattice_class, 2, 2, 1, inf, 1.0}, Case{quantity::en, setting::lattice_class, 1, 2, 2, inf, 2.0},
                   Case{quantity::en, setting::lattice_class, 2, 1, 2, 1.0, 1.5}, Case{quantity::width, setting::lattice_class, 1, 2, 2, inf, 2.0},
                   Case{quantity::en, setting::ellipsoid, 1, 2, 1, inf, 1.0}, Case{quantity::width, setting::ellipsoid, 1, 3, 1, inf, 1.5}}) {
        OrderRegime reg{c.w, c.s, c.p, c.q, c.d, c.r};
        ASSERT_GT(c.decay, c.d * (1 / c.p - 1 / c.q));
        auto rule = DecayRule::power(c.decay);
        auto rep = ratio_validation(exact_values(reg, rule, ns), order_values(reg, of(rule), ns));
        EXPECT_TRUE(rep.bounded()) << rep.min_ratio << " " << rep.max_ratio;
    }
}

TEST(RatioValidation, ExponentialThreeQuantities)
{
    auto rule = DecayRule::exp(1.0, 1.0);
    auto ns = n_sample(4, 300, 30);
    for (auto [p, q] : {std::pair{1.0, 2.0}, std::pair{2.0, 1.0}, std::pair{2.0, 2.0}}) {
        auto en = exact_values({quantity::en, setting::lattice_class, p, q, 1, inf}, rule, ns);
        auto wd = exact_values({quantity::width, setting::lattice_class, p, q, 1, inf}, rule, ns);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double h = rule(double(ns[i]) / 2.0);
            for (double x : {en.value[i] / h, wd.value[i] / h, en.value[i] / wd.value[i]}) {
                EXPECT_GE(x, 0.1);
                EXPECT_LE(x, 10.0);
            }
        }
    }
}

TEST(RatioValidation, DegenerateAndMismatch)
{
    OrderRegime a{quantity::en, setting::lattice_class, 2, 2, 1, inf};
    auto rule = DecayRule::power(1.0);
    auto ex = exact_values(a, rule, {10});
    auto rep = ratio_validation(ex, order_values(a, of(rule), {10}));
    EXPECT_EQ(rep.min_ratio, rep.max_ratio);
    OrderRegime b = a;
    b.q = 1.0;
    EXPECT_EQ(code_of([&] { ratio_validation(ex, order_values(b, of(rule), {10})); }), errc::regime_mismatch);
    EXPECT_EQ(code_of([&] { ratio_validation(ex, order_values(a, of(rule), {11})); }), errc::regime_mismatch);
}

TEST(RatioValidation, NTermOverWidthsDecaysForQBelowP)
{
    auto rule = DecayRule::power(1.0);
    auto ns = n_sample(4, 4000, 16);
    auto en = exact_values({quantity::en, setting::ellipsoid, 2, 1, 1, inf}, rule, ns);
    auto wd = exact_values({quantity::width, setting::ellipsoid, 2, 1, 1, inf}, rule, ns);
    std::vector<double> ratio;
    for (std::size_t i = 0; i < ns.size(); ++i) ratio.push_back(en.value[i] / wd.value[i]);
    EXPECT_GE(kendall(ratio).down, 0.95);
    EXPECT_LT(ratio.back(), 0.1 * ratio.front());
}
