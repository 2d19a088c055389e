#ifndef SPAPPROX_TAILS_HPP
#define SPAPPROX_TAILS_HPP

#include <cmath>
#include <cstdint>
#include <functional>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "spapprox/psi_system.hpp"

namespace spapprox {

// Value with an absolute error estimate.
struct Series {
    double value = 0.0;
    double error = 0.0;
};

constexpr double tail_rtol = 1e-12;

namespace detail {

inline double d1(const std::function<double(double)>& h, double x, double s)
{
    return (h(x - 2 * s) - 8 * h(x - s) + 8 * h(x + s) - h(x + 2 * s)) / (12 * s);
}

inline double d3(const std::function<double(double)>& h, double x, double s)
{
    return (h(x + 2 * s) - 2 * h(x + s) + 2 * h(x - s) - h(x - 2 * s)) / (2 * s * s * s);
}

inline double d5(const std::function<double(double)>& h, double x, double s)
{
    return (h(x + 3 * s) - 4 * h(x + 2 * s) + 5 * h(x + s) - 5 * h(x - s) + 4 * h(x - 2 * s) - h(x - 3 * s)) /
           (2 * std::pow(s, 5));
}

// Sum_{k > K} h(k) by Euler-Maclaurin with integral I = int_K^inf h.
inline Series euler_maclaurin(const std::function<double(double)>& h, double K, double I)
{
    if (!std::isfinite(I)) fail(errc::divergent_tail, "remainder integral diverges");
    double s = std::min(0.25, K / 8.0);
    double v = I - h(K) / 2.0 - d1(h, K, s) / 12.0 + d3(h, K, s) / 720.0;
    double e = std::abs(d5(h, K, std::min(1.0, K / 8.0))) / 30240.0 + 1e-15 * std::abs(I);
    return {v, e};
}

inline double numeric_tail_integral(const std::function<double(double)>& h, double K)
{
    boost::math::quadrature::exp_sinh<double> q;
    double err = 0.0;
    double v = q.integrate([&](double u) { return h(K + u); }, 0.0, inf, 1e-14, &err);
    if (!std::isfinite(v)) return inf;
    return v;
}

} // namespace detail

// Sum_{k >= 1} rule(k)^a.
inline Series rule_series(const DecayRule& rule, double a, std::uint64_t cap = 1u << 24, double rtol = tail_rtol)
{
    if (!std::isfinite(rule.tail_integral(a, 1.0))) fail(errc::divergent_tail, "series of " + rule.describe() + " diverges");
    std::function<double(double)> h = [&](double t) { return std::exp(a * rule.log_value(t)); };
    compensated_sum s;
    std::uint64_t k = 0;
    std::uint64_t check = 256;
    Series rem;
    while (true) {
        while (k < check) {
            ++k;
            s.add(h(double(k)));
        }
        rem = detail::euler_maclaurin(h, double(k), rule.tail_integral(a, double(k)));
        if (rem.error <= rtol * (s.value() + rem.value) || check >= cap) break;
        check *= 2;
    }
    return {s.value() + rem.value, rem.error};
}

// Sum over rearrangement positions of psi~^a, where exclude(level_no, level) gives how many
// positions of that level to leave out. Walks at least min_positions positions.
template <class Exclude>
Series power_tail(const PsiSystem& psi, double a, std::uint64_t min_positions, Exclude exclude,
                  double rtol = tail_rtol)
{
    LevelCursor cur(psi);
    compensated_sum W;
    compensated_sum H;
    Level l;
    std::size_t no = 0;
    auto step = [&]() {
        if (!cur.next(l)) return false;
        std::uint64_t ex = exclude(no, l);
        double va = std::pow(l.value, a);
        if (ex < l.count) W.add(double(l.count - ex) * va);
        H.add(double(l.count) * va);
        ++no;
        return true;
    };
    while (cur.consumed() < min_positions)
        if (!step()) break;

    switch (psi.kind()) {
    case mode::table: {
        while (step()) {
        }
        return {W.value(), 0.0};
    }
    case mode::sequence: {
        const auto& rule = psi.rules()[0];
        if (!std::isfinite(rule.tail_integral(a, 1.0)))
            fail(errc::divergent_tail, "series of " + rule.describe() + " diverges");
        std::function<double(double)> h = [&](double t) { return std::exp(a * rule.log_value(t)); };
        std::uint64_t check = 256;
        while (true) {
            while (cur.radius() < check)
                    if (!step()) return {W.value(), 0.0};
            Series rem = detail::euler_maclaurin(h, double(cur.radius()), rule.tail_integral(a, double(cur.radius())));
            if (rem.error <= rtol * (W.value() + rem.value) || check * 2 > psi.budget())
                return {W.value() + rem.value, rem.error};
            check *= 2;
        }
    }
    case mode::radial:
        if (psi.analytic_shells()) {
            const auto& rule = psi.rules()[0];
            int d = psi.dim();
            double r = psi.norm_r();
            std::function<double(double)> h = [&](double t) {
                return shell_count_real(d, r, t) * std::exp(a * rule.log_value(t));
            };
            std::uint64_t check = 256;
            while (true) {
                while (cur.radius() < check)
                    if (!step()) return {W.value(), 0.0};
                double K = double(cur.radius());
                double I = rule.kind() == family::log ? inf : detail::numeric_tail_integral(h, K);
                Series rem = detail::euler_maclaurin(h, K, I);
                if (rem.error <= rtol * (W.value() + rem.value) || check >= (1u << 24))
                    return {W.value() + rem.value, rem.error};
                check *= 2;
            }
        } else {
            const auto& rule = psi.rules()[0];
            double d = psi.dim();
            double cr = std::pow(d, 1.0 / psi.norm_r());
            auto upper = [&](double x) {
                return std::exp(a * rule.log_value(std::max(1.0, (std::pow(x, 1.0 / d) - 1.0) / 2.0)));
            };
            auto lower = [&](double x) {
                return std::exp(a * rule.log_value(cr * (std::pow(x, 1.0 / d) + 1.0) / 2.0));
            };
            while (true) {
                double L = double(cur.consumed());
                double up = detail::numeric_tail_integral(upper, L);
                if (!std::isfinite(up)) fail(errc::divergent_tail, "radial tail diverges");
                double lo = detail::numeric_tail_integral(lower, L + 1.0);
                if (up <= 1e-6 * W.value() || cur.consumed() * 4 > psi.budget())
                    return {W.value() + 0.5 * (up + lo), 0.5 * (up - lo)};
                std::uint64_t target = cur.consumed() * 2 + 1;
                while (cur.consumed() < target)
                    if (!step()) break;
            }
        }
    case mode::product: {
        double total = 1.0;
        double err = 0.0;
        for (auto& rule : psi.rules()) {
            Series s = rule_series(rule, a);
            double sj = std::pow(rule(1.0), a) + 2.0 * s.value;
            err = err * sj + total * 2.0 * s.error + err * 2.0 * s.error;
            total *= sj;
        }
        double rem = std::max(0.0, total - H.value());
        err += 4e-16 * total * psi.dim();
        return {W.value() + rem, err};
    }
    }
    return {W.value(), 0.0};
}

// Sum_{k > skip} psi~_k^a.
inline Series tail_after(const PsiSystem& psi, double a, std::uint64_t skip)
{
    std::uint64_t before = 0;
    return power_tail(psi, a, skip, [&](std::size_t, const Level& l) {
        std::uint64_t ex = skip > before ? std::min<std::uint64_t>(l.count, skip - before) : 0;
        before += l.count;
        return ex;
    });
}

} // namespace spapprox

#endif // SPAPPROX_TAILS_HPP
