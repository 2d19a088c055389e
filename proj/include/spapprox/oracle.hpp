#ifndef SPAPPROX_ORACLE_HPP
#define SPAPPROX_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "spapprox/error.hpp"
#include "spapprox/numeric.hpp"

namespace spapprox {

enum class oracle_task { gamma_error, nterm };

struct OracleOptions {
    std::size_t restarts = 64;
    std::uint64_t seed = 1;
    std::size_t max_iter = 20000;
    std::size_t climb_steps = 400;
};

constexpr double oracle_shrink = 1.0 - 1e-12;

namespace detail {

// (sum_k |psi_k c_k|^p with the n largest terms removed)^{1/p}
inline double nterm_functional(const std::vector<double>& psi, const std::vector<double>& c, std::size_t n, double p)
{
    std::vector<double> y(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) y[k] = std::abs(psi[k] * c[k]);
    std::sort(y.begin(), y.end(), std::greater<>());
    compensated_sum s;
    for (std::size_t k = n; k < y.size(); ++k) s.add(std::pow(y[k], p));
    return std::pow(s.value(), 1.0 / p);
}

// Scale c onto the l_q sphere, then shrink slightly so it stays feasible.
inline void normalize_q(std::vector<double>& c, double q)
{
    double mx = 0.0;
    for (double x : c) mx = std::max(mx, std::abs(x));
    if (mx == 0.0) return;
    compensated_sum s;
    for (double x : c) s.add(std::pow(std::abs(x) / mx, q));
    double scale = oracle_shrink / (mx * std::pow(s.value(), 1.0 / q));
    for (double& x : c) x *= scale;
}

// max sum a_k x_k^beta on the simplex, by multiplicative updates in log space.
inline double simplex_power_max(const std::vector<double>& a, double beta, const OracleOptions& opt)
{
    const std::size_t N = a.size();
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < N; ++k)
        if (a[k] > 0) live.push_back(k);
    if (live.empty()) return 0.0;
    const std::size_t M = live.size();
    std::vector<double> la(M);
    for (std::size_t i = 0; i < M; ++i) la[i] = std::log(a[live[i]]);
    auto objective = [&](const std::vector<double>& L) {
        compensated_sum s;
        for (std::size_t i = 0; i < M; ++i) s.add(std::exp(la[i] + beta * (L[i] + std::log(oracle_shrink))));
        return s.value();
    };
    double best = 0.0;
    for (std::size_t i = 0; i < M; ++i) best = std::max(best, std::exp(la[i]) * std::pow(oracle_shrink, beta));
    std::mt19937_64 rng(opt.seed);
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> L(M), tmp(M);
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        if (r == 0) {
            std::fill(L.begin(), L.end(), 0.0);
        } else {
            for (auto& x : L) x = std::log(expo(rng));
        }
        double z = log_sum_exp(L);
        for (auto& x : L) x -= z;
        for (std::size_t it = 0; it < opt.max_iter; ++it) {
            for (std::size_t i = 0; i < M; ++i) tmp[i] = beta * L[i] + la[i];
            double zz = log_sum_exp(tmp);
            double change = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                double nv = tmp[i] - zz;
                if (std::isfinite(nv) || std::isfinite(L[i])) change = std::max(change, std::abs(nv - L[i]));
                L[i] = nv;
            }
            if (change < 1e-13) break;
            if ((it & 15) == 0) best = std::max(best, objective(L));
        }
        best = std::max(best, objective(L));
    }
    return best;
}

} // namespace detail

// Independent numerical lower bound for the gamma-error and n-term suprema over the q-ellipsoid.
// gamma-error: entries of `excluded` mark positions of gamma. nterm: n is the number of free terms.
inline double diagonal_norm_oracle(const std::vector<double>& moduli, const std::vector<bool>& excluded, std::size_t n,
                                   double p, double q, oracle_task task, OracleOptions opt = {})
{
    if (!(p > 0) || !(q > 0)) fail(errc::parameter_out_of_range, "p and q must be positive");
    const std::size_t N = moduli.size();
    if (task == oracle_task::gamma_error) {
        if (N > 10000) fail(errc::parameter_out_of_range, "gamma-error oracle accepts at most 1e4 moduli");
        std::vector<double> a(N, 0.0);
        for (std::size_t k = 0; k < N; ++k)
            if (excluded.empty() || !excluded[k]) a[k] = std::pow(std::abs(moduli[k]), p);
        double v = detail::simplex_power_max(a, p / q, opt);
        return std::pow(v, 1.0 / p);
    }
    if (N > 64) fail(errc::parameter_out_of_range, "n-term oracle accepts at most 64 moduli");
    std::vector<double> psi(N);
    for (std::size_t k = 0; k < N; ++k) psi[k] = std::abs(moduli[k]);
    std::vector<std::size_t> ord(N);
    for (std::size_t k = 0; k < N; ++k) ord[k] = k;
    std::stable_sort(ord.begin(), ord.end(), [&](auto x, auto y) { return psi[x] > psi[y]; });
    double best = 0.0;
    std::vector<double> c(N);
    auto eval = [&](std::vector<double>& v) {
        detail::normalize_q(v, q);
        double f = detail::nterm_functional(psi, v, n, p);
        best = std::max(best, f);
        return f;
    };
    // top s live coordinates carry equal |psi_k c_k|; the rest share mass mu proportional to psi^{pq/(q-p)}
    for (std::size_t s = n + 1; s <= N; ++s) {
        if (psi[ord[s - 1]] == 0.0) break;
        auto build = [&](double mu) {
            std::fill(c.begin(), c.end(), 0.0);
            compensated_sum P;
            for (std::size_t i = 0; i < s; ++i) P.add(std::pow(psi[ord[i]], -q));
            double Y = std::pow((1.0 - mu) / P.value(), 1.0 / q);
            for (std::size_t i = 0; i < s; ++i) c[ord[i]] = Y / psi[ord[i]];
            if (mu > 0 && p < q) {
                double a = p * q / (q - p);
                compensated_sum W;
                for (std::size_t i = s; i < N; ++i) W.add(std::pow(psi[ord[i]], a));
                if (W.value() > 0)
                    for (std::size_t i = s; i < N; ++i) {
                        double w = std::pow(psi[ord[i]], a) / W.value();
                        c[ord[i]] = std::pow(mu * w, 1.0 / q);
                    }
            }
            return eval(c);
        };
        build(0.0);
        if (p < q && s < N) {
            const double g = (std::sqrt(5.0) - 1.0) / 2.0;
            double lo = 0.0, hi = 1.0;
            double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
            double f1 = build(x1), f2 = build(x2);
            for (int it = 0; it < 120; ++it) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = build(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = build(x1);
                }
            }
        }
    }
    // random restarts with multiplicative hill climbing
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::normal_distribution<double> G(0.0, 1.0);
    std::vector<double> trial(N);
    for (std::size_t r = 0; r < opt.restarts; ++r) {
        for (auto& x : c) x = U(rng);
        double cur = eval(c);
        double step = 0.5;
        for (std::size_t it = 0; it < opt.climb_steps; ++it) {
            for (std::size_t k = 0; k < N; ++k) trial[k] = c[k] * std::exp(step * G(rng));
            double f = eval(trial);
            if (f > cur) {
                cur = f;
                c = trial;
            } else {
                step = std::max(step * 0.98, 1e-4);
            }
        }
    }
    return best;
}

} // namespace spapprox

#endif // SPAPPROX_ORACLE_HPP
