#ifndef SPAPPROX_EXTREMAL_HPP
#define SPAPPROX_EXTREMAL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spapprox/lattice.hpp"
#include "spapprox/psi_system.hpp"
#include "spapprox/tails.hpp"

namespace spapprox {

struct ExtremalResult {
    double value = 0.0;
    std::string formula;
    std::optional<std::vector<Index>> gamma;
    std::optional<std::uint64_t> s_star;
    double error = 0.0;             // absolute error estimate from tail remainders
    bool upper_bound_only = false;
    bool unique_checked = true;     // sandwich post-check result
};

inline double tail_exponent(double p, double q) { return p * q / (q - p); }

namespace detail {

inline void check_pq(double p, double q)
{
    if (!(p > 0) || !(q > 0) || !std::isfinite(p) || !std::isfinite(q))
        fail(errc::parameter_out_of_range, "p and q must be positive and finite");
}

inline double log_add(double x, double y)
{
    if (x == -inf) return y;
    if (y == -inf) return x;
    double m = std::max(x, y);
    return m + std::log1p(std::exp(-std::abs(x - y)));
}

} // namespace detail

// Largest modulus outside gamma (q <= p) or l_{pq/(q-p)} norm of the moduli outside gamma (p < q).
inline ExtremalResult ellipsoid_gamma_error(const PsiSystem& psi, const IndexSet& gamma, double p, double q)
{
    detail::check_pq(p, q);
    Profile prof(psi);
    std::map<std::size_t, std::uint64_t> hits;
    std::size_t last = 0;
    bool any = false;
    for (const Index& k : gamma.members(psi.budget())) {
        double m = psi.modulus(k);
        if (m == 0.0) continue;
        std::size_t i = prof.find_value(m);
        if (i == std::size_t(-1)) fail(errc::invalid_descriptor, "index " + k.str() + " not found among levels");
        ++hits[i];
        last = std::max(last, i);
        any = true;
    }
    ExtremalResult res;
    if (q <= p) {
        res.formula = "gamma-error:q<=p";
        for (std::size_t i = 0;; ++i) {
            if (!prof.ensure_levels(i + 1)) {
                res.value = 0.0;
                return res;
            }
            auto it = hits.find(i);
            std::uint64_t h = it == hits.end() ? 0 : it->second;
            if (prof.level(i).count > h) {
                res.value = prof.level(i).value;
                return res;
            }
        }
    }
    res.formula = "gamma-error:p<q";
    double a = tail_exponent(p, q);
    std::uint64_t need = any ? prof.delta(last) : 0;
    Series s = power_tail(psi, a, need, [&](std::size_t i, const Level&) {
        auto it = hits.find(i);
        return it == hits.end() ? std::uint64_t(0) : it->second;
    });
    res.value = std::pow(s.value, 1.0 / a);
    res.error = s.value > 0 ? res.value * s.error / (a * s.value) : 0.0;
    return res;
}

// First n indices in enumeration order (the n largest moduli, ties lexicographic).
inline std::vector<Index> top_indices(const PsiSystem& psi, std::uint64_t n)
{
    if (n > psi.budget()) fail(errc::budget_exceeded, "witness size exceeds budget");
    std::vector<Index> out;
    IndexCursor cur(psi);
    IndexLevel lv;
    while (out.size() < n && cur.next(lv))
        for (auto& k : lv.indices) {
            if (out.size() == n) break;
            out.push_back(k);
        }
    return out;
}

inline ExtremalResult widths(const PsiSystem& psi, std::uint64_t n, double p, double q, bool witness = true)
{
    detail::check_pq(p, q);
    ExtremalResult res;
    if (q <= p) {
        res.formula = "widths:q<=p";
        Profile prof(psi);
        res.value = prof.at(n + 1);
    } else {
        res.formula = "widths:p<q";
        double a = tail_exponent(p, q);
        Series s = tail_after(psi, a, n);
        res.value = std::pow(s.value, 1.0 / a);
        res.error = s.value > 0 ? res.value * s.error / (a * s.value) : 0.0;
    }
    if (witness) res.gamma = top_indices(psi, n);
    return res;
}

struct WidthRow {
    std::size_t n = 0;
    std::uint64_t m_lo = 0;    // delta_{n-1}
    std::uint64_t m_hi = 0;    // delta_n - 1
    double value = 0.0;        // epsilon_n
    double best_approx = 0.0;  // E_n of the p-ellipsoid in the psi-metric
    double region_sum = std::nan("");
};

inline std::vector<WidthRow> kolmogorov_width_table(const PsiSystem& psi, double p, std::size_t levels,
                                                    std::optional<double> q = std::nullopt)
{
    if (!(p >= 1) || !std::isfinite(p)) fail(errc::parameter_out_of_range, "Kolmogorov widths need p in [1, inf)");
    Profile prof(psi);
    prof.ensure_levels(levels);
    std::vector<WidthRow> rows;
    for (std::size_t i = 0; i < prof.levels() && i < levels; ++i) {
        WidthRow r;
        r.n = i + 1;
        r.m_lo = i == 0 ? 0 : prof.delta(i - 1);
        r.m_hi = prof.delta(i) - 1;
        r.value = prof.level(i).value;
        r.best_approx = r.value;
        if (q && p < *q) {
            double a = tail_exponent(p, *q);
            r.region_sum = std::pow(tail_after(psi, a, r.m_lo).value, 1.0 / a);
        }
        rows.push_back(r);
    }
    return rows;
}

// Decreasing runs (value, multiplicity).
using RunSource = std::function<bool(Level&)>;

namespace detail {

struct Scan {
    double log_vp = -inf;     // log of value^p
    std::uint64_t s = 0;
    double logP = -inf;       // log sum_{k<=s} psi~^{-q}
    bool found = false;
    bool unique = true;
};

// sup_{s>n} (s-n) (sum_{k<=s} v_k^{-q})^{-p/q}, q <= p, stopped by a certified bound.
inline Scan scan_q_le_p(const RunSource& next, std::uint64_t n, double p, double q, std::uint64_t cap)
{
    const double beta = p / q;
    std::vector<double> vals;
    std::vector<std::uint64_t> cum;
    Scan best;
    double logP = -inf;
    std::uint64_t D = 0;
    Level run;
    auto value_at = [&](std::uint64_t m) {
        auto it = std::lower_bound(cum.begin(), cum.end(), m);
        return vals[std::size_t(it - cum.begin())];
    };
    auto pull = [&] {
        try {
            return next(run);
        } catch (const error& e) {
            if (e.code() == errc::budget_exceeded) fail(errc::no_finite_sup, e.what());
            throw;
        }
    };
    while (pull()) {
        const double logB = -q * std::log(run.value);
        const std::uint64_t hi = D + run.count;
        const std::uint64_t lo = std::max<std::uint64_t>(n + 1, D + 1);
        if (lo <= hi) {
            const double c = std::exp(logP - logB);
            auto logF = [&](std::uint64_t s) {
                return std::log(double(s - n)) - beta * (logB + std::log(c + double(s - D)));
            };
            std::vector<std::uint64_t> cand{lo, hi};
            if (beta > 1.0) {
                double sc = (c - double(D) + beta * double(n)) / (beta - 1.0);
                for (double x : {std::floor(sc), std::ceil(sc)})
                    if (x >= double(lo) && x <= double(hi)) cand.push_back(std::uint64_t(x));
            }
            std::sort(cand.begin(), cand.end());
            for (auto s : cand) {
                double f = logF(s);
                if (!best.found || f > best.log_vp) {
                    best.log_vp = f;
                    best.s = s;
                    best.found = true;
                }
            }
        }
        logP = log_add(logP, std::log(double(run.count)) + logB);
        D = hi;
        vals.push_back(run.value);
        cum.push_back(D);
        if (best.found && D > n) {
            double bound = std::log(double(D + 1 - n)) + p * std::log(run.value);
            std::uint64_t m = D / 2;
            if (m >= n && m >= 1) {
                double b2 = std::log(double(D + 1 - n)) - beta * std::log(double(D + 1 - m)) + p * std::log(value_at(m));
                bound = std::min(bound, b2);
            }
            if (bound <= best.log_vp) return best;
        }
        if (D > cap) fail(errc::no_finite_sup, "certified bound never fell below the incumbent within budget");
    }
    return best;   // finite source: beyond it the functional vanishes
}

// First run end s > n with v_s^{-q} <= P(s)/(s-n) < v_{s+1}^{-q}; then post-check uniqueness.
inline Scan sandwich_p_lt_q(const RunSource& next, std::uint64_t n, double q, std::uint64_t cap,
                            std::size_t post_runs = 64)
{
    Scan res;
    double logP = -inf;
    std::uint64_t D = 0;
    Level cur, nxt;
    bool have = next(cur);
    std::size_t after = 0;
    while (have) {
        bool more = next(nxt);
        logP = log_add(logP, std::log(double(cur.count)) - q * std::log(cur.value));
        D += cur.count;
        if (D > n) {
            double lhs = -q * std::log(cur.value);
            double mid = logP - std::log(double(D - n));
            bool right = !more || mid < -q * std::log(nxt.value);
            if (lhs <= mid && right) {
                if (!res.found) {
                    res.found = true;
                    res.s = D;
                    res.logP = logP;
                } else {
                    res.unique = false;
                }
            }
        }
        if (res.found && ++after > post_runs) break;
        if (D > cap) fail(errc::budget_exceeded, "no s* found within budget");
        if (!more) break;
        cur = nxt;
    }
    return res;
}

inline RunSource profile_runs(const PsiSystem& psi)
{
    auto cur = std::make_shared<LevelCursor>(psi);
    return [cur](Level& l) { return cur->next(l); };
}

} // namespace detail

inline ExtremalResult nterm(const PsiSystem& psi, std::uint64_t n, double p, double q)
{
    detail::check_pq(p, q);
    ExtremalResult res;
    if (q <= p) {
        res.formula = "nterm:q<=p";
        auto sc = detail::scan_q_le_p(detail::profile_runs(psi), n, p, q, psi.budget());
        if (!sc.found) return res;
        res.value = std::exp(sc.log_vp / p);
        res.s_star = sc.s;
        return res;
    }
    res.formula = "nterm:p<q";
    auto sc = detail::sandwich_p_lt_q(detail::profile_runs(psi), n, q, psi.budget());
    if (!sc.found) return res;
    const double a = tail_exponent(p, q);
    double head = std::exp(q / (q - p) * std::log(double(sc.s - n)) - p / (q - p) * sc.logP);
    Series t = tail_after(psi, a, sc.s);
    res.value = std::pow(head + t.value, 1.0 / a);
    res.error = res.value * t.error / (a * (head + t.value));
    res.s_star = sc.s;
    res.unique_checked = sc.unique;
    return res;
}

// The unit system psi == 1, q <= p.
inline ExtremalResult nterm_unit(std::uint64_t n, double p, double q)
{
    detail::check_pq(p, q);
    if (q > p) fail(errc::regime_mismatch, "unit system requires q <= p");
    ExtremalResult res;
    if (p == q) {
        res.formula = "nterm-unit:p=q";
        res.value = 1.0;
        return res;
    }
    res.formula = "nterm-unit:q<p";
    const double beta = p / q;
    double best = -inf;
    std::uint64_t arg = 0;
    for (std::uint64_t s = n + 1;; ++s) {
        double f = std::log(double(s - n)) - beta * std::log(double(s));
        if (f > best) {
            best = f;
            arg = s;
        } else if (f < best) {
            break;
        }
    }
    res.value = std::exp(best / p);
    res.s_star = arg;
    return res;
}

enum class block_family { gamma1, gamma2 };

namespace detail {

// Moduli |psi_k|, k = 1, 2, ... of a system over N; throws when not non-increasing.
inline std::function<double(std::uint64_t)> monotone_moduli(const PsiSystem& psi, std::uint64_t& size)
{
    size = std::uint64_t(-1);
    if (psi.dim() != 1) fail(errc::non_monotone_system, "constrained approximation needs a system over N");
    if (psi.kind() == mode::sequence) return [&psi](std::uint64_t k) { return psi.modulus(Index{std::int64_t(k)}); };
    if (psi.kind() != mode::table) fail(errc::non_monotone_system, "constrained approximation needs a system over N");
    std::int64_t mx = 0;
    for (auto& e : psi.entries()) {
        if (e.first[0] < 1) fail(errc::non_monotone_system, "table index must be positive");
        mx = std::max(mx, e.first[0]);
    }
    std::vector<double> v(std::size_t(mx) + 1, 0.0);
    for (auto& e : psi.entries()) v[std::size_t(e.first[0])] = std::abs(e.second);
    for (std::int64_t k = 2; k <= mx; ++k)
        if (v[std::size_t(k)] > v[std::size_t(k - 1)])
            fail(errc::non_monotone_system, "|psi_k| increases at k=" + std::to_string(k));
    while (mx > 0 && v[std::size_t(mx)] == 0.0) --mx;
    size = std::uint64_t(mx);
    return [v = std::move(v), mx](std::uint64_t k) { return k <= std::uint64_t(mx) ? v[std::size_t(k)] : 0.0; };
}

inline RunSource grouped(std::function<double(std::uint64_t)> value, std::uint64_t size, double rtol)
{
    auto k = std::make_shared<std::uint64_t>(1);
    return [value, size, rtol, k](Level& l) {
        if (*k > size) return false;
        double v = value(*k);
        if (!(v > 0)) return false;
        l.value = v;
        l.count = 1;
        ++*k;
        while (*k <= size) {
            double w = value(*k);
            if (!(w > 0) || !rel_close(v, w, rtol)) break;
            ++l.count;
            ++*k;
        }
        return true;
    };
}

} // namespace detail

inline ExtremalResult constrained_nterm(const PsiSystem& psi, std::uint64_t n, double p, double q, block_family fam)
{
    detail::check_pq(p, q);
    if (n < 1) fail(errc::parameter_out_of_range, "block size n must be >= 1");
    std::uint64_t size = 0;
    auto mod = detail::monotone_moduli(psi, size);
    const double rtol = psi.exact_grouping() ? 0.0 : group_rtol;
    const std::uint64_t blocks = size == std::uint64_t(-1) ? size : (size + n - 1) / n;
    ExtremalResult res;
    if (q <= p) {
        res.formula = fam == block_family::gamma1 ? "constrained:G1:q<=p" : "constrained:G2:q<=p";
        auto sub = [mod, n](std::uint64_t k) { return mod((k - 1) * n + 1); };
        auto sc = detail::scan_q_le_p(detail::grouped(sub, blocks, rtol), 1, p, q, psi.budget());
        if (!sc.found) return res;
        res.value = std::exp(sc.log_vp / p);
        res.s_star = sc.s;
        return res;
    }
    const double a = tail_exponent(p, q);
    res.formula = fam == block_family::gamma1 ? "constrained:G1:p<q" : "constrained:G2:p<q";
    res.upper_bound_only = fam == block_family::gamma2;
    auto block = [mod, n, a](std::uint64_t k) {
        compensated_sum s;
        for (std::uint64_t i = (k - 1) * n + 1; i <= k * n; ++i) s.add(std::pow(mod(i), a));
        return std::pow(s.value(), 1.0 / a);
    };
    auto sc = detail::sandwich_p_lt_q(detail::grouped(block, blocks, rtol), 1, q, psi.budget() / n + 1);
    if (!sc.found) return res;
    double head = std::exp(q / (q - p) * std::log(double(sc.s - 1)) - p / (q - p) * sc.logP);
    Series t = tail_after(psi, a, sc.s * n);
    res.value = std::pow(head + t.value, 1.0 / a);
    res.error = res.value * t.error / (a * (head + t.value));
    res.s_star = sc.s;
    res.unique_checked = sc.unique;
    return res;
}

} // namespace spapprox

#endif // SPAPPROX_EXTREMAL_HPP
