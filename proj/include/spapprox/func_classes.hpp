#ifndef SPAPPROX_FUNC_CLASSES_HPP
#define SPAPPROX_FUNC_CLASSES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/tools/roots.hpp>

#include "spapprox/decay.hpp"
#include "spapprox/extremal.hpp"
#include "spapprox/lattice.hpp"

namespace spapprox {

// Positive non-increasing psi(t), t >= 1, evaluated in log space.
class ConvexDecayFunction {
public:
    static ConvexDecayFunction of(const DecayRule& rule)
    {
        ConvexDecayFunction f;
        f.tag_ = family_name(rule.kind());
        f.log_ = [rule](double t) { return rule.log_value(t); };
        f.dlog_ = [rule](double t) { return rule.dlog(t); };
        f.rule_ = rule;
        return f;
    }

    // Piecewise linear through (t_i, psi_i); t_0 = 1, defined on [1, t_last].
    static ConvexDecayFunction table(std::vector<std::pair<double, double>> pts)
    {
        if (pts.size() < 2) fail(errc::invalid_descriptor, "table needs at least two points");
        std::sort(pts.begin(), pts.end());
        if (pts.front().first != 1.0) fail(errc::invalid_descriptor, "table must start at t = 1");
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!(pts[i].second > 0) || !std::isfinite(pts[i].second))
                fail(errc::invalid_descriptor, "table values must be positive");
            if (i && (pts[i].first == pts[i - 1].first || pts[i].second > pts[i - 1].second))
                fail(errc::invalid_descriptor, "table must be strictly increasing in t and non-increasing in value");
        }
        ConvexDecayFunction f;
        f.tag_ = "table";
        f.upper_ = pts.back().first;
        auto seg = [pts](double t) {
            if (t < 1.0 || t > pts.back().first)
                fail(errc::parameter_out_of_range, "t outside the table range");
            auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(t, inf));
            std::size_t i = std::size_t(it - pts.begin());
            i = std::min(std::max<std::size_t>(i, 1), pts.size() - 1) - 1;
            return std::make_pair(pts[i], pts[i + 1]);
        };
        f.log_ = [seg](double t) {
            auto [a, b] = seg(t);
            return std::log(a.second + (b.second - a.second) * (t - a.first) / (b.first - a.first));
        };
        f.dlog_ = [seg](double t) {
            auto [a, b] = seg(t);
            double v = a.second + (b.second - a.second) * (t - a.first) / (b.first - a.first);
            return (b.second - a.second) / (b.first - a.first) / v;
        };
        return f;
    }

    // psi^e
    ConvexDecayFunction pow(double e) const
    {
        if (!(e > 0)) fail(errc::parameter_out_of_range, "exponent must be positive");
        ConvexDecayFunction f = *this;
        auto l = log_, d = dlog_;
        f.log_ = [l, e](double t) { return e * l(t); };
        f.dlog_ = [d, e](double t) { return e * d(t); };
        f.scale_ = scale_ * e;
        return f;
    }

    const std::string& tag() const { return tag_; }
    double upper() const { return upper_; }
    double scale() const { return scale_; }
    const std::optional<DecayRule>& rule() const { return rule_; }

    double operator()(double t) const { return std::exp(log_(t)); }
    double log_value(double t) const { return log_(t); }
    double dlog(double t) const { return dlog_(t); }
    // psi'(t+)
    double derivative(double t) const { return (*this)(t) * dlog_(t); }

private:
    std::string tag_;
    std::function<double(double)> log_, dlog_;
    std::optional<DecayRule> rule_;
    double upper_ = inf;
    double scale_ = 1.0;
};

struct Characteristics {
    double t = 0.0;
    double eta = 0.0;
    double mu = 0.0;
    double alpha = 0.0;         // psi(t) / (t |psi'(t)|)
    double ratio = 0.0;         // psi(t) / |psi'(t)|
};

// eta solves psi(eta) = psi(t)/2; the offset eta - t is found directly for accuracy.
inline Characteristics characteristics(const ConvexDecayFunction& psi, double t)
{
    if (!(t >= 1.0)) fail(errc::parameter_out_of_range, "t must be at least 1");
    const double target = psi.log_value(t) - std::log(2.0);
    auto g = [&](double delta) { return psi.log_value(t + delta) - target; };
    double hi = std::max(1.0, t);
    while (true) {
        if (t + hi > psi.upper()) hi = psi.upper() - t;
        double v = g(hi);
        if (v < 0) break;
        if (t + hi >= psi.upper() || hi > 1e300 || !std::isfinite(v))
            fail(errc::root_bracket_failure, "psi does not halve on the search range from t = " + std::to_string(t));
        hi *= 2.0;
    }
    std::uintmax_t iters = 200;
    auto res = boost::math::tools::toms748_solve(g, 0.0, hi, std::log(2.0), g(hi),
                                                 boost::math::tools::eps_tolerance<double>(44), iters);
    const double delta = 0.5 * (res.first + res.second);
    if (!(delta > 0)) fail(errc::root_bracket_failure, "psi is not strictly decreasing near t = " + std::to_string(t));
    Characteristics c;
    c.t = t;
    c.eta = t + delta;
    c.mu = t / delta;
    const double dl = std::abs(psi.dlog(t));
    c.ratio = dl > 0 ? 1.0 / dl : inf;
    c.alpha = c.ratio / t;
    return c;
}

enum class class_label { m0, mc, m_inf_prime, m_inf_c, m_inf_second, b_only, indeterminate };

inline const char* class_label_name(class_label l)
{
    switch (l) {
    case class_label::m0: return "M0";
    case class_label::mc: return "MC";
    case class_label::m_inf_prime: return "M'inf";
    case class_label::m_inf_c: return "Mc_inf";
    case class_label::m_inf_second: return "M''inf";
    case class_label::b_only: return "B-only";
    case class_label::indeterminate: return "indeterminate";
    }
    return "?";
}

enum class trend { up, down, flat, mixed };

inline const char* trend_name(trend t)
{
    switch (t) {
    case trend::up: return "up";
    case trend::down: return "down";
    case trend::flat: return "flat";
    case trend::mixed: return "mixed";
    }
    return "?";
}

struct ClassThresholds {
    double mu_upper = 1e3;          // mu <= this over the grid: bounded above
    double mu_lower = 1e-3;         // mu >= this over the grid: bounded below
    double kendall = 0.95;          // pair agreement for a monotone trend
    double decade_slope = 0.1;      // |log10 growth| over the last decade for an unbounded trend
    double delta2_bound = 1e3;
    double convex_rtol = 1e-9;
};

struct TrendEvidence {
    trend dir = trend::mixed;
    double kendall_up = 0.0;
    double kendall_down = 0.0;
    double decade_slope = 0.0;      // log10 v(T) - log10 v(T/10)
    bool unbounded = false;         // monotone with a non-vanishing decade slope
};

struct ClassLabel {
    class_label label = class_label::indeterminate;
    std::vector<double> t, mu, alpha, ratio;
    TrendEvidence mu_trend, alpha_trend, ratio_trend;
    double mu_min = 0.0, mu_max = 0.0;
    double ratio_min = 0.0, ratio_max = 0.0;
    double delta2_K = 0.0;          // max psi(t)/psi(2t) over the grid
    TrendEvidence delta2_trend;
    bool convex = true;
    bool in_B = false;
};

inline std::vector<double> log_grid(double T, std::size_t points)
{
    if (points < 3) fail(errc::parameter_out_of_range, "grid needs at least 3 points");
    std::vector<double> g(points);
    for (std::size_t i = 0; i < points; ++i) g[i] = std::pow(T, double(i) / double(points - 1));
    g.back() = T;
    return g;
}

namespace detail {

inline TrendEvidence trend_of(const std::vector<double>& t, const std::vector<double>& v, const ClassThresholds& th)
{
    TrendEvidence e;
    auto k = kendall(v);
    e.kendall_up = k.up;
    e.kendall_down = k.down;
    const double T = t.back();
    auto it = std::lower_bound(t.begin(), t.end(), T / 10.0);
    const std::size_t i = std::size_t(it - t.begin());
    e.decade_slope = std::log10(v.back()) - std::log10(v[std::min(i, v.size() - 1)]);
    if (k.up >= th.kendall) e.dir = trend::up;
    else if (k.down >= th.kendall) e.dir = trend::down;
    else if (k.up + k.down <= 1.0 - th.kendall) e.dir = trend::flat;
    e.unbounded = (e.dir == trend::up && e.decade_slope >= th.decade_slope) ||
                  (e.dir == trend::down && e.decade_slope <= -th.decade_slope);
    return e;
}

// Chord convexity in log space: log psi(t2) <= log(w psi(t1) + (1-w) psi(t3)).
inline bool convex_on(const ConvexDecayFunction& psi, const std::vector<double>& g, double rtol)
{
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        const double w = (g[i + 1] - g[i]) / (g[i + 1] - g[i - 1]);
        const double l1 = psi.log_value(g[i - 1]), l2 = psi.log_value(g[i]), l3 = psi.log_value(g[i + 1]);
        const double rhs = log_sum_exp({std::log(w) + l1, std::log1p(-w) + l3});
        if (l2 > rhs + rtol * std::max(1.0, std::abs(rhs))) return false;
    }
    return true;
}

} // namespace detail

// Label from grid trends on [1, T]; the window is explicit because the classes are asymptotic.
inline ClassLabel classify(const ConvexDecayFunction& psi, const std::vector<double>& grid,
                           const ClassThresholds& th = {})
{
    if (grid.size() < 3 || grid.front() < 1.0 || grid.back() < 1e3)
        fail(errc::parameter_out_of_range, "grid must span [1, T] with T >= 1000");
    if (!std::is_sorted(grid.begin(), grid.end())) fail(errc::parameter_out_of_range, "grid must be increasing");
    ClassLabel c;
    c.t = grid;
    std::vector<double> d2;
    for (double t : grid) {
        auto ch = characteristics(psi, t);
        c.mu.push_back(ch.mu);
        c.alpha.push_back(ch.alpha);
        c.ratio.push_back(ch.ratio);
    }
    std::vector<double> half;
    for (double t : grid)
        if (2.0 * t <= psi.upper()) {
            half.push_back(t);
            d2.push_back(std::exp(psi.log_value(t) - psi.log_value(2.0 * t)));
        }
    c.mu_min = *std::min_element(c.mu.begin(), c.mu.end());
    c.mu_max = *std::max_element(c.mu.begin(), c.mu.end());
    c.ratio_min = *std::min_element(c.ratio.begin(), c.ratio.end());
    c.ratio_max = *std::max_element(c.ratio.begin(), c.ratio.end());
    c.mu_trend = detail::trend_of(grid, c.mu, th);
    c.alpha_trend = detail::trend_of(grid, c.alpha, th);
    c.ratio_trend = detail::trend_of(grid, c.ratio, th);
    if (half.size() >= 3) {
        c.delta2_K = *std::max_element(d2.begin(), d2.end());
        c.delta2_trend = detail::trend_of(half, d2, th);
    } else {
        c.delta2_K = inf;
    }
    c.in_B = std::isfinite(c.delta2_K) && c.delta2_K <= th.delta2_bound &&
             !(c.delta2_trend.unbounded && c.delta2_trend.dir == trend::up);
    c.convex = detail::convex_on(psi, grid, th.convex_rtol);

    if (!c.convex) {
        c.label = c.in_B ? class_label::b_only : class_label::indeterminate;
        return c;
    }
    const bool mu_grows = c.mu_trend.unbounded && c.mu_trend.dir == trend::up;
    if (mu_grows) {
        const bool alpha_falls = c.alpha_trend.dir == trend::down;
        if (c.ratio_trend.unbounded && c.ratio_trend.dir == trend::up && alpha_falls)
            c.label = class_label::m_inf_prime;
        else if (c.ratio_trend.dir == trend::down)
            c.label = class_label::m_inf_second;
        else if (alpha_falls && !c.ratio_trend.unbounded && c.ratio_min >= th.mu_lower && c.ratio_max <= th.mu_upper)
            c.label = class_label::m_inf_c;
        return c;
    }
    if (c.mu_max <= th.mu_upper && c.in_B) {
        const bool mu_falls = c.mu_trend.unbounded && c.mu_trend.dir == trend::down;
        c.label = (c.mu_min >= th.mu_lower && !mu_falls) ? class_label::mc : class_label::m0;
    }
    return c;
}

inline ClassLabel classify(const ConvexDecayFunction& psi, double T = 1e4, std::size_t points = 121,
                           const ClassThresholds& th = {})
{
    return classify(psi, log_grid(T, points), th);
}

inline bool in_M0(class_label l) { return l == class_label::m0 || l == class_label::mc || l == class_label::b_only; }

enum class quantity { en, width };
enum class setting { ellipsoid, lattice_class };

inline const char* quantity_name(quantity q) { return q == quantity::en ? "e_n" : "width"; }
inline const char* setting_name(setting s) { return s == setting::ellipsoid ? "ellipsoid" : "class"; }

struct OrderRegime {
    quantity what = quantity::en;
    setting where = setting::lattice_class;
    double p = 2.0;
    double q = 2.0;
    int d = 1;
    double r = inf;

    bool operator==(const OrderRegime&) const = default;
};

struct OrderValue {
    double value = 0.0;
    std::string branch;
    bool exact = false;
    std::vector<std::string> checks;    // numeric precondition evidence
};

// M_r in (3.33): exact for r = inf and r = 1, otherwise V_m / m^d at the largest affordable m.
inline double lattice_volume_constant(int d, double r)
{
    if (r == inf) return std::pow(2.0, d);
    if (r == 1.0) return std::pow(2.0, d) / boost::math::factorial<double>(unsigned(d));
    const auto m = std::int64_t(std::floor(0.5 * (std::pow(1e6, 1.0 / d) - 1.0)));
    return double(lattice_count(d, r, m)) / std::pow(double(m), d);
}

// m with n in [V_{m-1}, V_m)
inline std::int64_t lattice_level(int d, double r, std::uint64_t n)
{
    std::int64_t lo = 0, hi = 1;
    while (lattice_count(d, r, hi) <= n) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (lattice_count(d, r, mid) <= n) lo = mid;
        else hi = mid;
    }
    return hi;
}

namespace detail {

inline void need(bool ok, const std::string& what)
{
    if (!ok) fail(errc::branch_precondition_failed, what);
}

// t |psi'(t)| / psi(t) >= K0 > beta on the tail of the grid
inline double tail_index_min(const ConvexDecayFunction& psi, double t0, double T)
{
    double m = inf;
    for (double t : log_grid(T, 121))
        if (t >= t0) m = std::min(m, t * std::abs(psi.dlog(t)));
    return m;
}

// k^{(d-1)/a} psi(k+1)/psi(k) at the end of the window, and whether it is decreasing there
inline std::pair<double, bool> condition_337(const ConvexDecayFunction& psi, int d, double a, double T)
{
    auto v = [&](double k) { return std::exp((d - 1) / a * std::log(k) + psi.log_value(k + 1) - psi.log_value(k)); };
    return {v(T), v(T) < v(T / 2.0)};
}

} // namespace detail

struct OrderOptions {
    double T = 1e4;                 // classification window
    double t0 = 1.0;                // start of the convexity / (2.58) tail
};

// Order expression for e_n or widths of psi U^q (ellipsoid, psi is psi_1) or F^psi_{q,r} (lattice class).
inline OrderValue order_formula(const OrderRegime& reg, const ConvexDecayFunction& psi, std::uint64_t n,
                                const OrderOptions& opt = {})
{
    if (!(reg.p > 0) || !(reg.q > 0)) fail(errc::parameter_out_of_range, "p and q must be positive");
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (reg.d < 1) fail(errc::parameter_out_of_range, "d must be positive");
    const double p = reg.p, q = reg.q, e = 1.0 / p - 1.0 / q;
    const double nn = double(n);
    OrderValue out;
    auto label = classify(psi.pow(p), opt.T).label;
    out.checks.push_back(std::string("class(psi^p) = ") + class_label_name(label));
    const bool B = in_M0(label);
    const bool prime_or_c = label == class_label::m_inf_prime || label == class_label::m_inf_c;
    auto check_258 = [&] {
        const double beta = double(reg.d) * e;
        const double K0 = detail::tail_index_min(psi, opt.t0, opt.T);
        out.checks.push_back("K0 = " + std::to_string(K0) + ", beta = " + std::to_string(beta));
        detail::need(K0 > beta, "condition (2.58) fails: tail index does not exceed d(1/p - 1/q)");
        detail::need(detail::convex_on(psi, log_grid(opt.T, 121), 1e-9), "psi is not convex on the window");
    };

    if (reg.where == setting::ellipsoid) {
        if (reg.what == quantity::width && q <= p) {
            out.value = psi(nn + 1.0);
            out.branch = "widths:q<=p";
            out.exact = true;
            return out;
        }
        if (B) {
            if (p < q) check_258();
            out.value = psi(nn + 1.0) * std::pow(nn, e);
            out.branch = "B";
        } else if (label == class_label::m_inf_prime) {
            out.value = psi(nn + 1.0) * std::pow(characteristics(psi, nn).eta - nn, e);
            out.branch = "M'inf";
        } else if (label == class_label::m_inf_c || label == class_label::m_inf_second) {
            out.value = psi(nn + 1.0);
            out.branch = "Mc_inf|M''inf";
        } else {
            detail::need(false, "psi_1^p has no recognised class");
        }
        return out;
    }

    const int d = reg.d;
    auto level = [&] { return lattice_level(d, reg.r, n); };
    if (reg.what == quantity::width && q <= p) {
        // exact when every |k|_r is an integer; otherwise the true value lies in [psi(m), psi(m-1)]
        out.value = psi(double(level()));
        out.branch = "widths:q<=p";
        out.exact = d == 1 || reg.r == 1.0 || reg.r == inf;
        return out;
    }
    auto via_mn = [&](bool with_alpha) {
        const double mn = std::pow(nn / lattice_volume_constant(d, reg.r), 1.0 / d);
        detail::need(mn >= 1.0, "m_n = (n/M_r)^{1/d} is below 1");
        double v = psi(mn);
        if (with_alpha) v *= std::pow(nn * characteristics(psi, mn).alpha, e);
        return v;
    };
    if (reg.what == quantity::en) {
        if (B) {
            if (p < q) check_258();
            out.value = psi(std::pow(nn, 1.0 / d)) * std::pow(nn, e);
            out.branch = "B";
        } else if (prime_or_c) {
            out.value = via_mn(true);
            out.branch = "M'inf|Mc_inf";
        } else if (label == class_label::m_inf_second) {
            const auto m = level();
            const double Vm = double(lattice_count(d, reg.r, m)), Vm1 = double(lattice_count(d, reg.r, m - 1));
            auto [c337, falling] = detail::condition_337(psi, d, std::min(p, q), opt.T);
            out.checks.push_back("k^{(d-1)/a} psi(k+1)/psi(k) at T = " + std::to_string(c337));
            detail::need(d == 1 || (falling && c337 < 1e-3), "condition (3.37) fails on the window");
            const double psim = psi(double(m));
            if (p < q) {
                out.value = psim * std::pow(Vm - nn, 1.0 / p) * std::pow(nn, (1.0 - d) / (double(d) * q));
                out.branch = "M''inf:p<q";
            } else if (nn == Vm1) {
                out.value = psim;
                out.branch = "M''inf:n=V_{m-1}";
            } else if (q * (Vm - Vm1) >= p * (Vm - nn)) {
                out.value = psim * std::pow(Vm - nn, 1.0 / p) * std::pow(nn, (1.0 - d) / (double(d) * q));
                out.branch = "M''inf:q<=p,near";
            } else {
                out.value = psim * std::pow(nn - Vm1, e);
                out.branch = "M''inf:q<=p,far";
            }
        } else {
            detail::need(false, "psi^p has no recognised class");
        }
        return out;
    }
    // widths, p < q
    if (label == class_label::m_inf_second) {
        const auto m = level();
        const double Vm = double(lattice_count(d, reg.r, m));
        auto [c337, falling] = detail::condition_337(psi, d, p * q / (q - p), opt.T);
        out.checks.push_back("k^{(d-1)/a} psi(k+1)/psi(k) at T = " + std::to_string(c337));
        detail::need(d == 1 || (falling && c337 < 1e-3), "condition (3.37) fails on the window");
        out.value = psi(double(m)) * std::pow(Vm - nn, e);
        out.branch = "M''inf";
    } else if (B) {
        check_258();
        out.value = psi(std::pow(nn, 1.0 / d)) * std::pow(nn, e);
        out.branch = "B";
    } else if (prime_or_c) {
        out.value = via_mn(true);
        out.branch = "M'inf|Mc_inf";
    } else {
        detail::need(false, "psi^p has no recognised class");
    }
    return out;
}

struct ValueSeries {
    OrderRegime regime;
    std::vector<std::uint64_t> n;
    std::vector<double> value;
};

struct RatioReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::vector<double> ratios;
    bool bounded(double C = 10.0) const { return min_ratio >= 1.0 / C && max_ratio <= C; }
};

// Exact values from the extremal module on the system psi_1(k) (ellipsoid) or psi(|k|_r) (lattice class).
inline ValueSeries exact_values(const OrderRegime& reg, const DecayRule& rule, const std::vector<std::uint64_t>& ns,
                                std::uint64_t budget = 1u << 22)
{
    PsiSystem::options o;
    o.budget = budget;
    auto psi = reg.where == setting::ellipsoid ? PsiSystem::sequence(rule, o) : PsiSystem::radial(reg.d, reg.r, rule, o);
    ValueSeries s{reg, ns, {}};
    for (auto n : ns)
        s.value.push_back(reg.what == quantity::en ? nterm(psi, n, reg.p, reg.q).value : widths(psi, n, reg.p, reg.q, false).value);
    return s;
}

inline ValueSeries order_values(const OrderRegime& reg, const ConvexDecayFunction& psi,
                                const std::vector<std::uint64_t>& ns, const OrderOptions& opt = {})
{
    ValueSeries s{reg, ns, {}};
    for (auto n : ns) s.value.push_back(order_formula(reg, psi, n, opt).value);
    return s;
}

inline RatioReport ratio_validation(const ValueSeries& exact, const ValueSeries& order)
{
    if (!(exact.regime == order.regime)) fail(errc::regime_mismatch, "exact and order values use different regimes");
    if (exact.n != order.n || exact.value.size() != exact.n.size() || order.value.size() != order.n.size())
        fail(errc::regime_mismatch, "exact and order values cover different n ranges");
    if (exact.n.empty()) fail(errc::parameter_out_of_range, "empty n range");
    RatioReport r;
    r.min_ratio = inf;
    r.max_ratio = 0.0;
    for (std::size_t i = 0; i < exact.n.size(); ++i) {
        double x = exact.value[i] / order.value[i];
        r.ratios.push_back(x);
        r.min_ratio = std::min(r.min_ratio, x);
        r.max_ratio = std::max(r.max_ratio, x);
    }
    return r;
}

// Geometric sample of integers in [a, b], deduplicated.
inline std::vector<std::uint64_t> n_sample(std::uint64_t a, std::uint64_t b, std::size_t points)
{
    std::vector<std::uint64_t> v;
    for (std::size_t i = 0; i < points; ++i) {
        double x = double(a) * std::pow(double(b) / double(a), points > 1 ? double(i) / double(points - 1) : 0.0);
        v.push_back(std::uint64_t(std::llround(x)));
    }
    v.push_back(b);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace spapprox

#endif // SPAPPROX_FUNC_CLASSES_HPP
