#ifndef SPAPPROX_IDENTITIES_HPP
#define SPAPPROX_IDENTITIES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include "spapprox/lattice.hpp"
#include "spapprox/psi_system.hpp"
#include "spapprox/sp_space.hpp"

namespace spapprox {

// E^Delta_n(f)^p: p-th power of the error of the best triangular polynomial of order n - 1.
inline double triangular_error_pow(const SpElement& f, std::int64_t n, double p)
{
    compensated_sum s;
    for (auto& [k, c] : f)
        if (k.norm1() >= n) s.add(std::pow(std::abs(c), p));
    return s.value();
}

inline double triangular_error(const SpElement& f, std::int64_t n, double p)
{
    return std::pow(triangular_error_pow(f, n, p), 1.0 / p);
}

namespace detail {

// p-th power masses of f per level of psi (0-based), plus the first level past the support.
struct LevelMasses {
    std::vector<double> eps;     // eps[i] = value of level i
    std::vector<double> mass;    // sum of |f^(k)|^p over k in level i
    double outside = 0.0;        // mass on indices where psi vanishes
};

inline LevelMasses level_masses(const SpElement& f, const PsiSystem& psi, double p)
{
    Profile prof(psi);
    LevelMasses lm;
    std::vector<compensated_sum> acc;
    compensated_sum out;
    for (auto& [k, c] : f) {
        double m = psi.modulus(k);
        double w = std::pow(std::abs(c), p);
        if (m == 0.0) {
            out.add(w);
            continue;
        }
        std::size_t i = prof.find_value(m);
        if (i == std::size_t(-1)) fail(errc::invalid_descriptor, "index " + k.str() + " not found among levels");
        if (acc.size() <= i) acc.resize(i + 1);
        acc[i].add(w);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
        lm.eps.push_back(prof.level(i).value);
        lm.mass.push_back(acc[i].value());
    }
    lm.outside = out.value();
    return lm;
}

// E_k^p with k 1-based: mass outside g_{k-1}, i.e. on levels >= k - 1.
inline std::vector<double> tail_masses(const LevelMasses& lm)
{
    std::vector<double> e(lm.mass.size() + 1, 0.0);
    compensated_sum s;
    s.add(lm.outside);
    e[lm.mass.size()] = s.value();
    for (std::size_t i = lm.mass.size(); i-- > 0;) {
        s.add(lm.mass[i]);
        e[i] = s.value();
    }
    return e;   // e[k-1] = E_k^p
}

inline double eps_at(const LevelMasses& lm, Profile& prof, std::size_t k)
{
    if (k <= lm.eps.size()) return lm.eps[k - 1];
    return prof.ensure_levels(k) ? prof.level(k - 1).value : 0.0;
}

} // namespace detail

struct IdentityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;      // |lhs - rhs| / max(lhs, rhs), 0 when both vanish
    double series = 0.0;        // convergent series of the identity
    // Triangular comparison E^Delta_n(f) <= eps_n E^Delta_n(f^psi), eps_n = max_{|k|_1 >= n} |psi(k)|
    double tri_lhs = 0.0;
    double tri_rhs = 0.0;
    bool tri_holds = true;
};

namespace detail {

inline double relative_residual(double a, double b)
{
    double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// max |psi(k)| over |k|_1 >= n, walking levels in decreasing order.
inline double max_modulus_beyond(const PsiSystem& psi, std::int64_t n)
{
    IndexCursor cur(psi);
    IndexLevel lv;
    while (cur.next(lv))
        for (auto& k : lv.indices)
            if (k.norm1() >= n) return lv.value;
    return 0.0;
}

} // namespace detail

// E_n^p(f) = eps_n^p E_n^p(f^psi) + sum_{k>n} (eps_k^p - eps_{k-1}^p) E_k^p(f^psi)
inline IdentityResult direct_identity_residual(const SpElement& f, const PsiSystem& psi, double p, std::size_t n)
{
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (!(p > 0)) fail(errc::parameter_out_of_range, "p must be positive");
    IdentityResult r;
    if (f.empty()) return r;
    SpElement fd = psi_transform(f, psi, direction::differentiate).element;
    auto lm = detail::level_masses(f, psi, p);
    auto lmd = detail::level_masses(fd, psi, p);
    auto E = detail::tail_masses(lm);
    auto Ed = detail::tail_masses(lmd);
    Profile prof(psi);
    auto eps = [&](std::size_t k) { return detail::eps_at(lmd, prof, k); };
    auto Ek = [](const std::vector<double>& v, std::size_t k) { return k - 1 < v.size() ? v[k - 1] : v.back(); };
    const std::size_t K = lmd.mass.size();
    r.lhs = Ek(E, n);
    compensated_sum rhs, series;
    rhs.add(std::pow(eps(n), p) * Ek(Ed, n));
    for (std::size_t k = 1; k <= K; ++k) {
        double term = (std::pow(eps(k), p) - (k == 1 ? 0.0 : std::pow(eps(k - 1), p))) * Ek(Ed, k);
        series.add(term);
        if (k > n) rhs.add(term);
    }
    r.rhs = rhs.value();
    r.series = series.value();
    r.residual = detail::relative_residual(r.lhs, r.rhs);

    const auto tn = std::int64_t(n);
    r.tri_lhs = triangular_error(f, tn, p);
    r.tri_rhs = detail::max_modulus_beyond(psi, tn) * triangular_error(fd, tn, p);
    r.tri_holds = r.tri_lhs <= r.tri_rhs * (1.0 + 1e-12);
    return r;
}

// E_n^p(f^psi) = eps_n^{-p} E_n^p(f) + sum_{k>n} (eps_k^{-p} - eps_{k-1}^{-p}) E_k^p(f)
inline IdentityResult inverse_identity_check(const SpElement& f, const PsiSystem& psi, double p, std::size_t n)
{
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (!(p > 0)) fail(errc::parameter_out_of_range, "p must be positive");
    IdentityResult r;
    if (f.empty()) return r;
    SpElement fd = psi_transform(f, psi, direction::differentiate).element;
    auto lm = detail::level_masses(f, psi, p);
    auto E = detail::tail_masses(lm);
    auto Ed = detail::tail_masses(detail::level_masses(fd, psi, p));
    Profile prof(psi);
    auto eps = [&](std::size_t k) { return detail::eps_at(lm, prof, k); };
    auto Ek = [](const std::vector<double>& v, std::size_t k) { return k - 1 < v.size() ? v[k - 1] : v.back(); };
    const std::size_t K = lm.mass.size();
    r.lhs = Ek(Ed, n);
    compensated_sum rhs, series;
    rhs.add(std::pow(eps(n), -p) * Ek(E, n));
    for (std::size_t k = 2; k <= K; ++k) {
        double term = (std::pow(eps(k), -p) - std::pow(eps(k - 1), -p)) * Ek(E, k);
        series.add(term);
        if (k > n) rhs.add(term);
    }
    r.rhs = rhs.value();
    r.series = series.value();
    r.residual = detail::relative_residual(r.lhs, r.rhs);
    return r;
}

enum class shift_kind { diagonal, euclidean };

struct ModulusQuery {
    double alpha = 1.0;
    double t = 0.0;
    double p = 2.0;
    int resolution = 64;
    shift_kind shift = shift_kind::diagonal;
};

namespace detail {

inline void check_query(const ModulusQuery& q)
{
    if (!(q.alpha > 0) || !std::isfinite(q.alpha)) fail(errc::parameter_out_of_range, "alpha must be positive");
    if (!(q.t >= 0) || !std::isfinite(q.t)) fail(errc::parameter_out_of_range, "t must be finite and >= 0");
    if (!(q.p > 0)) fail(errc::parameter_out_of_range, "p must be positive");
    if (q.resolution < 8) fail(errc::parameter_out_of_range, "resolution must be at least 8");
}

inline double diagonal_modulus_pow(const SpElement& f, const ModulusQuery& q)
{
    std::vector<std::pair<std::int64_t, double>> terms;
    std::int64_t S = 0, g = 0;
    for (auto& [k, c] : f) {
        std::int64_t s = std::abs(k.coord_sum());
        if (s == 0) continue;
        terms.emplace_back(s, std::pow(std::abs(c), q.p));
        S = std::max(S, s);
        g = std::gcd(g, s);
    }
    if (terms.empty() || q.t == 0.0) return 0.0;
    const double ap = q.alpha * q.p;
    auto F = [&](double h) {
        compensated_sum acc;
        for (auto& [s, w] : terms) acc.add(w * std::pow(std::abs(2.0 * std::sin(0.5 * h * double(s))), ap));
        return acc.value();
    };
    const double T = std::min(q.t, 2.0 * pi / double(g));
    const auto N = std::int64_t(std::max<double>(q.resolution, std::ceil(q.resolution * double(S) * T / (2.0 * pi))));
    std::vector<double> v(std::size_t(N) + 1);
    for (std::int64_t i = 0; i <= N; ++i) v[std::size_t(i)] = F(i == N ? T : T * double(i) / double(N));
    std::vector<std::int64_t> peaks;
    for (std::int64_t i = 0; i <= N; ++i) {
        bool left = i == 0 || v[std::size_t(i)] >= v[std::size_t(i - 1)];
        bool right = i == N || v[std::size_t(i)] >= v[std::size_t(i + 1)];
        if (left && right) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) {
        return v[std::size_t(a)] != v[std::size_t(b)] ? v[std::size_t(a)] > v[std::size_t(b)] : a < b;
    });
    if (peaks.size() > 16) peaks.resize(16);
    double best = *std::max_element(v.begin(), v.end());
    for (auto i : peaks) {
        double lo = T * double(std::max<std::int64_t>(i - 1, 0)) / double(N);
        double hi = i + 1 >= N ? T : T * double(i + 1) / double(N);
        auto res = boost::math::tools::brent_find_minima([&](double h) { return -F(h); }, lo, hi, 52);
        best = std::max(best, -res.second);
    }
    return best;
}

inline double radical_inverse(std::uint64_t i, std::uint64_t base)
{
    double f = 1.0, r = 0.0;
    while (i) {
        f /= double(base);
        r += f * double(i % base);
        i /= base;
    }
    return r;
}

inline double euclidean_modulus_pow(const SpElement& f, const ModulusQuery& q)
{
    const int d = f.dim();
    std::vector<std::pair<Index, double>> terms;
    for (auto& [k, c] : f)
        if (k.norm1() != 0) terms.emplace_back(k, std::pow(std::abs(c), q.p));
    if (terms.empty() || q.t == 0.0) return 0.0;
    const double ap = q.alpha * q.p;
    auto F = [&](const std::vector<double>& h) {
        compensated_sum acc;
        for (auto& [k, w] : terms) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += double(k[j]) * h[std::size_t(j)];
            acc.add(w * std::pow(std::abs(2.0 * std::sin(0.5 * s)), ap));
        }
        return acc.value();
    };
    auto project = [&](std::vector<double>& h) {
        double n2 = 0.0;
        for (double x : h) n2 += x * x;
        if (n2 > q.t * q.t) {
            double s = q.t / std::sqrt(n2);
            for (double& x : h) x *= s;
        }
    };
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23};
    const std::uint64_t count = std::uint64_t(std::min(std::pow(double(q.resolution), d), 65536.0));
    std::vector<double> best_h(std::size_t(d), 0.0);
    double best = 0.0;
    std::vector<double> h(static_cast<std::size_t>(d));
    for (std::uint64_t i = 1; i <= count; ++i) {
        // Halton point in the cube, radially mapped into the ball
        double linf = 0.0, l2 = 0.0;
        for (int j = 0; j < d; ++j) {
            h[std::size_t(j)] = 2.0 * radical_inverse(i, primes[j]) - 1.0;
            linf = std::max(linf, std::abs(h[std::size_t(j)]));
            l2 += h[std::size_t(j)] * h[std::size_t(j)];
        }
        if (l2 == 0.0) continue;
        double s = q.t * linf / std::sqrt(l2);
        for (double& x : h) x *= s;
        double v = F(h);
        if (v > best) {
            best = v;
            best_h = h;
        }
    }
    double step = q.t / double(q.resolution);
    for (int round = 0; round < 4; ++round) {
        for (int it = 0; it < 200; ++it) {
            bool moved = false;
            for (int j = 0; j < d; ++j)
                for (double sgn : {1.0, -1.0}) {
                    auto c = best_h;
                    c[std::size_t(j)] += sgn * step;
                    project(c);
                    double v = F(c);
                    if (v > best) {
                        best = v;
                        best_h = c;
                        moved = true;
                    }
                }
            if (!moved) break;
        }
        step /= 8.0;
    }
    return best;
}

} // namespace detail

// sup over admissible shifts of ||Delta_h^alpha f||_{S^p}
inline double smoothness_modulus(const SpElement& f, const ModulusQuery& q)
{
    detail::check_query(q);
    double s = (q.shift == shift_kind::diagonal || f.dim() == 1) ? detail::diagonal_modulus_pow(f, q)
                                                                 : detail::euclidean_modulus_pow(f, q);
    return std::pow(s, 1.0 / q.p);
}

struct BernsteinResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double eps = 0.0;       // min_{0 < |k|_1 <= n} |psi(k)|
    bool holds = true;
};

inline BernsteinResult bernstein_check(const SpElement& tau, const PsiSystem& psi, double p, std::int64_t n)
{
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (tau.max_norm1() > n) fail(errc::support_violation, "polynomial has frequencies outside |k|_1 <= n");
    BernsteinResult b;
    b.eps = inf;
    auto tri = IndexSet::triangular(psi.dim(), n);
    for (auto& k : tri.members(psi.budget()))
        if (k.norm1() > 0 && (psi.kind() != mode::sequence || k[0] > 0)) b.eps = std::min(b.eps, psi.modulus(k));
    if (b.eps == 0.0) fail(errc::zero_divisor, "psi vanishes on the triangle");
    auto zero = IndexSet::of(psi.dim(), {Index(psi.dim())});
    auto d = psi_transform(tau, psi, direction::differentiate, &zero).element;
    b.lhs = sp_norm(d, p);
    b.rhs = sp_norm(tau, p) / b.eps;
    b.holds = b.lhs <= b.rhs + 1e-12;
    return b;
}

struct InverseBoundResult {
    double lhs = 0.0;
    double rhs_exact = 0.0;
    double rhs_relaxed = 0.0;
    bool holds_exact = true;    // lhs <= rhs_exact
    bool holds_relaxed = true;  // lhs <= rhs_relaxed
    bool ordered = true;        // rhs_exact <= rhs_relaxed, guaranteed only when alpha p >= 1
    bool holds = true;          // lhs <= rhs_exact <= rhs_relaxed
};

inline InverseBoundResult inverse_bound_check(const SpElement& f, double alpha, double p, std::int64_t n,
                                              int resolution = 64, shift_kind shift = shift_kind::diagonal)
{
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (p < 1.0) fail(errc::parameter_out_of_range, "p must be at least 1");
    InverseBoundResult r;
    r.lhs = smoothness_modulus(f, {alpha, pi / double(n), p, resolution, shift});
    const double ap = alpha * p;
    compensated_sum ex, rel;
    for (std::int64_t nu = 1; nu <= n; ++nu) {
        double e = triangular_error_pow(f, nu, p);
        if (e == 0.0) break;
        ex.add((std::pow(double(nu), ap) - std::pow(double(nu - 1), ap)) * e);
        rel.add(std::pow(double(nu), ap - 1.0) * e);
    }
    const double c = std::pow(pi, alpha) / std::pow(double(n), alpha);
    r.rhs_exact = c * std::pow(ex.value(), 1.0 / p);
    r.rhs_relaxed = c * std::pow(ap, 1.0 / p) * std::pow(rel.value(), 1.0 / p);
    const double slack = 1.0 + 1e-12;
    r.holds_exact = r.lhs <= r.rhs_exact * slack;
    r.holds_relaxed = r.lhs <= r.rhs_relaxed * slack;
    r.ordered = r.rhs_exact <= r.rhs_relaxed * slack;
    r.holds = r.holds_exact && r.ordered;
    return r;
}

// Majorant on [0, 1]: continuous, non-decreasing, positive on (0, 1], vanishing at 0+.
class Majorant {
public:
    struct Flags {
        bool continuous = false;
        bool nondecreasing = false;
        bool positive = false;
        bool vanishes_at_zero = false;
    };

    Majorant(std::function<double(double)> omega, std::string name, int grid = 4096)
        : omega_(std::move(omega)), name_(std::move(name))
    {
        std::vector<double> xs, vs;
        for (int i = 0; i <= grid; ++i) xs.push_back(double(i) / grid);
        for (int e = 4; e <= 12; ++e) xs.push_back(std::pow(10.0, -e));
        std::sort(xs.begin(), xs.end());
        for (double x : xs) vs.push_back(omega_(x));
        flags_.nondecreasing = true;
        flags_.positive = true;
        flags_.continuous = true;
        const double top = omega_(1.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(vs[i])) flags_.continuous = false;
            if (i > 0 && vs[i] < vs[i - 1] * (1.0 - 1e-12)) flags_.nondecreasing = false;
            if (xs[i] > 0 && !(vs[i] > 0)) flags_.positive = false;
            if (i > 0 && xs[i] - xs[i - 1] <= 1.0 / grid && std::abs(vs[i] - vs[i - 1]) > 0.05 * std::abs(top))
                flags_.continuous = false;
        }
        flags_.vanishes_at_zero = std::abs(omega_(1e-12)) <= 1e-3 * std::abs(top) && std::abs(vs.front()) <= 1e-12 * std::abs(top);
        if (!(flags_.continuous && flags_.nondecreasing && flags_.positive && flags_.vanishes_at_zero))
            fail(errc::invalid_descriptor, "omega = " + name_ + " is not an admissible majorant");
    }

    static Majorant power(double r)
    {
        if (!(r > 0)) fail(errc::parameter_out_of_range, "majorant exponent must be positive");
        return Majorant([r](double t) { return std::pow(t, r); }, "t^" + std::to_string(r));
    }

    double operator()(double t) const { return omega_(t); }
    const std::string& name() const { return name_; }
    const Flags& flags() const { return flags_; }

private:
    std::function<double(double)> omega_;
    std::string name_;
    Flags flags_;
};

enum class verdict { holds, borderline, fails };

inline const char* verdict_name(verdict v)
{
    switch (v) {
    case verdict::holds: return "holds";
    case verdict::borderline: return "borderline";
    case verdict::fails: return "fails";
    }
    return "?";
}

struct RatioTrend {
    std::vector<std::uint64_t> n;       // decade checkpoints
    std::vector<double> ratio;          // running maximum of the ratio up to n
    verdict result = verdict::holds;
};

struct BariReport {
    RatioTrend b_alpha;
    RatioTrend b;
    std::optional<RatioTrend> profile;  // E_n / omega(1/n)
};

namespace detail {

// Bounded if decade increments of the running maximum vanish or shrink geometrically.
inline verdict classify_trend(const std::vector<double>& m)
{
    if (m.size() < 3) return verdict::holds;
    double d1 = m[m.size() - 2] - m[m.size() - 3];
    double d2 = m.back() - m[m.size() - 2];
    if (d2 <= 0.005 * m.back()) return verdict::holds;
    if (d1 <= 0.0) return verdict::fails;
    double q = d2 / d1;
    if (q <= 0.85) return verdict::holds;
    if (q <= 1.15) return verdict::borderline;
    return verdict::fails;
}

inline RatioTrend trend(const std::vector<double>& ratio, std::uint64_t N)
{
    RatioTrend t;
    double run = 0.0;
    std::uint64_t next = 10;
    for (std::uint64_t n = 1; n <= N; ++n) {
        run = std::max(run, ratio[n - 1]);
        if (n == next || n == N) {
            t.n.push_back(n);
            t.ratio.push_back(run);
            if (n == next) next *= 10;
        }
    }
    t.result = classify_trend(t.ratio);
    return t;
}

} // namespace detail

// Ratios defining (B_alpha), (B) and, when a profile E_n is given, E_n / omega(1/n), for n <= N.
inline BariReport bari_and_class_check(const Majorant& omega, double alpha, std::uint64_t N,
                                       const std::function<double(std::uint64_t)>& profile = {})
{
    if (!(alpha > 0)) fail(errc::parameter_out_of_range, "alpha must be positive");
    if (N < 10) fail(errc::parameter_out_of_range, "N must be at least 10");
    std::vector<double> ra(N), rb(N);
    compensated_sum head;
    for (std::uint64_t v = 1; v <= N; ++v) {
        head.add(std::pow(double(v), alpha - 1.0) * omega(1.0 / double(v)));
        ra[v - 1] = head.value() / (std::pow(double(v), alpha) * omega(1.0 / double(v)));
    }
    // sum_{v>n} omega(1/v)/v: explicit to M, integral tail int_0^{1/M} omega(u)/u du beyond.
    const std::uint64_t M = 64 * N;
    double tail_int;
    try {
        boost::math::quadrature::tanh_sinh<double> ts;
        tail_int = ts.integrate([&](double u) { return u > 0 ? omega(u) / u : 0.0; }, 0.0, 1.0 / (double(M) + 0.5));
    } catch (const std::exception&) {
        tail_int = inf;
    }
    std::vector<double> tail(M + 2, 0.0);
    compensated_sum acc;
    acc.add(tail_int);
    for (std::uint64_t v = M; v >= 1; --v) {
        tail[v] = acc.value();   // sum over w > v
        acc.add(omega(1.0 / double(v)) / double(v));
    }
    for (std::uint64_t n = 1; n <= N; ++n) rb[n - 1] = tail[n] / omega(1.0 / double(n));
    BariReport rep;
    rep.b_alpha = detail::trend(ra, N);
    rep.b = detail::trend(rb, N);
    if (!std::isfinite(tail_int)) rep.b.result = verdict::fails;
    if (profile) {
        std::vector<double> rp(N);
        for (std::uint64_t n = 1; n <= N; ++n) rp[n - 1] = profile(n) / omega(1.0 / double(n));
        rep.profile = detail::trend(rp, N);
    }
    return rep;
}

} // namespace spapprox

#endif // SPAPPROX_IDENTITIES_HPP
