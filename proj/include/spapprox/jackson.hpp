#ifndef SPAPPROX_JACKSON_HPP
#define SPAPPROX_JACKSON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "spapprox/identities.hpp"
#include "spapprox/sp_space.hpp"

namespace spapprox {

constexpr double quad_tol = 1e-10;

// Finite atomic measure on [0, tau]. With grid > 0 every position is pi * j / grid exactly.
class DiscreteMeasure {
public:
    struct Atom {
        double t;
        double w;
        std::int64_t j = -1;    // grid numerator when on the pi/grid lattice
    };

    static DiscreteMeasure of(double tau, std::vector<std::pair<double, double>> atoms)
    {
        DiscreteMeasure m;
        m.tau_ = tau;
        for (auto& [t, w] : atoms) m.atoms_.push_back({t, w});
        m.validate();
        return m;
    }

    static DiscreteMeasure on_grid(double tau, std::int64_t grid, std::vector<std::pair<std::int64_t, double>> atoms)
    {
        if (grid < 1) fail(errc::parameter_out_of_range, "grid must be positive");
        DiscreteMeasure m;
        m.tau_ = tau;
        m.grid_ = grid;
        for (auto& [j, w] : atoms) m.atoms_.push_back({pi * double(j) / double(grid), w, j});
        m.validate();
        return m;
    }

    double tau() const { return tau_; }
    std::int64_t grid() const { return grid_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    double mass() const
    {
        compensated_sum s;
        for (auto& a : atoms_) s.add(a.w);
        return s.value();
    }

private:
    void validate()
    {
        if (!(tau_ > 0) || !std::isfinite(tau_)) fail(errc::parameter_out_of_range, "tau must be positive");
        std::sort(atoms_.begin(), atoms_.end(), [](auto& a, auto& b) { return a.t < b.t; });
        bool interior = false;
        for (auto& a : atoms_) {
            if (!(a.w > 0)) fail(errc::invalid_descriptor, "atom weights must be positive");
            if (a.t < 0 || a.t > tau_ * (1 + 1e-15)) fail(errc::invalid_descriptor, "atom outside [0, tau]");
            if (a.t > 0) interior = true;
        }
        if (!interior) fail(errc::invalid_descriptor, "measure needs an atom in (0, tau]");
    }

    double tau_ = pi;
    std::int64_t grid_ = 0;
    std::vector<Atom> atoms_;
};

// Mean of (1 - cos x)^lambda over a period.
inline double oscillation_mean(double lambda)
{
    if (lambda == std::floor(lambda) && lambda >= 0 && lambda <= 25)
        return binomial(2 * std::int64_t(lambda), std::int64_t(lambda)) / std::pow(2.0, lambda);
    return std::pow(2.0, lambda) * boost::math::tgamma_ratio(lambda + 0.5, lambda + 1.0) / std::sqrt(pi);
}

struct InResult {
    double value = 0.0;
    std::optional<std::int64_t> nu;     // minimizing nu, empty when the limit candidate wins
    double quad_error = 0.0;
    bool certified = true;              // false when the nu scan cannot cover all nu >= n
};

namespace detail {

inline bool is_integer(double x) { return x == std::floor(x); }

// int_0^tau (1 - cos(c t))^lambda sin(pi t / tau) dt. With u = c t - 2 pi j the full periods collapse:
// sum_{j<m} sin(k (2 pi j + u) / c), k = pi / tau, is a geometric sum in closed form.
inline std::pair<double, double> sine_measure_integral(double c, double lambda, double tau)
{
    const double k = pi / tau;
    const double d = 2.0 * pi * k / c;
    const auto m = static_cast<std::int64_t>(std::floor(c * tau / (2.0 * pi)));
    const double R = c * tau - 2.0 * pi * double(m);
    auto w = [&](double u) { return std::pow(1.0 - std::cos(u), lambda); };
    auto G = [&](double u) {
        const double sd = std::sin(0.5 * d);
        if (std::abs(sd) < 1e-8) {
            compensated_sum s;
            for (std::int64_t j = 0; j < m; ++j) s.add(std::sin(k * (2.0 * pi * double(j) + u) / c));
            return s.value();
        }
        return std::sin(0.5 * double(m) * d) / sd * std::sin(k * u / c + 0.5 * double(m - 1) * d);
    };
    auto full = [&](double u) { return w(u) * G(u); };
    auto part = [&](double u) { return w(u) * std::sin(k * (2.0 * pi * double(m) + u) / c); };
    double v = 0.0, err = 0.0;
    auto add = [&](auto&& f, double a, double b) {
        if (b - a <= 1e-12) return;
        double e = 0.0, L1 = 0.0;
        if (is_integer(lambda)) {
            v += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 3, 1e-10, &e);
        } else {
            static thread_local boost::math::quadrature::tanh_sinh<double> ts;
            v += ts.integrate([&](double x) { return f(a + x); }, 0.0, b - a, 1e-13, &e, &L1);
        }
        err += e;
    };
    if (m > 0) {
        add(full, 0.0, pi);
        add(full, pi, 2.0 * pi);
    }
    add(part, 0.0, std::min(R, pi));
    add(part, pi, R);
    return {v / c, err / c};
}

struct SineCache {
    std::mutex mu;
    std::map<std::tuple<double, double, std::int64_t, std::int64_t>, std::pair<double, double>> memo;
};

inline SineCache& sine_cache()
{
    static SineCache c;
    return c;
}

// J(nu / n) memoized by the reduced fraction.
inline std::pair<double, double> sine_J(std::int64_t nu, std::int64_t n, double lambda, double tau)
{
    std::int64_t g = std::gcd(nu, n);
    auto key = std::make_tuple(lambda, tau, nu / g, n / g);
    auto& c = sine_cache();
    {
        std::lock_guard<std::mutex> lk(c.mu);
        auto it = c.memo.find(key);
        if (it != c.memo.end()) return it->second;
    }
    auto r = sine_measure_integral(double(nu / g) / double(n / g), lambda, tau);
    std::lock_guard<std::mutex> lk(c.mu);
    c.memo.emplace(key, r);
    return r;
}

inline void check_in_args(std::int64_t n, double lambda)
{
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (!(lambda > 0) || !std::isfinite(lambda)) fail(errc::parameter_out_of_range, "lambda must be positive");
}

} // namespace detail

constexpr std::int64_t nu_scan_factor = 64;

// inf_{nu >= n} int_0^tau (1 - cos(nu t / n))^lambda sin(pi t / tau) dt; tau = pi gives the sin t dt measure.
inline InResult In_integral_sine(std::int64_t n, double lambda, double tau = pi)
{
    detail::check_in_args(n, lambda);
    if (!(tau > 0) || !std::isfinite(tau)) fail(errc::parameter_out_of_range, "tau must be positive");
    InResult r;
    r.value = oscillation_mean(lambda) * 2.0 * tau / pi;
    for (std::int64_t nu = n; nu <= nu_scan_factor * n; ++nu) {
        auto [v, e] = detail::sine_J(nu, n, lambda, tau);
        if (e > quad_tol) fail(errc::quadrature_failure, "quadrature error estimate " + std::to_string(e));
        // improvements below the error estimate (floored at rounding level) are not resolved
        if (v < r.value - std::max(e, 64.0 * std::numeric_limits<double>::epsilon() * r.value)) {
            r.value = v;
            r.nu = nu;
            r.quad_error = e;
        }
    }
    return r;
}

// Same infimum for an atomic measure; exact over one period when the atoms lie on the pi/grid lattice.
inline InResult In_integral_discrete(std::int64_t n, double lambda, const DiscreteMeasure& mu)
{
    detail::check_in_args(n, lambda);
    InResult r;
    if (mu.grid() > 0) {
        const std::int64_t P = 2 * mu.grid() * n;
        std::vector<double> table(static_cast<std::size_t>(P), 0.0);
        for (std::int64_t i = 0; i < P; ++i)
            table[std::size_t(i)] = std::pow(1.0 - std::cos(pi * double(i) / double(mu.grid() * n)), lambda);
        r.value = inf;
        for (std::int64_t nu = n; nu < n + P; ++nu) {
            compensated_sum s;
            for (auto& a : mu.atoms()) s.add(a.w * table[std::size_t((nu * a.j) % P)]);
            if (s.value() < r.value) {
                r.value = s.value();
                r.nu = nu;
            }
        }
        return r;
    }
    r.certified = false;
    r.value = oscillation_mean(lambda) * mu.mass();
    for (std::int64_t nu = n; nu <= nu_scan_factor * n; ++nu) {
        compensated_sum s;
        for (auto& a : mu.atoms()) s.add(a.w * std::pow(1.0 - std::cos(double(nu) * a.t / double(n)), lambda));
        if (s.value() < r.value) {
            r.value = s.value();
            r.nu = nu;
        }
    }
    return r;
}

struct SigmaResult {
    double value = 0.0;
    double error = 0.0;
    std::uint64_t terms = 0;
};

namespace detail {

// m-th term of the sigma series (sign included), inner sum truncated where the binomial weights vanish.
inline double sigma_term(double lambda, std::int64_t m, int floor_parity)
{
    const double lb = boost::math::lgamma(lambda + 1.0);
    // C(lambda, 2m) = Gamma(lambda+1) / (Gamma(2m+1) Gamma(lambda-2m+1)), sign from the reflection
    double lg2 = 0.0;
    int sg = 0;
    lg2 = boost::math::lgamma(lambda - 2.0 * double(m) + 1.0, &sg);
    const double log_c = lb - boost::math::lgamma(2.0 * double(m) + 1.0) - lg2;
    const double c_sign = sg;
    // weights w_j = C(2m, j) / 4^m, starting from the centre
    const double log_u = boost::math::lgamma(2.0 * double(m) + 1.0) - 2.0 * boost::math::lgamma(double(m) + 1.0) -
                         2.0 * double(m) * std::log(2.0);
    const double u = std::exp(log_u);
    compensated_sum inner;
    double w = u;
    for (std::int64_t j = m - 1; j >= 0; --j) {
        w *= double(j + 1) / double(2 * m - j);
        double l = double(m - j);
        double t = w * 2.0 / (2.0 * l * l - 1.0);
        inner.add(t);
        if (t < 1e-20 * std::abs(inner.value()) && double(m - j) * double(m - j) > 40.0 * double(m)) break;
    }
    // (1 - (-1)^floor(lambda) C(2m, m)) / 2 scaled by 2^{-(2m-1)} = 4^{-m} * 2
    const double head = std::exp(-2.0 * double(m) * std::log(2.0)) - double(floor_parity) * u;
    const double bracket = head - 2.0 * inner.value();
    return -c_sign * std::exp(log_c) * bracket;
}

// Hurwitz zeta sum_{k>=0} (a+k)^{-s}, s > 1, by Euler-Maclaurin after 16 explicit terms.
inline double hurwitz_zeta(double s, double a)
{
    compensated_sum acc;
    const int N = 16;
    for (int k = 0; k < N; ++k) acc.add(std::pow(a + k, -s));
    const double x = a + N;
    acc.add(std::pow(x, 1.0 - s) / (s - 1.0));
    acc.add(0.5 * std::pow(x, -s));
    static constexpr double B[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0};
    double fact = 1.0, rising = s;
    for (int j = 1; j <= 5; ++j) {
        fact *= double(2 * j) * double(2 * j - 1);
        acc.add(B[j - 1] / fact * rising * std::pow(x, -s - 2.0 * j + 1.0));
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    }
    return acc.value();
}

} // namespace detail

// Literal series below the Jackson constant bound; exact zero for integer lambda.
// Terms behave like m^{-lambda-3/2} (c0 + c1 m^{-1/2} + ...); the tail is fitted in that basis.
inline SigmaResult sigma_series(double lambda, double rtol = 1e-10, std::int64_t max_terms = 1 << 15)
{
    if (!(lambda > 0) || !std::isfinite(lambda)) fail(errc::parameter_out_of_range, "lambda must be positive");
    SigmaResult r;
    if (detail::is_integer(lambda)) return r;
    const int parity = (static_cast<std::int64_t>(std::floor(lambda)) % 2 == 0) ? 1 : -1;
    const auto m0 = static_cast<std::int64_t>(std::ceil(lambda / 2.0)) + 1;
    const double s = lambda + 1.5;
    compensated_sum head;
    std::vector<double> terms;
    std::int64_t M = m0;
    for (std::int64_t target = 4096; ; target *= 2) {
        for (; M < m0 + target && M < m0 + max_terms; ++M) {
            double t = detail::sigma_term(lambda, M, parity);
            terms.push_back(t);
            head.add(t);
        }
        // fit t_m m^s = sum_k c_k m^{-k/2} over the last quarter, with K and K+1 basis functions
        auto tail_fit = [&](int K) {
            const std::size_t N = terms.size(), from = N - N / 4;
            const std::size_t rows = 64;
            Eigen::MatrixXd A(rows, K);
            Eigen::VectorXd b(rows);
            for (std::size_t i = 0; i < rows; ++i) {
                std::size_t idx = from + (N - 1 - from) * i / (rows - 1);
                double m = double(m0 + std::int64_t(idx));
                for (int k = 0; k < K; ++k) A(Eigen::Index(i), k) = std::pow(m, -0.5 * k);
                b(Eigen::Index(i)) = terms[idx] * std::pow(m, s);
            }
            Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
            double tail = 0.0;
            for (int k = 0; k < K; ++k) tail += c(k) * detail::hurwitz_zeta(s + 0.5 * k, double(M));
            return tail;
        };
        double t4 = tail_fit(4), t5 = tail_fit(5);
        r.value = head.value() + t5;
        r.error = std::abs(t5 - t4);
        r.terms = std::uint64_t(M - m0);
        if (r.error <= rtol * std::abs(r.value)) return r;
        if (M >= m0 + max_terms) break;
    }
    fail(errc::slow_convergence, "sigma series did not reach tolerance within the term budget");
}

struct JacksonReport {
    double lambda = 0.0;                // alpha p / 2
    double lhs = 0.0;                   // E^Delta_n(f)^p
    double In = 0.0;
    double rhs_integral = 0.0;               // (2^lambda I_n)^{-1} int_0^pi omega(f, t/n)^p sin t dt
    double omega_pi_n = 0.0;            // omega_alpha(f, pi/n)
    double const_In = 0.0;             // 1 / (2^{lambda-1} I_n)
    std::optional<double> sigma;        // informational
    std::optional<double> const_sigma;
    std::optional<double> const_integer;    // (lambda+1)/2^{2 lambda} for integer lambda
    double bound_simple = 0.0;             // 4 / (3 2^{alpha/2}) omega(f, pi/n)
    bool holds_integral = true;
    bool holds_In = true;
    bool holds_integer = true;
    bool holds_simple = true;
    bool sigma_bound_holds = true;      // const_In <= const_sigma, not gated
    bool all() const { return holds_integral && holds_In && holds_integer && holds_simple; }
};

namespace detail {

inline bool in_Y(const SpElement& f)
{
    bool nonneg = true, nonpos = true;
    for (auto& [k, c] : f)
        for (int j = 0; j < k.dim(); ++j) {
            if (k[j] < 0) nonneg = false;
            if (k[j] > 0) nonpos = false;
        }
    return nonneg || nonpos;
}

// omega_alpha(f, h)^p as a function of h on [0, H], diagonal shift: F(h) and its interior maxima.
class ModulusCurve {
public:
    ModulusCurve(const SpElement& f, double alpha, double p, double H, int resolution = 64)
    {
        std::int64_t S = 0;
        for (auto& [k, c] : f) {
            std::int64_t s = std::abs(k.coord_sum());
            if (s == 0) continue;
            terms_.emplace_back(double(s), std::pow(std::abs(c), p));
            S = std::max(S, s);
        }
        ap_ = alpha * p;
        if (terms_.empty()) return;
        const auto N = std::int64_t(std::max<double>(resolution, std::ceil(resolution * double(S) * H / (2.0 * pi))));
        std::vector<double> v(std::size_t(N) + 1);
        for (std::int64_t i = 0; i <= N; ++i) v[std::size_t(i)] = F(H * double(i) / double(N));
        for (std::int64_t i = 1; i < N; ++i) {
            if (v[std::size_t(i)] >= v[std::size_t(i - 1)] && v[std::size_t(i)] >= v[std::size_t(i + 1)]) {
                auto res = boost::math::tools::brent_find_minima([&](double h) { return -F(h); },
                                                                 H * double(i - 1) / double(N),
                                                                 H * double(i + 1) / double(N), 52);
                peaks_.emplace_back(res.first, -res.second);
            }
        }
        std::sort(peaks_.begin(), peaks_.end());
        for (std::size_t i = 1; i < peaks_.size(); ++i) peaks_[i].second = std::max(peaks_[i].second, peaks_[i - 1].second);
    }

    double F(double h) const
    {
        compensated_sum acc;
        for (auto& [s, w] : terms_) acc.add(w * std::pow(std::abs(2.0 * std::sin(0.5 * h * s)), ap_));
        return acc.value();
    }

    // sup_{0 <= x <= h} F(x)
    double sup(double h) const
    {
        double best = F(h);
        auto it = std::upper_bound(peaks_.begin(), peaks_.end(), std::make_pair(h, inf));
        if (it != peaks_.begin()) best = std::max(best, std::prev(it)->second);
        return best;
    }

    const std::vector<std::pair<double, double>>& peaks() const { return peaks_; }

private:
    std::vector<std::pair<double, double>> terms_;
    std::vector<std::pair<double, double>> peaks_;   // (position, running max of peak values)
    double ap_ = 1.0;
};

} // namespace detail

// Jackson-type inequalities for f supported in Z^d_+ or Z^d_- (diagonal shift modulus).
inline JacksonReport jackson_checks(const SpElement& f, double alpha, double p, std::int64_t n, int resolution = 64,
                                    bool with_sigma = false)
{
    if (!(alpha > 0)) fail(errc::parameter_out_of_range, "alpha must be positive");
    if (p < 1.0 || !std::isfinite(p)) fail(errc::parameter_out_of_range, "p must be in [1, inf)");
    if (n < 1) fail(errc::parameter_out_of_range, "n must be positive");
    if (!detail::in_Y(f)) fail(errc::support_violation, "coefficients outside Z^d_+ and Z^d_-");
    JacksonReport r;
    const double lambda = alpha * p / 2.0;
    r.lambda = lambda;
    r.lhs = triangular_error_pow(f, n, p);
    r.In = In_integral_sine(n, lambda).value;
    detail::ModulusCurve curve(f, alpha, p, pi / double(n), resolution);
    std::vector<double> breaks{0.0};
    for (auto& pk : curve.peaks()) breaks.push_back(pk.first * double(n));
    breaks.push_back(pi);
    compensated_sum integral;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] <= breaks[i]) continue;
        double e = 0.0;
        integral.add(boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
            [&](double t) { return curve.sup(t / double(n)) * std::sin(t); }, breaks[i], breaks[i + 1], 12, 1e-13, &e));
    }
    r.rhs_integral = integral.value() / (std::pow(2.0, lambda) * r.In);
    const double wp = curve.sup(pi / double(n));
    r.omega_pi_n = std::pow(wp, 1.0 / p);
    r.const_In = 1.0 / (std::pow(2.0, lambda - 1.0) * r.In);
    const double rt = 1.0 + 1e-9;
    r.holds_integral = r.lhs <= r.rhs_integral * rt + 1e-300;
    r.holds_In = r.lhs <= r.const_In * wp * rt + 1e-300;
    if (detail::is_integer(lambda)) {
        r.const_integer = (lambda + 1.0) / std::pow(2.0, 2.0 * lambda);
        r.holds_integer = r.lhs <= *r.const_integer * wp * rt + 1e-300 && r.const_In <= *r.const_integer * rt;
    }
    if (with_sigma) {
        r.sigma = sigma_series(lambda).value;
        r.const_sigma =
            (lambda + 1.0) / (std::pow(2.0, 2.0 * lambda) + std::pow(2.0, lambda - 1.0) * (lambda + 1.0) * *r.sigma);
        r.sigma_bound_holds = r.const_In <= *r.const_sigma * rt;
    }
    const double E = std::pow(r.lhs, 1.0 / p);
    r.bound_simple = 4.0 / (3.0 * std::pow(2.0, alpha / 2.0)) * r.omega_pi_n;
    r.holds_simple = E < r.bound_simple || (E == 0.0 && r.bound_simple == 0.0);
    return r;
}

struct CnapResult {
    double value = 0.0;                 // upper bound on C^p_{n,alpha,p}(tau)
    double sine_value = 0.0;            // the sine-measure competitor
    std::optional<DiscreteMeasure> measure;   // best atomic competitor, when it wins
    std::vector<double> by_budget;      // best bound with at most k atoms, k = 1..budget
};

// Upper bound for the sharp constant: min over the sine measure and atomic measures on the pi/grid lattice.
inline CnapResult cnap_upper_bound(std::int64_t n, double alpha, double p, double tau, int atom_budget,
                                   std::int64_t grid = 64, int starts = 4)
{
    if (!(tau > 0) || !std::isfinite(tau)) fail(errc::parameter_out_of_range, "tau must be positive");
    if (atom_budget < 2) fail(errc::parameter_out_of_range, "atom_budget must be at least 2");
    if (!(alpha > 0) || !(p > 0)) fail(errc::parameter_out_of_range, "alpha and p must be positive");
    const double lambda = alpha * p / 2.0;
    const double scale = std::pow(2.0, lambda);
    CnapResult out;
    out.sine_value = (2.0 * tau / pi) / (scale * In_integral_sine(n, lambda, tau).value);

    const auto J = static_cast<std::int64_t>(std::floor(double(grid) * tau / pi + 1e-12));
    double best_discrete = inf;
    std::optional<DiscreteMeasure> best_measure;
    if (J >= 1) {
        const std::int64_t P = 2 * grid * n;
        std::vector<double> table(static_cast<std::size_t>(P));
        for (std::int64_t i = 0; i < P; ++i)
            table[std::size_t(i)] = std::pow(1.0 - std::cos(pi * double(i) / double(grid * n)), lambda);
        // objective: mass / (2^lambda min_nu sum_i w_i table[nu j_i mod P])
        auto objective = [&](const std::vector<std::int64_t>& js, const std::vector<double>& ws) {
            double m = inf, mass = 0.0;
            for (double w : ws) mass += w;
            for (std::int64_t nu = n; nu < n + P; ++nu) {
                double s = 0.0;
                for (std::size_t i = 0; i < js.size(); ++i) s += ws[i] * table[std::size_t((nu * js[i]) % P)];
                m = std::min(m, s);
                if (m == 0.0) return inf;
            }
            return mass / (scale * m);
        };
        std::vector<std::int64_t> best_js;
        std::vector<double> best_ws;
        for (int k = 1; k <= atom_budget; ++k) {
            double level_best = best_discrete;
            auto level_js = best_js;
            auto level_ws = best_ws;
            for (int st = 0; st < starts; ++st) {
                std::vector<std::int64_t> js = best_js;
                std::vector<double> ws = best_ws;
                // new atom spread deterministically across starts
                js.push_back(std::max<std::int64_t>(1, J - (J * st) / std::max(starts, 1) - std::int64_t(k - 1) % 3));
                ws.push_back(ws.empty() ? 1.0 : 0.5 * *std::min_element(ws.begin(), ws.end()));
                double cur = objective(js, ws);
                for (int sweep = 0; sweep < 6; ++sweep) {
                    double before = cur;
                    for (std::size_t i = 0; i < js.size(); ++i) {
                        for (std::int64_t j = 1; j <= J; ++j) {
                            auto saved = js[i];
                            js[i] = j;
                            double v = objective(js, ws);
                            if (v < cur) cur = v;
                            else js[i] = saved;
                        }
                        if (ws.size() > 1) {
                            auto g = [&](double lw) {
                                auto saved = ws[i];
                                ws[i] = std::exp(lw);
                                double v = objective(js, ws);
                                ws[i] = saved;
                                return v;
                            };
                            double c = std::log(ws[i]);
                            auto res = boost::math::tools::brent_find_minima(g, c - 6.0, c + 6.0, 30);
                            if (res.second < cur) {
                                cur = res.second;
                                ws[i] = std::exp(res.first);
                            }
                        }
                    }
                    if (!(cur < before * (1 - 1e-12))) break;
                }
                if (cur < level_best) {
                    level_best = cur;
                    level_js = js;
                    level_ws = ws;
                }
            }
            best_discrete = level_best;
            best_js = level_js;
            best_ws = level_ws;
            out.by_budget.push_back(std::min(out.sine_value, best_discrete));
        }
        if (!best_js.empty()) {
            std::vector<std::pair<std::int64_t, double>> atoms;
            double mass = 0.0;
            for (double w : best_ws) mass += w;
            for (std::size_t i = 0; i < best_js.size(); ++i) atoms.emplace_back(best_js[i], best_ws[i] / mass);
            best_measure = DiscreteMeasure::on_grid(tau, grid, atoms);
        }
    } else {
        out.by_budget.assign(std::size_t(atom_budget), out.sine_value);
    }
    out.value = std::min(out.sine_value, best_discrete);
    if (best_discrete < out.sine_value) out.measure = best_measure;
    return out;
}

} // namespace spapprox

#endif // SPAPPROX_JACKSON_HPP
