#ifndef SPAPPROX_LINMETHODS_HPP
#define SPAPPROX_LINMETHODS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "spapprox/identities.hpp"
#include "spapprox/sp_space.hpp"

namespace spapprox {

// Multiplier of the nu = 0 block for the generalized Abel-Poisson sum.
constexpr double abel_poisson_lambda0 = 1.0;

enum class method_tag { partial, fejer, abel_poisson, tap };

inline const char* method_tag_name(method_tag t)
{
    switch (t) {
    case method_tag::partial: return "partial";
    case method_tag::fejer: return "fejer";
    case method_tag::abel_poisson: return "abel_poisson";
    case method_tag::tap: return "tap";
    }
    return "?";
}

namespace detail {

// C(nu, k) (1-rho)^k rho^{nu-k}, in log space for large nu
inline double binomial_term(std::int64_t nu, std::int64_t k, double rho)
{
    if (k < 0 || k > nu) return 0.0;
    if (rho == 0.0) return nu == k ? 1.0 : 0.0;
    if (k == 0) return std::pow(rho, double(nu));
    if (nu <= 60) return binomial(nu, k) * std::pow(1.0 - rho, double(k)) * std::pow(rho, double(nu - k));
    return std::exp(log_binomial(double(nu), double(k)) + double(k) * std::log1p(-rho) + double(nu - k) * std::log(rho));
}

// 1 - rho^x
inline double power_complement(double x, double rho)
{
    return rho == 0.0 ? 1.0 : -std::expm1(x * std::log(rho));
}

} // namespace detail

// lambda_{nu,r}(rho) = sum_{k<r} C(nu,k) (1-rho)^k rho^{nu-k}
inline double tap_lambda_binomial(std::int64_t nu, int r, double rho)
{
    if (nu < r) return 1.0;
    compensated_sum s;
    for (int k = 0; k < r; ++k) s.add(detail::binomial_term(nu, k, rho));
    return s.value();
}

// Same value as sum_{k<r} (1-rho)^k / k! d^k/drho^k rho^nu, falling factorials built by recurrence.
inline double tap_lambda_derivative(std::int64_t nu, int r, double rho)
{
    if (nu < r) return 1.0;
    compensated_sum s;
    double coef = 1.0;      // nu (nu-1) ... (nu-k+1) / k!
    double h = 1.0;         // (1-rho)^k
    for (int k = 0; k < r; ++k) {
        if (k > 0) {
            coef *= double(nu - k + 1) / double(k);
            h *= 1.0 - rho;
        }
        s.add(coef * h * std::pow(rho, double(nu - k)));
    }
    return s.value();
}

// 1 - lambda_{nu,r}(rho) = sum_{k>=r} C(nu,k) (1-rho)^k rho^{nu-k}
inline double tap_complement(std::int64_t nu, int r, double rho)
{
    if (nu < r) return 0.0;
    if (r == 1) return detail::power_complement(double(nu), rho);
    compensated_sum s;
    for (std::int64_t k = r; k <= nu; ++k) {
        double t = detail::binomial_term(nu, k, rho);
        s.add(t);
        if (t == 0.0 && double(k) > double(nu) * (1.0 - rho)) break;
    }
    return s.value();
}

// Blockwise multiplier nu -> lambda_nu acting on H_nu, nu = |k|_1.
class MultiplierMethod {
public:
    static MultiplierMethod partial(std::int64_t n)
    {
        if (n < 0) fail(errc::parameter_out_of_range, "n must be non-negative");
        MultiplierMethod m(method_tag::partial);
        m.n_ = n;
        return m;
    }
    static MultiplierMethod fejer(std::int64_t n)
    {
        if (n < 0) fail(errc::parameter_out_of_range, "n must be non-negative");
        MultiplierMethod m(method_tag::fejer);
        m.n_ = n;
        return m;
    }
    static MultiplierMethod abel_poisson(double rho, double s)
    {
        check_rho(rho);
        if (!(s > 0) || !std::isfinite(s)) fail(errc::parameter_out_of_range, "s must be positive");
        MultiplierMethod m(method_tag::abel_poisson);
        m.rho_ = rho;
        m.s_ = s;
        return m;
    }
    static MultiplierMethod tap(double rho, int r)
    {
        check_rho(rho);
        if (r < 1) fail(errc::parameter_out_of_range, "r must be a positive integer");
        MultiplierMethod m(method_tag::tap);
        m.rho_ = rho;
        m.r_ = r;
        return m;
    }

    method_tag tag() const { return tag_; }
    std::int64_t n() const { return n_; }
    double rho() const { return rho_; }
    double s() const { return s_; }
    int r() const { return r_; }

    std::string describe() const
    {
        switch (tag_) {
        case method_tag::partial:
        case method_tag::fejer: return std::string(method_tag_name(tag_)) + "(n=" + std::to_string(n_) + ")";
        case method_tag::abel_poisson: return "abel_poisson(rho=" + fmt(rho_) + ",s=" + fmt(s_) + ")";
        case method_tag::tap: return "tap(rho=" + fmt(rho_) + ",r=" + std::to_string(r_) + ")";
        }
        return "?";
    }

    double lambda(std::int64_t nu) const
    {
        switch (tag_) {
        case method_tag::partial: return nu <= n_ ? 1.0 : 0.0;
        case method_tag::fejer: return nu <= n_ ? 1.0 - double(nu) / double(n_ + 1) : 0.0;
        case method_tag::abel_poisson:
            if (nu == 0) return abel_poisson_lambda0;
            return rho_ == 0.0 ? 0.0 : std::pow(rho_, std::pow(double(nu), s_));
        case method_tag::tap: return tap_lambda_binomial(nu, r_, rho_);
        }
        return 0.0;
    }

    // 1 - lambda_nu without cancellation
    double complement(std::int64_t nu) const
    {
        switch (tag_) {
        case method_tag::partial: return nu <= n_ ? 0.0 : 1.0;
        case method_tag::fejer: return nu <= n_ ? double(nu) / double(n_ + 1) : 1.0;
        case method_tag::abel_poisson:
            if (nu == 0) return 1.0 - abel_poisson_lambda0;
            return detail::power_complement(std::pow(double(nu), s_), rho_);
        case method_tag::tap: return tap_complement(nu, r_, rho_);
        }
        return 0.0;
    }

private:
    explicit MultiplierMethod(method_tag t) : tag_(t) {}

    static void check_rho(double rho)
    {
        if (!(rho >= 0.0 && rho < 1.0)) fail(errc::parameter_out_of_range, "rho must be in [0, 1)");
    }
    static std::string fmt(double x)
    {
        char b[32];
        std::snprintf(b, sizeof b, "%.17g", x);
        return b;
    }

    method_tag tag_;
    std::int64_t n_ = 0;
    double rho_ = 0.0;
    double s_ = 1.0;
    int r_ = 1;
};

inline SpElement apply_method(const SpElement& f, const MultiplierMethod& m)
{
    return f.map([&](const Index& k, cplx c) { return m.lambda(k.norm1()) * c; });
}

// || f - A(f) ||_p
inline double method_error(const SpElement& f, const MultiplierMethod& m, double p)
{
    std::vector<double> v;
    v.reserve(f.size());
    for (auto& [k, c] : f) v.push_back(m.complement(k.norm1()) * std::abs(c));
    return sp_norm_of(v, p);
}

enum class derivative_kind { round, bracket };

// round: block nu times nu^r (so the nu = 0 block vanishes for r > 0); bracket: block nu >= r times nu!/(nu-r)!, blocks nu < r dropped.
inline SpElement generalized_derivative(const SpElement& f, double r, derivative_kind kind)
{
    if (!(r >= 0) || !std::isfinite(r)) fail(errc::parameter_out_of_range, "r must be non-negative");
    if (r == 0.0) return f;
    if (kind == derivative_kind::round)
        return f.map([&](const Index& k, cplx c) { return std::pow(double(k.norm1()), r) * c; });
    if (r != std::floor(r)) fail(errc::parameter_out_of_range, "bracket derivative needs integer r");
    const auto ri = std::int64_t(r);
    return f.map([&](const Index& k, cplx c) {
        const auto nu = k.norm1();
        if (nu < ri) return cplx(0.0);
        double w = 1.0;
        for (std::int64_t j = nu - ri + 1; j <= nu; ++j) w *= double(j);
        return w * c;
    });
}

// || P(f)(rho, .) ||_p: the product Poisson kernel multiplies f^(k) by rho^{|k|_1}.
inline double poisson_norm(const SpElement& f, double rho, double p)
{
    if (!(rho >= 0.0 && rho < 1.0)) fail(errc::parameter_out_of_range, "rho must be in [0, 1)");
    std::vector<double> v;
    v.reserve(f.size());
    for (auto& [k, c] : f) {
        const auto nu = k.norm1();
        v.push_back((nu == 0 ? 1.0 : std::pow(rho, double(nu))) * std::abs(c));
    }
    return sp_norm_of(v, p);
}

enum class rate_family { fejer, tap, abel_poisson };

inline const char* rate_family_name(rate_family f)
{
    switch (f) {
    case rate_family::fejer: return "fejer";
    case rate_family::tap: return "tap";
    case rate_family::abel_poisson: return "abel_poisson";
    }
    return "?";
}

struct RateRow {
    double param = 0.0;         // n or rho
    double error = 0.0;         // || f - A(f) ||
    double error_ref = 0.0;     // majorant expression paired with the error
    double dual = 0.0;          // derivative-side quantity
    double dual_ref = 0.0;
    double error_ratio() const { return error_ref > 0 ? error / error_ref : inf; }
    double dual_ratio() const { return dual_ref > 0 ? dual / dual_ref : inf; }
};

struct RateReport {
    rate_family family = rate_family::fejer;
    int order = 1;              // r for tap, s for abel_poisson
    std::vector<RateRow> rows;
    double error_ratio_min = inf, error_ratio_max = 0.0;
    double dual_ratio_min = inf, dual_ratio_max = 0.0;
};

// Paired quantities over a sweep (n for Fejer, rho for tap / Abel-Poisson):
//   fejer:        || f - sigma_n f ||  vs omega(1/n);  || S_n(f^[1]) ||  vs n omega(1/n)
//   tap(r):       || f - A_{rho,r} f || vs (1-rho)^{r-1} omega(1-rho);  || P(f^[r])(rho) || vs omega(1-rho)/(1-rho)
//   abel(s):      || f - P_{rho,s} f || vs omega(1-rho);  || P(f^(s))(rho) || vs omega(1-rho)/(1-rho)
inline RateReport method_rate_report(const SpElement& f, rate_family fam, int order, const Majorant& omega, double p,
                                     const std::vector<double>& sweep)
{
    if (order < 1) fail(errc::parameter_out_of_range, "order must be a positive integer");
    if (!(p >= 1.0) || !std::isfinite(p)) fail(errc::parameter_out_of_range, "p must be in [1, inf)");
    RateReport rep;
    rep.family = fam;
    rep.order = order;
    for (double x : sweep) {
        RateRow row;
        row.param = x;
        if (fam == rate_family::fejer) {
            if (!(x >= 1) || x != std::floor(x)) fail(errc::parameter_out_of_range, "Fejer sweep needs integers n >= 1");
            const auto n = std::int64_t(x);
            row.error = method_error(f, MultiplierMethod::fejer(n), p);
            row.error_ref = omega(1.0 / x);
            row.dual = sp_norm(apply_method(generalized_derivative(f, 1.0, derivative_kind::bracket), MultiplierMethod::partial(n)), p);
            row.dual_ref = x * omega(1.0 / x);
        } else {
            if (!(x >= 0.0 && x < 1.0)) fail(errc::parameter_out_of_range, "rho sweep must lie in [0, 1)");
            const double h = 1.0 - x;
            if (fam == rate_family::tap) {
                row.error = method_error(f, MultiplierMethod::tap(x, order), p);
                row.error_ref = std::pow(h, order - 1) * omega(h);
                row.dual = poisson_norm(generalized_derivative(f, order, derivative_kind::bracket), x, p);
            } else {
                row.error = method_error(f, MultiplierMethod::abel_poisson(x, order), p);
                row.error_ref = omega(h);
                row.dual = poisson_norm(generalized_derivative(f, order, derivative_kind::round), x, p);
            }
            row.dual_ref = omega(h) / h;
        }
        rep.error_ratio_min = std::min(rep.error_ratio_min, row.error_ratio());
        rep.error_ratio_max = std::max(rep.error_ratio_max, row.error_ratio());
        rep.dual_ratio_min = std::min(rep.dual_ratio_min, row.dual_ratio());
        rep.dual_ratio_max = std::max(rep.dual_ratio_max, row.dual_ratio());
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace spapprox

#endif // SPAPPROX_LINMETHODS_HPP
