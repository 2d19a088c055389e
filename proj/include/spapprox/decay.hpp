#ifndef SPAPPROX_DECAY_HPP
#define SPAPPROX_DECAY_HPP

#include <cmath>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "spapprox/error.hpp"
#include "spapprox/numeric.hpp"

namespace spapprox {

enum class family { power, powerlog, log, exp, geometric };

inline const char* family_name(family f)
{
    switch (f) {
    case family::power: return "power";
    case family::powerlog: return "powerlog";
    case family::log: return "log";
    case family::exp: return "exp";
    case family::geometric: return "geometric";
    }
    return "?";
}

// Scalar decay rule t -> psi(t), t >= 1, positive and non-increasing.
//   power      t^{-r}
//   powerlog   t^{-r} ln^eps(t + a)
//   log        ln^{-r}(t + a)
//   exp        exp(-lambda (t + a)^s)
//   geometric  base^{-t}
class DecayRule {
public:
    static DecayRule power(double r)
    {
        DecayRule d(family::power);
        d.r_ = r;
        if (!(r > 0)) fail(errc::invalid_descriptor, "power rule needs r > 0");
        return d;
    }
    static DecayRule powerlog(double r, double eps, double a)
    {
        DecayRule d(family::powerlog);
        d.r_ = r;
        d.eps_ = eps;
        d.a_ = a;
        if (!(a > 0)) fail(errc::invalid_descriptor, "powerlog rule needs a > 0");
        if (!(r > 0)) fail(errc::invalid_descriptor, "powerlog rule needs r > 0");
        if (eps > 0 && r < eps / ((1.0 + a) * std::log(1.0 + a)))
            fail(errc::invalid_descriptor, "powerlog rule is not decreasing on [1, inf)");
        return d;
    }
    static DecayRule log(double r, double a)
    {
        DecayRule d(family::log);
        d.r_ = r;
        d.a_ = a;
        if (!(r > 0)) fail(errc::invalid_descriptor, "log rule needs r > 0");
        if (!(a > 0)) fail(errc::invalid_descriptor, "log rule needs a > 0");
        return d;
    }
    static DecayRule exp(double lambda, double s, double a = 0.0)
    {
        DecayRule d(family::exp);
        d.lambda_ = lambda;
        d.s_ = s;
        d.a_ = a;
        if (!(lambda > 0) || !(s > 0)) fail(errc::invalid_descriptor, "exp rule needs lambda > 0, s > 0");
        if (!(a >= 0)) fail(errc::invalid_descriptor, "exp rule needs a >= 0");
        return d;
    }
    static DecayRule geometric(double base)
    {
        DecayRule d(family::geometric);
        d.base_ = base;
        if (!(base > 1)) fail(errc::invalid_descriptor, "geometric rule needs base > 1");
        return d;
    }

    family kind() const { return fam_; }
    double r() const { return r_; }
    double eps() const { return eps_; }
    double a() const { return a_; }
    double lambda() const { return lambda_; }
    double s() const { return s_; }
    double base() const { return base_; }

    double operator()(double t) const { return value(t); }

    double value(double t) const
    {
        switch (fam_) {
        case family::power: return std::pow(t, -r_);
        case family::powerlog: return std::pow(t, -r_) * std::pow(std::log(t + a_), eps_);
        case family::log: return std::pow(std::log(t + a_), -r_);
        case family::exp: return std::exp(-lambda_ * std::pow(t + a_, s_));
        case family::geometric: return std::pow(base_, -t);
        }
        return 0.0;
    }

    double log_value(double t) const
    {
        switch (fam_) {
        case family::power: return -r_ * std::log(t);
        case family::powerlog: return -r_ * std::log(t) + eps_ * std::log(std::log(t + a_));
        case family::log: return -r_ * std::log(std::log(t + a_));
        case family::exp: return -lambda_ * std::pow(t + a_, s_);
        case family::geometric: return -t * std::log(base_);
        }
        return 0.0;
    }

    // d/dt ln psi(t)
    double dlog(double t) const
    {
        switch (fam_) {
        case family::power: return -r_ / t;
        case family::powerlog: return -r_ / t + eps_ / ((t + a_) * std::log(t + a_));
        case family::log: return -r_ / ((t + a_) * std::log(t + a_));
        case family::exp: return -lambda_ * s_ * std::pow(t + a_, s_ - 1.0);
        case family::geometric: return -std::log(base_);
        }
        return 0.0;
    }

    double derivative(double t) const { return value(t) * dlog(t); }

    // Smallest t0 such that psi^e is convex on [t0, inf); infinity when unknown.
    double convex_from(double e) const
    {
        switch (fam_) {
        case family::power:
        case family::geometric:
        case family::log: return 1.0;
        case family::exp: {
            if (s_ <= 1.0) return 1.0;
            double c = e * lambda_;
            double u = std::pow((s_ - 1.0) / (c * s_), 1.0 / s_);
            return std::max(1.0, u - a_);
        }
        case family::powerlog: return inf;
        }
        return inf;
    }

    // Integral of psi(t)^e over [K, inf); +inf when divergent.
    double tail_integral(double e, double K) const
    {
        switch (fam_) {
        case family::power: {
            double c = r_ * e;
            if (c <= 1.0) return inf;
            return std::pow(K, 1.0 - c) / (c - 1.0);
        }
        case family::geometric: return std::pow(base_, -e * K) / (e * std::log(base_));
        case family::exp: {
            double c = e * lambda_;
            double x = c * std::pow(K + a_, s_);
            return boost::math::tgamma(1.0 / s_, x) * std::pow(c, -1.0 / s_) / s_;
        }
        case family::log: return inf;
        case family::powerlog: {
            double c = r_ * e;
            if (c < 1.0) return inf;
            if (c == 1.0 && eps_ * e >= -1.0) return inf;
            // t = K e^u
            auto g = [&](double u) {
                double t = K * std::exp(u);
                return std::exp(e * log_value(t)) * t;
            };
            boost::math::quadrature::exp_sinh<double> integrator;
            double err = 0.0;
            double v = integrator.integrate(g, 0.0, inf, 1e-13, &err);
            if (!std::isfinite(v) || err > 1e-8 * std::abs(v)) return inf;
            return v;
        }
        }
        return inf;
    }

    std::string describe() const
    {
        auto f = [](double x) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return std::string(buf);
        };
        switch (fam_) {
        case family::power: return "power(r=" + f(r_) + ")";
        case family::powerlog: return "powerlog(r=" + f(r_) + ",eps=" + f(eps_) + ",a=" + f(a_) + ")";
        case family::log: return "log(r=" + f(r_) + ",a=" + f(a_) + ")";
        case family::exp: return "exp(lambda=" + f(lambda_) + ",s=" + f(s_) + ",a=" + f(a_) + ")";
        case family::geometric: return "geometric(base=" + f(base_) + ")";
        }
        return "?";
    }

private:
    explicit DecayRule(family f) : fam_(f) {}

    family fam_;
    double r_ = 0.0;
    double eps_ = 0.0;
    double a_ = 0.0;
    double lambda_ = 0.0;
    double s_ = 1.0;
    double base_ = 2.0;
};

} // namespace spapprox

#endif // SPAPPROX_DECAY_HPP
