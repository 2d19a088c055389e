#ifndef SPAPPROX_CONFIG_HPP
#define SPAPPROX_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spapprox/decay.hpp"
#include "spapprox/error.hpp"
#include "spapprox/func_classes.hpp"
#include "spapprox/identities.hpp"
#include "spapprox/lattice.hpp"
#include "spapprox/linmethods.hpp"
#include "spapprox/psi_system.hpp"
#include "spapprox/sp_space.hpp"

namespace spapprox {

using json = nlohmann::json;

// Field-addressed view of a descriptor node; every failure names the offending path.
class Node {
public:
    Node(const json& j, std::string path, std::filesystem::path base = {})
        : j_(&j), path_(std::move(path)), base_(std::move(base))
    {
    }

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }
    const std::filesystem::path& base() const { return base_; }

    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key) && !(*j_)[key].is_null(); }

    Node at(const std::string& key) const
    {
        if (!has(key)) bad(key, "missing field");
        return Node((*j_)[key], sub(key), base_);
    }
    Node at(std::size_t i) const
    {
        if (!j_->is_array() || i >= j_->size()) fail(errc::invalid_descriptor, path_ + "[" + std::to_string(i) + "]: missing element");
        return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]", base_);
    }
    std::size_t size() const { return j_->is_array() ? j_->size() : 0; }
    bool is_array() const { return j_->is_array(); }
    bool is_object() const { return j_->is_object(); }
    bool is_number() const { return j_->is_number(); }
    bool is_string() const { return j_->is_string(); }

    // numbers, plus the strings "inf" / "infinity"
    double number() const
    {
        if (j_->is_number()) return j_->get<double>();
        if (j_->is_string()) {
            auto s = j_->get<std::string>();
            if (s == "inf" || s == "infinity") return inf;
        }
        fail(errc::invalid_descriptor, path_ + ": expected a number");
    }
    std::int64_t integer() const
    {
        const double x = number();
        if (x != std::floor(x) || !std::isfinite(x)) fail(errc::invalid_descriptor, path_ + ": expected an integer");
        return std::int64_t(x);
    }
    std::string str() const
    {
        if (!j_->is_string()) fail(errc::invalid_descriptor, path_ + ": expected a string");
        return j_->get<std::string>();
    }
    bool boolean() const
    {
        if (!j_->is_boolean()) fail(errc::invalid_descriptor, path_ + ": expected true or false");
        return j_->get<bool>();
    }

    double number(const std::string& key, double def) const { return has(key) ? at(key).number() : def; }
    std::int64_t integer(const std::string& key, std::int64_t def) const { return has(key) ? at(key).integer() : def; }
    std::string str(const std::string& key, const std::string& def) const { return has(key) ? at(key).str() : def; }
    bool boolean(const std::string& key, bool def) const { return has(key) ? at(key).boolean() : def; }

    std::string choice(const std::string& key, const std::vector<std::string>& allowed, std::optional<std::string> def = {}) const
    {
        if (!has(key) && def) return *def;
        auto s = at(key).str();
        for (auto& a : allowed)
            if (a == s) return s;
        std::string list;
        for (auto& a : allowed) list += (list.empty() ? "" : "|") + a;
        fail(errc::invalid_descriptor, sub(key) + ": expected one of " + list + ", got '" + s + "'");
    }

    [[noreturn]] void bad(const std::string& key, const std::string& what) const
    {
        fail(errc::invalid_descriptor, sub(key) + ": " + what);
    }

private:
    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* j_;
    std::string path_;
    std::filesystem::path base_;
};

// Sweep values: a scalar, an array, {"from", "to", "step"} or {"sample": [a, b, points]} (log-spaced integers).
inline std::vector<double> sweep(const Node& n)
{
    std::vector<double> out;
    if (n.is_number() || n.is_string()) {
        out.push_back(n.number());
    } else if (n.is_array()) {
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n.at(i).number());
    } else if (n.is_object() && n.has("sample")) {
        auto s = n.at("sample");
        if (s.size() != 3) fail(errc::invalid_descriptor, s.path() + ": expected [a, b, points]");
        const auto a = s.at(0).integer(), b = s.at(1).integer(), pts = s.at(2).integer();
        if (a < 1 || b < a || pts < 1) fail(errc::invalid_descriptor, s.path() + ": need 1 <= a <= b, points >= 1");
        for (auto v : n_sample(std::uint64_t(a), std::uint64_t(b), std::size_t(pts))) out.push_back(double(v));
    } else if (n.is_object()) {
        const double a = n.at("from").number(), b = n.at("to").number(), h = n.number("step", 1.0);
        if (!(h > 0)) fail(errc::invalid_descriptor, n.path() + ".step: must be positive");
        if (b < a) fail(errc::invalid_descriptor, n.path() + ": empty range");
        const auto count = std::int64_t(std::floor((b - a) / h + 1e-9)) + 1;
        if (count > 10000000) fail(errc::invalid_descriptor, n.path() + ": range too long");
        for (std::int64_t i = 0; i < count; ++i) out.push_back(a + double(i) * h);
    } else {
        fail(errc::invalid_descriptor, n.path() + ": expected a number, list or range");
    }
    if (out.empty()) fail(errc::invalid_descriptor, n.path() + ": empty sweep");
    return out;
}

inline std::vector<std::int64_t> integer_sweep(const Node& n)
{
    std::vector<std::int64_t> out;
    for (double x : sweep(n)) {
        if (x != std::floor(x)) fail(errc::invalid_descriptor, n.path() + ": expected integers");
        out.push_back(std::int64_t(x));
    }
    return out;
}

inline DecayRule parse_rule(const Node& n)
{
    auto fam = n.choice("family", {"power", "powerlog", "log", "exp", "geometric"});
    if (fam == "power") return DecayRule::power(n.at("r").number());
    if (fam == "powerlog") return DecayRule::powerlog(n.at("r").number(), n.at("eps").number(), n.number("a", 1.0));
    if (fam == "log") return DecayRule::log(n.at("r").number(), n.number("a", 1.0));
    if (fam == "exp") return DecayRule::exp(n.number("lambda", 1.0), n.number("s", 1.0), n.number("a", 0.0));
    return DecayRule::geometric(n.at("base").number());
}

inline Index parse_index(const Node& n, int dim)
{
    if (n.is_number()) {
        if (dim != 1) fail(errc::invalid_descriptor, n.path() + ": expected " + std::to_string(dim) + " coordinates");
        return Index{n.integer()};
    }
    if (!n.is_array() || int(n.size()) != dim)
        fail(errc::invalid_descriptor, n.path() + ": expected " + std::to_string(dim) + " coordinates");
    Index k(dim);
    for (int i = 0; i < dim; ++i) k[i] = n.at(std::size_t(i)).integer();
    return k;
}

// {"k": index, "re": x, "im": y} or [index, re, im]
inline std::pair<Index, cplx> parse_term(const Node& n, int dim)
{
    if (n.is_array()) {
        if (n.size() < 2 || n.size() > 3) fail(errc::invalid_descriptor, n.path() + ": expected [k, re, im]");
        return {parse_index(n.at(0), dim), cplx(n.at(1).number(), n.size() == 3 ? n.at(2).number() : 0.0)};
    }
    return {parse_index(n.at("k"), dim), cplx(n.number("re", 0.0), n.number("im", 0.0))};
}

inline PsiSystem parse_system(const Node& n)
{
    SystemOptions o;
    o.budget = std::uint64_t(n.integer("budget", std::int64_t(default_budget)));
    o.require_nonzero = n.boolean("require_nonzero", false);
    auto m = n.choice("mode", {"table", "sequence", "product", "radial"});
    if (m == "table") {
        const int dim = int(n.integer("dim", 1));
        auto es = n.at("entries");
        if (!es.is_array() || es.size() == 0) fail(errc::invalid_descriptor, es.path() + ": expected a non-empty list");
        std::vector<std::pair<Index, cplx>> entries;
        for (std::size_t i = 0; i < es.size(); ++i) entries.push_back(parse_term(es.at(i), dim));
        return PsiSystem::table(dim, std::move(entries), o);
    }
    if (m == "sequence") return PsiSystem::sequence(parse_rule(n.at("rule")), o);
    if (m == "product") {
        auto rs = n.at("rules");
        if (!rs.is_array() || rs.size() == 0) fail(errc::invalid_descriptor, rs.path() + ": expected a non-empty list");
        std::vector<DecayRule> rules;
        for (std::size_t i = 0; i < rs.size(); ++i) rules.push_back(parse_rule(rs.at(i)));
        return PsiSystem::product(std::move(rules), o);
    }
    return PsiSystem::radial(int(n.at("dim").integer()), n.number("r", inf), parse_rule(n.at("rule")), o);
}

// Inline {"dim", "terms"} or {"dim", "file"} in the "k1 ... kd re im" text format, relative to the config.
inline SpElement parse_element(const Node& n)
{
    const int dim = int(n.integer("dim", 1));
    if (dim < 1 || dim > max_dim) fail(errc::invalid_descriptor, n.path() + ".dim: out of range");
    if (n.has("file")) {
        auto p = std::filesystem::path(n.at("file").str());
        if (p.is_relative()) p = n.base() / p;
        std::ifstream in(p);
        if (!in) fail(errc::invalid_descriptor, n.path() + ".file: cannot open " + p.string());
        return read_element(in, dim);
    }
    auto ts = n.at("terms");
    if (!ts.is_array()) fail(errc::invalid_descriptor, ts.path() + ": expected a list");
    std::vector<SpElement::term> terms;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        auto [k, c] = parse_term(ts.at(i), dim);
        terms.emplace_back(k, c);
    }
    return SpElement::from_terms(dim, std::move(terms));
}

inline IndexSet parse_region(const Node& n, int dim)
{
    auto kind = n.choice("kind", {"triangular", "ball", "cross", "list"});
    if (kind == "triangular") return region_triangular(dim, n.at("m").integer());
    if (kind == "ball") return region_ball(dim, n.at("r").number(), n.at("m").integer());
    if (kind == "cross") return region_cross(dim, n.at("n").integer());
    auto ms = n.at("members");
    std::vector<Index> ks;
    for (std::size_t i = 0; i < ms.size(); ++i) ks.push_back(parse_index(ms.at(i), dim));
    return IndexSet::of(dim, std::move(ks));
}

// {"kind": "power", "r": x} or {"kind": "log", "r": x}: omega(t) = t^r or t^r log(e/t)
inline Majorant parse_majorant(const Node& n)
{
    auto kind = n.choice("kind", {"power", "log"}, "power");
    const double r = n.number("r", 1.0);
    if (kind == "power") return Majorant::power(r);
    if (!(r > 0 && r < 1)) fail(errc::invalid_descriptor, n.path() + ".r: log majorant needs 0 < r < 1");
    return Majorant([r](double t) { return t <= 0 ? 0.0 : std::pow(t, r) * (1.0 - std::log(std::min(t, 1.0))); },
                    "t^" + std::to_string(r) + " log(e/t)");
}

inline ConvexDecayFunction parse_decay_function(const Node& n)
{
    if (n.has("table")) {
        auto t = n.at("table");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto e = t.at(i);
            pts.emplace_back(e.at(0).number(), e.at(1).number());
        }
        return ConvexDecayFunction::table(std::move(pts));
    }
    auto f = ConvexDecayFunction::of(parse_rule(n));
    return n.has("pow") ? f.pow(n.at("pow").number()) : f;
}

inline OrderRegime parse_regime(const Node& n)
{
    OrderRegime r;
    r.what = n.choice("quantity", {"en", "width"}, "en") == "en" ? quantity::en : quantity::width;
    r.where = n.choice("setting", {"ellipsoid", "class"}, "class") == "ellipsoid" ? setting::ellipsoid : setting::lattice_class;
    r.p = n.number("p", 2.0);
    r.q = n.number("q", 2.0);
    r.d = int(n.integer("d", 1));
    r.r = n.number("r", inf);
    return r;
}

inline json read_config(const std::filesystem::path& p)
{
    std::ifstream in(p);
    if (!in) fail(errc::invalid_descriptor, "config: cannot open " + p.string());
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        fail(errc::invalid_descriptor, "config: " + std::string(e.what()));
    }
}

} // namespace spapprox

#endif // SPAPPROX_CONFIG_HPP
