#ifndef SPAPPROX_CLI_HPP
#define SPAPPROX_CLI_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "spapprox/config.hpp"
#include "spapprox/extremal.hpp"
#include "spapprox/func_classes.hpp"
#include "spapprox/identities.hpp"
#include "spapprox/jackson.hpp"
#include "spapprox/linmethods.hpp"
#include "spapprox/oracle.hpp"

namespace spapprox::cli {

constexpr const char* version = "0.1.0";

using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;
using Row = std::vector<Cell>;

struct Table {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

struct PlotSpec {
    std::string x;
    std::vector<std::string> y;
};

struct Output {
    std::string name;           // file stem
    std::string operation;      // module operation producing every numeric cell
    Table table;
    std::optional<PlotSpec> plot;
    json summary = json::object();
};

struct Context {
    unsigned jobs = 1;
    std::optional<double> tol;
    std::uint64_t seed = 1;
};

// Results are stored by task index, so the output order never depends on the pool size.
template <class T>
std::vector<T> parallel_map(std::size_t count, unsigned jobs, const std::function<T(std::size_t)>& fn)
{
    std::vector<T> out(count);
    std::vector<std::exception_ptr> errs(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    const unsigned w = std::max(1u, std::min<unsigned>(jobs, unsigned(count)));
    if (w == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

inline std::vector<Row> parallel_rows(std::size_t count, const Context& ctx, const std::function<Row(std::size_t)>& fn)
{
    return parallel_map<Row>(count, ctx.jobs, fn);
}

// shortest round-trip representation
inline std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::string format_cell(const Cell& c)
{
    return std::visit([](auto&& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_double(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return v;
    }, c);
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline void write_csv(std::ostream& out, const Table& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_field(t.columns[i]);
    out << "\r\n";
    for (auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(format_cell(row[i]));
        out << "\r\n";
    }
}

inline json cell_json(const Cell& c)
{
    return std::visit([](auto&& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) return std::isfinite(v) ? json(v) : json(format_double(v));
        else return json(v);
    }, c);
}

inline void write_json(std::ostream& out, const Output& o)
{
    json j;
    j["operation"] = o.operation;
    j["columns"] = o.table.columns;
    j["rows"] = json::array();
    for (auto& row : o.table.rows) {
        json r = json::array();
        for (auto& c : row) r.push_back(cell_json(c));
        j["rows"].push_back(r);
    }
    if (!o.summary.empty()) j["summary"] = o.summary;
    out << j.dump(2) << "\n";
}

inline std::optional<double> numeric_cell(const Cell& c)
{
    if (auto d = std::get_if<double>(&c)) return *d;
    if (auto i = std::get_if<std::int64_t>(&c)) return double(*i);
    return std::nullopt;
}

// Polyline plot of the y columns against x; log axes when the data is positive and spans two decades.
inline void write_svg(std::ostream& out, const Table& t, const PlotSpec& spec)
{
    auto col = [&](const std::string& name) {
        auto it = std::find(t.columns.begin(), t.columns.end(), name);
        if (it == t.columns.end()) fail(errc::invalid_descriptor, "plot: no column " + name);
        return std::size_t(it - t.columns.begin());
    };
    const std::size_t xc = col(spec.x);
    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> ss;
    double x0 = inf, x1 = -inf, y0 = inf, y1 = -inf;
    bool xpos = true, ypos = true;
    for (auto& yn : spec.y) {
        Series s{yn, {}};
        const std::size_t yc = col(yn);
        for (auto& row : t.rows) {
            auto x = numeric_cell(row[xc]), y = numeric_cell(row[yc]);
            if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y)) continue;
            s.pts.emplace_back(*x, *y);
            x0 = std::min(x0, *x), x1 = std::max(x1, *x), y0 = std::min(y0, *y), y1 = std::max(y1, *y);
            xpos = xpos && *x > 0;
            ypos = ypos && *y > 0;
        }
        ss.push_back(std::move(s));
    }
    const bool lx = xpos && x0 > 0 && x1 / x0 >= 100, ly = ypos && y0 > 0 && y1 / y0 >= 100;
    auto tx = [&](double x) { return lx ? std::log10(x) : x; };
    auto ty = [&](double y) { return ly ? std::log10(y) : y; };
    const double W = 640, H = 400, M = 50;
    double ax = tx(x0), bx = tx(x1), ay = ty(y0), by = ty(y1);
    if (!(bx > ax)) ax -= 0.5, bx += 0.5;
    if (!(by > ay)) ay -= 0.5, by += 0.5;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << (lx ? "log10 " : "") << spec.x << "</text>\n";
    out << "<text x=\"" << M << "\" y=\"" << M - 10 << "\">" << format_double(x0) << " .. " << format_double(x1) << " ; "
        << format_double(y0) << " .. " << format_double(y1) << (ly ? " (log y)" : "") << "</text>\n";
    for (std::size_t i = 0; i < ss.size(); ++i) {
        out << "<polyline fill=\"none\" stroke=\"" << colors[i % 5] << "\" points=\"";
        for (auto& [x, y] : ss[i].pts) {
            const double px = M + (tx(x) - ax) / (bx - ax) * (W - 2 * M);
            const double py = H - M - (ty(y) - ay) / (by - ay) * (H - 2 * M);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - M + 4 << "\" y=\"" << M + 16 * (i + 1) << "\" fill=\"" << colors[i % 5] << "\" font-size=\"11\">"
            << ss[i].name << "</text>\n";
    }
    out << "</svg>\n";
}

namespace detail {

using Runner = std::function<Output(const Node&, const Context&)>;

inline Cell opt_cell(const std::optional<std::uint64_t>& v)
{
    return v ? Cell(std::int64_t(*v)) : Cell();
}

inline std::vector<std::string> index_columns(int dim)
{
    if (dim == 1) return {"k"};
    std::vector<std::string> c;
    for (int i = 1; i <= dim; ++i) c.push_back("k" + std::to_string(i));
    return c;
}

inline void push_index(Row& row, const Index& k)
{
    for (int i = 0; i < k.dim(); ++i) row.emplace_back(k[i]);
}

inline std::string region_name(const IndexSet& s)
{
    switch (s.type()) {
    case IndexSet::kind::triangular: return "triangular(m=" + std::to_string(s.param()) + ")";
    case IndexSet::kind::ball: return "ball(r=" + format_double(s.norm_r()) + ",m=" + std::to_string(s.param()) + ")";
    case IndexSet::kind::cross: return "cross(n=" + std::to_string(s.param()) + ")";
    case IndexSet::kind::explicit_set: {
        std::string out;
        for (auto& k : s.members()) out += (out.empty() ? "" : ";") + k.str();
        return "list(" + out + ")";
    }
    }
    return "?";
}

inline Output charseq(const Node& c, const Context&)
{
    auto psi = parse_system(c.at("system"));
    const auto levels = c.at("levels").integer();
    if (levels < 1) c.bad("levels", "must be positive");
    auto cs = char_sequences(psi, std::size_t(levels));
    Output o{"charseq", "psi_system.char_sequences", {{"n", "epsilon", "delta"}, {}}, PlotSpec{"n", {"epsilon"}}};
    for (std::size_t n = 1; n <= cs.epsilon.size(); ++n)
        o.table.rows.push_back({std::int64_t(n), cs.epsilon[n - 1], std::int64_t(cs.delta[n])});
    o.summary["levels_resolved"] = cs.epsilon.size();
    return o;
}

inline Output rearrange(const Node& c, const Context&)
{
    auto psi = parse_system(c.at("system"));
    const auto count = c.at("count").integer();
    if (count < 1) c.bad("count", "must be positive");
    auto v = rearrangement(psi, std::uint64_t(count));
    Output o{"rearrange", "psi_system.rearrangement", {{"l", "value"}, {}}, PlotSpec{"l", {"value"}}};
    for (std::size_t l = 0; l < v.size(); ++l) o.table.rows.push_back({std::int64_t(l + 1), v[l]});
    return o;
}

inline Output region(const Node& c, const Context&)
{
    auto r = c.at("region");
    const bool gn = r.has("kind") && r.at("kind").is_string() && r.at("kind").str() == "gn";
    IndexSet s = IndexSet::empty(1);
    if (gn) {
        auto psi = parse_system(c.at("system"));
        s = region_gn(psi, std::size_t(r.at("n").integer()));
    } else {
        s = parse_region(r, int(c.integer("dim", 1)));
    }
    Output o{"region", "psi_system.region", {index_columns(s.dim()), {}}, std::nullopt};
    for (auto& k : s.members(std::uint64_t(c.integer("budget", std::int64_t(default_budget))))) {
        Row row;
        push_index(row, k);
        o.table.rows.push_back(std::move(row));
    }
    o.summary["region"] = gn ? "gn(n=" + std::to_string(r.at("n").integer()) + ")" : region_name(s);
    o.summary["cardinality"] = o.table.rows.size();
    return o;
}

inline Output count(const Node& c, const Context& ctx)
{
    auto ds = integer_sweep(c.at("d"));
    auto rs = sweep(c.at("r"));
    auto ms = integer_sweep(c.at("m"));
    struct Job {
        std::int64_t d;
        double r;
        std::int64_t m;
    };
    std::vector<Job> jobs;
    for (auto d : ds)
        for (double r : rs)
            for (auto m : ms) jobs.push_back({d, r, m});
    const double budget = c.number("budget", default_count_budget);
    Output o{"count", "psi_system.lattice_count", {{"d", "r", "m", "V_m"}, {}}, PlotSpec{"m", {"V_m"}}};
    o.table.rows = parallel_rows(jobs.size(), ctx, [&](std::size_t i) {
        auto& j = jobs[i];
        return Row{j.d, j.r, j.m, std::int64_t(lattice_count(int(j.d), j.r, j.m, budget))};
    });
    return o;
}

inline Output extremal_gamma(const Node& c, const Context& ctx)
{
    auto psi = parse_system(c.at("system"));
    const double p = c.at("p").number(), q = c.at("q").number();
    std::vector<IndexSet> sets;
    if (c.has("regions")) {
        auto rs = c.at("regions");
        for (std::size_t i = 0; i < rs.size(); ++i) sets.push_back(parse_region(rs.at(i), psi.dim()));
    } else {
        sets.push_back(parse_region(c.at("region"), psi.dim()));
    }
    Output o{"extremal_gamma", "extremal.ellipsoid_gamma_error", {{"region", "size", "value", "formula"}, {}}, std::nullopt};
    o.table.rows = parallel_rows(sets.size(), ctx, [&](std::size_t i) {
        auto r = ellipsoid_gamma_error(psi, sets[i], p, q);
        return Row{region_name(sets[i]), std::int64_t(sets[i].cardinality()), r.value, r.formula};
    });
    return o;
}

inline Output extremal_widths(const Node& c, const Context& ctx)
{
    auto psi = parse_system(c.at("system"));
    const double p = c.at("p").number(), q = c.at("q").number();
    auto ns = integer_sweep(c.at("n"));
    Output o{"extremal_widths", "extremal.widths", {{"n", "value", "formula"}, {}}, PlotSpec{"n", {"value"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = widths(psi, std::uint64_t(ns[i]), p, q, false);
        return Row{ns[i], r.value, r.formula};
    });
    return o;
}

inline Output extremal_kwidth(const Node& c, const Context&)
{
    auto psi = parse_system(c.at("system"));
    std::optional<double> q;
    if (c.has("q")) q = c.at("q").number();
    auto rows = kolmogorov_width_table(psi, c.at("p").number(), std::size_t(c.at("levels").integer()), q);
    Output o{"extremal_kwidth", "extremal.kolmogorov_width_table",
             {{"n", "m_lo", "m_hi", "value", "best_approx", "region_sum"}, {}}, PlotSpec{"n", {"value"}}};
    for (auto& r : rows)
        o.table.rows.push_back({std::int64_t(r.n), std::int64_t(r.m_lo), std::int64_t(r.m_hi), r.value, r.best_approx, r.region_sum});
    return o;
}

inline Output extremal_nterm(const Node& c, const Context& ctx)
{
    const bool unit = c.boolean("unit", false);
    std::optional<PsiSystem> psi;
    if (!unit) psi = parse_system(c.at("system"));
    const double p = c.at("p").number(), q = c.at("q").number();
    auto ns = integer_sweep(c.at("n"));
    Output o{"extremal_nterm", unit ? "extremal.nterm_unit" : "extremal.nterm",
             {{"n", "value", "s_star", "formula", "error"}, {}}, PlotSpec{"n", {"value"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = unit ? nterm_unit(std::uint64_t(ns[i]), p, q) : nterm(*psi, std::uint64_t(ns[i]), p, q);
        return Row{ns[i], r.value, opt_cell(r.s_star), r.formula, r.error};
    });
    return o;
}

inline Output extremal_constrained(const Node& c, const Context& ctx)
{
    auto psi = parse_system(c.at("system"));
    const double p = c.at("p").number(), q = c.at("q").number();
    auto fam = c.choice("family", {"gamma1", "gamma2"}, "gamma1") == "gamma1" ? block_family::gamma1 : block_family::gamma2;
    auto ns = integer_sweep(c.at("n"));
    Output o{"extremal_constrained", "extremal.constrained_nterm", {{"n", "value", "s_star", "formula"}, {}},
             PlotSpec{"n", {"value"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = constrained_nterm(psi, std::uint64_t(ns[i]), p, q, fam);
        return Row{ns[i], r.value, opt_cell(r.s_star), r.formula};
    });
    return o;
}

inline Output identity(const Node& c, const Context& ctx, bool direct)
{
    auto f = parse_element(c.at("element"));
    auto psi = parse_system(c.at("system"));
    const double p = c.at("p").number();
    auto ns = integer_sweep(c.at("n"));
    Output o{direct ? "identity_direct" : "identity_inverse",
             direct ? "identities.direct_identity_residual" : "identities.inverse_identity_check",
             {{"n", "lhs", "rhs", "residual", "series", "tri_lhs", "tri_rhs", "tri_holds"}, {}}, PlotSpec{"n", {"lhs", "rhs"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        if (ns[i] < 1) fail(errc::parameter_out_of_range, "n must be positive");
        auto r = direct ? direct_identity_residual(f, psi, p, std::size_t(ns[i])) : inverse_identity_check(f, psi, p, std::size_t(ns[i]));
        return Row{ns[i], r.lhs, r.rhs, r.residual, r.series, r.tri_lhs, r.tri_rhs, r.tri_holds};
    });
    return o;
}

inline shift_kind parse_shift(const Node& c)
{
    return c.choice("shift", {"diagonal", "euclidean"}, "diagonal") == "diagonal" ? shift_kind::diagonal : shift_kind::euclidean;
}

inline Output modulus(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    auto ts = sweep(c.at("t"));
    ModulusQuery base;
    base.alpha = c.at("alpha").number();
    base.p = c.at("p").number();
    base.resolution = int(c.integer("resolution", 64));
    base.shift = parse_shift(c);
    Output o{"modulus", "identities.smoothness_modulus", {{"t", "omega"}, {}}, PlotSpec{"t", {"omega"}}};
    o.table.rows = parallel_rows(ts.size(), ctx, [&](std::size_t i) {
        auto q = base;
        q.t = ts[i];
        return Row{ts[i], smoothness_modulus(f, q)};
    });
    return o;
}

inline Output bernstein(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    auto psi = parse_system(c.at("system"));
    const double p = c.at("p").number();
    auto ns = integer_sweep(c.at("n"));
    Output o{"bernstein", "identities.bernstein_check", {{"n", "lhs", "rhs", "eps", "holds"}, {}}, PlotSpec{"n", {"lhs", "rhs"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = bernstein_check(f, psi, p, ns[i]);
        return Row{ns[i], r.lhs, r.rhs, r.eps, r.holds};
    });
    return o;
}

inline Output inverse_bound(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    const double alpha = c.at("alpha").number(), p = c.at("p").number();
    const int res = int(c.integer("resolution", 64));
    auto shift = parse_shift(c);
    auto ns = integer_sweep(c.at("n"));
    Output o{"inverse_bound", "identities.inverse_bound_check",
             {{"n", "lhs", "rhs_exact", "rhs_relaxed", "holds_exact", "holds_relaxed", "ordered"}, {}},
             PlotSpec{"n", {"lhs", "rhs_exact", "rhs_relaxed"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = inverse_bound_check(f, alpha, p, ns[i], res, shift);
        return Row{ns[i], r.lhs, r.rhs_exact, r.rhs_relaxed, r.holds_exact, r.holds_relaxed, r.ordered};
    });
    return o;
}

inline Output jackson_in(const Node& c, const Context& ctx)
{
    auto ls = sweep(c.at("lambda"));
    auto ns = integer_sweep(c.at("n"));
    std::optional<DiscreteMeasure> mu;
    if (c.has("measure")) {
        auto m = c.at("measure");
        std::vector<std::pair<std::int64_t, double>> atoms;
        auto as = m.at("atoms");
        for (std::size_t i = 0; i < as.size(); ++i) atoms.emplace_back(as.at(i).at(0).integer(), as.at(i).at(1).number());
        mu = DiscreteMeasure::on_grid(m.number("tau", pi), m.at("grid").integer(), std::move(atoms));
    }
    const double tau = c.number("tau", pi);
    std::vector<std::pair<double, std::int64_t>> jobs;
    for (double l : ls)
        for (auto n : ns) jobs.emplace_back(l, n);
    Output o{"jackson_In", mu ? "jackson.In_integral_discrete" : "jackson.In_integral_sine",
             {{"lambda", "n", "value", "nu", "quad_error", "certified"}, {}}, PlotSpec{"n", {"value"}}};
    o.table.rows = parallel_rows(jobs.size(), ctx, [&](std::size_t i) {
        auto [l, n] = jobs[i];
        auto r = mu ? In_integral_discrete(n, l, *mu) : In_integral_sine(n, l, tau);
        return Row{l, n, r.value, r.nu ? Cell(*r.nu) : Cell(), r.quad_error, r.certified};
    });
    return o;
}

inline Output jackson_sigma(const Node& c, const Context& ctx)
{
    auto ls = sweep(c.at("lambda"));
    const double rtol = ctx.tol.value_or(c.number("rtol", 1e-10));
    const auto max_terms = c.integer("max_terms", 1 << 15);
    Output o{"jackson_sigma", "jackson.sigma_series", {{"lambda", "value", "error", "terms"}, {}}, PlotSpec{"lambda", {"value"}}};
    o.table.rows = parallel_rows(ls.size(), ctx, [&](std::size_t i) {
        auto r = sigma_series(ls[i], rtol, max_terms);
        return Row{ls[i], r.value, r.error, std::int64_t(r.terms)};
    });
    return o;
}

inline Output jackson_check(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    const double alpha = c.at("alpha").number(), p = c.at("p").number();
    const int res = int(c.integer("resolution", 64));
    const bool with_sigma = c.boolean("sigma", false);
    auto ns = integer_sweep(c.at("n"));
    Output o{"jackson_check", "jackson.jackson_checks",
             {{"n", "lambda", "lhs", "In", "rhs_integral", "omega_pi_n", "const_In", "const_integer", "bound_simple", "sigma", "holds_integral",
               "holds_In", "holds_integer", "holds_simple"},
              {}},
             PlotSpec{"n", {"lhs", "rhs_integral"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = jackson_checks(f, alpha, p, ns[i], res, with_sigma);
        return Row{ns[i], r.lambda, r.lhs, r.In, r.rhs_integral, r.omega_pi_n, r.const_In,
                   r.const_integer ? Cell(*r.const_integer) : Cell(), r.bound_simple, r.sigma ? Cell(*r.sigma) : Cell(),
                   r.holds_integral, r.holds_In, r.holds_integer, r.holds_simple};
    });
    return o;
}

inline Output jackson_cnap(const Node& c, const Context& ctx)
{
    auto ns = integer_sweep(c.at("n"));
    const double alpha = c.at("alpha").number(), p = c.at("p").number(), tau = c.number("tau", pi);
    const int atoms = int(c.integer("atoms", 3));
    const auto grid = c.integer("grid", 64);
    const int starts = int(c.integer("starts", 4));
    Output o{"jackson_cnap", "jackson.cnap_upper_bound", {{"n", "value", "sine_value", "atoms_used"}, {}},
             PlotSpec{"n", {"value", "sine_value"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto r = cnap_upper_bound(ns[i], alpha, p, tau, atoms, grid, starts);
        return Row{ns[i], r.value, r.sine_value, std::int64_t(r.measure ? r.measure->atoms().size() : 0)};
    });
    return o;
}

inline std::vector<std::pair<std::string, ConvexDecayFunction>> parse_functions(const Node& c)
{
    std::vector<std::pair<std::string, ConvexDecayFunction>> out;
    auto add = [&](const Node& n) {
        auto f = parse_decay_function(n);
        out.emplace_back(n.str("name", f.tag()), std::move(f));
    };
    if (c.has("functions")) {
        auto fs = c.at("functions");
        for (std::size_t i = 0; i < fs.size(); ++i) add(fs.at(i));
    } else {
        add(c.at("function"));
    }
    return out;
}

inline Output classify_cmd(const Node& c, const Context& ctx)
{
    auto fs = parse_functions(c);
    const double T = c.number("T", 1e4);
    const auto points = c.integer("points", 121);
    Output o{"classify", "func_classes.classify",
             {{"function", "label", "mu_min", "mu_max", "ratio_min", "ratio_max", "delta2_K", "mu_trend", "alpha_trend", "convex",
               "in_B"},
              {}},
             std::nullopt};
    o.table.rows = parallel_rows(fs.size(), ctx, [&](std::size_t i) {
        auto l = classify(fs[i].second, T, std::size_t(points));
        return Row{fs[i].first, std::string(class_label_name(l.label)), l.mu_min, l.mu_max, l.ratio_min, l.ratio_max, l.delta2_K,
                   std::string(trend_name(l.mu_trend.dir)), std::string(trend_name(l.alpha_trend.dir)), l.convex, l.in_B};
    });
    return o;
}

inline Output order_cmd(const Node& c, const Context& ctx)
{
    auto reg = parse_regime(c.at("regime"));
    auto psi = parse_decay_function(c.at("function"));
    OrderOptions opt;
    opt.T = c.number("T", opt.T);
    opt.t0 = c.number("t0", opt.t0);
    auto ns = integer_sweep(c.at("n"));
    Output o{"order", "func_classes.order_formula", {{"n", "value", "branch", "exact"}, {}}, PlotSpec{"n", {"value"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        auto v = order_formula(reg, psi, std::uint64_t(ns[i]), opt);
        return Row{ns[i], v.value, v.branch, v.exact};
    });
    return o;
}

inline Output ratio_cmd(const Node& c, const Context& ctx)
{
    auto reg = parse_regime(c.at("regime"));
    auto rule = parse_rule(c.at("function"));
    auto psi = ConvexDecayFunction::of(rule);
    OrderOptions opt;
    opt.T = c.number("T", opt.T);
    opt.t0 = c.number("t0", opt.t0);
    const auto budget = std::uint64_t(c.integer("budget", 1 << 22));
    auto ns = integer_sweep(c.at("n"));
    std::vector<std::uint64_t> un(ns.begin(), ns.end());
    auto pairs = parallel_map<std::pair<double, double>>(un.size(), ctx.jobs, [&](std::size_t i) {
        return std::pair{exact_values(reg, rule, {un[i]}, budget).value[0], order_values(reg, psi, {un[i]}, opt).value[0]};
    });
    ValueSeries ex{reg, un, {}}, od{reg, un, {}};
    for (auto& [a, b] : pairs) {
        ex.value.push_back(a);
        od.value.push_back(b);
    }
    auto rep = ratio_validation(ex, od);
    Output o{"ratio", "func_classes.ratio_validation", {{"n", "exact", "order", "ratio"}, {}}, PlotSpec{"n", {"exact", "order"}}};
    for (std::size_t i = 0; i < un.size(); ++i) o.table.rows.push_back({ns[i], ex.value[i], od.value[i], rep.ratios[i]});
    o.summary["min_ratio"] = rep.min_ratio;
    o.summary["max_ratio"] = rep.max_ratio;
    o.summary["bounded"] = rep.bounded(c.number("C", 10.0));
    return o;
}

inline std::vector<MultiplierMethod> parse_methods(const Node& c, std::vector<double>& params)
{
    auto kind = c.choice("method", {"partial", "fejer", "abel_poisson", "tap"});
    std::vector<MultiplierMethod> ms;
    if (kind == "partial" || kind == "fejer") {
        for (auto n : integer_sweep(c.at("n"))) {
            ms.push_back(kind == "partial" ? MultiplierMethod::partial(n) : MultiplierMethod::fejer(n));
            params.push_back(double(n));
        }
        return ms;
    }
    for (double rho : sweep(c.at("rho"))) {
        ms.push_back(kind == "tap" ? MultiplierMethod::tap(rho, int(c.integer("r", 1))) : MultiplierMethod::abel_poisson(rho, c.number("s", 1.0)));
        params.push_back(rho);
    }
    return ms;
}

inline Output linmethod_apply(const Node& c, const Context&)
{
    auto f = parse_element(c.at("element"));
    std::vector<double> params;
    auto ms = parse_methods(c, params);
    if (ms.size() != 1) fail(errc::invalid_descriptor, "linmethod apply takes a single method parameter");
    auto g = apply_method(f, ms[0]);
    auto cols = index_columns(f.dim());
    cols.push_back("re");
    cols.push_back("im");
    Output o{"linmethod_apply", "linmethods.apply_method", {cols, {}}, std::nullopt};
    for (auto& [k, v] : g) {
        Row row;
        push_index(row, k);
        row.emplace_back(v.real());
        row.emplace_back(v.imag());
        o.table.rows.push_back(std::move(row));
    }
    o.summary["method"] = ms[0].describe();
    return o;
}

inline Output linmethod_error(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    const double p = c.at("p").number();
    std::vector<double> params;
    auto ms = parse_methods(c, params);
    Output o{"linmethod_error", "linmethods.method_error", {{"param", "method", "error"}, {}}, PlotSpec{"param", {"error"}}};
    o.table.rows = parallel_rows(ms.size(), ctx, [&](std::size_t i) {
        return Row{params[i], ms[i].describe(), method_error(f, ms[i], p)};
    });
    return o;
}

inline Output linmethod_rate(const Node& c, const Context& ctx)
{
    auto f = parse_element(c.at("element"));
    auto fam_s = c.choice("family", {"fejer", "tap", "abel_poisson"});
    auto fam = fam_s == "fejer" ? rate_family::fejer : fam_s == "tap" ? rate_family::tap : rate_family::abel_poisson;
    const int order = int(c.integer("order", 1));
    auto omega = c.has("majorant") ? parse_majorant(c.at("majorant")) : Majorant::power(1.0);
    const double p = c.at("p").number();
    auto sw = sweep(c.at("sweep"));
    auto parts = parallel_map<RateRow>(sw.size(), ctx.jobs, [&](std::size_t i) {
        return method_rate_report(f, fam, order, omega, p, {sw[i]}).rows[0];
    });
    Output o{"linmethod_rate", "linmethods.method_rate_report",
             {{"param", "error", "error_ref", "error_ratio", "dual", "dual_ref", "dual_ratio"}, {}},
             PlotSpec{"param", {"error_ratio", "dual_ratio"}}};
    for (auto& r : parts) o.table.rows.push_back({r.param, r.error, r.error_ref, r.error_ratio(), r.dual, r.dual_ref, r.dual_ratio()});
    return o;
}

inline Output oracle_cmd(const Node& c, const Context& ctx)
{
    auto psi = parse_system(c.at("system"));
    const auto task = c.choice("task", {"gamma_error", "nterm"}) == "nterm" ? oracle_task::nterm : oracle_task::gamma_error;
    const double p = c.at("p").number(), q = c.at("q").number();
    std::uint64_t N = 0;
    if (c.has("size")) N = std::uint64_t(c.at("size").integer());
    else if (psi.finite()) N = psi.entries().size();
    else c.bad("size", "required for infinite systems");
    auto moduli = rearrangement(psi, N);
    OracleOptions base;
    base.restarts = std::size_t(c.integer("restarts", std::int64_t(base.restarts)));
    base.seed = ctx.seed;
    auto ns = integer_sweep(c.at("n"));
    Output o{"oracle", "oracle.diagonal_norm_oracle", {{"n", "closed_form", "oracle", "rel_gap"}, {}}, PlotSpec{"n", {"closed_form", "oracle"}}};
    o.table.rows = parallel_rows(ns.size(), ctx, [&](std::size_t i) {
        const auto n = std::uint64_t(ns[i]);
        std::vector<bool> excluded(moduli.size(), false);
        double closed;
        auto opt = base;
        opt.seed = ctx.seed + n;
        if (task == oracle_task::gamma_error) {
            if (n > moduli.size()) fail(errc::parameter_out_of_range, "n exceeds the oracle size");
            for (std::uint64_t j = 0; j < n; ++j) excluded[j] = true;
            closed = ellipsoid_gamma_error(psi, IndexSet::of(psi.dim(), top_indices(psi, n)), p, q).value;
        } else {
            closed = nterm(psi, n, p, q).value;
        }
        const double v = diagonal_norm_oracle(moduli, excluded, std::size_t(n), p, q, task, opt);
        return Row{ns[i], closed, v, closed > 0 ? (closed - v) / closed : 0.0};
    });
    return o;
}

inline const std::map<std::string, Runner>& registry()
{
    static const std::map<std::string, Runner> r = {
        {"charseq", charseq},
        {"rearrange", rearrange},
        {"region", region},
        {"count", count},
        {"extremal gamma", extremal_gamma},
        {"extremal widths", extremal_widths},
        {"extremal kwidth", extremal_kwidth},
        {"extremal nterm", extremal_nterm},
        {"extremal constrained", extremal_constrained},
        {"identity direct", [](const Node& c, const Context& x) { return identity(c, x, true); }},
        {"identity inverse", [](const Node& c, const Context& x) { return identity(c, x, false); }},
        {"modulus", modulus},
        {"bernstein", bernstein},
        {"inverse-bound", inverse_bound},
        {"jackson In", jackson_in},
        {"jackson sigma", jackson_sigma},
        {"jackson check", jackson_check},
        {"jackson cnap", jackson_cnap},
        {"classify", classify_cmd},
        {"order", order_cmd},
        {"ratio", ratio_cmd},
        {"linmethod apply", linmethod_apply},
        {"linmethod error", linmethod_error},
        {"linmethod rate", linmethod_rate},
        {"oracle", oracle_cmd},
    };
    return r;
}

} // namespace detail

inline std::vector<std::string> commands()
{
    std::vector<std::string> out;
    for (auto& [k, v] : detail::registry()) out.push_back(k);
    return out;
}

inline Output run(const std::string& command, const json& config, const Context& ctx, const std::filesystem::path& base = {})
{
    auto it = detail::registry().find(command);
    if (it == detail::registry().end()) fail(errc::invalid_descriptor, "unknown command '" + command + "'");
    if (!config.is_object()) fail(errc::invalid_descriptor, "config: expected an object");
    if (config.contains("command") && config["command"] != command)
        fail(errc::invalid_descriptor, "command: descriptor is for '" + config["command"].dump() + "', not '" + command + "'");
    return it->second(Node(config, "", base), ctx);
}

inline std::string config_hash(const json& config)
{
    const auto s = config.dump();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.data(), s.size())));
    return buf;
}

inline json manifest(const std::string& command, const json& config, const Context& ctx, const Output& o,
                     const std::vector<std::string>& files)
{
    json m;
    m["version"] = version;
    m["command"] = command;
    m["operation"] = o.operation;
    m["config-hash"] = config_hash(config);
    m["tolerances"] = {{"tol", ctx.tol ? json(*ctx.tol) : json(nullptr)}, {"group_rtol", group_rtol}, {"quad_tol", quad_tol},
                       {"oracle_shrink", oracle_shrink}};
    m["seed"] = ctx.seed;
    m["config"] = config;
    m["rows"] = o.table.rows.size();
    m["outputs"] = files;
    if (!o.summary.empty()) m["summary"] = o.summary;
    return m;
}

// Writes the table (csv or json), the optional svg and manifest.json into dir; returns the file names.
inline std::vector<std::string> write_outputs(const std::filesystem::path& dir, const std::string& command, const json& config,
                                              const Context& ctx, const Output& o, const std::string& format, bool plot)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(errc::invalid_descriptor, "out: cannot create " + dir.string());
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) fail(errc::invalid_descriptor, "out: cannot write " + (dir / name).string());
        files.push_back(name);
        return f;
    };
    {
        auto f = open(o.name + (format == "json" ? ".json" : ".csv"));
        if (format == "json") write_json(f, o);
        else write_csv(f, o.table);
    }
    if (plot && o.plot) {
        auto f = open(o.name + ".svg");
        write_svg(f, o.table, *o.plot);
    }
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    if (!mf) fail(errc::invalid_descriptor, "out: cannot write manifest");
    mf << manifest(command, config, ctx, o, files).dump(2) << "\n";
    return files;
}

} // namespace spapprox::cli

#endif // SPAPPROX_CLI_HPP
