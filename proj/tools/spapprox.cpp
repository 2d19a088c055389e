#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spapprox/cli.hpp"

using namespace spapprox;

namespace {

// key.path=value; the value is read as JSON, falling back to a plain string
void apply_param(json& config, const std::string& kv)
{
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) fail(errc::invalid_descriptor, "--param expects key=value, got '" + kv + "'");
    std::string ptr;
    std::string key = kv.substr(0, eq);
    for (std::size_t s = 0, e; s <= key.size(); s = e + 1) {
        e = key.find('.', s);
        if (e == std::string::npos) e = key.size();
        ptr += "/" + key.substr(s, e - s);
    }
    const std::string text = kv.substr(eq + 1);
    json v;
    try {
        v = json::parse(text);
    } catch (const json::parse_error&) {
        v = text;
    }
    config[json::json_pointer(ptr)] = v;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Approximation characteristics of psi-systems in the coefficient spaces S^p"};
    app.set_version_flag("--version", std::string(cli::version));
    app.require_subcommand(1);

    std::string config_path, out_dir, format = "csv";
    std::vector<std::string> params;
    bool plot = false, quiet = false;
    unsigned jobs = 1;
    double tol = 0.0;
    std::uint64_t seed = 1;

    auto add_common = [&](CLI::App* a) {
        a->add_option("--config", config_path, "JSON run descriptor")->check(CLI::ExistingFile);
        a->add_option("--param", params, "override a descriptor field, key.path=value (repeatable)");
        a->add_option("--out", out_dir, "output directory for the table, plot and manifest");
        a->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
        a->add_flag("--plot", plot, "also write an SVG polyline plot");
        a->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        a->add_option("--tol", tol, "tolerance override for series evaluation")->check(CLI::PositiveNumber);
        a->add_option("--seed", seed, "seed for oracle restarts");
        a->add_flag("-q,--quiet", quiet, "do not echo the table on stdout");
    };

    std::map<CLI::App*, std::string> leaf;
    std::map<std::string, CLI::App*> groups;
    for (auto& name : cli::commands()) {
        auto sp = name.find(' ');
        if (sp == std::string::npos) {
            auto* a = app.add_subcommand(name, "run " + name);
            add_common(a);
            leaf[a] = name;
            continue;
        }
        auto head = name.substr(0, sp);
        auto& g = groups[head];
        if (!g) {
            g = app.add_subcommand(head, head + " operations");
            g->require_subcommand(1);
        }
        auto* a = g->add_subcommand(name.substr(sp + 1), "run " + name);
        add_common(a);
        leaf[a] = name;
    }

    CLI11_PARSE(app, argc, argv);

    std::string command;
    for (auto& [a, name] : leaf)
        if (a->parsed()) command = name;

    try {
        json config = json::object();
        std::filesystem::path base;
        if (!config_path.empty()) {
            config = read_config(config_path);
            base = std::filesystem::path(config_path).parent_path();
        }
        for (auto& kv : params) apply_param(config, kv);

        cli::Context ctx;
        ctx.jobs = jobs;
        if (tol > 0) ctx.tol = tol;
        ctx.seed = seed;

        auto out = cli::run(command, config, ctx, base);
        if (!out_dir.empty()) cli::write_outputs(out_dir, command, config, ctx, out, format, plot);
        if (!quiet) {
            if (format == "json") cli::write_json(std::cout, out);
            else cli::write_csv(std::cout, out.table);
        }
    } catch (const error& e) {
        std::cerr << "spapprox " << command << ": " << e.what() << "\n";
        return e.code() == errc::invalid_descriptor ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "spapprox " << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
