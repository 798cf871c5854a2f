#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ehcr/config.hpp"
#include "ehcr/error.hpp"
#include "ehcr/presets.hpp"
#include "ehcr/sweep.hpp"

namespace {

enum Exit
{
    exit_ok = 0,
    exit_config = 2,
    exit_runtime = 3,
    exit_io = 4,
};

struct RunOptions
{
    std::vector<std::string> sets;
    std::string out;
    long long seed = -1;
    long long iters = -1;
    long long threads = -1;
    bool quiet = false;
};

void apply_overrides(ehcr::SweepSpec& spec, const RunOptions& o)
{
    for (const auto& kv : o.sets)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ehcr::ConfigError("--set", "expected key=value, got '" + kv + "'");
        spec.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed >= 0)
        spec.set("sim.seed", std::to_string(o.seed));
    if (o.iters >= 0)
        spec.set("sim.iterations", std::to_string(o.iters));
    if (o.threads >= 0)
        spec.set("sim.threads", std::to_string(o.threads));
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text << std::flush;
        if (!std::cout)
            throw ehcr::IoError("cannot write to standard output");
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw ehcr::IoError("cannot open " + path + " for writing");
    f << text;
    f.close();
    if (!f)
        throw ehcr::IoError("error writing " + path);
}

int run(const ehcr::SweepSpec& spec, const RunOptions& o)
{
    const auto n = spec.grid_size();
    const auto t0 = std::chrono::steady_clock::now();
    auto progress = [&](std::size_t i, const ehcr::ResultRow& r) {
        if (!o.quiet)
            std::fprintf(stderr, "[%zu/%zu] %s mean %.6f +- %.6f\n", i + 1, n,
                         std::string(ehcr::to_string(r.policy)).c_str(), r.mean_efficiency,
                         r.stderr_efficiency);
    };
    const auto rows = ehcr::run_sweep(spec, progress);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    ehcr::write_csv(csv, spec, rows);
    write_output(o.out, csv.str());

    std::size_t best = 0, worst = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].mean_efficiency > rows[best].mean_efficiency)
            best = i;
        if (rows[i].mean_efficiency < rows[worst].mean_efficiency)
            worst = i;
    }
    auto label = [&](std::size_t i) {
        std::string s;
        for (std::size_t a = 0; a < spec.axes.size(); ++a)
            s += (a ? " " : "") + spec.axes[a].key + "=" + rows[i].point[a];
        return s.empty() ? std::string("(single point)") : s;
    };
    std::fprintf(stderr, "grid points: %zu\nruntime: %.2f s\nbest:  %.6f bits/s/Hz at %s\nworst: %.6f bits/s/Hz at %s\n",
                 rows.size(), secs, rows[best].mean_efficiency, label(best).c_str(),
                 rows[worst].mean_efficiency, label(worst).c_str());
    return exit_ok;
}

void add_run_options(CLI::App* cmd, RunOptions& o)
{
    cmd->add_option("--set", o.sets, "Override a key, e.g. --set sensing.p_col=0.2")->type_name("KEY=VALUE");
    cmd->add_option("--seed", o.seed, "Master seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--iters", o.iters, "Monte Carlo replications")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", o.out, "CSV output path (default: stdout)");
    cmd->add_flag("--quiet", o.quiet, "No per-point progress");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy-harvesting cognitive radio simulator"};
    app.require_subcommand(1);

    RunOptions sim_opts;
    std::string sim_config;
    auto* simulate = app.add_subcommand("simulate", "Run a configuration or sweep file");
    simulate->add_option("--config", sim_config, "Configuration file")->required();
    add_run_options(simulate, sim_opts);

    RunOptions preset_opts;
    std::string preset_name;
    bool full_scale = false;
    bool emit = false;
    auto* preset = app.add_subcommand("preset", "Run a figure preset");
    preset->add_option("name", preset_name, "fig1a, fig1b, fig2, fig3 or fig4")->required();
    add_run_options(preset, preset_opts);
    preset->add_flag("--full-scale", full_scale, "Use 10^5 replications");
    preset->add_flag("--emit", emit, "Print the preset as a configuration file and exit");

    std::string val_config;
    std::vector<std::string> val_sets;
    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    validate->add_option("--config", val_config, "Configuration file")->required();
    validate->add_option("--set", val_sets, "Override a key")->type_name("KEY=VALUE");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try
    {
        if (*simulate)
        {
            auto spec = ehcr::load_sweep(sim_config);
            apply_overrides(spec, sim_opts);
            return run(spec, sim_opts);
        }
        if (*preset)
        {
            auto spec = ehcr::emit_figure_preset(preset_name);
            if (full_scale)
                spec.set("sim.iterations", "100000");
            apply_overrides(spec, preset_opts);
            if (emit)
            {
                for (std::size_t i = 0; i < spec.grid_size(); ++i)
                    spec.materialize_index(i);
                write_output(preset_opts.out, ehcr::serialize(spec));
                return exit_ok;
            }
            return run(spec, preset_opts);
        }
        if (*validate)
        {
            auto spec = ehcr::load_sweep(val_config);
            RunOptions o;
            o.sets = val_sets;
            apply_overrides(spec, o);
            for (std::size_t i = 0; i < spec.grid_size(); ++i)
                spec.materialize_index(i);
            std::printf("ok: %zu grid point%s\n", spec.grid_size(), spec.grid_size() == 1 ? "" : "s");
            return exit_ok;
        }
    }
    catch (const ehcr::ConfigError& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    }
    catch (const ehcr::IoError& e)
    {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return exit_io;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
    return exit_runtime;
}
