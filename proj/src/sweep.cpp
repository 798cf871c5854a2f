#include "ehcr/sweep.hpp"

namespace ehcr {

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

ResultRow make_row(const std::vector<std::string>& point, const SimConfig& cfg, const MonteCarloResult& r)
{
    ResultRow row;
    row.point = point;
    row.policy = cfg.policy;
    row.mean_efficiency = r.mean_efficiency;
    row.stderr_efficiency = r.stderr_efficiency;
    row.collision_rate = r.rate(r.totals.collisions);
    row.outage_rate = r.rate(r.totals.outages);
    row.unsensable_rate = r.rate(r.totals.unsensable);
    row.iterations = r.iterations;
    row.seed = cfg.seed;
    return row;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec,
                                 const std::function<void(std::size_t, const ResultRow&)>& progress)
{
    const std::size_t n = spec.grid_size();

    // Validate the whole grid before spending time on any point.
    std::vector<SimConfig> configs;
    configs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        configs.push_back(spec.materialize_index(i));

    std::vector<ResultRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        rows.push_back(make_row(spec.point(i), configs[i], monte_carlo(configs[i])));
        if (progress)
            progress(i, rows.back());
    }
    return rows;
}

std::string csv_header(const SweepSpec& spec)
{
    std::string h;
    for (const auto& a : spec.axes)
        h += csv_field(a.key) + ",";
    return h + "policy,mean_eff_bps_hz,stderr,collision_rate,outage_rate,unsensable_rate,iters,seed";
}

void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows)
{
    out << csv_header(spec) << '\n';
    for (const auto& r : rows)
    {
        for (const auto& v : r.point)
            out << csv_field(v) << ',';
        out << to_string(r.policy) << ',' << format_number(r.mean_efficiency) << ','
            << format_number(r.stderr_efficiency) << ',' << format_number(r.collision_rate) << ','
            << format_number(r.outage_rate) << ',' << format_number(r.unsensable_rate) << ','
            << r.iterations << ',' << r.seed << '\n';
    }
}

}  // namespace ehcr
