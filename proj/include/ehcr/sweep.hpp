#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "ehcr/config.hpp"
#include "ehcr/engine.hpp"

namespace ehcr {

/// One CSV row: a grid point and its Monte Carlo summary.
struct ResultRow
{
    std::vector<std::string> point; ///< axis values, sweep order
    PolicyKind policy = PolicyKind::myopic;
    double mean_efficiency = 0.0;
    double stderr_efficiency = 0.0;
    double collision_rate = 0.0;
    double outage_rate = 0.0;
    double unsensable_rate = 0.0;
    std::uint64_t iterations = 0;
    std::uint64_t seed = 0;
};

ResultRow make_row(const std::vector<std::string>& point, const SimConfig& cfg, const MonteCarloResult& r);

/// Runs every grid point in sweep order. Every point reuses the master seed,
/// so points are compared under common random numbers. `progress` is called
/// after each point.
std::vector<ResultRow> run_sweep(const SweepSpec& spec,
                                 const std::function<void(std::size_t, const ResultRow&)>& progress = {});

/// Columns: swept keys..., policy, mean_eff_bps_hz, stderr, collision_rate,
/// outage_rate, unsensable_rate, iters, seed.
void write_csv(std::ostream& out, const SweepSpec& spec, const std::vector<ResultRow>& rows);

std::string csv_header(const SweepSpec& spec);

}  // namespace ehcr
