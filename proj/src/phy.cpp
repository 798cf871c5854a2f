#include "ehcr/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ehcr/error.hpp"

namespace ehcr::phy {

namespace {

// Acklam's rational approximation of the standard normal quantile,
// relative error below 1.2e-9 over the whole domain.
double normal_quantile_approx(double p)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low)
    {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
               / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low)
    {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
               / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
           / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

void SensingSpec::validate() const
{
    if (!(p_f > 0.0 && p_f < p_d && p_d < 1.0))
        throw std::invalid_argument("sensing targets require 0 < p_f < p_d < 1");
    if (!(gamma > 0.0) || !(f_s > 0.0) || !(e_s_sample >= 0.0))
        throw std::invalid_argument("sensing front end requires gamma > 0, f_s > 0, e_s_sample >= 0");
}

void PowerParams::validate() const
{
    for (double v : {p_b, c1, c2, c3, n0, b, kappa, t_est})
    {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("power parameters must be positive and finite");
    }
    if (!(c4 >= 0.0) || !(p_ckt >= 0.0) || !(p_est >= 0.0))
        throw std::invalid_argument("c4, p_ckt and p_est must be non-negative");
    if (!(p_b < c1))
        throw std::invalid_argument("bit error rate must be below c1");
}

PowerParams PowerParams::with_estimation(double est_fraction, int pbar_m, int pilot_symbols)
{
    PowerParams pp;
    pp.t_est = pilot_symbols / pp.b;
    pp.p_est = est_fraction * transmit_power(1.0, pbar_m, pp);
    return pp;
}

RateTable RateTable::exponential_equiprobable(int k)
{
    if (k < 1)
        throw std::invalid_argument("rate table needs at least one region");
    std::vector<double> bounds;
    for (int j = 1; j < k; ++j)
        bounds.push_back(-std::log1p(-static_cast<double>(j) / k));
    return from_boundaries(std::move(bounds));
}

RateTable RateTable::from_boundaries(std::vector<double> bounds)
{
    RateTable rt;
    rt.k = static_cast<int>(bounds.size()) + 1;
    rt.boundaries = std::move(bounds);
    for (std::size_t j = 0; j < rt.boundaries.size(); ++j)
    {
        if (!(rt.boundaries[j] > 0.0) || (j > 0 && !(rt.boundaries[j] > rt.boundaries[j - 1])))
            throw std::invalid_argument("region boundaries must be positive and strictly ascending");
    }
    for (int r = 0; r < rt.k; ++r)
    {
        rt.constellations.push_back(1 << (2 * r));
        const double lo = r == 0 ? 0.0 : rt.boundaries[r - 1];
        const double hi = r == rt.k - 1 ? std::numeric_limits<double>::infinity()
                                        : rt.boundaries[r];
        const double s_lo = std::exp(-lo);
        const double s_hi = std::isinf(hi) ? 0.0 : std::exp(-hi);
        const double prob = s_lo - s_hi;
        rt.region_probs.push_back(prob);
        // E[g; lo <= g < hi] = (lo + 1) e^-lo - (hi + 1) e^-hi
        const double partial = (lo + 1.0) * s_lo - (std::isinf(hi) ? 0.0 : (hi + 1.0) * s_hi);
        rt.region_rep_gain.push_back(partial / prob);
    }
    return rt;
}

void RateTable::validate() const
{
    if (k < 1 || static_cast<int>(boundaries.size()) != k - 1
        || static_cast<int>(constellations.size()) != k
        || static_cast<int>(region_probs.size()) != k
        || static_cast<int>(region_rep_gain.size()) != k)
        throw std::invalid_argument("rate table sizes inconsistent with K");
    double sum = 0.0;
    for (double p : region_probs)
        sum += p;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("region probabilities must sum to 1");
    if (constellations.front() != 1)
        throw std::invalid_argument("region 1 must be silent (M_1 = 1)");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("Q^-1 defined on (0, 1) only");
    double x = -normal_quantile_approx(p);
    // Newton on Q(x) - p; Q'(x) = -phi(x).
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (phi > 0.0)
        x += (q_function(x) - p) / phi;
    return x;
}

std::int64_t min_sensing_samples(const SensingSpec& spec, double h)
{
    if (!(h >= 0.0))
        throw std::invalid_argument("sensing gain must be non-negative");
    return min_sensing_samples(q_inverse(spec.p_f), q_inverse(spec.p_d), spec.gamma * h);
}

std::int64_t min_sensing_samples(double q_inv_pf, double q_inv_pd, double snr)
{
    if (!(snr > 0.0))
        throw UnsensableChannel("zero sensing SNR: detector targets unreachable");
    // r = (1 + snr)^(-1/3); 1 - r evaluated without cancellation.
    const double log_r = -std::log1p(snr) / 3.0;
    const double r = std::exp(log_r);
    const double one_minus_r = -std::expm1(log_r);
    const double p = (r * q_inv_pf - q_inv_pd) / one_minus_r;
    const double root = p + std::sqrt(p * p + 4.0);
    const double samples = std::ceil(root * root / 36.0);
    if (!std::isfinite(samples) || samples > 0x1.0p53)
        throw UnsensableChannel("sample count overflow at sensing SNR " + std::to_string(snr));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(samples));
}

double min_sensing_time(std::int64_t samples, double f_s)
{
    if (samples < 1 || !(f_s > 0.0))
        throw std::invalid_argument("sensing time needs samples >= 1 and f_s > 0");
    return static_cast<double>(samples) / f_s;
}

double sensing_energy(std::int64_t samples, double e_per_sample)
{
    if (samples < 1 || !(e_per_sample >= 0.0))
        throw std::invalid_argument("sensing energy needs samples >= 1 and e >= 0");
    return static_cast<double>(samples) * e_per_sample;
}

double transmit_power(double g, int m, const PowerParams& pp)
{
    if (!(g > 0.0))
        throw NoTransmission("zero power gain: no transmission");
    if (m < 1)
        throw std::invalid_argument("constellation size must be >= 1");
    const double bits = std::log2(static_cast<double>(m));
    const double shape = std::exp2(pp.c3 * bits) - pp.c4;
    if (shape <= 0.0)
        return 0.0;
    return (-std::log(pp.p_b / pp.c1) / pp.c2) * shape * pp.n0 * pp.b / g;
}

TxEnergies transmission_energies(double p_tr, double t_tr, const PowerParams& pp)
{
    if (!(p_tr >= 0.0) || !(t_tr >= 0.0))
        throw std::invalid_argument("transmission energies need p_tr >= 0 and t_tr >= 0");
    return {p_tr * t_tr, (pp.p_ckt + pp.kappa * p_tr) * t_tr};
}

double estimation_energy(const PowerParams& pp) { return pp.p_est * pp.t_est; }

int gain_region(double g, const RateTable& rt)
{
    if (!(g >= 0.0))
        throw std::invalid_argument("power gain must be non-negative");
    int region = 1;
    for (double bound : rt.boundaries)
    {
        if (g < bound)
            break;
        ++region;
    }
    return region;
}

}  // namespace ehcr::phy
