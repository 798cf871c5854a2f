#pragma once

#include <cstdint>
#include <vector>

namespace ehcr::phy {

/// Energy-detector operating point and sampling front end.
struct SensingSpec
{
    double p_d = 0.9;            ///< target probability of detection
    double p_f = 0.1;            ///< target probability of false alarm
    double gamma = 1.0;          ///< linear PU SNR at the SU (0 dB)
    double f_s = 2e5;            ///< sampling rate [Hz]
    double e_s_sample = 0.11e-6; ///< sensing energy per sample [J]

    /// Throws std::invalid_argument unless 0 < p_f < p_d < 1 and the
    /// physical quantities are in range.
    void validate() const;
};

/// Constellation-fit and energy model of the SU transmitter.
struct PowerParams
{
    double p_b = 1e-3;
    double c1 = 2.0;
    double c2 = 1.5;
    double c3 = 1.0;
    double c4 = 1.0;
    double n0 = 2e-10;  ///< noise PSD [W/Hz]
    double b = 2e5;     ///< bandwidth [Hz]
    double p_ckt = 0.188;
    double kappa = 1.9;
    double p_est = 0.0; ///< channel-estimation power [W]
    double t_est = 0.0; ///< estimation time per channel [s]

    void validate() const;
    bool operator==(const PowerParams&) const = default;

    /// Table defaults with the estimation power derived from the
    /// transmitter: p_est = est_fraction * P(g = 1, M = pbar_m) and
    /// t_est = pilot_symbols / b.
    static PowerParams with_estimation(double est_fraction = 0.2, int pbar_m = 16,
                                       int pilot_symbols = 14);
};

/// Partition of the SU-pair power gain into K regions, one constellation
/// per region (M_k = 4^(k-1); region 1 means silence).
struct RateTable
{
    int k = 0;
    std::vector<double> boundaries;      ///< K-1 ascending thresholds
    std::vector<int> constellations;     ///< M_1..M_K
    std::vector<double> region_probs;    ///< P(g in G_k) under Exp(1)
    std::vector<double> region_rep_gain; ///< E[g | g in G_k] under Exp(1)

    /// Equal-probability partition of the unit-mean exponential gain law.
    static RateTable exponential_equiprobable(int k);

    /// Arbitrary thresholds; probabilities and representative gains still
    /// follow the unit-mean exponential law.
    static RateTable from_boundaries(std::vector<double> boundaries);

    /// Spectral efficiency log2(M_k) of 1-based region `region`.
    double efficiency(int region) const { return 2.0 * (region - 1); }

    int constellation(int region) const { return constellations.at(region - 1); }

    void validate() const;
};

/// Gaussian tail Q(x).
double q_function(double x);

/// Inverse of Q on (0, 1): rational approximation plus one Newton step.
double q_inverse(double p);

/// Minimum energy-detector sample count meeting (p_d, p_f) at sensing gain h.
/// Throws UnsensableChannel when gamma * h is zero or the count overflows.
std::int64_t min_sensing_samples(const SensingSpec& spec, double h);

/// Same count from precomputed Q^-1(p_f), Q^-1(p_d) and the sensing SNR
/// gamma * h.
std::int64_t min_sensing_samples(double q_inv_pf, double q_inv_pd, double snr);

double min_sensing_time(std::int64_t samples, double f_s);

double sensing_energy(std::int64_t samples, double e_per_sample);

/// Transmit power for constellation m at gain g. Throws NoTransmission for
/// g <= 0.
double transmit_power(double g, int m, const PowerParams& pp);

struct TxEnergies
{
    double e_tr = 0.0;
    double e_ckt = 0.0;

    double total() const { return e_tr + e_ckt; }
};

TxEnergies transmission_energies(double p_tr, double t_tr, const PowerParams& pp);

/// Energy to estimate one channel: p_est * t_est.
double estimation_energy(const PowerParams& pp);

/// 1-based region of gain g; lower boundaries belong to the upper region.
int gain_region(double g, const RateTable& rt);

}  // namespace ehcr::phy
