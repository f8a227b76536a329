#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tdc/density.hpp"

namespace tdc {

// DNL/INL and the equivalent-width family of precision measures.
struct LinearityReport {
    std::vector<double> dnl;  // (W[i] - LSB) / LSB; missing bin => -1
    std::vector<double> inl;  // running sum of dnl
    double lsb_ps = 0.0;
    double dnl_min = 0.0, dnl_max = 0.0, dnl_pkpk = 0.0, dnl_sigma = 0.0;
    double inl_min = 0.0, inl_max = 0.0, inl_pkpk = 0.0, inl_sigma = 0.0;
    double w_eq_ps = 0.0;       // sqrt(sum W^3 / W_total)
    double sigma_eq_ps = 0.0;   // w_eq / sqrt(12)
    double resolution_ps = 0.0; // mean width of tapped (nonzero) bins
};

// Throws std::invalid_argument on an empty or all-zero width vector.
LinearityReport linearity(const std::vector<double>& widths, double clock_period_ps);

// Same metrics from (possibly calibrated, fractional) per-bin counts.
LinearityReport linearity_of_counts(const std::vector<double>& counts, double clock_period_ps);

// nu_i = LSB / W[i] (equivalently 1 / (DNL[i] + 1)). Requires a line without
// missing codes; throws std::invalid_argument on any zero width.
std::vector<double> weights(const std::vector<double>& widths, double clock_period_ps);

// calibrated[i] = raw[i] * nu[i]. Throws on a bin-set size mismatch.
std::vector<double> apply_calibration(const std::vector<std::uint64_t>& raw_counts,
                                      const std::vector<double>& nu);
std::vector<double> apply_calibration(const std::vector<double>& raw_counts,
                                      const std::vector<double>& nu);

// The persisted artifact of the full pipeline: per-bin start, width, weight
// and bin-center fine time, derived from a dedicated high-shot density run.
struct CalibrationTable {
    double clock_period_ps = 0.0;
    double lsb_ps = 0.0;
    std::vector<double> start_ps;
    std::vector<double> width_ps;
    std::vector<double> nu;
    std::vector<double> fine_time_ps;

    int bin_count() const { return static_cast<int>(width_ps.size()); }
};

// Builds the table from folded widths so starts are absolute and the widths
// partition the whole clock period.
CalibrationTable make_calibration_table(const DensityHistogram& hist);

// Bin-center fine time. Throws std::out_of_range for an unknown bin.
double fine_time(int bin, const CalibrationTable& table);

// CSV with '# key=value' metadata then bin,start_ps,width_ps,nu,fine_time_ps.
void write_table_csv(std::ostream& out, const CalibrationTable& table);
CalibrationTable read_table_csv(std::istream& in);

void write_linearity_csv(std::ostream& out, const LinearityReport& report);

}  // namespace tdc
