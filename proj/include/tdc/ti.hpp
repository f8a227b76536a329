#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tdc/calib.hpp"
#include "tdc/line.hpp"

namespace tdc {

struct Timestamp {
    std::int64_t coarse_count = 0;  // whole clock periods
    double fine_time_ps = 0.0;      // in [0, clock_period)

    double absolute_ps(double clock_period_ps) const {
        return static_cast<double>(coarse_count) * clock_period_ps + fine_time_ps;
    }
};

// b - a without forming large absolute times, so intervals survive coarse
// rollover bit-exactly: the coarse difference stays integral and the fine
// difference never leaves sub-period magnitude.
inline double interval_ps(const Timestamp& a, const Timestamp& b, double clock_period_ps) {
    return static_cast<double>(b.coarse_count - a.coarse_count) * clock_period_ps +
           (b.fine_time_ps - a.fine_time_ps);
}

// Wraps a calibrated line for repeated timestamping: the emission profile is
// computed once, each event costs one binary search.
class TimestampChannel {
public:
    TimestampChannel(const Line& line, const CalibrationTable& table, const EncoderConfig& cfg = {});

    // Throws std::out_of_range when the emitted bin is not calibrated.
    Timestamp stamp(double event_time_ps) const;
    double clock_period_ps() const { return line_->clock_period_ps; }
    const CalibrationTable& table() const { return *table_; }

private:
    const Line* line_;
    const CalibrationTable* table_;
    EmissionProfile profile_;
};

struct TiRunConfig {
    std::vector<double> delays_ps;
    int repetitions = 3;
    double jitter_sigma_ps = 0.0;  // applied to each pulse edge independently
    std::uint64_t seed = 0;
    int pairs_per_rep = 1;  // pulse pairs averaged into one TI measurement
};

struct TiPoint {
    double delay_ps = 0.0;
    double mean_dev_ps = 0.0;  // mean(measured - actual) over repetitions
    double rms_ps = 0.0;       // RMS of (measured - actual) over all pairs
};

struct TiReport {
    std::vector<TiPoint> points;
    double global_rms_ps = 0.0;
};

// Time-interval sweep: for each delay, pulse pairs with Gaussian edge jitter
// go through the same channel; TI = difference of the two absolute
// timestamps. Pair bases are spread uniformly over many clock periods.
TiReport run_ti(const TiRunConfig& config, const TimestampChannel& channel);
TiReport run_ti(const TiRunConfig& config, const TimestampChannel& channel_a,
                const TimestampChannel& channel_b);

// CSV: delay_ps,mean_dev_ps,rms_ps with a trailing global RMS header line.
void write_ti_csv(std::ostream& out, const TiReport& report);

std::vector<double> parse_delay_spec(const std::string& spec);  // "start:stop:step" or comma list

}  // namespace tdc
