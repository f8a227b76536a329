#include "tdc/ti.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tdc/rng.hpp"
#include "tdc/textio.hpp"

namespace tdc {

TimestampChannel::TimestampChannel(const Line& line, const CalibrationTable& table,
                                   const EncoderConfig& cfg)
    : line_(&line), table_(&table), profile_(emission_profile(line, cfg, Attribution::Datapath)) {
    if (line.size() != table.bin_count())
        throw std::out_of_range("timestamp: calibration table does not cover the line");
}

Timestamp TimestampChannel::stamp(double event_time_ps) const {
    const double period = line_->clock_period_ps;
    double coarse = std::floor(event_time_ps / period);
    double phase = event_time_ps - coarse * period;
    if (phase >= period) {  // guard the floating-point edge at exact multiples
        phase -= period;
        coarse += 1.0;
    }
    int slot = profile_.slot_for_phase(phase);
    if (slot < 0) slot = 0;  // phase ahead of the first tap belongs to the first bin
    Timestamp ts;
    ts.coarse_count = static_cast<std::int64_t>(coarse);
    ts.fine_time_ps = fine_time(slot, *table_);
    return ts;
}

namespace {

double measure_ti(const TimestampChannel& a, const TimestampChannel& b, double t1, double t2) {
    return interval_ps(a.stamp(t1), b.stamp(t2), a.clock_period_ps());
}

}  // namespace

TiReport run_ti(const TiRunConfig& config, const TimestampChannel& channel_a,
                const TimestampChannel& channel_b) {
    if (config.repetitions < 1) throw std::invalid_argument("ti: repetitions must be >= 1");
    if (config.pairs_per_rep < 1) throw std::invalid_argument("ti: pairs_per_rep must be >= 1");
    const double period = channel_a.clock_period_ps();
    const CounterRng rng(config.seed);

    TiReport report;
    double global_sq = 0.0;
    std::uint64_t global_n = 0;
    std::uint64_t counter = 0;

    for (double delay : config.delays_ps) {
        TiPoint point;
        point.delay_ps = delay;
        double dev_sum = 0.0, sq_sum = 0.0;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            double rep_sum = 0.0;
            for (int p = 0; p < config.pairs_per_rep; ++p) {
                // base spread over ~1000 periods exercises the coarse counter
                double base = rng.uniform(counter++) * 1000.0 * period;
                double jitter1 = config.jitter_sigma_ps != 0.0 ? config.jitter_sigma_ps * rng.gaussian(counter++) : 0.0;
                double jitter2 = config.jitter_sigma_ps != 0.0 ? config.jitter_sigma_ps * rng.gaussian(counter++) : 0.0;
                double measured = measure_ti(channel_a, channel_b, base + jitter1, base + delay + jitter2);
                double dev = measured - delay;
                rep_sum += measured;
                sq_sum += dev * dev;
                global_sq += dev * dev;
                ++global_n;
            }
            dev_sum += rep_sum / config.pairs_per_rep - delay;
        }
        point.mean_dev_ps = dev_sum / config.repetitions;
        point.rms_ps = std::sqrt(sq_sum / (static_cast<double>(config.repetitions) * config.pairs_per_rep));
        report.points.push_back(point);
    }
    report.global_rms_ps = global_n ? std::sqrt(global_sq / static_cast<double>(global_n)) : 0.0;
    return report;
}

TiReport run_ti(const TiRunConfig& config, const TimestampChannel& channel) {
    return run_ti(config, channel, channel);
}

void write_ti_csv(std::ostream& out, const TiReport& report) {
    out << "# global_rms_ps=" << format_double(report.global_rms_ps) << '\n';
    out << "delay_ps,mean_dev_ps,rms_ps\n";
    for (const TiPoint& p : report.points)
        out << format_double(p.delay_ps) << ',' << format_double(p.mean_dev_ps) << ','
            << format_double(p.rms_ps) << '\n';
}

std::vector<double> parse_delay_spec(const std::string& spec) {
    std::vector<double> delays;
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts = split(spec, ':');
        if (parts.size() != 3) throw std::invalid_argument("delays: expected start:stop:step");
        double start = std::stod(trim(parts[0]));
        double stop = std::stod(trim(parts[1]));
        double step = std::stod(trim(parts[2]));
        if (step <= 0.0) throw std::invalid_argument("delays: step must be > 0");
        for (double d = start; d <= stop + 1e-9; d += step) delays.push_back(d);
        return delays;
    }
    for (const std::string& item : split(spec, ','))
        if (!trim(item).empty()) delays.push_back(std::stod(trim(item)));
    return delays;
}

}  // namespace tdc
