#include "tdc/density.hpp"

#include <future>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tdc/rng.hpp"
#include "tdc/textio.hpp"

namespace tdc {

namespace {

struct PartialCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
};

PartialCounts count_range(const Line& line, const EmissionProfile& profile, const CounterRng& rng,
                          std::uint64_t begin, std::uint64_t end) {
    PartialCounts part;
    part.counts.assign(line.positions.size(), 0);
    const double period = line.clock_period_ps;
    for (std::uint64_t s = begin; s < end; ++s) {
        double phase = rng.uniform(s) * period;
        int slot = profile.slot_for_phase(phase);
        if (slot < 0)
            ++part.underflow;
        else
            ++part.counts[static_cast<std::size_t>(slot)];
    }
    return part;
}

}  // namespace

DensityHistogram run_density_test(const Line& line, std::uint64_t shots, std::uint64_t seed,
                                  const EncoderConfig& cfg, Attribution att, int workers) {
    if (shots == 0) throw std::invalid_argument("density: shots must be >= 1");
    if (line.size() == 0) throw std::invalid_argument("density: empty line");
    const EmissionProfile profile = emission_profile(line, cfg, att);
    const CounterRng rng(seed);

    DensityHistogram hist;
    hist.clock_period_ps = line.clock_period_ps;
    hist.total_shots = shots;
    hist.counts.assign(line.positions.size(), 0);

    if (workers <= 1 || shots < 100000) {
        PartialCounts part = count_range(line, profile, rng, 0, shots);
        hist.counts = std::move(part.counts);
        hist.underflow = part.underflow;
        return hist;
    }

    const std::uint64_t chunk = (shots + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
    std::vector<std::future<PartialCounts>> futures;
    for (int w = 0; w < workers; ++w) {
        std::uint64_t begin = chunk * static_cast<std::uint64_t>(w);
        std::uint64_t end = std::min(shots, begin + chunk);
        if (begin >= end) break;
        futures.push_back(std::async(std::launch::async, [&, begin, end] {
            return count_range(line, profile, rng, begin, end);
        }));
    }
    for (auto& f : futures) {
        PartialCounts part = f.get();
        hist.underflow += part.underflow;
        for (std::size_t i = 0; i < hist.counts.size(); ++i) hist.counts[i] += part.counts[i];
    }
    return hist;
}

std::vector<double> widths(const DensityHistogram& hist) {
    if (hist.total_shots == 0) throw std::invalid_argument("density: widths need total_shots > 0");
    std::vector<double> w(hist.counts.size());
    const double scale = hist.clock_period_ps / static_cast<double>(hist.total_shots);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) w[i] = static_cast<double>(hist.counts[i]) * scale;
    return w;
}

double head_width(const DensityHistogram& hist) {
    if (hist.total_shots == 0) throw std::invalid_argument("density: head_width needs total_shots > 0");
    return static_cast<double>(hist.underflow) * hist.clock_period_ps / static_cast<double>(hist.total_shots);
}

std::vector<double> folded_widths(const DensityHistogram& hist) {
    std::vector<double> w = widths(hist);
    if (w.empty()) throw std::invalid_argument("density: empty histogram");
    w[0] += head_width(hist);
    return w;
}

int TappedPattern::tapped_count() const {
    int c = 0;
    for (bool b : tapped) c += b ? 1 : 0;
    return c;
}

double TappedPattern::fraction() const {
    return tapped.empty() ? 0.0 : static_cast<double>(tapped_count()) / static_cast<double>(tapped.size());
}

TappedPattern tapped_pattern(const DensityHistogram& hist, std::uint64_t min_count_threshold) {
    TappedPattern pattern;
    pattern.min_count_threshold = min_count_threshold;
    pattern.tapped.resize(hist.counts.size());
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        pattern.tapped[i] = hist.counts[i] > min_count_threshold;
    return pattern;
}

double expected_count_for_width(const DensityHistogram& hist, double width_ps) {
    return static_cast<double>(hist.total_shots) * width_ps / hist.clock_period_ps;
}

void write_density_csv(std::ostream& out, const DensityHistogram& hist, std::uint64_t tapped_threshold) {
    out << "# clock_period_ps=" << format_double(hist.clock_period_ps) << '\n';
    out << "# total_shots=" << hist.total_shots << '\n';
    out << "# underflow=" << hist.underflow << '\n';
    out << "bin_index,count,width_ps,tapped\n";
    const std::vector<double> w = widths(hist);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out << (i + 1) << ',' << hist.counts[i] << ',' << format_double(w[i]) << ','
            << (hist.counts[i] > tapped_threshold ? 1 : 0) << '\n';
    }
}

DensityHistogram read_density_csv(std::istream& in) {
    DensityHistogram hist;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(1, eq - 1));
            std::string value = trim(line.substr(eq + 1));
            if (key == "clock_period_ps") hist.clock_period_ps = std::stod(value);
            else if (key == "total_shots") hist.total_shots = std::stoull(value);
            else if (key == "underflow") hist.underflow = std::stoull(value);
            continue;
        }
        if (!header_seen && line.rfind("bin_index", 0) == 0) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() < 2) throw std::runtime_error("density csv: malformed row '" + line + "'");
        hist.counts.push_back(std::stoull(trim(fields[1])));
    }
    if (hist.clock_period_ps <= 0 || hist.total_shots == 0)
        throw std::runtime_error("density csv: missing metadata header");
    return hist;
}

}  // namespace tdc
