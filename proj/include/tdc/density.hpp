#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tdc/encoder.hpp"
#include "tdc/line.hpp"

namespace tdc {

// Per-slot hit counts from a code density test. `underflow` collects shots
// the encoder attributed to nothing (all-zeros codes under Datapath
// accounting, leading-zero codes under Prefix accounting); it measures the
// phase range before the line's first emission and is zero for lines whose
// first slot sits at phase 0. counts.sum() + underflow == total_shots.
struct DensityHistogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t underflow = 0;
    std::uint64_t total_shots = 0;
    double clock_period_ps = 0.0;
};

// Uniform random phases through sample+encode. Deterministic in the seed and
// independent of the worker count (counter-based phase stream keyed by shot
// index). Throws on zero shots or an empty line.
DensityHistogram run_density_test(const Line& line, std::uint64_t shots, std::uint64_t seed,
                                  const EncoderConfig& cfg = {},
                                  Attribution att = Attribution::Datapath, int workers = 1);

// width[i] = counts[i] / total_shots * clock_period.
std::vector<double> widths(const DensityHistogram& hist);

// Phase range ahead of the first emission, estimated the same way.
double head_width(const DensityHistogram& hist);

// widths() with the head range folded into slot 0, so the vector partitions
// the full clock period: what calibration and linearity metrics consume.
std::vector<double> folded_widths(const DensityHistogram& hist);

struct TappedPattern {
    std::vector<bool> tapped;
    std::uint64_t min_count_threshold = 0;

    int tapped_count() const;
    double fraction() const;
};

TappedPattern tapped_pattern(const DensityHistogram& hist, std::uint64_t min_count_threshold = 0);

// Expected hit count of a bin of the given width: the statistical threshold
// helper for narrow-bin classification.
double expected_count_for_width(const DensityHistogram& hist, double width_ps);

// CSV: '# key=value' header lines, then bin_index,count,width_ps,tapped.
void write_density_csv(std::ostream& out, const DensityHistogram& hist,
                       std::uint64_t tapped_threshold = 0);
DensityHistogram read_density_csv(std::istream& in);

}  // namespace tdc
