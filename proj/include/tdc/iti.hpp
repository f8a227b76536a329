#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tdc/density.hpp"
#include "tdc/delay_model.hpp"
#include "tdc/line.hpp"
#include "tdc/permutation.hpp"

namespace tdc {

struct TimelineBin {
    int source_tdl = 0;
    int source_bin = 0;  // physical index within its TDL
    double start_time_ps = 0.0;
    double width_ps = 0.0;
};

// Per-bin start times within one calibrated segment: start[n] is the prefix
// sum of widths below n, start[0] = 0. origin_offset_ps is the measured phase
// of the segment's first emission; adding it places the timeline in the
// absolute phase frame shared by all segments, which is what makes
// cross-segment merging meaningful.
struct BinTimeline {
    double clock_period_ps = 0.0;
    double origin_offset_ps = 0.0;
    std::vector<TimelineBin> bins;
};

// Prefix sums excluding the current bin. Throws on a negative width.
std::vector<double> start_times(const std::vector<double>& widths);

// Timeline for one segment from its density histogram. `perceived_physical`
// maps each slot of the histogram to the physical bin it reads.
BinTimeline timeline_from_density(const DensityHistogram& hist,
                                  const std::vector<int>& perceived_physical, int tdl_id);

// Globally ordered interleaving: bins below the width threshold are dropped,
// the rest sorted by absolute start time (ties broken by source_tdl then
// source_bin; exact ties deduplicated), and bins whose merged slot comes out
// narrower than the threshold are coalesced away. width_ps of the result is
// the merged slot width, so the merged list partitions [first_start, period).
struct MergedTdl {
    double clock_period_ps = 0.0;
    double filter_threshold_ps = 0.0;
    std::vector<TimelineBin> bins;
};

MergedTdl interleave(const std::vector<BinTimeline>& timelines, double threshold_ps);
MergedTdl interleave(const std::vector<MergedTdl>& merged, double threshold_ps);

// View of the merged ordering over the ground-truth models (indexed by
// source_tdl) for the unified encoder.
Line merged_line(const std::vector<const DelayLineModel*>& models, const MergedTdl& merged);

struct MergeReport {
    int bin_count = 0;
    double tapped_fraction = 0.0;  // statistical, from the density run
    int structural_missing = 0;    // bins with exactly zero capture measure
    int zero_count_bins = 0;
    double min_width_ps = 0.0;
    double max_width_ps = 0.0;
    double mean_width_ps = 0.0;
    std::uint64_t shots = 0;
};

// Density test on the merged perceived ordering with the unified encoder,
// plus the exact capture check only the simulator can provide.
MergeReport validate_merge(const std::vector<const DelayLineModel*>& models, const MergedTdl& merged,
                           std::uint64_t shots, std::uint64_t seed, const EncoderConfig& cfg = {});

// CSV: rank,source_tdl,source_bin,start_time_ps,width_ps with '# key=value'
// metadata. Shared by per-segment timelines and merged orderings.
void write_timeline_csv(std::ostream& out, const BinTimeline& timeline);
BinTimeline read_timeline_csv(std::istream& in);
void write_merged_csv(std::ostream& out, const MergedTdl& merged);
MergedTdl read_merged_csv(std::istream& in);

}  // namespace tdc
