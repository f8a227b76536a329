#include "tdc/iti.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tdc/textio.hpp"

namespace tdc {

std::vector<double> start_times(const std::vector<double>& widths) {
    std::vector<double> starts(widths.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (widths[i] < 0.0) throw std::invalid_argument("start_times: negative width");
        starts[i] = acc;
        acc += widths[i];
    }
    return starts;
}

BinTimeline timeline_from_density(const DensityHistogram& hist,
                                  const std::vector<int>& perceived_physical, int tdl_id) {
    if (hist.counts.size() != perceived_physical.size())
        throw std::invalid_argument("timeline: histogram and perceived ordering disagree on bin count");
    const std::vector<double> w = widths(hist);
    const std::vector<double> starts = start_times(w);
    BinTimeline timeline;
    timeline.clock_period_ps = hist.clock_period_ps;
    timeline.origin_offset_ps = head_width(hist);
    timeline.bins.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        timeline.bins[i] = TimelineBin{tdl_id, perceived_physical[i], starts[i], w[i]};
    return timeline;
}

namespace {

struct Leaf {
    int source_tdl;
    int source_bin;
    double start;  // absolute
    double width;  // pre-merge width
};

MergedTdl merge_leaves(std::vector<Leaf> leaves, double clock_period_ps, double threshold_ps) {
    // 1. pre-merge width filter
    std::erase_if(leaves, [&](const Leaf& l) { return l.width < threshold_ps; });

    // 2. global stable order
    std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.source_tdl != b.source_tdl) return a.source_tdl < b.source_tdl;
        return a.source_bin < b.source_bin;
    });

    // 3. exactly tied starts are indistinguishable to the calibration: keep
    // the first of each tie group
    std::vector<Leaf> distinct;
    distinct.reserve(leaves.size());
    for (const Leaf& l : leaves)
        if (distinct.empty() || l.start != distinct.back().start) distinct.push_back(l);

    // 4. coalesce merged slots narrower than the threshold (one pass over the
    // pre-drop slots; survivors keep at least the threshold)
    std::vector<Leaf> kept;
    kept.reserve(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) {
        double next = i + 1 < distinct.size() ? distinct[i + 1].start : clock_period_ps;
        if (next - distinct[i].start < threshold_ps) continue;
        kept.push_back(distinct[i]);
    }
    if (kept.empty()) throw std::runtime_error("interleave: no bins left after filtering");

    MergedTdl merged;
    merged.clock_period_ps = clock_period_ps;
    merged.filter_threshold_ps = threshold_ps;
    merged.bins.resize(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        double next = i + 1 < kept.size() ? kept[i + 1].start : clock_period_ps;
        merged.bins[i] = TimelineBin{kept[i].source_tdl, kept[i].source_bin, kept[i].start,
                                     next - kept[i].start};
    }
    return merged;
}

}  // namespace

MergedTdl interleave(const std::vector<BinTimeline>& timelines, double threshold_ps) {
    if (timelines.empty()) throw std::invalid_argument("interleave: no timelines");
    const double period = timelines.front().clock_period_ps;
    std::vector<Leaf> leaves;
    for (const BinTimeline& t : timelines) {
        if (t.clock_period_ps != period)
            throw std::invalid_argument("interleave: timelines disagree on clock period");
        for (const TimelineBin& b : t.bins)
            leaves.push_back(Leaf{b.source_tdl, b.source_bin, t.origin_offset_ps + b.start_time_ps,
                                  b.width_ps});
    }
    return merge_leaves(std::move(leaves), period, threshold_ps);
}

MergedTdl interleave(const std::vector<MergedTdl>& merged, double threshold_ps) {
    if (merged.empty()) throw std::invalid_argument("interleave: no inputs");
    const double period = merged.front().clock_period_ps;
    std::vector<Leaf> leaves;
    for (const MergedTdl& m : merged) {
        if (m.clock_period_ps != period)
            throw std::invalid_argument("interleave: inputs disagree on clock period");
        for (const TimelineBin& b : m.bins)
            leaves.push_back(Leaf{b.source_tdl, b.source_bin, b.start_time_ps, b.width_ps});
    }
    return merge_leaves(std::move(leaves), period, threshold_ps);
}

Line merged_line(const std::vector<const DelayLineModel*>& models, const MergedTdl& merged) {
    Line line;
    if (models.empty()) throw std::invalid_argument("merged_line: no models");
    line.clock_period_ps = models.front()->clock_period_ps();
    line.positions.reserve(merged.bins.size());
    line.sources.reserve(merged.bins.size());
    for (const TimelineBin& b : merged.bins) {
        if (b.source_tdl < 0 || static_cast<std::size_t>(b.source_tdl) >= models.size())
            throw std::invalid_argument("merged_line: source_tdl out of range");
        line.positions.push_back(models[static_cast<std::size_t>(b.source_tdl)]->position(b.source_bin));
        line.sources.push_back(TapRef{b.source_tdl, b.source_bin});
    }
    return line;
}

MergeReport validate_merge(const std::vector<const DelayLineModel*>& models, const MergedTdl& merged,
                           std::uint64_t shots, std::uint64_t seed, const EncoderConfig& cfg) {
    const Line line = merged_line(models, merged);
    MergeReport report;
    report.bin_count = line.size();
    report.shots = shots;

    const CaptureWidths capture = true_capture_widths(line, cfg, Attribution::Datapath);
    for (double w : capture.per_slot_ps)
        if (w == 0.0) ++report.structural_missing;

    const DensityHistogram hist = run_density_test(line, shots, seed, cfg);
    const TappedPattern pattern = tapped_pattern(hist, 0);
    report.tapped_fraction = pattern.fraction();
    report.zero_count_bins = static_cast<int>(pattern.tapped.size()) - pattern.tapped_count();

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    for (const TimelineBin& b : merged.bins) {
        lo = std::min(lo, b.width_ps);
        hi = std::max(hi, b.width_ps);
        sum += b.width_ps;
    }
    report.min_width_ps = merged.bins.empty() ? 0.0 : lo;
    report.max_width_ps = hi;
    report.mean_width_ps = merged.bins.empty() ? 0.0 : sum / static_cast<double>(merged.bins.size());
    return report;
}

namespace {

void write_rows(std::ostream& out, double period, double origin, double threshold, bool merged,
                const std::vector<TimelineBin>& bins) {
    out << "# clock_period_ps=" << format_double(period) << '\n';
    if (merged)
        out << "# filter_threshold_ps=" << format_double(threshold) << '\n';
    else
        out << "# origin_offset_ps=" << format_double(origin) << '\n';
    out << "rank,source_tdl,source_bin,start_time_ps,width_ps\n";
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const TimelineBin& b = bins[i];
        out << (i + 1) << ',' << b.source_tdl << ',' << (b.source_bin + 1) << ','
            << format_double(b.start_time_ps) << ',' << format_double(b.width_ps) << '\n';
    }
}

struct ParsedRows {
    double clock_period_ps = 0.0;
    double origin_offset_ps = 0.0;
    double filter_threshold_ps = 0.0;
    std::vector<TimelineBin> bins;
};

ParsedRows read_rows(std::istream& in) {
    ParsedRows rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(1, eq - 1));
            std::string value = trim(line.substr(eq + 1));
            if (key == "clock_period_ps") rows.clock_period_ps = std::stod(value);
            else if (key == "origin_offset_ps") rows.origin_offset_ps = std::stod(value);
            else if (key == "filter_threshold_ps") rows.filter_threshold_ps = std::stod(value);
            continue;
        }
        if (line.rfind("rank", 0) == 0) continue;
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 5) throw std::runtime_error("timeline csv: malformed row '" + line + "'");
        TimelineBin bin;
        bin.source_tdl = std::stoi(trim(fields[1]));
        bin.source_bin = std::stoi(trim(fields[2])) - 1;
        bin.start_time_ps = std::stod(trim(fields[3]));
        bin.width_ps = std::stod(trim(fields[4]));
        rows.bins.push_back(bin);
    }
    if (rows.clock_period_ps <= 0.0) throw std::runtime_error("timeline csv: missing clock_period_ps");
    return rows;
}

}  // namespace

void write_timeline_csv(std::ostream& out, const BinTimeline& timeline) {
    write_rows(out, timeline.clock_period_ps, timeline.origin_offset_ps, 0.0, false, timeline.bins);
}

BinTimeline read_timeline_csv(std::istream& in) {
    ParsedRows rows = read_rows(in);
    BinTimeline timeline;
    timeline.clock_period_ps = rows.clock_period_ps;
    timeline.origin_offset_ps = rows.origin_offset_ps;
    timeline.bins = std::move(rows.bins);
    return timeline;
}

void write_merged_csv(std::ostream& out, const MergedTdl& merged) {
    write_rows(out, merged.clock_period_ps, 0.0, merged.filter_threshold_ps, true, merged.bins);
}

MergedTdl read_merged_csv(std::istream& in) {
    ParsedRows rows = read_rows(in);
    MergedTdl merged;
    merged.clock_period_ps = rows.clock_period_ps;
    merged.filter_threshold_ps = rows.filter_threshold_ps;
    merged.bins = std::move(rows.bins);
    return merged;
}

}  // namespace tdc
