#pragma once

#include <cstdint>
#include <vector>

#include "tdc/delay_model.hpp"
#include "tdc/encoder.hpp"
#include "tdc/permutation.hpp"

namespace tdc {

// One of the three interleaved cell groups: member carry cells are
// {c : c == group_id (mod 3)}. The perceived ordering is the encoder-level
// scan order over the group's slots; empty means identity (physical order).
struct GroupSelector {
    int group_id = 0;
    Permutation perceived;  // optional: permutation of the group's slot count
};

// A delay line as seen by one priority encoder: for every perceived slot,
// the ground-truth sampling position and the source tap it refers to.
struct TapRef {
    int tdl = 0;
    int physical_index = 0;
};

struct Line {
    double clock_period_ps = 0.0;
    std::vector<double> positions;  // by perceived slot
    std::vector<TapRef> sources;    // parallel to positions

    int size() const { return static_cast<int>(positions.size()); }
};

// Physical indices of the group's bins in chain order.
std::vector<int> group_physical_slots(const DelayLineModel& model, int group_id);

Line group_line(const DelayLineModel& model, const GroupSelector& group, int tdl_id = 0);

// Whole-chain line (all cells, identity perceived order).
Line full_line(const DelayLineModel& model, int tdl_id = 0);

ThermometerCode sample(const Line& line, double phase_ps);
ThermometerCode sample(const DelayLineModel& model, double phase_ps, const GroupSelector& group);

// How emitted slots are accounted. Datapath mirrors the hardware priority
// encoder bit-for-bit (encode() over the sampled code; all-zeros codes fold
// into slot 0 the way the coarse/fine composition sees them). Prefix
// attributes a hit to a slot only when the lit prefix of the code ends there;
// shots whose first run does not reach slot 0 land in the head bucket. Prefix
// is the accounting that per-unit pattern deductions are exact under.
enum class Attribution { Datapath, Prefix };

// emission[j] = slot emitted after j threshold crossings (-1 = head bucket),
// for j = 0..n. thresholds = positions sorted ascending. Any sampled phase
// maps through j = upper_bound(thresholds, phase), which makes per-shot work
// O(log n) regardless of how scrambled the perceived order is.
struct EmissionProfile {
    std::vector<double> thresholds;
    std::vector<int> emission;

    int slot_for_phase(double phase_ps) const;
};

EmissionProfile emission_profile(const Line& line, const EncoderConfig& cfg, Attribution att);

// Exact per-slot capture measure (ps of phase emitting each slot) plus the
// head measure; the ground-truth widths a code density test estimates.
struct CaptureWidths {
    std::vector<double> per_slot_ps;
    double head_ps = 0.0;
};

CaptureWidths true_capture_widths(const Line& line, const EncoderConfig& cfg, Attribution att);

}  // namespace tdc
