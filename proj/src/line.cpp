#include "tdc/line.hpp"

#include <algorithm>
#include <stdexcept>

namespace tdc {

std::vector<int> group_physical_slots(const DelayLineModel& model, int group_id) {
    if (group_id < 0 || group_id > 2) throw std::invalid_argument("group: group_id must be in {0,1,2}");
    std::vector<int> slots;
    for (int cell = group_id; cell < model.carry_cells(); cell += 3)
        for (int tap = 0; tap < kTapsPerCell; ++tap)
            slots.push_back(cell * kTapsPerCell + tap);
    return slots;
}

Line group_line(const DelayLineModel& model, const GroupSelector& group, int tdl_id) {
    const std::vector<int> natural = group_physical_slots(model, group.group_id);
    if (natural.empty()) throw std::invalid_argument("group: no member cells");
    Permutation perceived = group.perceived;
    if (perceived.empty()) perceived = identity_permutation(static_cast<int>(natural.size()));
    if (perceived.size() != natural.size() || !is_permutation_of_n(perceived))
        throw std::invalid_argument("group: perceived ordering must permute the group's slots");

    Line line;
    line.clock_period_ps = model.clock_period_ps();
    line.positions.reserve(natural.size());
    line.sources.reserve(natural.size());
    for (int slot : perceived) {
        int physical = natural[static_cast<std::size_t>(slot)];
        line.positions.push_back(model.position(physical));
        line.sources.push_back(TapRef{tdl_id, physical});
    }
    return line;
}

Line full_line(const DelayLineModel& model, int tdl_id) {
    Line line;
    line.clock_period_ps = model.clock_period_ps();
    line.positions.reserve(static_cast<std::size_t>(model.bin_count()));
    line.sources.reserve(static_cast<std::size_t>(model.bin_count()));
    for (const BinTruth& bin : model.bins()) {
        line.positions.push_back(bin.sample_position_ps);
        line.sources.push_back(TapRef{tdl_id, bin.physical_index});
    }
    return line;
}

ThermometerCode sample(const Line& line, double phase_ps) {
    ThermometerCode tc;
    tc.bits.resize(line.positions.size());
    for (std::size_t i = 0; i < line.positions.size(); ++i)
        tc.bits[i] = line.positions[i] <= phase_ps ? 1 : 0;
    return tc;
}

ThermometerCode sample(const DelayLineModel& model, double phase_ps, const GroupSelector& group) {
    return sample(group_line(model, group), phase_ps);
}

int EmissionProfile::slot_for_phase(double phase_ps) const {
    auto it = std::upper_bound(thresholds.begin(), thresholds.end(), phase_ps);
    return emission[static_cast<std::size_t>(it - thresholds.begin())];
}

EmissionProfile emission_profile(const Line& line, const EncoderConfig& cfg, Attribution att) {
    const int n = line.size();
    if (n == 0) throw std::invalid_argument("emission_profile: empty line");

    // crossing order of each slot = rank of its position
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return line.positions[static_cast<std::size_t>(a)] < line.positions[static_cast<std::size_t>(b)]; });

    EmissionProfile profile;
    profile.thresholds.resize(static_cast<std::size_t>(n));
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        profile.thresholds[static_cast<std::size_t>(j)] = line.positions[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
        rank[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = j;
    }

    profile.emission.assign(static_cast<std::size_t>(n) + 1, -1);
    ThermometerCode code;
    code.bits.assign(static_cast<std::size_t>(n), 0);
    for (int j = 0; j <= n; ++j) {
        if (j > 0) {
            // light the slot whose threshold was just crossed
            code.bits[static_cast<std::size_t>(order[static_cast<std::size_t>(j - 1)])] = 1;
        }
        int emitted = -1;
        if (att == Attribution::Prefix) {
            int prefix = 0;
            while (prefix < n && code.bits[static_cast<std::size_t>(prefix)]) ++prefix;
            emitted = prefix - 1;
        } else {
            std::optional<int> e = encode(code, cfg);
            emitted = e ? *e : -1;  // no transition found: head bucket
        }
        profile.emission[static_cast<std::size_t>(j)] = emitted;
    }
    return profile;
}

CaptureWidths true_capture_widths(const Line& line, const EncoderConfig& cfg, Attribution att) {
    const EmissionProfile profile = emission_profile(line, cfg, att);
    const int n = line.size();
    CaptureWidths cw;
    cw.per_slot_ps.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j <= n; ++j) {
        double lo = j == 0 ? 0.0 : profile.thresholds[static_cast<std::size_t>(j - 1)];
        double hi = j == n ? line.clock_period_ps : profile.thresholds[static_cast<std::size_t>(j)];
        double width = std::max(0.0, hi - lo);
        int slot = profile.emission[static_cast<std::size_t>(j)];
        if (slot < 0)
            cw.head_ps += width;
        else
            cw.per_slot_ps[static_cast<std::size_t>(slot)] += width;
    }
    return cw;
}

}  // namespace tdc
