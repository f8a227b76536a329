#include "tdc/delay_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tdc/rng.hpp"
#include "tdc/textio.hpp"

namespace tdc {

namespace {
constexpr double kTieEpsilonPs = 1e-3;  // 1 fs

double region_skew(const std::vector<ClockRegion>& regions, int index) {
    double skew = 0.0;
    for (const ClockRegion& r : regions)
        if (index >= r.start_index) skew = r.skew_ps;
    return skew;
}
}  // namespace

DelayLineModel DelayLineModel::build(const ModelConfig& config) {
    if (config.num_carry_cells < 1) throw std::invalid_argument("model: num_carry_cells must be >= 1");
    if (config.nominal_tap_delay_ps <= 0.0) throw std::invalid_argument("model: nominal_tap_delay_ps must be > 0");
    if (config.jitter_sigma_ps < 0.0) throw std::invalid_argument("model: jitter_sigma_ps must be >= 0");
    if (config.clock_period_ps <= 0.0) throw std::invalid_argument("model: clock_period_ps must be > 0");
    if (config.tap_offsets.size() > kTapsPerCell)
        throw std::invalid_argument("model: tap_offsets may hold at most one entry per tap of a cell");
    const int n = config.num_carry_cells * kTapsPerCell;
    const double nominal_total = config.nominal_tap_delay_ps * n;
    if (nominal_total > config.clock_period_ps)
        throw std::out_of_range("model: nominal chain delay exceeds the clock period");

    DelayLineModel model;
    model.config_ = config;
    model.bins_.resize(static_cast<std::size_t>(n));

    CounterRng rng(config.rng_seed);
    double cumulative = 0.0;
    for (int i = 0; i < n; ++i) {
        cumulative += config.nominal_tap_delay_ps + config.jitter_sigma_ps * rng.gaussian(static_cast<std::uint64_t>(i));
        BinTruth& bin = model.bins_[static_cast<std::size_t>(i)];
        bin.physical_index = i;
        bin.carry_cell = i / kTapsPerCell;
        bin.tap_in_cell = i % kTapsPerCell;
        double offset = static_cast<std::size_t>(bin.tap_in_cell) < config.tap_offsets.size()
                            ? config.tap_offsets[static_cast<std::size_t>(bin.tap_in_cell)]
                            : 0.0;
        bin.sample_position_ps = cumulative + offset + region_skew(config.clock_regions, i);
    }
    model.enforce_strict_order();
    return model;
}

void DelayLineModel::enforce_strict_order() {
    const double top = std::nextafter(config_.clock_period_ps, 0.0);
    for (BinTruth& bin : bins_) bin.sample_position_ps = std::clamp(bin.sample_position_ps, 0.0, top);

    // Strict total order: walk bins in (position, physical_index) order and
    // nudge exact ties forward by 1 fs so the later physical index loses.
    std::vector<int> order(bins_.size());
    for (std::size_t i = 0; i < bins_.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double pa = bins_[static_cast<std::size_t>(a)].sample_position_ps;
        double pb = bins_[static_cast<std::size_t>(b)].sample_position_ps;
        if (pa != pb) return pa < pb;
        return a < b;
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        BinTruth& cur = bins_[static_cast<std::size_t>(order[k])];
        const BinTruth& prev = bins_[static_cast<std::size_t>(order[k - 1])];
        if (cur.sample_position_ps <= prev.sample_position_ps)
            cur.sample_position_ps = prev.sample_position_ps + kTieEpsilonPs;
    }
}

void DelayLineModel::resynthesize() {
    ++resynth_round_;
    if (config_.resynthesis_noise_ps <= 0.0) return;
    CounterRng rng(splitmix64(config_.rng_seed ^ (0xC0FFEEULL + static_cast<std::uint64_t>(resynth_round_))));
    for (std::size_t i = 0; i < bins_.size(); ++i)
        bins_[i].sample_position_ps += config_.resynthesis_noise_ps * rng.gaussian(static_cast<std::uint64_t>(i));
    enforce_strict_order();
}

void DelayLineModel::export_table(std::ostream& out) const {
    out << "physical_index\tsample_position_ps\n";
    for (const BinTruth& bin : bins_)
        out << (bin.physical_index + 1) << '\t' << format_double(bin.sample_position_ps) << '\n';
}

ModelConfig parse_model_config(std::istream& in) {
    ModelConfig config;
    KeyValueFile kv = parse_key_value_file(in);
    config.clock_period_ps = kv.get_double("clock_period_ps", config.clock_period_ps);
    config.num_carry_cells = static_cast<int>(kv.get_int("num_carry_cells", 0));
    config.nominal_tap_delay_ps = kv.get_double("nominal_tap_delay_ps", 0.0);
    config.jitter_sigma_ps = kv.get_double("jitter_sigma_ps", 0.0);
    config.resynthesis_noise_ps = kv.get_double("resynthesis_noise_ps", 0.0);
    config.rng_seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    if (kv.has("tap_offsets")) {
        for (const std::string& item : split(kv.get("tap_offsets"), ','))
            config.tap_offsets.push_back(std::stod(trim(item)));
    }
    if (kv.has("clock_regions")) {
        for (const std::string& item : split(kv.get("clock_regions"), ',')) {
            std::vector<std::string> parts = split(item, ':');
            if (parts.size() != 2) throw std::invalid_argument("model config: clock_regions entries must be start:skew_ps");
            ClockRegion region;
            region.start_index = std::stoi(trim(parts[0]));
            region.skew_ps = std::stod(trim(parts[1]));
            config.clock_regions.push_back(region);
        }
    }
    return config;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model config: cannot open " + path);
    return parse_model_config(in);
}

void write_model_config(std::ostream& out, const ModelConfig& config) {
    out << "clock_period_ps = " << format_double(config.clock_period_ps) << '\n';
    out << "num_carry_cells = " << config.num_carry_cells << '\n';
    out << "nominal_tap_delay_ps = " << format_double(config.nominal_tap_delay_ps) << '\n';
    out << "jitter_sigma_ps = " << format_double(config.jitter_sigma_ps) << '\n';
    out << "resynthesis_noise_ps = " << format_double(config.resynthesis_noise_ps) << '\n';
    out << "seed = " << config.rng_seed << '\n';
    if (!config.tap_offsets.empty()) {
        out << "tap_offsets = ";
        for (std::size_t i = 0; i < config.tap_offsets.size(); ++i) {
            if (i) out << ", ";
            out << format_double(config.tap_offsets[i]);
        }
        out << '\n';
    }
    if (!config.clock_regions.empty()) {
        out << "clock_regions = ";
        for (std::size_t i = 0; i < config.clock_regions.size(); ++i) {
            if (i) out << ", ";
            out << config.clock_regions[i].start_index << ':' << format_double(config.clock_regions[i].skew_ps);
        }
        out << '\n';
    }
}

}  // namespace tdc
