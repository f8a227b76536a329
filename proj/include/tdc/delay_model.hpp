#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tdc {

inline constexpr int kTapsPerCell = 8;

struct ClockRegion {
    int start_index = 0;   // first physical bin index the skew applies to
    double skew_ps = 0.0;  // added to every bin position in the region
};

struct ModelConfig {
    double clock_period_ps = 4000.0;  // 250 MHz sampling clock
    int num_carry_cells = 0;
    double nominal_tap_delay_ps = 0.0;
    double jitter_sigma_ps = 0.0;       // per-tap Gaussian perturbation
    double resynthesis_noise_ps = 0.0;  // optional re-jitter applied on resynthesis
    // Systematic per-tap-in-cell position offsets (ps), repeated across every
    // cell: models the fabric's repeating intra-cell delay structure, the
    // reason missing-code patterns look alike from unit to unit. Empty means
    // no systematic structure.
    std::vector<double> tap_offsets;
    std::vector<ClockRegion> clock_regions;
    std::uint64_t rng_seed = 0;
};

struct BinTruth {
    int physical_index = 0;
    double sample_position_ps = 0.0;  // phase at which this bin first captures 1
    int carry_cell = 0;
    int tap_in_cell = 0;
};

// Ground-truth tapped delay line: every bin has a hidden effective sampling
// position in [0, clock_period). Construction is deterministic in the seed;
// positions form a strict total order (exact ties are nudged by +1 fs on the
// later physical index).
class DelayLineModel {
public:
    // Throws std::out_of_range if the nominal chain is longer than the clock
    // period, std::invalid_argument on malformed configs.
    static DelayLineModel build(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }
    double clock_period_ps() const { return config_.clock_period_ps; }
    int bin_count() const { return static_cast<int>(bins_.size()); }
    int carry_cells() const { return config_.num_carry_cells; }
    const std::vector<BinTruth>& bins() const { return bins_; }
    double position(int physical_index) const { return bins_[static_cast<std::size_t>(physical_index)].sample_position_ps; }

    // Applies the optional resynthesis noise to all positions (no-op when the
    // configured noise is zero). Each call uses a fresh deterministic stream.
    void resynthesize();

    // Line-delimited table: physical_index <TAB> sample_position_ps (1-based
    // indices in text output).
    void export_table(std::ostream& out) const;

private:
    ModelConfig config_;
    std::vector<BinTruth> bins_;
    int resynth_round_ = 0;

    void enforce_strict_order();
};

// key = value config file; see configs/demo_model.cfg for the format.
ModelConfig load_model_config(const std::string& path);
ModelConfig parse_model_config(std::istream& in);
void write_model_config(std::ostream& out, const ModelConfig& config);

}  // namespace tdc
