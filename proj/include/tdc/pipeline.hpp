#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdc/delay_model.hpp"
#include "tdc/encoder.hpp"
#include "tdc/por.hpp"
#include "tdc/ti.hpp"

namespace tdc {

// Exit codes: 0 success, 1 config, otherwise the failing stage.
enum StageCode : int {
    kOk = 0,
    kConfigError = 1,
    kModelStage = 2,
    kDensityStage = 3,
    kPorStage = 4,
    kTimelineStage = 5,
    kItiStage = 6,
    kCalibrateStage = 7,
    kMetricsStage = 8,
    kTiStage = 9,
    kReportError = 10,
};

struct PipelineConfig {
    ModelConfig model_template;
    int tdl_count = 1;
    std::uint64_t tdl_seed_stride = 1;

    std::uint64_t shots = 5'000'000;        // density tests driving the ordering calibration
    std::uint64_t cal_shots = 5'000'000;    // post-calibration run feeding the timelines
    std::uint64_t weight_shots = 20'000'000;
    std::uint64_t sample_shots = 5'000'000; // validation and metric sampling runs

    int por_iterations = 2;
    double iti_threshold_ps = 0.2;
    AnsatzMode ansatz_mode = AnsatzMode::Identity;
    EncoderConfig encoder;

    std::uint64_t por_seed = 1;
    std::uint64_t cal_seed = 2;
    std::uint64_t weight_seed = 3;
    std::uint64_t validate_seed = 4;
    std::uint64_t ti_seed = 5;

    std::string ti_delays = "250:3750:500";
    int ti_reps = 3;
    int ti_pairs = 10;
    double ti_jitter_ps = 0.0;

    std::string out_dir = "out";
};

// Pipeline config file (key = value). Relative paths resolve against the
// config file's directory; a TDCCAL_OUT_ROOT environment variable, when set,
// roots a relative out_dir.
PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineOverrides {
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool has_shots = false;
    std::uint64_t shots = 0;
    bool has_threshold = false;
    double threshold_ps = 0.0;
    bool has_out_dir = false;
    std::string out_dir;
};

void apply_overrides(PipelineConfig& config, const PipelineOverrides& overrides);

// Runs every stage in order, persisting all intermediate artifacts under
// config.out_dir. With resume=true, stages whose completion marker exists are
// skipped and their artifacts reused; outputs are identical either way.
int run_full_pipeline(const PipelineConfig& config, std::ostream& log, bool resume = false);

// Renders the Table-style comparison plus the per-segment tapped table from a
// completed (or partial) artifact directory.
int run_report(const std::string& artifact_dir, std::ostream& out);

// Individual stages, exposed for the per-stage CLI subcommands and tests.
// All communicate through files in `dir` so interrupted runs can resume.
void stage_model(const PipelineConfig& config, const std::string& dir);
void stage_density_pre(const PipelineConfig& config, const std::string& dir);
void stage_por(const PipelineConfig& config, const std::string& dir);
void stage_timelines(const PipelineConfig& config, const std::string& dir);
void stage_iti(const PipelineConfig& config, const std::string& dir);
void stage_calibrate(const PipelineConfig& config, const std::string& dir);
void stage_metrics(const PipelineConfig& config, const std::string& dir);
void stage_ti(const PipelineConfig& config, const std::string& dir);

// Models as the later stages see them: rebuilt from the persisted configs and
// advanced by the number of resynthesis rounds the ordering stage ran.
std::vector<DelayLineModel> load_stage_models(const std::string& dir, int tdl_count, int resynth_rounds);
int recorded_resynth_rounds(const std::string& dir);

}  // namespace tdc
