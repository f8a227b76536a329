#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "tdc/calib.hpp"
#include "tdc/density.hpp"
#include "tdc/delay_model.hpp"
#include "tdc/iti.hpp"
#include "tdc/line.hpp"
#include "tdc/pipeline.hpp"
#include "tdc/por.hpp"
#include "tdc/textio.hpp"
#include "tdc/ti.hpp"

namespace {

std::ofstream must_open(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream must_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

std::vector<tdc::DelayLineModel> load_models(const std::vector<std::string>& paths) {
    std::vector<tdc::DelayLineModel> models;
    for (const std::string& p : paths)
        models.push_back(tdc::DelayLineModel::build(tdc::load_model_config(p)));
    return models;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tapped-delay-line TDC simulation and calibration toolkit"};
    app.require_subcommand(1);

    // ---- model ----
    auto* cmd_model = app.add_subcommand("model", "build a delay-line model and export its ground truth");
    std::string model_cfg, model_out = "model.tsv";
    std::uint64_t model_seed = 0;
    bool model_seed_set = false;
    cmd_model->add_option("--config", model_cfg, "model config file")->required();
    cmd_model->add_option("--out", model_out, "output table (physical_index, sample_position_ps)");
    cmd_model->add_option("--seed", model_seed, "override the config seed")->each([&](const std::string&) { model_seed_set = true; });

    // ---- density ----
    auto* cmd_density = app.add_subcommand("density", "run a code density test on one cell group");
    std::string den_cfg, den_out = "density.csv", den_attr = "datapath";
    int den_group = 0, den_k = 1;
    std::uint64_t den_shots = 5'000'000, den_seed = 1;
    cmd_density->add_option("--config", den_cfg, "model config file")->required();
    cmd_density->add_option("--group", den_group, "cell group 0..2")->check(CLI::Range(0, 2));
    cmd_density->add_option("--shots", den_shots, "random pulses to feed");
    cmd_density->add_option("--seed", den_seed, "phase stream seed");
    cmd_density->add_option("--out", den_out, "output CSV");
    cmd_density->add_option("--k", den_k, "encoder run length");
    cmd_density->add_option("--attribution", den_attr, "datapath|prefix")->check(CLI::IsMember({"datapath", "prefix"}));

    // ---- por ----
    auto* cmd_por = app.add_subcommand("por", "partial order reconstruction of one cell group");
    std::string por_cfg, por_state_out = "por_state.txt", por_resume;
    int por_group = 0, por_iterations = 2;
    std::uint64_t por_shots = 5'000'000, por_seed = 1;
    cmd_por->add_option("--model", por_cfg, "model config file")->required();
    cmd_por->add_option("--group", por_group, "cell group 0..2")->check(CLI::Range(0, 2));
    cmd_por->add_option("--iterations", por_iterations, "calibration rounds");
    cmd_por->add_option("--shots", por_shots, "shots per density test");
    cmd_por->add_option("--seed", por_seed, "phase stream seed base");
    cmd_por->add_option("--state-out", por_state_out, "checkpoint file to write");
    cmd_por->add_option("--resume", por_resume, "checkpoint file to resume from");

    // ---- iti ----
    auto* cmd_iti = app.add_subcommand("iti", "interleave calibrated timelines into one ordering");
    std::vector<std::string> iti_inputs;
    std::string iti_out = "merged.csv";
    double iti_threshold = 0.2;
    cmd_iti->add_option("--inputs", iti_inputs, "timeline CSVs")->required()->delimiter(',');
    cmd_iti->add_option("--threshold-ps", iti_threshold, "narrow-bin filter threshold");
    cmd_iti->add_option("--out", iti_out, "merged ordering CSV");

    // ---- calibrate ----
    auto* cmd_cal = app.add_subcommand("calibrate", "derive weight factors for a merged ordering");
    std::vector<std::string> cal_models;
    std::string cal_merged, cal_out = "cal_table.csv";
    std::uint64_t cal_shots = 20'000'000, cal_seed = 3;
    cmd_cal->add_option("--models", cal_models, "model config files, one per TDL")->required()->delimiter(',');
    cmd_cal->add_option("--merged", cal_merged, "merged ordering CSV")->required();
    cmd_cal->add_option("--shots", cal_shots, "weight-run shots");
    cmd_cal->add_option("--seed", cal_seed, "phase stream seed");
    cmd_cal->add_option("--out", cal_out, "calibration table CSV");

    // ---- metrics ----
    auto* cmd_metrics = app.add_subcommand("metrics", "linearity metrics of a density histogram");
    std::string met_density, met_table, met_out;
    cmd_metrics->add_option("--density", met_density, "density CSV")->required();
    cmd_metrics->add_option("--table", met_table, "optional calibration table to apply first");
    cmd_metrics->add_option("--out", met_out, "optional output CSV (prints otherwise)");

    // ---- ti ----
    auto* cmd_ti = app.add_subcommand("ti", "time-interval measurement sweep");
    std::vector<std::string> ti_models;
    std::string ti_table, ti_merged, ti_delays = "0:4000:50", ti_out = "ti.csv";
    int ti_reps = 3, ti_pairs = 1;
    double ti_jitter = 3.0;
    std::uint64_t ti_seed = 5;
    cmd_ti->add_option("--table", ti_table, "calibration table CSV")->required();
    cmd_ti->add_option("--models", ti_models, "model config files, one per TDL")->required()->delimiter(',');
    cmd_ti->add_option("--merged", ti_merged, "merged ordering CSV")->required();
    cmd_ti->add_option("--delays", ti_delays, "start:stop:step or comma list (ps)");
    cmd_ti->add_option("--reps", ti_reps, "repetitions per delay");
    cmd_ti->add_option("--pairs", ti_pairs, "pulse pairs per repetition");
    cmd_ti->add_option("--jitter-ps", ti_jitter, "Gaussian edge jitter sigma");
    cmd_ti->add_option("--seed", ti_seed, "stream seed");
    cmd_ti->add_option("--out", ti_out, "output CSV");

    // ---- full ----
    auto* cmd_full = app.add_subcommand("full", "run the end-to-end pipeline");
    std::string full_cfg;
    tdc::PipelineOverrides over;
    bool full_resume = false;
    cmd_full->add_option("--config", full_cfg, "pipeline config file")->required();
    cmd_full->add_option("--seed", over.seed, "override all seeds")->each([&](const std::string&) { over.has_seed = true; });
    cmd_full->add_option("--shots", over.shots, "override density shots")->each([&](const std::string&) { over.has_shots = true; });
    cmd_full->add_option("--threshold-ps", over.threshold_ps, "override the interleave threshold")->each([&](const std::string&) { over.has_threshold = true; });
    cmd_full->add_option("--out-dir", over.out_dir, "artifact directory")->each([&](const std::string&) { over.has_out_dir = true; });
    cmd_full->add_flag("--resume", full_resume, "skip stages whose marker exists");

    // ---- report ----
    auto* cmd_report = app.add_subcommand("report", "summarize an artifact directory");
    std::string report_dir;
    cmd_report->add_option("--dir", report_dir, "artifact directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_model->parsed()) {
            tdc::ModelConfig mc = tdc::load_model_config(model_cfg);
            if (model_seed_set) mc.rng_seed = model_seed;
            tdc::DelayLineModel model = tdc::DelayLineModel::build(mc);
            std::ofstream out = must_open(model_out);
            model.export_table(out);
            std::cout << "model: " << model.bin_count() << " bins over "
                      << tdc::format_double(model.clock_period_ps()) << " ps -> " << model_out << '\n';
        } else if (cmd_density->parsed()) {
            tdc::DelayLineModel model = tdc::DelayLineModel::build(tdc::load_model_config(den_cfg));
            tdc::Line line = tdc::group_line(model, tdc::GroupSelector{den_group, {}});
            tdc::EncoderConfig enc{den_k};
            tdc::Attribution att = den_attr == "prefix" ? tdc::Attribution::Prefix : tdc::Attribution::Datapath;
            tdc::DensityHistogram hist = tdc::run_density_test(line, den_shots, den_seed, enc, att);
            std::ofstream out = must_open(den_out);
            tdc::write_density_csv(out, hist);
            std::cout << "density: tapped fraction "
                      << tdc::format_double(tdc::tapped_pattern(hist).fraction()) << " -> " << den_out << '\n';
        } else if (cmd_por->parsed()) {
            tdc::DelayLineModel model = tdc::DelayLineModel::build(tdc::load_model_config(por_cfg));
            tdc::PorConfig pc;
            pc.shots = por_shots;
            pc.seed_base = por_seed;
            tdc::PorState state(model, por_group, pc);
            if (!por_resume.empty()) {
                std::ifstream in = must_read(por_resume);
                tdc::read_checkpoint(in, state);
            }
            std::vector<tdc::PorState*> states{&state};
            std::vector<tdc::PorIterationReport> reports = tdc::run_por(states, por_iterations);
            for (const tdc::PorIterationReport& r : reports)
                std::cout << "iteration " << r.iteration << ": tapped fraction "
                          << tdc::format_double(r.tapped_fraction) << ", converged units "
                          << r.converged_units << "/" << state.unit_count() << '\n';
            std::ofstream out = must_open(por_state_out);
            tdc::write_checkpoint(out, state);
            std::cout << "state -> " << por_state_out << '\n';
        } else if (cmd_iti->parsed()) {
            std::vector<tdc::BinTimeline> timelines;
            for (const std::string& p : iti_inputs) {
                std::ifstream in = must_read(p);
                timelines.push_back(tdc::read_timeline_csv(in));
            }
            tdc::MergedTdl merged = tdc::interleave(timelines, iti_threshold);
            std::ofstream out = must_open(iti_out);
            tdc::write_merged_csv(out, merged);
            std::cout << "merged " << merged.bins.size() << " bins -> " << iti_out << '\n';
        } else if (cmd_cal->parsed()) {
            std::vector<tdc::DelayLineModel> models = load_models(cal_models);
            std::vector<const tdc::DelayLineModel*> ptrs;
            for (const auto& m : models) ptrs.push_back(&m);
            std::ifstream min = must_read(cal_merged);
            tdc::MergedTdl merged = tdc::read_merged_csv(min);
            tdc::Line line = tdc::merged_line(ptrs, merged);
            tdc::DensityHistogram hist = tdc::run_density_test(line, cal_shots, cal_seed);
            tdc::CalibrationTable table = tdc::make_calibration_table(hist);
            std::ofstream out = must_open(cal_out);
            tdc::write_table_csv(out, table);
            std::cout << "calibrated " << table.bin_count() << " bins, lsb "
                      << tdc::format_double(table.lsb_ps) << " ps -> " << cal_out << '\n';
        } else if (cmd_metrics->parsed()) {
            std::ifstream din = must_read(met_density);
            tdc::DensityHistogram hist = tdc::read_density_csv(din);
            tdc::LinearityReport report;
            if (!met_table.empty()) {
                std::ifstream tin = must_read(met_table);
                tdc::CalibrationTable table = tdc::read_table_csv(tin);
                std::vector<double> counts(hist.counts.begin(), hist.counts.end());
                if (!counts.empty()) counts[0] += static_cast<double>(hist.underflow);
                report = tdc::linearity_of_counts(tdc::apply_calibration(counts, table.nu), hist.clock_period_ps);
            } else {
                report = tdc::linearity(tdc::folded_widths(hist), hist.clock_period_ps);
            }
            if (!met_out.empty()) {
                std::ofstream out = must_open(met_out);
                tdc::write_linearity_csv(out, report);
            } else {
                tdc::write_linearity_csv(std::cout, report);
            }
        } else if (cmd_ti->parsed()) {
            std::vector<tdc::DelayLineModel> models = load_models(ti_models);
            std::vector<const tdc::DelayLineModel*> ptrs;
            for (const auto& m : models) ptrs.push_back(&m);
            std::ifstream min = must_read(ti_merged);
            tdc::MergedTdl merged = tdc::read_merged_csv(min);
            tdc::Line line = tdc::merged_line(ptrs, merged);
            std::ifstream tin = must_read(ti_table);
            tdc::CalibrationTable table = tdc::read_table_csv(tin);
            tdc::TimestampChannel channel(line, table);
            tdc::TiRunConfig config;
            config.delays_ps = tdc::parse_delay_spec(ti_delays);
            config.repetitions = ti_reps;
            config.pairs_per_rep = ti_pairs;
            config.jitter_sigma_ps = ti_jitter;
            config.seed = ti_seed;
            tdc::TiReport report = tdc::run_ti(config, channel);
            std::ofstream out = must_open(ti_out);
            tdc::write_ti_csv(out, report);
            std::cout << "ti: global rms " << tdc::format_double(report.global_rms_ps) << " ps -> "
                      << ti_out << '\n';
        } else if (cmd_full->parsed()) {
            tdc::PipelineConfig config = tdc::load_pipeline_config(full_cfg);
            tdc::apply_overrides(config, over);
            return tdc::run_full_pipeline(config, std::cout, full_resume);
        } else if (cmd_report->parsed()) {
            return tdc::run_report(report_dir, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
