#include "tdc/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tdc/calib.hpp"
#include "tdc/density.hpp"
#include "tdc/iti.hpp"
#include "tdc/line.hpp"
#include "tdc/textio.hpp"

namespace fs = std::filesystem;

namespace tdc {

namespace {

std::string path_join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

std::string marker_path(const std::string& dir, const std::string& stage) {
    return path_join(dir, stage + ".done");
}

void write_marker(const std::string& dir, const std::string& stage) {
    open_out(marker_path(dir, stage)) << "done\n";
}

bool has_marker(const std::string& dir, const std::string& stage) {
    return fs::exists(marker_path(dir, stage));
}

DensityHistogram load_density(const std::string& path) {
    std::ifstream in = open_in(path);
    return read_density_csv(in);
}

void save_density(const std::string& path, const DensityHistogram& hist) {
    std::ofstream out = open_out(path);
    write_density_csv(out, hist);
}

MergedTdl load_merged(const std::string& path) {
    std::ifstream in = open_in(path);
    return read_merged_csv(in);
}

CalibrationTable load_table(const std::string& path) {
    std::ifstream in = open_in(path);
    return read_table_csv(in);
}

BinTimeline load_timeline(const std::string& path) {
    std::ifstream in = open_in(path);
    return read_timeline_csv(in);
}

void save_linearity(const std::string& path, const LinearityReport& report) {
    std::ofstream out = open_out(path);
    write_linearity_csv(out, report);
}

std::string model_cfg_name(int tdl) { return "model_t" + std::to_string(tdl) + ".cfg"; }
std::string model_tsv_name(int tdl) { return "model_t" + std::to_string(tdl) + ".tsv"; }
std::string density_pre_name(int tdl, int g) {
    return "density_pre_t" + std::to_string(tdl) + "_g" + std::to_string(g) + ".csv";
}
std::string density_cal_name(int tdl, int g) {
    return "density_cal_t" + std::to_string(tdl) + "_g" + std::to_string(g) + ".csv";
}
std::string por_state_name(int tdl, int g) {
    return "por_t" + std::to_string(tdl) + "_g" + std::to_string(g) + ".state";
}
std::string timeline_name(int tdl, int g) {
    return "timeline_t" + std::to_string(tdl) + "_g" + std::to_string(g) + ".csv";
}
std::string merged_tdl_name(int tdl) { return "merged_t" + std::to_string(tdl) + ".csv"; }

ModelConfig tdl_model_config(const PipelineConfig& config, int tdl) {
    ModelConfig mc = config.model_template;
    mc.rng_seed = config.model_template.rng_seed + config.tdl_seed_stride * static_cast<std::uint64_t>(tdl);
    return mc;
}

PorConfig por_config(const PipelineConfig& config) {
    PorConfig pc;
    pc.shots = config.shots;
    pc.seed_base = config.por_seed;
    pc.encoder = config.encoder;
    pc.ansatz_mode = config.ansatz_mode;
    return pc;
}

// Final perceived orderings recorded by the ordering stage, as group-slot
// permutations per (tdl, group).
Permutation load_group_perceived(const std::string& dir, DelayLineModel& model,
                                 const PipelineConfig& config, int tdl, int g) {
    PorState state(model, g, por_config(config));
    std::ifstream in = open_in(path_join(dir, por_state_name(tdl, g)));
    read_checkpoint(in, state);
    return state.group_perceived();
}

int density_workers() { return 2; }

}  // namespace

int recorded_resynth_rounds(const std::string& dir) {
    const std::string path = path_join(dir, "por_summary.csv");
    if (!fs::exists(path)) return 0;
    std::ifstream in = open_in(path);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.rfind("# rounds=", 0) == 0) return std::stoi(line.substr(9));
    }
    return 0;
}

std::vector<DelayLineModel> load_stage_models(const std::string& dir, int tdl_count, int resynth_rounds) {
    std::vector<DelayLineModel> models;
    models.reserve(static_cast<std::size_t>(tdl_count));
    for (int i = 0; i < tdl_count; ++i) {
        ModelConfig mc = load_model_config(path_join(dir, model_cfg_name(i)));
        DelayLineModel model = DelayLineModel::build(mc);
        for (int r = 0; r < resynth_rounds; ++r) model.resynthesize();
        models.push_back(std::move(model));
    }
    return models;
}

void stage_model(const PipelineConfig& config, const std::string& dir) {
    for (int i = 0; i < config.tdl_count; ++i) {
        ModelConfig mc = tdl_model_config(config, i);
        DelayLineModel model = DelayLineModel::build(mc);
        std::ofstream cfg_out = open_out(path_join(dir, model_cfg_name(i)));
        write_model_config(cfg_out, mc);
        std::ofstream tsv = open_out(path_join(dir, model_tsv_name(i)));
        model.export_table(tsv);
    }
}

void stage_density_pre(const PipelineConfig& config, const std::string& dir) {
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, 0);
    for (int i = 0; i < config.tdl_count; ++i) {
        for (int g = 0; g < 3; ++g) {
            Line line = group_line(models[static_cast<std::size_t>(i)], GroupSelector{g, {}}, i);
            DensityHistogram hist = run_density_test(line, config.shots, config.por_seed, config.encoder,
                                                     Attribution::Datapath, density_workers());
            save_density(path_join(dir, density_pre_name(i, g)), hist);
        }
    }
}

void stage_por(const PipelineConfig& config, const std::string& dir) {
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, 0);
    std::vector<PorState> states;
    states.reserve(static_cast<std::size_t>(config.tdl_count) * 3);
    for (int i = 0; i < config.tdl_count; ++i)
        for (int g = 0; g < 3; ++g) {
            if (!check_unit_isolation(models[static_cast<std::size_t>(i)], g))
                throw std::runtime_error("por: unit isolation violated in tdl " + std::to_string(i) +
                                         " group " + std::to_string(g));
            states.emplace_back(models[static_cast<std::size_t>(i)], g, por_config(config));
        }

    std::vector<PorState*> pointers;
    for (PorState& s : states) pointers.push_back(&s);
    std::vector<PorIterationReport> reports = run_por(pointers, config.por_iterations);
    const int rounds = states.empty() ? 0 : states.front().iteration();

    std::ofstream summary = open_out(path_join(dir, "por_summary.csv"));
    summary << "# rounds=" << rounds << '\n';
    summary << "tdl,group,iteration,tapped_fraction,converged_units,unit_count,boundaries_clean\n";
    const std::size_t segments = states.size();
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const PorIterationReport& rep = reports[r];
        const std::size_t seg = r % segments;
        summary << (seg / 3) << ',' << (seg % 3) << ',' << rep.iteration << ','
                << format_double(rep.tapped_fraction) << ',' << rep.converged_units << ','
                << rep.candidate_counts.size() << ',' << (rep.unit_boundaries_clean ? 1 : 0) << '\n';
    }

    for (std::size_t s = 0; s < states.size(); ++s) {
        int tdl = static_cast<int>(s) / 3, g = static_cast<int>(s) % 3;
        std::ofstream out = open_out(path_join(dir, por_state_name(tdl, g)));
        write_checkpoint(out, states[s]);
    }
}

void stage_timelines(const PipelineConfig& config, const std::string& dir) {
    const int rounds = recorded_resynth_rounds(dir);
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, rounds);

    std::ofstream segs = open_out(path_join(dir, "segment_tapped.csv"));
    segs << "tdl,group,bins,pre_tapped_fraction,post_tapped_fraction\n";

    for (int i = 0; i < config.tdl_count; ++i) {
        DelayLineModel& model = models[static_cast<std::size_t>(i)];
        for (int g = 0; g < 3; ++g) {
            Permutation perceived = load_group_perceived(dir, model, config, i, g);
            Line line = group_line(model, GroupSelector{g, perceived}, i);
            // One shared phase stream across every segment: estimated start
            // times inherit the empirical CDF's monotonicity, so the merge
            // preserves the true cross-segment ordering.
            DensityHistogram hist = run_density_test(line, config.cal_shots, config.cal_seed,
                                                     config.encoder, Attribution::Datapath,
                                                     density_workers());
            save_density(path_join(dir, density_cal_name(i, g)), hist);

            const std::vector<int> natural = group_physical_slots(model, g);
            std::vector<int> perceived_physical(perceived.size());
            for (std::size_t p = 0; p < perceived.size(); ++p)
                perceived_physical[p] = natural[static_cast<std::size_t>(perceived[p])];
            BinTimeline timeline = timeline_from_density(hist, perceived_physical, i);
            std::ofstream tout = open_out(path_join(dir, timeline_name(i, g)));
            write_timeline_csv(tout, timeline);

            DensityHistogram pre = load_density(path_join(dir, density_pre_name(i, g)));
            segs << i << ',' << g << ',' << hist.counts.size() << ','
                 << format_double(tapped_pattern(pre).fraction()) << ','
                 << format_double(tapped_pattern(hist).fraction()) << '\n';
        }
    }
}

void stage_iti(const PipelineConfig& config, const std::string& dir) {
    const int rounds = recorded_resynth_rounds(dir);
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, rounds);
    std::vector<const DelayLineModel*> model_ptrs;
    for (const DelayLineModel& m : models) model_ptrs.push_back(&m);

    std::vector<BinTimeline> all_timelines;
    for (int i = 0; i < config.tdl_count; ++i) {
        std::vector<BinTimeline> tdl_timelines;
        for (int g = 0; g < 3; ++g)
            tdl_timelines.push_back(load_timeline(path_join(dir, timeline_name(i, g))));
        MergedTdl per_tdl = interleave(tdl_timelines, config.iti_threshold_ps);
        std::ofstream mout = open_out(path_join(dir, merged_tdl_name(i)));
        write_merged_csv(mout, per_tdl);
        for (const BinTimeline& t : tdl_timelines) all_timelines.push_back(t);
    }

    MergedTdl merged = interleave(all_timelines, config.iti_threshold_ps);
    std::ofstream aout = open_out(path_join(dir, "merged_all.csv"));
    write_merged_csv(aout, merged);

    MergeReport report = validate_merge(model_ptrs, merged, config.sample_shots,
                                        config.validate_seed, config.encoder);
    double single_sum = 0.0;
    std::ostringstream singles;
    for (int i = 0; i < config.tdl_count; ++i) {
        MergedTdl per_tdl = load_merged(path_join(dir, merged_tdl_name(i)));
        single_sum += static_cast<double>(per_tdl.bins.size());
        singles << "single_tdl_bins_" << i << " = " << per_tdl.bins.size() << '\n';
    }
    const double mean_single = single_sum / config.tdl_count;

    std::ofstream rout = open_out(path_join(dir, "merge_report.txt"));
    rout << "bin_count = " << report.bin_count << '\n';
    rout << "tapped_fraction = " << format_double(report.tapped_fraction) << '\n';
    rout << "structural_missing = " << report.structural_missing << '\n';
    rout << "zero_count_bins = " << report.zero_count_bins << '\n';
    rout << "min_width_ps = " << format_double(report.min_width_ps) << '\n';
    rout << "max_width_ps = " << format_double(report.max_width_ps) << '\n';
    rout << "mean_width_ps = " << format_double(report.mean_width_ps) << '\n';
    rout << "validation_shots = " << report.shots << '\n';
    rout << singles.str();
    rout << "mean_single_tdl_bins = " << format_double(mean_single) << '\n';
    rout << "improvement_factor = " << format_double(report.bin_count / mean_single) << '\n';
}

void stage_calibrate(const PipelineConfig& config, const std::string& dir) {
    const int rounds = recorded_resynth_rounds(dir);
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, rounds);
    std::vector<const DelayLineModel*> model_ptrs;
    for (const DelayLineModel& m : models) model_ptrs.push_back(&m);

    MergedTdl merged = load_merged(path_join(dir, "merged_all.csv"));
    Line line = merged_line(model_ptrs, merged);
    DensityHistogram hist = run_density_test(line, config.weight_shots, config.weight_seed,
                                             config.encoder, Attribution::Datapath, density_workers());
    save_density(path_join(dir, "density_weight.csv"), hist);

    CalibrationTable table = make_calibration_table(hist);
    std::ofstream tout = open_out(path_join(dir, "cal_table.csv"));
    write_table_csv(tout, table);
}

namespace {

std::vector<double> folded_counts(const DensityHistogram& hist) {
    std::vector<double> counts(hist.counts.begin(), hist.counts.end());
    if (!counts.empty()) counts[0] += static_cast<double>(hist.underflow);
    return counts;
}

void write_width_histogram(std::ostream& out, const std::vector<double>& merged_w,
                           const std::vector<double>& calibrated_w) {
    double max_w = 0.0;
    for (double w : merged_w) max_w = std::max(max_w, w);
    for (double w : calibrated_w) max_w = std::max(max_w, w);
    const int buckets = 60;
    const double step = max_w > 0 ? max_w / buckets : 1.0;
    std::vector<int> a(buckets, 0), b(buckets, 0);
    auto bucket_of = [&](double w) { return std::min(buckets - 1, static_cast<int>(w / step)); };
    for (double w : merged_w) ++a[static_cast<std::size_t>(bucket_of(w))];
    for (double w : calibrated_w) ++b[static_cast<std::size_t>(bucket_of(w))];
    out << "width_lo_ps,width_hi_ps,merged_freq,calibrated_freq\n";
    for (int k = 0; k < buckets; ++k) {
        out << format_double(k * step) << ',' << format_double((k + 1) * step) << ','
            << format_double(static_cast<double>(a[static_cast<std::size_t>(k)]) / merged_w.size()) << ','
            << format_double(static_cast<double>(b[static_cast<std::size_t>(k)]) / calibrated_w.size())
            << '\n';
    }
}

struct SummaryColumns {
    LinearityReport raw, merged, calibrated;
};

void write_summary(std::ostream& out, const SummaryColumns& c) {
    auto row = [&](const std::string& name, auto get) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-18s %18s %18s %18s\n", name.c_str(), get(c.raw).c_str(),
                      get(c.merged).c_str(), get(c.calibrated).c_str());
        out << buf;
    };
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return std::string(buf);
    };
    out << "Linearity performance\n";
    char head[160];
    std::snprintf(head, sizeof(head), "%-18s %18s %18s %18s\n", "", "No POR & ITI", "POR + ITI",
                  "POR + ITI");
    out << head;
    std::snprintf(head, sizeof(head), "%-18s %18s %18s %18s\n", "", "(No Bin-width Cali)",
                  "(No Bin-width Cali)", "(Bin-width Cali)");
    out << head;
    row("DNL (LSB)", [&](const LinearityReport& r) { return "[" + fmt(r.dnl_min) + ", " + fmt(r.dnl_max) + "]"; });
    row("DNL_pk-pk (LSB)", [&](const LinearityReport& r) { return fmt(r.dnl_pkpk); });
    row("sigma_DNL (LSB)", [&](const LinearityReport& r) { return fmt(r.dnl_sigma); });
    row("INL (LSB)", [&](const LinearityReport& r) { return "[" + fmt(r.inl_min) + ", " + fmt(r.inl_max) + "]"; });
    row("INL_pk-pk (LSB)", [&](const LinearityReport& r) { return fmt(r.inl_pkpk); });
    row("sigma_INL (LSB)", [&](const LinearityReport& r) { return fmt(r.inl_sigma); });
    row("w_eq (ps)", [&](const LinearityReport& r) { return fmt(r.w_eq_ps); });
    row("sigma_eq (ps)", [&](const LinearityReport& r) { return fmt(r.sigma_eq_ps); });
    row("Resolution (ps)", [&](const LinearityReport& r) { return fmt(r.resolution_ps); });
}

}  // namespace

void stage_metrics(const PipelineConfig& config, const std::string& dir) {
    const int rounds = recorded_resynth_rounds(dir);
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, rounds);
    std::vector<const DelayLineModel*> model_ptrs;
    for (const DelayLineModel& m : models) model_ptrs.push_back(&m);

    // Column 1: one raw chain, physical scan order, no calibration at all.
    std::vector<DelayLineModel> raw_models = load_stage_models(dir, 1, 0);
    Line raw_line = full_line(raw_models[0], 0);
    DensityHistogram raw_hist = run_density_test(raw_line, config.sample_shots, config.validate_seed + 1,
                                                 config.encoder, Attribution::Datapath, density_workers());
    save_density(path_join(dir, "density_raw.csv"), raw_hist);
    LinearityReport raw_report = linearity(folded_widths(raw_hist), raw_hist.clock_period_ps);
    save_linearity(path_join(dir, "linearity_raw.csv"), raw_report);

    // Column 2: the fully merged line, uncalibrated counts.
    MergedTdl merged = load_merged(path_join(dir, "merged_all.csv"));
    Line line = merged_line(model_ptrs, merged);
    DensityHistogram merged_hist = run_density_test(line, config.sample_shots, config.validate_seed + 2,
                                                    config.encoder, Attribution::Datapath, density_workers());
    save_density(path_join(dir, "density_merged.csv"), merged_hist);
    LinearityReport merged_report = linearity(folded_widths(merged_hist), merged_hist.clock_period_ps);
    save_linearity(path_join(dir, "linearity_merged.csv"), merged_report);

    // Column 3: same run with the persisted weight factors applied.
    CalibrationTable table = load_table(path_join(dir, "cal_table.csv"));
    std::vector<double> calibrated = apply_calibration(folded_counts(merged_hist), table.nu);
    LinearityReport cal_report = linearity_of_counts(calibrated, merged_hist.clock_period_ps);
    save_linearity(path_join(dir, "linearity_calibrated.csv"), cal_report);

    double cal_total = 0.0;
    for (double c : calibrated) cal_total += c;
    std::vector<double> cal_widths(calibrated.size());
    for (std::size_t i = 0; i < calibrated.size(); ++i)
        cal_widths[i] = calibrated[i] / cal_total * merged_hist.clock_period_ps;
    std::ofstream hist_out = open_out(path_join(dir, "width_hist.csv"));
    write_width_histogram(hist_out, folded_widths(merged_hist), cal_widths);

    SummaryColumns columns{raw_report, merged_report, cal_report};
    std::ofstream summary_out = open_out(path_join(dir, "summary.txt"));
    write_summary(summary_out, columns);
}

void stage_ti(const PipelineConfig& config, const std::string& dir) {
    const int rounds = recorded_resynth_rounds(dir);
    std::vector<DelayLineModel> models = load_stage_models(dir, config.tdl_count, rounds);
    std::vector<const DelayLineModel*> model_ptrs;
    for (const DelayLineModel& m : models) model_ptrs.push_back(&m);

    MergedTdl merged = load_merged(path_join(dir, "merged_all.csv"));
    Line line = merged_line(model_ptrs, merged);
    CalibrationTable table = load_table(path_join(dir, "cal_table.csv"));
    TimestampChannel channel(line, table, config.encoder);

    TiRunConfig ti;
    ti.delays_ps = parse_delay_spec(config.ti_delays);
    ti.repetitions = config.ti_reps;
    ti.pairs_per_rep = config.ti_pairs;
    ti.jitter_sigma_ps = config.ti_jitter_ps;
    ti.seed = config.ti_seed;
    TiReport report = run_ti(ti, channel);
    std::ofstream out = open_out(path_join(dir, "ti.csv"));
    write_ti_csv(out, report);
}

PipelineConfig load_pipeline_config(const std::string& path) {
    KeyValueFile kv = load_key_value_file(path);
    PipelineConfig config;
    const fs::path base = fs::path(path).parent_path();
    std::string model_path = kv.get("model");
    if (fs::path(model_path).is_relative()) model_path = (base / model_path).string();
    config.model_template = load_model_config(model_path);

    config.tdl_count = static_cast<int>(kv.get_int("tdl_count", 1));
    config.tdl_seed_stride = static_cast<std::uint64_t>(kv.get_int("tdl_seed_stride", 1));
    config.shots = static_cast<std::uint64_t>(kv.get_int("shots", 5'000'000));
    config.cal_shots = static_cast<std::uint64_t>(kv.get_int("cal_shots", static_cast<std::int64_t>(config.shots)));
    config.weight_shots = static_cast<std::uint64_t>(kv.get_int("weight_shots", 20'000'000));
    config.sample_shots = static_cast<std::uint64_t>(kv.get_int("sample_shots", static_cast<std::int64_t>(config.shots)));
    config.por_iterations = static_cast<int>(kv.get_int("por_iterations", 2));
    config.iti_threshold_ps = kv.get_double("iti_threshold_ps", 0.2);
    config.encoder.run_length_k = static_cast<int>(kv.get_int("run_length_k", 1));
    std::string ansatz = kv.get_string("ansatz", "identity");
    if (ansatz == "identity") config.ansatz_mode = AnsatzMode::Identity;
    else if (ansatz == "pattern-library") config.ansatz_mode = AnsatzMode::PatternLibrary;
    else throw std::runtime_error("pipeline config: unknown ansatz '" + ansatz + "'");

    config.por_seed = static_cast<std::uint64_t>(kv.get_int("por_seed", 1));
    config.cal_seed = static_cast<std::uint64_t>(kv.get_int("cal_seed", 2));
    config.weight_seed = static_cast<std::uint64_t>(kv.get_int("weight_seed", 3));
    config.validate_seed = static_cast<std::uint64_t>(kv.get_int("validate_seed", 4));
    config.ti_seed = static_cast<std::uint64_t>(kv.get_int("ti_seed", 5));

    config.ti_delays = kv.get_string("ti_delays", config.ti_delays);
    config.ti_reps = static_cast<int>(kv.get_int("ti_reps", 3));
    config.ti_pairs = static_cast<int>(kv.get_int("ti_pairs", 10));
    config.ti_jitter_ps = kv.get_double("ti_jitter_ps", 0.0);

    config.out_dir = kv.get_string("out_dir", "out");
    const char* root = std::getenv("TDCCAL_OUT_ROOT");
    if (root && *root && fs::path(config.out_dir).is_relative())
        config.out_dir = (fs::path(root) / config.out_dir).string();
    return config;
}

void apply_overrides(PipelineConfig& config, const PipelineOverrides& overrides) {
    if (overrides.has_seed) {
        config.model_template.rng_seed = overrides.seed;
        config.por_seed = overrides.seed + 11;
        config.cal_seed = overrides.seed + 22;
        config.weight_seed = overrides.seed + 33;
        config.validate_seed = overrides.seed + 44;
        config.ti_seed = overrides.seed + 55;
    }
    if (overrides.has_shots) {
        config.shots = overrides.shots;
        config.cal_shots = overrides.shots;
        config.sample_shots = overrides.shots;
    }
    if (overrides.has_threshold) config.iti_threshold_ps = overrides.threshold_ps;
    if (overrides.has_out_dir) {
        config.out_dir = overrides.out_dir;
        const char* root = std::getenv("TDCCAL_OUT_ROOT");
        if (root && *root && fs::path(config.out_dir).is_relative())
            config.out_dir = (fs::path(root) / config.out_dir).string();
    }
}

int run_full_pipeline(const PipelineConfig& config, std::ostream& log, bool resume) {
    struct Stage {
        const char* name;
        int code;
        void (*run)(const PipelineConfig&, const std::string&);
    };
    const Stage stages[] = {
        {"model", kModelStage, stage_model},
        {"density", kDensityStage, stage_density_pre},
        {"por", kPorStage, stage_por},
        {"timelines", kTimelineStage, stage_timelines},
        {"iti", kItiStage, stage_iti},
        {"calibrate", kCalibrateStage, stage_calibrate},
        {"metrics", kMetricsStage, stage_metrics},
        {"ti", kTiStage, stage_ti},
    };

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) {
        log << "error: cannot create " << config.out_dir << '\n';
        return kConfigError;
    }

    for (const Stage& stage : stages) {
        if (resume && has_marker(config.out_dir, stage.name)) {
            log << "stage " << stage.name << ": already complete, skipping\n";
            continue;
        }
        try {
            stage.run(config, config.out_dir);
            write_marker(config.out_dir, stage.name);
            log << "stage " << stage.name << ": done\n";
        } catch (const std::exception& e) {
            log << "stage " << stage.name << " failed: " << e.what() << '\n';
            log << "partial state kept in " << config.out_dir << "; rerun with --resume after fixing\n";
            return stage.code;
        }
    }
    log << "artifacts in " << config.out_dir << '\n';
    return kOk;
}

int run_report(const std::string& artifact_dir, std::ostream& out) {
    const std::vector<std::string> expected = {
        "model_t0.cfg",       "model_t0.tsv",        "density_pre_t0_g0.csv", "por_summary.csv",
        "por_t0_g0.state",    "segment_tapped.csv",  "timeline_t0_g0.csv",    "merged_t0.csv",
        "merged_all.csv",     "merge_report.txt",    "density_weight.csv",    "cal_table.csv",
        "density_raw.csv",    "density_merged.csv",  "linearity_raw.csv",     "linearity_merged.csv",
        "linearity_calibrated.csv", "width_hist.csv", "summary.txt",          "ti.csv",
    };
    std::vector<std::string> missing;
    for (const std::string& name : expected)
        if (!fs::exists(path_join(artifact_dir, name))) missing.push_back(name);
    if (missing.size() == expected.size()) {
        out << "no artifacts found in " << artifact_dir << "; expected files:\n";
        for (const std::string& name : expected) out << "  " << name << '\n';
        return kReportError;
    }

    auto dump_file = [&](const std::string& name, const std::string& title) {
        const std::string path = path_join(artifact_dir, name);
        if (!fs::exists(path)) return;
        out << "== " << title << " ==\n";
        std::ifstream in(path);
        out << in.rdbuf() << '\n';
    };

    dump_file("summary.txt", "linearity summary");
    dump_file("segment_tapped.csv", "tapped fraction per segment");
    dump_file("merge_report.txt", "merge validation");
    if (fs::exists(path_join(artifact_dir, "ti.csv"))) {
        std::ifstream in(path_join(artifact_dir, "ti.csv"));
        std::string line;
        std::getline(in, line);
        out << "== time-interval sweep ==\n" << line << " (full sweep in ti.csv)\n\n";
    }

    if (!missing.empty()) {
        out << "incomplete run; missing artifacts:\n";
        for (const std::string& name : missing) out << "  " << name << '\n';
    }
    return kOk;
}

}  // namespace tdc
