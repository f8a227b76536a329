#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tdc/pipeline.hpp"

using namespace tdc;
namespace fs = std::filesystem;

namespace {

PipelineConfig demo_config(const std::string& out_dir) {
    PipelineConfig config;
    config.model_template.clock_period_ps = 4000.0;
    config.model_template.num_carry_cells = 6;
    config.model_template.nominal_tap_delay_ps = 75.0;
    config.model_template.jitter_sigma_ps = 24.0;
    config.model_template.rng_seed = 808;
    config.tdl_count = 2;
    config.shots = 60000;
    config.cal_shots = 120000;
    config.weight_shots = 200000;
    config.sample_shots = 120000;
    config.por_iterations = 4;
    config.iti_threshold_ps = 0.2;
    config.ti_delays = "333.25:3000.25:888";
    config.ti_reps = 3;
    config.ti_pairs = 5;
    config.ti_jitter_ps = 4.0;
    config.out_dir = out_dir;
    return config;
}

std::map<std::string, std::string> dir_contents(const std::string& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        out[entry.path().filename().string()] = buf.str();
    }
    return out;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("full pipeline runs, is deterministic, and resumes identically") {
    TempDir dir_a("tdccal_test_a");
    TempDir dir_b("tdccal_test_b");
    TempDir dir_c("tdccal_test_c");

    std::ostringstream log;
    PipelineConfig a = demo_config(dir_a.str());
    REQUIRE(run_full_pipeline(a, log) == kOk);

    PipelineConfig b = demo_config(dir_b.str());
    REQUIRE(run_full_pipeline(b, log) == kOk);

    std::map<std::string, std::string> files_a = dir_contents(dir_a.str());
    std::map<std::string, std::string> files_b = dir_contents(dir_b.str());
    REQUIRE(files_a.size() == files_b.size());
    for (const auto& [name, content] : files_a) {
        REQUIRE(files_b.count(name) == 1);
        CHECK_MESSAGE(files_b[name] == content, "artifact differs: ", name);
    }
    CHECK(files_a.count("summary.txt") == 1);
    CHECK(files_a.count("merged_all.csv") == 1);
    CHECK(files_a.count("ti.csv") == 1);

    // interrupt after the ordering stage, then resume
    PipelineConfig c = demo_config(dir_c.str());
    fs::create_directories(dir_c.path);
    stage_model(c, dir_c.str());
    std::ofstream(dir_c.path / "model.done") << "done\n";
    stage_density_pre(c, dir_c.str());
    std::ofstream(dir_c.path / "density.done") << "done\n";
    stage_por(c, dir_c.str());
    std::ofstream(dir_c.path / "por.done") << "done\n";
    REQUIRE(run_full_pipeline(c, log, true) == kOk);
    std::map<std::string, std::string> files_c = dir_contents(dir_c.str());
    for (const auto& [name, content] : files_a) {
        REQUIRE(files_c.count(name) == 1);
        CHECK_MESSAGE(files_c[name] == content, "resumed artifact differs: ", name);
    }
}

TEST_CASE("pipeline reports the failing stage") {
    TempDir dir("tdccal_test_fail");
    PipelineConfig bad = demo_config(dir.str());
    bad.model_template.nominal_tap_delay_ps = 200.0;  // 48 bins * 200 > 4000
    std::ostringstream log;
    CHECK(run_full_pipeline(bad, log) == kModelStage);
    CHECK(log.str().find("stage model failed") != std::string::npos);
}

TEST_CASE("report on an empty directory lists the expected artifacts") {
    TempDir dir("tdccal_test_empty");
    std::ostringstream out;
    CHECK(run_report(dir.str(), out) == kReportError);
    CHECK(out.str().find("summary.txt") != std::string::npos);
    CHECK(out.str().find("merged_all.csv") != std::string::npos);
}

TEST_CASE("report renders a complete run and flags partial ones") {
    TempDir dir("tdccal_test_report");
    PipelineConfig config = demo_config(dir.str());
    std::ostringstream log;
    REQUIRE(run_full_pipeline(config, log) == kOk);

    std::ostringstream out;
    CHECK(run_report(dir.str(), out) == kOk);
    CHECK(out.str().find("No POR & ITI") != std::string::npos);
    CHECK(out.str().find("tapped fraction per segment") != std::string::npos);
    CHECK(out.str().find("missing artifacts") == std::string::npos);

    fs::remove(dir.path / "ti.csv");
    fs::remove(dir.path / "summary.txt");
    std::ostringstream partial;
    CHECK(run_report(dir.str(), partial) == kOk);
    CHECK(partial.str().find("missing artifacts") != std::string::npos);
    CHECK(partial.str().find("ti.csv") != std::string::npos);
}

TEST_CASE("pipeline config file parsing and overrides") {
    TempDir dir("tdccal_test_cfg");
    {
        std::ofstream model_cfg(dir.path / "m.cfg");
        model_cfg << "clock_period_ps = 4000\nnum_carry_cells = 6\n"
                  << "nominal_tap_delay_ps = 70\njitter_sigma_ps = 5\nseed = 3\n";
        std::ofstream pipe_cfg(dir.path / "p.cfg");
        pipe_cfg << "model = m.cfg\ntdl_count = 2\nshots = 12345\n"
                 << "iti_threshold_ps = 0.5\nout_dir = artifacts\n";
    }
    PipelineConfig config = load_pipeline_config((dir.path / "p.cfg").string());
    CHECK(config.tdl_count == 2);
    CHECK(config.shots == 12345);
    CHECK(config.cal_shots == 12345);  // defaults to shots
    CHECK(config.iti_threshold_ps == 0.5);
    CHECK(config.model_template.num_carry_cells == 6);

    PipelineOverrides over;
    over.has_seed = true;
    over.seed = 999;
    over.has_shots = true;
    over.shots = 777;
    over.has_threshold = true;
    over.threshold_ps = 0.25;
    apply_overrides(config, over);
    CHECK(config.model_template.rng_seed == 999);
    CHECK(config.shots == 777);
    CHECK(config.iti_threshold_ps == 0.25);
}

TEST_CASE("output root environment variable anchors relative out dirs") {
    TempDir dir("tdccal_test_envroot");
    {
        std::ofstream model_cfg(dir.path / "m.cfg");
        model_cfg << "clock_period_ps = 4000\nnum_carry_cells = 6\n"
                  << "nominal_tap_delay_ps = 70\njitter_sigma_ps = 5\nseed = 3\n";
        std::ofstream pipe_cfg(dir.path / "p.cfg");
        pipe_cfg << "model = m.cfg\nout_dir = artifacts\n";
    }
    setenv("TDCCAL_OUT_ROOT", dir.str().c_str(), 1);
    PipelineConfig config = load_pipeline_config((dir.path / "p.cfg").string());
    unsetenv("TDCCAL_OUT_ROOT");
    CHECK(config.out_dir == (dir.path / "artifacts").string());
}
